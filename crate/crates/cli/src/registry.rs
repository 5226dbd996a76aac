use std::path::Path;

use sptkit::groups::{direct_product, make_cyclic, pauli_z2z2_rep, FiniteGroup, UnitaryRep};
use sptkit::mps::MpsTensor;
use sptkit::spectral_flow::GappedPath;

use crate::error::{CliError, CliResult};

const GROUPS: &str = "Z<n>, products such as Z2xZ2, or a JSON group file";
const MPS: &str = "aklt, aklt-cartesian, ghz, product:<d>, stacks a+b, or a JSON tensor file";
const REPS: &str = "pauli (per stacked factor), pauli:<d>, trivial, trivial:<d>, stacks a+b";
const PATHS: &str = "zx-interp, rotation, or a JSON checkpoint file";

/// Contents of every file read while resolving names, for the input digest.
#[derive(Default)]
pub struct Inputs {
    pub files: Vec<(String, String)>,
}

impl Inputs {
    fn read(&mut self, path: &str) -> CliResult<String> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.into(), message: e.to_string() })?;
        self.files.push((path.into(), text.clone()));
        Ok(text)
    }
}

fn looks_like_file(spec: &str) -> bool {
    spec.ends_with(".json") || Path::new(spec).is_file()
}

fn parse_count(text: &str, what: &str) -> CliResult<usize> {
    text.parse().map_err(|_| CliError::Usage(format!("{what}: {text:?} is not a non-negative integer")))
}

pub fn group(spec: &str, inputs: &mut Inputs) -> CliResult<FiniteGroup> {
    if looks_like_file(spec) {
        return Ok(FiniteGroup::from_json(&inputs.read(spec)?)?);
    }
    let unknown = || CliError::UnknownName { kind: "group", name: spec.into(), known: GROUPS };
    let mut acc: Option<FiniteGroup> = None;
    for part in spec.split('x') {
        let n = part.strip_prefix('Z').and_then(|d| d.parse::<usize>().ok()).ok_or_else(unknown)?;
        let z = make_cyclic(n)?;
        acc = Some(match acc {
            None => z,
            Some(g) => direct_product(&g, &z),
        });
    }
    Ok(acc.ok_or_else(unknown)?.with_label(spec))
}

/// The tensor together with the physical dimension of each stacked factor.
pub fn mps(spec: &str, inputs: &mut Inputs) -> CliResult<(MpsTensor, Vec<usize>)> {
    let mut acc: Option<MpsTensor> = None;
    let mut dims = Vec::new();
    for part in spec.split('+') {
        let t = match part {
            "aklt" => MpsTensor::aklt(),
            "aklt-cartesian" => MpsTensor::aklt_cartesian(),
            "ghz" => MpsTensor::ghz(),
            p if p.starts_with("product:") => MpsTensor::product(parse_count(&p["product:".len()..], "product dimension")?)?,
            p if looks_like_file(p) => MpsTensor::from_json(&inputs.read(p)?)?,
            _ => return Err(CliError::UnknownName { kind: "mps", name: part.into(), known: MPS }),
        };
        dims.push(t.d());
        acc = Some(match acc {
            None => t,
            Some(a) => a.stack(&t),
        });
    }
    let t = acc.ok_or_else(|| CliError::UnknownName { kind: "mps", name: spec.into(), known: MPS })?;
    Ok((t, dims))
}

/// `mps_dims` are the factor dimensions of the state the representation acts on,
/// `group` the group to use for trivial representations.
pub fn rep(spec: &str, mps_dims: Option<&[usize]>, group: Option<&FiniteGroup>) -> CliResult<UnitaryRep> {
    let unknown = |name: &str| CliError::UnknownName { kind: "rep", name: name.into(), known: REPS };
    let parts: Vec<&str> = spec.split('+').collect();
    let mut factors = Vec::new();
    for (i, part) in parts.iter().enumerate() {
        // a bare name applies to every stacked factor, or to the matching one
        let dims_here: Vec<usize> = match (part.split_once(':'), mps_dims) {
            (Some((_, d)), _) => vec![parse_count(d, "representation dimension")?],
            (None, Some(dims)) if parts.len() == 1 => dims.to_vec(),
            (None, Some(dims)) if parts.len() == dims.len() => vec![dims[i]],
            (None, _) => return Err(CliError::Usage(format!("representation {part:?} needs a dimension ({part}:<d>) or a matching --mps"))),
        };
        let name = part.split(':').next().unwrap_or_default();
        for d in dims_here {
            factors.push(match name {
                "pauli" => pauli_z2z2_rep(d)?,
                "trivial" => {
                    let g = match group {
                        Some(g) => g.clone(),
                        None => return Err(CliError::Usage("the trivial representation needs --group".into())),
                    };
                    UnitaryRep::trivial(g, d)
                }
                _ => return Err(unknown(part)),
            });
        }
    }
    let mut it = factors.into_iter();
    let first = it.next().ok_or_else(|| unknown(spec))?;
    Ok(it.try_fold(first, |acc, r| acc.tensor(&r))?)
}

pub fn path(spec: &str, inputs: &mut Inputs) -> CliResult<GappedPath> {
    match spec {
        "zx-interp" => Ok(GappedPath::zx_interp()),
        "rotation" => Ok(GappedPath::builtin_rotation()),
        p if looks_like_file(p) => Ok(GappedPath::from_json(&inputs.read(p)?)?),
        _ => Err(CliError::UnknownName { kind: "path", name: spec.into(), known: PATHS }),
    }
}
