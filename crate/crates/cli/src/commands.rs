use serde_json::{json, Value};

use sptkit::cohomology::{cohomology_group, default_modulus, index_tuple, is_cocycle, Cochain};
use sptkit::dw2d::{self, Identity, Sampling};
use sptkit::mps::{canonical_form, correlation_length, is_primitive, transfer_op};
use sptkit::parent_ham::{gap_scan, intersection_check, DENSE_CAP};
use sptkit::spectral_flow::{derivative_identity_check, transport};
use sptkit::spt_indices::{lsm_obstruction, onsite_h2_index, reflection_z2_index, INTERTWINER_TOL, REFLECTION_TOL};

use crate::error::{CliError, CliResult};
use crate::registry::{self, Inputs};
use crate::RunConfig;

const COMMON: &[&str] = &["output", "emit", "timing"];

fn allowed(command: &str) -> &'static [&'static str] {
    match command {
        "cohomology" => &["group", "degree", "modulus", "class"],
        "mps-check" => &["mps"],
        "parent-ham" => &["mps", "m", "n_range", "tolerance"],
        "index-onsite" => &["mps", "group", "rep", "tolerance"],
        "index-reflection" => &["mps", "tolerance"],
        "lsm" => &["rep", "mps", "group", "tolerance"],
        "spectral-flow" => &["path", "steps", "tolerance"],
        "dw-verify" => &["group", "class", "L", "identities", "samples", "seed", "allow_small_l"],
        "dw-extract" => &["group", "class"],
        _ => &[],
    }
}

/// Rejects fields the command does not read, and non-positive caps.
pub fn check_fields(command: &str, c: &RunConfig) -> CliResult<()> {
    let ok = allowed(command);
    for f in c.set_fields() {
        if !ok.contains(&f.as_str()) && !COMMON.contains(&f.as_str()) {
            return Err(CliError::Usage(format!("{f} is not used by {command}; it accepts {}", ok.join(", "))));
        }
    }
    let positive = [("steps", c.steps), ("samples", c.samples), ("m", c.m), ("degree", c.degree)];
    for (name, v) in positive {
        if v == Some(0) {
            return Err(CliError::Usage(format!("{name} must be positive")));
        }
    }
    if c.modulus == Some(0) {
        return Err(CliError::Usage("modulus must be positive".into()));
    }
    if let Some(t) = c.tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Usage(format!("tolerance must be a positive number, got {t}")));
        }
    }
    Ok(())
}

pub fn dispatch(command: &str, c: RunConfig, inputs: &mut Inputs) -> CliResult<(RunConfig, Value, bool)> {
    match command {
        "cohomology" => cohomology(c, inputs),
        "mps-check" => mps_check(c, inputs),
        "parent-ham" => parent_ham(c, inputs),
        "index-onsite" => index_onsite(c, inputs),
        "index-reflection" => index_reflection(c, inputs),
        "lsm" => lsm(c, inputs),
        "spectral-flow" => spectral_flow(c, inputs),
        "dw-verify" => dw_verify(c, inputs),
        "dw-extract" => dw_extract(c, inputs),
        _ => Err(CliError::Usage(format!("unknown command {command}"))),
    }
}

/// Nonzero entries as [g_1, ..., g_n, exponent].
fn nonzero(c: &Cochain) -> Vec<Vec<u64>> {
    let n = c.group().order();
    c.values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(i, &v)| index_tuple(i, c.degree(), n).into_iter().map(|g| g as u64).chain([v]).collect())
        .collect()
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("result serializes")
}

fn class_ids(order: usize, class: Option<usize>) -> CliResult<Vec<usize>> {
    match class {
        Some(id) if id >= order => Err(CliError::Usage(format!("class {id} out of range; the group has {order} classes"))),
        Some(id) => Ok(vec![id]),
        None => Ok((0..order).collect()),
    }
}

fn parse_range(text: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Usage(format!("n-range {text:?} must look like a..b (inclusive)"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

fn cohomology(mut c: RunConfig, inputs: &mut Inputs) -> CliResult<(RunConfig, Value, bool)> {
    let gs = c.group.get_or_insert_with(|| "Z2".into()).clone();
    let g = registry::group(&gs, inputs)?;
    let n = *c.degree.get_or_insert(2);
    let m = *c.modulus.get_or_insert(default_modulus(&g, None));
    let h = cohomology_group(&g, n, m)?;
    let ids = class_ids(h.order(), c.class)?;
    let classes: Vec<Value> = ids
        .iter()
        .map(|&id| {
            let rep = &h.classes()[id].representative;
            json!({ "class_id": id, "order": h.element_orders()[id], "representative": nonzero(rep) })
        })
        .collect();
    let passed = h.classes().iter().all(|k| is_cocycle(&k.representative));
    let results = json!({
        "group": g.label(),
        "group_order": g.order(),
        "degree": n,
        "modulus": m,
        "order": h.order(),
        "element_orders": h.element_orders(),
        "addition_table": h.addition_table(),
        "classes": classes,
        "warnings": h.warnings(),
    });
    Ok((c, results, passed))
}

fn mps_check(mut c: RunConfig, inputs: &mut Inputs) -> CliResult<(RunConfig, Value, bool)> {
    let spec = c.mps.get_or_insert_with(|| "aklt".into()).clone();
    let (v, _) = registry::mps(&spec, inputs)?;
    let report = is_primitive(&v)?;
    let mut spectrum = transfer_op(&v).spectrum()?;
    let r = report.spectral_radius;
    spectrum.iter_mut().for_each(|z| *z /= r);
    spectrum.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)).then(b.im.total_cmp(&a.im)));
    let xi = if report.primitive { Some(correlation_length(&canonical_form(&v)?)?) } else { None };
    let results = json!({
        "label": v.label(),
        "d": v.d(),
        "k": v.k(),
        "primitivity": to_value(&report),
        "normalized_transfer_spectrum": spectrum.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "correlation_length": xi,
    });
    Ok((c, results, report.criteria_agree))
}

fn parent_ham(mut c: RunConfig, inputs: &mut Inputs) -> CliResult<(RunConfig, Value, bool)> {
    let spec = c.mps.get_or_insert_with(|| "aklt".into()).clone();
    let (v, _) = registry::mps(&spec, inputs)?;
    let m = *c.m.get_or_insert(2);
    let ns = parse_range(c.n_range.get_or_insert_with(|| "3..8".into()))?;
    if ns[0] < m {
        return Err(CliError::Usage(format!("chain lengths must be at least m = {m}")));
    }
    let tol = *c.tolerance.get_or_insert(1e-8);
    let scan = gap_scan(&v, m, ns.iter().copied())?;
    let mut inter = Vec::new();
    for &n in &ns {
        if (v.d() as u128).pow(n as u32) <= (2 * DENSE_CAP) as u128 {
            inter.push(intersection_check(&v, m, n)?);
        }
    }
    let constant = scan.windows(2).all(|w| w[0].kernel_dim == w[1].kernel_dim);
    let min_gap = scan.iter().filter_map(|s| s.gap).fold(f64::INFINITY, f64::min);
    let gaps_open = scan.iter().all(|s| s.gap.is_some_and(|g| g > tol));
    let holds = inter.iter().all(|r| r.holds);
    let results = json!({
        "label": v.label(),
        "m": m,
        "scan": to_value(&scan),
        "kernel_dim_constant": constant,
        "min_gap": if min_gap.is_finite() { Some(min_gap) } else { None },
        "intersection": to_value(&inter),
    });
    Ok((c, results, constant && gaps_open && holds))
}

fn index_onsite(mut c: RunConfig, inputs: &mut Inputs) -> CliResult<(RunConfig, Value, bool)> {
    let spec = c.mps.get_or_insert_with(|| "aklt".into()).clone();
    let (v, dims) = registry::mps(&spec, inputs)?;
    let group = c.group.clone().map(|g| registry::group(&g, inputs)).transpose()?;
    let rep = registry::rep(c.rep.get_or_insert_with(|| "pauli".into()), Some(&dims), group.as_ref())?;
    if let Some(g) = &group {
        if g.table() != rep.group().table() {
            return Err(CliError::Usage(format!("--group {} does not match the group of the representation", g.label())));
        }
    }
    if rep.dim() != v.d() {
        return Err(CliError::Usage(format!("representation has dimension {}, the MPS has d = {}", rep.dim(), v.d())));
    }
    let tol = *c.tolerance.get_or_insert(INTERTWINER_TOL);
    let r = onsite_h2_index(&canonical_form(&v)?, &rep)?;
    let results = json!({
        "class_id": r.class.class_id,
        "nontrivial": r.class.class_id != 0,
        "h2_order": r.group_order,
        "sigma_modulus": r.sigma.modulus(),
        "sigma": nonzero(&r.sigma),
        "per_g": to_value(&r.per_g),
        "max_residual": r.max_residual,
        "max_projectivity_defect": r.max_projectivity_defect,
    });
    Ok((c, results, r.max_residual <= tol))
}

fn index_reflection(mut c: RunConfig, inputs: &mut Inputs) -> CliResult<(RunConfig, Value, bool)> {
    let spec = c.mps.get_or_insert_with(|| "aklt".into()).clone();
    let (v, _) = registry::mps(&spec, inputs)?;
    let tol = *c.tolerance.get_or_insert(REFLECTION_TOL);
    let r = reflection_z2_index(&canonical_form(&v)?)?;
    let passed = r.residual <= tol;
    Ok((c, to_value(&r), passed))
}

fn lsm(mut c: RunConfig, inputs: &mut Inputs) -> CliResult<(RunConfig, Value, bool)> {
    let dims = match c.mps.clone() {
        Some(s) => Some(registry::mps(&s, inputs)?.1),
        None => None,
    };
    let group = c.group.clone().map(|g| registry::group(&g, inputs)).transpose()?;
    let spec = c.rep.get_or_insert_with(|| "pauli:2".into()).clone();
    let rep = registry::rep(&spec, dims.as_deref(), group.as_ref())?;
    let tol = *c.tolerance.get_or_insert(INTERTWINER_TOL);
    let r = lsm_obstruction(&rep)?;
    let results = json!({
        "dim": rep.dim(),
        "class_id": r.class.class_id,
        "obstructed": r.obstructed,
        "lambda_modulus": r.lambda.modulus(),
        "lambda": nonzero(&r.lambda),
        "max_residual": r.max_residual,
    });
    Ok((c, results, r.max_residual <= tol))
}

/// Interior points for the derivative identity, away from checkpoint knots
/// of uniformly spaced files.
const DERIVATIVE_SAMPLES: [f64; 4] = [0.13, 0.37, 0.61, 0.89];
const DERIVATIVE_TOL: f64 = 1e-5;
const DERIVATIVE_H: f64 = 1e-4;

fn spectral_flow(mut c: RunConfig, inputs: &mut Inputs) -> CliResult<(RunConfig, Value, bool)> {
    let spec = c.path.get_or_insert_with(|| "zx-interp".into()).clone();
    let path = registry::path(&spec, inputs)?;
    let steps = *c.steps.get_or_insert(1024);
    let tol = *c.tolerance.get_or_insert(1e-6);
    let flow = transport(&path, steps)?;
    let checks = DERIVATIVE_SAMPLES
        .iter()
        .map(|&s| Ok(json!({ "s": s, "residual": derivative_identity_check(&path, s, DERIVATIVE_H)? })))
        .collect::<CliResult<Vec<Value>>>()?;
    let deriv_ok = checks.iter().all(|x| x["residual"].as_f64().is_some_and(|r| r <= DERIVATIVE_TOL));
    let passed = flow.max_deviation <= tol && deriv_ok;
    let results = json!({
        "flow": to_value(&flow),
        "derivative_identity": checks,
        "derivative_tolerance": DERIVATIVE_TOL,
    });
    Ok((c, results, passed))
}

fn parse_identities(text: &str) -> CliResult<Vec<Identity>> {
    if text == "all" {
        return Ok(Identity::ALL.to_vec());
    }
    Ok(text.split(',').map(|s| Identity::parse(s.trim())).collect::<sptkit::Result<Vec<_>>>()?)
}

fn dw_verify(mut c: RunConfig, inputs: &mut Inputs) -> CliResult<(RunConfig, Value, bool)> {
    let gs = c.group.get_or_insert_with(|| "Z2".into()).clone();
    let g = registry::group(&gs, inputs)?;
    let l = *c.l.get_or_insert(dw2d::MIN_L);
    let ids = parse_identities(c.identities.get_or_insert_with(|| "all".into()))?;
    let sampling = Sampling { samples: *c.samples.get_or_insert(dw2d::DEFAULT_SAMPLES), seed: *c.seed.get_or_insert(dw2d::DEFAULT_SEED) };
    let small = *c.allow_small_l.get_or_insert(false);
    let (_, h3) = dw2d::class_cocycle(&g, 0)?;
    let mut passed = true;
    let mut conformant = true;
    let mut out = Vec::new();
    for id in class_ids(h3.order(), c.class)? {
        let (nu, _) = dw2d::class_cocycle(&g, id)?;
        let pairing = dw2d::verify_pairing(&nu, 3);
        let mut reports = Vec::new();
        for &which in &ids {
            let r = if small { dw2d::verify_identity_any_l(&nu, which, l, sampling)? } else { dw2d::verify_identity(&nu, which, l, sampling)? };
            passed &= r.passed;
            conformant &= r.conformant;
            reports.push(r);
        }
        passed &= pairing.passed;
        out.push(json!({ "class_id": id, "pairing": to_value(&pairing), "identities": to_value(&reports) }));
    }
    let results = json!({
        "group": g.label(),
        "h3_order": h3.order(),
        "modulus": h3.modulus(),
        "L": l,
        "conformant": conformant,
        "classes": out,
    });
    Ok((c, results, passed))
}

fn dw_extract(mut c: RunConfig, inputs: &mut Inputs) -> CliResult<(RunConfig, Value, bool)> {
    let gs = c.group.get_or_insert_with(|| "Z2".into()).clone();
    let g = registry::group(&gs, inputs)?;
    let (_, h3) = dw2d::class_cocycle(&g, 0)?;
    let mut passed = true;
    let mut out = Vec::new();
    for id in class_ids(h3.order(), c.class)? {
        let (nu, _) = dw2d::class_cocycle(&g, id)?;
        let r = dw2d::extract_h3(&nu, &h3)?;
        passed &= r.agrees && r.is_cocycle;
        out.push(json!({
            "class_id": id,
            "extracted_class_id": r.class.class_id,
            "expected_class_id": r.expected.class_id,
            "is_cocycle": r.is_cocycle,
            "agrees": r.agrees,
            "cocycle": nonzero(&r.cocycle),
        }));
    }
    let results = json!({ "group": g.label(), "h3_order": h3.order(), "modulus": h3.modulus(), "classes": out });
    Ok((c, results, passed))
}
