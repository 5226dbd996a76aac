//! Adiabatic transport of ground-state projectors along gapped paths of
//! Hermitian matrices, generated by the filtered derivative D(s).

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::mps::MatrixRepr;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const DEFAULT_GAP_SAMPLES: usize = 64;
pub const FD_STEP: f64 = 1e-5;
const GAP_SLACK: f64 = 1e-9;
const GROUND_TOL: f64 = 1e-8;

/// Ŵ_γ(k): −i/(√(2π) k) for |k| ≥ γ, −i k/(√(2π) γ²) inside the gap.
pub fn filter_fourier(k: f64, gamma: f64) -> C64 {
    let norm = (2.0 * std::f64::consts::PI).sqrt();
    if k.abs() >= gamma {
        C64::new(0.0, -1.0 / (norm * k))
    } else {
        C64::new(0.0, -k / (norm * gamma * gamma))
    }
}

type PathFn = Arc<dyn Fn(f64) -> CMat + Send + Sync>;

#[derive(Clone)]
enum PathKind {
    /// (1 − s) A + s B
    Linear { a: CMat, b: CMat },
    /// e^{sA} H₀ e^{−sA}, A anti-Hermitian
    Rotation { a: CMat, h0: CMat },
    /// piecewise linear through (knots[i], mats[i])
    Checkpoints { knots: Vec<f64>, mats: Vec<CMat> },
    /// arbitrary H(s); derivative by central differences
    Function(PathFn),
}

#[derive(Clone)]
pub struct GappedPath {
    pub dim: usize,
    pub gamma: f64,
    pub label: String,
    kind: PathKind,
}

impl std::fmt::Debug for GappedPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GappedPath").field("dim", &self.dim).field("gamma", &self.gamma).field("label", &self.label).finish()
    }
}

fn check_hermitian(h: &CMat, what: &str) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::InvalidArgument(format!("{what} is not square")));
    }
    let defect = linalg::hermiticity_defect(h);
    if defect > HERMITIAN_TOL {
        return Err(Error::InvalidArgument(format!("{what} is not Hermitian (defect {defect:e})")));
    }
    Ok(())
}

impl GappedPath {
    fn new(dim: usize, gamma: f64, label: &str, kind: PathKind) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("declared gap must be positive, got {gamma}")));
        }
        let p = GappedPath { dim, gamma, label: label.into(), kind };
        for i in 0..=8 {
            let s = i as f64 / 8.0;
            let h = p.hamiltonian(s);
            if h.dim() != (dim, dim) {
                return Err(Error::InvalidArgument(format!("H({s}) has shape {:?}, expected {dim}x{dim}", h.dim())));
            }
            check_hermitian(&h, &format!("H({s})"))?;
        }
        Ok(p)
    }

    pub fn linear(a: CMat, b: CMat, gamma: f64, label: &str) -> Result<Self> {
        check_hermitian(&a, "start matrix")?;
        check_hermitian(&b, "end matrix")?;
        if a.dim() != b.dim() {
            return Err(Error::InvalidArgument("endpoints have different shapes".into()));
        }
        GappedPath::new(a.nrows(), gamma, label, PathKind::Linear { a, b })
    }

    pub fn rotation(a: CMat, h0: CMat, gamma: f64, label: &str) -> Result<Self> {
        check_hermitian(&h0, "H0")?;
        let defect = linalg::max_abs(&(&a + &linalg::dagger(&a)));
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidArgument(format!("rotation generator is not anti-Hermitian ({defect:e})")));
        }
        GappedPath::new(h0.nrows(), gamma, label, PathKind::Rotation { a, h0 })
    }

    pub fn checkpoints(knots: Vec<f64>, mats: Vec<CMat>, gamma: f64, label: &str) -> Result<Self> {
        if mats.len() < 2 || knots.len() != mats.len() {
            return Err(Error::InvalidArgument("need at least two checkpoints and one knot per checkpoint".into()));
        }
        if knots[0] != 0.0 || *knots.last().unwrap() != 1.0 || knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("knots must increase strictly from 0 to 1".into()));
        }
        for (i, m) in mats.iter().enumerate() {
            check_hermitian(m, &format!("checkpoint {i}"))?;
        }
        GappedPath::new(mats[0].nrows(), gamma, label, PathKind::Checkpoints { knots, mats })
    }

    pub fn from_fn(dim: usize, gamma: f64, label: &str, f: impl Fn(f64) -> CMat + Send + Sync + 'static) -> Result<Self> {
        GappedPath::new(dim, gamma, label, PathKind::Function(Arc::new(f)))
    }

    /// (1 − s) σ3 + s σ1 with declared gap √2.
    pub fn zx_interp() -> Self {
        let [x, _, z] = crate::mps::pauli();
        GappedPath::linear(z, x, 2f64.sqrt(), "zx-interp").unwrap()
    }

    /// e^{sA} diag(0, 2) e^{−sA} with A = (π/2) iσ2, declared gap 2.
    pub fn builtin_rotation() -> Self {
        let a = crate::mps::pauli()[1].mapv(|z| z * C64::new(0.0, std::f64::consts::FRAC_PI_2));
        let mut h0 = CMat::zeros((2, 2));
        h0[[1, 1]] = C64::new(2.0, 0.0);
        GappedPath::rotation(a, h0, 2.0, "rotation").unwrap()
    }

    pub fn derivative_is_finite_difference(&self) -> bool {
        matches!(self.kind, PathKind::Function(_))
    }

    pub fn hamiltonian(&self, s: f64) -> CMat {
        match &self.kind {
            PathKind::Linear { a, b } => a.mapv(|z| z * (1.0 - s)) + b.mapv(|z| z * s),
            PathKind::Rotation { a, h0 } => {
                let (e, ei) = rotation_pair(a, s);
                e.dot(h0).dot(&ei)
            }
            PathKind::Checkpoints { knots, mats } => {
                let i = segment(knots, s);
                let t = (s - knots[i]) / (knots[i + 1] - knots[i]);
                mats[i].mapv(|z| z * (1.0 - t)) + mats[i + 1].mapv(|z| z * t)
            }
            PathKind::Function(f) => linalg::hermitian_part(&f(s)),
        }
    }

    pub fn derivative(&self, s: f64) -> CMat {
        self.derivative_sided(s, false)
    }

    /// H′(s); at a checkpoint knot `from_left` selects the left segment.
    pub fn derivative_sided(&self, s: f64, from_left: bool) -> CMat {
        match &self.kind {
            PathKind::Linear { a, b } => b - a,
            PathKind::Rotation { a, .. } => linalg::commutator(a, &self.hamiltonian(s)),
            PathKind::Checkpoints { knots, mats } => {
                let mut i = segment(knots, s);
                if from_left && i > 0 && s == knots[i] {
                    i -= 1;
                }
                (&mats[i + 1] - &mats[i]).mapv(|z| z / (knots[i + 1] - knots[i]))
            }
            PathKind::Function(_) => (self.hamiltonian(s + FD_STEP) - self.hamiltonian(s - FD_STEP)).mapv(|z| z / (2.0 * FD_STEP)),
        }
    }

    /// Spectral data at s with the gap checked against the declared γ.
    pub fn spectral_data(&self, s: f64) -> Result<Spectral> {
        let h = self.hamiltonian(s);
        let (e, v) = linalg::eigh(&h)?;
        let e0 = e[0];
        let scale = 1.0 + e0.abs();
        let rank = e.iter().take_while(|&&x| x - e0 <= GROUND_TOL * scale).count();
        let observed = if rank < e.len() { e[rank] - e0 } else { f64::INFINITY };
        if observed < self.gamma - GAP_SLACK * self.gamma.max(1.0) {
            return Err(Error::GapViolation { s, observed, declared: self.gamma });
        }
        Ok(Spectral { energies: e.to_vec(), vectors: v, rank, observed_gap: observed })
    }

    /// Validates the declared gap on a uniform grid.
    pub fn validate_gap(&self, samples: usize) -> Result<f64> {
        let mut worst = f64::INFINITY;
        for i in 0..samples.max(2) {
            let s = i as f64 / (samples.max(2) - 1) as f64;
            worst = worst.min(self.spectral_data(s)?.observed_gap);
        }
        Ok(worst)
    }

    pub fn to_file(&self) -> Option<PathFile> {
        let rows = |m: &CMat| MatrixRepr::Rows(m.rows().into_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect());
        match &self.kind {
            PathKind::Linear { a, b } => Some(PathFile { gamma: self.gamma, knots: Some(vec![0.0, 1.0]), matrices: vec![rows(a), rows(b)], label: Some(self.label.clone()) }),
            PathKind::Checkpoints { knots, mats } => Some(PathFile { gamma: self.gamma, knots: Some(knots.clone()), matrices: mats.iter().map(rows).collect(), label: Some(self.label.clone()) }),
            _ => None,
        }
    }

    pub fn from_file(f: PathFile) -> Result<Self> {
        let n = f.matrices.len();
        if n < 2 {
            return Err(Error::Parse("a path needs at least two checkpoint matrices".into()));
        }
        let knots = f.knots.unwrap_or_else(|| (0..n).map(|i| i as f64 / (n - 1) as f64).collect());
        let mut mats = Vec::with_capacity(n);
        for (i, m) in f.matrices.into_iter().enumerate() {
            let rows = match m {
                MatrixRepr::Rows(r) => r,
                MatrixRepr::Flat(_) => return Err(Error::Parse(format!("checkpoint {i} must be given as rows"))),
            };
            let dim = rows.len();
            if rows.iter().any(|r| r.len() != dim) {
                return Err(Error::Parse(format!("checkpoint {i} is not square")));
            }
            mats.push(CMat::from_shape_vec((dim, dim), rows.into_iter().flatten().map(|[re, im]| C64::new(re, im)).collect()).unwrap());
        }
        if mats.iter().any(|m| m.dim() != mats[0].dim()) {
            return Err(Error::Parse("checkpoints have different shapes".into()));
        }
        GappedPath::checkpoints(knots, mats, f.gamma, f.label.as_deref().unwrap_or("file"))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        GappedPath::from_file(serde_json::from_str(text)?)
    }
}

fn segment(knots: &[f64], s: f64) -> usize {
    let last = knots.len() - 2;
    (0..=last).find(|&i| s < knots[i + 1]).unwrap_or(last)
}

/// (e^{sA}, e^{−sA}) for anti-Hermitian A, via the Hermitian −iA.
fn rotation_pair(a: &CMat, s: f64) -> (CMat, CMat) {
    let k = a.mapv(|z| z * C64::new(0.0, -1.0));
    let e = linalg::expi_hermitian(&k, s).expect("eigh of a small Hermitian matrix");
    let ei = linalg::dagger(&e);
    (e, ei)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathFile {
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<f64>>,
    pub matrices: Vec<MatrixRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Spectral {
    pub energies: Vec<f64>,
    pub vectors: CMat,
    /// Dimension of the ground eigenspace.
    pub rank: usize,
    pub observed_gap: f64,
}

impl Spectral {
    pub fn ground_projector(&self) -> CMat {
        let cols = self.vectors.slice(ndarray::s![.., ..self.rank]).to_owned();
        linalg::projector(&cols)
    }
}

/// D(s) with D_{mn} = √(2π) Ŵ_γ(E_n − E_m) H′_{mn} in the eigenbasis of H(s),
/// so that P′ = i[D, P].
pub fn hastings_generator(path: &GappedPath, s: f64) -> Result<CMat> {
    let sp = path.spectral_data(s)?;
    Ok(generator_from(path, &sp, &path.derivative(s)))
}

fn generator_from(path: &GappedPath, sp: &Spectral, dh: &CMat) -> CMat {
    let v = &sp.vectors;
    let vd = linalg::dagger(v);
    let dh_eig = vd.dot(dh).dot(v);
    let norm = (2.0 * std::f64::consts::PI).sqrt();
    let n = path.dim;
    let d_eig = CMat::from_shape_fn((n, n), |(m, k)| dh_eig[[m, k]] * filter_fourier(sp.energies[k] - sp.energies[m], path.gamma) * norm);
    v.dot(&d_eig).dot(&vd)
}

/// Resolvent form of the ground/excited block: i(X − X*) with
/// X = P H′ (E₀ − H)⁻¹ (1 − P).
pub fn resolvent_block(path: &GappedPath, s: f64) -> Result<CMat> {
    let sp = path.spectral_data(s)?;
    let v = &sp.vectors;
    let vd = linalg::dagger(v);
    let dh_eig = vd.dot(&path.derivative(s)).dot(v);
    let n = path.dim;
    let e0 = sp.energies[0];
    let x = CMat::from_shape_fn((n, n), |(m, k)| {
        if m < sp.rank && k >= sp.rank {
            dh_eig[[m, k]] / (e0 - sp.energies[k])
        } else {
            linalg::ZERO
        }
    });
    let blk = (&x - &linalg::dagger(&x)).mapv(|z| z * linalg::I);
    Ok(v.dot(&blk).dot(&vd))
}

/// Ground/excited block P D (1 − P) + (1 − P) D P of a matrix.
pub fn off_diagonal_block(m: &CMat, p: &CMat) -> CMat {
    let q = linalg::eye(p.nrows()) - p;
    p.dot(m).dot(&q) + q.dot(m).dot(p)
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowPoint {
    pub s: f64,
    pub deviation: f64,
    pub observed_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowResult {
    pub steps: usize,
    pub rank: usize,
    pub max_deviation: f64,
    pub max_unitarity_defect: f64,
    pub min_observed_gap: f64,
    pub derivative_is_finite_difference: bool,
    pub points: Vec<FlowPoint>,
    #[serde(skip)]
    pub final_unitary: CMat,
}

/// RK4 for U′ = i D(s) U on a uniform grid, re-unitarized after every step,
/// compared with the exact ground projectors on the grid.
pub fn transport(path: &GappedPath, steps: usize) -> Result<FlowResult> {
    if steps < 16 {
        return Err(Error::InvalidArgument(format!("transport needs at least 16 steps, got {steps}")));
    }
    let min_sampled = path.validate_gap(DEFAULT_GAP_SAMPLES)?;
    let n = path.dim;
    let h = 1.0 / steps as f64;
    let gen = |s: f64| -> Result<(CMat, Spectral)> {
        let sp = path.spectral_data(s)?;
        let d = generator_from(path, &sp, &path.derivative(s));
        Ok((d, sp))
    };
    // kinks of checkpoint paths: the step ending at a knot uses the left slope
    let gen_left = |s: f64, sp: &Spectral| generator_from(path, sp, &path.derivative_sided(s, true));
    let (mut d_start, sp0) = gen(0.0)?;
    let p0 = sp0.ground_projector();
    let rank = sp0.rank;
    let mut u = linalg::eye(n);
    let mut points = vec![FlowPoint { s: 0.0, deviation: 0.0, observed_gap: sp0.observed_gap }];
    let (mut max_dev, mut max_unit, mut min_gap) = (0.0f64, 0.0f64, sp0.observed_gap.min(min_sampled));
    let rhs = |d: &CMat, x: &CMat| d.dot(x).mapv(|z| z * linalg::I);
    for j in 0..steps {
        let s = j as f64 * h;
        let (d_mid, sp_mid) = gen(s + 0.5 * h)?;
        let s_end = if j + 1 == steps { 1.0 } else { (j + 1) as f64 * h };
        let (d_end, sp_end) = gen(s_end)?;
        let d_end_left = gen_left(s_end, &sp_end);
        let k1 = rhs(&d_start, &u);
        let k2 = rhs(&d_mid, &(&u + &k1.mapv(|z| z * (0.5 * h))));
        let k3 = rhs(&d_mid, &(&u + &k2.mapv(|z| z * (0.5 * h))));
        let k4 = rhs(&d_end_left, &(&u + &k3.mapv(|z| z * h)));
        let incr = (k1 + k2.mapv(|z| z * 2.0) + k3.mapv(|z| z * 2.0) + k4).mapv(|z| z * (h / 6.0));
        u = linalg::polar_unitary(&(&u + &incr))?;
        max_unit = max_unit.max(linalg::unitarity_defect(&u)?);
        if sp_end.rank != rank {
            return Err(Error::GapViolation { s: s_end, observed: sp_end.observed_gap, declared: path.gamma });
        }
        let transported = u.dot(&p0).dot(&linalg::dagger(&u));
        let dev = linalg::op_norm(&(transported - sp_end.ground_projector()))?;
        max_dev = max_dev.max(dev);
        min_gap = min_gap.min(sp_mid.observed_gap).min(sp_end.observed_gap);
        points.push(FlowPoint { s: s_end, deviation: dev, observed_gap: sp_end.observed_gap });
        d_start = d_end;
    }
    Ok(FlowResult {
        steps,
        rank,
        max_deviation: max_dev,
        max_unitarity_defect: max_unit,
        min_observed_gap: min_gap,
        derivative_is_finite_difference: path.derivative_is_finite_difference(),
        points,
        final_unitary: u,
    })
}

/// ‖(P(s+h) − P(s−h))/(2h) − i[D(s), P(s)]‖.
pub fn derivative_identity_check(path: &GappedPath, s: f64, h: f64) -> Result<f64> {
    let p = |t: f64| -> Result<CMat> { Ok(path.spectral_data(t)?.ground_projector()) };
    let fd = (p(s + h)? - p(s - h)?).mapv(|z| z / (2.0 * h));
    let d = hastings_generator(path, s)?;
    let ps = p(s)?;
    let comm = linalg::commutator(&d, &ps).mapv(|z| z * linalg::I);
    linalg::op_norm(&(fd - comm))
}

/// Measured convergence order log2(dev(n)/dev(2n)) for consecutive step counts.
pub fn convergence_orders(path: &GappedPath, step_counts: &[usize]) -> Result<Vec<(usize, f64, Option<f64>)>> {
    let devs = step_counts.iter().map(|&n| Ok((n, transport(path, n)?.max_deviation))).collect::<Result<Vec<_>>>()?;
    Ok(devs
        .iter()
        .enumerate()
        .map(|(i, &(n, dv))| {
            let order = (i > 0).then(|| {
                let (n0, d0) = devs[i - 1];
                (d0 / dv).ln() / (n as f64 / n0 as f64).ln()
            });
            (n, dv, order)
        })
        .collect())
}
