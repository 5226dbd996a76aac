use num_complex::Complex64 as C64;
use serde::Serialize;

use super::MpsTensor;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};

/// |λ| ≥ 1 − PERIPHERAL_TOL counts as peripheral for a normalized tensor.
pub const PERIPHERAL_TOL: f64 = 1e-8;
const FAITHFUL_TOL: f64 = 1e-10;
const SPAN_REL_TOL: f64 = 1e-8;

/// Matrix of A ↦ Σ v_μ A v_μ* on column-stacked vec(A), i.e. Σ conj(v_μ) ⊗ v_μ.
#[derive(Clone, Debug)]
pub struct TransferOp {
    pub k: usize,
    pub matrix: CMat,
}

impl TransferOp {
    pub fn apply(&self, a: &CMat) -> CMat {
        linalg::unvectorize(&self.matrix.dot(&linalg::vectorize(a)), self.k)
    }

    /// Adjoint map A ↦ Σ v_μ* A v_μ.
    pub fn apply_adjoint(&self, a: &CMat) -> CMat {
        linalg::unvectorize(&linalg::dagger(&self.matrix).dot(&linalg::vectorize(a)), self.k)
    }

    /// Eigenvalues sorted by decreasing modulus (ties by argument).
    pub fn spectrum(&self) -> Result<Vec<C64>> {
        let (w, _) = linalg::eig(&self.matrix)?;
        let mut w = w.to_vec();
        sort_by_modulus(&mut w);
        Ok(w)
    }
}

fn sort_by_modulus(w: &mut [C64]) {
    w.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap().then(a.arg().partial_cmp(&b.arg()).unwrap()));
}

pub fn transfer_op(v: &MpsTensor) -> TransferOp {
    let k = v.k();
    let mut t = CMat::zeros((k * k, k * k));
    for m in v.matrices() {
        t = t + linalg::kron(&linalg::conj(m), m);
    }
    TransferOp { k, matrix: t }
}

pub fn spectral_radius(v: &MpsTensor) -> Result<f64> {
    let w = transfer_op(v).spectrum()?;
    Ok(w[0].norm())
}

/// Rescale to spectral radius 1.
pub fn normalize(v: &MpsTensor) -> Result<MpsTensor> {
    let r = spectral_radius(v)?;
    if r <= f64::MIN_POSITIVE || v.matrices().iter().all(|m| linalg::max_abs(m) == 0.0) {
        return Err(Error::DegenerateTensor("transfer operator has spectral radius 0".into()));
    }
    Ok(v.scaled(C64::new(1.0 / r.sqrt(), 0.0)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SpanOutcome {
    /// Words of this exact length span all of M_k.
    Full { length: usize },
    /// The word spaces became periodic below dimension k²; they never fill M_k.
    Stabilized { length: usize, dim: usize },
    /// Gave up at the length cap.
    CapHit { cap: usize, dim: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimitivityReport {
    pub primitive: bool,
    pub spectral_radius: f64,
    pub peripheral_eigenvalues: Vec<[f64; 2]>,
    /// Smallest eigenvalue of the trace-one fixed points; absent when the
    /// fixed point is not unique.
    pub fixed_point_min_eigenvalue: Option<f64>,
    pub spectral_verdict: bool,
    pub span: SpanOutcome,
    pub span_length: Option<usize>,
    pub criteria_agree: bool,
}

/// Hermitian, trace-one version of a fixed point eigenvector.
pub(crate) fn fixed_point_matrix(vec: &CVec, k: usize) -> Option<CMat> {
    let mut x = linalg::unvectorize(vec, k);
    let tr = linalg::trace(&x);
    if tr.norm() < 1e-12 {
        return None;
    }
    x.mapv_inplace(|z| z / tr);
    Some(linalg::hermitian_part(&x))
}

/// Eigenvector of `m` for the eigenvalue closest to `target`.
pub(crate) fn eigvec_near(m: &CMat, target: C64) -> Result<(C64, CVec)> {
    let (w, v) = linalg::eig(m)?;
    let i = (0..w.len()).min_by(|&a, &b| (w[a] - target).norm().partial_cmp(&(w[b] - target).norm()).unwrap()).unwrap();
    Ok((w[i], v.column(i).to_owned()))
}

fn spectral_criterion(t: &TransferOp) -> Result<(bool, Vec<C64>, Option<f64>)> {
    let w = t.spectrum()?;
    let peripheral: Vec<C64> = w.iter().copied().filter(|z| z.norm() >= 1.0 - PERIPHERAL_TOL).collect();
    let single_one = peripheral.len() == 1 && (peripheral[0] - linalg::ONE).norm() <= PERIPHERAL_TOL;
    if !single_one {
        return Ok((false, peripheral, None));
    }
    let k = t.k;
    let (_, r) = eigvec_near(&t.matrix, linalg::ONE)?;
    let (_, l) = eigvec_near(&linalg::dagger(&t.matrix), linalg::ONE)?;
    let mut min_eig = f64::INFINITY;
    for v in [r, l] {
        match fixed_point_matrix(&v, k) {
            Some(x) => min_eig = min_eig.min(linalg::eigvalsh(&x)?[0]),
            None => min_eig = min_eig.min(0.0),
        }
    }
    Ok((min_eig > FAITHFUL_TOL, peripheral, Some(min_eig)))
}

/// Grow K_m = span{v_{μ1}⋯v_{μm}} until it is all of M_k, repeats an
/// earlier space, or hits the length cap.
fn span_criterion(v: &MpsTensor) -> Result<SpanOutcome> {
    let k = v.k();
    let full = k * k;
    let cap = full * full + 1;
    let to_basis = |mats: &[CMat]| -> Result<CMat> {
        let mut a = CMat::zeros((full, mats.len()));
        for (j, m) in mats.iter().enumerate() {
            a.column_mut(j).assign(&linalg::vectorize(m));
        }
        linalg::range_basis(&a, SPAN_REL_TOL)
    };
    let mut basis = to_basis(v.matrices())?;
    let mut history: Vec<CMat> = Vec::new();
    for length in 1..=cap {
        let dim = basis.ncols();
        if dim == full {
            return Ok(SpanOutcome::Full { length });
        }
        let proj = linalg::projector(&basis);
        if history.iter().any(|p| p.dim() == proj.dim() && linalg::max_abs(&(p - &proj)) < 1e-8) {
            return Ok(SpanOutcome::Stabilized { length, dim });
        }
        history.push(proj);
        if length == cap {
            return Ok(SpanOutcome::CapHit { cap, dim });
        }
        let mut next = Vec::with_capacity(dim * v.d());
        for j in 0..dim {
            let w = linalg::unvectorize(&basis.column(j).to_owned(), k);
            for m in v.matrices() {
                next.push(w.dot(m));
            }
        }
        basis = to_basis(&next)?;
    }
    unreachable!()
}

/// Checks primitivity by both the peripheral-spectrum criterion and the
/// word-span criterion. The input is normalized first.
pub fn is_primitive(v: &MpsTensor) -> Result<PrimitivityReport> {
    let r = spectral_radius(v)?;
    let vn = normalize(v)?;
    let t = transfer_op(&vn);
    let (spectral, peripheral, min_eig) = spectral_criterion(&t)?;
    let span = span_criterion(&vn)?;
    let span_ok = matches!(span, SpanOutcome::Full { .. });
    if spectral != span_ok {
        return Err(Error::NumericalAmbiguity { spectral, span: span_ok });
    }
    Ok(PrimitivityReport {
        primitive: spectral,
        spectral_radius: r,
        peripheral_eigenvalues: peripheral.iter().map(|z| [z.re, z.im]).collect(),
        fixed_point_min_eigenvalue: min_eig,
        spectral_verdict: spectral,
        span_length: match span {
            SpanOutcome::Full { length } => Some(length),
            _ => None,
        },
        span,
        criteria_agree: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn transfer_matrix_acts_like_kraus_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mats = (0..3).map(|_| linalg::random_complex(3, 3, &mut rng)).collect();
        let v = MpsTensor::new(mats, "rand").unwrap();
        let t = transfer_op(&v);
        let a = linalg::random_complex(3, 3, &mut rng);
        let direct = v.matrices().iter().fold(CMat::zeros((3, 3)), |acc, m| acc + m.dot(&a).dot(&linalg::dagger(m)));
        assert!(linalg::max_abs(&(t.apply(&a) - direct)) < 1e-12);
        let adj = v.matrices().iter().fold(CMat::zeros((3, 3)), |acc, m| acc + linalg::dagger(m).dot(&a).dot(m));
        assert!(linalg::max_abs(&(t.apply_adjoint(&a) - adj)) < 1e-12);
    }

    #[test]
    fn ghz_transfer_is_diagonal() {
        let t = transfer_op(&MpsTensor::ghz());
        let mut want = CMat::zeros((4, 4));
        want[[0, 0]] = linalg::ONE;
        want[[3, 3]] = linalg::ONE;
        assert_eq!(t.matrix, want);
    }

    #[test]
    fn periodic_tensor_is_not_primitive() {
        // (σ⁺, σ⁻): peripheral spectrum {1, -1}, word spaces alternate
        let mut p = CMat::zeros((2, 2));
        p[[0, 1]] = linalg::ONE;
        let v = MpsTensor::new(vec![p.clone(), p.t().to_owned()], "flip").unwrap();
        let r = is_primitive(&v).unwrap();
        assert!(!r.primitive);
        assert_eq!(r.peripheral_eigenvalues.len(), 2);
        assert!(matches!(r.span, SpanOutcome::Stabilized { dim: 2, .. }));
    }
}
