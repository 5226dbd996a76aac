use num_complex::Complex64 as C64;

use super::transfer::{eigvec_near, fixed_point_matrix, is_primitive, normalize, transfer_op, TransferOp, PERIPHERAL_TOL};
use super::MpsTensor;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

const FIXED_POINT_TOL: f64 = 1e-10;
const DEGENERACY_TOL: f64 = 1e-10;

/// Gauge-fixed primitive MPS: T(I) = I and the left fixed point ρ is
/// diagonal with descending entries.
#[derive(Clone, Debug)]
pub struct CanonicalMps {
    pub tensor: MpsTensor,
    pub rho: CMat,
    pub rho_diag: Vec<f64>,
    /// S with tensor_μ = S⁻¹ (v_μ/√r) S.
    pub basis_change: CMat,
    /// Factor 1/√r applied to the input.
    pub scale: f64,
    pub right_residual: f64,
    pub left_residual: f64,
}

impl CanonicalMps {
    pub fn d(&self) -> usize {
        self.tensor.d()
    }

    pub fn k(&self) -> usize {
        self.tensor.k()
    }

    pub fn transfer(&self) -> TransferOp {
        transfer_op(&self.tensor)
    }

    /// Ê_A(X) = Σ_{μν} A_{μν} v_μ X v_ν*.
    pub fn apply_observable(&self, a: &CMat, x: &CMat) -> CMat {
        let v = self.tensor.matrices();
        let mut out = CMat::zeros(x.dim());
        for (mu, vm) in v.iter().enumerate() {
            let vx = vm.dot(x);
            for (nu, vn) in v.iter().enumerate() {
                let c = a[[mu, nu]];
                if c != linalg::ZERO {
                    out = out + vx.dot(&linalg::dagger(vn)).mapv(|z| z * c);
                }
            }
        }
        out
    }
}

/// Orthonormal eigenbasis of a Hermitian matrix, eigenvalues descending.
/// Degenerate eigenspaces get a deterministic basis: Gram-Schmidt of the
/// projected standard basis vectors, each column phase-fixed.
pub(crate) fn canonical_eigenbasis(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = a.nrows();
    let (w, v) = linalg::eigh(a)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.reverse();
    let mut vals = Vec::with_capacity(n);
    let mut cols: Vec<ndarray::Array1<C64>> = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && (w[order[i]] - w[order[j]]).abs() <= DEGENERACY_TOL * (1.0 + w[order[i]].abs()) {
            j += 1;
        }
        let block: Vec<usize> = order[i..j].to_vec();
        let mut sub = CMat::zeros((n, block.len()));
        for (c, &b) in block.iter().enumerate() {
            sub.column_mut(c).assign(&v.column(b));
        }
        let p = linalg::projector(&sub);
        let mut found: Vec<ndarray::Array1<C64>> = Vec::new();
        for e in 0..n {
            if found.len() == block.len() {
                break;
            }
            let mut x = p.column(e).to_owned();
            for f in &found {
                let ov = linalg::inner(f, &x);
                x = x - f.mapv(|z| z * ov);
            }
            let nx = linalg::vec_norm(&x);
            if nx > 1e-6 {
                x.mapv_inplace(|z| z / nx);
                linalg::fix_phase_vec(&mut x, 1e-10);
                found.push(x);
            }
        }
        if found.len() != block.len() {
            return Err(Error::Linalg("failed to build an eigenbasis for a degenerate eigenspace".into()));
        }
        for (c, f) in found.into_iter().enumerate() {
            vals.push(w[block[c]]);
            cols.push(f);
        }
        i = j;
    }
    let mut basis = CMat::zeros((n, n));
    for (c, col) in cols.iter().enumerate() {
        basis.column_mut(c).assign(col);
    }
    Ok((vals, basis))
}

pub fn canonical_form(v: &MpsTensor) -> Result<CanonicalMps> {
    let report = is_primitive(v)?;
    if !report.primitive {
        return Err(Error::Precondition(format!("canonical form needs a primitive tensor ({})", v.label())));
    }
    let r = report.spectral_radius;
    let vn = normalize(v)?;
    let k = vn.k();
    let t = transfer_op(&vn);

    let (_, rv) = eigvec_near(&t.matrix, linalg::ONE)?;
    let e = fixed_point_matrix(&rv, k).ok_or_else(|| Error::DegenerateTensor("right fixed point has zero trace".into()))?;
    let e_half = linalg::pd_power(&e, 0.5)?;
    let e_mhalf = linalg::pd_power(&e, -0.5)?;
    let v1: Vec<CMat> = vn.matrices().iter().map(|m| e_mhalf.dot(m).dot(&e_half)).collect();
    let v1 = MpsTensor::new(v1, vn.label())?;

    let t1 = transfer_op(&v1);
    let (_, lv) = eigvec_near(&linalg::dagger(&t1.matrix), linalg::ONE)?;
    let rho1 = fixed_point_matrix(&lv, k).ok_or_else(|| Error::DegenerateTensor("left fixed point has zero trace".into()))?;
    let (vals, w) = canonical_eigenbasis(&rho1)?;
    if vals.iter().any(|&x| x <= 0.0) {
        return Err(Error::DegenerateTensor("left fixed point is not faithful".into()));
    }
    let wd = linalg::dagger(&w);
    let v2: Vec<CMat> = v1.matrices().iter().map(|m| wd.dot(m).dot(&w)).collect();
    let tensor = MpsTensor::new(v2, v.label())?;
    let mut rho = CMat::zeros((k, k));
    for (i, &x) in vals.iter().enumerate() {
        rho[[i, i]] = C64::new(x, 0.0);
    }
    let t2 = transfer_op(&tensor);
    let right_residual = linalg::max_abs(&(t2.apply(&linalg::eye(k)) - linalg::eye(k)));
    let left_residual = linalg::max_abs(&(t2.apply_adjoint(&rho) - &rho));
    if right_residual > FIXED_POINT_TOL || left_residual > FIXED_POINT_TOL {
        return Err(Error::Linalg(format!(
            "canonical gauge residuals too large (right {right_residual:e}, left {left_residual:e})"
        )));
    }
    Ok(CanonicalMps {
        tensor,
        rho,
        rho_diag: vals,
        basis_change: e_half.dot(&w),
        scale: 1.0 / r.sqrt(),
        right_residual,
        left_residual,
    })
}

/// ω(A₁ ⊗ ⋯ ⊗ A_l) = tr(ρ Ê_{A₁}(⋯ Ê_{A_l}(I))).
pub fn expectation(c: &CanonicalMps, sites: &[CMat]) -> Result<C64> {
    let d = c.d();
    for (i, a) in sites.iter().enumerate() {
        if a.dim() != (d, d) {
            return Err(Error::InvalidArgument(format!("observable {i} has shape {:?}, expected {d}x{d}", a.dim())));
        }
    }
    let mut x = linalg::eye(c.k());
    for a in sites.iter().rev() {
        x = c.apply_observable(a, &x);
    }
    Ok(linalg::trace(&c.rho.dot(&x)))
}

/// −1/ln|λ₂| with λ₂ the largest non-peripheral transfer eigenvalue; 0 when
/// there is none (k = 1) or λ₂ = 0.
pub fn correlation_length(c: &CanonicalMps) -> Result<f64> {
    let w = c.transfer().spectrum()?;
    let lam2 = w.iter().map(|z| z.norm()).find(|&x| x < 1.0 - PERIPHERAL_TOL);
    Ok(match lam2 {
        Some(x) if x > 0.0 => -1.0 / x.ln(),
        _ => 0.0,
    })
}
