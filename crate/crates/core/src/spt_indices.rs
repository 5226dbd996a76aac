//! SPT invariants of primitive MPS: the H² class of an on-site symmetry,
//! the reflection sign, and LSM-type obstructions of the on-site action.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::cohomology::{cohomology_group, default_modulus, snap_phases, Cochain, CohomologyClass, CohomologyGroup, DEFAULT_SNAP_TOL};
use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, UnitaryRep};
use crate::linalg::{self, CMat};
use crate::mps::{canonical_form, window_density_matrix, CanonicalMps, MpsTensor, PERIPHERAL_TOL};

pub const INTERTWINER_TOL: f64 = 1e-6;
pub const REFLECTION_TOL: f64 = 1e-8;
/// Largest d^N used by the marginal comparison.
const MARGINAL_DIM_CAP: usize = 81;
const MARGINAL_TOL: f64 = 1e-8;

/// ṽ_μ = Σ_ν U_{νμ} v_ν.
pub fn twist_tensor(v: &MpsTensor, u: &CMat) -> Result<MpsTensor> {
    let d = v.d();
    if u.dim() != (d, d) {
        return Err(Error::InvalidArgument(format!("twist matrix must be {d}x{d}, got {:?}", u.dim())));
    }
    let k = v.k();
    let mats = (0..d)
        .map(|mu| (0..d).fold(CMat::zeros((k, k)), |acc, nu| acc + v.matrix(nu).mapv(|z| z * u[[nu, mu]])))
        .collect();
    MpsTensor::new(mats, v.label())
}

/// Matrix of X ↦ Σ_μ a_μ X b_μ* on column-stacked X.
fn mixed_transfer(a: &MpsTensor, b: &MpsTensor) -> CMat {
    let k = a.k();
    let mut t = CMat::zeros((k * k, k * k));
    for (x, y) in a.matrices().iter().zip(b.matrices()) {
        t = t + linalg::kron(&linalg::conj(y), x);
    }
    t
}

/// Leading two eigenvalues (by modulus) and the leading eigenvector.
fn top_eigen(t: &CMat, k: usize) -> Result<(C64, f64, CMat)> {
    let (w, v) = linalg::eig(t)?;
    let mut idx: Vec<usize> = (0..w.len()).collect();
    idx.sort_by(|&a, &b| w[b].norm().partial_cmp(&w[a].norm()).unwrap());
    let second = idx.get(1).map(|&i| w[i].norm()).unwrap_or(0.0);
    Ok((w[idx[0]], second, linalg::unvectorize(&v.column(idx[0]).to_owned(), k)))
}

#[derive(Clone, Debug, Serialize)]
pub struct ElementInvariance {
    pub g: usize,
    /// Largest modulus in the mixed transfer spectrum.
    pub peripheral_modulus: f64,
    pub spectral: bool,
    /// Max entry difference of window density matrices, when compared.
    pub marginal_defect: Option<f64>,
    pub marginal: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub invariant: bool,
    pub elements: Vec<ElementInvariance>,
}

fn marginal_defect(c: &CanonicalMps, twisted: &MpsTensor) -> Result<f64> {
    let ct = canonical_form(twisted)?;
    let mut worst: f64 = 0.0;
    let mut n = 1;
    while c.d().pow(n as u32) <= MARGINAL_DIM_CAP {
        let a = window_density_matrix(c, n)?;
        let b = window_density_matrix(&ct, n)?;
        worst = worst.max(linalg::max_abs(&(a - b)));
        n += 1;
    }
    Ok(worst)
}

/// Invariance of the state under the on-site unitary u, by the mixed
/// transfer spectrum and, when that says yes, by comparing window marginals.
pub fn twist_invariance(c: &CanonicalMps, u: &CMat, g: usize) -> Result<ElementInvariance> {
    let twisted = twist_tensor(&c.tensor, u)?;
    let (top, _, _) = top_eigen(&mixed_transfer(&twisted, &c.tensor), c.k())?;
    let modulus = top.norm();
    let spectral = modulus >= 1.0 - PERIPHERAL_TOL;
    let (marginal_defect, marginal) = if spectral {
        let dft = marginal_defect(c, &twisted)?;
        (Some(dft), Some(dft < MARGINAL_TOL))
    } else {
        (None, None)
    };
    if let Some(m) = marginal {
        if m != spectral {
            return Err(Error::InvarianceAmbiguity { spectral, marginal: m });
        }
    }
    Ok(ElementInvariance { g, peripheral_modulus: modulus, spectral, marginal_defect, marginal })
}

pub fn check_onsite_invariance(c: &CanonicalMps, rep: &UnitaryRep) -> Result<InvarianceReport> {
    if rep.dim() != c.d() {
        return Err(Error::InvalidArgument(format!("representation has dimension {}, tensor has d = {}", rep.dim(), c.d())));
    }
    let elements = rep.group().elements().map(|g| twist_invariance(c, rep.matrix(g), g)).collect::<Result<Vec<_>>>()?;
    Ok(InvarianceReport { invariant: elements.iter().all(|e| e.spectral), elements })
}

#[derive(Clone, Debug, Serialize)]
pub struct IntertwinerSolution {
    pub g: usize,
    pub c: [f64; 2],
    #[serde(skip)]
    pub u: CMat,
    /// max_μ ‖c u v_μ u* − ṽ_μ(g)‖.
    pub residual: f64,
    pub unitarity_defect: f64,
}

impl IntertwinerSolution {
    pub fn c(&self) -> C64 {
        C64::new(self.c[0], self.c[1])
    }
}

/// det u = 1, then the k-th root of unity that brings the first nonzero
/// entry (row-major) closest to the positive real axis.
fn fix_intertwiner_phase(u: &CMat) -> Result<CMat> {
    use ndarray_linalg::Determinant;
    let k = u.nrows();
    let det = u.det()?;
    let mut w = u.mapv(|z| z * C64::from_polar(1.0, -det.arg() / k as f64));
    if let Some(z) = w.iter().find(|z| z.norm() > 1e-8).copied() {
        let step = 2.0 * std::f64::consts::PI / k as f64;
        let j = (-z.arg() / step).round();
        let ph = C64::from_polar(1.0, j * step);
        w.mapv_inplace(|x| x * ph);
    }
    Ok(w)
}

fn intertwining_residual(c: C64, u: &CMat, v: &MpsTensor, twisted: &MpsTensor) -> f64 {
    let ud = linalg::dagger(u);
    v.matrices()
        .iter()
        .zip(twisted.matrices())
        .map(|(a, b)| linalg::max_abs(&(u.dot(a).dot(&ud).mapv(|z| z * c) - b)))
        .fold(0.0, f64::max)
}

/// Solves c u v_μ u* = ṽ_μ(g) for the on-site unitary `ug`.
pub fn intertwiner_for(c: &CanonicalMps, ug: &CMat, g: usize) -> Result<IntertwinerSolution> {
    let v = &c.tensor;
    let twisted = twist_tensor(v, ug)?;
    let k = c.k();
    let (top, second, x) = top_eigen(&mixed_transfer(&twisted, v), k)?;
    if top.norm() < 1.0 - PERIPHERAL_TOL {
        return Err(Error::Precondition(format!("element {g} is not a symmetry (peripheral modulus {:.3e})", top.norm())));
    }
    if second >= 1.0 - PERIPHERAL_TOL {
        return Err(Error::Precondition(format!("top eigenvalue for element {g} is degenerate; tensor is not primitive")));
    }
    let u = fix_intertwiner_phase(&linalg::polar_unitary(&x)?)?;
    // c from the relation itself: c = ⟨u v u*, ṽ⟩ / ⟨u v u*, u v u*⟩
    let ud = linalg::dagger(&u);
    let (mut num, mut den) = (C64::new(0.0, 0.0), 0.0);
    for (a, b) in v.matrices().iter().zip(twisted.matrices()) {
        let uau = u.dot(a).dot(&ud);
        num += uau.iter().zip(b.iter()).map(|(p, q)| p.conj() * q).sum::<C64>();
        den += uau.iter().map(|p| p.norm_sqr()).sum::<f64>();
    }
    let cval = num / den;
    let residual = intertwining_residual(cval, &u, v, &twisted);
    if residual > INTERTWINER_TOL {
        return Err(Error::ExtractionFailure(format!("element {g}: intertwining residual {residual:e}")));
    }
    Ok(IntertwinerSolution { g, c: [cval.re, cval.im], unitarity_defect: linalg::unitarity_defect(&u)?, u, residual })
}

pub fn fundamental_intertwiner(c: &CanonicalMps, g: usize, rep: &UnitaryRep) -> Result<IntertwinerSolution> {
    if rep.dim() != c.d() {
        return Err(Error::InvalidArgument(format!("representation has dimension {}, tensor has d = {}", rep.dim(), c.d())));
    }
    if g == rep.group().identity() {
        let k = c.k();
        return Ok(IntertwinerSolution { g, c: [1.0, 0.0], u: linalg::eye(k), residual: 0.0, unitarity_defect: 0.0 });
    }
    intertwiner_for(c, rep.matrix(g), g)
}

#[derive(Clone, Debug)]
pub struct OnsiteIndexResult {
    /// σ(g, h) as exponents a with σ = exp(2πi a/M).
    pub sigma: Cochain,
    /// Class in H²(G, U(1)) computed at the default modulus.
    pub class: CohomologyClass,
    pub group_order: usize,
    pub per_g: Vec<IntertwinerSolution>,
    pub max_residual: f64,
    /// max |1 − |tr(u(gh)* u(g) u(h))|/k|.
    pub max_projectivity_defect: f64,
}

/// Class of `c` (any modulus) as a class of `target`.
fn translate_class(target: &CohomologyGroup, c: &Cochain) -> Result<CohomologyClass> {
    if c.modulus() == target.modulus() {
        return target.classify(c);
    }
    let m = num_integer::lcm(c.modulus(), target.modulus());
    let big = cohomology_group(target.group(), target.degree(), m)?;
    let c_big = c.promote(m)?;
    for class in target.classes() {
        let diff = c_big.sub(&class.representative.promote(m)?)?;
        if big.coboundary_witness(&diff)?.is_some() {
            return Ok(class.clone());
        }
    }
    Err(Error::CohomologyInconsistency(format!(
        "class of a modulus-{} cocycle has no representative at modulus {}",
        c.modulus(),
        target.modulus()
    )))
}

/// Snaps a unit-valued 2-cochain (indexed like cochain values), then
/// classifies it in H²(G) at the default modulus.
fn classify_phases(g: &FiniteGroup, raw: &[C64], root_order: u64) -> Result<(Cochain, CohomologyClass)> {
    let m = default_modulus(g, Some(root_order));
    let sigma = snap_phases(g, 2, raw, m, DEFAULT_SNAP_TOL)?;
    let target = cohomology_group(g, 2, default_modulus(g, None))?;
    let class = translate_class(&target, &sigma)?;
    Ok((sigma, class))
}

pub fn onsite_h2_index(c: &CanonicalMps, rep: &UnitaryRep) -> Result<OnsiteIndexResult> {
    let g = rep.group();
    let inv = check_onsite_invariance(c, rep)?;
    if !inv.invariant {
        let bad = inv.elements.iter().find(|e| !e.spectral).unwrap();
        return Err(Error::Precondition(format!("element {} is not a symmetry (peripheral modulus {:.3e})", bad.g, bad.peripheral_modulus)));
    }
    let per_g = g.elements().map(|x| fundamental_intertwiner(c, x, rep)).collect::<Result<Vec<_>>>()?;
    let k = c.k();
    let n = g.order();
    let mut raw = Vec::with_capacity(n * n);
    let mut defect: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let ab = g.mul(a, b);
            let x = linalg::dagger(&per_g[ab].u).dot(&per_g[a].u).dot(&per_g[b].u);
            let s = linalg::trace(&x) / k as f64;
            let dev = (1.0 - s.norm()).abs();
            if dev > INTERTWINER_TOL {
                return Err(Error::CohomologyInconsistency(format!(
                    "u({a})u({b}) is not proportional to u({ab}) (|tr|/k = {:.6})",
                    s.norm()
                )));
            }
            defect = defect.max(dev);
            raw.push(s / s.norm());
        }
    }
    let (sigma, class) = classify_phases(g, &raw, k as u64)?;
    Ok(OnsiteIndexResult {
        sigma,
        class,
        group_order: cohomology_group(g, 2, default_modulus(g, None))?.order(),
        max_residual: per_g.iter().map(|s| s.residual).fold(0.0, f64::max),
        per_g,
        max_projectivity_defect: defect,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ReflectionIndexResult {
    pub sign: i32,
    /// J with θ = J∘conj in the ρ-diagonal basis.
    #[serde(skip)]
    pub theta_unitary_part: CMat,
    /// ‖J J̄ − sign·I‖ (max entry).
    pub residual: f64,
    pub intertwining_residual: f64,
    pub peripheral_modulus: f64,
}

/// ṽ_μ = ρ^{-1/2} v_μᵀ ρ^{1/2}; for a reflection-symmetric state
/// ṽ_μ = c J v_μ J* and J J̄ = ±I.
pub fn reflection_z2_index(c: &CanonicalMps) -> Result<ReflectionIndexResult> {
    let k = c.k();
    let rs: Vec<f64> = c.rho_diag.iter().map(|x| x.sqrt()).collect();
    let mats = c
        .tensor
        .matrices()
        .iter()
        .map(|v| CMat::from_shape_fn((k, k), |(i, j)| v[[j, i]] * (rs[j] / rs[i])))
        .collect();
    let reflected = MpsTensor::new(mats, c.tensor.label())?;
    let (top, second, x) = top_eigen(&mixed_transfer(&reflected, &c.tensor), k)?;
    if top.norm() < 1.0 - PERIPHERAL_TOL {
        return Err(Error::NotReflectionSymmetric(top.norm()));
    }
    if second >= 1.0 - PERIPHERAL_TOL {
        return Err(Error::Precondition("reflection intertwiner is not unique; tensor is not primitive".into()));
    }
    let mut j = linalg::polar_unitary(&x)?;
    linalg::fix_phase(&mut j, 1e-8);
    let cval = top / top.norm();
    let intertwining_residual = intertwining_residual(cval, &j, &c.tensor, &reflected);
    if intertwining_residual > INTERTWINER_TOL {
        return Err(Error::ExtractionFailure(format!("reflection intertwining residual {intertwining_residual:e}")));
    }
    let jj = j.dot(&linalg::conj(&j));
    let s = linalg::trace(&jj).re / k as f64;
    let sign = if s >= 0.0 { 1 } else { -1 };
    let residual = linalg::max_abs(&(jj - linalg::eye(k).mapv(|z| z * sign as f64)));
    if residual > INTERTWINER_TOL {
        return Err(Error::ExtractionFailure(format!("J conj(J) is not ±I (residual {residual:e})")));
    }
    Ok(ReflectionIndexResult { sign, theta_unitary_part: j, residual, intertwining_residual, peripheral_modulus: top.norm() })
}

#[derive(Clone, Debug)]
pub struct LsmResult {
    pub class: CohomologyClass,
    pub obstructed: bool,
    pub lambda: Cochain,
    pub max_residual: f64,
}

/// H² class of the projective on-site representation itself.
pub fn lsm_obstruction(rep: &UnitaryRep) -> Result<LsmResult> {
    use ndarray_linalg::Determinant;
    let g = rep.group();
    let d = rep.dim();
    let n = g.order();
    // det-normalized copies so that λ is a d-th root of unity
    let mats: Vec<CMat> = rep
        .matrices()
        .iter()
        .map(|u| {
            let det = u.det()?;
            Ok(u.mapv(|z| z * C64::from_polar(1.0, -det.arg() / d as f64)))
        })
        .collect::<Result<_>>()?;
    let mut raw = Vec::with_capacity(n * n);
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let x = mats[a].dot(&mats[b]).dot(&linalg::dagger(&mats[g.mul(a, b)]));
            let lambda = linalg::trace(&x) / d as f64;
            let res = linalg::op_norm(&(x - linalg::eye(d).mapv(|z| z * lambda)))?;
            if res > 1e-6 {
                return Err(Error::NotProjective(format!("U({a})U({b})U({})^-1 is not scalar (residual {res:e})", g.mul(a, b))));
            }
            worst = worst.max(res);
            raw.push(lambda / lambda.norm());
        }
    }
    let (lambda, class) = classify_phases(g, &raw, d as u64)?;
    Ok(LsmResult { obstructed: class.class_id != 0, class, lambda, max_residual: worst })
}

/// True iff h = 2 h₁ for some class h₁.
pub fn reflection_lsm_check(group: &CohomologyGroup, class_id: usize) -> bool {
    !group.halves(class_id).is_empty()
}
