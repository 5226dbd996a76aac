//! Parent Hamiltonians of translation-invariant MPS: the Γ map, the window
//! projector h, open-chain Hamiltonians and their ground-space data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::mps::MpsTensor;

/// Largest d^m for a Γ matrix.
pub const GAMMA_CAP: u128 = 4096 * 16;
pub const INJECTIVITY_CAP: usize = 12;
/// Largest d^N for a chain Hamiltonian.
pub const ED_CAP: u128 = 59049;
/// Up to this dimension ground_data diagonalizes the dense matrix.
pub const DENSE_CAP: usize = 729;
pub const KERNEL_TOL: f64 = 1e-10;
pub const RANK_REL_TOL: f64 = 1e-8;
const LANCZOS_SEED: u64 = 0x5eed_0001;
const LANCZOS_MAX_ITER: usize = 400;

fn pow_checked(d: usize, n: usize) -> u128 {
    (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX)
}

/// All words v_{μ0}⋯v_{μ_{m-1}}, μ0 most significant.
fn all_words(v: &MpsTensor, m: usize) -> Vec<CMat> {
    let mut words = vec![linalg::eye(v.k())];
    for _ in 0..m {
        let mut next = Vec::with_capacity(words.len() * v.d());
        for w in &words {
            for a in v.matrices() {
                next.push(w.dot(a));
            }
        }
        words = next;
    }
    words
}

#[derive(Clone, Debug)]
pub struct GammaMap {
    pub m: usize,
    /// (d^m) × k² matrix; column a + k b is Γ(e_ab).
    pub matrix: CMat,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

pub fn gamma_map(v: &MpsTensor, m: usize) -> Result<GammaMap> {
    let size = pow_checked(v.d(), m);
    if size > GAMMA_CAP {
        return Err(Error::CapExceeded { what: "Gamma map rows d^m".into(), needed: size, cap: GAMMA_CAP });
    }
    let k = v.k();
    let words = all_words(v, m);
    let mut g = CMat::zeros((words.len(), k * k));
    for (row, w) in words.iter().enumerate() {
        for b in 0..k {
            for a in 0..k {
                // Tr(e_ab W*) = conj(W_ab)
                g[[row, a + k * b]] = w[[a, b]].conj();
            }
        }
    }
    let s = linalg::singular_values(&g)?.to_vec();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let rank = if smax == 0.0 { 0 } else { s.iter().filter(|&&x| x > RANK_REL_TOL * smax).count() };
    Ok(GammaMap { m, matrix: g, rank, singular_values: s })
}

#[derive(Clone, Debug, Serialize)]
pub struct InjectivityReport {
    /// Smallest m with rank Γ_m = k², if found below the cap.
    pub length: Option<usize>,
    pub ranks: Vec<usize>,
    pub cap: usize,
    pub indeterminate: bool,
}

pub fn injectivity_length(v: &MpsTensor) -> Result<InjectivityReport> {
    let full = v.k() * v.k();
    let mut ranks = Vec::new();
    for m in 1..=INJECTIVITY_CAP {
        if pow_checked(v.d(), m) > GAMMA_CAP {
            break;
        }
        let r = gamma_map(v, m)?.rank;
        ranks.push(r);
        if r == full {
            return Ok(InjectivityReport { length: Some(m), ranks, cap: INJECTIVITY_CAP, indeterminate: false });
        }
    }
    Ok(InjectivityReport { length: None, ranks, cap: INJECTIVITY_CAP, indeterminate: true })
}

/// Σ_{x=0}^{N-m} τ_x(h) on N sites with open boundary conditions.
#[derive(Clone, Debug)]
pub struct LocalHamiltonian {
    pub d: usize,
    pub m: usize,
    pub n: usize,
    /// Projector onto the orthogonal complement of range Γ_m.
    pub h: CMat,
    /// Orthonormal basis of range Γ_m.
    pub window_space: CMat,
}

pub fn local_hamiltonian(v: &MpsTensor, m: usize, n: usize) -> Result<LocalHamiltonian> {
    if m == 0 || n < m {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= N (m = {m}, N = {n})")));
    }
    let size = pow_checked(v.d(), n);
    if size > ED_CAP {
        return Err(Error::CapExceeded { what: "Hilbert space dimension d^N".into(), needed: size, cap: ED_CAP });
    }
    let g = gamma_map(v, m)?;
    let q = linalg::range_basis(&g.matrix, RANK_REL_TOL)?;
    let h = linalg::eye(q.nrows()) - linalg::projector(&q);
    Ok(LocalHamiltonian { d: v.d(), m, n, h, window_space: q })
}

impl LocalHamiltonian {
    pub fn dim(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    /// τ_x(h) ψ for the window starting at site x.
    fn apply_window(&self, x: usize, psi: &CVec, out: &mut CVec) {
        let dm = self.d.pow(self.m as u32);
        let right = self.d.pow((self.n - self.m - x) as u32);
        let left = self.d.pow(x as u32);
        let mut buf = CVec::zeros(dm);
        for a in 0..left {
            for c in 0..right {
                let base = a * dm * right + c;
                for j in 0..dm {
                    buf[j] = psi[base + j * right];
                }
                let hb = self.h.dot(&buf);
                for j in 0..dm {
                    out[base + j * right] += hb[j];
                }
            }
        }
    }

    pub fn apply(&self, psi: &CVec) -> CVec {
        let mut out = CVec::zeros(psi.len());
        for x in 0..=(self.n - self.m) {
            self.apply_window(x, psi, &mut out);
        }
        out
    }

    pub fn dense(&self) -> Result<CMat> {
        let dim = self.dim();
        if dim > 4096 {
            return Err(Error::CapExceeded { what: "dense Hamiltonian dimension".into(), needed: dim as u128, cap: 4096 });
        }
        let mut h = CMat::zeros((dim, dim));
        for j in 0..dim {
            let mut e = CVec::zeros(dim);
            e[j] = linalg::ONE;
            h.column_mut(j).assign(&self.apply(&e));
        }
        Ok(h)
    }

    /// Orthonormal basis of ker H built site by site:
    /// ker H_{N} = (ker H_{N-1} ⊗ C^d) ∩ ker τ_{N-m}(h).
    pub fn kernel_basis(&self) -> Result<CMat> {
        let (d, m) = (self.d, self.m);
        let dm = d.pow(m as u32);
        let mut k = self.window_space.clone();
        for len in (m + 1)..=self.n {
            let prev = k.nrows();
            let cols = k.ncols() * d;
            let mut b = CMat::zeros((prev * d, cols));
            for c in 0..k.ncols() {
                for s in 0..d {
                    for r in 0..prev {
                        b[[r * d + s, c * d + s]] = k[[r, c]];
                    }
                }
            }
            // last window projector applied to every column of b
            let left = d.pow((len - m) as u32);
            let mut hb = CMat::zeros(b.dim());
            for c in 0..cols {
                for a in 0..left {
                    let seg = b.slice(ndarray::s![a * dm..(a + 1) * dm, c]).to_owned();
                    hb.slice_mut(ndarray::s![a * dm..(a + 1) * dm, c]).assign(&self.h.dot(&seg));
                }
            }
            let compressed = linalg::dagger(&b).dot(&hb);
            let (w, vecs) = linalg::eigh(&compressed)?;
            let keep: Vec<usize> = (0..w.len()).filter(|&i| w[i] < KERNEL_TOL).collect();
            let mut sel = CMat::zeros((cols, keep.len()));
            for (j, &i) in keep.iter().enumerate() {
                sel.column_mut(j).assign(&vecs.column(i));
            }
            k = b.dot(&sel);
        }
        Ok(k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroundMethod {
    Dense,
    KernelRecursionLanczos,
}

#[derive(Clone, Debug, Serialize)]
pub struct GroundData {
    pub n: usize,
    pub kernel_dim: usize,
    /// Smallest eigenvalue above the kernel; absent if H = 0.
    pub gap: Option<f64>,
    pub method: GroundMethod,
    pub lanczos_iterations: Option<usize>,
    pub lanczos_residual: Option<f64>,
}

struct LanczosOutcome {
    value: Option<f64>,
    iterations: usize,
    residual: f64,
}

/// Lowest eigenvalue of `op` on the orthogonal complement of the columns
/// of `deflate`, by Lanczos with full reorthogonalization.
fn lanczos_lowest(op: impl Fn(&CVec) -> CVec, deflate: &CMat, dim: usize, tol: f64) -> Result<LanczosOutcome> {
    let free = dim - deflate.ncols();
    if free == 0 {
        return Ok(LanczosOutcome { value: None, iterations: 0, residual: 0.0 });
    }
    let project = |x: &mut CVec| {
        let coef = linalg::dagger(deflate).dot(&*x);
        *x -= &deflate.dot(&coef);
    };
    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);
    let mut q = linalg::random_complex(dim, 1, &mut rng).column(0).to_owned();
    project(&mut q);
    project(&mut q);
    let nq = linalg::vec_norm(&q);
    q.mapv_inplace(|z| z / nq);
    let mut basis: Vec<CVec> = vec![q];
    let (mut alpha, mut beta): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    let max_iter = free.min(LANCZOS_MAX_ITER);
    let mut last = (f64::NAN, f64::INFINITY);
    for j in 0..max_iter {
        let mut w = op(&basis[j]);
        project(&mut w);
        let a = linalg::inner(&basis[j], &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let ov = linalg::inner(b, &w);
                w.scaled_add(-ov, b);
            }
        }
        project(&mut w);
        let bnorm = linalg::vec_norm(&w);
        let breakdown = bnorm < 1e-12;
        let check = breakdown || j + 1 == max_iter || (j + 1) % 5 == 0;
        if check {
            let size = j + 1;
            let mut t = CMat::zeros((size, size));
            for i in 0..size {
                t[[i, i]] = linalg::c(alpha[i], 0.0);
                if i + 1 < size {
                    t[[i, i + 1]] = linalg::c(beta[i], 0.0);
                    t[[i + 1, i]] = linalg::c(beta[i], 0.0);
                }
            }
            let (ev, evec) = linalg::eigh(&t)?;
            let residual = if breakdown { 0.0 } else { bnorm * evec[[size - 1, 0]].norm() };
            last = (ev[0], residual);
            if residual < tol || breakdown {
                return Ok(LanczosOutcome { value: Some(ev[0]), iterations: size, residual });
            }
        }
        beta.push(bnorm);
        w.mapv_inplace(|z| z / bnorm);
        basis.push(w);
    }
    if free <= LANCZOS_MAX_ITER {
        // the whole complement was spanned; the Ritz value is exact
        return Ok(LanczosOutcome { value: Some(last.0), iterations: max_iter, residual: last.1 });
    }
    Err(Error::Linalg(format!("Lanczos did not converge in {max_iter} iterations (residual {:e})", last.1)))
}

pub fn ground_data(h: &LocalHamiltonian) -> Result<GroundData> {
    if h.dim() <= DENSE_CAP {
        ground_data_dense(h)
    } else {
        ground_data_lanczos(h)
    }
}

pub fn ground_data_dense(h: &LocalHamiltonian) -> Result<GroundData> {
    let w = linalg::eigvalsh(&h.dense()?)?;
    let kernel_dim = w.iter().filter(|&&x| x < KERNEL_TOL).count();
    let gap = w.iter().copied().find(|&x| x >= KERNEL_TOL);
    Ok(GroundData { n: h.n, kernel_dim, gap, method: GroundMethod::Dense, lanczos_iterations: None, lanczos_residual: None })
}

pub fn ground_data_lanczos(h: &LocalHamiltonian) -> Result<GroundData> {
    let kernel = h.kernel_basis()?;
    let res = lanczos_lowest(|x| h.apply(x), &kernel, h.dim(), KERNEL_TOL)?;
    if let Some(g) = res.value {
        if g < KERNEL_TOL {
            return Err(Error::ModelInconsistency(format!(
                "eigenvalue {g:e} found outside the computed kernel at N = {}",
                h.n
            )));
        }
    }
    Ok(GroundData {
        n: h.n,
        kernel_dim: kernel.ncols(),
        gap: res.value,
        method: GroundMethod::KernelRecursionLanczos,
        lanczos_iterations: Some(res.iterations),
        lanczos_residual: Some(res.residual),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IntersectionReport {
    pub n: usize,
    pub holds: bool,
    pub kernel_dim: usize,
    pub gamma_rank: usize,
    pub intersection_dim: usize,
    /// ‖P_ker − P_∩‖ (max entry).
    pub kernel_vs_intersection: f64,
    /// ‖P_ker − P_{range Γ_N}‖ (max entry).
    pub kernel_vs_gamma: f64,
}

pub const INTERSECTION_TOL: f64 = 1e-8;

/// Compares ker H_N (dense diagonalization), range Γ_N and the
/// intersection of the translated window spaces (pairwise subspace
/// intersection with full-space projectors).
pub fn intersection_check(v: &MpsTensor, m: usize, n: usize) -> Result<IntersectionReport> {
    let h = local_hamiltonian(v, m, n)?;
    let dim = h.dim();
    if dim > DENSE_CAP * 2 {
        return Err(Error::CapExceeded { what: "intersection check dimension d^N".into(), needed: dim as u128, cap: (DENSE_CAP * 2) as u128 });
    }
    let (w, vecs) = linalg::eigh(&h.dense()?)?;
    let kcols: Vec<usize> = (0..w.len()).filter(|&i| w[i] < KERNEL_TOL).collect();
    let mut kb = CMat::zeros((dim, kcols.len()));
    for (j, &i) in kcols.iter().enumerate() {
        kb.column_mut(j).assign(&vecs.column(i));
    }
    let p_ker = linalg::projector(&kb);

    let g = gamma_map(v, n)?;
    let gb = linalg::range_basis(&g.matrix, RANK_REL_TOL)?;
    let p_gamma = linalg::projector(&gb);

    let mut s = linalg::eye(dim);
    let pw = linalg::projector(&h.window_space);
    for x in 0..=(n - m) {
        let full = linalg::kron(&linalg::kron(&linalg::eye(h.d.pow(x as u32)), &pw), &linalg::eye(h.d.pow((n - m - x) as u32)));
        let defect = (linalg::eye(dim) - full).dot(&s);
        let nb = linalg::null_space(&defect, 1e-9)?;
        s = linalg::range_basis(&s.dot(&nb), 1e-12)?;
        if s.ncols() == 0 {
            break;
        }
    }
    let p_int = linalg::projector(&s);
    let kernel_vs_intersection = linalg::max_abs(&(&p_ker - &p_int));
    let kernel_vs_gamma = linalg::max_abs(&(&p_ker - &p_gamma));
    Ok(IntersectionReport {
        n,
        holds: kernel_vs_intersection < INTERSECTION_TOL && kernel_vs_gamma < INTERSECTION_TOL,
        kernel_dim: kb.ncols(),
        gamma_rank: g.rank,
        intersection_dim: s.ncols(),
        kernel_vs_intersection,
        kernel_vs_gamma,
    })
}

pub fn gap_scan(v: &MpsTensor, m: usize, ns: impl IntoIterator<Item = usize>) -> Result<Vec<GroundData>> {
    ns.into_iter().map(|n| ground_data(&local_hamiltonian(v, m, n)?)).collect()
}
