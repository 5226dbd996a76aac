use super::{CanonicalMps, MpsTensor};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};

/// Largest d^N produced by `brute_force_window`.
pub const DEFAULT_WINDOW_CAP: u128 = 1 << 20;

/// Vector with components Tr(B (v_{μ0}⋯v_{μ_{N-1}})*), μ0 most significant.
pub fn brute_force_window(v: &MpsTensor, n: usize, boundary: &CMat) -> Result<CVec> {
    let (d, k) = (v.d(), v.k());
    if boundary.dim() != (k, k) {
        return Err(Error::InvalidArgument(format!("boundary must be {k}x{k}")));
    }
    let size = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > DEFAULT_WINDOW_CAP {
        return Err(Error::CapExceeded { what: "window dimension d^N".into(), needed: size, cap: DEFAULT_WINDOW_CAP });
    }
    // Tr(B W*) = conj(Tr(B* W)); walk words depth-first keeping B* v_{μ0}⋯
    let mut out = Vec::with_capacity(size as usize);
    let mut stack = vec![linalg::dagger(boundary)];
    let mut idx = vec![0usize; n];
    if n == 0 {
        return Ok(CVec::from(vec![linalg::trace(boundary)]));
    }
    let mut depth = 0;
    loop {
        if depth == n {
            out.push(linalg::trace(stack.last().unwrap()).conj());
            // backtrack
            loop {
                if depth == 0 {
                    return Ok(CVec::from(out));
                }
                depth -= 1;
                stack.pop();
                idx[depth] += 1;
                if idx[depth] < d {
                    break;
                }
                idx[depth] = 0;
            }
        }
        let next = stack.last().unwrap().dot(v.matrix(idx[depth]));
        stack.push(next);
        depth += 1;
    }
}

/// N-site reduced density matrix R (with ω(A) = tr(R A)) assembled from
/// windows with matrix-unit boundaries e_ab weighted by ρ_a.
pub fn window_density_matrix(c: &CanonicalMps, n: usize) -> Result<CMat> {
    let k = c.k();
    let dim = (c.d() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if dim * dim > DEFAULT_WINDOW_CAP * 16 {
        return Err(Error::CapExceeded { what: "window density matrix entries".into(), needed: dim * dim, cap: DEFAULT_WINDOW_CAP * 16 });
    }
    let dim = dim as usize;
    let mut r = CMat::zeros((dim, dim));
    for a in 0..k {
        for b in 0..k {
            let mut e = CMat::zeros((k, k));
            e[[a, b]] = linalg::ONE;
            let phi = brute_force_window(&c.tensor, n, &e)?;
            let w = c.rho_diag[a];
            for i in 0..dim {
                for j in 0..dim {
                    r[[i, j]] += phi[i] * phi[j].conj() * w;
                }
            }
        }
    }
    Ok(r)
}
