//! Small dense helpers on top of ndarray-linalg.

use ndarray::{s, Array1, Array2, Axis, ShapeBuilder};
use ndarray_linalg::{Eig, Eigh, SVD, UPLO};
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};

pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eye(n: usize) -> CMat {
    Array2::eye(n)
}

pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

pub fn conj(a: &CMat) -> CMat {
    a.mapv(|z| z.conj())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = CMat::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == ZERO {
                continue;
            }
            out.slice_mut(s![i * br..(i + 1) * br, j * bc..(j + 1) * bc])
                .assign(&b.mapv(|z| z * aij));
        }
    }
    out
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a.dot(b) - b.dot(a)
}

pub fn trace(a: &CMat) -> C64 {
    a.diag().sum()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn fro_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn singular_values(a: &CMat) -> Result<Array1<f64>> {
    if a.is_empty() {
        return Ok(Array1::zeros(0));
    }
    let (_, s, _) = a.svd(false, false)?;
    Ok(s)
}

/// Spectral (operator 2-) norm.
pub fn op_norm(a: &CMat) -> Result<f64> {
    Ok(singular_values(a)?.iter().cloned().fold(0.0, f64::max))
}

/// Hermitian eigendecomposition, eigenvalues ascending, eigenvectors as columns.
pub fn eigh(a: &CMat) -> Result<(Array1<f64>, CMat)> {
    // ndarray-linalg's complex eigh returns conjugated eigenvectors for
    // row-major input, so hand it a column-major copy.
    let mut h = CMat::zeros(a.dim().f());
    h.assign(&hermitian_part(a));
    Ok(h.eigh(UPLO::Lower)?)
}

pub fn eigvalsh(a: &CMat) -> Result<Array1<f64>> {
    Ok(eigh(a)?.0)
}

pub fn eig(a: &CMat) -> Result<(Array1<C64>, CMat)> {
    Ok(a.eig()?)
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + &dagger(a)).mapv(|z| z * 0.5)
}

pub fn hermiticity_defect(a: &CMat) -> f64 {
    max_abs(&(a - &dagger(a)))
}

pub fn unitarity_defect(u: &CMat) -> Result<f64> {
    let n = u.nrows();
    op_norm(&(dagger(u).dot(u) - eye(n)))
}

/// Unitary factor of the polar decomposition a = W P.
pub fn polar_unitary(a: &CMat) -> Result<CMat> {
    let (u, _, vt) = a.svd(true, true)?;
    let u = u.ok_or_else(|| Error::Linalg("svd returned no U".into()))?;
    let vt = vt.ok_or_else(|| Error::Linalg("svd returned no V".into()))?;
    Ok(u.dot(&vt))
}

/// f(A) for Hermitian A via the spectral theorem.
pub fn hermitian_function(a: &CMat, f: impl Fn(f64) -> C64) -> Result<CMat> {
    let (w, v) = eigh(a)?;
    let fw: CVec = w.mapv(&f);
    let scaled = &v * &fw.view().insert_axis(Axis(0));
    Ok(scaled.dot(&dagger(&v)))
}

/// Power of a positive definite matrix; fails if an eigenvalue is not positive.
pub fn pd_power(a: &CMat, p: f64) -> Result<CMat> {
    let (w, _) = eigh(a)?;
    if let Some(&lo) = w.iter().find(|&&x| x <= 0.0) {
        return Err(Error::Linalg(format!("matrix not positive definite (eigenvalue {lo:e})")));
    }
    hermitian_function(a, |x| c(x.powf(p), 0.0))
}

/// exp(i t H) for Hermitian H.
pub fn expi_hermitian(h: &CMat, t: f64) -> Result<CMat> {
    hermitian_function(h, |x| C64::from_polar(1.0, t * x))
}

/// Orthonormal basis (as columns) of the column space, keeping singular
/// values above `rel_tol * max`.
pub fn range_basis(a: &CMat, rel_tol: f64) -> Result<CMat> {
    let (r, cols) = a.dim();
    if r == 0 || cols == 0 {
        return Ok(CMat::zeros((r, 0)));
    }
    let (u, s, _) = a.svd(true, false)?;
    let u = u.ok_or_else(|| Error::Linalg("svd returned no U".into()))?;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let rank = if smax == 0.0 { 0 } else { s.iter().filter(|&&x| x > rel_tol * smax).count() };
    Ok(u.slice(s![.., ..rank]).to_owned())
}

/// Numerical rank with the relative singular value threshold.
pub fn rank(a: &CMat, rel_tol: f64) -> Result<usize> {
    let s = singular_values(a)?;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > rel_tol * smax).count())
}

/// Orthonormal basis of the null space: right singular vectors with
/// singular value at most `abs_tol`.
pub fn null_space(a: &CMat, abs_tol: f64) -> Result<CMat> {
    let (r, n) = a.dim();
    if n == 0 {
        return Ok(CMat::zeros((0, 0)));
    }
    if r == 0 {
        return Ok(eye(n));
    }
    let (_, s, vt) = a.svd(false, true)?;
    let vt = vt.ok_or_else(|| Error::Linalg("svd returned no V".into()))?;
    let kept = s.iter().filter(|&&x| x > abs_tol).count();
    Ok(dagger(&vt.slice(s![kept.., ..]).to_owned()))
}

pub fn projector(basis: &CMat) -> CMat {
    basis.dot(&dagger(basis))
}

/// Multiply all entries by a phase so that the first entry (row-major) with
/// modulus above `tol` becomes positive real.
pub fn fix_phase(a: &mut CMat, tol: f64) {
    if let Some(z) = a.iter().find(|z| z.norm() > tol).copied() {
        let ph = z.conj() / z.norm();
        a.mapv_inplace(|x| x * ph);
    }
}

pub fn fix_phase_vec(v: &mut CVec, tol: f64) {
    if let Some(z) = v.iter().find(|z| z.norm() > tol).copied() {
        let ph = z.conj() / z.norm();
        v.mapv_inplace(|x| x * ph);
    }
}

/// Column-stacking vectorization: vec(A)[i + k j] = A[i, j].
pub fn vectorize(a: &CMat) -> CVec {
    let (r, cols) = a.dim();
    let mut v = CVec::zeros(r * cols);
    for j in 0..cols {
        for i in 0..r {
            v[i + r * j] = a[[i, j]];
        }
    }
    v
}

pub fn unvectorize(v: &CVec, k: usize) -> CMat {
    let mut a = CMat::zeros((k, k));
    for j in 0..k {
        for i in 0..k {
            a[[i, j]] = v[i + k * j];
        }
    }
    a
}

pub fn random_complex<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_shape_fn((rows, cols), |_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    hermitian_part(&random_complex(n, n, rng))
}

pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    // polar part of a generic matrix; good enough for test sampling
    polar_unitary(&random_complex(n, n, rng)).expect("svd of random matrix")
}

/// A random matrix with condition number kept moderate by adding a multiple of I.
pub fn random_invertible<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let mut a = random_complex(n, n, rng);
    for i in 0..n {
        a[[i, i]] += c(2.0, 0.0);
    }
    a
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    use ndarray_linalg::Inverse;
    Ok(a.inv()?)
}
