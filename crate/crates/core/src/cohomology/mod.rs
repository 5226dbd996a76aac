//! Group cohomology with U(1) coefficients and trivial action, realised
//! exactly on Z_M-valued cochains (exponent `a` stands for exp(2πi a/M)).
//!
//! Inhomogeneous cochains live on G^n and use the bar differential; the
//! homogeneous (G-invariant) cochains live on G^{n+1} with the alternating
//! face differential. `psi` maps the latter to the former.

mod group;
pub mod zmod;

pub use group::{cohomology_group, default_modulus, CohomologyClass, CohomologyGroup, DEFAULT_TUPLE_CAP};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, GroupFile};

pub const DEFAULT_SNAP_TOL: f64 = 1e-6;

/// Index of a tuple (first entry most significant).
pub fn tuple_index(t: &[usize], n: usize) -> usize {
    t.iter().fold(0, |acc, &g| acc * n + g)
}

pub fn index_tuple(mut idx: usize, len: usize, n: usize) -> Vec<usize> {
    let mut t = vec![0; len];
    for slot in t.iter_mut().rev() {
        *slot = idx % n;
        idx /= n;
    }
    t
}

fn pow(n: usize, k: usize) -> usize {
    n.checked_pow(k as u32).expect("tuple count overflow")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain {
    group: FiniteGroup,
    degree: usize,
    modulus: u64,
    values: Vec<u64>,
}

impl Cochain {
    pub fn zero(group: &FiniteGroup, degree: usize, modulus: u64) -> Self {
        assert!(modulus >= 1, "modulus must be positive");
        let len = pow(group.order(), degree);
        Cochain { group: group.clone(), degree, modulus, values: vec![0; len] }
    }

    pub fn from_fn(group: &FiniteGroup, degree: usize, modulus: u64, f: impl Fn(&[usize]) -> i64) -> Self {
        let mut c = Self::zero(group, degree, modulus);
        let n = group.order();
        for idx in 0..c.values.len() {
            let t = index_tuple(idx, degree, n);
            c.values[idx] = f(&t).rem_euclid(modulus as i64) as u64;
        }
        c
    }

    pub fn from_values(group: &FiniteGroup, degree: usize, modulus: u64, values: Vec<u64>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidArgument("modulus must be positive".into()));
        }
        if values.len() != pow(group.order(), degree) {
            return Err(Error::InvalidArgument(format!(
                "{} values for a degree-{degree} cochain on a group of order {}",
                values.len(),
                group.order()
            )));
        }
        let values = values.into_iter().map(|v| v % modulus).collect();
        Ok(Cochain { group: group.clone(), degree, modulus, values })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn value(&self, t: &[usize]) -> u64 {
        debug_assert_eq!(t.len(), self.degree);
        self.values[tuple_index(t, self.group.order())]
    }

    pub fn phase(&self, t: &[usize]) -> C64 {
        C64::from_polar(1.0, 2.0 * std::f64::consts::PI * self.value(t) as f64 / self.modulus as f64)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    /// Zero whenever some argument is the identity.
    pub fn is_normalized(&self) -> bool {
        let n = self.group.order();
        let e = self.group.identity();
        (0..self.values.len()).all(|i| {
            self.values[i] == 0 || !index_tuple(i, self.degree, n).contains(&e)
        })
    }

    fn check_compatible(&self, other: &Cochain) -> Result<()> {
        if self.group != other.group || self.degree != other.degree || self.modulus != other.modulus {
            return Err(Error::InvalidArgument("cochains differ in group, degree or modulus".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain> {
        self.check_compatible(other)?;
        let m = self.modulus;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| (a + b) % m).collect();
        Ok(Cochain { values, ..self.clone() })
    }

    pub fn neg(&self) -> Cochain {
        let m = self.modulus;
        Cochain { values: self.values.iter().map(|a| (m - a) % m).collect(), ..self.clone() }
    }

    pub fn sub(&self, other: &Cochain) -> Result<Cochain> {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: i64) -> Cochain {
        let m = self.modulus as i128;
        Cochain {
            values: self.values.iter().map(|&a| (a as i128 * k as i128).rem_euclid(m) as u64).collect(),
            ..self.clone()
        }
    }

    /// Same phases written with a modulus that is a multiple of the current one.
    pub fn promote(&self, modulus: u64) -> Result<Cochain> {
        if modulus == 0 || modulus % self.modulus != 0 {
            return Err(Error::InvalidArgument(format!(
                "cannot promote modulus {} to {modulus}",
                self.modulus
            )));
        }
        let f = modulus / self.modulus;
        Ok(Cochain { modulus, values: self.values.iter().map(|a| a * f).collect(), ..self.clone() })
    }

    pub fn to_file(&self) -> CochainFile {
        let n = self.group.order();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let mut row: Vec<u64> = index_tuple(i, self.degree, n).into_iter().map(|g| g as u64).collect();
                row.push(a);
                row
            })
            .collect();
        CochainFile {
            group: GroupSpec::Table(self.group.to_file()),
            degree: self.degree,
            modulus: self.modulus,
            values,
        }
    }

    /// Builds a cochain from its file form; named groups are resolved with `lookup`.
    pub fn from_file(f: CochainFile, lookup: impl Fn(&str) -> Result<FiniteGroup>) -> Result<Cochain> {
        let group = match f.group {
            GroupSpec::Name(name) => lookup(&name)?,
            GroupSpec::Table(t) => FiniteGroup::from_file(t)?,
        };
        if f.modulus == 0 {
            return Err(Error::Parse("modulus must be positive".into()));
        }
        let n = group.order();
        let len = pow(n, f.degree);
        let mut values = vec![None; len];
        for row in &f.values {
            if row.len() != f.degree + 1 {
                return Err(Error::Parse(format!("value row {row:?} should have {} entries", f.degree + 1)));
            }
            let t: Vec<usize> = row[..f.degree].iter().map(|&g| g as usize).collect();
            if t.iter().any(|&g| g >= n) {
                return Err(Error::Parse(format!("tuple {t:?} out of range")));
            }
            values[tuple_index(&t, n)] = Some(row[f.degree] % f.modulus);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::Parse(format!("missing value at {:?}", index_tuple(i, f.degree, n)))))
            .collect::<Result<Vec<_>>>()?;
        Cochain::from_values(&group, f.degree, f.modulus, values)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Name(String),
    Table(GroupFile),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CochainFile {
    pub group: GroupSpec,
    pub degree: usize,
    pub modulus: u64,
    pub values: Vec<Vec<u64>>,
}

/// Bar differential (d c)(g0..gn) = c(g1..gn) + Σ_k (-1)^k c(..,g_{k-1}g_k,..) + (-1)^{n+1} c(g0..g_{n-1}).
pub fn differential(c: &Cochain) -> Cochain {
    let g = &c.group;
    let n = c.degree;
    let m = c.modulus as i64;
    Cochain::from_fn(g, n + 1, c.modulus, |t| {
        let mut acc = c.value(&t[1..]) as i64;
        let mut buf = Vec::with_capacity(n);
        for k in 1..=n {
            buf.clear();
            buf.extend_from_slice(&t[..k - 1]);
            buf.push(g.mul(t[k - 1], t[k]));
            buf.extend_from_slice(&t[k + 1..]);
            let v = c.value(&buf) as i64;
            acc += if k % 2 == 0 { v } else { -v };
        }
        let last = c.value(&t[..n]) as i64;
        acc += if (n + 1) % 2 == 0 { last } else { -last };
        acc.rem_euclid(m)
    })
}

pub fn is_cocycle(c: &Cochain) -> bool {
    differential(c).is_zero()
}

/// G-invariant function on G^{n+1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneousCochain {
    group: FiniteGroup,
    degree: usize,
    modulus: u64,
    values: Vec<u64>,
}

impl HomogeneousCochain {
    pub fn from_fn(group: &FiniteGroup, degree: usize, modulus: u64, f: impl Fn(&[usize]) -> i64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidArgument("modulus must be positive".into()));
        }
        let n = group.order();
        let len = pow(n, degree + 1);
        let values = (0..len)
            .map(|i| f(&index_tuple(i, degree + 1, n)).rem_euclid(modulus as i64) as u64)
            .collect();
        let h = HomogeneousCochain { group: group.clone(), degree, modulus, values };
        h.check_invariance()?;
        Ok(h)
    }

    fn check_invariance(&self) -> Result<()> {
        let n = self.group.order();
        for i in 0..self.values.len() {
            let t = index_tuple(i, self.degree + 1, n);
            for g in self.group.elements() {
                let gt: Vec<usize> = t.iter().map(|&x| self.group.mul(g, x)).collect();
                if self.value(&gt) != self.values[i] {
                    return Err(Error::InvalidArgument(format!(
                        "homogeneous cochain not invariant: value at {t:?} differs after left multiplication by {g}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, t: &[usize]) -> u64 {
        debug_assert_eq!(t.len(), self.degree + 1);
        self.values[tuple_index(t, self.group.order())]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    /// Zero whenever two adjacent arguments coincide.
    pub fn is_normalized(&self) -> bool {
        let n = self.group.order();
        (0..self.values.len()).all(|i| {
            self.values[i] == 0 || index_tuple(i, self.degree + 1, n).windows(2).all(|w| w[0] != w[1])
        })
    }
}

/// (Dφ)(g0..g_{n+1}) = Σ_j (-1)^j φ(g0..ĝj..g_{n+1}).
pub fn homogeneous_differential(phi: &HomogeneousCochain) -> HomogeneousCochain {
    let n = phi.degree;
    let m = phi.modulus as i64;
    let group = &phi.group;
    let len = pow(group.order(), n + 2);
    let mut buf = Vec::with_capacity(n + 1);
    let values = (0..len)
        .map(|i| {
            let t = index_tuple(i, n + 2, group.order());
            let mut acc = 0i64;
            for j in 0..n + 2 {
                buf.clear();
                buf.extend(t.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &x)| x));
                let v = phi.value(&buf) as i64;
                acc += if j % 2 == 0 { v } else { -v };
            }
            acc.rem_euclid(m) as u64
        })
        .collect();
    HomogeneousCochain { group: group.clone(), degree: n + 1, modulus: phi.modulus, values }
}

/// Ψ(φ)(g0..g_{n-1}) = φ(e, g0, g0 g1, ..., g0 ⋯ g_{n-1}).
pub fn psi(phi: &HomogeneousCochain) -> Cochain {
    let g = &phi.group;
    Cochain::from_fn(g, phi.degree, phi.modulus, |t| {
        let mut args = Vec::with_capacity(t.len() + 1);
        let mut acc = g.identity();
        args.push(acc);
        for &x in t {
            acc = g.mul(acc, x);
            args.push(acc);
        }
        phi.value(&args) as i64
    })
}

/// Inverse of `psi`: φ(g0..gn) = c(g0^{-1} g1, ..., g_{n-1}^{-1} g_n).
pub fn psi_inverse(c: &Cochain) -> HomogeneousCochain {
    let g = &c.group;
    let n = c.degree;
    let len = pow(g.order(), n + 1);
    let mut buf = Vec::with_capacity(n);
    let values = (0..len)
        .map(|i| {
            let t = index_tuple(i, n + 1, g.order());
            buf.clear();
            buf.extend(t.windows(2).map(|w| g.mul(g.inv(w[0]), w[1])));
            c.value(&buf)
        })
        .collect();
    HomogeneousCochain { group: g.clone(), degree: n, modulus: c.modulus, values }
}

/// Rounds unit complex values (indexed like cochain values) to the nearest
/// M-th roots of unity.
pub fn snap_phases(group: &FiniteGroup, degree: usize, raw: &[C64], modulus: u64, tol: f64) -> Result<Cochain> {
    let n = group.order();
    if raw.len() != pow(n, degree) {
        return Err(Error::InvalidArgument(format!("{} raw values for degree {degree}", raw.len())));
    }
    if modulus == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut worst: Option<(usize, f64)> = None;
    let mut values = Vec::with_capacity(raw.len());
    for (i, z) in raw.iter().enumerate() {
        let a = (z.arg() / two_pi * modulus as f64).round().rem_euclid(modulus as f64) as u64 % modulus;
        let root = C64::from_polar(1.0, two_pi * a as f64 / modulus as f64);
        let dist = (z - root).norm().max((z.norm() - 1.0).abs());
        if dist > tol && worst.is_none_or(|(_, w)| dist > w) {
            worst = Some((i, dist));
        }
        values.push(a);
    }
    if let Some((i, distance)) = worst {
        return Err(Error::PhaseSnap { tuple: index_tuple(i, degree, n), distance, tol });
    }
    Cochain::from_values(group, degree, modulus, values)
}
