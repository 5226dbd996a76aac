//! Finite groups given by multiplication tables, and (projective) unitary
//! representations of them.
//!
//! Elements are dense indices `0..n`. `direct_product(G, H)` packs the pair
//! `(g, h)` as `h * |G| + g`, so for `Z2 x Z2` built from two copies of `Z2`
//! the index `j` in binary is `(h, g)`: 1 = (1,0), 2 = (0,1), 3 = (1,1).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
    label: String,
}

/// On-disk form of a group.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub order: usize,
    pub table: Vec<Vec<usize>>,
    #[serde(default)]
    pub label: String,
}

impl FiniteGroup {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn inverses(&self) -> &[usize] {
        &self.inverses
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut n = 1;
        while x != self.identity {
            x = self.mul(x, g);
            n += 1;
        }
        n
    }

    /// Least common multiple of the element orders.
    pub fn exponent(&self) -> usize {
        self.elements().map(|g| self.element_order(g)).fold(1, num_integer::lcm)
    }

    pub fn is_abelian(&self) -> bool {
        self.elements().all(|a| self.elements().all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn to_file(&self) -> GroupFile {
        GroupFile { order: self.order, table: self.table.clone(), label: self.label.clone() }
    }

    pub fn from_file(f: GroupFile) -> Result<Self> {
        if f.table.len() != f.order {
            return Err(Error::GroupValidation(format!(
                "declared order {} but table has {} rows",
                f.order,
                f.table.len()
            )));
        }
        validate_table(f.table, &f.label)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: GroupFile = serde_json::from_str(text)?;
        Self::from_file(f)
    }
}

pub fn make_cyclic(n: usize) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(Error::InvalidArgument("cyclic group order must be at least 1".into()));
    }
    let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    validate_table(table, &format!("Z{n}"))
}

pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup) -> FiniteGroup {
    let (ng, nh) = (g.order, h.order);
    let n = ng * nh;
    let split = |x: usize| (x % ng, x / ng);
    let mut table = vec![vec![0; n]; n];
    for (a, row) in table.iter_mut().enumerate() {
        let (ag, ah) = split(a);
        for (b, entry) in row.iter_mut().enumerate() {
            let (bg, bh) = split(b);
            *entry = h.mul(ah, bh) * ng + g.mul(ag, bg);
        }
    }
    let inverses = (0..n)
        .map(|a| {
            let (ag, ah) = split(a);
            h.inv(ah) * ng + g.inv(ag)
        })
        .collect();
    FiniteGroup {
        order: n,
        table,
        identity: h.identity * ng + g.identity,
        inverses,
        label: format!("{}x{}", g.label, h.label),
    }
}

/// Checks closure, associativity (exhaustively), identity and inverses.
pub fn validate_table(table: Vec<Vec<usize>>, label: &str) -> Result<FiniteGroup> {
    let n = table.len();
    if n == 0 {
        return Err(Error::GroupValidation("empty table".into()));
    }
    for (a, row) in table.iter().enumerate() {
        if row.len() != n {
            return Err(Error::GroupValidation(format!("row {a} has length {}, expected {n}", row.len())));
        }
        if let Some(b) = row.iter().position(|&x| x >= n) {
            return Err(Error::GroupValidation(format!("entry ({a},{b}) = {} out of range", row[b])));
        }
    }
    for a in 0..n {
        for b in 0..n {
            let ab = table[a][b];
            for c in 0..n {
                if table[ab][c] != table[a][table[b][c]] {
                    return Err(Error::GroupValidation(format!("associativity fails for triple ({a}, {b}, {c})")));
                }
            }
        }
    }
    let identity = (0..n)
        .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
        .ok_or_else(|| Error::GroupValidation("no identity element".into()))?;
    let mut inverses = Vec::with_capacity(n);
    for g in 0..n {
        let inv = (0..n)
            .find(|&x| table[g][x] == identity && table[x][g] == identity)
            .ok_or_else(|| Error::GroupValidation(format!("no inverse for {g}")))?;
        inverses.push(inv);
    }
    Ok(FiniteGroup { order: n, table, identity, inverses, label: label.to_string() })
}

/// Spin-(d-1)/2 matrices S1, S2, S3 in the S3 eigenbasis, ordered by
/// descending magnetic quantum number.
pub fn spin_operators(d: usize) -> Result<[CMat; 3]> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("spin operators need d >= 2, got {d}")));
    }
    let s = (d as f64 - 1.0) / 2.0;
    let m = |i: usize| s - i as f64;
    let mut sp = CMat::zeros((d, d));
    for i in 1..d {
        // S+ |m_i> = sqrt(s(s+1) - m_i(m_i+1)) |m_{i-1}>
        let mi = m(i);
        sp[[i - 1, i]] = C64::new((s * (s + 1.0) - mi * (mi + 1.0)).sqrt(), 0.0);
    }
    let sm = linalg::dagger(&sp);
    let s1 = (&sp + &sm).mapv(|z| z * 0.5);
    let s2 = (&sp - &sm).mapv(|z| z / C64::new(0.0, 2.0));
    let s3 = CMat::from_diag(&ndarray::Array1::from_iter((0..d).map(|i| C64::new(m(i), 0.0))));
    Ok([s1, s2, s3])
}

#[derive(Clone, Debug)]
pub struct UnitaryRep {
    group: FiniteGroup,
    dim: usize,
    matrices: Vec<CMat>,
}

pub const UNITARY_TOL: f64 = 1e-10;
pub const PROJECTIVE_TOL: f64 = 1e-8;

impl UnitaryRep {
    pub fn new(group: FiniteGroup, matrices: Vec<CMat>) -> Result<Self> {
        if matrices.len() != group.order() {
            return Err(Error::BadRepresentation(format!(
                "{} matrices for a group of order {}",
                matrices.len(),
                group.order()
            )));
        }
        let dim = matrices[0].nrows();
        for (g, u) in matrices.iter().enumerate() {
            if u.dim() != (dim, dim) {
                return Err(Error::BadRepresentation(format!("matrix for element {g} is not {dim}x{dim}")));
            }
            let defect = linalg::unitarity_defect(u)?;
            if defect > UNITARY_TOL {
                return Err(Error::BadRepresentation(format!("matrix for element {g} not unitary ({defect:e})")));
            }
        }
        let rep = UnitaryRep { group, dim, matrices };
        for g in rep.group.elements() {
            for h in rep.group.elements() {
                let (_, res) = rep.obstruction(g, h)?;
                if res > PROJECTIVE_TOL {
                    return Err(Error::NotProjective(format!(
                        "U({g})U({h})U({})^-1 is not scalar (residual {res:e})",
                        rep.group.mul(g, h)
                    )));
                }
            }
        }
        Ok(rep)
    }

    pub fn trivial(group: FiniteGroup, dim: usize) -> Self {
        let matrices = vec![linalg::eye(dim); group.order()];
        UnitaryRep { group, dim, matrices }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, g: usize) -> &CMat {
        &self.matrices[g]
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.matrices
    }

    /// The scalar λ with U(g)U(h)U(gh)^{-1} ≈ λ I and the operator-norm residual.
    pub fn obstruction(&self, g: usize, h: usize) -> Result<(C64, f64)> {
        let gh = self.group.mul(g, h);
        let x = self.matrices[g].dot(&self.matrices[h]).dot(&linalg::dagger(&self.matrices[gh]));
        let lambda = linalg::trace(&x) / self.dim as f64;
        let res = linalg::op_norm(&(x - linalg::eye(self.dim).mapv(|z| z * lambda)))?;
        Ok((lambda, res))
    }

    /// Tensor product representation g ↦ U(g) ⊗ V(g).
    pub fn tensor(&self, other: &UnitaryRep) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::InvalidArgument("tensor product of representations of different groups".into()));
        }
        let mats = self.matrices.iter().zip(&other.matrices).map(|(a, b)| linalg::kron(a, b)).collect();
        UnitaryRep::new(self.group.clone(), mats)
    }
}

/// The Z2 x Z2 representation generated by rotations by π about the three
/// spin axes on C^d. Genuine for odd d, projective for even d.
pub fn pauli_z2z2_rep(d: usize) -> Result<UnitaryRep> {
    let [s1, s2, s3] = spin_operators(d)?;
    let z2 = make_cyclic(2)?;
    let group = direct_product(&z2, &z2);
    let pi = std::f64::consts::PI;
    let mats = vec![
        linalg::eye(d),
        linalg::expi_hermitian(&s1, pi)?,
        linalg::expi_hermitian(&s2, pi)?,
        linalg::expi_hermitian(&s3, pi)?,
    ];
    UnitaryRep::new(group, mats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs};

    #[test]
    fn cyclic_tables() {
        assert_eq!(make_cyclic(1).unwrap().order(), 1);
        assert_eq!(make_cyclic(2).unwrap().table(), &[vec![0, 1], vec![1, 0]]);
        assert_eq!(make_cyclic(4).unwrap().inverses(), &[0, 3, 2, 1]);
        assert!(make_cyclic(0).is_err());
    }

    #[test]
    fn rejects_bad_tables() {
        let e = validate_table(vec![vec![0, 1], vec![1, 1]], "bad").unwrap_err();
        assert!(e.to_string().contains("no inverse for 1"), "{e}");
        // a*b = -a-b mod 3 is a Latin square but not associative
        let not_assoc = vec![vec![0, 2, 1], vec![2, 1, 0], vec![1, 0, 2]];
        let e = validate_table(not_assoc, "x").unwrap_err();
        assert!(e.to_string().contains("triple (0, 0, 1)"), "{e}");
    }

    #[test]
    fn spin_algebra() {
        for d in 2..6 {
            let s = spin_operators(d).unwrap();
            let eps = |j: usize, k: usize| (3 - j - k) % 3;
            for j in 0..3 {
                for k in 0..3 {
                    if j == k {
                        continue;
                    }
                    let l = eps(j, k);
                    let sign = if (j + 1) % 3 == k { 1.0 } else { -1.0 };
                    let lhs = commutator(&s[j], &s[k]);
                    let rhs = s[l].mapv(|z| z * C64::new(0.0, sign));
                    assert!(max_abs(&(lhs - rhs)) < 1e-10);
                }
            }
        }
        let s = spin_operators(3).unwrap();
        let cas = s[0].dot(&s[0]) + s[1].dot(&s[1]) + s[2].dot(&s[2]);
        assert!(max_abs(&(cas - linalg::eye(3).mapv(|z| z * 2.0))) < 1e-12);
    }

    #[test]
    fn pauli_rep_parity() {
        let r3 = pauli_z2z2_rep(3).unwrap();
        let r2 = pauli_z2z2_rep(2).unwrap();
        for g in 0..4 {
            for h in 0..4 {
                let (l3, _) = r3.obstruction(g, h).unwrap();
                assert!((l3 - C64::new(1.0, 0.0)).norm() < 1e-8);
            }
        }
        let (l, _) = r2.obstruction(1, 2).unwrap();
        assert!((l + C64::new(1.0, 0.0)).norm() < 1e-8);
        for j in 1..4 {
            let u = r2.matrix(j);
            assert!(max_abs(&(u.dot(u) + linalg::eye(2))) < 1e-12);
        }
        let (u1, u2) = (r2.matrix(1), r2.matrix(2));
        assert!(max_abs(&(u1.dot(u2) + u2.dot(u1))) < 1e-12);
    }
}
