use std::collections::{BTreeSet, HashMap};

use super::zmod::{kernel_mod, Howell, ModSolver};
use super::{differential, index_tuple, is_cocycle, tuple_index, Cochain};
use crate::error::{Error, Result};
use crate::groups::FiniteGroup;

/// Refuse computations touching more than this many (n+1)-tuples.
pub const DEFAULT_TUPLE_CAP: u128 = 10_000_000;
const CLASS_CAP: usize = 1 << 20;

/// exponent(G), or lcm(exponent(G), extra) when an extra modulus is supplied.
pub fn default_modulus(g: &FiniteGroup, extra: Option<u64>) -> u64 {
    num_integer::lcm(g.exponent() as u64, extra.unwrap_or(1).max(1))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyClass {
    pub degree: usize,
    pub modulus: u64,
    pub representative: Cochain,
    pub class_id: usize,
}

/// The classes of H^n(G, U(1)) that admit Z_M-valued representatives,
/// with canonical labels: representatives are the lexicographically minimal
/// normalized cocycles of their class, and ids follow that order (so the
/// trivial class is always 0).
#[derive(Clone, Debug)]
pub struct CohomologyGroup {
    group: FiniteGroup,
    degree: usize,
    modulus: u64,
    classes: Vec<CohomologyClass>,
    addition: Vec<Vec<usize>>,
    orders: Vec<usize>,
    warnings: Vec<String>,
    norm_tuples: Vec<usize>,
    boundaries: Howell,
    lookup: HashMap<Vec<u64>, usize>,
    solver: ModSolver,
}

/// Integer matrix of the bar differential d: C^{n} -> C^{n+1}, rows indexed by
/// (n+1)-tuples and columns by n-tuples. With `normalized`, only tuples
/// avoiding the identity are kept (on both sides).
fn bar_matrix(g: &FiniteGroup, n: usize, normalized: bool) -> (Vec<Vec<i64>>, Vec<usize>, Vec<usize>) {
    let ord = g.order();
    let e = g.identity();
    let keep = |t: &[usize]| !normalized || !t.contains(&e);
    let rows: Vec<usize> = (0..ord.pow(n as u32 + 1)).filter(|&i| keep(&index_tuple(i, n + 1, ord))).collect();
    let cols: Vec<usize> = (0..ord.pow(n as u32)).filter(|&i| keep(&index_tuple(i, n, ord))).collect();
    let col_pos: HashMap<usize, usize> = cols.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let mut mat = vec![vec![0i64; cols.len()]; rows.len()];
    for (r, &ri) in rows.iter().enumerate() {
        let t = index_tuple(ri, n + 1, ord);
        let mut add = |args: &[usize], s: i64| {
            if let Some(&p) = col_pos.get(&tuple_index(args, ord)) {
                if keep(args) {
                    mat[r][p] += s;
                }
            }
        };
        add(&t[1..], 1);
        for k in 1..=n {
            let mut buf = t[..k - 1].to_vec();
            buf.push(g.mul(t[k - 1], t[k]));
            buf.extend_from_slice(&t[k + 1..]);
            add(&buf, if k % 2 == 0 { 1 } else { -1 });
        }
        add(&t[..n], if (n + 1) % 2 == 0 { 1 } else { -1 });
    }
    (mat, rows, cols)
}

pub fn cohomology_group(g: &FiniteGroup, degree: usize, modulus: u64) -> Result<CohomologyGroup> {
    CohomologyGroup::compute(g, degree, modulus, DEFAULT_TUPLE_CAP)
}

impl CohomologyGroup {
    pub fn compute(g: &FiniteGroup, n: usize, m: u64, tuple_cap: u128) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("degree must be at least 1 (H^0 with U(1) coefficients is U(1))".into()));
        }
        if m == 0 {
            return Err(Error::InvalidArgument("modulus must be positive".into()));
        }
        let ord = g.order();
        let needed = (ord as u128).checked_pow(n as u32 + 1).unwrap_or(u128::MAX);
        if needed > tuple_cap {
            return Err(Error::CapExceeded { what: format!("H^{n} of a group of order {ord}"), needed, cap: tuple_cap });
        }
        let mut warnings = Vec::new();
        if m % g.exponent() as u64 != 0 {
            warnings.push(format!(
                "modulus {m} is not a multiple of the group exponent {}; classes may be missed",
                g.exponent()
            ));
        }
        let big = m * ord as u64;

        // normalized cocycles
        let (a_n, _, norm_n) = bar_matrix(g, n, true);
        let width = norm_n.len();
        let cocycles = kernel_mod(&a_n, width, m);

        // normalized Z_M cochains that are U(1)-coboundaries: a with
        // |G| a = d b (mod M |G|) for some normalized b
        let (d_prev, _, norm_prev) = bar_matrix(g, n - 1, true);
        let mut aug: Vec<Vec<i64>> = d_prev.clone();
        for (i, row) in aug.iter_mut().enumerate() {
            row.extend((0..width).map(|j| if i == j { -(ord as i64) } else { 0 }));
        }
        let bgens: Vec<Vec<u64>> = kernel_mod(&aug, norm_prev.len() + width, big)
            .into_iter()
            .map(|v| v[norm_prev.len()..].iter().map(|x| x % m).collect())
            .collect();
        let boundaries = Howell::new(&bgens, width, m);

        // enumerate the quotient via canonical coset representatives
        let mut elems: BTreeSet<Vec<u64>> = BTreeSet::new();
        elems.insert(vec![0; width]);
        for z in &cocycles {
            loop {
                let mut grown = elems.clone();
                for x in &elems {
                    let s: Vec<u64> = x.iter().zip(z).map(|(a, b)| (a + b) % m).collect();
                    grown.insert(boundaries.reduce(&s));
                }
                if grown.len() == elems.len() {
                    break;
                }
                if grown.len() > CLASS_CAP {
                    return Err(Error::CapExceeded { what: "class enumeration".into(), needed: grown.len() as u128, cap: CLASS_CAP as u128 });
                }
                elems = grown;
            }
        }
        let reps: Vec<Vec<u64>> = elems.into_iter().collect();
        let lookup: HashMap<Vec<u64>, usize> = reps.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
        let mut classes = Vec::with_capacity(reps.len());
        for (id, r) in reps.iter().enumerate() {
            let mut values = vec![0u64; ord.pow(n as u32)];
            for (pos, &full) in norm_n.iter().enumerate() {
                values[full] = r[pos];
            }
            let representative = Cochain::from_values(g, n, m, values)?;
            if !is_cocycle(&representative) {
                return Err(Error::CohomologyInconsistency(format!("representative {id} is not a cocycle")));
            }
            classes.push(CohomologyClass { degree: n, modulus: m, representative, class_id: id });
        }
        let k = reps.len();
        let mut addition = vec![vec![0; k]; k];
        for i in 0..k {
            for j in 0..k {
                let s: Vec<u64> = reps[i].iter().zip(&reps[j]).map(|(a, b)| (a + b) % m).collect();
                addition[i][j] = *lookup
                    .get(&boundaries.reduce(&s))
                    .ok_or_else(|| Error::CohomologyInconsistency("class set not closed under addition".into()))?;
            }
        }
        let orders = (0..k)
            .map(|i| {
                let mut x = i;
                let mut o = 1;
                while x != 0 {
                    x = addition[x][i];
                    o += 1;
                }
                o
            })
            .collect();

        let (d_full, _, _) = bar_matrix(g, n - 1, false);
        let solver = ModSolver::new(&d_full, ord.pow(n as u32 - 1), big);
        Ok(CohomologyGroup {
            group: g.clone(),
            degree: n,
            modulus: m,
            classes,
            addition,
            orders,
            warnings,
            norm_tuples: norm_n,
            boundaries,
            lookup,
            solver,
        })
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

    pub fn order(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[CohomologyClass] {
        &self.classes
    }

    pub fn class(&self, id: usize) -> Result<&CohomologyClass> {
        self.classes
            .get(id)
            .ok_or_else(|| Error::InvalidArgument(format!("class id {id} out of range (group order {})", self.order())))
    }

    pub fn addition_table(&self) -> &[Vec<usize>] {
        &self.addition
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.addition[a][b]
    }

    pub fn element_orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Classes x with 2x = h.
    pub fn halves(&self, h: usize) -> Vec<usize> {
        (0..self.order()).filter(|&x| self.add(x, x) == h).collect()
    }

    fn bring_to_modulus(&self, c: &Cochain) -> Result<Cochain> {
        if c.group() != &self.group || c.degree() != self.degree {
            return Err(Error::InvalidArgument("cochain does not match the group or degree".into()));
        }
        if c.modulus() == self.modulus {
            Ok(c.clone())
        } else if self.modulus % c.modulus() == 0 {
            c.promote(self.modulus)
        } else {
            Err(Error::InvalidArgument(format!(
                "cochain modulus {} does not divide the group modulus {}",
                c.modulus(),
                self.modulus
            )))
        }
    }

    /// A (n-1)-cochain b with modulus M|G| whose differential has the same
    /// phases as `a`, if one exists.
    pub fn coboundary_witness(&self, a: &Cochain) -> Result<Option<Cochain>> {
        let a = self.bring_to_modulus(a)?;
        let f = self.group.order() as u64;
        let big = self.modulus * f;
        let rhs: Vec<u64> = a.values().iter().map(|&x| x * f % big).collect();
        let Some(b) = self.solver.solve(&rhs) else {
            return Ok(None);
        };
        let b = Cochain::from_values(&self.group, self.degree - 1, big, b)?;
        if differential(&b) != a.promote(big)? {
            return Err(Error::CohomologyInconsistency("coboundary witness failed verification".into()));
        }
        Ok(Some(b))
    }

    /// Identifies the class of a cocycle; the match is confirmed by an
    /// explicit coboundary witness for c minus the representative.
    pub fn classify(&self, c: &Cochain) -> Result<CohomologyClass> {
        Ok(self.classify_with_witness(c)?.0)
    }

    pub fn classify_with_witness(&self, c: &Cochain) -> Result<(CohomologyClass, Cochain)> {
        let c = self.bring_to_modulus(c)?;
        if !is_cocycle(&c) {
            return Err(Error::InvalidArgument("cochain is not a cocycle".into()));
        }
        let mut order: Vec<usize> = (0..self.order()).collect();
        if c.is_normalized() {
            let coords: Vec<u64> = self.norm_tuples.iter().map(|&i| c.values()[i]).collect();
            if let Some(&id) = self.lookup.get(&self.boundaries.reduce(&coords)) {
                order.retain(|&x| x != id);
                order.insert(0, id);
            }
        }
        for id in order {
            let class = &self.classes[id];
            let diff = c.sub(&class.representative)?;
            if let Some(b) = self.coboundary_witness(&diff)? {
                return Ok((class.clone(), b));
            }
        }
        Err(Error::CohomologyInconsistency(format!(
            "no representative matches (modulus {} may be too small)",
            self.modulus
        )))
    }
}
