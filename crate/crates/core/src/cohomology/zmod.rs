//! Linear algebra over Z_m via the Howell normal form.
//!
//! A Howell basis of a submodule S of Z_m^c is an echelon basis whose pivots
//! divide m and which has the property that for every column j the rows with
//! pivot column >= j span exactly {v in S : v_i = 0 for i < j}. That property
//! makes greedy reduction canonical, which gives membership tests, kernels,
//! linear solves and lexicographically minimal coset representatives.

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

#[inline]
fn md(x: i128, m: u64) -> u64 {
    x.rem_euclid(m as i128) as u64
}

/// A unit u of Z_m with u * a = gcd(a, m) (mod m).
fn normalizing_unit(a: u64, m: u64) -> u64 {
    let g = gcd(a, m);
    let mp = m / g;
    if mp == 1 {
        return 1;
    }
    let ap = (a / g) % mp;
    let (_, x, _) = ext_gcd(ap as i128, mp as i128);
    let u0 = md(x, mp);
    (0..g).map(|t| u0 + t * mp).find(|&u| gcd(u, m) == 1).expect("a unit lift always exists")
}

#[derive(Clone, Debug)]
pub struct Howell {
    m: u64,
    ncols: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl Howell {
    pub fn new(generators: &[Vec<u64>], ncols: usize, m: u64) -> Self {
        assert!(m >= 1);
        let mut pool: Vec<Vec<u64>> = generators
            .iter()
            .map(|r| {
                assert_eq!(r.len(), ncols);
                r.iter().map(|&x| x % m).collect::<Vec<u64>>()
            })
            .filter(|r: &Vec<u64>| r.iter().any(|&x| x != 0))
            .collect();
        let mut rows: Vec<Vec<u64>> = Vec::new();
        let mut pivots = Vec::new();
        for col in 0..ncols {
            let mut pivot: Option<Vec<u64>> = None;
            let mut rest = Vec::with_capacity(pool.len());
            for row in pool.drain(..) {
                if row[col] == 0 {
                    rest.push(row);
                    continue;
                }
                match pivot.take() {
                    None => pivot = Some(row),
                    Some(p) => {
                        let (np, nr) = bezout_rows(&p, &row, col, m);
                        pivot = Some(np);
                        if nr.iter().any(|&x| x != 0) {
                            rest.push(nr);
                        }
                    }
                }
            }
            if let Some(mut p) = pivot {
                let u = normalizing_unit(p[col], m);
                scale_row(&mut p, u, m);
                let g = p[col];
                let mut ann = p.clone();
                scale_row(&mut ann, m / g, m);
                if ann.iter().any(|&x| x != 0) {
                    rest.push(ann);
                }
                for r in rows.iter_mut() {
                    let q = r[col] / g;
                    if q != 0 {
                        axpy(r, &p, m - q % m, m);
                    }
                }
                rows.push(p);
                pivots.push(col);
            }
            pool = rest;
        }
        Howell { m, ncols, rows, pivots }
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Number of elements of the spanned submodule.
    pub fn size(&self) -> u128 {
        self.rows.iter().zip(&self.pivots).map(|(r, &c)| (self.m / r[c]) as u128).product()
    }

    /// Greedy reduction restricted to pivots in columns `< upto`.
    fn reduce_upto(&self, v: &[u64], upto: usize) -> Vec<u64> {
        let m = self.m;
        let mut v: Vec<u64> = v.iter().map(|&x| x % m).collect();
        for (r, &c) in self.rows.iter().zip(&self.pivots) {
            if c >= upto {
                break;
            }
            let q = v[c] / r[c];
            if q != 0 {
                axpy(&mut v, r, m - q % m, m);
            }
        }
        v
    }

    /// Canonical (lexicographically minimal) element of the coset v + S.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.ncols);
        self.reduce_upto(v, self.ncols)
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }
}

fn scale_row(r: &mut [u64], s: u64, m: u64) {
    for x in r.iter_mut() {
        *x = ((*x as u128 * s as u128) % m as u128) as u64;
    }
}

/// r <- r + s * p (mod m)
fn axpy(r: &mut [u64], p: &[u64], s: u64, m: u64) {
    for (x, &y) in r.iter_mut().zip(p) {
        *x = ((*x as u128 + s as u128 * y as u128) % m as u128) as u64;
    }
}

fn bezout_rows(p: &[u64], r: &[u64], col: usize, m: u64) -> (Vec<u64>, Vec<u64>) {
    let (a, b) = (p[col] as i128, r[col] as i128);
    let (g, x, y) = ext_gcd(a, b);
    let (ag, bg) = (a / g, b / g);
    let np = p.iter().zip(r).map(|(&u, &v)| md(x * u as i128 + y * v as i128, m)).collect();
    let nr = p.iter().zip(r).map(|(&u, &v)| md(bg * u as i128 - ag * v as i128, m)).collect();
    (np, nr)
}

/// Augmented rows (A e_j, e_j) for the columns of A (given as a row-major
/// `rows x cols` integer matrix).
fn augmented(a: &[Vec<i64>], cols: usize, m: u64) -> Vec<Vec<u64>> {
    let r = a.len();
    (0..cols)
        .map(|j| {
            let mut row = vec![0u64; r + cols];
            for (i, arow) in a.iter().enumerate() {
                row[i] = md(arow[j] as i128, m);
            }
            row[r + j] = 1;
            row
        })
        .collect()
}

/// Generators of {x in Z_m^cols : A x = 0 (mod m)}.
pub fn kernel_mod(a: &[Vec<i64>], cols: usize, m: u64) -> Vec<Vec<u64>> {
    let r = a.len();
    let h = Howell::new(&augmented(a, cols, m), r + cols, m);
    h.rows
        .iter()
        .zip(&h.pivots)
        .filter(|(_, &c)| c >= r)
        .map(|(row, _)| row[r..].to_vec())
        .collect()
}

/// Prepared solver for A x = b (mod m).
#[derive(Clone, Debug)]
pub struct ModSolver {
    eqs: usize,
    cols: usize,
    howell: Howell,
}

impl ModSolver {
    pub fn new(a: &[Vec<i64>], cols: usize, m: u64) -> Self {
        let r = a.len();
        ModSolver { eqs: r, cols, howell: Howell::new(&augmented(a, cols, m), r + cols, m) }
    }

    pub fn solve(&self, b: &[u64]) -> Option<Vec<u64>> {
        assert_eq!(b.len(), self.eqs);
        let m = self.howell.m;
        let mut v = vec![0u64; self.eqs + self.cols];
        v[..self.eqs].copy_from_slice(b);
        let red = self.howell.reduce_upto(&v, self.eqs);
        if red[..self.eqs].iter().any(|&x| x != 0) {
            return None;
        }
        Some(red[self.eqs..].iter().map(|&x| (m - x) % m).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn span_brute(gens: &[Vec<u64>], n: usize, m: u64) -> std::collections::BTreeSet<Vec<u64>> {
        let mut s = std::collections::BTreeSet::new();
        s.insert(vec![0; n]);
        loop {
            let mut t = s.clone();
            for x in &s {
                for g in gens {
                    t.insert(x.iter().zip(g).map(|(a, b)| (a + b) % m).collect());
                }
            }
            if t.len() == s.len() {
                return s;
            }
            s = t;
        }
    }

    proptest! {
        #[test]
        fn howell_matches_brute_span(m in 2u64..9, gens in prop::collection::vec(prop::collection::vec(0u64..9, 3), 0..4)) {
            let span = span_brute(&gens, 3, m);
            let h = Howell::new(&gens, 3, m);
            prop_assert_eq!(h.size(), span.len() as u128);
            // reduction picks the lexicographic minimum of each coset
            for v in [[1u64, 2, 3], [0, 5, 1], [7, 7, 7]] {
                let v: Vec<u64> = v.iter().map(|x| x % m).collect();
                let coset_min = span.iter().map(|s| s.iter().zip(&v).map(|(a, b)| (a + b) % m).collect::<Vec<_>>()).min().unwrap();
                prop_assert_eq!(h.reduce(&v), coset_min);
            }
            for s in &span {
                prop_assert!(h.contains(s));
            }
        }

        #[test]
        fn solver_agrees_with_brute_force(m in 2u64..7, a in prop::collection::vec(prop::collection::vec(-3i64..4, 2), 2), b in prop::collection::vec(0u64..7, 2)) {
            let b: Vec<u64> = b.iter().map(|x| x % m).collect();
            let s = ModSolver::new(&a, 2, m);
            let mut brute = None;
            for x0 in 0..m { for x1 in 0..m {
                let ok = (0..2).all(|i| (a[i][0] * x0 as i64 + a[i][1] * x1 as i64).rem_euclid(m as i64) as u64 == b[i]);
                if ok { brute = Some((x0, x1)); }
            }}
            match s.solve(&b) {
                Some(x) => {
                    for i in 0..2 {
                        prop_assert_eq!((a[i][0] * x[0] as i64 + a[i][1] * x[1] as i64).rem_euclid(m as i64) as u64, b[i]);
                    }
                }
                None => prop_assert!(brute.is_none()),
            }
            let ker = kernel_mod(&a, 2, m);
            let kspan = span_brute(&ker, 2, m);
            let mut count = 0;
            for x0 in 0..m { for x1 in 0..m {
                if (0..2).all(|i| (a[i][0] * x0 as i64 + a[i][1] * x1 as i64).rem_euclid(m as i64) == 0) {
                    count += 1;
                    prop_assert!(kspan.contains(&vec![x0, x1]));
                }
            }}
            prop_assert_eq!(count, kspan.len());
        }
    }
}
