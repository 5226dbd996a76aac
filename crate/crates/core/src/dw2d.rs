//! The 2D Dijkgraaf–Witten lattice model. Every operator is diagonal in the
//! configuration basis of G^Λ, so it is stored as a list of local ν-lookups
//! whose exponents add up (mod M) to the phase of a configuration.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cohomology::{
    cohomology_group, homogeneous_differential, psi, psi_inverse, CohomologyClass, Cochain, CohomologyGroup,
    HomogeneousCochain,
};
use crate::error::{Error, Result};
use crate::groups::FiniteGroup;

pub type Site = (i64, i64);

/// Smallest L for which the lemma identities are asserted.
pub const MIN_L: i64 = 5;
/// Exhaustive enumeration is used when |G|^sites is at most this.
pub const EXHAUSTIVE_CAP: u128 = 1 << 24;
pub const DEFAULT_SAMPLES: usize = 200;
pub const DEFAULT_SEED: u64 = 0x5eed;

fn add(a: Site, b: Site) -> Site {
    (a.0 + b.0, a.1 + b.1)
}

fn sub(a: Site, b: Site) -> Site {
    (a.0 - b.0, a.1 - b.1)
}

/// e_1 = (1, 0), e_2 = (0, 1).
pub fn unit(j: usize) -> Site {
    match j {
        1 => (1, 0),
        2 => (0, 1),
        _ => panic!("unit vector index {j} out of range"),
    }
}

/// Elements of Sym(2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Perm {
    Id,
    Swap,
}

impl Perm {
    pub const ALL: [Perm; 2] = [Perm::Id, Perm::Swap];

    pub fn apply(self, i: usize) -> usize {
        match self {
            Perm::Id => i,
            Perm::Swap => 3 - i,
        }
    }

    pub fn sign(self) -> i64 {
        match self {
            Perm::Id => 1,
            Perm::Swap => -1,
        }
    }

    /// π ∘ (1 2)
    pub fn swapped(self) -> Perm {
        match self {
            Perm::Id => Perm::Swap,
            Perm::Swap => Perm::Id,
        }
    }
}

/// The simplex T_π + x of the unit square at x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Simplex2D {
    pub base: Site,
    pub pi: Perm,
}

impl Simplex2D {
    pub fn new(base: Site, pi: Perm) -> Self {
        Simplex2D { base, pi }
    }

    /// v_0 = x, v_1 = x + e_{π(1)}, v_2 = x + e_1 + e_2.
    pub fn corners(&self) -> [Site; 3] {
        [self.base, add(self.base, unit(self.pi.apply(1))), add(self.base, (1, 1))]
    }

    pub fn sign(&self) -> i64 {
        self.pi.sign()
    }
}

/// The facet S_{k,x}^{(π)}: the simplex with corner k removed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FacetKey {
    pub x: Site,
    pub pi: Perm,
    pub k: usize,
}

impl FacetKey {
    pub fn new(x: Site, pi: Perm, k: usize) -> Self {
        assert!(k <= 2, "facet index {k} out of range");
        FacetKey { x, pi, k }
    }

    /// Remaining corners in increasing index order.
    pub fn corners(&self) -> [Site; 2] {
        let c = Simplex2D::new(self.x, self.pi).corners();
        match self.k {
            0 => [c[1], c[2]],
            1 => [c[0], c[2]],
            _ => [c[0], c[1]],
        }
    }

    /// Keys with x in the box [lo, hi]^2.
    pub fn all_in_box(lo: i64, hi: i64) -> Vec<FacetKey> {
        let mut out = Vec::new();
        for a in lo..=hi {
            for b in lo..=hi {
                for pi in Perm::ALL {
                    for k in 0..3 {
                        out.push(FacetKey::new((a, b), pi, k));
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum MatchCase {
    I,
    II,
    III,
}

/// The unique other key describing the same facet.
pub fn match_facet(key: FacetKey) -> (FacetKey, MatchCase) {
    let pi2 = key.pi.swapped();
    match key.k {
        1 => (FacetKey::new(key.x, pi2, 1), MatchCase::I),
        0 => (FacetKey::new(add(key.x, unit(key.pi.apply(1))), pi2, 2), MatchCase::II),
        _ => (FacetKey::new(sub(key.x, unit(pi2.apply(1))), pi2, 0), MatchCase::III),
    }
}

/// A normalized homogeneous 3-cocycle ν with D ν = 0.
#[derive(Clone, Debug)]
pub struct CocycleData3 {
    nu: HomogeneousCochain,
    table: Vec<u64>,
    n: usize,
}

impl CocycleData3 {
    pub fn new(nu: HomogeneousCochain) -> Result<Self> {
        if nu.degree() != 3 {
            return Err(Error::InvalidArgument(format!("ν must have degree 3, got {}", nu.degree())));
        }
        if !homogeneous_differential(&nu).is_zero() {
            return Err(Error::InvalidArgument("ν is not a cocycle (D ν ≠ 0)".into()));
        }
        let n = nu.group().order();
        let table = nu.values().to_vec();
        Ok(CocycleData3 { nu, table, n })
    }

    /// ν = Ψ^{-1}(ω) for an inhomogeneous 3-cocycle ω.
    pub fn from_inhomogeneous(omega: &Cochain) -> Result<Self> {
        CocycleData3::new(psi_inverse(omega))
    }

    pub fn from_class(class: &CohomologyClass) -> Result<Self> {
        CocycleData3::from_inhomogeneous(&class.representative)
    }

    pub fn trivial(group: &FiniteGroup, modulus: u64) -> Self {
        CocycleData3::from_inhomogeneous(&Cochain::zero(group, 3, modulus)).expect("zero cochain is a cocycle")
    }

    pub fn group(&self) -> &FiniteGroup {
        self.nu.group()
    }

    pub fn modulus(&self) -> u64 {
        self.nu.modulus()
    }

    pub fn homogeneous(&self) -> &HomogeneousCochain {
        &self.nu
    }

    pub fn is_normalized(&self) -> bool {
        self.nu.is_normalized()
    }

    #[inline]
    pub fn value(&self, a: [usize; 4]) -> u64 {
        self.table[((a[0] * self.n + a[1]) * self.n + a[2]) * self.n + a[3]]
    }

    /// Ψ^3(ν)(g, h, k) = ν(e, g, gh, ghk).
    pub fn inhomogeneous(&self) -> Cochain {
        psi(&self.nu)
    }

    /// Number of 5-tuples violating the pentagon identity (0 for a cocycle).
    pub fn pentagon_violations(&self) -> usize {
        let m = self.modulus() as i64;
        let n = self.n;
        let mut bad = 0;
        for idx in 0..n.pow(5) {
            let t = crate::cohomology::index_tuple(idx, 5, n);
            let v = |a: usize, b: usize, c: usize, d: usize| self.value([t[a], t[b], t[c], t[d]]) as i64;
            let s = v(1, 2, 3, 4) - v(0, 2, 3, 4) + v(0, 1, 3, 4) - v(0, 1, 2, 4) + v(0, 1, 2, 3);
            if s.rem_euclid(m) != 0 {
                bad += 1;
            }
        }
        bad
    }
}

/// One argument of a ν-lookup: a fixed group element, or the value
/// `left · s(site)` of the configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Arg {
    Fixed(usize),
    Site { site: Site, left: usize },
}

/// `sign · ν(args)` as an exponent mod M.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Factor {
    pub sign: i64,
    pub args: [Arg; 4],
}

impl Factor {
    pub fn support(&self) -> BTreeSet<Site> {
        self.args
            .iter()
            .filter_map(|a| match a {
                Arg::Site { site, .. } => Some(*site),
                Arg::Fixed(_) => None,
            })
            .collect()
    }
}

fn site_arg(site: Site, e: usize) -> Arg {
    Arg::Site { site, left: e }
}

/// A diagonal unitary on G^region, as a sum of local exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseDiagonal {
    pub label: String,
    pub region: BTreeSet<Site>,
    pub factors: Vec<Factor>,
}

/// A configuration s: Λ → G.
pub type Config = BTreeMap<Site, usize>;

impl PhaseDiagonal {
    pub fn new(label: &str, region: BTreeSet<Site>, factors: Vec<Factor>) -> Result<Self> {
        for f in &factors {
            if let Some(s) = f.support().into_iter().find(|s| !region.contains(s)) {
                return Err(Error::InvalidArgument(format!("{label}: factor touches ({}, {}) outside the region", s.0, s.1)));
            }
        }
        Ok(PhaseDiagonal { label: label.into(), region, factors })
    }

    pub fn identity(label: &str) -> Self {
        PhaseDiagonal { label: label.into(), region: BTreeSet::new(), factors: Vec::new() }
    }

    pub fn support(&self) -> BTreeSet<Site> {
        self.factors.iter().flat_map(|f| f.support()).collect()
    }

    /// Product of diagonal unitaries.
    pub fn compose(&self, other: &PhaseDiagonal) -> PhaseDiagonal {
        PhaseDiagonal {
            label: format!("{}·{}", self.label, other.label),
            region: self.region.union(&other.region).copied().collect(),
            factors: self.factors.iter().chain(&other.factors).copied().collect(),
        }
    }

    pub fn inverse(&self) -> PhaseDiagonal {
        PhaseDiagonal {
            label: format!("{}⁻¹", self.label),
            region: self.region.clone(),
            factors: self.factors.iter().map(|f| Factor { sign: -f.sign, ..*f }).collect(),
        }
    }

    /// Exponent of the phase at s.
    pub fn eval(&self, nu: &CocycleData3, s: &Config) -> Result<u64> {
        let g = nu.group();
        let m = nu.modulus() as i64;
        let mut acc = 0i64;
        for f in &self.factors {
            let mut a = [0usize; 4];
            for (slot, arg) in a.iter_mut().zip(&f.args) {
                *slot = match *arg {
                    Arg::Fixed(x) => x,
                    Arg::Site { site, left } => {
                        let v = *s.get(&site).ok_or(Error::MissingSite(site.0, site.1))?;
                        g.mul(left, v)
                    }
                };
            }
            acc += f.sign * nu.value(a) as i64;
        }
        Ok(acc.rem_euclid(m) as u64)
    }

    /// Canonical factor multiset: equal exponents summed, zeros dropped.
    pub fn factor_multiset(&self, modulus: u64) -> BTreeMap<[Arg; 4], u64> {
        let mut out: BTreeMap<[Arg; 4], i64> = BTreeMap::new();
        for f in &self.factors {
            *out.entry(f.args).or_default() += f.sign;
        }
        out.into_iter()
            .map(|(k, v)| (k, v.rem_euclid(modulus as i64) as u64))
            .filter(|&(_, v)| v != 0)
            .collect()
    }

    fn compile(&self, sites: &[Site]) -> Compiled {
        let pos: HashMap<Site, usize> = sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let terms = self
            .factors
            .iter()
            .map(|f| {
                let args = f.args.map(|a| match a {
                    Arg::Fixed(x) => CArg::Fixed(x),
                    Arg::Site { site, left } => CArg::Site(pos[&site], left),
                });
                (f.sign, args)
            })
            .collect();
        Compiled { terms }
    }
}

#[derive(Clone, Copy)]
enum CArg {
    Fixed(usize),
    Site(usize, usize),
}

struct Compiled {
    terms: Vec<(i64, [CArg; 4])>,
}

impl Compiled {
    fn term(&self, t: usize, nu: &CocycleData3, s: &[usize]) -> i64 {
        let g = nu.group();
        let (sign, args) = &self.terms[t];
        let a = args.map(|x| match x {
            CArg::Fixed(v) => v,
            CArg::Site(i, left) => g.mul(left, s[i]),
        });
        sign * nu.value(a) as i64
    }

    fn eval(&self, nu: &CocycleData3, s: &[usize]) -> u64 {
        let acc: i64 = (0..self.terms.len()).map(|t| self.term(t, nu, s)).sum();
        acc.rem_euclid(nu.modulus() as i64) as u64
    }
}

/// Suffix sums for odometer enumeration: `partial[p]` is the sum of the terms
/// whose lowest site position is at least p, so a carry up to position i only
/// re-evaluates the terms with lowest position ≤ i.
struct Incremental {
    by_min: Vec<Vec<usize>>,
    partial: Vec<i64>,
}

impl Incremental {
    fn new(c: &Compiled, nu: &CocycleData3, s: &[usize]) -> Self {
        let len = s.len();
        let mut by_min = vec![Vec::new(); len + 1];
        for (t, (_, args)) in c.terms.iter().enumerate() {
            let lo = args.iter().filter_map(|a| if let CArg::Site(i, _) = a { Some(*i) } else { None }).min().unwrap_or(len);
            by_min[lo].push(t);
        }
        let mut inc = Incremental { by_min, partial: vec![0; len + 1] };
        inc.partial[len] = inc.by_min[len].iter().map(|&t| c.term(t, nu, s)).sum();
        if len > 0 {
            inc.refresh(c, nu, s, len - 1);
        }
        inc
    }

    fn refresh(&mut self, c: &Compiled, nu: &CocycleData3, s: &[usize], top: usize) {
        for p in (0..=top).rev() {
            self.partial[p] = self.partial[p + 1] + self.by_min[p].iter().map(|&t| c.term(t, nu, s)).sum::<i64>();
        }
    }
}

/// β_g on `region`: the new phase at s is the old phase at s' with
/// s'(x) = g⁻¹ s(x) on the region and s(x) elsewhere.
pub fn beta_twist(u: &PhaseDiagonal, group: &FiniteGroup, g: usize, region: impl Fn(Site) -> bool) -> PhaseDiagonal {
    let gi = group.inv(g);
    let factors = u
        .factors
        .iter()
        .map(|f| Factor {
            sign: f.sign,
            args: f.args.map(|a| match a {
                Arg::Site { site, left } if region(site) => Arg::Site { site, left: group.mul(left, gi) },
                other => other,
            }),
        })
        .collect();
    PhaseDiagonal { label: format!("β_{g}({})", u.label), region: u.region.clone(), factors }
}

/// Upper half plane x_2 ≥ 0.
pub fn upper_half(s: Site) -> bool {
    s.1 >= 0
}

/// (d̃⁰u)(g) = u⁻¹ β_g(u).
pub fn d0_tilde(u: &PhaseDiagonal, group: &FiniteGroup, g: usize, region: impl Fn(Site) -> bool) -> PhaseDiagonal {
    let mut out = u.inverse().compose(&beta_twist(u, group, g, region));
    out.label = format!("d̃⁰({})({g})", u.label);
    out
}

fn rect(x1: (i64, i64), x2: (i64, i64)) -> BTreeSet<Site> {
    let mut out = BTreeSet::new();
    for a in x1.0..=x1.1 {
        for b in x2.0..=x2.1 {
            out.insert((a, b));
        }
    }
    out
}

/// Λ_L = [-L, L]^2.
pub fn lambda2(l: i64) -> BTreeSet<Site> {
    rect((-l, l), (-l, l))
}

/// Sites of Λ_{L+1} outside Λ_{L-1}: the two outer layers. Every unit
/// square with lower-left corner on the edge of Λ_L touches only these.
pub fn boundary_band(l: i64) -> BTreeSet<Site> {
    lambda2(l + 1).into_iter().filter(|s| s.0.abs().max(s.1.abs()) >= l).collect()
}

/// The two factors of q(s, x): Σ_π sgn π · ν(e, s(v_0), s(v_1), s(v_2)).
pub fn q_factors(group: &FiniteGroup, x: Site) -> [Factor; 2] {
    let e = group.identity();
    Perm::ALL.map(|pi| {
        let c = Simplex2D::new(x, pi).corners();
        Factor { sign: pi.sign(), args: [Arg::Fixed(e), site_arg(c[0], e), site_arg(c[1], e), site_arg(c[2], e)] }
    })
}

/// p(g, s, y) = ν(e, g, s(y, 0), s(y + 1, 0)).
pub fn p_factor_term(group: &FiniteGroup, g: usize, y: i64) -> Factor {
    let e = group.identity();
    Factor { sign: 1, args: [Arg::Fixed(e), Arg::Fixed(g), site_arg((y, 0), e), site_arg((y + 1, 0), e)] }
}

pub fn q_factor(nu: &CocycleData3, s: &Config, x: Site) -> Result<u64> {
    let pd = PhaseDiagonal { label: "q".into(), region: BTreeSet::new(), factors: q_factors(nu.group(), x).to_vec() };
    pd.eval(nu, s)
}

pub fn p_factor(nu: &CocycleData3, g: usize, s: &Config, y: i64) -> Result<u64> {
    let pd = PhaseDiagonal { label: "p".into(), region: BTreeSet::new(), factors: vec![p_factor_term(nu.group(), g, y)] };
    pd.eval(nu, s)
}

/// The operators of the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Which {
    V0,
    V0Plus,
    V0Minus,
    V0Boundary,
    V0BoundaryPlus,
    V0BoundaryMinus,
    V0BoundaryCorner,
    V1(usize),
    V1Plus(usize),
    V1Minus(usize),
    V1Boundary(usize),
    Vgh(usize, usize),
}

fn q_block(group: &FiniteGroup, label: &str, region: BTreeSet<Site>, squares: BTreeSet<Site>) -> Result<PhaseDiagonal> {
    let factors = squares.iter().flat_map(|&x| q_factors(group, x)).collect();
    PhaseDiagonal::new(label, region, factors)
}

fn p_block(group: &FiniteGroup, label: &str, g: usize, region: (i64, i64), ys: (i64, i64)) -> Result<PhaseDiagonal> {
    let factors = (ys.0..=ys.1)
        .map(|y| {
            let f = p_factor_term(group, g, y);
            Factor { sign: -1, ..f }
        })
        .collect();
    PhaseDiagonal::new(label, rect(region, (0, 0)), factors)
}

pub fn build_v(group: &FiniteGroup, which: Which, l: i64) -> Result<PhaseDiagonal> {
    if l < 2 {
        return Err(Error::InvalidArgument(format!("L must be at least 2, got {l}")));
    }
    let check = |g: usize| -> Result<()> {
        if g >= group.order() {
            return Err(Error::InvalidArgument(format!("group element {g} out of range")));
        }
        Ok(())
    };
    match which {
        Which::V0 => q_block(group, "V0", lambda2(l + 1), lambda2(l)),
        Which::V0Plus => q_block(group, "V0+", rect((-l - 1, l + 1), (0, l + 1)), rect((-l, l), (0, l))),
        Which::V0Minus => q_block(group, "V0-", rect((-l - 1, l + 1), (-l, -1)), rect((-l, l), (-l, -2))),
        Which::V0Boundary => q_block(group, "V0∂", rect((-l - 1, l + 1), (-1, 0)), rect((-l, l), (-1, -1))),
        Which::V0BoundaryPlus => q_block(group, "V0∂+", rect((0, l + 1), (-1, 0)), rect((0, l), (-1, -1))),
        Which::V0BoundaryMinus => q_block(group, "V0∂-", rect((-l, -1), (-1, 0)), rect((-l, -2), (-1, -1))),
        Which::V0BoundaryCorner => q_block(group, "V0∂0", rect((-1, 0), (-1, 0)), rect((-1, -1), (-1, -1))),
        Which::V1(g) => {
            check(g)?;
            p_block(group, &format!("V1({g})"), g, (-l - 1, l + 1), (-l, l))
        }
        Which::V1Plus(g) => {
            check(g)?;
            p_block(group, &format!("V1+({g})"), g, (0, l + 1), (0, l))
        }
        Which::V1Minus(g) => {
            check(g)?;
            p_block(group, &format!("V1-({g})"), g, (-l, -1), (-l, -2))
        }
        Which::V1Boundary(g) => {
            check(g)?;
            p_block(group, &format!("V1∂({g})"), g, (-1, 0), (-1, -1))
        }
        Which::Vgh(g, h) => {
            check(g)?;
            check(h)?;
            Ok(v_gh(group, g, h))
        }
    }
}

/// V(g, h) = Σ_s ν(e, g, gh, s) e_{s,s} at the origin.
pub fn v_gh(group: &FiniteGroup, g: usize, h: usize) -> PhaseDiagonal {
    let e = group.identity();
    let f = Factor { sign: 1, args: [Arg::Fixed(e), Arg::Fixed(g), Arg::Fixed(group.mul(g, h)), site_arg((0, 0), e)] };
    PhaseDiagonal { label: format!("V({g},{h})"), region: [(0, 0)].into(), factors: vec![f] }
}

/// ψ_{s,g}(x, π, j) = (−1)^{j+1} sgn π · ν(e, g, s(c_0), s(c_1)) with c the
/// corners of the facet S_{j,x}^{(π)}.
pub fn psi_factor(group: &FiniteGroup, g: usize, key: FacetKey) -> Factor {
    let e = group.identity();
    let [c0, c1] = key.corners();
    let sign = if key.k % 2 == 0 { -1 } else { 1 } * key.pi.sign();
    Factor { sign, args: [Arg::Fixed(e), Arg::Fixed(g), site_arg(c0, e), site_arg(c1, e)] }
}

/// Facet keys of all simplices over `squares` whose partner is not over
/// `squares`; matched pairs cancel.
pub fn surviving_facets(squares: &BTreeSet<Site>) -> Vec<FacetKey> {
    let mut out = Vec::new();
    for &x in squares {
        for pi in Perm::ALL {
            for k in 0..3 {
                let key = FacetKey::new(x, pi, k);
                if !squares.contains(&match_facet(key).0.x) {
                    out.push(key);
                }
            }
        }
    }
    out
}

/// Witness configurations from a failed check.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub s: Vec<(Site, usize)>,
    pub s_prime: Option<Vec<(Site, usize)>>,
    pub value: u64,
    pub value_prime: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    /// "exhaustive", "random" or "symbolic"
    pub sampling: String,
    pub seed: Option<u64>,
    pub configurations: u64,
    /// Sites the residual may depend on; empty means it must vanish.
    pub boundary_sites: usize,
    pub passed: bool,
    pub witness: Option<Witness>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    LemmaI,
    LemmaIiFirst,
    LemmaIiSecond,
    LemmaIii,
    LemmaIv,
}

impl Identity {
    pub const ALL: [Identity; 5] =
        [Identity::LemmaI, Identity::LemmaIiFirst, Identity::LemmaIiSecond, Identity::LemmaIii, Identity::LemmaIv];

    pub fn name(self) -> &'static str {
        match self {
            Identity::LemmaI => "lemma_i",
            Identity::LemmaIiFirst => "lemma_ii_first",
            Identity::LemmaIiSecond => "lemma_ii_second",
            Identity::LemmaIii => "lemma_iii",
            Identity::LemmaIv => "lemma_iv",
        }
    }

    pub fn parse(s: &str) -> Result<Identity> {
        Identity::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown identity {s:?}; expected one of lemma_i, lemma_ii_first, lemma_ii_second, lemma_iii, lemma_iv")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampling {
    pub samples: usize,
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { samples: DEFAULT_SAMPLES, seed: DEFAULT_SEED }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub identity: Identity,
    pub l: i64,
    /// false when L is below the threshold of the lemma; such runs are informational
    pub conformant: bool,
    pub modulus: u64,
    pub checks: Vec<CheckReport>,
    pub passed: bool,
}

fn config_list(sites: &[Site], s: &[usize]) -> Vec<(Site, usize)> {
    sites.iter().copied().zip(s.iter().copied()).collect()
}

/// Checks that `residual` depends only on the sites in `boundary` (must
/// vanish when `boundary` is empty), by full enumeration when feasible
/// (or forced) and by seeded pair probes otherwise.
pub fn check_residual(
    nu: &CocycleData3,
    name: &str,
    residual: &PhaseDiagonal,
    boundary: &BTreeSet<Site>,
    allow_exhaustive: bool,
    sampling: Sampling,
) -> CheckReport {
    let sites: Vec<Site> = residual.support().into_iter().collect();
    let compiled = residual.compile(&sites);
    let n = nu.group().order();
    let is_bd: Vec<bool> = sites.iter().map(|s| boundary.contains(s)).collect();
    let interior: Vec<usize> = (0..sites.len()).filter(|&i| !is_bd[i]).collect();
    let boundary_sites = sites.len() - interior.len();
    let must_vanish = boundary.is_empty();
    let space = (n as u128).checked_pow(sites.len() as u32).unwrap_or(u128::MAX);

    if allow_exhaustive && space <= EXHAUSTIVE_CAP {
        let mut s = vec![0usize; sites.len()];
        // boundary values packed mixed-radix; configurations are recovered from their counter
        let bd_pos: Vec<usize> = (0..s.len()).filter(|&i| is_bd[i]).collect();
        let bd_space = (n as u64).pow(bd_pos.len() as u32);
        let mut dense: Vec<(u64, u64)> = if bd_space <= 1 << 22 { vec![(u64::MAX, 0); bd_space as usize] } else { Vec::new() };
        let mut sparse: HashMap<u64, (u64, u64)> = HashMap::new();
        let decode = |mut idx: u64| -> Vec<usize> {
            (0..sites.len())
                .map(|_| {
                    let v = (idx % n as u64) as usize;
                    idx /= n as u64;
                    v
                })
                .collect()
        };
        let mut inc = Incremental::new(&compiled, nu, &s);
        let m = nu.modulus() as i64;
        let mut count = 0u64;
        loop {
            let index = count;
            count += 1;
            let v = inc.partial[0].rem_euclid(m) as u64;
            let fail = if must_vanish {
                (v != 0).then(|| Witness { s: config_list(&sites, &s), s_prime: None, value: v, value_prime: None })
            } else {
                let key = bd_pos.iter().rev().fold(0u64, |acc, &i| acc * n as u64 + s[i] as u64);
                let slot = if dense.is_empty() {
                    sparse.entry(key).or_insert((u64::MAX, 0))
                } else {
                    &mut dense[key as usize]
                };
                if slot.0 == u64::MAX {
                    *slot = (v, index);
                    None
                } else if slot.0 != v {
                    Some(Witness {
                        s: config_list(&sites, &decode(slot.1)),
                        s_prime: Some(config_list(&sites, &s)),
                        value: slot.0,
                        value_prime: Some(v),
                    })
                } else {
                    None
                }
            };
            if fail.is_some() {
                return CheckReport {
                    name: name.into(),
                    sampling: "exhaustive".into(),
                    seed: None,
                    configurations: count,
                    boundary_sites,
                    passed: false,
                    witness: fail,
                };
            }
            // odometer
            let mut i = 0;
            while i < s.len() {
                s[i] += 1;
                if s[i] < n {
                    break;
                }
                s[i] = 0;
                i += 1;
            }
            if i == s.len() {
                break;
            }
            inc.refresh(&compiled, nu, &s, i);
        }
        return CheckReport {
            name: name.into(),
            sampling: "exhaustive".into(),
            seed: None,
            configurations: count,
            boundary_sites,
            passed: true,
            witness: None,
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let mut count = 0u64;
    for _ in 0..sampling.samples {
        let s: Vec<usize> = (0..sites.len()).map(|_| rng.random_range(0..n)).collect();
        let mut t = s.clone();
        for &i in &interior {
            t[i] = rng.random_range(0..n);
        }
        if t == s && !interior.is_empty() {
            let i = interior[rng.random_range(0..interior.len())];
            t[i] = (t[i] + 1 + rng.random_range(0..n - 1)) % n;
        }
        count += 2;
        let (v, w) = (compiled.eval(nu, &s), compiled.eval(nu, &t));
        let bad = v != w || (must_vanish && (v != 0 || w != 0));
        if bad {
            return CheckReport {
                name: name.into(),
                sampling: "random".into(),
                seed: Some(sampling.seed),
                configurations: count,
                boundary_sites,
                passed: false,
                witness: Some(Witness {
                    s: config_list(&sites, &s),
                    s_prime: Some(config_list(&sites, &t)),
                    value: v,
                    value_prime: Some(w),
                }),
            };
        }
    }
    CheckReport {
        name: name.into(),
        sampling: "random".into(),
        seed: Some(sampling.seed),
        configurations: count,
        boundary_sites,
        passed: true,
        witness: None,
    }
}

fn multiset_check(name: &str, lhs: &PhaseDiagonal, rhs: &PhaseDiagonal, modulus: u64) -> CheckReport {
    let passed = lhs.factor_multiset(modulus) == rhs.factor_multiset(modulus);
    CheckReport {
        name: name.into(),
        sampling: "symbolic".into(),
        seed: None,
        configurations: 0,
        boundary_sites: 0,
        passed,
        witness: None,
    }
}

/// Cross-check for d̃⁰ of a q-block via the facet pairing: every ψ term
/// whose partner lies outside the block must either touch only `boundary`
/// sites or be one of the `line` terms, and the sum of the survivors must
/// equal `twisted` on probes.
fn pairing_check(
    nu: &CocycleData3,
    name: &str,
    squares: &BTreeSet<Site>,
    g: usize,
    line: &PhaseDiagonal,
    twisted: &PhaseDiagonal,
    boundary: &BTreeSet<Site>,
    sampling: Sampling,
) -> CheckReport {
    let group = nu.group();
    let line_set = line.factor_multiset(nu.modulus());
    let mut survivors = Vec::new();
    let mut stray = None;
    for key in surviving_facets(squares) {
        let f = psi_factor(group, g, key);
        survivors.push(f);
        let on_line = line_set.contains_key(&f.args) && f.sign == -1;
        if !on_line && !f.support().iter().all(|s| boundary.contains(s)) {
            stray.get_or_insert(f);
        }
    }
    let surviving = PhaseDiagonal { label: "ψ survivors".into(), region: BTreeSet::new(), factors: survivors };
    let diff = surviving.compose(&twisted.inverse());
    let mut report = check_residual(nu, name, &diff, &BTreeSet::new(), false, sampling);
    if let Some(f) = stray {
        report.passed = false;
        report.witness.get_or_insert(Witness {
            s: f.support().into_iter().map(|x| (x, 0)).collect(),
            s_prime: None,
            value: 0,
            value_prime: None,
        });
    }
    report
}

pub fn verify_identity(nu: &CocycleData3, which: Identity, l: i64, sampling: Sampling) -> Result<VerificationReport> {
    if l < MIN_L {
        return Err(Error::Precondition(format!("the lemma identities are asserted for L ≥ {MIN_L}, got {l}")));
    }
    verify_identity_any_l(nu, which, l, sampling)
}

/// As `verify_identity` but also accepts 2 ≤ L < 5; such reports are marked
/// non-conformant.
pub fn verify_identity_any_l(nu: &CocycleData3, which: Identity, l: i64, sampling: Sampling) -> Result<VerificationReport> {
    if l < 2 {
        return Err(Error::InvalidArgument(format!("L must be at least 2, got {l}")));
    }
    let group = nu.group().clone();
    let m = nu.modulus();
    let empty = BTreeSet::new();
    let mut checks = Vec::new();
    let b = |w: Which| build_v(&group, w, l);
    match which {
        Identity::LemmaI => {
            let lhs = b(Which::V0)?;
            let rhs = b(Which::V0Boundary)?.compose(&b(Which::V0Minus)?).compose(&b(Which::V0Plus)?);
            checks.push(multiset_check("V0 split (factors)", &lhs, &rhs, m));
            checks.push(check_residual(nu, "V0 split", &lhs.inverse().compose(&rhs), &empty, false, sampling));
            for g in group.elements() {
                let lhs = b(Which::V1(g))?;
                let rhs = b(Which::V1Boundary(g))?.compose(&b(Which::V1Minus(g))?).compose(&b(Which::V1Plus(g))?);
                checks.push(multiset_check(&format!("V1({g}) split (factors)"), &lhs, &rhs, m));
                checks.push(check_residual(nu, &format!("V1({g}) split"), &lhs.inverse().compose(&rhs), &empty, true, sampling));
            }
            let lhs = b(Which::V0Boundary)?;
            let rhs = b(Which::V0BoundaryCorner)?.compose(&b(Which::V0BoundaryMinus)?).compose(&b(Which::V0BoundaryPlus)?);
            checks.push(multiset_check("V0∂ split (factors)", &lhs, &rhs, m));
            checks.push(check_residual(nu, "V0∂ split", &lhs.inverse().compose(&rhs), &empty, false, sampling));
        }
        Identity::LemmaIiFirst | Identity::LemmaIiSecond => {
            let band = boundary_band(l);
            let (u, squares) = if which == Identity::LemmaIiFirst {
                (b(Which::V0Plus)?, rect((-l, l), (0, l)))
            } else {
                (b(Which::V0)?, lambda2(l))
            };
            for g in group.elements() {
                let (twisted, line) = if which == Identity::LemmaIiFirst {
                    (d0_tilde(&u, &group, g, upper_half), b(Which::V1(g))?)
                } else {
                    (d0_tilde(&u, &group, g, |_| true), PhaseDiagonal::identity("1"))
                };
                let residual = twisted.compose(&line.inverse());
                let seed = Sampling { seed: sampling.seed.wrapping_add(g as u64), ..sampling };
                checks.push(check_residual(nu, &format!("g={g} boundary support"), &residual, &band, false, seed));
                checks.push(pairing_check(nu, &format!("g={g} facet pairing"), &squares, g, &line, &twisted, &band, seed));
            }
        }
        Identity::LemmaIii => {
            let bd: BTreeSet<Site> = [(l, 0), (l + 1, 0)].into();
            for g in group.elements() {
                for h in group.elements() {
                    let lhs = b(Which::V1Plus(g))?
                        .compose(&beta_twist(&b(Which::V1Plus(h))?, &group, g, upper_half))
                        .compose(&b(Which::V1Plus(group.mul(g, h)))?.inverse());
                    let residual = lhs.compose(&v_gh(&group, g, h).inverse());
                    checks.push(check_residual(nu, &format!("g={g} h={h}"), &residual, &bd, true, sampling));
                }
            }
        }
        Identity::LemmaIv => {
            for g in group.elements() {
                for h in group.elements() {
                    for k in group.elements() {
                        let gh = group.mul(g, h);
                        let e = group.identity();
                        let c = Factor {
                            sign: -1,
                            args: [Arg::Fixed(e), Arg::Fixed(g), Arg::Fixed(gh), Arg::Fixed(group.mul(gh, k))],
                        };
                        let lhs = PhaseDiagonal { label: "ν̄".into(), region: BTreeSet::new(), factors: vec![c] }
                            .compose(&v_gh(&group, g, h))
                            .compose(&v_gh(&group, gh, k));
                        let rhs = beta_twist(&v_gh(&group, h, k), &group, g, upper_half)
                            .compose(&v_gh(&group, g, group.mul(h, k)));
                        let residual = lhs.compose(&rhs.inverse());
                        checks.push(check_residual(nu, &format!("g={g} h={h} k={k}"), &residual, &empty, true, sampling));
                    }
                }
            }
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerificationReport { identity: which, l, conformant: l >= MIN_L, modulus: m, checks, passed })
}

/// Exhaustive checks of the triangulation bookkeeping on the box [-r, r]^2:
/// match is a fixed-point-free involution, it agrees with a brute-force
/// search for the other key with the same corner set, the case tags are as
/// stated, and matched ψ terms cancel for every g and every pair of site
/// values.
#[derive(Clone, Debug, Serialize)]
pub struct PairingReport {
    pub keys: usize,
    pub involution: bool,
    pub fixed_point_free: bool,
    pub brute_force_agrees: bool,
    pub case_tags: bool,
    pub cancellation: bool,
    pub cancellation_evaluations: u64,
    pub passed: bool,
}

pub fn verify_pairing(nu: &CocycleData3, r: i64) -> PairingReport {
    let group = nu.group();
    let keys = FacetKey::all_in_box(-r, r);
    let mut by_corners: HashMap<BTreeSet<Site>, Vec<FacetKey>> = HashMap::new();
    for key in FacetKey::all_in_box(-r - 1, r + 1) {
        by_corners.entry(key.corners().into_iter().collect()).or_default().push(key);
    }
    let mut involution = true;
    let mut fixed_point_free = true;
    let mut brute = true;
    let mut tags = true;
    let mut cancel = true;
    let mut evals = 0u64;
    for &key in &keys {
        let (partner, case) = match_facet(key);
        involution &= match_facet(partner).0 == key;
        fixed_point_free &= partner != key;
        let set: BTreeSet<Site> = key.corners().into_iter().collect();
        let others: Vec<&FacetKey> = by_corners[&set].iter().filter(|k| **k != key).collect();
        brute &= others.len() == 1 && *others[0] == partner;
        tags &= match case {
            MatchCase::I => key.k == 1 && partner.k == 1 && partner.x == key.x,
            MatchCase::II => key.k == 0 && partner.k == 2 && partner.x == add(key.x, unit(key.pi.apply(1))),
            MatchCase::III => key.k == 2 && partner.k == 0 && key.x == add(partner.x, unit(partner.pi.apply(1))),
        } && partner.pi == key.pi.swapped()
            && partner.corners() == key.corners();
        let [c0, c1] = key.corners();
        for g in group.elements() {
            let pd = PhaseDiagonal {
                label: "pair".into(),
                region: BTreeSet::new(),
                factors: vec![psi_factor(group, g, key), psi_factor(group, g, partner)],
            };
            for a in group.elements() {
                for bb in group.elements() {
                    let s: Config = [(c0, a), (c1, bb)].into();
                    evals += 1;
                    cancel &= matches!(pd.eval(nu, &s), Ok(0));
                }
            }
        }
    }
    PairingReport {
        keys: keys.len(),
        involution,
        fixed_point_free,
        brute_force_agrees: brute,
        case_tags: tags,
        cancellation: cancel,
        cancellation_evaluations: evals,
        passed: involution && fixed_point_free && brute && tags && cancel,
    }
}

#[derive(Clone, Debug)]
pub struct ExtractResult {
    /// c(g, h, k) read off from the V(g, h)
    pub cocycle: Cochain,
    pub class: CohomologyClass,
    /// classify(Ψ³(ν))
    pub expected: CohomologyClass,
    pub is_cocycle: bool,
    pub agrees: bool,
}

/// Reads c(g,h,k) from V(g,h) V(gh,k) = c(g,h,k) β_g(V(h,k)) V(g,hk)
/// on every configuration of the origin and classifies it.
pub fn extract_h3(nu: &CocycleData3, h3: &CohomologyGroup) -> Result<ExtractResult> {
    let group = nu.group().clone();
    let m = nu.modulus() as i64;
    let n = group.order();
    let mut values = vec![0u64; n * n * n];
    for g in group.elements() {
        for h in group.elements() {
            for k in group.elements() {
                let lhs = v_gh(&group, g, h).compose(&v_gh(&group, group.mul(g, h), k));
                let rhs = beta_twist(&v_gh(&group, h, k), &group, g, upper_half).compose(&v_gh(&group, g, group.mul(h, k)));
                let ratio = lhs.compose(&rhs.inverse());
                let mut seen = None;
                for s in group.elements() {
                    let v = ratio.eval(nu, &[((0, 0), s)].into())?;
                    match seen {
                        None => seen = Some(v),
                        Some(w) if w != v => {
                            return Err(Error::ModelInconsistency(format!(
                                "ratio for (g,h,k)=({g},{h},{k}) is {w} at one configuration and {v} at another"
                            )))
                        }
                        _ => {}
                    }
                }
                values[(g * n + h) * n + k] = (seen.unwrap_or(0) as i64).rem_euclid(m) as u64;
            }
        }
    }
    let cocycle = Cochain::from_values(&group, 3, nu.modulus(), values)?;
    let is_cocycle = crate::cohomology::is_cocycle(&cocycle);
    let class = h3.classify(&cocycle)?;
    let expected = h3.classify(&nu.inhomogeneous())?;
    let agrees = class.class_id == expected.class_id;
    Ok(ExtractResult { cocycle, class, expected, is_cocycle, agrees })
}

/// The cocycle data for class `id` of H^3(G) at the default modulus.
pub fn class_cocycle(group: &FiniteGroup, id: usize) -> Result<(CocycleData3, CohomologyGroup)> {
    let h3 = cohomology_group(group, 3, crate::cohomology::default_modulus(group, None))?;
    let nu = CocycleData3::from_class(h3.class(id)?)?;
    Ok((nu, h3))
}
