use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sptkit::groups::spin_operators;
use sptkit::linalg::{self, CMat};
use sptkit::mps::*;

/// Reference expectation from explicit window vectors: every matrix word is
/// multiplied out, ψ_μ = conj(W_μ)_{ab}, and the boundary e_ab is weighted
/// by ρ_a. Local operators act on ψ through index arithmetic.
fn reference_expectation(c: &CanonicalMps, n: usize, ops: &[(usize, &CMat)]) -> C64 {
    let (d, k) = (c.d(), c.k());
    let dim = d.pow(n as u32);
    let words: Vec<CMat> = (0..dim)
        .map(|idx| {
            let mut digits = vec![0; n];
            let mut x = idx;
            for p in (0..n).rev() {
                digits[p] = x % d;
                x /= d;
            }
            c.tensor.word(&digits)
        })
        .collect();
    let mut total = C64::new(0.0, 0.0);
    for a in 0..k {
        for b in 0..k {
            let psi: Vec<C64> = words.iter().map(|w| w[[a, b]].conj()).collect();
            let mut phi = psi.clone();
            for &(site, op) in ops {
                let stride = d.pow((n - 1 - site) as u32);
                let mut out = vec![C64::new(0.0, 0.0); dim];
                for (idx, o) in out.iter_mut().enumerate() {
                    let digit = (idx / stride) % d;
                    let base = idx - digit * stride;
                    for e in 0..d {
                        *o += op[[digit, e]] * phi[base + e * stride];
                    }
                }
                phi = out;
            }
            let amp: C64 = psi.iter().zip(&phi).map(|(x, y)| x.conj() * y).sum();
            total += amp * c.rho_diag[a];
        }
    }
    total
}

fn site_op(ops: &[(usize, &CMat)], n: usize, d: usize) -> CMat {
    let mut full = linalg::eye(1);
    for x in 0..n {
        let f = ops.iter().find(|(p, _)| *p == x).map(|(_, a)| (*a).clone()).unwrap_or_else(|| linalg::eye(d));
        full = linalg::kron(&full, &f);
    }
    full
}

#[test]
fn aklt_transfer_spectrum() {
    // Cartesian AKLT: T(A) = (2 tr(A) I - A)/3, so T(I) = I and T(traceless) = -A/3
    for v in [MpsTensor::aklt(), MpsTensor::aklt_cartesian()] {
        let w = transfer_op(&v).spectrum().unwrap();
        let want = [1.0, -1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0];
        for (z, x) in w.iter().zip(want) {
            assert!((z - C64::new(x, 0.0)).norm() < 1e-10, "{w:?}");
        }
    }
}

#[test]
fn transfer_examples() {
    let v = MpsTensor::new(vec![CMat::from_elem((1, 1), C64::new(0.6, 0.0)), CMat::from_elem((1, 1), C64::new(0.0, 0.8))], "k1").unwrap();
    assert!((transfer_op(&v).matrix[[0, 0]] - linalg::ONE).norm() < 1e-15);
}

#[test]
fn normalize_examples() {
    let a = MpsTensor::aklt();
    let n = normalize(&a).unwrap();
    for mu in 0..3 {
        assert!(linalg::max_abs(&(n.matrix(mu) - a.matrix(mu))) < 1e-12);
    }
    let n3 = normalize(&a.scaled(C64::new(3.0, 0.0))).unwrap();
    for mu in 0..3 {
        assert!(linalg::max_abs(&(n3.matrix(mu) - a.matrix(mu))) < 1e-12);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let v = MpsTensor::new((0..2).map(|_| linalg::random_complex(2, 2, &mut rng)).collect(), "r").unwrap();
    let nv = normalize(&v).unwrap();
    // power iteration on the normalized transfer operator
    let t = transfer_op(&nv);
    let mut x = linalg::eye(2);
    let mut ratio = 0.0;
    for _ in 0..400 {
        let y = t.apply(&x);
        ratio = linalg::fro_norm(&y) / linalg::fro_norm(&x);
        x = y.mapv(|z| z / linalg::fro_norm(&y));
    }
    assert!((ratio - 1.0).abs() < 1e-10);
    let zero = MpsTensor::new(vec![CMat::zeros((2, 2))], "z").unwrap();
    assert!(matches!(normalize(&zero), Err(sptkit::Error::DegenerateTensor(_))));
}

#[test]
fn primitivity_triptych() {
    for d in 1..5 {
        let r = is_primitive(&MpsTensor::product(d).unwrap()).unwrap();
        assert!(r.primitive && r.criteria_agree);
        assert_eq!(r.span_length, Some(1));
    }
    let g = is_primitive(&MpsTensor::ghz()).unwrap();
    assert!(!g.primitive && g.criteria_agree);
    assert_eq!(g.peripheral_eigenvalues.len(), 2);
    assert!(matches!(g.span, SpanOutcome::Stabilized { dim: 2, .. }));
    let a = is_primitive(&MpsTensor::aklt()).unwrap();
    assert!(a.primitive && a.criteria_agree);
    assert_eq!(a.span_length, Some(2));
}

#[test]
fn canonical_examples() {
    let p = canonical_form(&MpsTensor::product(3).unwrap()).unwrap();
    assert_eq!(p.rho_diag, vec![1.0]);
    assert_eq!(correlation_length(&p).unwrap(), 0.0);
    assert!(matches!(canonical_form(&MpsTensor::ghz()), Err(sptkit::Error::Precondition(_))));
}

#[test]
fn aklt_observables_against_explicit_windows() {
    let c = canonical_form(&MpsTensor::aklt()).unwrap();
    let s3 = spin_operators(3).unwrap()[2].clone();
    let mag = reference_expectation(&c, 6, &[(2, &s3)]);
    assert!(mag.norm() < 1e-12);
    assert!(expectation(&c, &[s3.clone()]).unwrap().norm() < 1e-12);

    let zz = reference_expectation(&c, 8, &[(3, &s3), (4, &s3)]);
    assert!((zz - C64::new(-4.0 / 9.0, 0.0)).norm() < 1e-10);
    let e = expectation(&c, &[s3.clone(), s3.clone()]).unwrap();
    assert!((e - C64::new(-4.0 / 9.0, 0.0)).norm() < 1e-12);
}

#[test]
fn window_vector_examples() {
    let p = MpsTensor::new(vec![CMat::from_elem((1, 1), C64::new(0.6, 0.1)), CMat::from_elem((1, 1), C64::new(0.0, 0.8))], "p").unwrap();
    let w = brute_force_window(&p, 2, &linalg::eye(1)).unwrap();
    let a = [C64::new(0.6, -0.1), C64::new(0.0, -0.8)];
    for i in 0..2 {
        for j in 0..2 {
            assert!((w[2 * i + j] - a[i] * a[j]).norm() < 1e-15);
        }
    }
    let v = MpsTensor::aklt_cartesian();
    let w1 = brute_force_window(&v, 1, &linalg::eye(2)).unwrap();
    for mu in 0..3 {
        assert!((w1[mu] - linalg::trace(v.matrix(mu)).conj()).norm() < 1e-15);
    }
    assert!(matches!(brute_force_window(&v, 40, &linalg::eye(2)), Err(sptkit::Error::CapExceeded { .. })));
}

#[test]
fn aklt_two_point_functions_from_window_vectors() {
    let c = canonical_form(&MpsTensor::aklt()).unwrap();
    let r = window_density_matrix(&c, 4).unwrap();
    let s = spin_operators(3).unwrap();
    for a in 0..3 {
        for dist in 1..4 {
            let from_window = linalg::trace(&r.dot(&site_op(&[(0, &s[a]), (dist, &s[a])], 4, 3)));
            let mut ops = vec![linalg::eye(3); dist + 1];
            ops[0] = s[a].clone();
            ops[dist] = s[a].clone();
            let e = expectation(&c, &ops).unwrap();
            assert!((from_window - e).norm() < 1e-8);
        }
    }
}

#[test]
fn matrix_unit_strings_match_window_ratios() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let v = MpsTensor::new((0..2).map(|_| linalg::random_complex(2, 2, &mut rng)).collect(), "r").unwrap();
    let c = canonical_form(&v).unwrap();
    for n in 1..=6usize {
        let r = window_density_matrix(&c, n).unwrap();
        let dim = 2usize.pow(n as u32);
        for trial in 0..4 {
            let (i, j) = ((trial * 7 + n) % dim, (trial * 3 + 1) % dim);
            let ops: Vec<CMat> = (0..n)
                .map(|p| {
                    let shift = n - 1 - p;
                    let mut e = CMat::zeros((2, 2));
                    e[[(i >> shift) & 1, (j >> shift) & 1]] = linalg::ONE;
                    e
                })
                .collect();
            let e = expectation(&c, &ops).unwrap();
            assert!((e - r[[j, i]]).norm() < 1e-10, "n={n} i={i} j={j}");
        }
    }
}

#[test]
fn aklt_correlations_decay_with_the_second_eigenvalue() {
    let c = canonical_form(&MpsTensor::aklt()).unwrap();
    let xi = correlation_length(&c).unwrap();
    assert!((xi - 1.0 / 3f64.ln()).abs() < 1e-8);
    let s3 = spin_operators(3).unwrap()[2].clone();
    let mut logs = Vec::new();
    for r in 1..=6 {
        let mut ops = vec![linalg::eye(3); r + 1];
        ops[0] = s3.clone();
        ops[r] = s3.clone();
        let g = expectation(&c, &ops).unwrap().re;
        // exact AKLT value (4/3)(-1/3)^r
        assert!((g - 4.0 / 3.0 * (-1.0f64 / 3.0).powi(r as i32)).abs() < 1e-12);
        logs.push((r as f64, g.abs().ln()));
    }
    let pts = &logs[1..];
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let slope = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / pts.iter().map(|(x, _)| (x - mx).powi(2)).sum::<f64>();
    assert!((-slope - 3f64.ln()).abs() / 3f64.ln() < 0.02);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gauge_invariance_of_expectations(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = MpsTensor::new((0..3).map(|_| linalg::random_complex(2, 2, &mut rng)).collect(), "r").unwrap();
        let w = linalg::random_invertible(2, &mut rng);
        let c1 = canonical_form(&v).unwrap();
        let c2 = canonical_form(&v.gauge(&w).unwrap()).unwrap();
        let ops: Vec<CMat> = (0..3).map(|_| linalg::random_complex(3, 3, &mut rng)).collect();
        let e1 = expectation(&c1, &ops).unwrap();
        let e2 = expectation(&c2, &ops).unwrap();
        prop_assert!((e1 - e2).norm() < 1e-8);
    }

    #[test]
    fn primitivity_is_scale_invariant(seed in 0u64..10_000, lam in 0.05f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = MpsTensor::new((0..2).map(|_| linalg::random_complex(2, 2, &mut rng)).collect(), "r").unwrap();
        let a = is_primitive(&v).unwrap();
        let b = is_primitive(&v.scaled(C64::new(lam, 0.0))).unwrap();
        prop_assert_eq!(a.primitive, b.primitive);
        prop_assert_eq!(a.span, b.span);
    }

    #[test]
    fn canonical_fixed_points(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = MpsTensor::new((0..2).map(|_| linalg::random_complex(3, 3, &mut rng)).collect(), "r").unwrap();
        let c = canonical_form(&v).unwrap();
        let t = c.transfer();
        prop_assert!(linalg::max_abs(&(t.apply(&linalg::eye(3)) - linalg::eye(3))) < 1e-10);
        prop_assert!(linalg::max_abs(&(t.apply_adjoint(&c.rho) - &c.rho)) < 1e-10);
        prop_assert!((c.rho_diag.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(c.rho_diag.windows(2).all(|w| w[0] >= w[1]) && c.rho_diag[2] > 0.0);
    }
}
