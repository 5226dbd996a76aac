use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sptkit::linalg::{self, CMat};
use sptkit::spectral_flow::*;

fn random_gapped_path(n: usize, seed: u64) -> GappedPath {
    // diag(0, 5, 6, ...) plus a perturbation of norm <= 1: gap >= 3
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h0 = CMat::zeros((n, n));
    for i in 1..n {
        h0[[i, i]] = C64::new(4.0 + i as f64, 0.0);
    }
    let v = linalg::random_hermitian(n, &mut rng);
    let v = v.mapv(|z| z / linalg::op_norm(&v).unwrap());
    let w = linalg::random_hermitian(n, &mut rng);
    let w = w.mapv(|z| z / linalg::op_norm(&w).unwrap());
    GappedPath::checkpoints(vec![0.0, 0.5, 1.0], vec![h0.clone() + &v.mapv(|z| z * 0.5), h0.clone() - &w.mapv(|z| z * 0.5), h0 + &v], 3.0, "random").unwrap()
}

/// Ground projector of a 2×2 Hermitian matrix n·σ from the Bloch vector:
/// P = (I − n̂·σ)/2.
fn bloch_projector(h: &CMat) -> CMat {
    let [x, y, z] = sptkit::mps::pauli();
    let nx = h[[0, 1]].re;
    let ny = -h[[0, 1]].im;
    let nz = h[[0, 0]].re;
    let r = (nx * nx + ny * ny + nz * nz).sqrt();
    let ns = x.mapv(|c| c * nx / r) + y.mapv(|c| c * ny / r) + z.mapv(|c| c * nz / r);
    (linalg::eye(2) - ns).mapv(|c| c * 0.5)
}

#[test]
fn constant_path() {
    let h = CMat::from_diag(&ndarray::arr1(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(3.0, 0.0)]));
    let p = GappedPath::linear(h.clone(), h, 1.0, "const").unwrap();
    assert_eq!(linalg::max_abs(&hastings_generator(&p, 0.4).unwrap()), 0.0);
    let r = transport(&p, 16).unwrap();
    assert!(r.max_deviation < 1e-14);
    assert!(linalg::max_abs(&(r.final_unitary - linalg::eye(3))) < 1e-14);
    assert!(derivative_identity_check(&p, 0.5, 1e-4).unwrap() < 1e-12);
}

#[test]
fn zx_interpolation_transport() {
    let p = GappedPath::zx_interp();
    // exact projectors agree with the Bloch formula
    for i in 0..=10 {
        let s = i as f64 / 10.0;
        let pe = p.spectral_data(s).unwrap().ground_projector();
        assert!(linalg::max_abs(&(pe - bloch_projector(&p.hamiltonian(s)))) < 1e-12);
    }
    let r = transport(&p, 1024).unwrap();
    assert!(r.max_deviation <= 1e-6, "{}", r.max_deviation);
    assert!(r.max_unitarity_defect <= 1e-8);
    assert_eq!(r.rank, 1);
    assert!(derivative_identity_check(&p, 0.5, 1e-4).unwrap() <= 1e-6);
    for i in 1..10 {
        assert!(derivative_identity_check(&p, i as f64 / 10.0, 1e-4).unwrap() <= 1e-5);
    }
}

#[test]
fn zx_interpolation_fourth_order() {
    let p = GappedPath::zx_interp();
    let orders = convergence_orders(&p, &[128, 256, 512]).unwrap();
    for (_, _, o) in &orders[1..] {
        assert!(o.unwrap() >= 3.5, "{orders:?}");
    }
}

#[test]
fn rotation_path_against_exact_rotation() {
    let p = GappedPath::builtin_rotation();
    let r = transport(&p, 512).unwrap();
    assert!(r.max_deviation <= 1e-6);
    // the exact transport is e^{sA} itself, up to phases on each eigenspace
    let a = sptkit::mps::pauli()[1].mapv(|z| z * C64::new(0.0, std::f64::consts::FRAC_PI_2));
    let ex = linalg::expi_hermitian(&a.mapv(|z| z * C64::new(0.0, -1.0)), 1.0).unwrap();
    let mut p0 = CMat::zeros((2, 2));
    p0[[0, 0]] = linalg::ONE;
    let want = ex.dot(&p0).dot(&linalg::dagger(&ex));
    let got = r.final_unitary.dot(&p0).dot(&linalg::dagger(&r.final_unitary));
    assert!(linalg::max_abs(&(want - got)) < 1e-8);
}

#[test]
fn gap_violation_is_reported() {
    let [x, _, z] = sptkit::mps::pauli();
    // (1-s)σ3 − sσ3 has gap 2|1 − 2s|, below 0.5 on (3/8, 5/8)
    let p = GappedPath::linear(z.clone(), z.mapv(|c| -c), 0.5, "crossing").unwrap();
    match transport(&p, 64) {
        Err(sptkit::Error::GapViolation { s, .. }) => assert!(s > 0.375 && s < 0.625, "{s}"),
        other => panic!("expected gap violation, got {other:?}"),
    }
    let q = GappedPath::linear(z, x, 1.5, "overclaimed").unwrap();
    assert!(matches!(q.validate_gap(64), Err(sptkit::Error::GapViolation { .. })));
}

#[test]
fn random_paths() {
    for seed in 0..3 {
        let p = random_gapped_path(8, seed);
        for s in [0.1, 0.3, 0.45, 0.7, 0.9] {
            assert!(derivative_identity_check(&p, s, 1e-4).unwrap() <= 1e-5);
        }
        let r = transport(&p, 256).unwrap();
        assert!(r.max_deviation <= 1e-6, "{}", r.max_deviation);
    }
}

#[test]
fn path_file_roundtrip() {
    let p = GappedPath::zx_interp();
    let text = serde_json::to_string(&p.to_file().unwrap()).unwrap();
    let q = GappedPath::from_json(&text).unwrap();
    for s in [0.0, 0.25, 0.8, 1.0] {
        assert!(linalg::max_abs(&(p.hamiltonian(s) - q.hamiltonian(s))) < 1e-15);
    }
    assert!(GappedPath::from_json(r#"{"gamma":1,"matrices":[],"bogus":1}"#).is_err());
}

#[test]
fn finite_difference_paths_are_flagged() {
    let p = GappedPath::from_fn(2, 1.0, "fn", |s| {
        let [x, _, z] = sptkit::mps::pauli();
        z.mapv(|c| c * (1.0 + s)) + x.mapv(|c| c * s * s)
    })
    .unwrap();
    assert!(p.derivative_is_finite_difference());
    assert!(transport(&p, 64).unwrap().derivative_is_finite_difference);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generator_is_hermitian_and_matches_resolvent(seed in 0u64..10_000, s in 0.0f64..1.0) {
        let p = random_gapped_path(6, seed);
        let d = hastings_generator(&p, s).unwrap();
        prop_assert!(linalg::hermiticity_defect(&d) <= 1e-10);
        let pr = p.spectral_data(s).unwrap().ground_projector();
        let blk = off_diagonal_block(&d, &pr);
        prop_assert!(linalg::max_abs(&(blk - resolvent_block(&p, s).unwrap())) <= 1e-8);
    }

    #[test]
    fn rank_is_preserved(seed in 0u64..10_000) {
        let p = random_gapped_path(4, seed);
        let r = transport(&p, 32).unwrap();
        let tr = linalg::trace(&r.final_unitary.dot(&p.spectral_data(0.0).unwrap().ground_projector()).dot(&linalg::dagger(&r.final_unitary)));
        prop_assert!((tr.re - r.rank as f64).abs() < 1e-10);
    }
}
