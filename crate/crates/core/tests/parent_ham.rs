use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sptkit::linalg::{self, CMat};
use sptkit::mps::MpsTensor;
use sptkit::parent_ham::*;

#[test]
fn gamma_ranks() {
    assert_eq!(gamma_map(&MpsTensor::product(3).unwrap(), 4).unwrap().rank, 1);
    let a = MpsTensor::aklt();
    assert_eq!(gamma_map(&a, 1).unwrap().rank, 3);
    assert_eq!(gamma_map(&a, 2).unwrap().rank, 4);
    // column for X is the vector of Tr X W*
    let g = gamma_map(&a, 3).unwrap();
    let x = CMat::from_shape_fn((2, 2), |(i, j)| linalg::c(i as f64 + 0.5, j as f64 - 0.25));
    let col = g.matrix.dot(&linalg::vectorize(&x));
    let mut row = 0;
    for m0 in 0..3 {
        for m1 in 0..3 {
            for m2 in 0..3 {
                let w = a.word(&[m0, m1, m2]);
                assert!((col[row] - linalg::trace(&x.dot(&linalg::dagger(&w)))).norm() < 1e-14);
                row += 1;
            }
        }
    }
}

#[test]
fn injectivity_lengths() {
    assert_eq!(injectivity_length(&MpsTensor::product(2).unwrap()).unwrap().length, Some(1));
    assert_eq!(injectivity_length(&MpsTensor::aklt()).unwrap().length, Some(2));
    let g = injectivity_length(&MpsTensor::ghz()).unwrap();
    assert!(g.indeterminate && g.length.is_none());
    assert!(g.ranks.iter().all(|&r| r == 2));
}

#[test]
fn kernel_dimensions() {
    let a = ground_data(&local_hamiltonian(&MpsTensor::aklt(), 2, 4).unwrap()).unwrap();
    assert_eq!(a.kernel_dim, 4);
    let g = ground_data(&local_hamiltonian(&MpsTensor::ghz(), 2, 5).unwrap()).unwrap();
    assert_eq!(g.kernel_dim, 2);
    let p = gap_scan(&MpsTensor::product(2).unwrap(), 1, 2..=8).unwrap();
    for row in p {
        assert_eq!(row.kernel_dim, 1);
        assert!((row.gap.unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn aklt_scan() {
    let rows = gap_scan(&MpsTensor::aklt(), 2, 3..=8).unwrap();
    let mut prev = f64::INFINITY;
    for r in &rows {
        assert_eq!(r.kernel_dim, 4, "N = {}", r.n);
        let g = r.gap.unwrap();
        assert!(g > 0.1 && g <= prev + 1e-9, "N = {} gap {g}", r.n);
        prev = g;
    }
}

#[test]
fn intersection_examples() {
    for n in 3..=6 {
        let r = intersection_check(&MpsTensor::aklt(), 2, n).unwrap();
        assert!(r.holds && r.kernel_dim == 4 && r.intersection_dim == 4, "{r:?}");
    }
    assert!(intersection_check(&MpsTensor::product(2).unwrap(), 1, 4).unwrap().holds);
    let g = intersection_check(&MpsTensor::ghz(), 2, 5).unwrap();
    assert!(g.holds && g.kernel_dim == 2);
}

#[test]
fn random_primitive_tensor_has_k2_dimensional_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let v = MpsTensor::new((0..2).map(|_| linalg::random_complex(2, 2, &mut rng)).collect(), "r").unwrap();
    let m = injectivity_length(&v).unwrap().length.unwrap() + 1;
    for row in gap_scan(&v, m, m..=9).unwrap() {
        assert_eq!(row.kernel_dim, 4, "N = {}", row.n);
        assert!(row.gap.unwrap() > 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn gap_is_gauge_invariant(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = MpsTensor::new((0..2).map(|_| linalg::random_complex(2, 2, &mut rng)).collect(), "r").unwrap();
        let w = linalg::random_invertible(2, &mut rng);
        let u = v.gauge(&w).unwrap();
        for n in [3usize, 5] {
            let a = ground_data(&local_hamiltonian(&v, 3, n).unwrap()).unwrap();
            let b = ground_data(&local_hamiltonian(&u, 3, n).unwrap()).unwrap();
            prop_assert_eq!(a.kernel_dim, b.kernel_dim);
            prop_assert!((a.gap.unwrap() - b.gap.unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn window_projector_kills_gamma(seed in 0u64..10_000, m in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = MpsTensor::new((0..3).map(|_| linalg::random_complex(2, 2, &mut rng)).collect(), "r").unwrap();
        let h = local_hamiltonian(&v, m, m).unwrap();
        let g = gamma_map(&v, m).unwrap();
        prop_assert!(linalg::max_abs(&h.h.dot(&g.matrix)) < 1e-10);
    }
}
