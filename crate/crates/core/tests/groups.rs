use num_complex::Complex64 as C64;
use proptest::prelude::*;
use sptkit::groups::*;
use sptkit::linalg::{self, max_abs};

fn assoc_exhaustive(g: &FiniteGroup) -> bool {
    g.elements().all(|a| g.elements().all(|b| g.elements().all(|c| g.mul(g.mul(a, b), c) == g.mul(a, g.mul(b, c)))))
}

fn isomorphic(a: &FiniteGroup, b: &FiniteGroup) -> bool {
    // exhaustive search over bijections fixing the identity
    fn go(a: &FiniteGroup, b: &FiniteGroup, map: &mut Vec<Option<usize>>, used: &mut Vec<bool>, i: usize) -> bool {
        let n = a.order();
        if i == n {
            return a.elements().all(|x| a.elements().all(|y| map[a.mul(x, y)] == Some(b.mul(map[x].unwrap(), map[y].unwrap()))));
        }
        if map[i].is_some() {
            return go(a, b, map, used, i + 1);
        }
        for t in 0..n {
            if !used[t] {
                used[t] = true;
                map[i] = Some(t);
                if go(a, b, map, used, i + 1) {
                    return true;
                }
                map[i] = None;
                used[t] = false;
            }
        }
        false
    }
    if a.order() != b.order() {
        return false;
    }
    let mut map = vec![None; a.order()];
    let mut used = vec![false; a.order()];
    map[a.identity()] = Some(b.identity());
    used[b.identity()] = true;
    go(a, b, &mut map, &mut used, 0)
}

#[test]
fn cyclic_examples() {
    let z1 = make_cyclic(1).unwrap();
    assert_eq!((z1.order(), z1.identity()), (1, 0));
    assert_eq!(make_cyclic(2).unwrap().table(), &[vec![0, 1], vec![1, 0]]);
    assert_eq!(make_cyclic(4).unwrap().inverses(), &[0, 3, 2, 1]);
    assert!(matches!(make_cyclic(0), Err(sptkit::Error::InvalidArgument(_))));
    for n in 1..8 {
        let g = make_cyclic(n).unwrap();
        assert!(g.elements().all(|a| g.elements().all(|b| g.mul(a, b) == (a + b) % n)));
        assert_eq!(g.exponent(), n);
    }
}

#[test]
fn direct_products() {
    let z2 = make_cyclic(2).unwrap();
    let k4 = direct_product(&z2, &z2);
    assert_eq!(k4.order(), 4);
    assert!(k4.elements().all(|g| k4.mul(g, g) == k4.identity()));
    assert!(assoc_exhaustive(&k4));
    // packing: (g, h) -> h |G| + g
    let z3 = make_cyclic(3).unwrap();
    let p = direct_product(&z2, &z3);
    for (g1, h1) in (0..2).flat_map(|g| (0..3).map(move |h| (g, h))) {
        for (g2, h2) in (0..2).flat_map(|g| (0..3).map(move |h| (g, h))) {
            assert_eq!(p.mul(h1 * 2 + g1, h2 * 2 + g2), ((h1 + h2) % 3) * 2 + (g1 + g2) % 2);
        }
    }
    assert!(isomorphic(&p, &make_cyclic(6).unwrap()));
    assert!(!isomorphic(&k4, &make_cyclic(4).unwrap()));
    let mut orders: Vec<usize> = p.elements().map(|g| p.element_order(g)).collect();
    orders.sort();
    assert_eq!(orders, vec![1, 2, 3, 3, 6, 6]);
    let z1 = make_cyclic(1).unwrap();
    assert_eq!(direct_product(&z1, &k4).table(), k4.table());
}

#[test]
fn validation() {
    assert!(validate_table(vec![vec![0, 1], vec![1, 0]], "Z2").is_ok());
    let e = validate_table(vec![vec![0, 1], vec![1, 1]], "bad").unwrap_err();
    assert!(e.to_string().contains("no inverse for 1"), "{e}");
    let latin = vec![vec![0, 2, 1], vec![2, 1, 0], vec![1, 0, 2]];
    let e = validate_table(latin, "latin").unwrap_err();
    assert!(matches!(e, sptkit::Error::GroupValidation(_)));
    assert!(e.to_string().contains("triple"), "{e}");
    assert!(validate_table(vec![vec![0, 1], vec![1]], "ragged").is_err());
    assert!(validate_table(vec![vec![0, 2], vec![1, 0]], "out of range").is_err());
}

#[test]
fn file_roundtrip() {
    let z2 = make_cyclic(2).unwrap();
    let k4 = direct_product(&z2, &z2).with_label("Z2xZ2");
    let text = serde_json::to_string(&k4.to_file()).unwrap();
    let back = FiniteGroup::from_json(&text).unwrap();
    assert_eq!(back.table(), k4.table());
    assert_eq!(back.label(), "Z2xZ2");
    assert!(FiniteGroup::from_json(r#"{"order":2,"table":[[0,1],[1,0]],"extra":1}"#).is_err());
}

#[test]
fn spin_half_and_casimir() {
    let s = spin_operators(2).unwrap();
    let p = sptkit::mps::pauli();
    for j in 0..3 {
        assert!(max_abs(&(&s[j] - &p[j].mapv(|z| z * 0.5))) < 1e-15);
    }
    let c = linalg::commutator(&s[0], &s[1]) - s[2].mapv(|z| z * C64::new(0.0, 1.0));
    assert_eq!(max_abs(&c), 0.0);
    for d in 2..7 {
        let s = spin_operators(d).unwrap();
        let sp = (d as f64 - 1.0) / 2.0;
        let cas = s[0].dot(&s[0]) + s[1].dot(&s[1]) + s[2].dot(&s[2]);
        assert!(max_abs(&(cas - linalg::eye(d).mapv(|z| z * sp * (sp + 1.0)))) < 1e-10);
        // S3 diagonal, descending from s
        for i in 0..d {
            assert!((s[2][[i, i]].re - (sp - i as f64)).abs() < 1e-12);
        }
    }
    assert!(spin_operators(1).is_err());
}

#[test]
fn pauli_rep_examples() {
    let r3 = pauli_z2z2_rep(3).unwrap();
    for g in 0..4 {
        for h in 0..4 {
            let (l, res) = r3.obstruction(g, h).unwrap();
            assert!((l - 1.0).norm() < 1e-8 && res < 1e-8);
        }
    }
    let r2 = pauli_z2z2_rep(2).unwrap();
    for j in 1..4 {
        let u = r2.matrix(j);
        assert!(max_abs(&(u.dot(u) + linalg::eye(2))) < 1e-12);
    }
    let (u1, u2, u3) = (r2.matrix(1), r2.matrix(2), r2.matrix(3));
    assert!(max_abs(&(u1.dot(u2) + u2.dot(u1))) < 1e-12);
    // U1 U2 = λ U3 with |λ| = 1, and λ(1,2) = −λ(2,1)
    let (l12, _) = r2.obstruction(1, 2).unwrap();
    let (l21, _) = r2.obstruction(2, 1).unwrap();
    assert!((l12 + l21).norm() < 1e-8);
    assert!(max_abs(&(u1.dot(u2) - u3.mapv(|z| z * l12))) < 1e-12);
}

#[test]
fn rejects_non_projective() {
    let z2 = make_cyclic(2).unwrap();
    let p = sptkit::mps::pauli();
    // σ1 for the generator is fine; a non-unitary matrix is not
    assert!(UnitaryRep::new(z2.clone(), vec![linalg::eye(2), p[0].clone()]).is_ok());
    assert!(UnitaryRep::new(z2.clone(), vec![linalg::eye(2), p[0].mapv(|z| z * 2.0)]).is_err());
    // U(1)² = σ1 σ3 ... not a scalar multiple of U(0)
    let k4 = direct_product(&z2, &z2);
    let bad = vec![linalg::eye(2), p[0].clone(), p[0].clone(), p[2].clone()];
    assert!(UnitaryRep::new(k4, bad).is_err());
}

proptest! {
    #[test]
    fn pauli_reps_are_projective(d in 2usize..8) {
        let r = pauli_z2z2_rep(d).unwrap();
        for g in 0..4 {
            prop_assert!(linalg::unitarity_defect(r.matrix(g)).unwrap() < 1e-10);
            for h in 0..4 {
                let (l, res) = r.obstruction(g, h).unwrap();
                prop_assert!(res <= 1e-8);
                prop_assert!((l.norm() - 1.0).abs() < 1e-10);
                // genuine for odd d
                if d % 2 == 1 {
                    prop_assert!((l - 1.0).norm() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn products_are_groups(a in 1usize..5, b in 1usize..5) {
        let g = direct_product(&make_cyclic(a).unwrap(), &make_cyclic(b).unwrap());
        prop_assert!(assoc_exhaustive(&g));
        prop_assert_eq!(g.exponent(), num_integer_lcm(a, b));
        for x in g.elements() {
            prop_assert_eq!(g.mul(x, g.inv(x)), g.identity());
        }
    }
}

fn num_integer_lcm(a: usize, b: usize) -> usize {
    let gcd = |mut x: usize, mut y: usize| {
        while y != 0 {
            (x, y) = (y, x % y);
        }
        x
    };
    a / gcd(a, b) * b
}
