mod common;

use common::*;
use nonmodular::decomp::*;
use nonmodular::lp::{LpRoute, SolveOptions};
use nonmodular::scalar::convert;
use nonmodular::setfn::{binomial, check_structure, modular_shift, SetFunction, Subset};
use nonmodular::Rational;
use proptest::prelude::*;
use rand::Rng;

fn reversed(n: usize) -> SolveOptions {
    SolveOptions { route: LpRoute::Primal, variable_order: Some((0..n).rev().collect()), ..Default::default() }
}

fn dense_g(d: &Decomposition<f64>) -> Vec<f64> {
    d.g_star.table(16).unwrap()
}

#[test]
fn random_p4_properties_and_uniqueness() {
    let mut r = rng(1);
    for _ in 0..100 {
        let l = random_dense(&mut r, 4);
        let d = decompose(&l).unwrap();
        let rep = verify_decomposition(&d, &l, 16).unwrap();
        assert!(rep.additivity_residual <= 1e-8);
        assert!(rep.g_structure.is_supermodular && rep.g_structure.is_nonnegative && rep.g_structure.is_increasing);
        assert!(rep.f_structure.is_submodular);
        assert!(rep.certificate_optimal && rep.certificate_gap <= 1e-8);
        assert!(rep.objective_excess.abs() <= 1e-8);
        let other = decompose_with(&l, Method::Full, &reversed(15)).unwrap();
        assert!(verify_decomposition(&other, &l, 16).unwrap().passes(1e-8));
        let (a, b) = (d.objective(16).unwrap(), other.objective(16).unwrap());
        assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0));
    }
}

/// Counts instances where two pivot orders return different optimal
/// vertices. The optimum is not always unique: with degenerate exchange
/// constraints active, mass can move between g-values along the optimal face
/// without changing the objective. Rational arithmetic rules out round-off.
#[test]
fn optimal_face_is_not_always_a_point() {
    let mut r = rng(1);
    let mut distinct = 0;
    for _ in 0..100 {
        let l = random_dense(&mut r, 4);
        let exact = SetFunction::dense(
            4,
            l.table(16).unwrap().iter().map(convert::<f64, Rational>).collect(),
        )
        .unwrap();
        let a = decompose(&exact).unwrap();
        let b = decompose_with(&exact, Method::Full, &reversed(15)).unwrap();
        assert!(verify_decomposition(&a, &exact, 16).unwrap().passes(0.0));
        assert!(verify_decomposition(&b, &exact, 16).unwrap().passes(0.0));
        assert_eq!(a.objective(16).unwrap(), b.objective(16).unwrap());
        if a.g_star.table(16).unwrap() != b.g_star.table(16).unwrap() {
            distinct += 1;
        }
    }
    assert_eq!(distinct, 8);
}

#[test]
fn submodular_losses_have_zero_g() {
    let mut r = rng(2);
    for i in 0..20 {
        let p = 2 + i % 4;
        let l = random_submodular(&mut r, p);
        let d = decompose(&l).unwrap();
        assert!(dense_g(&d).iter().all(|v| *v == 0.0), "{:?}", dense_g(&d));
    }
}

#[test]
fn supermodular_losses_match_closed_form() {
    let mut r = rng(3);
    for i in 0..20 {
        let p = 2 + i % 4;
        let l = random_supermodular(&mut r, p);
        let d = decompose(&l).unwrap();
        let closed = supermodular_closed_form(&l, 16).unwrap().table(16).unwrap();
        assert!(max_abs_diff(&dense_g(&d), &closed) <= 1e-8);
    }
}

#[test]
fn symmetric_lp_matches_full_lp() {
    let mut r = rng(4);
    for i in 0..20 {
        let p = 2 + i % 5;
        let mut c: Vec<f64> = (0..=p).map(|_| r.random_range(0.0..2.0)).collect();
        c[0] = 0.0;
        let l = SetFunction::symmetric(c).unwrap();
        let reduced = decompose(&l).unwrap();
        assert_eq!(reduced.method, Method::Symmetric);
        let full = decompose(&l.to_dense(16).unwrap()).unwrap();
        assert!(max_abs_diff(&dense_g(&reduced), &dense_g(&full)) <= 1e-8);
        let excess = verify_decomposition(&reduced, &l, 16).unwrap().objective_excess;
        assert!(excess.abs() <= 1e-8);
    }
}

#[test]
fn fpfn_lp_matches_full_lp() {
    let mut r = rng(5);
    for i in 0..20 {
        let p = 2 + i % 5;
        let m = r.random_range(1..p);
        let positives = {
            let mut idx: Vec<usize> = (0..p).collect();
            for k in (1..p).rev() {
                idx.swap(k, r.random_range(0..=k));
            }
            Subset::from_indices(idx[..m].iter().copied())
        };
        let mut grid: Vec<f64> = (0..(m + 1) * (p - m + 1)).map(|_| r.random_range(0.0..2.0)).collect();
        grid[0] = 0.0;
        let l = SetFunction::fpfn(p, m, positives, grid).unwrap();
        let reduced = decompose(&l).unwrap();
        assert_eq!(reduced.method, Method::Fpfn);
        let full = decompose(&l.to_dense(16).unwrap()).unwrap();
        let (a, b) = (reduced.objective(16).unwrap(), full.objective(16).unwrap());
        assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0));
        assert!(verify_decomposition(&reduced, &l, 16).unwrap().passes(1e-8));
    }
}

#[test]
fn exact_rationals_agree_with_floats() {
    let mut r = rng(6);
    for _ in 0..10 {
        let p = 3;
        let vals: Vec<Rational> = (0..1usize << p)
            .map(|i| if i == 0 { Rational::from_integer(0.into()) } else { Rational::new(r.random_range(0..20).into(), 7.into()) })
            .collect();
        let exact = SetFunction::dense(p, vals.clone()).unwrap();
        let float = SetFunction::dense(p, vals.iter().map(convert::<Rational, f64>).collect()).unwrap();
        let de = decompose(&exact).unwrap();
        let df = decompose(&float).unwrap();
        let rep = verify_decomposition(&de, &exact, 16).unwrap();
        assert!(rep.passes(0.0), "{rep:?}");
        let ge: Vec<f64> = de.g_star.table(16).unwrap().iter().map(convert::<Rational, f64>).collect();
        assert!(max_abs_diff(&ge, &dense_g(&df)) <= 1e-9);
        // Any other pivot order lands on the same exact point.
        let other = decompose_with(&exact, Method::Full, &reversed(7)).unwrap();
        assert_eq!(de.g_star.table(16).unwrap(), other.g_star.table(16).unwrap());
    }
}

#[test]
fn large_symmetric_profiles_stay_certified() {
    for p in [50usize, 100] {
        let c: Vec<f64> = (0..=p).map(|k| ((k as f64) - p as f64 / 3.0).max(0.0) / p as f64).collect();
        let l = SetFunction::symmetric(c.clone()).unwrap();
        let d = decompose(&l).unwrap();
        assert!(d.certificate.duality_gap().abs() <= 1e-8);
        // Optimum: g* has zero first slope and second differences max(0, Δ²c).
        let Some(g) = (match d.g_star.repr() {
            nonmodular::setfn::Repr::Symmetric(g) => Some(g.clone()),
            _ => None,
        }) else {
            panic!("symmetric g*")
        };
        assert!(g[1].abs() <= 1e-9);
        for k in 1..p {
            let want = (c[k + 1] - 2.0 * c[k] + c[k - 1]).max(0.0);
            assert!((g[k + 1] - 2.0 * g[k] + g[k - 1] - want).abs() <= 1e-9);
        }
        assert!(binomial::<f64>(p, p / 2) > 1e13);
    }
}

#[test]
fn modular_shift_yields_increasing_function() {
    let mut r = rng(7);
    for _ in 0..20 {
        let l = random_dense(&mut r, 4).scale(-1.0);
        let shifted = modular_shift(&l, 16).unwrap();
        assert!(check_structure(&shifted, &1e-9, 16).unwrap().is_increasing);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decomposition_invariants_hold(values in prop::collection::vec(0.0f64..1.0, 7)) {
        let mut v = vec![0.0];
        v.extend(values);
        let l = SetFunction::dense(3, v).unwrap();
        let d = decompose(&l).unwrap();
        let rep = verify_decomposition(&d, &l, 16).unwrap();
        prop_assert!(rep.passes(1e-8), "{:?}", rep);
        // g* is the smallest member of its class: shrinking any value breaks feasibility.
        prop_assert!(d.g_star.eval(Subset::EMPTY) == 0.0);
    }

    #[test]
    fn routes_agree(values in prop::collection::vec(0.0f64..1.0, 7)) {
        let mut v = vec![0.0];
        v.extend(values);
        let l = SetFunction::dense(3, v).unwrap();
        let a = decompose_with(&l, Method::Full, &SolveOptions { route: LpRoute::Primal, ..Default::default() }).unwrap();
        let b = decompose_with(&l, Method::Full, &SolveOptions { route: LpRoute::Dual, ..Default::default() }).unwrap();
        prop_assert!(max_abs_diff(&dense_g(&a), &dense_g(&b)) <= 1e-9);
    }
}
