use std::sync::Arc;

use conespec::catalog::{random_m_plus, schoen, tensor_example, SchoenParams, TensorParams};
use conespec::cone::{BlackBoxMap, ExtVec, SharedMap};
use conespec::existence::{
    classify, classify_convex, replay_certificate, ClassifyConfig, FastPath, Route, Uniqueness, VerdictKind,
};
use conespec::maps::matrix_map;
use conespec::spectral::solve_eigenvector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn theta(s: f64, t: f64) -> f64 {
    s * t / (s + t)
}

/// Eigenvalue of a homogeneous monotone map on the plane with an interior
/// eigenvector `(τ, 1 − τ)`, by bisection on `g₁/τ − g₂/(1 − τ)`.
fn planar_radius(g: impl Fn(f64, f64) -> (f64, f64)) -> f64 {
    let phi = |t: f64| {
        let (a, b) = g(t, 1.0 - t);
        (a / t - b / (1.0 - t), a / t)
    };
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
    assert!(phi(lo).0 > 0.0 && phi(hi).0 < 0.0, "no interior eigenvector");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid).0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    phi(0.5 * (lo + hi)).1
}

/// The two inequalities from the four-coordinate population model.
fn population_margins(p: &SchoenParams) -> (f64, f64) {
    let [a, b, c, d] = [p.a, p.b, p.c, p.d];
    let g12 = planar_radius(|x1, x2| (a[0] * x1 + b[0] * theta(x1, x2), a[1] * x2 + b[1] * theta(x1, x2)));
    let h34 = planar_radius(|x3, x4| {
        (
            a[2] * x3 + b[2] * theta(x3, x4) + c[2] * x4 + d[2] * x3,
            a[3] * x4 + b[3] * theta(x3, x4) + c[3] * x4 + d[3] * x3,
        )
    });
    let g34 = planar_radius(|x3, x4| (a[2] * x3 + b[2] * theta(x3, x4), a[3] * x4 + b[3] * theta(x3, x4)));
    let h12 = planar_radius(|x1, x2| {
        (
            a[0] * x1 + b[0] * theta(x1, x2) + c[0] * x1 + d[0] * x2,
            a[1] * x2 + b[1] * theta(x1, x2) + c[1] * x1 + d[1] * x2,
        )
    });
    (h34 - g12, h12 - g34)
}

#[test]
fn population_model_matches_two_inequalities() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut yes, mut no) = (0, 0);
    while yes + no < 40 {
        let mut row = |lo: f64, hi: f64| [0; 4].map(|_| rng.gen_range(lo..hi));
        let p = SchoenParams { a: row(0.1, 4.0), b: row(0.1, 3.0), c: row(0.05, 1.0), d: row(0.05, 1.0) };
        if !p.satisfies_assumptions() {
            continue;
        }
        let (m1, m4) = population_margins(&p);
        if m1.abs() < 1e-3 || m4.abs() < 1e-3 {
            continue;
        }
        let want = m1 > 0.0 && m4 > 0.0;
        let f: SharedMap = Arc::new(schoen(&p).unwrap());
        let v = classify(&f, &ClassifyConfig::default()).unwrap();
        if want {
            yes += 1;
            assert_eq!(v.kind, VerdictKind::NonemptyBounded, "{p:?}");
            assert_eq!(v.uniqueness, Uniqueness::Unique);
            assert!(v.eigen.as_ref().unwrap().residual <= 1e-10);
        } else {
            no += 1;
            assert_ne!(v.kind, VerdictKind::NonemptyBounded, "{p:?} margins {m1} {m4}");
        }
    }
    assert!(yes > 0 && no > 0, "{yes} positive and {no} negative cases");
}

#[test]
fn tensor_condition_from_both_routes() {
    let good = TensorParams { a: [1.0, 2.0], b: [0.5, 1.0, 1.5], c: [1.0, 0.2, 0.3], d: [0.4, 0.6, 0.8] };
    let bad = TensorParams { d: [0.4, 0.6, 9.0], ..good };
    for (p, want) in [(good, VerdictKind::NonemptyBounded), (bad, VerdictKind::NoInteriorEigenvector)] {
        let f: SharedMap = Arc::new(tensor_example(&p).unwrap());
        let convex = classify_convex(&f, &ClassifyConfig::default()).unwrap();
        assert_eq!(convex.kind, want);
        let swept = classify(&f, &ClassifyConfig { fast_paths: false, ..ClassifyConfig::default() }).unwrap();
        assert_eq!(swept.kind, want);
    }
}

#[test]
fn sweep_and_convex_theory_agree_on_random_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let sweep_cfg = ClassifyConfig { fast_paths: false, solve: false, ..ClassifyConfig::default() };
    for _ in 0..40 {
        let n = rng.gen_range(2..=4);
        let f: SharedMap = Arc::new(random_m_plus(&mut rng, n, 0.35));
        let a = classify(&f, &sweep_cfg).unwrap();
        let b = classify_convex(&f, &sweep_cfg).unwrap();
        if a.kind != VerdictKind::Indeterminate && b.kind != VerdictKind::Indeterminate {
            assert_eq!(a.kind, b.kind, "{f:?}");
        }
    }
}

#[test]
fn numeric_certificates_replay() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = ClassifyConfig { fast_paths: false, solve: false, ..ClassifyConfig::default() };
    let mut seen = 0;
    for _ in 0..30 {
        let n = rng.gen_range(2..=4);
        let f: SharedMap = Arc::new(random_m_plus(&mut rng, n, 0.35));
        let v = classify(&f, &cfg).unwrap();
        for c in &v.certificates {
            if matches!(c.route, Route::NumericStrict | Route::NumericReverse) {
                seen += 1;
                assert!(replay_certificate(f.as_ref(), c, cfg.solver.tol), "{:?} on {f:?}", c.mask);
            }
        }
    }
    assert!(seen > 0);
}

#[test]
fn positive_verdicts_solve_and_negative_ones_separate() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = ClassifyConfig { fast_paths: false, ..ClassifyConfig::default() };
    for _ in 0..30 {
        let n = rng.gen_range(2..=4);
        let f: SharedMap = Arc::new(random_m_plus(&mut rng, n, 0.35));
        let v = classify(&f, &cfg).unwrap();
        match v.kind {
            VerdictKind::NonemptyBounded => {
                let e = solve_eigenvector(f.as_ref(), &ExtVec::ones(n), &cfg.solver).unwrap();
                assert!(e.residual <= cfg.solver.tol);
            }
            VerdictKind::NoInteriorEigenvector => {
                let c = v.certificates.iter().find(|c| c.route == Route::NumericReverse).expect("reverse certificate");
                let (r, l) = (c.r_bracket.as_ref().unwrap(), c.lambda_bracket.as_ref().unwrap());
                assert!(r.lower > l.upper);
            }
            VerdictKind::Indeterminate => {}
        }
    }
}

#[test]
fn pruning_never_changes_the_kind() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let n = rng.gen_range(3..=5);
        let f: SharedMap = Arc::new(random_m_plus(&mut rng, n, 0.3));
        let base = ClassifyConfig { fast_paths: false, solve: false, ..ClassifyConfig::default() };
        let a = classify(&f, &base).unwrap();
        let b = classify(&f, &ClassifyConfig { prune: false, ..base }).unwrap();
        assert_eq!(a.kind, b.kind);
        assert!(a.work.numeric_subsets <= b.work.numeric_subsets);
    }
}

#[test]
fn black_box_matrix_is_flagged_heuristic() {
    let rows = vec![vec![0.0, 2.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 3.0, 1.0]];
    let exact: SharedMap = Arc::new(matrix_map(&rows).unwrap());
    let kernel_rows = rows.clone();
    let bb: SharedMap = Arc::new(BlackBoxMap::new(3, move |x| {
        kernel_rows.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }));
    let cfg = ClassifyConfig::default();
    let a = classify(&exact, &cfg).unwrap();
    let b = classify(&bb, &cfg).unwrap();
    assert_eq!(a.kind, VerdictKind::NonemptyBounded);
    assert_eq!(b.kind, a.kind);
    assert!(!a.heuristic && b.heuristic);
    assert!(matches!(a.fast_path, Some(FastPath::StronglyConnected)));
}

#[test]
fn dimension_cap_is_reported() {
    let n = 6;
    let rows: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 + i as f64 } else { 0.0 }).collect()).collect();
    let f: SharedMap = Arc::new(matrix_map(&rows).unwrap());
    let cfg = ClassifyConfig { subset_cap: 4, ..ClassifyConfig::default() };
    // The diagonal is multiplicatively convex, so the convex verdict applies above the cap.
    assert_eq!(classify(&f, &cfg).unwrap().kind, VerdictKind::NoInteriorEigenvector);
    let nonconvex: SharedMap = Arc::new(BlackBoxMap::new(n, |x| x.to_vec()));
    assert!(classify(&nonconvex, &cfg).is_err());
}
