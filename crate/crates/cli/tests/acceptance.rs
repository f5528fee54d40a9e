//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! `CONESPEC_SEED` moves the base seed of the property criterion.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use conespec::catalog::{
    game_conjugate_text, game_example, random_m_plus, schoen, tensor_example, GameParams, SchoenParams, TensorParams,
};
use conespec::cone::{
    face_map, hilbert_distance_f64, reciprocal_conjugate, restrict_lower, restrict_upper, ExtVec, Pole, SharedMap,
    Staged, SubsetMask,
};
use conespec::existence::{classify, classify_convex, ClassifyConfig, Route, Uniqueness, VerdictKind};
use conespec::graphs::{digraph_of, scc_decompose, HypergraphProbe};
use conespec::maps::matrix_map;
use conespec::spectral::{
    cw_lower, cw_upper, iterate_normalized, max_ratio, min_ratio, solve_eigenvector, SolverConfig,
};
use conespec::topical::build_shapley;
use conespec_cli::{cmd_analyze, RunConfig};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BAND: f64 = 1e-3;

struct Report {
    ok: bool,
    detail: String,
}

fn report(ok: bool, detail: impl Into<String>) -> Report {
    Report { ok, detail: detail.into() }
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// Root of `g₁(τ,1−τ)/τ − g₂(τ,1−τ)/(1−τ)`, returned as the eigenvalue `g₁/τ`.
fn planar_radius(g: impl Fn(f64, f64) -> (f64, f64)) -> f64 {
    let phi = |t: f64| {
        let (a, b) = g(t, 1.0 - t);
        (a / t - b / (1.0 - t), a / t)
    };
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
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

fn game_condition() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a6d);
    let cfg = RunConfig::default();
    let (mut cases, mut skipped, mut wrong) = (0, 0, Vec::new());
    while cases < 500 {
        let p = GameParams {
            r: [0; 6].map(|_| rng.gen_range(-5.0..=5.0)),
            p1: rng.gen_range(1e-6..1.0 - 1e-6),
            p2: rng.gen_range(1e-6..1.0 - 1e-6),
        };
        let margin = p.r[2].min(p.r[4]) - p.r[0];
        if margin.abs() < BAND {
            skipped += 1;
            continue;
        }
        cases += 1;
        let out = cmd_analyze(&game_conjugate_text(&p), &cfg);
        if (out.exit_code == 0) != (margin > 0.0) {
            wrong.push(format!("r={:?} exit {}", p.r, out.exit_code));
        }
    }
    let detail = format!("{}/{cases} verdicts match r1 < min(r3, r5), {skipped} in band skipped", cases - wrong.len());
    report(wrong.is_empty(), if wrong.is_empty() { detail } else { format!("{detail}; first miss {}", wrong[0]) })
}

fn tensor_condition() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e45);
    let scfg = SolverConfig { tol: 1e-13, budget: 100_000 };
    let (mut cases, mut skipped, mut wrong, mut oracle_gap) = (0, 0, Vec::new(), 0.0f64);
    let mut positives = 0;
    while cases < 200 {
        let mut v = || rng.gen_range(0.05..3.0);
        // d3 ranges wider so both verdicts occur.
        let p = TensorParams {
            a: [v(), v()],
            b: [v(), v(), v()],
            c: [v(), v(), v()],
            d: [v(), v(), rng.gen_range(0.05..12.0)],
        };
        let f: SharedMap = Arc::new(tensor_example(&p).unwrap());
        let block = cw_upper(&face_map(&f, &[0, 1], Pole::Zero).unwrap(), &scfg).unwrap();
        let bisect = planar_radius(|x1, x2| {
            (
                (p.a[0] * x1 * x2 + p.a[1] * x2 * x2).sqrt(),
                (p.b[0] * x1 * x1 + p.b[1] * x1 * x2 + p.b[2] * x2 * x2).sqrt(),
            )
        });
        oracle_gap = oracle_gap.max((block.upper - bisect).abs() / bisect);
        if !(block.lower <= bisect * (1.0 + 1e-9) && bisect <= block.upper * (1.0 + 1e-9)) {
            wrong.push(format!("block bracket [{}, {}] misses bisection {bisect}", block.lower, block.upper));
        }
        let margin = bisect - p.d[2].sqrt();
        if margin.abs() < BAND {
            skipped += 1;
            continue;
        }
        cases += 1;
        positives += usize::from(margin > 0.0);
        let v = classify_convex(&f, &ClassifyConfig { solve: false, ..ClassifyConfig::default() }).unwrap();
        let want = if margin > 0.0 { VerdictKind::NonemptyBounded } else { VerdictKind::NoInteriorEigenvector };
        if v.kind != want {
            wrong.push(format!("{p:?}: {:?}, expected {want:?}", v.kind));
        }
    }
    let detail = format!(
        "{}/{cases} match sign of r(block) - sqrt(d3) ({positives} positive, {skipped} in band), block vs bisection rel gap {oracle_gap:.1e}",
        cases - wrong.len().min(cases)
    );
    report(wrong.is_empty(), if wrong.is_empty() { detail } else { format!("{detail}; {}", wrong[0]) })
}

fn perron_root(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_irreducible(rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| if rng.gen_bool(0.3) { rng.gen_range(0.1..5.0) } else { 0.0 }).collect())
        .collect();
    // A random Hamiltonian cycle makes the pattern strongly connected.
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    for k in 0..n {
        let (i, j) = (order[k], order[(k + 1) % n]);
        if rows[i][j] == 0.0 {
            rows[i][j] = rng.gen_range(0.1..5.0);
        }
    }
    rows
}

fn matrix_oracle() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3a7);
    let cfg = ClassifyConfig { solver: SolverConfig { tol: 1e-12, budget: 100_000 }, ..ClassifyConfig::default() };
    let (mut worst, mut wrong) = (0.0f64, Vec::new());
    for case in 0..200 {
        let n = 2 + case % 7;
        let rows = random_irreducible(&mut rng, n);
        let f: SharedMap = Arc::new(matrix_map(&rows).unwrap());
        let v = classify(&f, &cfg).unwrap();
        if v.kind != VerdictKind::NonemptyBounded || v.uniqueness != Uniqueness::Unique {
            wrong.push(format!("case {case}: {:?} {:?}", v.kind, v.uniqueness));
            continue;
        }
        let e = match solve_eigenvector(f.as_ref(), &ExtVec::ones(n), &cfg.solver) {
            Ok(e) => e,
            Err(err) => {
                wrong.push(format!("case {case}: {err}"));
                continue;
            }
        };
        let rho = perron_root(&rows);
        let gap = (e.eigenvalue - rho).abs() / rho;
        worst = worst.max(gap);
        if gap > 1e-8 {
            wrong.push(format!("case {case}: {} vs {rho}", e.eigenvalue));
        }
    }
    let detail = format!(
        "{}/200 unique positive verdicts matching the dense Perron root, worst rel error {worst:.1e}",
        200 - wrong.len()
    );
    report(wrong.is_empty(), if wrong.is_empty() { detail } else { format!("{detail}; {}", wrong[0]) })
}

fn degenerate_matrices() -> Report {
    let cfg = ClassifyConfig::default();
    let tol = cfg.solver.tol;
    let run = |rows: Vec<Vec<f64>>| classify(&(Arc::new(matrix_map(&rows).unwrap()) as SharedMap), &cfg).unwrap();
    let mut fails = Vec::new();

    let id = run(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    if id.kind != VerdictKind::Indeterminate {
        fails.push(format!("identity gave {:?}", id.kind));
    }

    let jordan = run(vec![vec![1.0, 1.0], vec![0.0, 1.0]]);
    let j1 = SubsetMask::singleton(2, 0);
    let boundary = jordan.certificate(j1).filter(|c| c.route == Route::Boundary).is_some_and(|c| {
        [&c.r_bracket, &c.lambda_bracket]
            .iter()
            .all(|b| b.as_ref().is_some_and(|b| b.lower <= 1.0 + tol && b.upper >= 1.0 - tol))
    });
    if jordan.kind != VerdictKind::Indeterminate || !boundary {
        fails.push(format!("jordan gave {:?} without a boundary certificate at {{1}} around 1", jordan.kind));
    }

    // The reverse inequality sits on the coordinate carrying the eigenvalue 2,
    // which is J = {1} counted from zero.
    let diag = run(vec![vec![1.0, 0.0], vec![0.0, 2.0]]);
    let rev = diag.certificate(SubsetMask::singleton(2, 1)).is_some_and(|c| c.route == Route::NumericReverse);
    if diag.kind != VerdictKind::NoInteriorEigenvector || !rev {
        fails.push(format!("diag(1,2) gave {:?}", diag.kind));
    }
    let detail =
        "identity Indeterminate; Jordan Boundary at {1} with brackets around 1; diag(1,2) reverse at coordinate 2";
    report(fails.is_empty(), if fails.is_empty() { detail.to_string() } else { fails.join("; ") })
}

type Arcs = BTreeSet<(Vec<usize>, usize)>;

fn minimal(f: &SharedMap, pole: Pole) -> Arcs {
    let probe = HypergraphProbe::new(f.clone(), pole).unwrap();
    probe.minimal_hyperarcs(12).into_iter().map(|(t, h)| (t.one_based(), h + 1)).collect()
}

fn arcs(list: &[(&[usize], usize)]) -> Arcs {
    list.iter().map(|(t, h)| (t.to_vec(), *h)).collect()
}

fn sets(list: &[&[usize]]) -> BTreeSet<Vec<usize>> {
    list.iter().map(|s| s.to_vec()).collect()
}

fn invariant(f: &SharedMap, pole: Pole) -> BTreeSet<Vec<usize>> {
    HypergraphProbe::new(f.clone(), pole).unwrap().invariant_sets().into_iter().map(|m| m.one_based()).collect()
}

fn hypergraph_fixtures() -> Report {
    let mut fails = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            fails.push(name.to_string());
        }
    };

    let pop = SchoenParams {
        a: [1.0, 1.5, 0.7, 0.9],
        b: [2.0, 1.0, 0.5, 0.4],
        c: [0.3, 0.6, 0.8, 0.2],
        d: [0.9, 0.1, 0.4, 0.5],
    };
    let f: SharedMap = Arc::new(schoen(&pop).unwrap());
    check("population H-", minimal(&f, Pole::Zero).is_empty());
    check("population H+", minimal(&f, Pole::Inf) == arcs(&[(&[1, 4], 2), (&[1, 4], 3), (&[2, 3], 1), (&[2, 3], 4)]));
    check(
        "population invariant sets",
        invariant(&f, Pole::Inf) == sets(&[&[1], &[2], &[3], &[4], &[1, 2], &[1, 3], &[2, 4], &[3, 4]]),
    );

    let ten = TensorParams { a: [1.0, 2.0], b: [0.5, 1.0, 1.5], c: [1.0, 0.2, 0.3], d: [0.4, 0.6, 0.8] };
    let f: SharedMap = Arc::new(tensor_example(&ten).unwrap());
    check(
        "tensor H+",
        minimal(&f, Pole::Inf) == arcs(&[(&[1], 2), (&[1], 3), (&[1], 4), (&[2], 1), (&[2], 3), (&[3], 4)]),
    );
    check("tensor H+ invariant sets", invariant(&f, Pole::Inf) == sets(&[&[4], &[3, 4]]));
    check("tensor H-", minimal(&f, Pole::Zero) == arcs(&[(&[2], 1), (&[1, 2], 3)]));
    let g = digraph_of(f.as_ref());
    let got: BTreeSet<(usize, usize)> = g.arcs().into_iter().map(|(i, j)| (i + 1, j + 1)).collect();
    let want: BTreeSet<(usize, usize)> =
        [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3), (4, 1), (4, 3), (4, 4)].into_iter().collect();
    check("tensor G(f)", got == want);
    let scc = scc_decompose(&g);
    let finals: Vec<Vec<usize>> =
        scc.final_classes().iter().map(|&c| scc.components[c].iter().map(|i| i + 1).collect()).collect();
    check("tensor final class", finals == vec![vec![1, 2]]);

    let game = GameParams { r: [0.5, -1.0, 2.0, 0.3, 1.5, -0.7], p1: 0.35, p2: 0.6 };
    let t = build_shapley(&game_example(&game)).unwrap();
    let c = t.conjugate().clone();
    check("game H-", minimal(&c, Pole::Zero) == arcs(&[(&[1], 2), (&[1], 3), (&[3], 2)]));
    check("game H+", minimal(&c, Pole::Inf) == arcs(&[(&[2], 1)]));

    let detail = "population, tensor and game hypergraphs, invariant sets, G(f) and final class";
    report(
        fails.is_empty(),
        if fails.is_empty() { detail.to_string() } else { format!("mismatch: {}", fails.join(", ")) },
    )
}

fn f_plus_id_convergence() -> Report {
    let cfg = SolverConfig { tol: 1e-10, budget: 10_000 };
    let perm: SharedMap = Arc::new(matrix_map(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap());
    let x0 = ExtVec::interior(&[1.0, 2.0]).unwrap();
    let plain = iterate_normalized(perm.as_ref(), &x0, 50).unwrap();
    let oscillates = plain.windows(2).all(|w| hilbert_distance_f64(&w[0].to_f64(), &w[1].to_f64()) > 0.5);

    let mut maps = vec![perm];
    let mut rng = ChaCha8Rng::seed_from_u64(0xf1d);
    let ccfg = ClassifyConfig { solve: false, ..ClassifyConfig::default() };
    while maps.len() < 21 {
        let n = rng.gen_range(2..=5);
        let f: SharedMap = Arc::new(random_m_plus(&mut rng, n, 0.4));
        if classify(&f, &ccfg).unwrap().kind == VerdictKind::NonemptyBounded {
            maps.push(f);
        }
    }
    let mut worst = 0.0f64;
    let mut solved = 0;
    for f in &maps {
        let start: Vec<f64> = (0..f.dim()).map(|i| 1.0 + i as f64).collect();
        if let Ok(e) = solve_eigenvector(f.as_ref(), &ExtVec::interior(&start).unwrap(), &cfg) {
            worst = worst.max(e.residual);
            solved += usize::from(e.residual <= 1e-10);
        }
    }
    report(
        oscillates && solved == 21,
        format!("plain iteration on the permutation oscillates: {oscillates}; {solved}/21 solved, worst residual {worst:.1e}"),
    )
}

fn staged(x: &[f64]) -> Vec<Staged> {
    x.iter().map(|&v| Staged::from_f64(v)).collect()
}

/// Overlap within `rel` with both brackets `rel`-tight.
fn agree(a: (f64, f64), b: (f64, f64), rel: f64) -> bool {
    let slack = rel * a.1.abs().max(b.1.abs()).max(1e-12);
    a.0 <= b.1 + slack && b.0 <= a.1 + slack && a.1 - a.0 <= slack && b.1 - b.0 <= slack
}

/// Checks every invariant on one random map; returns the names that failed.
fn property_violations(f: &SharedMap, rng: &mut impl Rng) -> Vec<&'static str> {
    let n = f.dim();
    let cfg = SolverConfig { tol: 1e-12, budget: 20_000 };
    let long = SolverConfig { tol: 1e-12, budget: 400_000 };
    let mut bad = Vec::new();
    let point = |rng: &mut dyn rand::RngCore| -> Vec<f64> { (0..n).map(|_| rng.gen_range(0.1..10.0)).collect() };
    let full = (1u32 << n) - 1;

    for _ in 0..4 {
        let x = point(rng);
        let y = point(rng);
        let fx = f.eval_interior(&x);
        let t = rng.gen_range(0.01..100.0);
        let ftx = f.eval_interior(&x.iter().map(|v| t * v).collect::<Vec<_>>());
        if (0..n).any(|i| !rel_close(ftx[i], t * fx[i], 1e-12)) {
            bad.push("homogeneity");
        }
        let up: Vec<f64> = x.iter().map(|v| v + rng.gen_range(0.0..3.0)).collect();
        let fup = f.eval_interior(&up);
        if (0..n).any(|i| fx[i] > fup[i] * (1.0 + 1e-12)) {
            bad.push("monotonicity");
        }
        let j = SubsetMask::new(n, rng.gen_range(0..=full)).unwrap();
        let xs = staged(&x);
        let lo = restrict_lower(f.clone(), j).unwrap().eval_staged(&xs);
        let hi = restrict_upper(f.clone(), j).unwrap().eval_staged(&xs);
        if (0..n).any(|i| lo[i].to_f64() > fx[i] * (1.0 + 1e-12) || fx[i] > hi[i].to_f64() * (1.0 + 1e-12)) {
            bad.push("sandwich");
        }
        if hilbert_distance_f64(&fx, &f.eval_interior(&y)) > hilbert_distance_f64(&x, &y) + 1e-12 {
            bad.push("hilbert nonexpansive");
        }
        let g = reciprocal_conjugate(f);
        let inv: Vec<f64> = x.iter().map(|v| 1.0 / v).collect();
        let gx = g.eval_interior(&x);
        let finv = f.eval_interior(&inv);
        if (0..n).any(|i| !rel_close(gx[i], 1.0 / finv[i], 1e-12)) {
            bad.push("reciprocal conjugation");
        }
    }

    let r = cw_upper(f, &cfg).unwrap();
    let l = cw_lower(f, &cfg).unwrap();
    let w = ExtVec::interior(&point(rng)).unwrap();
    let sound = r.lower <= max_ratio(f.as_ref(), &w) * (1.0 + 1e-12)
        && l.upper >= min_ratio(f.as_ref(), &w) * (1.0 - 1e-12)
        && l.lower <= r.upper * (1.0 + 1e-12)
        && rel_close(max_ratio(f.as_ref(), &r.witness_upper), r.upper, 1e-12)
        && rel_close(min_ratio(f.as_ref(), &l.witness_lower), l.lower, 1e-12);
    if !sound {
        bad.push("bracket soundness");
    }

    let l_long = cw_lower(f, &long).unwrap();
    let dual = cw_upper(&reciprocal_conjugate(f), &long).unwrap();
    if !agree((l_long.lower, l_long.upper), (1.0 / dual.upper, 1.0 / dual.lower), 1e-6) {
        bad.push("conjugation duality");
    }

    let a = SubsetMask::new(n, rng.gen_range(0..=full)).unwrap();
    let b = a.union(SubsetMask::new(n, rng.gen_range(0..=full)).unwrap());
    let ra = cw_upper(&restrict_lower(f.clone(), a).unwrap(), &cfg).unwrap();
    let rb = cw_upper(&restrict_lower(f.clone(), b).unwrap(), &cfg).unwrap();
    let la = cw_lower(&restrict_upper(f.clone(), a).unwrap(), &cfg).unwrap();
    let lb = cw_lower(&restrict_upper(f.clone(), b).unwrap(), &cfg).unwrap();
    if ra.lower > rb.upper * (1.0 + 1e-9) || la.upper * (1.0 + 1e-9) < lb.lower {
        bad.push("subset monotonicity");
    }

    let scc = scc_decompose(&digraph_of(f.as_ref()));
    let classes: Vec<_> =
        scc.components.iter().map(|c| cw_upper(&face_map(f, c, Pole::Zero).unwrap(), &long).unwrap()).collect();
    let r_long = cw_upper(f, &long).unwrap();
    let max_c = classes.iter().fold((0.0f64, 0.0f64), |acc, b| (acc.0.max(b.lower), acc.1.max(b.upper)));
    let min_f = scc
        .final_classes()
        .iter()
        .map(|&c| &classes[c])
        .fold((f64::INFINITY, f64::INFINITY), |acc, b| (acc.0.min(b.lower), acc.1.min(b.upper)));
    if !agree((r_long.lower, r_long.upper), max_c, 1e-6) || !agree((l_long.lower, l_long.upper), min_f, 1e-6) {
        bad.push("class radius formulas");
    }
    bad
}

fn property_suites() -> Report {
    let base: u64 = std::env::var("CONESPEC_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(1);
    let (mut maps, mut violations) = (0, Vec::new());
    for seed in base..base + 5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..40 {
            let n = rng.gen_range(2..=5);
            let f: SharedMap = Arc::new(random_m_plus(&mut rng, n, 0.4));
            maps += 1;
            for name in property_violations(&f, &mut rng) {
                violations.push(format!("seed {seed}: {name}"));
            }
        }
    }
    let detail = format!("seeds {base}..{}, {maps} maps, {} violations", base + 4, violations.len());
    report(violations.is_empty(), if violations.is_empty() { detail } else { format!("{detail}; {}", violations[0]) })
}

fn sweep_vs_convex() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let cfg = ClassifyConfig { fast_paths: false, solve: false, ..ClassifyConfig::default() };
    let (mut compared, mut disagree) = (0, Vec::new());
    for case in 0..100 {
        let n = rng.gen_range(2..=5);
        let f: SharedMap = Arc::new(random_m_plus(&mut rng, n, 0.35));
        let a = classify(&f, &cfg).unwrap();
        let b = classify_convex(&f, &cfg).unwrap();
        if a.kind != VerdictKind::Indeterminate && b.kind != VerdictKind::Indeterminate {
            compared += 1;
            if a.kind != b.kind {
                disagree.push(format!("case {case}: sweep {:?}, convex {:?}", a.kind, b.kind));
            }
        }
    }
    let detail = format!("{compared}/100 decided by both, {} disagreements", disagree.len());
    report(disagree.is_empty(), if disagree.is_empty() { detail } else { format!("{detail}; {}", disagree[0]) })
}

type Criterion = (&'static str, fn() -> Report);

fn main() {
    let criteria: [Criterion; 8] = [
        ("game condition", game_condition),
        ("tensor condition", tensor_condition),
        ("matrix oracle", matrix_oracle),
        ("degenerate matrices", degenerate_matrices),
        ("hypergraph fixtures", hypergraph_fixtures),
        ("f+id convergence", f_plus_id_convergence),
        ("property suites", property_suites),
        ("sweep vs convex", sweep_vs_convex),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = run();
        let secs = start.elapsed().as_secs_f64();
        failed += usize::from(!r.ok);
        println!("{} {} {name}: {} ({secs:.2} s)", if r.ok { "PASS" } else { "FAIL" }, k + 1, r.detail);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
