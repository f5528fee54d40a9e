use std::fs;
use std::path::PathBuf;

use conespec::catalog::{
    game_conjugate_text, game_example, schoen, schoen_text, tensor_example, tensor_text, GameParams, SchoenParams,
    TensorParams,
};
use conespec::cone::ConeMap;
use conespec::dsl::{parse_game, parse_map, parse_map_document, serialize_document, serialize_game, DslError};
use conespec::topical::{build_shapley, Player};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corpus() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut out: Vec<(String, String)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "conemap"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

#[test]
fn corpus_round_trips() {
    let docs = corpus();
    assert!(docs.len() >= 20, "corpus has {} documents", docs.len());
    for (name, text) in docs {
        let a = parse_map_document(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let canon = serialize_document(&a);
        let b = parse_map_document(&canon).unwrap_or_else(|e| panic!("{name} canonical form: {e}\n{canon}"));
        assert_eq!(a, b, "{name}");
        assert_eq!(canon, serialize_document(&b), "{name}");
        a.to_map().unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn generated_catalog_texts_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let p = random_tensor(&mut rng);
        let a = parse_map_document(&tensor_text(&p)).unwrap();
        assert_eq!(parse_map_document(&serialize_document(&a)).unwrap(), a);
    }
}

fn random_schoen(rng: &mut impl Rng) -> SchoenParams {
    loop {
        let mut row = || [0; 4].map(|_| rng.gen_range(0.05..3.0));
        let p = SchoenParams { a: row(), b: row(), c: row(), d: row() };
        if p.satisfies_assumptions() {
            return p;
        }
    }
}

fn random_tensor(rng: &mut impl Rng) -> TensorParams {
    let mut v = || rng.gen_range(0.05..3.0);
    TensorParams { a: [v(), v()], b: [v(), v(), v()], c: [v(), v(), v()], d: [v(), v(), v()] }
}

fn random_game(rng: &mut impl Rng) -> GameParams {
    GameParams {
        r: [0; 6].map(|_| rng.gen_range(-5.0..5.0)),
        p1: rng.gen_range(0.01..0.99),
        p2: rng.gen_range(0.01..0.99),
    }
}

#[test]
fn parsed_population_model_matches_constructor() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let p = random_schoen(&mut rng);
    let parsed = parse_map(&schoen_text(&p)).unwrap();
    let built = schoen(&p).unwrap();
    for _ in 0..1000 {
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(0.01..100.0)).collect();
        let (a, b) = (parsed.eval_interior(&x), built.eval_interior(&x));
        for i in 0..4 {
            assert!(rel_close(a[i], b[i], 1e-12), "{} vs {}", a[i], b[i]);
        }
    }
}

#[test]
fn parsed_tensor_matches_raw_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    let p = random_tensor(&mut rng);
    let parsed = parse_map(&tensor_text(&p)).unwrap();
    let built = tensor_example(&p).unwrap();
    for _ in 0..1000 {
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(0.01..100.0)).collect();
        let raw = [
            (p.a[0] * x[0] * x[1] + p.a[1] * x[1] * x[1]).sqrt(),
            (p.b[0] * x[0] * x[0] + p.b[1] * x[0] * x[1] + p.b[2] * x[1] * x[1]).sqrt(),
            (p.c[0] * x[0] * x[0] + p.c[1] * x[0] * x[1] + p.c[2] * x[1] * x[2]).sqrt(),
            (p.d[0] * x[0] * x[3] + p.d[1] * x[2] * x[2] + p.d[2] * x[3] * x[3]).sqrt(),
        ];
        let (a, b) = (parsed.eval_interior(&x), built.eval_interior(&x));
        for i in 0..4 {
            assert!(rel_close(a[i], raw[i], 1e-12), "row {i}: {} vs {}", a[i], raw[i]);
            assert!(rel_close(b[i], raw[i], 1e-12), "row {i}: {} vs {}", b[i], raw[i]);
        }
    }
}

#[test]
fn parsed_game_conjugate_matches_shapley_operator() {
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    let p = random_game(&mut rng);
    let parsed = parse_map(&game_conjugate_text(&p)).unwrap();
    let t = build_shapley(&game_example(&p)).unwrap();
    for _ in 0..1000 {
        let l: Vec<f64> = (0..3).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let x: Vec<f64> = l.iter().map(|v| v.exp()).collect();
        let a = parsed.eval_interior(&x);
        let b: Vec<f64> = t.eval(&l).iter().map(|v| v.exp()).collect();
        for i in 0..3 {
            assert!(rel_close(a[i], b[i], 1e-12), "{} vs {}", a[i], b[i]);
        }
    }
}

#[test]
fn game_file_has_board_structure() {
    let p = GameParams { r: [0.0, 1.0, 2.0, 3.0, 4.0, 5.0], p1: 0.25, p2: 0.5 };
    let text = serialize_game(&game_example(&p));
    let g = parse_game(&text).unwrap();
    let players: Vec<Player> = g.states.iter().map(|s| s.player).collect();
    assert_eq!(players, vec![Player::Max, Player::Min, Player::Min]);
    assert!(g.states.iter().all(|s| s.actions.len() == 2));
    assert_eq!(g.states[0].actions[1].transition, vec![0.25, 0.75, 0.0]);
    assert_eq!(g.states[1].actions[1].transition, vec![0.5, 0.0, 0.5]);
    assert_eq!(g.states[2].actions[1].transition, vec![1.0, 0.0, 0.0]);
}

fn semantic_message(text: &str) -> String {
    match parse_map_document(text) {
        Err(DslError::Semantic { message, .. }) => message,
        other => panic!("expected a semantic error, got {other:?}"),
    }
}

#[test]
fn semantic_errors() {
    assert!(semantic_message("format: 1\ndim: 2\nf1 = x1 + x3\nf2 = x2\n").contains("x3"));
    assert!(semantic_message("format: 1\ndim: 1\nf1 = k*x1\n").contains("k"));
    assert!(semantic_message("format: 1\ndim: 2\nf1 = mean(1, (0.5, 0.4), x1, x2)\nf2 = x2\n").contains("weights"));
    assert!(semantic_message("format: 1\ndim: 2\nf1 = x1^0.5*x2^0.6\nf2 = x2\n").contains("inhomogeneous"));
}
