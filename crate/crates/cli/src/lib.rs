//! Subcommands of the `conespec` binary as plain functions, so tests can
//! drive them without spawning a process.

use std::fmt::Write as _;
use std::io::Read;
use std::sync::Arc;

use conespec::cone::{ExtVec, Pole, SharedMap};
use conespec::dsl::{parse_game, parse_map};
use conespec::existence::{
    classify, classify_convex, verdict_document, ClassifyConfig, FastPath, NumberScale, Verdict, VerdictKind,
};
use conespec::graphs::{digraph_of, digraph_to_dot, hypergraph_to_dot, HypergraphProbe};
use conespec::spectral::{solve_eigenvector, SolverConfig, SpectralError};
use conespec::topical::{additive_cw, build_shapley, check_additive_eigenvector, mean_payoffs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NONE: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;

/// Horizons of the mean-payoff table.
pub const HORIZONS: [usize; 3] = [1 << 6, 1 << 8, 1 << 10];

/// Hypergraphs up to this size are rendered from a scan of every tail.
pub const FULL_SCAN: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Human,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Structural shortcuts first, then the subset sweep.
    Auto,
    Sweep,
    Convex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    G,
    Hminus,
    Hplus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub tol: f64,
    pub budget: usize,
    pub cap: Option<usize>,
    pub format: Format,
    pub prune: bool,
    pub workers: Option<usize>,
    pub method: Method,
    /// Seeds the random start of `solve --random-start`.
    pub seed: u64,
    pub random_start: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tol: 1e-10,
            budget: 10_000,
            cap: None,
            format: Format::Json,
            prune: true,
            workers: None,
            method: Method::Auto,
            seed: 0,
            random_start: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(format!("tolerance must be positive, got {}", self.tol));
        }
        if self.budget == 0 {
            return Err("budget must be at least 1".into());
        }
        if self.workers == Some(0) {
            return Err("workers must be at least 1".into());
        }
        Ok(())
    }

    fn classify_config(&self) -> ClassifyConfig {
        let base = ClassifyConfig::default();
        ClassifyConfig {
            solver: SolverConfig { tol: self.tol, budget: self.budget },
            prune: self.prune,
            fast_paths: self.method == Method::Auto,
            subset_cap: self.cap.unwrap_or(base.subset_cap),
            solve: true,
        }
    }

    /// Runs `job` on a pool of the requested size, or on the global pool.
    fn install<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T, String> {
        match self.workers {
            None => Ok(job()),
            Some(w) => {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(w).build().map_err(|e| e.to_string())?;
                Ok(pool.install(job))
            }
        }
    }
}

/// Result of one subcommand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(exit_code: i32, stdout: String) -> Self {
        Outcome { exit_code, stdout, stderr: String::new() }
    }

    fn error(msg: impl std::fmt::Display) -> Self {
        Outcome { exit_code: EXIT_ERROR, stdout: String::new(), stderr: format!("error: {msg}\n") }
    }
}

pub fn exit_code(kind: VerdictKind) -> i32 {
    match kind {
        VerdictKind::NonemptyBounded => EXIT_OK,
        VerdictKind::NoInteriorEigenvector => EXIT_NONE,
        VerdictKind::Indeterminate => EXIT_INDETERMINATE,
    }
}

/// Reads a file, or standard input when `path` is `-`.
pub fn read_input(path: &str) -> std::io::Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON value serializes") + "\n"
}

fn load_map(text: &str, cfg: &RunConfig) -> Result<SharedMap, String> {
    cfg.validate()?;
    Ok(Arc::new(parse_map(text).map_err(|e| e.to_string())?))
}

fn fmt_f(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.12}")
    }
}

/// `offset` switches brackets to additive units of a game with that payoff shift.
fn human_verdict(v: &Verdict, offset: Option<f64>) -> String {
    let mut s = format!("verdict: {:?}\n", v.kind);
    if let Some(p) = &v.fast_path {
        let rule = match p {
            FastPath::OneDimensional => "one-dimensional",
            FastPath::StronglyConnected => "G(f) strongly connected",
            FastPath::UniqueFinalClass { .. } => "unique dominant final class",
            FastPath::Convex(_) => "convex class radii",
        };
        let _ = writeln!(s, "decided by: {rule}");
    }
    for c in &v.certificates {
        let _ = write!(s, "  J = {:<12} {}", c.mask.to_string(), c.route.name());
        if let (Some(r), Some(l)) = (&c.r_bracket, &c.lambda_bracket) {
            let conv = |x: f64| offset.map_or(x, |o| x.ln() + o);
            let _ = write!(
                s,
                "  r in [{}, {}]  lambda in [{}, {}]",
                fmt_f(conv(r.lower)),
                fmt_f(conv(r.upper)),
                fmt_f(conv(l.lower)),
                fmt_f(conv(l.upper))
            );
        }
        s.push('\n');
    }
    if let (Some(e), None) = (&v.eigen, offset) {
        let _ = writeln!(
            s,
            "eigenvalue: {}  residual: {:.3e}  iterations: {}",
            fmt_f(e.eigenvalue),
            e.residual,
            e.iterations
        );
    }
    if let Some(e) = &v.eigen_error {
        let _ = writeln!(s, "solver: {e}");
    }
    let _ = writeln!(s, "uniqueness: {:?}  convergence: {:?}", v.uniqueness, v.convergence);
    if v.heuristic {
        s.push_str("note: boundary values were estimated by probing\n");
    }
    s
}

/// `analyze`: classify the map and print the verdict document.
pub fn cmd_analyze(text: &str, cfg: &RunConfig) -> Outcome {
    let f = match load_map(text, cfg) {
        Ok(f) => f,
        Err(e) => return Outcome::error(e),
    };
    let ccfg = cfg.classify_config();
    let run = cfg.install(|| match cfg.method {
        Method::Convex => classify_convex(&f, &ccfg),
        _ => classify(&f, &ccfg),
    });
    let v = match run {
        Ok(Ok(v)) => v,
        Ok(Err(e)) => return Outcome::error(e),
        Err(e) => return Outcome::error(e),
    };
    let out = match cfg.format {
        Format::Json => pretty(&verdict_document(&v, NumberScale::Multiplicative)),
        Format::Human => human_verdict(&v, None),
    };
    Outcome::ok(exit_code(v.kind), out)
}

/// `solve`: run the eigenvector solver from `1` or from a seeded start.
pub fn cmd_solve(text: &str, cfg: &RunConfig) -> Outcome {
    let f = match load_map(text, cfg) {
        Ok(f) => f,
        Err(e) => return Outcome::error(e),
    };
    let n = f.dim();
    let x0 = if cfg.random_start {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        ExtVec::interior(&v).expect("positive start")
    } else {
        ExtVec::ones(n)
    };
    let scfg = SolverConfig { tol: cfg.tol, budget: cfg.budget };
    match solve_eigenvector(f.as_ref(), &x0, &scfg) {
        Ok(e) => {
            let out = match cfg.format {
                Format::Json => pretty(&json!({
                    "format": 1,
                    "eigenvalue": e.eigenvalue,
                    "vector": e.vector.to_f64(),
                    "residual": e.residual,
                    "iterations": e.iterations,
                })),
                Format::Human => {
                    let v: Vec<String> = e.vector.to_f64().iter().map(|x| fmt_f(*x)).collect();
                    format!(
                        "eigenvalue: {}\nvector: [{}]\nresidual: {:.3e}\niterations: {}\n",
                        fmt_f(e.eigenvalue),
                        v.join(", "),
                        e.residual,
                        e.iterations
                    )
                }
            };
            Outcome::ok(EXIT_OK, out)
        }
        Err(SpectralError::Nonconverged(b)) => {
            let doc = json!({ "format": 1, "error": "nonconverged", "lower": b.lower, "upper": b.upper, "iterations": b.iterations });
            Outcome {
                exit_code: EXIT_INDETERMINATE,
                stdout: pretty(&doc),
                stderr: format!("error: no convergence within {} iterations\n", cfg.budget),
            }
        }
        Err(SpectralError::SupportCollapse { support }) => {
            let support: Vec<usize> = support.iter().map(|i| i + 1).collect();
            let doc = json!({ "format": 1, "error": "support_collapse", "support": support });
            Outcome {
                exit_code: EXIT_INDETERMINATE,
                stdout: pretty(&doc),
                stderr: "error: iterates left the open cone\n".into(),
            }
        }
        Err(e) => Outcome::error(e),
    }
}

/// `graph`: DOT text for `G(f)`, `H⁻₀(f)` or `H⁺∞(f)`.
pub fn cmd_graph(text: &str, which: Which, cfg: &RunConfig) -> Outcome {
    let f = match load_map(text, cfg) {
        Ok(f) => f,
        Err(e) => return Outcome::error(e),
    };
    let n = f.dim();
    let (pole, name) = match which {
        Which::G => return Outcome::ok(EXIT_OK, digraph_to_dot(&digraph_of(f.as_ref()), "G")),
        Which::Hminus => (Pole::Zero, "Hminus"),
        Which::Hplus => (Pole::Inf, "Hplus"),
    };
    let probe = match HypergraphProbe::new(f, pole) {
        Ok(p) => p,
        Err(e) => return Outcome::error(e),
    };
    // TODO: persist masks probed by `analyze` so large-n scans can reuse them across runs.
    let arcs = probe.minimal_hyperarcs(FULL_SCAN);
    let mut comment = if n <= FULL_SCAN {
        "minimal hyperarcs from a scan of every tail".to_string()
    } else {
        "partial: only singleton tails and complements of singletons were scanned".to_string()
    };
    if probe.is_heuristic() {
        comment.push_str("; boundary values estimated by probing");
    }
    Outcome::ok(EXIT_OK, hypergraph_to_dot(n, &arcs, name, Some(&comment)))
}

/// `game`: additive verdict and mean payoffs `T^k(0)/k`.
pub fn cmd_game(text: &str, cfg: &RunConfig) -> Outcome {
    if let Err(e) = cfg.validate() {
        return Outcome::error(e);
    }
    let game = match parse_game(text) {
        Ok(g) => g,
        Err(e) => return Outcome::error(e),
    };
    let t = match build_shapley(&game) {
        Ok(t) => t,
        Err(e) => return Outcome::error(e),
    };
    let ccfg = cfg.classify_config();
    let av = match cfg.install(|| check_additive_eigenvector(&t, &ccfg)) {
        Ok(Ok(v)) => v,
        Ok(Err(e)) => return Outcome::error(e),
        Err(e) => return Outcome::error(e),
    };
    let cw = match additive_cw(&t, &ccfg.solver) {
        Ok(cw) => cw,
        Err(e) => return Outcome::error(e),
    };
    let table: Vec<(usize, Vec<f64>)> = HORIZONS.iter().map(|&k| (k, mean_payoffs(&t, k))).collect();
    let out = match cfg.format {
        Format::Json => {
            let mut doc = av.document();
            doc["eigenvalue_bracket"] = json!({ "r": [cw[0], cw[1]], "lambda": [cw[2], cw[3]] });
            doc["additive_eigenvalue"] = av.eigenvalue.map_or(Value::Null, Value::from);
            doc["additive_eigenvector"] = av.eigenvector.clone().map_or(Value::Null, Value::from);
            doc["mean_payoff"] = table.iter().map(|(k, v)| json!({ "horizon": k, "values": v })).collect();
            pretty(&doc)
        }
        Format::Human => {
            let mut s = human_verdict(&av.verdict, Some(av.shift));
            if let Some(l) = av.eigenvalue {
                let _ = writeln!(s, "additive eigenvalue: {}", fmt_f(l));
            }
            let _ = writeln!(
                s,
                "r(T) in [{}, {}]  lambda(T) in [{}, {}]",
                fmt_f(cw[0]),
                fmt_f(cw[1]),
                fmt_f(cw[2]),
                fmt_f(cw[3])
            );
            s.push_str("horizon  mean payoff per state\n");
            for (k, v) in &table {
                let cells: Vec<String> = v.iter().map(|x| format!("{x:>12.6}")).collect();
                let _ = writeln!(s, "{k:>7}  {}", cells.join(" "));
            }
            s
        }
    };
    Outcome::ok(exit_code(av.verdict.kind), out)
}
