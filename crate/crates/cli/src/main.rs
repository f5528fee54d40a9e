use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conespec_cli::{
    cmd_analyze, cmd_game, cmd_graph, cmd_solve, read_input, Format, Method, Outcome, RunConfig, Which,
};

#[derive(Parser)]
#[command(
    name = "conespec",
    version,
    about = "Eigenvectors of order-preserving homogeneous maps on the positive orthant"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the map has an eigenvector in the open cone.
    Analyze {
        /// Map file, or `-` for standard input.
        file: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        #[command(flatten)]
        common: Common,
    },
    /// Compute an eigenvector by normalized iteration.
    Solve {
        file: String,
        /// Start from a random interior point drawn with CONESPEC_SEED.
        #[arg(long)]
        random_start: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Print G(f), H⁻₀(f) or H⁺∞(f) in DOT.
    Graph {
        file: String,
        #[arg(long, value_enum, default_value_t = WhichArg::G)]
        which: WhichArg,
        #[command(flatten)]
        common: Common,
    },
    /// Additive eigenvector and mean payoffs of a stochastic game.
    Game {
        /// Game file in JSON, or `-` for standard input.
        file: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 1e-10, allow_hyphen_values = true)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    /// Largest dimension for the subset sweep.
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    #[arg(long)]
    no_prune: bool,
    /// Worker threads for the classifier.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Human,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Sweep,
    Convex,
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichArg {
    #[value(name = "G")]
    G,
    #[value(name = "Hminus")]
    Hminus,
    #[value(name = "Hplus")]
    Hplus,
}

fn config(c: &Common) -> Result<RunConfig, String> {
    let seed = match std::env::var("CONESPEC_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| format!("CONESPEC_SEED is not an integer: {s}"))?,
        Err(_) => 0,
    };
    Ok(RunConfig {
        tol: c.tol,
        budget: c.budget,
        cap: c.cap,
        format: match c.format {
            FormatArg::Json => Format::Json,
            FormatArg::Human => Format::Human,
        },
        prune: !c.no_prune,
        workers: c.workers,
        seed,
        ..RunConfig::default()
    })
}

fn run(cli: Cli) -> Outcome {
    let (file, common) = match &cli.command {
        Command::Analyze { file, common, .. }
        | Command::Solve { file, common, .. }
        | Command::Graph { file, common, .. }
        | Command::Game { file, common } => (file, common),
    };
    let mut cfg = match config(common) {
        Ok(c) => c,
        Err(e) => return Outcome { exit_code: 1, stdout: String::new(), stderr: format!("error: {e}\n") },
    };
    let text = match read_input(file) {
        Ok(t) => t,
        Err(e) => return Outcome { exit_code: 1, stdout: String::new(), stderr: format!("error: {file}: {e}\n") },
    };
    match cli.command {
        Command::Analyze { method, .. } => {
            cfg.method = match method {
                MethodArg::Auto => Method::Auto,
                MethodArg::Sweep => Method::Sweep,
                MethodArg::Convex => Method::Convex,
            };
            cmd_analyze(&text, &cfg)
        }
        Command::Solve { random_start, .. } => {
            cfg.random_start = random_start;
            cmd_solve(&text, &cfg)
        }
        Command::Graph { which, .. } => {
            let which = match which {
                WhichArg::G => Which::G,
                WhichArg::Hminus => Which::Hminus,
                WhichArg::Hplus => Which::Hplus,
            };
            cmd_graph(&text, which, &cfg)
        }
        Command::Game { .. } => cmd_game(&text, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Exit 2 is reserved for a negative verdict.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let out = run(cli);
    // A closed pipe is not worth a panic.
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.exit_code as u8)
}
