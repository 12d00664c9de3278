use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use prob_moments::analysis::{analyze, parse_goals, AnalysisOptions};
use prob_moments::emit::{emit, Format};
use prob_moments::frontend::load_program;
use prob_moments::moments::DEFAULT_CLOSURE_CAP;
use prob_moments::symbolic::scalar::parse_rational;
use prob_moments::verifier::{check, simulate, SimConfig, DEFAULT_Z};
use prob_moments::{Error, Rational};

/// Compute closed-form moment invariants of a probabilistic loop.
#[derive(Debug, Parser)]
#[command(name = "prob-moments", version)]
struct Cli {
    /// Program file.
    program: PathBuf,

    /// Goal: a moment order `k` (all variables) or a monomial such as `x^2*y`.
    /// Repeat or separate with commas.
    #[arg(long = "goal", required = true)]
    goals: Vec<String>,

    /// Output format: txt, tex or json.
    #[arg(long, default_value = "txt")]
    format: Format,

    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Cross-check the goal moments by simulation.
    #[arg(long)]
    verify: bool,

    /// Parameter binding for --verify, e.g. `b=2` or `y(0)=1/2`.
    #[arg(long = "param", value_name = "NAME=RATIONAL")]
    params: Vec<String>,

    /// Loop iterations to simulate.
    #[arg(long, default_value_t = 20)]
    iters: u64,

    /// Independent simulation runs.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Largest number of E-variables the closure may contain.
    #[arg(long, default_value_t = DEFAULT_CLOSURE_CAP)]
    max_closure: usize,
}

fn parse_param(text: &str) -> Result<(String, Rational), Error> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| Error::Verify(format!("expected NAME=RATIONAL, got `{text}`")))?;
    let value = parse_rational(value.trim())
        .ok_or_else(|| Error::Verify(format!("`{value}` is not a rational number")))?;
    Ok((name.trim().to_string(), value))
}

/// Returns whether every verification row passed.
fn run(cli: &Cli) -> Result<bool, Error> {
    let source = std::fs::read_to_string(&cli.program)
        .map_err(|e| Error::Io(format!("{}: {e}", cli.program.display())))?;
    let program = load_program(&source)?;
    let goals = parse_goals(&cli.goals, &program)?;
    let name = cli
        .program
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let opts = AnalysisOptions {
        closure_cap: cli.max_closure,
    };
    let mut report = analyze(&name, &program, &goals, &opts)?;

    let mut ok = true;
    if cli.verify {
        let mut cfg = SimConfig::new(cli.iters, cli.trials, cli.seed);
        for p in &cli.params {
            let (k, v) = parse_param(p)?;
            cfg = cfg.bind(&k, v);
        }
        let est = simulate(&program, &cfg, &report.goal_evars)
            .map_err(|e| Error::Verify(e.to_string()))?;
        let v = check(&report.invariants, &est, &cfg, DEFAULT_Z);
        ok = v.all_pass();
        report.verification = Some(v);
    }

    let text = emit(&report, cli.format);
    match &cli.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?
        }
        None => print!("{text}"),
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
