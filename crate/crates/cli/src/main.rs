use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use dcvr_cli::{parse_scenario, run, Command, RunOptions, Scenario};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

/// Reliability analysis and caching/computing optimization for VR delivery
/// over dual-connectivity sub-6 GHz and mmWave networks.
#[derive(Parser, Debug)]
#[command(name = "dcvr", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// Scenario file; omitted keys take their defaults.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Directory for the CSV output.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per estimate.
    #[arg(long)]
    trials: Option<usize>,
    /// Gauss-Laguerre order.
    #[arg(long)]
    quadrature: Option<usize>,
    /// Seconds allowed for each exact solve; the best assignment so far is
    /// reported when it runs out.
    #[arg(long)]
    time_limit: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    /// Closed-form reliabilities and mmWave selection probabilities.
    Analyze,
    /// Monte Carlo estimates with 95% confidence intervals.
    Simulate,
    /// All solvers and baselines on the scenario.
    Solve,
    /// `solve` and `analyze` at every value of the scenario's sweep.
    Sweep,
    /// Closed forms against Monte Carlo; fails above tolerance.
    Validate,
    /// The strategy table.
    Table,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Analyze => Command::Analyze,
            Cmd::Simulate => Command::Simulate,
            Cmd::Solve => Command::Solve,
            Cmd::Sweep => Command::Sweep,
            Cmd::Validate => Command::Validate,
            Cmd::Table => Command::Table,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    if let Ok(n) = std::env::var("DCVR_THREADS") {
        let n: usize = n.parse().context("DCVR_THREADS must be a positive integer")?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let scenario = match &cli.scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_scenario(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => Scenario::default(),
    };
    let scenario = scenario.override_run(cli.seed, cli.trials, cli.quadrature)?;
    let time_limit = match cli.time_limit {
        Some(t) if !(t >= 0.0 && t.is_finite()) => anyhow::bail!("--time-limit must be a non-negative number of seconds"),
        t => t.map(Duration::from_secs_f64),
    };
    let start = Instant::now();
    let report = run(cli.command.into(), &scenario, &RunOptions { out: cli.out.clone(), time_limit })?;
    print!("{}", report.summary);
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    println!("done in {:.2} s", start.elapsed().as_secs_f64());
    if !report.ok {
        eprintln!("error: deviation above tolerance");
    }
    Ok(report.ok)
}
