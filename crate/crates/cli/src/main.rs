use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dyndist_cli::problem::parse_seed;
use dyndist_cli::{run, CliError, Problem};

#[derive(Parser)]
#[command(name = "dyndist", version, about = "Shaped deltas, dynamic functions and impulsive systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pair a distribution with a test function: DISTRIBUTION TESTFN
    Pair(Opts),
    /// Multiply a distribution by a dynamic function: FUNCTION DISTRIBUTION
    Product(Opts),
    /// Distributional derivative of a dynamic function: FUNCTION
    Derivative(Opts),
    /// Product-rule residual on the test battery: F G
    Leibniz(Opts),
    /// Solve the impulsive system
    Solve(Opts),
    /// Endpoint error of delta-sequence regularizations
    Regularize(Opts),
    /// Commutation check for the columns of the impulse gain
    Frobenius(Opts),
    /// Jump endpoints for the shape vectors of the sweep
    SweepShapes(Opts),
    /// Run the command declared in the problem file
    Run(Opts),
}

#[derive(clap::Args)]
struct Opts {
    /// Problem file
    #[arg(long)]
    problem: PathBuf,
    /// Write the result table as CSV
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the step count
    #[arg(long)]
    steps: Option<usize>,
    /// Override the battery seed (hex)
    #[arg(long, value_parser = seed_arg)]
    seed: Option<u64>,
    /// Object names, defaulting to those of the declared command
    names: Vec<String>,
}

fn seed_arg(s: &str) -> Result<u64, String> {
    parse_seed(s).ok_or_else(|| format!("'{s}' is not a hex seed"))
}

fn execute(name: Option<&str>, opts: Opts) -> Result<String, CliError> {
    let mut problem = Problem::load(&opts.problem)?;
    if let Some(steps) = opts.steps {
        if steps == 0 {
            return Err(CliError::Usage("--steps must be positive".into()));
        }
        problem.steps = steps;
    }
    if let Some(seed) = opts.seed {
        problem.seed = seed;
    }
    let declared = problem.command.clone();
    let command = match (name, &declared) {
        (Some(n), _) => n.to_string(),
        (None, Some((n, _))) => n.clone(),
        (None, None) => return Err(CliError::Usage("problem file declares no command".into())),
    };
    let args = match &declared {
        Some((n, a)) if opts.names.is_empty() && *n == command => a.clone(),
        _ => opts.names,
    };
    let table = run(&problem, &command, &args)?;
    if let Some(out) = &opts.out {
        std::fs::write(out, table.to_csv()).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    }
    Ok(table.to_text())
}

fn configure_threads() {
    if let Some(n) = std::env::var("DYNDIST_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second initialization can only fail if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let (name, opts) = match cli.command {
        Command::Pair(o) => (Some("pair"), o),
        Command::Product(o) => (Some("product"), o),
        Command::Derivative(o) => (Some("derivative"), o),
        Command::Leibniz(o) => (Some("leibniz"), o),
        Command::Solve(o) => (Some("solve"), o),
        Command::Regularize(o) => (Some("regularize"), o),
        Command::Frobenius(o) => (Some("frobenius"), o),
        Command::SweepShapes(o) => (Some("sweep-shapes"), o),
        Command::Run(o) => (None, o),
    };
    match execute(name, opts) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
