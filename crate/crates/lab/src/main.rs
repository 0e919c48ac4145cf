use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hardy_lab::{run, Command, ConfigOverrides, LabError, RunConfig};

/// Numerical checks for Hardy martingale inequalities on the discrete torus.
#[derive(Parser)]
#[command(name = "hardy-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Exact identities: sine-cosine, decomposition, transform isometry, dyadic structure.
    Identities(Flags),
    /// Arithmetic lemma and proposition inequalities.
    Lemmas(Flags),
    /// Every step of the theorem's proof chain.
    Theorem(Flags),
    /// Stochastic search for large theorem ratios.
    ConstantSearch(Flags),
    /// Dyadic coefficient of cos θ across resolutions.
    Convergence(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    n_points: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Iterations per start for constant-search.
    #[arg(long)]
    budget: Option<usize>,
    /// Comma-separated grid sizes for convergence.
    #[arg(long, value_delimiter = ',')]
    resolutions: Option<Vec<usize>>,
    /// JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV table path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON file with defaults for any of the flags above; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn overrides(self) -> Result<ConfigOverrides, LabError> {
        let file = match &self.config {
            Some(path) => ConfigOverrides::from_file(path)?,
            None => ConfigOverrides::default(),
        };
        let flags = ConfigOverrides {
            n_points: self.n_points,
            depth: self.depth,
            max_degree: self.max_degree,
            samples: self.samples,
            seed: self.seed,
            tol: self.tol,
            budget: self.budget,
            resolutions: self.resolutions,
            out: self.out,
            csv: self.csv,
        };
        Ok(flags.over(file))
    }
}

fn execute(command: Command, flags: Flags) -> Result<u8, LabError> {
    let cfg = RunConfig::resolve(command, flags.overrides()?)?;
    let report = run(command, &cfg)?;
    if let Some(path) = &cfg.out {
        report.write_json(path)?;
    }
    if let Some(path) = &cfg.csv {
        report.write_csv(path)?;
    }
    println!("{}", report.summary_line());
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Sub::Identities(f) => (Command::Identities, f),
        Sub::Lemmas(f) => (Command::Lemmas, f),
        Sub::Theorem(f) => (Command::Theorem, f),
        Sub::ConstantSearch(f) => (Command::ConstantSearch, f),
        Sub::Convergence(f) => (Command::Convergence, f),
    };
    match execute(command, flags) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("hardy-lab: {e}");
            ExitCode::from(2)
        }
    }
}
