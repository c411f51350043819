use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mixer_cli::config::{load_config, ConfigError, ExperimentConfig, Init, Kind};
use mixer_cli::run::RunError;

#[derive(Parser)]
#[command(
    name = "mixer",
    version,
    about = "Mean-field random-cluster and Potts dynamics experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Critical temperatures and fixed points at (q, beta).
    Thresholds(RunArgs),
    /// CM saddle-exit probabilities.
    CmExit(RunArgs),
    /// CM runs from the product start until the phase settles.
    CmMix(RunArgs),
    /// Potts Glauber saddle-exit probabilities.
    PottsExit(RunArgs),
    /// Potts Glauber runs until the phase settles.
    PottsMix(RunArgs),
    /// Critical offset of the surrogate chain.
    SurrogateCstar(RunArgs),
    /// Stationarity of the exact kernels at tiny n.
    VerifyExact(RunArgs),
    /// SW runs from the product start until the phase settles.
    SwMix(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    /// A number or "auto-cstar".
    #[arg(long)]
    lambda0: Option<String>,
    /// A number or "auto-cstar".
    #[arg(long)]
    m0: Option<String>,
    /// Start at the saddle plus offset/sqrt(n).
    #[arg(long, allow_hyphen_values = true)]
    offset: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    max_steps: Option<u64>,
    #[arg(long)]
    stride: Option<u64>,
    #[arg(long)]
    target: Option<f64>,
    #[arg(long)]
    cstar_replicas: Option<usize>,
    #[arg(long)]
    good_set_k: Option<f64>,
    #[arg(long)]
    trajectories: Option<bool>,
    #[arg(long)]
    assert_tol: Option<f64>,
    /// Exit with status 3 if the kind's acceptance check fails.
    #[arg(long)]
    assert: bool,
}

impl RunArgs {
    fn overrides(&self) -> Result<ExperimentConfig, ConfigError> {
        Ok(ExperimentConfig {
            kind: None,
            q: self.q,
            beta: self.beta,
            n: self.n,
            lambda0: self.lambda0.as_deref().map(|s| Init::parse("lambda0", s)).transpose()?,
            m0: self.m0.as_deref().map(|s| Init::parse("m0", s)).transpose()?,
            offset: self.offset,
            gamma: self.gamma,
            replicas: self.replicas,
            max_steps: self.max_steps,
            seed: self.seed,
            stride: self.stride,
            target: self.target,
            cstar_replicas: self.cstar_replicas,
            good_set_k: self.good_set_k,
            trajectories: self.trajectories,
            assert_tol: self.assert_tol,
            out: self.out.clone(),
        })
    }

    fn config(&self) -> Result<ExperimentConfig, ConfigError> {
        let base = match &self.config {
            Some(path) => load_config(path)?,
            None => ExperimentConfig::default(),
        };
        Ok(base.merge(self.overrides()?))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Thresholds(a) => (Kind::Thresholds, a),
        Command::CmExit(a) => (Kind::CmExit, a),
        Command::CmMix(a) => (Kind::CmMix, a),
        Command::PottsExit(a) => (Kind::PottsExit, a),
        Command::PottsMix(a) => (Kind::PottsMix, a),
        Command::SurrogateCstar(a) => (Kind::SurrogateCstar, a),
        Command::VerifyExact(a) => (Kind::VerifyExact, a),
        Command::SwMix(a) => (Kind::SwMix, a),
    };
    let result = args
        .config()
        .map_err(RunError::from)
        .and_then(|cfg| mixer_cli::execute(kind, cfg));
    match result {
        Ok(report) => {
            println!("wrote {}", report.manifest.display());
            match report.check {
                Some((ok, detail)) => {
                    println!("check {}: {detail}", if ok { "passed" } else { "failed" });
                    if args.assert && !ok {
                        return ExitCode::from(3);
                    }
                }
                None => println!("check: none for this configuration"),
            }
            ExitCode::SUCCESS
        }
        Err(RunError::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
