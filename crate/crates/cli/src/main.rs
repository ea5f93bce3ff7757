use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use quditlearn::experiments::{
    learn_once, run_experiment, sweep, to_text, write_csv, ExperimentConfig, NoiseKind,
    PartialConfig, Problem, RunOutput, SweepEntry, SweepFile,
};
use quditlearn::learners::{format_vector, Engine};
use quditlearn::verify::{run_checks, VerifyOptions};

const SEED_ENV: &str = "QUDITLEARN_SEED";

#[derive(Parser)]
#[command(
    name = "quditlearn",
    version,
    about = "Simulate quantum-sample learners for LWE and its relatives"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one learner once and print what it returns.
    Learn(Params),
    /// Run repeated trials and print a report.
    Experiment(Params),
    /// Run every `[[run]]` table of a config file.
    Sweep(Params),
    /// Run the built-in invariant suite.
    Verify(VerifyArgs),
}

#[derive(Args, Default)]
struct Params {
    #[arg(long)]
    problem: Option<Problem>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    /// Subset size |V| (lwe).
    #[arg(long)]
    v: Option<u64>,
    /// Noise magnitude bound; SIS coefficient bound.
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Rounding modulus (lwr).
    #[arg(long)]
    p: Option<u64>,
    /// Cyclotomic conductor (ring-global).
    #[arg(long)]
    m: Option<u64>,
    /// none, uniform, gaussian, bernoulli, global-uniform, global-gaussian, global-bernoulli.
    #[arg(long)]
    noise: Option<NoiseKind>,
    /// dense or analytic.
    #[arg(long)]
    engine: Option<Engine>,
    #[arg(long)]
    trials: Option<u64>,
    /// Repetitions (Field-BV iterations, LPN trials, SIS rounds).
    #[arg(long = "L")]
    repetitions: Option<usize>,
    /// Test Candidate samples.
    #[arg(long = "M")]
    test_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed secret as comma-separated residues.
    #[arg(long, value_delimiter = ',')]
    secret: Option<Vec<u64>>,
    /// TOML file with default values for these flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the CSV report here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl Params {
    fn flags(&self) -> PartialConfig {
        PartialConfig {
            problem: self.problem,
            q: self.q,
            n: self.n,
            v: self.v,
            k: self.k,
            sigma: self.sigma,
            eta: self.eta,
            p: self.p,
            m: self.m,
            noise: self.noise,
            engine: self.engine,
            trials: self.trials,
            repetitions: self.repetitions,
            test_samples: self.test_samples,
            seed: self.seed,
            secret: self.secret.clone(),
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Skip dense instances with q^{n+1} above this.
    #[arg(long, default_value_t = 4096)]
    max_qn: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

fn runtime(message: impl ToString) -> Failure {
    Failure {
        code: 1,
        message: message.to_string(),
    }
}

fn env_seed() -> Result<PartialConfig, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(text) => {
            let seed = text.trim().parse().map_err(|_| {
                usage(format!(
                    "{SEED_ENV}={text} is not a 64-bit unsigned integer"
                ))
            })?;
            Ok(PartialConfig {
                seed: Some(seed),
                ..Default::default()
            })
        }
        Err(_) => Ok(PartialConfig::default()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

/// Defaults < environment < config file < flags.
fn layered(params: &Params) -> Result<PartialConfig, Failure> {
    let mut partial = env_seed()?;
    if let Some(path) = &params.config {
        let file = PartialConfig::from_toml(&read(path)?).map_err(usage)?;
        partial = partial.overlay(&file);
    }
    Ok(partial.overlay(&params.flags()))
}

fn write_csv_file(path: &Path, entries: &[SweepEntry]) -> Result<(), Failure> {
    let file = fs::File::create(path)
        .map_err(|e| runtime(format!("cannot create {}: {e}", path.display())))?;
    write_csv(entries, file).map_err(runtime)
}

fn learn(params: &Params) -> Result<u8, Failure> {
    let config = ExperimentConfig::resolve(&layered(params)?).map_err(usage)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let run = learn_once(&config, &mut rng).map_err(runtime)?;
    let name = if config.problem == Problem::Sis {
        "v"
    } else {
        "s"
    };
    match run.output {
        RunOutput::Recovered(x) => {
            println!("{name} = {}", format_vector(&x));
            Ok(0)
        }
        RunOutput::Bot => {
            println!("BOT");
            Ok(1)
        }
        RunOutput::Failed { coordinate } => {
            println!("FAIL");
            eprintln!("no candidate survived for coordinate {coordinate}");
            Ok(1)
        }
    }
}

fn experiment(params: &Params) -> Result<u8, Failure> {
    let config = ExperimentConfig::resolve(&layered(params)?).map_err(usage)?;
    let report = run_experiment(&config).map_err(runtime)?;
    let entries = [SweepEntry::Done(report)];
    print!("{}", to_text(&entries).map_err(runtime)?);
    if let Some(path) = &params.csv {
        write_csv_file(path, &entries)?;
    }
    Ok(0)
}

/// Defaults < environment < file top level < flags < each `[[run]]` table.
fn sweep_command(params: &Params) -> Result<u8, Failure> {
    let path = params
        .config
        .as_ref()
        .ok_or_else(|| usage("sweep needs --config <file> with [[run]] tables"))?;
    let file = SweepFile::from_toml(&read(path)?).map_err(usage)?;
    let base = env_seed()?.overlay(&file.base).overlay(&params.flags());
    let runs: Vec<PartialConfig> = if file.run.is_empty() {
        vec![base]
    } else {
        file.run
            .iter()
            .map(|run| base.clone().overlay(run))
            .collect()
    };
    let entries = sweep(&runs);
    print!("{}", to_text(&entries).map_err(runtime)?);
    if let Some(path) = &params.csv {
        write_csv_file(path, &entries)?;
    }
    let failed: Vec<_> = entries
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.error().map(|m| (i, m)))
        .collect();
    for (i, message) in &failed {
        eprintln!("run {}: {message}", i + 1);
    }
    Ok(u8::from(!failed.is_empty()))
}

fn verify(args: &VerifyArgs) -> Result<u8, Failure> {
    let mut options = VerifyOptions {
        max_qn: args.max_qn,
        inject_fault: args.inject_fault,
        ..Default::default()
    };
    if let Some(seed) = args.seed.or(env_seed()?.seed) {
        options.seed = seed;
    }
    let results = run_checks(&options);
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    println!("{:<width$}  {:>6}  result", "check", "cases");
    for r in &results {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        println!("{:<width$}  {:>6}  {status}", r.name, r.cases);
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.passed()).collect();
    for r in &failed {
        eprintln!("{} failed: {}", r.name, r.failure.as_deref().unwrap_or(""));
    }
    Ok(u8::from(!failed.is_empty()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Learn(p) => learn(p),
        Command::Experiment(p) => experiment(p),
        Command::Sweep(p) => sweep_command(p),
        Command::Verify(args) => verify(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
