use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use sensorsim::io::{
    duration_rows, parse_activities, parse_anomalies, parse_event_log, parse_matrix,
    parse_timestamp, write_durations, write_event_log, write_matrix,
};
use sensorsim::markov::MarkovError;
use sensorsim::summary::{summarize, write_summary};
use sensorsim::{
    build_matrix_generator, learn_generator, simulate, AnomalySpec, EventLog, Generator, SimConfig,
    TransitionMatrix,
};

/// Synthetic binary-sensor event logs from period-of-day Markov chains.
#[derive(Debug, Parser)]
#[command(name = "sensorsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate from four period matrices and an activities table.
    GenMatrix(GenMatrixArgs),
    /// Learn a generator from a sample log, then simulate from it.
    GenDataset(GenDatasetArgs),
    /// Learn a generator from a sample log and write its matrices and durations.
    Learn(LearnArgs),
    /// Check a matrix file; exits 0 only if it is row-stochastic.
    Validate(ValidateArgs),
    /// Per-sensor statistics of an event log, as CSV on stdout.
    Summarize(SummarizeArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Number of days to generate.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    days: u32,
    /// Start instant, `YYYY-MM-DDTHH:MM:SSZ`.
    #[arg(long, default_value = "1970-01-01T00:00:00Z", value_parser = parse_start)]
    start: u64,
    /// Random seed; drawn from entropy and echoed to stderr when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Anomaly windows CSV (`start,end,kind`).
    #[arg(long)]
    anomalies: Option<PathBuf>,
    /// Output event log.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct GenMatrixArgs {
    #[arg(long)]
    morning: PathBuf,
    #[arg(long)]
    afternoon: PathBuf,
    #[arg(long)]
    evening: PathBuf,
    #[arg(long)]
    night: PathBuf,
    #[arg(long)]
    activities: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct GenDatasetArgs {
    #[arg(long)]
    input: PathBuf,
    /// Hours per period; must divide 24.
    #[arg(long)]
    interval: u32,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct LearnArgs {
    #[arg(long)]
    input: PathBuf,
    /// Hours per period; must divide 24.
    #[arg(long)]
    interval: u32,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    matrix: PathBuf,
}

#[derive(Debug, Args)]
struct SummarizeArgs {
    #[arg(long)]
    input: PathBuf,
}

fn parse_start(s: &str) -> Result<u64, String> {
    parse_timestamp(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::GenMatrix(args) => {
            let generator = matrix_generator(&args)?;
            generate(&generator, &args.run)?;
        }
        Command::GenDataset(args) => {
            let log = read_log(&args.input)?;
            let generator = learn_generator(&log, args.interval)
                .with_context(|| format!("learning from {}", args.input.display()))?;
            generate(&generator, &args.run)?;
        }
        Command::Learn(args) => learn(&args)?,
        Command::Validate(args) => return validate(&args.matrix),
        Command::Summarize(args) => {
            let log = read_log(&args.input)?;
            let stdout = io::stdout();
            write_summary(stdout.lock(), &summarize(&log))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn read_matrix(path: &Path) -> Result<TransitionMatrix> {
    let raw = parse_matrix(open(path)?).with_context(|| format!("reading {}", path.display()))?;
    let states = raw.states().to_vec();
    let rows = raw.rows().to_vec();
    TransitionMatrix::new(states, rows).with_context(|| format!("in {}", path.display()))
}

fn read_log(path: &Path) -> Result<EventLog> {
    parse_event_log(open(path)?).with_context(|| format!("reading {}", path.display()))
}

fn read_anomalies(path: Option<&Path>) -> Result<Vec<AnomalySpec>> {
    match path {
        None => Ok(Vec::new()),
        Some(p) => parse_anomalies(open(p)?).with_context(|| format!("reading {}", p.display())),
    }
}

fn matrix_generator(args: &GenMatrixArgs) -> Result<Generator> {
    let activities = parse_activities(open(&args.activities)?)
        .with_context(|| format!("reading {}", args.activities.display()))?;
    let build = build_matrix_generator(
        read_matrix(&args.morning)?,
        read_matrix(&args.afternoon)?,
        read_matrix(&args.evening)?,
        read_matrix(&args.night)?,
        activities,
    )?;
    for label in &build.dropped {
        eprintln!("warning: activity {label:?} matches no chain state; ignored");
    }
    Ok(build.generator)
}

fn generate(generator: &Generator, run: &RunArgs) -> Result<()> {
    let seed = match run.seed {
        Some(s) => s,
        None => {
            let s = rand::random::<u64>();
            eprintln!("seed: {s}");
            s
        }
    };
    let cfg = SimConfig::new(run.days, seed)
        .with_start(run.start)
        .with_anomalies(read_anomalies(run.anomalies.as_deref())?);
    let log = simulate(generator, &cfg)?;
    let mut out = create(&run.out)?;
    write_event_log(&mut out, &log)?;
    out.flush()?;
    Ok(())
}

fn learn(args: &LearnArgs) -> Result<()> {
    let log = read_log(&args.input)?;
    let generator = learn_generator(&log, args.interval)
        .with_context(|| format!("learning from {}", args.input.display()))?;
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    for (p, chain) in generator.chains().chains().iter().enumerate() {
        let mut out = create(&args.out_dir.join(format!("period_{p}.csv")))?;
        write_matrix(&mut out, chain)?;
        out.flush()?;
    }
    let mut out = create(&args.out_dir.join("durations.csv"))?;
    write_durations(&mut out, &duration_rows(&generator))?;
    out.flush()?;
    Ok(())
}

fn validate(path: &Path) -> Result<ExitCode> {
    let raw = parse_matrix(open(path)?).with_context(|| format!("reading {}", path.display()))?;
    match TransitionMatrix::new(raw.states().to_vec(), raw.rows().to_vec()) {
        Ok(_) => {
            println!("ok");
            Ok(ExitCode::SUCCESS)
        }
        Err(MarkovError::InvalidMatrix(report)) => {
            for v in &report.violations {
                println!("{v}");
            }
            Ok(ExitCode::from(1))
        }
        Err(e) => bail!(e),
    }
}
