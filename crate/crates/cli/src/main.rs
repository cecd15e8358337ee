use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use streamlearn::evaluation::report::write_report_text;
use streamlearn::generators::{HyperplaneConfig, HyperplaneGenerator, SeaConfig, SeaGenerator};
use streamlearn::io::{write_arff, write_csv};
use streamlearn::stream::InstanceStream;
use streamlearn::Instance;
use streamlearn_cli::bench::{self, Suite};
use streamlearn_cli::config::{parse_seeds, ConfigFile, FileFormat, LearnerKind, RunConfig, StreamSpec};
use streamlearn_cli::{runner, CliError};

#[derive(Parser)]
#[command(name = "streamlearn", version, about = "Run, benchmark and generate data streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prequential evaluation of one learner over one or more seeds.
    Run(RunArgs),
    /// Reproduce one of the benchmark tables.
    Bench(BenchArgs),
    /// Write a synthetic stream to a file.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// `hyper100k`, `sea`, `sea:N`, or a CSV/ARFF file.
    #[arg(long)]
    stream: Option<String>,
    #[arg(long, value_enum)]
    format: Option<FileFormat>,
    /// Target column of a file stream (default: last column).
    #[arg(long)]
    target: Option<String>,
    #[arg(long, value_enum)]
    learner: Option<LearnerKind>,
    /// Number of ensemble members.
    #[arg(long)]
    ensemble: Option<usize>,
    /// `1..10`, `7`, or `1,2,3`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    max_instances: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    minibatch: Option<usize>,
    /// Output directory for report.csv, report.txt and windowed.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML run configuration; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long, default_value = "1..10")]
    seeds: String,
    /// Truncate every run (default: the full preset).
    #[arg(long)]
    max_instances: Option<u64>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Sea,
    Hyper,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    generator: Generator,
    #[arg(long)]
    count: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: FileFormat,
    /// Output file; `-` writes to standard output.
    #[arg(long, default_value = "-")]
    out: PathBuf,
    /// SEA concept function (1-4).
    #[arg(long, default_value_t = 1)]
    function: u8,
    /// Label noise fraction (default: the generator's own).
    #[arg(long)]
    noise: Option<f64>,
}

fn run_config(args: RunArgs) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let source = args
        .stream
        .or(file.stream.source)
        .unwrap_or_else(|| "hyper100k".to_string());
    let stream = StreamSpec::parse(
        &source,
        args.format.or(file.stream.format),
        args.target.or(file.stream.target),
    )?;
    let learner = match (args.learner, &file.learner.name) {
        (Some(l), _) => l,
        (None, Some(name)) => name.parse()?,
        (None, None) => {
            return Err(CliError::Usage(format!(
                "no learner given; pass --learner {{{}}}",
                LearnerKind::names()
            )))
        }
    };
    let mut cfg = RunConfig::new(stream, learner);
    cfg.params = file.learner.params();
    if let Some(n) = args.ensemble.or(file.learner.ensemble_size) {
        cfg.ensemble_size = n;
    }
    cfg.seeds = match (&args.seeds, &file.run.seeds) {
        (Some(s), _) => parse_seeds(s)?,
        (None, Some(s)) => s.resolve()?,
        (None, None) => cfg.seeds,
    };
    if let Some(w) = args.window.or(file.run.window) {
        cfg.window = w;
    }
    cfg.max_instances = args.max_instances.or(file.run.max_instances);
    if let Some(t) = args.threads.or(file.run.threads) {
        cfg.threads = t;
    }
    if let Some(b) = args.minibatch.or(file.run.minibatch) {
        cfg.minibatch = b;
    }
    if let Some(out) = args.out.or(file.run.out) {
        cfg.out = out;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let cfg = run_config(args)?;
    let out = runner::execute(&cfg)?;
    runner::write_reports(&cfg.out, std::slice::from_ref(&out.row))?;
    runner::write_windowed(&cfg.out, &out.runs)?;
    write_report_text(std::slice::from_ref(&out.row), io::stdout().lock())
        .map_err(|e| CliError::Io(e.to_string()))
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let seeds = parse_seeds(&args.seeds)?;
    let out = bench::run_suite(args.suite, &seeds, args.max_instances)?;
    runner::write_reports(&args.out, &out.rows)?;
    write_report_text(&out.rows, io::stdout().lock()).map_err(|e| CliError::Io(e.to_string()))
}

fn generate(args: &GenerateArgs) -> Result<(streamlearn::Schema, Vec<Instance>), CliError> {
    let usage = |e: streamlearn::generators::GeneratorError| CliError::Usage(e.to_string());
    let mut stream: Box<dyn InstanceStream> = match args.generator {
        Generator::Sea => {
            let mut cfg = SeaConfig::new(args.function).seed(args.seed);
            if let Some(n) = args.noise {
                cfg = cfg.noise(n);
            }
            Box::new(SeaGenerator::new(cfg).map_err(usage)?)
        }
        Generator::Hyper => {
            let mut cfg = HyperplaneConfig::default().seed(args.seed);
            if let Some(n) = args.noise {
                cfg.noise_fraction = n;
            }
            Box::new(HyperplaneGenerator::new(cfg).map_err(usage)?)
        }
    };
    let mut instances = Vec::with_capacity(args.count as usize);
    while (instances.len() as u64) < args.count {
        match stream.next_instance() {
            Ok(Some(inst)) => instances.push(inst),
            Ok(None) => break,
            Err(e) => return Err(CliError::Runtime(e.to_string())),
        }
    }
    Ok(((**stream.schema()).clone(), instances))
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    if args.count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    let (schema, instances) = generate(&args)?;
    let io_err = |path: &Path, e: &dyn std::fmt::Display| {
        CliError::Io(format!("cannot write {}: {e}", path.display()))
    };
    let out: Box<dyn Write> = if args.out == Path::new("-") {
        Box::new(io::stdout().lock())
    } else {
        Box::new(File::create(&args.out).map_err(|e| io_err(&args.out, &e))?)
    };
    let mut out = BufWriter::new(out);
    match args.format {
        FileFormat::Csv => write_csv(&schema, &instances, &mut out),
        FileFormat::Arff => write_arff(&schema, &instances, &mut out),
    }
    .map_err(|e| io_err(&args.out, &e))?;
    out.flush().map_err(|e| io_err(&args.out, &e))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
