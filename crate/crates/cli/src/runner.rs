//! Executes a [`RunConfig`] and writes its reports.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use streamlearn::evaluation::report::{self, ReportRow};
use streamlearn::evaluation::{prequential_run, EvalError, PrequentialOptions, PrequentialResult};
use streamlearn::generators::{hyper100k, SeaConfig, SeaGenerator, HYPER100K_LEN};
use streamlearn::io::{ArffSource, ColumnRef, CsvOptions, CsvSource};
use streamlearn::learners::{
    ArfConfig, Ensemble, HoeffdingTree, HtConfig, LeafPrediction, OnlineBagging, SrpConfig,
};
use streamlearn::parallel::{minibatch_prequential_run, ParallelConfig, ParallelError};
use streamlearn::stream::{InstanceStream, StreamError};
use streamlearn::Schema;

use crate::config::{FileFormat, LearnerKind, RunConfig, StreamSpec, TreeOverrides};
use crate::CliError;

fn stream_error(spec: &StreamSpec, e: StreamError) -> CliError {
    CliError::Io(format!("cannot read stream {}: {e}", spec.label()))
}

pub fn open_stream(spec: &StreamSpec, seed: u64) -> Result<Box<dyn InstanceStream>, CliError> {
    Ok(match spec {
        StreamSpec::Hyper100k => Box::new(hyper100k(seed)),
        StreamSpec::Sea { function, noise } => Box::new(
            SeaGenerator::new(SeaConfig::new(*function).noise(*noise).seed(seed))
                .map_err(|e| CliError::Usage(e.to_string()))?,
        ),
        StreamSpec::File {
            path,
            format,
            target,
        } => match format {
            FileFormat::Csv => {
                let mut opts = CsvOptions::default();
                if let Some(t) = target {
                    opts = opts.target(ColumnRef::Name(t.clone()));
                }
                Box::new(CsvSource::open(path, &opts).map_err(|e| stream_error(spec, e))?)
            }
            FileFormat::Arff => Box::new(
                ArffSource::open(path, target.as_deref()).map_err(|e| stream_error(spec, e))?,
            ),
        },
    })
}

/// Instances per run when none is configured: generators are endless.
pub fn default_limit(spec: &StreamSpec) -> Option<u64> {
    match spec {
        StreamSpec::Hyper100k | StreamSpec::Sea { .. } => Some(HYPER100K_LEN),
        StreamSpec::File { .. } => None,
    }
}

pub fn tree_config(params: &TreeOverrides) -> Result<HtConfig, CliError> {
    let mut cfg = HtConfig::default();
    if let Some(g) = params.grace_period {
        cfg.grace_period = g;
    }
    if let Some(d) = params.split_confidence {
        cfg.split_confidence = d;
    }
    if let Some(t) = params.tie_threshold {
        cfg.tie_threshold = t;
    }
    if let Some(lp) = &params.leaf_prediction {
        cfg.leaf_prediction = match lp.to_ascii_lowercase().as_str() {
            "majority" | "mc" => LeafPrediction::MajorityClass,
            "naive_bayes" | "nb" => LeafPrediction::NaiveBayes,
            "naive_bayes_adaptive" | "nba" => LeafPrediction::NaiveBayesAdaptive,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown leaf prediction '{other}'; valid: majority, nb, nba"
                )))
            }
        };
    }
    Ok(cfg)
}

pub enum Learner {
    Tree(HoeffdingTree),
    Ensemble(Ensemble),
}

pub fn build_learner(
    cfg: &RunConfig,
    schema: Arc<Schema>,
    seed: u64,
) -> Result<Learner, CliError> {
    let base = tree_config(&cfg.params)?;
    let invalid = |e: streamlearn::learners::LearnerError| CliError::Usage(e.to_string());
    let bagging = OnlineBagging::Poisson(cfg.params.lambda.unwrap_or(6.0));
    Ok(match cfg.learner {
        LearnerKind::Ht => Learner::Tree(HoeffdingTree::new(base, schema).map_err(invalid)?),
        LearnerKind::Efdt => Learner::Tree(HoeffdingTree::efdt(base, schema).map_err(invalid)?),
        LearnerKind::Arf => {
            let mut c = ArfConfig::new(cfg.ensemble_size, seed);
            c.ensemble.base = base;
            c.ensemble.bagging = bagging;
            c.feature_subset_size = cfg.params.feature_subset_size;
            Learner::Ensemble(Ensemble::arf(c, schema).map_err(invalid)?)
        }
        LearnerKind::Srp => {
            let mut c = SrpConfig::new(cfg.ensemble_size, seed);
            c.ensemble.base = base;
            c.ensemble.bagging = bagging;
            if let Some(f) = cfg.params.subspace_fraction {
                c.subspace_fraction = f;
            }
            Learner::Ensemble(Ensemble::srp(c, schema).map_err(invalid)?)
        }
    })
}

fn eval_error(spec: &StreamSpec, e: EvalError) -> CliError {
    match e {
        EvalError::Stream(e) => stream_error(spec, e),
        EvalError::UnsupportedTask | EvalError::ClassMismatch { .. } => CliError::Usage(e.to_string()),
        EvalError::Learner(e) => CliError::Runtime(e.to_string()),
    }
}

/// Threads actually used for a configuration.
pub fn effective_threads(cfg: &RunConfig) -> usize {
    if cfg.learner.is_ensemble() {
        cfg.threads.min(cfg.ensemble_size).max(1)
    } else {
        1
    }
}

/// One prequential run for one seed. The generator and the learner are both
/// seeded with `seed`.
pub fn run_seed(cfg: &RunConfig, seed: u64) -> Result<PrequentialResult, CliError> {
    let mut stream = open_stream(&cfg.stream, seed)?;
    let learner = build_learner(cfg, stream.schema().clone(), seed)?;
    let opts = PrequentialOptions {
        window: cfg.window,
        max_instances: cfg.max_instances.or_else(|| default_limit(&cfg.stream)),
        sliding: false,
        record_predictions: false,
    };
    let spec = &cfg.stream;
    match learner {
        Learner::Tree(mut t) => {
            if cfg.threads > 1 || cfg.minibatch > 1 {
                log::warn!("--threads/--minibatch apply to ensembles only; running sequentially");
            }
            prequential_run(&mut stream, &mut t, &opts).map_err(|e| eval_error(spec, e))
        }
        Learner::Ensemble(mut e) if cfg.threads == 1 && cfg.minibatch == 1 => {
            prequential_run(&mut stream, &mut e, &opts).map_err(|e| eval_error(spec, e))
        }
        Learner::Ensemble(mut e) => {
            let par = ParallelConfig::new(cfg.threads, cfg.minibatch);
            minibatch_prequential_run(&mut stream, &mut e, par, &opts).map_err(|e| match e {
                ParallelError::Eval(e) => eval_error(spec, e),
                other => CliError::Runtime(other.to_string()),
            })
        }
    }
}

pub struct RunOutput {
    pub row: ReportRow,
    pub runs: Vec<(u64, PrequentialResult)>,
}

/// Runs every seed of `cfg` and summarises them into one report row.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    let mut runs = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        let r = run_seed(cfg, seed)?;
        log::info!(
            "{} seed {seed}: accuracy {:?} in {:.3}s",
            cfg.learner.label(),
            r.accuracy,
            r.wallclock_s
        );
        runs.push((seed, r));
    }
    let results: Vec<PrequentialResult> = runs.iter().map(|(_, r)| r.clone()).collect();
    let row = ReportRow::summarize(
        cfg.learner.label(),
        if cfg.learner.is_ensemble() { cfg.ensemble_size } else { 1 },
        effective_threads(cfg),
        if cfg.learner.is_ensemble() { cfg.minibatch } else { 1 },
        &results,
    );
    Ok(RunOutput { row, runs })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn write_err(dir: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("cannot write to {}: {e}", dir.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

/// `report.csv` and the aligned `report.txt`.
pub fn write_reports(dir: &Path, rows: &[ReportRow]) -> Result<(), CliError> {
    ensure_dir(dir)?;
    let mut csv = create(dir, "report.csv")?;
    report::write_report_csv(rows, &mut csv).map_err(|e| write_err(dir, e))?;
    csv.flush().map_err(|e| write_err(dir, e))?;
    let mut txt = create(dir, "report.txt")?;
    report::write_report_text(rows, &mut txt).map_err(|e| write_err(dir, e))?;
    txt.flush().map_err(|e| write_err(dir, e))
}

pub fn write_windowed(dir: &Path, runs: &[(u64, PrequentialResult)]) -> Result<(), CliError> {
    ensure_dir(dir)?;
    let mut out = create(dir, "windowed.csv")?;
    report::write_windowed_csv(runs.iter().map(|(s, r)| (*s, r.windowed.as_slice())), &mut out)
        .map_err(|e| write_err(dir, e))?;
    out.flush().map_err(|e| write_err(dir, e))
}
