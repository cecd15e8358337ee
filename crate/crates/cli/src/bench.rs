//! The two benchmark suites on the Hyper100K preset.

use clap::ValueEnum;

use streamlearn::evaluation::report::ReportRow;
use streamlearn::evaluation::PrequentialResult;

use crate::config::{LearnerKind, RunConfig, StreamSpec};
use crate::runner;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// HT, EFDT, ARF and SRP with 10 and 30 members.
    Table1,
    /// ARF(100) sequential, on 8 threads, and on 8 threads with batches of 50.
    Table2,
}

pub const DEFAULT_SEEDS: std::ops::RangeInclusive<u64> = 1..=10;

/// (learner, ensemble size, threads, mini-batch) in report order.
pub fn entries(suite: Suite) -> Vec<(LearnerKind, usize, usize, usize)> {
    match suite {
        Suite::Table1 => vec![
            (LearnerKind::Ht, 1, 1, 1),
            (LearnerKind::Efdt, 1, 1, 1),
            (LearnerKind::Arf, 10, 1, 1),
            (LearnerKind::Arf, 30, 1, 1),
            (LearnerKind::Srp, 10, 1, 1),
            (LearnerKind::Srp, 30, 1, 1),
        ],
        Suite::Table2 => vec![
            (LearnerKind::Arf, 100, 1, 1),
            (LearnerKind::Arf, 100, 8, 1),
            (LearnerKind::Arf, 100, 8, 50),
        ],
    }
}

/// Run configurations of a suite.
pub fn configs(suite: Suite, seeds: &[u64], max_instances: Option<u64>) -> Vec<RunConfig> {
    entries(suite)
        .into_iter()
        .map(|(learner, size, threads, minibatch)| {
            let mut cfg = RunConfig::new(StreamSpec::Hyper100k, learner);
            cfg.ensemble_size = size;
            cfg.threads = threads;
            cfg.minibatch = minibatch;
            cfg.seeds = seeds.to_vec();
            cfg.max_instances = max_instances;
            cfg
        })
        .collect()
}

pub struct SuiteOutput {
    pub rows: Vec<ReportRow>,
    /// Per-configuration runs, in row order.
    pub runs: Vec<Vec<(u64, PrequentialResult)>>,
}

pub fn run_suite(
    suite: Suite,
    seeds: &[u64],
    max_instances: Option<u64>,
) -> Result<SuiteOutput, CliError> {
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for cfg in configs(suite, seeds, max_instances) {
        let out = runner::execute(&cfg)?;
        rows.push(out.row);
        runs.push(out.runs);
    }
    Ok(SuiteOutput { rows, runs })
}
