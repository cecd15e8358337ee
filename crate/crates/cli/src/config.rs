//! Run configuration: built from flags, a TOML document, or both.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Ht,
    Efdt,
    Arf,
    Srp,
}

impl LearnerKind {
    pub fn is_ensemble(self) -> bool {
        matches!(self, LearnerKind::Arf | LearnerKind::Srp)
    }

    pub fn label(self) -> &'static str {
        match self {
            LearnerKind::Ht => "HT",
            LearnerKind::Efdt => "EFDT",
            LearnerKind::Arf => "ARF",
            LearnerKind::Srp => "SRP",
        }
    }

    pub fn names() -> String {
        Self::value_variants()
            .iter()
            .filter_map(|v| v.to_possible_value())
            .map(|v| v.get_name().to_string())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl std::str::FromStr for LearnerKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        <Self as ValueEnum>::from_str(s, true).map_err(|_| {
            CliError::Usage(format!("unknown learner '{s}'; valid names: {}", Self::names()))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Csv,
    Arff,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StreamSpec {
    /// Hyperplane preset, 100 000 instances per seed.
    Hyper100k,
    /// SEA generator with the given concept function and label noise.
    Sea { function: u8, noise: f64 },
    File {
        path: PathBuf,
        format: FileFormat,
        /// Target column name; the last column when absent.
        target: Option<String>,
    },
}

impl StreamSpec {
    /// `hyper100k`, `sea`, `sea:N`, or a file path (format from the
    /// extension unless given).
    pub fn parse(
        s: &str,
        format: Option<FileFormat>,
        target: Option<String>,
    ) -> Result<Self, CliError> {
        match s {
            "hyper100k" => return Ok(StreamSpec::Hyper100k),
            "sea" => return Ok(StreamSpec::Sea { function: 1, noise: 0.1 }),
            _ => {}
        }
        if let Some(f) = s.strip_prefix("sea:") {
            let function = f
                .parse()
                .map_err(|_| CliError::Usage(format!("bad SEA function '{f}'")))?;
            return Ok(StreamSpec::Sea { function, noise: 0.1 });
        }
        let path = PathBuf::from(s);
        let format = match format {
            Some(f) => f,
            None => match path.extension().and_then(|e| e.to_str()) {
                Some(e) if e.eq_ignore_ascii_case("arff") => FileFormat::Arff,
                Some(e) if e.eq_ignore_ascii_case("csv") => FileFormat::Csv,
                _ => {
                    return Err(CliError::Usage(format!(
                        "cannot infer the format of '{s}'; pass --format csv|arff"
                    )))
                }
            },
        };
        Ok(StreamSpec::File {
            path,
            format,
            target,
        })
    }

    pub fn label(&self) -> String {
        match self {
            StreamSpec::Hyper100k => "hyper100k".into(),
            StreamSpec::Sea { function, .. } => format!("sea:{function}"),
            StreamSpec::File { path, .. } => path.display().to_string(),
        }
    }
}

/// `"1..10"` (inclusive), `"3"`, or `"1,4,9"`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Usage(format!("bad seed list '{s}'; use e.g. 1..10 or 1,2,3"));
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

/// Learner hyperparameters that may be overridden.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TreeOverrides {
    pub grace_period: Option<f64>,
    pub split_confidence: Option<f64>,
    pub tie_threshold: Option<f64>,
    pub leaf_prediction: Option<String>,
    pub lambda: Option<f64>,
    pub feature_subset_size: Option<usize>,
    pub subspace_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub stream: StreamSpec,
    pub learner: LearnerKind,
    pub ensemble_size: usize,
    pub seeds: Vec<u64>,
    pub window: usize,
    pub max_instances: Option<u64>,
    pub threads: usize,
    pub minibatch: usize,
    pub out: PathBuf,
    pub params: TreeOverrides,
}

impl RunConfig {
    pub fn new(stream: StreamSpec, learner: LearnerKind) -> Self {
        Self {
            stream,
            learner,
            ensemble_size: 10,
            seeds: vec![1],
            window: 1000,
            max_instances: None,
            threads: 1,
            minibatch: 1,
            out: PathBuf::from("results"),
            params: TreeOverrides::default(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.seeds.is_empty() {
            return Err(CliError::Usage("seed list is empty".into()));
        }
        if self.window == 0 {
            return Err(CliError::Usage("--window must be at least 1".into()));
        }
        if self.threads == 0 || self.minibatch == 0 {
            return Err(CliError::Usage("--threads and --minibatch must be at least 1".into()));
        }
        if self.learner.is_ensemble() && self.ensemble_size == 0 {
            return Err(CliError::Usage("--ensemble must be at least 1".into()));
        }
        Ok(())
    }
}

/// The `--config` document. Every key is optional; flags take precedence.
///
/// ```toml
/// [stream]
/// source = "hyper100k"
///
/// [learner]
/// name = "arf"
/// ensemble_size = 30
/// grace_period = 200
///
/// [run]
/// seeds = "1..10"
/// threads = 8
/// ```
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub stream: StreamSection,
    #[serde(default)]
    pub learner: LearnerSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamSection {
    pub source: Option<String>,
    pub format: Option<FileFormat>,
    pub target: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    pub name: Option<String>,
    pub ensemble_size: Option<usize>,
    pub grace_period: Option<f64>,
    pub split_confidence: Option<f64>,
    pub tie_threshold: Option<f64>,
    pub leaf_prediction: Option<String>,
    pub lambda: Option<f64>,
    pub feature_subset_size: Option<usize>,
    pub subspace_fraction: Option<f64>,
}

impl LearnerSection {
    pub fn params(&self) -> TreeOverrides {
        TreeOverrides {
            grace_period: self.grace_period,
            split_confidence: self.split_confidence,
            tie_threshold: self.tie_threshold,
            leaf_prediction: self.leaf_prediction.clone(),
            lambda: self.lambda,
            feature_subset_size: self.feature_subset_size,
            subspace_fraction: self.subspace_fraction,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seeds: Option<SeedList>,
    pub window: Option<usize>,
    pub max_instances: Option<u64>,
    pub threads: Option<usize>,
    pub minibatch: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SeedList {
    Text(String),
    List(Vec<u64>),
}

impl SeedList {
    pub fn resolve(&self) -> Result<Vec<u64>, CliError> {
        match self {
            SeedList::Text(s) => parse_seeds(s),
            SeedList::List(v) => Ok(v.clone()),
        }
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
