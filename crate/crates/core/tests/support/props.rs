//! Property checks driven by a deterministic proptest runner, so every run
//! explores the same cases.

use std::sync::Arc;

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::Rng;
use streamlearn::evaluation::{prequential_run, PrequentialOptions};
use streamlearn::generators::{gradual_weight, HyperplaneConfig, HyperplaneGenerator};
use streamlearn::io::{read_arff, read_csv, write_arff, write_csv, CsvOptions};
use streamlearn::learners::{
    ArfConfig, Classifier, Ensemble, HoeffdingTree, HtConfig, LeafPrediction, SrpConfig,
    TreeVariant,
};
use streamlearn::parallel::{minibatch_prequential_run, ParallelConfig};
use streamlearn::pipeline::Scaler;
use streamlearn::stream::take;
use streamlearn::{AttributeSpec, Instance, InstanceStream, MemoryStream, Schema, Task};

fn runner(cases: u32) -> TestRunner {
    let cfg = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn numeric_schema(d: usize, classes: usize) -> Arc<Schema> {
    let attrs = (0..d).map(|i| AttributeSpec::numeric(format!("a{i}"))).collect();
    let target = AttributeSpec::nominal("y", (0..classes).map(|c| c.to_string())).unwrap();
    Arc::new(Schema::new(attrs, target, Task::Classification).unwrap())
}

/// Rows of `d` features in [-5, 5] (some missing) with a class in `0..classes`.
fn rows(d: usize, classes: usize, max: usize) -> impl Strategy<Value = Vec<Instance>> {
    let feature = prop_oneof![9 => -5.0..5.0f64, 1 => Just(f64::NAN)];
    vec((vec(feature, d), 0..classes), 1..max)
        .prop_map(|v| v.into_iter().map(|(x, y)| Instance::labeled(x, y)).collect())
}

fn learners(schema: &Arc<Schema>, seed: u64) -> Vec<Box<dyn Classifier>> {
    let base = HtConfig {
        grace_period: 20.0,
        split_confidence: 0.05,
        ..HtConfig::default()
    };
    let mut arf = ArfConfig::new(3, seed);
    arf.ensemble.base = base.clone();
    let mut srp = SrpConfig::new(3, seed);
    srp.ensemble.base = base.clone();
    let mc = HtConfig {
        leaf_prediction: LeafPrediction::MajorityClass,
        ..base.clone()
    };
    let nb = HtConfig {
        leaf_prediction: LeafPrediction::NaiveBayes,
        ..base.clone()
    };
    vec![
        Box::new(HoeffdingTree::new(base.clone(), schema.clone()).unwrap()),
        Box::new(HoeffdingTree::new(mc, schema.clone()).unwrap()),
        Box::new(HoeffdingTree::new(nb, schema.clone()).unwrap()),
        Box::new(HoeffdingTree::with_variant(base, schema.clone(), TreeVariant::Efdt).unwrap()),
        Box::new(Ensemble::arf(arf, schema.clone()).unwrap()),
        Box::new(Ensemble::srp(srp, schema.clone()).unwrap()),
    ]
}

/// Every learner's probability vector sums to 1 within 1e-9 at every step.
pub fn probabilities_sum_to_one(cases: u32) -> Result<(), String> {
    let strategy = (
        2usize..5,
        (2usize..5).prop_flat_map(|d| rows(d, 4, 300)),
        0u64..1000,
    );
    runner(cases)
        .run(&strategy, |(classes, data, seed)| {
            let d = data[0].x.len();
            let data: Vec<Instance> = data
                .into_iter()
                .map(|mut i| {
                    i.y = Some((i.label().unwrap() % classes) as f64);
                    i
                })
                .collect();
            let schema = numeric_schema(d, classes);
            for mut learner in learners(&schema, seed) {
                for inst in &data {
                    let p = learner.predict_proba(inst);
                    prop_assert_eq!(p.len(), classes);
                    let sum: f64 = p.iter().sum();
                    prop_assert!((sum - 1.0).abs() <= 1e-9, "{}: sum {}", learner.name(), sum);
                    prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
                    learner.train(inst).unwrap();
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Prequential accuracy equals a recount of the stored first predictions
/// (unlabeled rows excluded) within 1e-12.
pub fn accuracy_equals_recount(cases: u32) -> Result<(), String> {
    let strategy = (rows(3, 3, 400), 1usize..60, vec(any::<bool>(), 400));
    runner(cases)
        .run(&strategy, |(mut data, window, unlabeled)| {
            for (inst, u) in data.iter_mut().zip(&unlabeled) {
                if *u && inst.x[0] > 2.0 {
                    inst.y = None;
                }
            }
            let schema = numeric_schema(3, 3);
            let mut stream = MemoryStream::new((*schema).clone(), data.clone()).unwrap();
            let cfg = HtConfig {
                grace_period: 25.0,
                ..HtConfig::default()
            };
            let mut tree = HoeffdingTree::new(cfg, schema).unwrap();
            let opts = PrequentialOptions::default().window(window).record_predictions();
            let result = prequential_run(&mut stream, &mut tree, &opts).unwrap();
            let predictions = result.predictions.unwrap();
            prop_assert_eq!(predictions.len(), data.len());
            let (mut hits, mut scored) = (0u64, 0u64);
            for (inst, &p) in data.iter().zip(&predictions) {
                if let Some(y) = inst.label() {
                    scored += 1;
                    hits += u64::from(y == p);
                }
            }
            prop_assert_eq!(result.instances, data.len() as u64);
            match result.accuracy {
                Some(acc) => prop_assert!((acc - hits as f64 / scored as f64).abs() <= 1e-12),
                None => prop_assert_eq!(scored, 0),
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// `p(c - d) + p(c + d) = 1` for the sigmoid transition weight.
pub fn gradual_weight_symmetry(cases: u32) -> Result<(), String> {
    let strategy = (-1e6..1e6f64, 1e-3..1e5f64, 0.0..1e5f64);
    runner(cases)
        .run(&strategy, |(center, width, off)| {
            let lo = gradual_weight(center - off, center, width);
            let hi = gradual_weight(center + off, center, width);
            prop_assert!((lo + hi - 1.0).abs() <= 1e-12, "{} + {}", lo, hi);
            prop_assert!((gradual_weight(center, center, width) - 0.5).abs() <= 1e-15);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Scaler moments (and its output) match two-pass batch statistics on every
/// prefix, within 1e-9 relative to the data scale.
pub fn scaler_matches_batch_moments(cases: u32) -> Result<(), String> {
    let strategy = (vec(-1e4..1e4f64, 2..200), -1e6..1e6f64);
    runner(cases)
        .run(&strategy, |(values, offset)| {
            let mut scaler = Scaler::new(numeric_schema(1, 2));
            let values: Vec<f64> = values.iter().map(|v| v + offset).collect();
            let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (t, &v) in values.iter().enumerate() {
                let z = scaler.process(&Instance::labeled(vec![v], 0)).x[0];
                let prefix = &values[..=t];
                let n = prefix.len() as f64;
                let mean = prefix.iter().sum::<f64>() / n;
                let m = scaler.moments(0).unwrap();
                prop_assert!((m.mean - mean).abs() <= 1e-9 * scale);
                if prefix.len() < 2 {
                    prop_assert_eq!(z, 0.0);
                    continue;
                }
                let var = prefix.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
                let sd = var.sqrt();
                prop_assert!((m.std_dev() - sd).abs() <= 1e-9 * sd.max(1e-9 * scale));
                if sd > 1e-6 * scale {
                    let expect = (v - mean) / sd;
                    prop_assert!(
                        (z - expect).abs() <= 1e-9 * expect.abs().max(1.0),
                        "{} vs {}",
                        z,
                        expect
                    );
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn name() -> impl Strategy<Value = String> {
    "[a-zA-Z][a-zA-Z0-9_' ]{0,5}[a-zA-Z0-9]"
}

/// A schema of mixed attributes, plus matching rows with missing values.
fn dataset(task: Task) -> impl Strategy<Value = (Schema, Vec<Instance>)> {
    let attr = prop_oneof![
        Just(None),
        proptest::sample::subsequence(vec!["red", "green", "blue", "dark grey", "it's", "?"], 1..5)
            .prop_map(Some),
    ];
    (vec((name(), attr), 1..5), name(), 2usize..4, 1usize..30, any::<u64>()).prop_filter_map(
        "distinct names",
        move |(attrs, target, classes, n, seed)| {
            let mut names: Vec<&String> = attrs.iter().map(|a| &a.0).collect();
            names.push(&target);
            names.sort();
            names.dedup();
            if names.len() != attrs.len() + 1 {
                return None;
            }
            let specs: Vec<AttributeSpec> = attrs
                .iter()
                .map(|(n, v)| match v {
                    None => AttributeSpec::numeric(n.clone()),
                    Some(vals) => AttributeSpec::nominal(n.clone(), vals.iter().copied()).unwrap(),
                })
                .collect();
            let target_spec = match task {
                Task::Classification => {
                    AttributeSpec::nominal(target, (0..classes).map(|c| format!("c{c}"))).unwrap()
                }
                Task::Regression => AttributeSpec::numeric(target),
            };
            let schema = Schema::new(specs, target_spec, task).ok()?;
            let mut r = streamlearn::rng::seeded(seed);
            let rows = (0..n)
                .map(|_| {
                    let x = schema
                        .attributes()
                        .iter()
                        .map(|a| {
                            if r.random::<f64>() < 0.1 {
                                f64::NAN
                            } else if a.is_nominal() {
                                r.random_range(0..a.cardinality()) as f64
                            } else {
                                (r.random::<f64>() - 0.5) * 10f64.powi(r.random_range(-8..8))
                            }
                        })
                        .collect();
                    let y = match task {
                        Task::Classification => r.random_range(0..classes) as f64,
                        Task::Regression => r.random::<f64>() * 1e3 - 500.0,
                    };
                    Instance::new(x, Some(y))
                })
                .collect();
            Some((schema, rows))
        },
    )
}

fn same_rows(a: &[Instance], b: &[Instance]) -> bool {
    let same = |p: f64, q: f64| (p.is_nan() && q.is_nan()) || p == q;
    a.len() == b.len()
        && a.iter().zip(b).all(|(p, q)| {
            p.x.len() == q.x.len()
                && p.x.iter().zip(&q.x).all(|(u, v)| same(*u, *v))
                && same(p.y.unwrap_or(f64::NAN), q.y.unwrap_or(f64::NAN))
                && p.weight == q.weight
        })
}

/// Write-then-read through ARFF and CSV yields the identical schema and rows.
pub fn io_round_trip(cases: u32) -> Result<(), String> {
    let strategy = (
        prop_oneof![dataset(Task::Classification), dataset(Task::Regression)],
        name(),
    );
    runner(cases)
        .run(&strategy, |((schema, data), relation)| {
            // `?` always reads back as missing from CSV
            let literal_question_mark =
                schema.attributes().iter().any(|a| a.values().is_some_and(|v| v.iter().any(|s| s == "?")));
            if !literal_question_mark {
                let mut csv_buf = Vec::new();
                write_csv(&schema, &data, &mut csv_buf).unwrap();
                let mut source = read_csv(csv_buf.as_slice(), &CsvOptions::for_schema(&schema)).unwrap();
                prop_assert_eq!(&**source.schema(), &schema);
                let back = take(&mut source, usize::MAX).unwrap();
                prop_assert!(same_rows(&back, &data), "{}", String::from_utf8_lossy(&csv_buf));
            }

            let schema = schema.with_relation(relation);
            let mut arff_buf = Vec::new();
            write_arff(&schema, &data, &mut arff_buf).unwrap();
            let mut source = read_arff(arff_buf.as_slice()).unwrap();
            prop_assert_eq!(&**source.schema(), &schema);
            let back = take(&mut source, usize::MAX).unwrap();
            prop_assert!(same_rows(&back, &data), "{}", String::from_utf8_lossy(&arff_buf));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn hyper_sample(seed: u64, n: usize) -> MemoryStream {
    let mut gen = HyperplaneGenerator::new(HyperplaneConfig::default().seed(seed)).unwrap();
    let schema = (**gen.schema()).clone();
    MemoryStream::new(schema, take(&mut gen, n).unwrap()).unwrap()
}

/// The same seed gives identical predictions, confusion counts, split traces
/// and member replacements with 1, 3 and 8 worker threads.
pub fn thread_count_invariance(cases: u32) -> Result<(), String> {
    let strategy = (0u64..10_000, 1usize..80, 1usize..7);
    runner(cases)
        .run(&strategy, |(seed, batch, size)| {
            let data = hyper_sample(seed, 1500);
            let mut traces = Vec::new();
            for threads in [1, 3, 8] {
                let mut stream = data.clone();
                let mut cfg = ArfConfig::new(size, seed);
                cfg.ensemble.base.grace_period = 50.0;
                let mut ens = Ensemble::arf(cfg, stream.schema().clone()).unwrap();
                let opts = PrequentialOptions::default().record_predictions();
                let result = minibatch_prequential_run(
                    &mut stream,
                    &mut ens,
                    ParallelConfig::new(threads, batch),
                    &opts,
                )
                .unwrap();
                let events: Vec<_> =
                    ens.members().iter().map(|m| m.tree().events().to_vec()).collect();
                traces.push((result.predictions.unwrap(), result.confusion, events, ens.replacements()));
            }
            prop_assert!(traces[0] == traces[1], "1 vs 3 threads");
            prop_assert!(traces[0] == traces[2], "1 vs 8 threads");
            Ok(())
        })
        .map_err(|e| e.to_string())
}
