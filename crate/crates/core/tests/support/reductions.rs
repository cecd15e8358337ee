//! Single-member ensembles with bagging, feature sampling and drift handling
//! switched off must behave exactly like one Hoeffding tree.

use std::sync::Arc;

use streamlearn::generators::{HyperplaneConfig, HyperplaneGenerator, SeaConfig, SeaGenerator};
use streamlearn::learners::{
    ArfConfig, Classifier, Ensemble, EnsembleConfig, HoeffdingTree, HtConfig, LeafPrediction,
    OnlineBagging, SrpConfig,
};
use streamlearn::stream::{take, InstanceStream};
use streamlearn::{Instance, Schema};

fn degenerate(base: HtConfig) -> EnsembleConfig {
    EnsembleConfig {
        ensemble_size: 1,
        bagging: OnlineBagging::Off,
        drift_detection: false,
        base,
        seed: 42,
        ..EnsembleConfig::default()
    }
}

fn draw(stream: &mut dyn InstanceStream, n: usize) -> (Arc<Schema>, Vec<Instance>) {
    let schema = stream.schema().clone();
    (schema, take(stream, n).expect("generators do not fail"))
}

/// Per-step predictions (argmax equal, probabilities within 1e-12) and the
/// final split trace of the member tree against a bare tree.
pub fn same_trace(
    mut ens: Ensemble,
    schema: Arc<Schema>,
    base: HtConfig,
    data: &[Instance],
) -> Result<(), String> {
    let mut tree = HoeffdingTree::new(base, schema).map_err(|e| e.to_string())?;
    for (t, inst) in data.iter().enumerate() {
        let p_ens = ens.predict_proba(inst);
        let p_tree = tree.predict_proba(inst);
        if ens.predict(inst) != tree.predict(inst) {
            return Err(format!("prediction differs at {t}: {p_ens:?} vs {p_tree:?}"));
        }
        if p_ens.iter().zip(&p_tree).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(format!("probabilities differ at {t}: {p_ens:?} vs {p_tree:?}"));
        }
        ens.train(inst).map_err(|e| e.to_string())?;
        tree.train(inst).map_err(|e| e.to_string())?;
    }
    let member = ens.members()[0].tree();
    if member.events() != tree.events() {
        return Err(format!(
            "split traces differ: {:?} vs {:?}",
            member.events(),
            tree.events()
        ));
    }
    if member.size() != tree.size() {
        return Err(format!("tree sizes differ: {:?} vs {:?}", member.size(), tree.size()));
    }
    if tree.events().is_empty() {
        return Err("the trace never split".into());
    }
    Ok(())
}

pub fn bases() -> Vec<HtConfig> {
    vec![
        HtConfig::default(),
        HtConfig {
            grace_period: 50.0,
            split_confidence: 0.01,
            leaf_prediction: LeafPrediction::MajorityClass,
            ..HtConfig::default()
        },
        HtConfig {
            grace_period: 100.0,
            leaf_prediction: LeafPrediction::NaiveBayes,
            ..HtConfig::default()
        },
    ]
}

/// ARF with one tree that sees every attribute at every split evaluation.
pub fn arf_is_ht() -> Result<(), String> {
    for base in bases() {
        for seed in [1, 2] {
            let mut gen = HyperplaneGenerator::new(HyperplaneConfig::default().seed(seed))
                .map_err(|e| e.to_string())?;
            let (schema, data) = draw(&mut gen, 6000);
            let cfg = ArfConfig {
                ensemble: degenerate(base.clone()),
                feature_subset_size: Some(schema.num_attributes()),
            };
            let ens = Ensemble::arf(cfg, schema.clone()).map_err(|e| e.to_string())?;
            same_trace(ens, schema, base.clone(), &data).map_err(|e| format!("ARF seed {seed}: {e}"))?;
        }
    }
    Ok(())
}

/// SRP with one tree whose subspace is the full attribute set.
pub fn srp_is_ht() -> Result<(), String> {
    for base in bases() {
        for seed in [3, 4] {
            let mut gen =
                SeaGenerator::new(SeaConfig::new(2).seed(seed)).map_err(|e| e.to_string())?;
            let (schema, data) = draw(&mut gen, 6000);
            let cfg = SrpConfig {
                ensemble: degenerate(base.clone()),
                subspace_fraction: 1.0,
            };
            let ens = Ensemble::srp(cfg, schema.clone()).map_err(|e| e.to_string())?;
            if ens.members()[0].subspace() != Some(&[0, 1, 2][..]) {
                return Err(format!("subspace {:?}", ens.members()[0].subspace()));
            }
            same_trace(ens, schema, base.clone(), &data).map_err(|e| format!("SRP seed {seed}: {e}"))?;
        }
    }
    let base = HtConfig::default();
    let mut gen = HyperplaneGenerator::new(HyperplaneConfig::default().seed(9)).map_err(|e| e.to_string())?;
    let (schema, data) = draw(&mut gen, 8000);
    let cfg = SrpConfig {
        ensemble: degenerate(base.clone()),
        subspace_fraction: 1.0,
    };
    let ens = Ensemble::srp(cfg, schema.clone()).map_err(|e| e.to_string())?;
    same_trace(ens, schema, base, &data).map_err(|e| format!("SRP on hyperplane: {e}"))
}
