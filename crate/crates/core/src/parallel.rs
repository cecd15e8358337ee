//! Multi-threaded ensemble training with optional mini-batches.
//!
//! Each batch runs in two phases separated by a barrier. First every
//! instance in the batch is predicted by the frozen ensemble, then the
//! members are trained on the whole batch. Members are assigned to workers
//! round-robin; they own their random generators, so the outcome does not
//! depend on the number of threads.

use std::time::Instant;

use thiserror::Error;

use crate::evaluation::{check_classification, EvalError, Evaluator, PrequentialOptions, PrequentialResult};
use crate::learners::{argmax, Classifier, Ensemble, LearnerError, Member};
use crate::schema::Instance;
use crate::stream::InstanceStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParallelConfig {
    pub n_threads: usize,
    /// 1 trains after every instance.
    pub minibatch_size: usize,
}

impl Default for ParallelConfig {
    fn default() -> Self {
        Self {
            n_threads: 1,
            minibatch_size: 1,
        }
    }
}

impl ParallelConfig {
    pub fn new(n_threads: usize, minibatch_size: usize) -> Self {
        Self {
            n_threads,
            minibatch_size,
        }
    }
}

#[derive(Debug, Error)]
pub enum ParallelError {
    #[error("thread count must be at least 1")]
    NoThreads,
    #[error("mini-batch size must be at least 1")]
    EmptyBatch,
    #[error("could not start worker threads: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<LearnerError> for ParallelError {
    fn from(e: LearnerError) -> Self {
        ParallelError::Eval(EvalError::Learner(e))
    }
}

/// A member that can be trained independently of its siblings.
pub trait EnsembleMember: Send + Sync {
    fn predict_member(&self, x: &[f64], out: &mut [f64]);

    /// Trains on an instance whose label has already been validated.
    fn learn_member(&mut self, inst: &Instance, label: usize);
}

/// An ensemble whose members are independent state islands.
pub trait MemberEnsemble: Classifier {
    type Member: EnsembleMember;

    fn members(&self) -> &[Self::Member];

    fn members_mut(&mut self) -> &mut [Self::Member];

    fn check_label(&self, inst: &Instance) -> Result<usize, LearnerError>;

    /// Turns the sum of member votes into the ensemble distribution. The
    /// sequential predictor must sum in member order so both paths agree
    /// bit for bit.
    fn combine(&self, votes: &[f64], out: &mut [f64]);
}

impl EnsembleMember for Member {
    fn predict_member(&self, x: &[f64], out: &mut [f64]) {
        self.predict_proba_into(x, out);
    }

    fn learn_member(&mut self, inst: &Instance, label: usize) {
        self.learn(&inst.x, label, inst.weight);
    }
}

impl MemberEnsemble for Ensemble {
    type Member = Member;

    fn members(&self) -> &[Member] {
        Ensemble::members(self)
    }

    fn members_mut(&mut self) -> &mut [Member] {
        Ensemble::members_mut(self)
    }

    fn check_label(&self, inst: &Instance) -> Result<usize, LearnerError> {
        self.validate(inst)
    }

    fn combine(&self, votes: &[f64], out: &mut [f64]) {
        Ensemble::combine(votes, out);
    }
}

/// Worker pool for one run.
pub struct ParallelTrainer {
    threads: usize,
    pool: Option<rayon::ThreadPool>,
    votes: Vec<f64>,
}

impl std::fmt::Debug for ParallelTrainer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParallelTrainer")
            .field("threads", &self.threads)
            .finish_non_exhaustive()
    }
}

fn round_robin<T>(items: impl Iterator<Item = T>, workers: usize) -> Vec<Vec<T>> {
    let mut parts: Vec<Vec<T>> = (0..workers).map(|_| Vec::new()).collect();
    for (i, item) in items.enumerate() {
        parts[i % workers].push(item);
    }
    parts
}

impl ParallelTrainer {
    /// Thread counts above `members` are clamped.
    pub fn new(n_threads: usize, members: usize) -> Result<Self, ParallelError> {
        if n_threads == 0 {
            return Err(ParallelError::NoThreads);
        }
        let threads = if n_threads > members.max(1) {
            log::warn!(
                "{n_threads} threads requested for {members} members; using {}",
                members.max(1)
            );
            members.max(1)
        } else {
            n_threads
        };
        let pool = if threads > 1 {
            Some(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
        } else {
            None
        };
        Ok(Self {
            threads,
            pool,
            votes: Vec::new(),
        })
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    /// Phase 1: writes the frozen ensemble's distribution for each instance
    /// into `out` (`batch.len() * classes` values).
    pub fn predict_batch<E: MemberEnsemble>(&mut self, ensemble: &E, batch: &[Instance], out: &mut [f64]) {
        let classes = ensemble.num_classes();
        let members = ensemble.members();
        let stride = batch.len() * classes;
        self.votes.clear();
        self.votes.resize(members.len() * stride, 0.0);

        let fill = |member: &E::Member, slot: &mut [f64]| {
            for (inst, dist) in batch.iter().zip(slot.chunks_mut(classes)) {
                member.predict_member(&inst.x, dist);
            }
        };
        match &self.pool {
            None => {
                for (m, slot) in members.iter().zip(self.votes.chunks_mut(stride)) {
                    fill(m, slot);
                }
            }
            Some(pool) => {
                let parts = round_robin(members.iter().zip(self.votes.chunks_mut(stride)), self.threads);
                pool.scope(|s| {
                    for part in parts {
                        s.spawn(move |_| {
                            for (m, slot) in part {
                                fill(m, slot);
                            }
                        });
                    }
                });
            }
        }

        let mut sum = vec![0.0; classes];
        for (i, dist) in out.chunks_mut(classes).enumerate().take(batch.len()) {
            sum.fill(0.0);
            for m in 0..members.len() {
                let v = &self.votes[m * stride + i * classes..m * stride + (i + 1) * classes];
                for (s, p) in sum.iter_mut().zip(v) {
                    *s += p;
                }
            }
            ensemble.combine(&sum, dist);
        }
    }

    /// Phase 2: trains every member on the whole batch. Unlabeled instances
    /// are skipped.
    pub fn train_batch<E: MemberEnsemble>(
        &mut self,
        ensemble: &mut E,
        batch: &[Instance],
    ) -> Result<(), LearnerError> {
        let labeled: Vec<(&Instance, usize)> = batch
            .iter()
            .filter(|inst| inst.label().is_some())
            .map(|inst| ensemble.check_label(inst).map(|y| (inst, y)))
            .collect::<Result<_, _>>()?;
        let train = |member: &mut E::Member| {
            for &(inst, y) in &labeled {
                member.learn_member(inst, y);
            }
        };
        match &self.pool {
            None => ensemble.members_mut().iter_mut().for_each(train),
            Some(pool) => {
                let parts = round_robin(ensemble.members_mut().iter_mut(), self.threads);
                pool.scope(|s| {
                    for part in parts {
                        s.spawn(move |_| part.into_iter().for_each(train));
                    }
                });
            }
        }
        Ok(())
    }

    /// Predicts, then trains, one batch. Returns the distributions.
    pub fn step<E: MemberEnsemble>(
        &mut self,
        ensemble: &mut E,
        batch: &[Instance],
    ) -> Result<Vec<f64>, LearnerError> {
        let mut out = vec![0.0; batch.len() * ensemble.num_classes()];
        self.predict_batch(ensemble, batch, &mut out);
        self.train_batch(ensemble, batch)?;
        Ok(out)
    }
}

/// Prequential evaluation at batch granularity: each batch of `b` instances
/// is predicted by the model as it stood before the batch, then used for
/// training. The final partial batch is processed as well.
pub fn minibatch_prequential_run<S, E>(
    stream: &mut S,
    ensemble: &mut E,
    cfg: ParallelConfig,
    opts: &PrequentialOptions,
) -> Result<PrequentialResult, ParallelError>
where
    S: InstanceStream + ?Sized,
    E: MemberEnsemble,
{
    if cfg.minibatch_size == 0 {
        return Err(ParallelError::EmptyBatch);
    }
    let classes = ensemble.num_classes();
    check_classification(stream.schema(), classes)?;
    let mut trainer = ParallelTrainer::new(cfg.n_threads, ensemble.members().len())?;
    let mut eval = Evaluator::new(classes, opts);
    let limit = opts.max_instances.unwrap_or(u64::MAX);
    let b = cfg.minibatch_size;
    let mut batch: Vec<Instance> = Vec::with_capacity(b);
    let mut dists = vec![0.0; b * classes];

    let start = Instant::now();
    loop {
        batch.clear();
        while batch.len() < b && eval.instances() + (batch.len() as u64) < limit {
            match stream.next_instance().map_err(EvalError::from)? {
                Some(inst) => batch.push(inst),
                None => break,
            }
        }
        if batch.is_empty() {
            break;
        }
        trainer.predict_batch(ensemble, &batch, &mut dists);
        for (inst, dist) in batch.iter().zip(dists.chunks(classes)) {
            eval.record(inst.label(), argmax(dist))?;
        }
        trainer.train_batch(ensemble, &batch)?;
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok(eval.finish(ensemble.name(), elapsed))
}
