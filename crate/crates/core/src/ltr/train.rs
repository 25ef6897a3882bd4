//! Single training runs with Adam and evenly spaced checkpoints.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::bm25::RankedRun;
use crate::error::CoreError;
use crate::math;
use crate::ledger::Objective;
use crate::synth::Qrels;
use crate::Result;

use super::batch::{BatchConfig, BatchStream, TrainInstance};
use super::features::Featurizer;
use super::loss::{listwise_listnet_loss, pairwise_ranknet_loss, pointwise_loss};
use super::scorer::{Scorer, ScorerConfig, Workspace};

/// Steps, checkpoint count, and learning rate for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSchedule {
    pub n_steps: u64,
    pub n_checkpoints: u64,
    pub learning_rate: f64,
}

impl TrainSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 || self.n_checkpoints == 0 || self.n_checkpoints > self.n_steps {
            return Err(CoreError::Config {
                field: "schedule",
                message: format!(
                    "need 1 <= n_checkpoints <= n_steps, got {} checkpoints over {} steps",
                    self.n_checkpoints, self.n_steps
                ),
            });
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(CoreError::Config {
                field: "learning_rate",
                message: "must be positive and finite".into(),
            });
        }
        Ok(())
    }
}

/// Evenly spaced checkpoint steps, always including the final step.
pub fn checkpoint_steps(schedule: &TrainSchedule) -> Vec<u64> {
    (1..=schedule.n_checkpoints)
        .map(|i| i * schedule.n_steps / schedule.n_checkpoints)
        .collect()
}

/// A scorer snapshot taken during training.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub step: u64,
    /// `step * effective batch size` for the objective.
    pub examples_consumed: u64,
    pub scorer: Scorer,
}

/// Everything a training run reads: the benchmark views plus batch sampling
/// configuration.
pub struct TrainData<'a> {
    pub featurizer: &'a Featurizer<'a>,
    pub qrels: &'a Qrels,
    pub runs: &'a BTreeMap<String, RankedRun>,
    pub train_query_ids: &'a [String],
    pub batch_config: BatchConfig,
    /// Seed for batch sampling (independent of the scorer init seed).
    pub batch_seed: u64,
}

struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    /// Running beta1^t and beta2^t for bias correction.
    beta1_pow: f64,
    beta2_pow: f64,
}

impl Adam {
    fn new(lr: f64, n: usize) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            beta1_pow: 1.0,
            beta2_pow: 1.0,
        }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.beta1_pow *= self.beta1;
        self.beta2_pow *= self.beta2;
        let bc1 = 1.0 - self.beta1_pow;
        let bc2 = 1.0 - self.beta2_pow;
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (math::sqrt(v_hat) + self.eps);
        }
    }
}

/// Train one scorer under one objective, emitting evenly spaced checkpoints.
///
/// Batch loss is the mean over instances (pairs for pairwise, lists for
/// listwise). A non-finite loss aborts the run rather than contaminating
/// downstream observations.
pub fn train_run(
    objective: Objective,
    scorer_config: &ScorerConfig,
    data: &TrainData<'_>,
    schedule: &TrainSchedule,
) -> Result<Vec<Checkpoint>> {
    schedule.validate()?;
    let mut scorer = Scorer::new(*scorer_config)?;
    let mut stream = BatchStream::new(
        objective,
        data.train_query_ids,
        data.qrels,
        data.runs,
        data.batch_config,
        data.batch_seed,
    )?;
    let effective_batch = data.batch_config.effective_batch_size(objective) as u64;
    let cp_steps = checkpoint_steps(schedule);
    let mut next_cp = 0usize;

    let n_params = scorer.n_params();
    let mut adam = Adam::new(schedule.learning_rate, n_params);
    let mut grads = vec![0.0; n_params];
    let mut ws = Workspace::new(scorer_config);
    let mut checkpoints = Vec::with_capacity(cp_steps.len());

    for step in 1..=schedule.n_steps {
        let batch = stream.next_batch();
        for g in grads.iter_mut() {
            *g = 0.0;
        }
        let mut loss_sum = 0.0;
        let mut units = 0usize;
        for instance in &batch {
            loss_sum += apply_instance(&scorer, data.featurizer, instance, &mut ws, &mut grads)?;
            units += 1;
        }
        let mean_loss = loss_sum / units as f64;
        if !mean_loss.is_finite() {
            return Err(CoreError::Training {
                step,
                message: format!("non-finite batch loss under {objective}"),
            });
        }
        let inv = 1.0 / units as f64;
        for g in grads.iter_mut() {
            *g *= inv;
        }
        adam.step(scorer.params_mut(), &grads);

        if next_cp < cp_steps.len() && step == cp_steps[next_cp] {
            checkpoints.push(Checkpoint {
                step,
                examples_consumed: step * effective_batch,
                scorer: scorer.clone(),
            });
            next_cp += 1;
        }
    }
    Ok(checkpoints)
}

/// Forward/backward for one instance; returns its loss contribution.
fn apply_instance(
    scorer: &Scorer,
    featurizer: &Featurizer<'_>,
    instance: &TrainInstance,
    ws: &mut Workspace,
    grads: &mut [f64],
) -> Result<f64> {
    match instance {
        TrainInstance::Pointwise { query_id, doc_id, label } => {
            let x = featurizer.features(query_id, doc_id)?;
            let s = scorer.forward(&x, ws);
            let (loss, dls) = pointwise_loss(s, *label)?;
            scorer.backward(&x, ws, dls, grads);
            Ok(loss)
        }
        TrainInstance::Pairwise { query_id, positive, negative } => {
            let xp = featurizer.features(query_id, positive)?;
            let xn = featurizer.features(query_id, negative)?;
            let sp = scorer.forward(&xp, ws);
            let sn = scorer.forward(&xn, ws);
            let (loss, (grad_pos, grad_neg)) = pairwise_ranknet_loss(sp, sn);
            // The workspace holds the negative's activations; backprop it
            // first, then recompute the positive's forward pass.
            scorer.backward(&xn, ws, grad_neg, grads);
            scorer.forward(&xp, ws);
            scorer.backward(&xp, ws, grad_pos, grads);
            Ok(loss)
        }
        TrainInstance::Listwise { query_id, doc_ids, grades } => {
            let xs: Vec<alloc::rc::Rc<Vec<f64>>> = doc_ids
                .iter()
                .map(|d| featurizer.features(query_id, d))
                .collect::<Result<_>>()?;
            let scores: Vec<f64> = xs.iter().map(|x| scorer.forward(x, ws)).collect();
            let (loss, dscores) = listwise_listnet_loss(&scores, grades)?;
            for (x, ds) in xs.iter().zip(&dscores) {
                scorer.forward(x, ws);
                scorer.backward(x, ws, *ds, grads);
            }
            Ok(loss)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_grid_even() {
        let schedule = TrainSchedule {
            n_steps: 2000,
            n_checkpoints: 20,
            learning_rate: 1e-3,
        };
        let steps = checkpoint_steps(&schedule);
        assert_eq!(steps.len(), 20);
        assert_eq!(steps[0], 100);
        assert_eq!(steps[1], 200);
        assert_eq!(steps[19], 2000);
        for w in steps.windows(2) {
            assert_eq!(w[1] - w[0], 100);
        }
    }

    #[test]
    fn checkpoint_grid_strictly_increasing_when_uneven() {
        let schedule = TrainSchedule {
            n_steps: 103,
            n_checkpoints: 10,
            learning_rate: 1e-3,
        };
        let steps = checkpoint_steps(&schedule);
        assert_eq!(steps.len(), 10);
        assert_eq!(*steps.last().unwrap(), 103);
        for w in steps.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(TrainSchedule { n_steps: 0, n_checkpoints: 1, learning_rate: 1e-3 }
            .validate()
            .is_err());
        assert!(TrainSchedule { n_steps: 5, n_checkpoints: 6, learning_rate: 1e-3 }
            .validate()
            .is_err());
        assert!(TrainSchedule { n_steps: 5, n_checkpoints: 5, learning_rate: 0.0 }
            .validate()
            .is_err());
    }
}
