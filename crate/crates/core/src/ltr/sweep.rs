//! The capacity/exposure sweep: train every (objective, size) combination,
//! evaluate every checkpoint on the held-out queries, and emit one ledger
//! record per (checkpoint, metric).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::bm25::RankedRun;
use crate::error::CoreError;
use crate::ledger::{LedgerRecord, Objective};
use crate::metrics::{evaluate_checkpoint, ALL_METRICS};
use crate::rng;
use crate::synth::Qrels;
use crate::Result;

use super::batch::BatchConfig;
use super::features::Featurizer;
use super::scorer::ScorerConfig;
use super::train::{train_run, Checkpoint, TrainData, TrainSchedule};

/// Inputs of a sweep. Per-run seeds (scorer init, batch sampling) are
/// derived from `seed`, the objective, and the width, so every run is
/// independent and reproducible.
pub struct SweepRequest<'a> {
    pub objectives: &'a [Objective],
    /// Size grid; must be strictly increasing in parameter count.
    pub widths: &'a [usize],
    pub depth: usize,
    pub schedule: TrainSchedule,
    pub featurizer: &'a Featurizer<'a>,
    pub qrels: &'a Qrels,
    pub runs: &'a BTreeMap<String, RankedRun>,
    pub train_query_ids: &'a [String],
    pub eval_query_ids: &'a [String],
    pub batch_config: BatchConfig,
    pub ce_negatives: usize,
    pub seed: u64,
    pub dataset: &'a str,
    pub run_tag: &'a str,
}

impl SweepRequest<'_> {
    /// Scorer configs for the grid, with derived init seeds.
    pub fn scorer_configs(&self, objective: Objective) -> Vec<ScorerConfig> {
        self.widths
            .iter()
            .map(|&width| ScorerConfig {
                width,
                depth: self.depth,
                feature_dim: self.featurizer.feature_dim(),
                seed: rng::substream_seed(self.seed, &format!("init/{objective}/{width}")),
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.widths.len() < 2 {
            return Err(CoreError::Precondition {
                message: "sweep needs at least 2 scorer configs".into(),
            });
        }
        let f = self.featurizer.feature_dim();
        let mut prev = 0u64;
        for &w in self.widths {
            let count = ScorerConfig {
                width: w,
                depth: self.depth,
                feature_dim: f,
                seed: 0,
            }
            .param_count();
            if count <= prev {
                return Err(CoreError::Config {
                    field: "widths",
                    message: "size grid must be strictly increasing in param count".to_string(),
                });
            }
            prev = count;
        }
        Ok(())
    }
}

/// Run the sweep. `skip` holds `(objective, param_count)` pairs whose ledger
/// records already exist (resumption); those runs are not retrained. The
/// checkpoint callback fires for every fresh checkpoint, in deterministic
/// order, before its records are emitted.
///
/// Records come out sorted by (objective order given, size, step, metric).
pub fn sweep<F>(
    request: &SweepRequest<'_>,
    skip: &BTreeSet<(Objective, u64)>,
    mut on_checkpoint: F,
) -> Result<Vec<LedgerRecord>>
where
    F: FnMut(Objective, &ScorerConfig, &Checkpoint) -> Result<()>,
{
    request.validate()?;
    let eval_seed = rng::substream_seed(request.seed, "eval-ce");
    let mut records = Vec::new();

    for &objective in request.objectives {
        for config in request.scorer_configs(objective) {
            let m = config.param_count();
            if skip.contains(&(objective, m)) {
                continue;
            }
            let data = TrainData {
                featurizer: request.featurizer,
                qrels: request.qrels,
                runs: request.runs,
                train_query_ids: request.train_query_ids,
                batch_config: request.batch_config,
                batch_seed: rng::substream_seed(
                    request.seed,
                    &format!("batch/{objective}/{}", config.width),
                ),
            };
            let checkpoints = train_run(objective, &config, &data, &request.schedule)?;
            for cp in &checkpoints {
                on_checkpoint(objective, &config, cp)?;
                let ws = core::cell::RefCell::new(super::scorer::Workspace::new(&config));
                let report = evaluate_checkpoint(
                    |qid, did| {
                        let x = request
                            .featurizer
                            .features(qid, did)
                            .expect("eval pair from indexed benchmark");
                        cp.scorer.forward(&x, &mut ws.borrow_mut())
                    },
                    request.eval_query_ids,
                    request.runs,
                    request.qrels,
                    request.ce_negatives,
                    eval_seed,
                )?;
                for metric in ALL_METRICS {
                    records.push(LedgerRecord {
                        objective,
                        model_params: m,
                        step: cp.step,
                        examples: cp.examples_consumed,
                        metric,
                        value: report.value(metric),
                        dataset: request.dataset.to_string(),
                        run_tag: request.run_tag.to_string(),
                    });
                }
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bm25::{Bm25Params, InvertedIndex};
    use crate::ledger::ALL_OBJECTIVES;
    use crate::synth::{build_qrels, generate_benchmark, BenchmarkConfig};

    /// Tiny end-to-end sweep: checks record cardinality, exact param counts,
    /// determinism, and resumption with a skip set.
    #[test]
    fn tiny_sweep_cardinality_and_resume() {
        let cfg = BenchmarkConfig {
            n_docs: 200,
            n_queries: 12,
            vocab_size: 1000,
            latent_dim: 4,
            seed: 9,
        };
        let mut bench = generate_benchmark(&cfg).unwrap();
        let qrels = build_qrels(&mut bench).unwrap();
        let index = InvertedIndex::build(&bench.corpus, Bm25Params::default()).unwrap();
        let mut runs = BTreeMap::new();
        for q in &bench.queries {
            runs.insert(
                q.query_id.clone(),
                index.retrieve_topk(&q.query_id, &q.tokens, 50).unwrap(),
            );
        }
        let featurizer = Featurizer::new(&index, &bench.corpus, &bench.queries, &runs).unwrap();
        let ids: Vec<String> = bench.queries.iter().map(|q| q.query_id.clone()).collect();
        let (train_ids, eval_ids) = ids.split_at(6);

        let request = SweepRequest {
            objectives: &ALL_OBJECTIVES,
            widths: &[2, 4],
            depth: 1,
            schedule: TrainSchedule {
                n_steps: 6,
                n_checkpoints: 3,
                learning_rate: 1e-3,
            },
            featurizer: &featurizer,
            qrels: &qrels,
            runs: &runs,
            train_query_ids: train_ids,
            eval_query_ids: eval_ids,
            batch_config: BatchConfig {
                pointwise_batch: 16,
                pointwise_negative_ratio: 4,
                group_queries: 4,
                group_negatives: 5,
            },
            ce_negatives: 16,
            seed: 31,
            dataset: "tiny",
            run_tag: "test",
        };

        let mut n_checkpoints = 0usize;
        let records = sweep(&request, &BTreeSet::new(), |_, _, _| {
            n_checkpoints += 1;
            Ok(())
        })
        .unwrap();
        // 3 objectives x 2 sizes x 3 checkpoints x 4 metrics.
        assert_eq!(records.len(), 72);
        assert_eq!(n_checkpoints, 18);
        let f = featurizer.feature_dim() as u64;
        for r in &records {
            assert!(r.model_params == 2 * f + 2 + 2 + 1 || r.model_params == 4 * f + 4 + 4 + 1);
            r.validate().unwrap();
        }

        // Determinism.
        let again = sweep(&request, &BTreeSet::new(), |_, _, _| Ok(())).unwrap();
        assert_eq!(records, again);

        // Resuming with everything completed trains nothing.
        let all: BTreeSet<(Objective, u64)> =
            records.iter().map(|r| (r.objective, r.model_params)).collect();
        let rest = sweep(&request, &all, |_, _, _| panic!("should not train")).unwrap();
        assert!(rest.is_empty());

        // Skipping one run drops exactly its records.
        let mut one = BTreeSet::new();
        one.insert((Objective::Pairwise, records[0].model_params));
        let partial = sweep(&request, &one, |_, _, _| Ok(())).unwrap();
        assert_eq!(partial.len(), 72 - 12);
    }

    #[test]
    fn sweep_needs_two_sizes() {
        let cfg = BenchmarkConfig {
            n_docs: 200,
            n_queries: 12,
            vocab_size: 1000,
            latent_dim: 4,
            seed: 9,
        };
        let mut bench = generate_benchmark(&cfg).unwrap();
        let qrels = build_qrels(&mut bench).unwrap();
        let index = InvertedIndex::build(&bench.corpus, Bm25Params::default()).unwrap();
        let runs = BTreeMap::new();
        let featurizer = Featurizer::new(&index, &bench.corpus, &bench.queries, &runs).unwrap();
        let ids: Vec<String> = bench.queries.iter().map(|q| q.query_id.clone()).collect();
        let request = SweepRequest {
            objectives: &ALL_OBJECTIVES,
            widths: &[4],
            depth: 1,
            schedule: TrainSchedule {
                n_steps: 2,
                n_checkpoints: 1,
                learning_rate: 1e-3,
            },
            featurizer: &featurizer,
            qrels: &qrels,
            runs: &runs,
            train_query_ids: &ids,
            eval_query_ids: &ids,
            batch_config: BatchConfig::default(),
            ce_negatives: 4,
            seed: 1,
            dataset: "tiny",
            run_tag: "test",
        };
        assert!(matches!(
            sweep(&request, &BTreeSet::new(), |_, _, _| Ok(())),
            Err(CoreError::Precondition { .. })
        ));
    }
}
