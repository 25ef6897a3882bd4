//! Deterministic training batch construction.
//!
//! Pointwise batches hold 128 labeled (query, doc) instances at a 1:4
//! positive:negative ratio. Pairwise and listwise batches group 16 queries
//! with 1 positive and 10 negatives each (effective batch size 160).
//! Negatives are drawn seeded-uniform from the query's grade-0 candidates
//! in the BM25 top-k, i.e. from the reranker's actual decision set.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::bm25::RankedRun;
use crate::error::CoreError;
use crate::ledger::Objective;
use crate::rng::{self, Stream};
use crate::synth::Qrels;
use crate::Result;

/// Batch composition parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchConfig {
    /// Instances per pointwise batch.
    pub pointwise_batch: usize,
    /// Negatives per positive in pointwise batches.
    pub pointwise_negative_ratio: usize,
    /// Queries per pairwise/listwise batch.
    pub group_queries: usize,
    /// Negatives per query in pairwise/listwise batches.
    pub group_negatives: usize,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            pointwise_batch: 128,
            pointwise_negative_ratio: 4,
            group_queries: 16,
            group_negatives: 10,
        }
    }
}

impl BatchConfig {
    /// Training examples consumed per step under an objective.
    pub fn effective_batch_size(&self, objective: Objective) -> usize {
        match objective {
            Objective::Pointwise => self.pointwise_batch,
            Objective::Pairwise | Objective::Listwise => self.group_queries * self.group_negatives,
        }
    }
}

/// One training instance, in the shape the objective consumes.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainInstance {
    Pointwise {
        query_id: String,
        doc_id: String,
        label: u8,
    },
    Pairwise {
        query_id: String,
        positive: String,
        negative: String,
    },
    Listwise {
        query_id: String,
        doc_ids: Vec<String>,
        grades: Vec<u8>,
    },
}

struct QueryPool {
    query_id: String,
    /// Judged-positive doc ids, sorted.
    positives: Vec<(String, u8)>,
    /// Grade-0 candidates from the first-stage run, in rank order.
    negatives: Vec<String>,
}

/// Infinite seeded stream of training batches.
pub struct BatchStream<'a> {
    objective: Objective,
    config: BatchConfig,
    pools: Vec<QueryPool>,
    rng: Stream,
    _qrels: core::marker::PhantomData<&'a ()>,
}

impl<'a> BatchStream<'a> {
    /// Build per-query sampling pools. Every usable training query needs a
    /// first-stage run, at least one positive judgment, and at least one
    /// grade-0 candidate; queries missing any of these are dropped.
    pub fn new(
        objective: Objective,
        train_query_ids: &[String],
        qrels: &'a Qrels,
        runs: &'a BTreeMap<String, RankedRun>,
        config: BatchConfig,
        seed: u64,
    ) -> Result<Self> {
        if config.pointwise_batch == 0 || config.group_queries == 0 || config.group_negatives == 0 {
            return Err(CoreError::Config {
                field: "batch",
                message: "batch composition fields must be >= 1".to_string(),
            });
        }
        let mut pools = Vec::new();
        for qid in train_query_ids {
            let Some(run) = runs.get(qid) else {
                return Err(CoreError::Data {
                    message: format!("no first-stage run for training query {qid}"),
                });
            };
            let positives: Vec<(String, u8)> = qrels
                .judged(qid)
                .filter(|(_, g)| *g > 0)
                .map(|(d, g)| (d.to_string(), g))
                .collect();
            let negatives: Vec<String> = run
                .entries()
                .iter()
                .filter(|e| qrels.grade_of(qid, &e.doc_id) == 0)
                .map(|e| e.doc_id.clone())
                .collect();
            if positives.is_empty() || negatives.is_empty() {
                continue;
            }
            pools.push(QueryPool {
                query_id: qid.clone(),
                positives,
                negatives,
            });
        }
        if pools.is_empty() {
            return Err(CoreError::Precondition {
                message: "no training query has both a positive and a grade-0 candidate".into(),
            });
        }
        Ok(BatchStream {
            objective,
            config,
            pools,
            rng: rng::stream(seed, "batches"),
            _qrels: core::marker::PhantomData,
        })
    }

    /// Number of usable training queries.
    pub fn n_queries(&self) -> usize {
        self.pools.len()
    }

    pub fn next_batch(&mut self) -> Vec<TrainInstance> {
        match self.objective {
            Objective::Pointwise => self.pointwise_batch(),
            Objective::Pairwise => self.grouped_batch(false),
            Objective::Listwise => self.grouped_batch(true),
        }
    }

    fn pointwise_batch(&mut self) -> Vec<TrainInstance> {
        let period = self.config.pointwise_negative_ratio + 1;
        let mut out = Vec::with_capacity(self.config.pointwise_batch);
        for i in 0..self.config.pointwise_batch {
            let pool = &self.pools[rng::index(&mut self.rng, self.pools.len())];
            if i % period == 0 {
                let (doc, _) = &pool.positives[rng::index(&mut self.rng, pool.positives.len())];
                out.push(TrainInstance::Pointwise {
                    query_id: pool.query_id.clone(),
                    doc_id: doc.clone(),
                    label: 1,
                });
            } else {
                let doc = &pool.negatives[rng::index(&mut self.rng, pool.negatives.len())];
                out.push(TrainInstance::Pointwise {
                    query_id: pool.query_id.clone(),
                    doc_id: doc.clone(),
                    label: 0,
                });
            }
        }
        out
    }

    /// Pairwise or listwise batch: `group_queries` queries, one positive and
    /// `group_negatives` negatives each. Negatives are drawn without
    /// replacement when enough grade-0 candidates exist, with replacement
    /// otherwise.
    fn grouped_batch(&mut self, listwise: bool) -> Vec<TrainInstance> {
        let gq = self.config.group_queries;
        let gn = self.config.group_negatives;
        let query_picks: Vec<usize> = if self.pools.len() >= gq {
            rng::sample_without_replacement(&mut self.rng, self.pools.len(), gq)
        } else {
            (0..gq)
                .map(|_| rng::index(&mut self.rng, self.pools.len()))
                .collect()
        };
        let mut out = Vec::with_capacity(if listwise { gq } else { gq * gn });
        for pi in query_picks {
            let pool = &self.pools[pi];
            let (positive, pos_grade) =
                pool.positives[rng::index(&mut self.rng, pool.positives.len())].clone();
            let negs: Vec<String> = if pool.negatives.len() >= gn {
                rng::sample_without_replacement(&mut self.rng, pool.negatives.len(), gn)
                    .into_iter()
                    .map(|j| pool.negatives[j].clone())
                    .collect()
            } else {
                (0..gn)
                    .map(|_| pool.negatives[rng::index(&mut self.rng, pool.negatives.len())].clone())
                    .collect()
            };
            if listwise {
                let mut doc_ids = Vec::with_capacity(1 + gn);
                let mut grades = Vec::with_capacity(1 + gn);
                doc_ids.push(positive);
                grades.push(pos_grade);
                for n in negs {
                    doc_ids.push(n);
                    grades.push(0);
                }
                out.push(TrainInstance::Listwise {
                    query_id: pool.query_id.clone(),
                    doc_ids,
                    grades,
                });
            } else {
                for n in negs {
                    out.push(TrainInstance::Pairwise {
                        query_id: pool.query_id.clone(),
                        positive: positive.clone(),
                        negative: n,
                    });
                }
            }
        }
        out
    }
}
