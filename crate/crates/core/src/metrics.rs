//! Ranking quality metrics over first-stage candidate sets.
//!
//! NDCG@k, MAP, and MRR depend only on the ordering of graded documents;
//! contrastive entropy (CE) is the continuous proxy: the negative
//! log-probability of ranking a relevant document above sampled negatives,
//! computed on z-score-normalized scores over the candidate pool.
//!
//! All operations are pure. Per-query CE negative sampling is seeded by
//! `hash(seed, query_id)`, so evaluation order never changes results.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::bm25::RankedRun;
use crate::error::CoreError;
use crate::math;
use crate::rng;
use crate::synth::Qrels;
use crate::Result;

/// The evaluation metrics of this artifact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MetricName {
    NdcgAt10,
    Map,
    Mrr,
    Ce,
}

/// Fixed metric order used for ledgers and reports.
pub const ALL_METRICS: [MetricName; 4] = [
    MetricName::NdcgAt10,
    MetricName::Map,
    MetricName::Mrr,
    MetricName::Ce,
];

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MetricName::NdcgAt10 => "ndcg@10",
            MetricName::Map => "map",
            MetricName::Mrr => "mrr",
            MetricName::Ce => "ce",
        };
        f.write_str(s)
    }
}

impl FromStr for MetricName {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ndcg@10" => Ok(MetricName::NdcgAt10),
            "map" => Ok(MetricName::Map),
            "mrr" => Ok(MetricName::Mrr),
            "ce" => Ok(MetricName::Ce),
            other => Err(CoreError::Argument {
                message: format!("unknown metric {other:?}"),
            }),
        }
    }
}

fn gain(grade: u8) -> f64 {
    (1u64 << grade) as f64 - 1.0
}

fn log2(x: f64) -> f64 {
    math::log2(x)
}

/// NDCG at cutoff `k`. The ideal DCG ranks *all* judged docs for the query,
/// not just retrieved ones, so first-stage recall misses are penalized.
/// Unjudged docs count as grade 0; if the ideal DCG is 0 the result is 0.
pub fn ndcg_at_k(run: &RankedRun, qrels: &Qrels, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(CoreError::Argument {
            message: "k must be >= 1".to_string(),
        });
    }
    let mut dcg = 0.0;
    for (i, entry) in run.entries().iter().take(k).enumerate() {
        let g = qrels.grade_of(&run.query_id, &entry.doc_id);
        dcg += gain(g) / log2((i + 2) as f64);
    }
    let mut grades: Vec<u8> = qrels.judged(&run.query_id).map(|(_, g)| g).collect();
    grades.sort_unstable_by(|a, b| b.cmp(a));
    let mut idcg = 0.0;
    for (i, &g) in grades.iter().take(k).enumerate() {
        idcg += gain(g) / log2((i + 2) as f64);
    }
    if idcg <= 0.0 {
        return Ok(0.0);
    }
    Ok(dcg / idcg)
}

/// Average precision with binary relevance (grade > 0). The denominator is
/// the total number of judged-relevant docs, retrieved or not.
pub fn average_precision(run: &RankedRun, qrels: &Qrels) -> f64 {
    let total_relevant = qrels.n_relevant(&run.query_id);
    if total_relevant == 0 {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, entry) in run.entries().iter().enumerate() {
        if qrels.grade_of(&run.query_id, &entry.doc_id) > 0 {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    sum / total_relevant as f64
}

/// Reciprocal rank of the first relevant doc; 0 when none is retrieved.
pub fn reciprocal_rank(run: &RankedRun, qrels: &Qrels) -> f64 {
    for (i, entry) in run.entries().iter().enumerate() {
        if qrels.grade_of(&run.query_id, &entry.doc_id) > 0 {
            return 1.0 / (i + 1) as f64;
        }
    }
    0.0
}

/// Arithmetic mean of NDCG@k over runs.
pub fn mean_ndcg_at_k(runs: &[RankedRun], qrels: &Qrels, k: usize) -> Result<f64> {
    if runs.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for run in runs {
        total += ndcg_at_k(run, qrels, k)?;
    }
    Ok(total / runs.len() as f64)
}

/// Arithmetic mean of average precision over runs.
pub fn mean_average_precision(runs: &[RankedRun], qrels: &Qrels) -> f64 {
    if runs.is_empty() {
        return 0.0;
    }
    runs.iter().map(|r| average_precision(r, qrels)).sum::<f64>() / runs.len() as f64
}

/// Arithmetic mean of reciprocal rank over runs.
pub fn mean_reciprocal_rank(runs: &[RankedRun], qrels: &Qrels) -> f64 {
    if runs.is_empty() {
        return 0.0;
    }
    runs.iter().map(|r| reciprocal_rank(r, qrels)).sum::<f64>() / runs.len() as f64
}

/// Z-score normalization with the population standard deviation. Lists with
/// std below 1e-12 (including singletons) come back all-zero.
pub fn normalize_scores(scores: &[f64]) -> Vec<f64> {
    let n = scores.len();
    if n == 0 {
        return Vec::new();
    }
    let mean = scores.iter().sum::<f64>() / n as f64;
    let var = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n as f64;
    let std = math::sqrt(var);
    if std < 1e-12 {
        return alloc::vec![0.0; n];
    }
    scores.iter().map(|s| (s - mean) / std).collect()
}

/// Negative log-probability of ranking the positive above the negatives,
/// via log-sum-exp. With no negatives the probability is 1 and CE is 0.
pub fn contrastive_entropy(positive_score: f64, negative_scores: &[f64]) -> f64 {
    if negative_scores.is_empty() {
        return 0.0;
    }
    let mut max = positive_score;
    for &s in negative_scores {
        if s > max {
            max = s;
        }
    }
    let mut sum = math::exp(positive_score - max);
    for &s in negative_scores {
        sum += math::exp(s - max);
    }
    -(positive_score - max - math::ln(sum))
}

/// CE for one query over its first-stage candidates.
///
/// For each judged-positive doc present in the run: sample up to
/// `n_negatives` grade-0 candidates (seeded, without replacement; all of them
/// if fewer are available), normalize the joint score list, and accumulate
/// the contrastive entropy. Returns `None` when the run contains no positive,
/// which callers count as a skipped query.
///
/// `scores` must align with `run.entries()`.
pub fn ce_for_query(
    run: &RankedRun,
    scores: &[f64],
    qrels: &Qrels,
    n_negatives: usize,
    seed: u64,
) -> Result<Option<f64>> {
    if scores.len() != run.len() {
        return Err(CoreError::Shape {
            expected: run.len(),
            got: scores.len(),
        });
    }
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for (i, entry) in run.entries().iter().enumerate() {
        if qrels.grade_of(&run.query_id, &entry.doc_id) > 0 {
            positives.push(i);
        } else {
            negatives.push(i);
        }
    }
    if positives.is_empty() {
        return Ok(None);
    }
    let mut rng = rng::stream(seed, &format!("ce/{}", run.query_id));
    let mut total = 0.0;
    for &p in &positives {
        let picked = rng::sample_without_replacement(&mut rng, negatives.len(), n_negatives);
        let mut joint = Vec::with_capacity(picked.len() + 1);
        joint.push(scores[p]);
        joint.extend(picked.iter().map(|&j| scores[negatives[j]]));
        let normed = normalize_scores(&joint);
        total += contrastive_entropy(normed[0], &normed[1..]);
    }
    Ok(Some(total / positives.len() as f64))
}

/// Per-query values retained for aggregation audits.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryMetrics {
    pub query_id: String,
    pub ndcg_at_10: f64,
    pub average_precision: f64,
    pub reciprocal_rank: f64,
    /// `None` when the query had no positive in the candidate set.
    pub ce: Option<f64>,
}

/// Aggregate evaluation of one checkpoint over the evaluation queries.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub ndcg_at_10: f64,
    pub map: f64,
    pub mrr: f64,
    pub ce: f64,
    pub per_query: Vec<QueryMetrics>,
    /// Queries skipped by CE because no positive appeared in the top-k.
    pub ce_skipped: usize,
    /// Reranked runs, for serialization and external cross-checking.
    pub reranked: Vec<RankedRun>,
}

impl MetricReport {
    pub fn value(&self, metric: MetricName) -> f64 {
        match metric {
            MetricName::NdcgAt10 => self.ndcg_at_10,
            MetricName::Map => self.map,
            MetricName::Mrr => self.mrr,
            MetricName::Ce => self.ce,
        }
    }
}

/// Number of CE negatives used throughout the artifact.
pub const DEFAULT_CE_NEGATIVES: usize = 64;

/// Rerank each query's candidates with `score_fn`, then compute NDCG@10,
/// MAP, MRR on the reranked runs and CE over the original candidate sets.
/// Ties in reranked scores break by ascending doc id.
pub fn evaluate_checkpoint<F>(
    score_fn: F,
    eval_query_ids: &[String],
    bm25_runs: &BTreeMap<String, RankedRun>,
    qrels: &Qrels,
    ce_negatives: usize,
    eval_seed: u64,
) -> Result<MetricReport>
where
    F: Fn(&str, &str) -> f64,
{
    let mut per_query = Vec::with_capacity(eval_query_ids.len());
    let mut reranked_runs = Vec::with_capacity(eval_query_ids.len());
    let mut ce_skipped = 0usize;
    let (mut ndcg_sum, mut ap_sum, mut rr_sum, mut ce_sum, mut ce_n) = (0.0, 0.0, 0.0, 0.0, 0usize);

    for qid in eval_query_ids {
        let run = bm25_runs.get(qid).ok_or_else(|| CoreError::Data {
            message: format!("no first-stage run for query {qid}"),
        })?;
        let scores: Vec<f64> = run
            .entries()
            .iter()
            .map(|e| score_fn(qid, &e.doc_id))
            .collect();
        let scored: Vec<(String, f64)> = run
            .entries()
            .iter()
            .zip(&scores)
            .map(|(e, &s)| (e.doc_id.clone(), s))
            .collect();
        let reranked = RankedRun::from_scored(qid.clone(), scored)?;

        let ndcg = ndcg_at_k(&reranked, qrels, 10)?;
        let ap = average_precision(&reranked, qrels);
        let rr = reciprocal_rank(&reranked, qrels);
        let ce = ce_for_query(run, &scores, qrels, ce_negatives, eval_seed)?;
        match ce {
            Some(v) => {
                ce_sum += v;
                ce_n += 1;
            }
            None => ce_skipped += 1,
        }
        ndcg_sum += ndcg;
        ap_sum += ap;
        rr_sum += rr;
        per_query.push(QueryMetrics {
            query_id: qid.clone(),
            ndcg_at_10: ndcg,
            average_precision: ap,
            reciprocal_rank: rr,
            ce,
        });
        reranked_runs.push(reranked);
    }

    let n = eval_query_ids.len().max(1) as f64;
    Ok(MetricReport {
        ndcg_at_10: ndcg_sum / n,
        map: ap_sum / n,
        mrr: rr_sum / n,
        ce: if ce_n > 0 { ce_sum / ce_n as f64 } else { 0.0 },
        per_query,
        ce_skipped,
        reranked: reranked_runs,
    })
}
