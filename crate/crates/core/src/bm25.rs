//! Okapi BM25 retrieval over the synthetic corpus.
//!
//! Produces the top-k candidate sets that condition all reranking. The index
//! is immutable after construction and safe to query concurrently. Ties are
//! broken by ascending doc id so runs are reproducible.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math;
use crate::synth::SynthDoc;
use crate::Result;

/// BM25 free parameters. Defaults are the standard Okapi settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Posting {
    doc: u32,
    tf: u32,
}

/// Inverted index with exact term frequencies.
///
/// Documents are stored in ascending doc-id order, so posting lists sorted by
/// internal index are also sorted by doc id.
#[derive(Debug, Clone)]
pub struct InvertedIndex {
    postings: BTreeMap<u32, Vec<Posting>>,
    doc_ids: Vec<String>,
    doc_lengths: Vec<u32>,
    avg_doc_length: f64,
    params: Bm25Params,
}

impl InvertedIndex {
    /// Build the index from a corpus. Errors on an empty corpus.
    pub fn build(corpus: &[SynthDoc], params: Bm25Params) -> Result<Self> {
        if corpus.is_empty() {
            return Err(CoreError::Config {
                field: "corpus",
                message: "cannot index an empty corpus".to_string(),
            });
        }
        let mut order: Vec<usize> = (0..corpus.len()).collect();
        order.sort_by(|&a, &b| corpus[a].doc_id.cmp(&corpus[b].doc_id));

        let mut doc_ids = Vec::with_capacity(corpus.len());
        let mut doc_lengths = Vec::with_capacity(corpus.len());
        let mut postings: BTreeMap<u32, Vec<Posting>> = BTreeMap::new();
        for (idx, &ci) in order.iter().enumerate() {
            let doc = &corpus[ci];
            if idx > 0 && doc_ids[idx - 1] == doc.doc_id {
                return Err(CoreError::Data {
                    message: format!("duplicate doc id {}", doc.doc_id),
                });
            }
            doc_ids.push(doc.doc_id.clone());
            doc_lengths.push(doc.tokens.len() as u32);
            let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
            for &t in &doc.tokens {
                *counts.entry(t).or_insert(0) += 1;
            }
            for (term, tf) in counts {
                postings.entry(term).or_default().push(Posting {
                    doc: idx as u32,
                    tf,
                });
            }
        }
        let total: u64 = doc_lengths.iter().map(|&l| u64::from(l)).sum();
        let avg_doc_length = total as f64 / doc_lengths.len() as f64;
        Ok(InvertedIndex {
            postings,
            doc_ids,
            doc_lengths,
            avg_doc_length,
            params,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    /// Internal index of a doc id, if present.
    pub fn doc_index(&self, doc_id: &str) -> Option<usize> {
        self.doc_ids.binary_search_by(|d| d.as_str().cmp(doc_id)).ok()
    }

    pub fn doc_length(&self, doc_id: &str) -> Option<u32> {
        self.doc_index(doc_id).map(|i| self.doc_lengths[i])
    }

    /// Term frequency of `term` in `doc_id` (0 when absent).
    pub fn term_frequency(&self, term: u32, doc_id: &str) -> Option<u32> {
        let idx = self.doc_index(doc_id)? as u32;
        Some(
            self.postings
                .get(&term)
                .and_then(|list| {
                    list.binary_search_by(|p| p.doc.cmp(&idx))
                        .ok()
                        .map(|i| list[i].tf)
                })
                .unwrap_or(0),
        )
    }

    /// Document frequency of a term.
    pub fn document_frequency(&self, term: u32) -> usize {
        self.postings.get(&term).map_or(0, Vec::len)
    }

    /// Inverse document frequency, `ln(N / (df + 0.5) + 1)`. The `+ 1`
    /// inside the log keeps scores nonnegative for arbitrarily common terms.
    pub fn idf(&self, term: u32) -> f64 {
        let n = self.n_docs() as f64;
        let df = self.document_frequency(term) as f64;
        math::ln(n / (df + 0.5) + 1.0)
    }

    fn tf_component(&self, tf: u32, doc_len: u32) -> f64 {
        let Bm25Params { k1, b } = self.params;
        let tf = tf as f64;
        let norm = 1.0 - b + b * (doc_len as f64 / self.avg_doc_length);
        tf * (k1 + 1.0) / (tf + k1 * norm)
    }

    /// BM25 score of one document for a query. Repeated query terms count
    /// with multiplicity. Errors if the doc id is unknown.
    pub fn score(&self, query_tokens: &[u32], doc_id: &str) -> Result<f64> {
        let idx = self.doc_index(doc_id).ok_or_else(|| CoreError::Lookup {
            what: format!("doc id {doc_id}"),
        })?;
        let len = self.doc_lengths[idx];
        let mut score = 0.0;
        for &term in query_tokens {
            let tf = self
                .postings
                .get(&term)
                .and_then(|list| {
                    list.binary_search_by(|p| p.doc.cmp(&(idx as u32)))
                        .ok()
                        .map(|i| list[i].tf)
                })
                .unwrap_or(0);
            if tf > 0 {
                score += self.idf(term) * self.tf_component(tf, len);
            }
        }
        Ok(score)
    }

    /// Top-k documents by BM25 score, ties broken by ascending doc id.
    /// Only docs with a nonzero score are returned, so the run may be
    /// shorter than `k`.
    pub fn retrieve_topk(&self, query_id: &str, query_tokens: &[u32], k: usize) -> Result<RankedRun> {
        if k == 0 {
            return Err(CoreError::Argument {
                message: "k must be >= 1".to_string(),
            });
        }
        // Term-at-a-time accumulation in query-token order. Per document this
        // adds contributions in exactly the order `score` does, so the two
        // paths agree bit-for-bit.
        let mut scores: Vec<f64> = alloc::vec![0.0; self.n_docs()];
        let mut touched: Vec<bool> = alloc::vec![false; self.n_docs()];
        for &term in query_tokens {
            if let Some(list) = self.postings.get(&term) {
                let idf = self.idf(term);
                for p in list {
                    let d = p.doc as usize;
                    scores[d] += idf * self.tf_component(p.tf, self.doc_lengths[d]);
                    touched[d] = true;
                }
            }
        }
        let mut hits: Vec<(usize, f64)> = (0..self.n_docs())
            .filter(|&d| touched[d] && scores[d] > 0.0)
            .map(|d| (d, scores[d]))
            .collect();
        // Descending score; ascending internal index == ascending doc id.
        hits.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite scores").then(a.0.cmp(&b.0)));
        hits.truncate(k);
        let entries = hits
            .into_iter()
            .zip(1u32..)
            .map(|((d, s), rank)| RunEntry {
                doc_id: self.doc_ids[d].clone(),
                score: s,
                rank,
            })
            .collect();
        RankedRun::new(query_id.to_string(), entries)
    }
}

/// One entry of a ranked run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub doc_id: String,
    pub score: f64,
    pub rank: u32,
}

/// A per-query ordered candidate list: the exchange object between the
/// retriever, the reranker, and the metrics.
///
/// Invariants: scores non-increasing with rank, ranks consecutive from 1,
/// doc ids distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedRun {
    pub query_id: String,
    entries: Vec<RunEntry>,
}

impl RankedRun {
    /// Validate and wrap entries. Errors name the offending query.
    pub fn new(query_id: String, entries: Vec<RunEntry>) -> Result<Self> {
        let mut seen = alloc::collections::BTreeSet::new();
        for (i, e) in entries.iter().enumerate() {
            if e.rank != (i + 1) as u32 {
                return Err(CoreError::Data {
                    message: format!(
                        "run for query {query_id}: rank {} at position {} (expected {})",
                        e.rank,
                        i,
                        i + 1
                    ),
                });
            }
            if !e.score.is_finite() {
                return Err(CoreError::Data {
                    message: format!("run for query {query_id}: non-finite score at rank {}", e.rank),
                });
            }
            if i > 0 && entries[i - 1].score < e.score {
                return Err(CoreError::Data {
                    message: format!(
                        "run for query {query_id}: score increases at rank {}",
                        e.rank
                    ),
                });
            }
            if !seen.insert(e.doc_id.as_str()) {
                return Err(CoreError::Data {
                    message: format!("run for query {query_id}: duplicate doc id {}", e.doc_id),
                });
            }
        }
        Ok(RankedRun { query_id, entries })
    }

    /// Sort scored docs (descending score, ascending doc id), assign ranks.
    pub fn from_scored(query_id: String, mut scored: Vec<(String, f64)>) -> Result<Self> {
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(core::cmp::Ordering::Equal)
                .then_with(|| a.0.cmp(&b.0))
        });
        let entries = scored
            .into_iter()
            .zip(1u32..)
            .map(|((doc_id, score), rank)| RunEntry { doc_id, score, rank })
            .collect();
        RankedRun::new(query_id, entries)
    }

    pub fn entries(&self) -> &[RunEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn doc(id: &str, tokens: &[u32]) -> SynthDoc {
        SynthDoc {
            doc_id: id.to_string(),
            tokens: tokens.to_vec(),
            latent: vec![1.0],
        }
    }

    #[test]
    fn counts_and_average_length() {
        let corpus = vec![doc("d1", &[0, 0, 1])];
        let index = InvertedIndex::build(&corpus, Bm25Params::default()).unwrap();
        assert_eq!(index.doc_length("d1"), Some(3));
        assert_eq!(index.term_frequency(0, "d1"), Some(2));
        assert_eq!(index.term_frequency(1, "d1"), Some(1));

        let corpus = vec![doc("d1", &[0, 1]), doc("d2", &[0, 1, 2, 3])];
        let index = InvertedIndex::build(&corpus, Bm25Params::default()).unwrap();
        assert!((index.avg_doc_length() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn rebuild_is_identical() {
        let corpus = vec![doc("d2", &[5, 6]), doc("d1", &[5, 5, 7])];
        let a = InvertedIndex::build(&corpus, Bm25Params::default()).unwrap();
        let b = InvertedIndex::build(&corpus, Bm25Params::default()).unwrap();
        assert_eq!(a.postings, b.postings);
        assert_eq!(a.doc_ids, b.doc_ids);
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(matches!(
            InvertedIndex::build(&[], Bm25Params::default()),
            Err(CoreError::Config { field: "corpus", .. })
        ));
    }

    #[test]
    fn disjoint_query_scores_zero() {
        let corpus = vec![doc("d1", &[0, 1])];
        let index = InvertedIndex::build(&corpus, Bm25Params::default()).unwrap();
        assert_eq!(index.score(&[9, 10], "d1").unwrap(), 0.0);
    }

    #[test]
    fn single_doc_hand_score() {
        // One doc "a b", query "a": idf = ln(1/1.5 + 1) = ln(5/3), tf part
        // = 1 * 2.2 / (1 + 1.2) = 1, so the score is ln(5/3) ~ 0.5108.
        let corpus = vec![doc("d1", &[0, 1])];
        let index = InvertedIndex::build(&corpus, Bm25Params::default()).unwrap();
        let score = index.score(&[0], "d1").unwrap();
        let expected = (1.0f64 / 1.5 + 1.0).ln();
        assert!((score - expected).abs() < 1e-12);
        assert!((score - 0.5108).abs() < 1e-4);
    }

    #[test]
    fn unknown_doc_is_lookup_error() {
        let corpus = vec![doc("d1", &[0])];
        let index = InvertedIndex::build(&corpus, Bm25Params::default()).unwrap();
        assert!(matches!(
            index.score(&[0], "nope"),
            Err(CoreError::Lookup { .. })
        ));
    }

    #[test]
    fn tf_saturates() {
        let corpus = vec![doc("d1", &[0, 1, 2, 3]), doc("d2", &[0, 0, 1, 2])];
        let index = InvertedIndex::build(&corpus, Bm25Params::default()).unwrap();
        let s1 = index.score(&[0], "d1").unwrap();
        let s2 = index.score(&[0], "d2").unwrap();
        assert!(s2 > s1, "doubling tf must increase the score");
        assert!(s2 < 2.0 * s1, "but by less than double");
    }

    #[test]
    fn repeated_query_terms_count() {
        let corpus = vec![doc("d1", &[0, 1]), doc("d2", &[2, 3])];
        let index = InvertedIndex::build(&corpus, Bm25Params::default()).unwrap();
        let once = index.score(&[0], "d1").unwrap();
        let twice = index.score(&[0, 0], "d1").unwrap();
        assert!((twice - 2.0 * once).abs() < 1e-12);
    }

    #[test]
    fn topk_unique_candidate() {
        let corpus = vec![doc("d1", &[0, 1]), doc("d2", &[2, 3]), doc("d3", &[4])];
        let index = InvertedIndex::build(&corpus, Bm25Params::default()).unwrap();
        let run = index.retrieve_topk("q", &[2], 1).unwrap();
        assert_eq!(run.len(), 1);
        assert_eq!(run.entries()[0].doc_id, "d2");
        assert_eq!(run.entries()[0].rank, 1);
    }

    #[test]
    fn topk_ties_break_by_doc_id() {
        let corpus = vec![doc("d2", &[0]), doc("d1", &[0])];
        let index = InvertedIndex::build(&corpus, Bm25Params::default()).unwrap();
        let run = index.retrieve_topk("q", &[0], 2).unwrap();
        assert_eq!(run.entries()[0].doc_id, "d1");
        assert_eq!(run.entries()[1].doc_id, "d2");
        assert_eq!(run.entries()[0].score, run.entries()[1].score);
    }

    #[test]
    fn topk_truncates_to_nonzero_scores() {
        let corpus = vec![doc("d1", &[0]), doc("d2", &[1]), doc("d3", &[2])];
        let index = InvertedIndex::build(&corpus, Bm25Params::default()).unwrap();
        let run = index.retrieve_topk("q", &[0], 3).unwrap();
        assert_eq!(run.len(), 1, "zero-score docs must not pad the run");
    }

    #[test]
    fn ranked_run_validation() {
        let entries = vec![
            RunEntry { doc_id: "a".into(), score: 2.0, rank: 1 },
            RunEntry { doc_id: "b".into(), score: 1.0, rank: 3 },
        ];
        assert!(RankedRun::new("q".into(), entries).is_err());

        let entries = vec![
            RunEntry { doc_id: "a".into(), score: 1.0, rank: 1 },
            RunEntry { doc_id: "b".into(), score: 2.0, rank: 2 },
        ];
        assert!(RankedRun::new("q".into(), entries).is_err());

        let entries = vec![
            RunEntry { doc_id: "a".into(), score: 2.0, rank: 1 },
            RunEntry { doc_id: "a".into(), score: 1.0, rank: 2 },
        ];
        assert!(RankedRun::new("q".into(), entries).is_err());
    }
}
