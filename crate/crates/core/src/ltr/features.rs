//! Interaction features for (query, document) pairs.
//!
//! The feature vector has dimension `2 * latent_dim + 4`: the elementwise
//! product of the latents, their absolute difference, the BM25 score,
//! `ln(1 + term overlap)`, and the log lengths of query and document.
//!
//! The latent blocks carry fixed variance-normalizing factors and the four
//! scalar features are z-scored against the first-stage candidate pool, so
//! all inputs land on a comparable scale for the tanh scorer. The scaling
//! statistics are computed once per benchmark and are fully deterministic.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bm25::{InvertedIndex, RankedRun};
use crate::math;
use crate::error::CoreError;
use crate::synth::{SynthDoc, SynthQuery};
use crate::Result;

/// Number of scalar (non-latent) features.
const N_SCALAR: usize = 4;

/// Feature extractor bound to one benchmark.
///
/// Feature vectors are memoized: training and evaluation revisit the same
/// few thousand (query, candidate) pairs millions of times. The cache is a
/// `RefCell`, so the featurizer is single-threaded, matching the rest of
/// the training path.
pub struct Featurizer<'a> {
    index: &'a InvertedIndex,
    docs: BTreeMap<&'a str, &'a SynthDoc>,
    queries: BTreeMap<&'a str, &'a SynthQuery>,
    /// Sorted unique terms per doc, for overlap counting.
    doc_terms: BTreeMap<&'a str, Vec<u32>>,
    /// Sorted unique terms per query.
    query_terms: BTreeMap<&'a str, Vec<u32>>,
    latent_dim: usize,
    /// Mean and inverse std of each scalar feature over the candidate pool.
    scaler: [(f64, f64); N_SCALAR],
    cache: core::cell::RefCell<BTreeMap<(&'a str, &'a str), alloc::rc::Rc<Vec<f64>>>>,
}

impl<'a> Featurizer<'a> {
    /// Build the extractor and fit the scalar-feature scaler over every
    /// `(query, candidate)` pair in `runs`.
    pub fn new(
        index: &'a InvertedIndex,
        corpus: &'a [SynthDoc],
        queries: &'a [SynthQuery],
        runs: &BTreeMap<String, RankedRun>,
    ) -> Result<Self> {
        let latent_dim = corpus
            .first()
            .map(|d| d.latent.len())
            .ok_or_else(|| CoreError::Config {
                field: "corpus",
                message: "empty corpus".into(),
            })?;
        let docs: BTreeMap<&str, &SynthDoc> =
            corpus.iter().map(|d| (d.doc_id.as_str(), d)).collect();
        let query_map: BTreeMap<&str, &SynthQuery> =
            queries.iter().map(|q| (q.query_id.as_str(), q)).collect();
        let mut doc_terms = BTreeMap::new();
        for d in corpus {
            let mut terms = d.tokens.clone();
            terms.sort_unstable();
            terms.dedup();
            doc_terms.insert(d.doc_id.as_str(), terms);
        }
        let mut query_terms = BTreeMap::new();
        for q in queries {
            let mut terms = q.tokens.clone();
            terms.sort_unstable();
            terms.dedup();
            query_terms.insert(q.query_id.as_str(), terms);
        }
        let mut featurizer = Featurizer {
            index,
            docs,
            queries: query_map,
            doc_terms,
            query_terms,
            latent_dim,
            scaler: [(0.0, 1.0); N_SCALAR],
            cache: core::cell::RefCell::new(BTreeMap::new()),
        };

        let mut sums = [0.0; N_SCALAR];
        let mut sq_sums = [0.0; N_SCALAR];
        let mut n = 0usize;
        for run in runs.values() {
            let Some(query) = featurizer.queries.get(run.query_id.as_str()) else {
                continue;
            };
            for entry in run.entries() {
                let raw = featurizer.raw_scalars(query, &entry.doc_id)?;
                for (i, v) in raw.iter().enumerate() {
                    sums[i] += v;
                    sq_sums[i] += v * v;
                }
                n += 1;
            }
        }
        if n > 0 {
            for i in 0..N_SCALAR {
                let mean = sums[i] / n as f64;
                let var = (sq_sums[i] / n as f64 - mean * mean).max(0.0);
                let std = math::sqrt(var);
                featurizer.scaler[i] = (mean, if std > 1e-12 { 1.0 / std } else { 1.0 });
            }
        }
        Ok(featurizer)
    }

    pub fn feature_dim(&self) -> usize {
        2 * self.latent_dim + N_SCALAR
    }

    fn raw_scalars(&self, query: &SynthQuery, doc_id: &str) -> Result<[f64; N_SCALAR]> {
        let bm25 = self.index.score(&query.tokens, doc_id)?;
        let terms = self.doc_terms.get(doc_id).ok_or_else(|| CoreError::Lookup {
            what: format!("doc id {doc_id}"),
        })?;
        let qterms = self
            .query_terms
            .get(query.query_id.as_str())
            .ok_or_else(|| CoreError::Lookup {
                what: format!("query id {}", query.query_id),
            })?;
        let overlap = qterms
            .iter()
            .filter(|t| terms.binary_search(t).is_ok())
            .count();
        let doc_len = self.index.doc_length(doc_id).unwrap_or(0);
        Ok([
            bm25,
            math::ln(1.0 + overlap as f64),
            math::ln(query.tokens.len() as f64),
            math::ln(f64::from(doc_len)),
        ])
    }

    /// Feature vector for a `(query, doc)` pair. All entries are finite.
    /// Results are memoized per pair.
    pub fn features(&self, query_id: &str, doc_id: &str) -> Result<alloc::rc::Rc<Vec<f64>>> {
        let (query_key, query) = self
            .queries
            .get_key_value(query_id)
            .ok_or_else(|| CoreError::Lookup {
                what: format!("query id {query_id}"),
            })?;
        let (doc_key, doc) = self.docs.get_key_value(doc_id).ok_or_else(|| CoreError::Lookup {
            what: format!("doc id {doc_id}"),
        })?;
        if let Some(hit) = self.cache.borrow().get(&(*query_key, *doc_key)) {
            return Ok(hit.clone());
        }
        let d = self.latent_dim;
        if query.latent.len() != d || doc.latent.len() != d {
            return Err(CoreError::Shape {
                expected: d,
                got: query.latent.len().min(doc.latent.len()),
            });
        }
        let mut out = Vec::with_capacity(self.feature_dim());
        // Unit-norm latents: products have std ~ 1/d, differences ~ 1/sqrt(d).
        let dd = d as f64;
        for i in 0..d {
            out.push(query.latent[i] * doc.latent[i] * dd);
        }
        for i in 0..d {
            out.push((query.latent[i] - doc.latent[i]).abs() * math::sqrt(dd));
        }
        let raw = self.raw_scalars(query, doc_id)?;
        for (i, v) in raw.iter().enumerate() {
            let (mean, inv_std) = self.scaler[i];
            out.push((v - mean) * inv_std);
        }
        let out = alloc::rc::Rc::new(out);
        self.cache
            .borrow_mut()
            .insert((*query_key, *doc_key), out.clone());
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bm25::Bm25Params;
    use crate::synth::{build_qrels, generate_benchmark, BenchmarkConfig};

    #[test]
    fn features_have_expected_shape_and_are_finite() {
        let cfg = BenchmarkConfig {
            n_docs: 200,
            n_queries: 10,
            vocab_size: 1000,
            latent_dim: 8,
            seed: 3,
        };
        let mut bench = generate_benchmark(&cfg).unwrap();
        let _ = build_qrels(&mut bench).unwrap();
        let index = InvertedIndex::build(&bench.corpus, Bm25Params::default()).unwrap();
        let mut runs = BTreeMap::new();
        for q in &bench.queries {
            let run = index.retrieve_topk(&q.query_id, &q.tokens, 100).unwrap();
            runs.insert(q.query_id.clone(), run);
        }
        let fz = Featurizer::new(&index, &bench.corpus, &bench.queries, &runs).unwrap();
        assert_eq!(fz.feature_dim(), 20);
        for q in &bench.queries {
            for e in runs[&q.query_id].entries().iter().take(5) {
                let f = fz.features(&q.query_id, &e.doc_id).unwrap();
                assert_eq!(f.len(), 20);
                assert!(f.iter().all(|v| v.is_finite()));
            }
        }
        assert!(fz.features("nope", &bench.corpus[0].doc_id).is_err());
        assert!(fz.features(&bench.queries[0].query_id, "nope").is_err());
    }

    #[test]
    fn scalar_features_are_standardized() {
        let cfg = BenchmarkConfig {
            n_docs: 300,
            n_queries: 12,
            vocab_size: 1200,
            latent_dim: 8,
            seed: 5,
        };
        let bench = generate_benchmark(&cfg).unwrap();
        let index = InvertedIndex::build(&bench.corpus, Bm25Params::default()).unwrap();
        let mut runs = BTreeMap::new();
        for q in &bench.queries {
            runs.insert(
                q.query_id.clone(),
                index.retrieve_topk(&q.query_id, &q.tokens, 100).unwrap(),
            );
        }
        let fz = Featurizer::new(&index, &bench.corpus, &bench.queries, &runs).unwrap();
        // The bm25 feature (index 2d) should be ~zero-mean, unit-ish std
        // over the candidate pool it was fitted on.
        let mut vals = Vec::new();
        for q in &bench.queries {
            for e in runs[&q.query_id].entries() {
                let f = fz.features(&q.query_id, &e.doc_id).unwrap();
                vals.push(f[16]);
            }
        }
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-9, "mean {mean}");
        assert!((var - 1.0).abs() < 1e-6, "var {var}");
    }
}
