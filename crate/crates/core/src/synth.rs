//! Deterministic synthetic retrieval benchmark.
//!
//! Documents and queries carry unit-norm latent vectors; tokens are drawn
//! from a topic model whose topic weights are a softmax of the latent, so
//! lexical overlap correlates with latent similarity and BM25 recall is
//! meaningful. Relevance comes from a fixed nonlinear two-layer teacher over
//! paired latents, quantized into graded judgments with a realistic skew
//! toward grade 0. Because the teacher is nonlinear, wider student scorers
//! approximate it better, which is what makes capacity sweeps on this
//! benchmark produce saturating scaling curves.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::bm25::{Bm25Params, InvertedIndex};
use crate::error::CoreError;
use crate::math;
use crate::rng::{self, Stream};
use crate::Result;

/// Highest relevance grade.
pub const MAX_GRADE: u8 = 3;

/// Grade quantization percentiles over the teacher-signal calibration sample.
/// Grades 1..=3 cover roughly the top 20% / 7% / 1% of pairs.
pub const GRADE_PERCENTILES: [f64; 3] = [0.80, 0.93, 0.99];

const CALIBRATION_PAIRS: usize = 10_000;
const N_TOPICS: usize = 32;
const TOPIC_TEMPERATURE: f64 = 5.0;
const ZIPF_EXPONENT: f64 = 1.0;
const DOC_LEN_RANGE: (usize, usize) = (40, 80);
const QUERY_LEN_RANGE: (usize, usize) = (4, 8);

/// Pool graded per query: BM25 top-`POOL_TOP` plus `POOL_RANDOM` random docs.
const POOL_TOP: usize = 200;
const POOL_RANDOM: usize = 50;
const MAX_QUERY_REGENERATIONS: usize = 1_000;

/// Benchmark generation parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkConfig {
    pub n_docs: usize,
    pub n_queries: usize,
    pub vocab_size: usize,
    pub latent_dim: usize,
    pub seed: u64,
}

impl BenchmarkConfig {
    fn validate(&self) -> Result<()> {
        if self.n_docs < 100 {
            return Err(CoreError::Config {
                field: "n_docs",
                message: format!("must be >= 100, got {}", self.n_docs),
            });
        }
        if self.n_queries < 10 {
            return Err(CoreError::Config {
                field: "n_queries",
                message: format!("must be >= 10, got {}", self.n_queries),
            });
        }
        if self.vocab_size < 1000 {
            return Err(CoreError::Config {
                field: "vocab_size",
                message: format!("must be >= 1000, got {}", self.vocab_size),
            });
        }
        if self.latent_dim == 0 {
            return Err(CoreError::Config {
                field: "latent_dim",
                message: "must be >= 1".to_string(),
            });
        }
        Ok(())
    }
}

/// A synthetic document: id, term ids, unit-norm latent.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthDoc {
    pub doc_id: String,
    pub tokens: Vec<u32>,
    pub latent: Vec<f64>,
}

/// A synthetic query with the same structure as a document.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthQuery {
    pub query_id: String,
    pub tokens: Vec<u32>,
    pub latent: Vec<f64>,
}

/// Graded relevance judgments: query id -> doc id -> grade in 0..=3.
///
/// Ungraded pairs are grade 0 by convention; [`Qrels::grade_of`] encodes that.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    map: BTreeMap<String, BTreeMap<String, u8>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert one judgment. Grades above [`MAX_GRADE`] are rejected.
    pub fn insert(&mut self, query_id: &str, doc_id: &str, grade: u8) -> Result<()> {
        if grade > MAX_GRADE {
            return Err(CoreError::Argument {
                message: format!("grade {grade} out of range 0..={MAX_GRADE}"),
            });
        }
        self.map
            .entry(query_id.to_string())
            .or_default()
            .insert(doc_id.to_string(), grade);
        Ok(())
    }

    /// Grade for a pair; ungraded pairs are 0.
    pub fn grade_of(&self, query_id: &str, doc_id: &str) -> u8 {
        self.map
            .get(query_id)
            .and_then(|docs| docs.get(doc_id))
            .copied()
            .unwrap_or(0)
    }

    /// Judged docs for a query, sorted by doc id.
    pub fn judged(&self, query_id: &str) -> impl Iterator<Item = (&str, u8)> {
        self.map
            .get(query_id)
            .into_iter()
            .flat_map(|docs| docs.iter().map(|(d, g)| (d.as_str(), *g)))
    }

    /// Number of judged-relevant (grade > 0) docs for a query.
    pub fn n_relevant(&self, query_id: &str) -> usize {
        self.judged(query_id).filter(|(_, g)| *g > 0).count()
    }

    pub fn has_positive(&self, query_id: &str) -> bool {
        self.judged(query_id).any(|(_, g)| g > 0)
    }

    /// Query ids, sorted.
    pub fn queries(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    pub fn n_queries(&self) -> usize {
        self.map.len()
    }

    /// All `(query_id, doc_id, grade)` triples, sorted by query then doc.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, u8)> {
        self.map.iter().flat_map(|(q, docs)| {
            docs.iter().map(move |(d, g)| (q.as_str(), d.as_str(), *g))
        })
    }

    /// Check the type invariants: grades bounded (by construction) and every
    /// query has at least one positive judgment.
    pub fn validate(&self) -> Result<()> {
        for q in self.queries() {
            if !self.has_positive(q) {
                return Err(CoreError::Data {
                    message: format!("query {q} has no judgment with grade > 0"),
                });
            }
        }
        Ok(())
    }
}

/// Fixed two-layer nonlinear map from paired latents to a scalar relevance
/// signal, with quantization thresholds calibrated on a seeded sample.
///
/// The signal is a similarity anchor plus a random nonlinear component:
/// the anchor (`SIM_WEIGHT * q . d`) ties relevance to latent similarity so
/// BM25 recall stays meaningful, while the two-layer part over the
/// elementwise product and absolute difference of the latents (centered and
/// scaled to roughly unit variance) creates fine-grained structure within a
/// candidate pool that only higher-capacity students can resolve. The
/// hidden pre-activations are deliberately scaled into tanh's nonlinear
/// regime.
#[derive(Debug, Clone, PartialEq)]
pub struct TeacherModel {
    pub seed: u64,
    pub latent_dim: usize,
    pub hidden_width: usize,
    w1: Vec<f64>, // hidden_width x (2 * latent_dim), row-major
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
    thresholds: [f64; 3],
}

/// Default teacher latent dimensionality.
pub const DEFAULT_LATENT_DIM: usize = 16;
/// Default teacher hidden width.
pub const DEFAULT_HIDDEN_WIDTH: usize = 64;

/// Weight of the `q . d` similarity anchor in the teacher signal.
const TEACHER_SIM_WEIGHT: f64 = 1.5;
/// First-layer weight std; ~0.4 * sqrt(2 * latent_dim) pre-activation std
/// puts the hidden units well into tanh's nonlinear regime.
const TEACHER_W1_STD: f64 = 0.45;
const TEACHER_B1_STD: f64 = 0.4;
/// Head weights are N(0, 1/hidden_width), unconstrained in sign.
const TEACHER_W2_STD: f64 = 1.0;

impl TeacherModel {
    /// Build the teacher for `seed` and calibrate its grade thresholds.
    /// Same seed, same dims -> bit-identical weights and thresholds.
    pub fn new(seed: u64, latent_dim: usize, hidden_width: usize) -> Self {
        let mut rng = rng::stream(seed, "teacher");
        let in_dim = 2 * latent_dim;
        let mut w1 = Vec::with_capacity(hidden_width * in_dim);
        for _ in 0..hidden_width {
            for _ in 0..in_dim {
                w1.push(rng::gaussian(&mut rng) * TEACHER_W1_STD);
            }
        }
        let b1 = (0..hidden_width)
            .map(|_| rng::gaussian(&mut rng) * TEACHER_B1_STD)
            .collect();
        let head_scale = TEACHER_W2_STD / math::sqrt(hidden_width as f64);
        let w2 = (0..hidden_width)
            .map(|_| rng::gaussian(&mut rng) * head_scale)
            .collect();

        let mut teacher = TeacherModel {
            seed,
            latent_dim,
            hidden_width,
            w1,
            b1,
            w2,
            b2: 0.0,
            thresholds: [0.0; 3],
        };
        teacher.calibrate();
        teacher
    }

    /// Thresholds are the [`GRADE_PERCENTILES`] of the signal over a seeded
    /// sample of random latent pairs.
    fn calibrate(&mut self) {
        let mut rng = rng::stream(self.seed, "teacher-calibration");
        let mut signals = Vec::with_capacity(CALIBRATION_PAIRS);
        for _ in 0..CALIBRATION_PAIRS {
            let q = random_unit_latent(&mut rng, self.latent_dim);
            let d = random_unit_latent(&mut rng, self.latent_dim);
            signals.push(self.signal(&q, &d).expect("dims match by construction"));
        }
        signals.sort_by(|a, b| a.partial_cmp(b).expect("signals are finite"));
        for (i, p) in GRADE_PERCENTILES.iter().enumerate() {
            let idx = ((CALIBRATION_PAIRS as f64) * p) as usize;
            self.thresholds[i] = signals[idx.min(CALIBRATION_PAIRS - 1)];
        }
    }

    /// Raw scalar relevance signal for a latent pair.
    pub fn signal(&self, q_latent: &[f64], d_latent: &[f64]) -> Result<f64> {
        let d = self.latent_dim;
        if q_latent.len() != d {
            return Err(CoreError::Shape {
                expected: d,
                got: q_latent.len(),
            });
        }
        if d_latent.len() != d {
            return Err(CoreError::Shape {
                expected: d,
                got: d_latent.len(),
            });
        }
        // Centering/scaling constants for random unit vectors: the product
        // block is zero-mean with std ~ 1/d, the |q-d| entries have mean
        // sqrt(2/d)*sqrt(2/pi) and std ~ sqrt(2/d * (1 - 2/pi)).
        let dd = d as f64;
        let abs_mean = math::sqrt(2.0 / dd) * math::sqrt(2.0 / core::f64::consts::PI);
        let dot: f64 = q_latent.iter().zip(d_latent).map(|(a, b)| a * b).sum();
        let mut t = self.b2 + TEACHER_SIM_WEIGHT * dot;
        for h in 0..self.hidden_width {
            let row = &self.w1[h * 2 * d..(h + 1) * 2 * d];
            let mut pre = self.b1[h];
            for i in 0..d {
                pre += row[i] * (q_latent[i] * d_latent[i] * dd);
            }
            for i in 0..d {
                pre += row[d + i] * (((q_latent[i] - d_latent[i]).abs() - abs_mean) * math::sqrt(dd));
            }
            t += self.w2[h] * math::tanh(pre);
        }
        Ok(t)
    }

    /// Quantize the signal into a grade in 0..=3. Strictly monotone in the
    /// signal: a larger signal never gets a smaller grade.
    pub fn grade(&self, query: &SynthQuery, doc: &SynthDoc) -> Result<u8> {
        let t = self.signal(&query.latent, &doc.latent)?;
        Ok(self.quantize(t))
    }

    /// Grade from a raw signal value.
    pub fn quantize(&self, signal: f64) -> u8 {
        let mut g = 0u8;
        for thr in self.thresholds {
            if signal > thr {
                g += 1;
            }
        }
        g
    }

    /// Calibrated thresholds (ascending).
    pub fn thresholds(&self) -> [f64; 3] {
        self.thresholds
    }
}

fn random_unit_latent(rng: &mut Stream, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng::gaussian(rng)).collect();
        let norm = math::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if norm > 1e-12 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

/// Topic model tying tokens to latents: topic weights are a softmax of the
/// latent against fixed topic directions, and each topic owns a contiguous
/// vocabulary block sampled with a Zipf profile.
#[derive(Debug, Clone)]
struct TopicModel {
    directions: Vec<f64>, // N_TOPICS x latent_dim, rows unit-norm
    latent_dim: usize,
    vocab_size: usize,
    zipf_cdfs: BTreeMap<usize, Vec<f64>>, // block length -> cumulative weights
}

impl TopicModel {
    fn new(seed: u64, latent_dim: usize, vocab_size: usize) -> Self {
        let mut rng = rng::stream(seed, "topics");
        let mut directions = Vec::with_capacity(N_TOPICS * latent_dim);
        for _ in 0..N_TOPICS {
            directions.extend(random_unit_latent(&mut rng, latent_dim));
        }
        let mut zipf_cdfs = BTreeMap::new();
        for k in 0..N_TOPICS {
            let (start, end) = block_range(vocab_size, k);
            zipf_cdfs.entry(end - start).or_insert_with(|| {
                let mut acc = 0.0;
                let mut cdf = Vec::with_capacity(end - start);
                for i in 0..(end - start) {
                    acc += 1.0 / math::powf((i + 1) as f64, ZIPF_EXPONENT);
                    cdf.push(acc);
                }
                cdf
            });
        }
        TopicModel {
            directions,
            latent_dim,
            vocab_size,
            zipf_cdfs,
        }
    }

    /// Softmax topic weights for a latent, returned as a CDF for sampling.
    fn topic_cdf(&self, latent: &[f64]) -> Vec<f64> {
        let mut logits = Vec::with_capacity(N_TOPICS);
        for k in 0..N_TOPICS {
            let row = &self.directions[k * self.latent_dim..(k + 1) * self.latent_dim];
            let dot: f64 = row.iter().zip(latent).map(|(a, b)| a * b).sum();
            logits.push(TOPIC_TEMPERATURE * dot);
        }
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut acc = 0.0;
        logits
            .iter()
            .map(|l| {
                acc += math::exp(l - max);
                acc
            })
            .collect()
    }

    fn sample_token(&self, rng: &mut Stream, topic_cdf: &[f64]) -> u32 {
        let total = *topic_cdf.last().expect("at least one topic");
        let k = cdf_sample(topic_cdf, rng::uniform(rng) * total);
        let (start, end) = block_range(self.vocab_size, k);
        let cdf = &self.zipf_cdfs[&(end - start)];
        let total = *cdf.last().expect("non-empty block");
        let i = cdf_sample(cdf, rng::uniform(rng) * total);
        (start + i) as u32
    }

    fn sample_tokens(&self, rng: &mut Stream, latent: &[f64], len_range: (usize, usize)) -> Vec<u32> {
        let len = len_range.0 + rng::index(rng, len_range.1 - len_range.0 + 1);
        let cdf = self.topic_cdf(latent);
        (0..len).map(|_| self.sample_token(rng, &cdf)).collect()
    }
}

fn block_range(vocab_size: usize, k: usize) -> (usize, usize) {
    let start = k * vocab_size / N_TOPICS;
    let end = (k + 1) * vocab_size / N_TOPICS;
    (start, end)
}

/// First index whose cumulative weight exceeds `target`.
fn cdf_sample(cdf: &[f64], target: f64) -> usize {
    match cdf.binary_search_by(|w| w.partial_cmp(&target).expect("finite weights")) {
        Ok(i) | Err(i) => i.min(cdf.len() - 1),
    }
}

/// A generated benchmark: corpus, queries, and the teacher that judges them.
///
/// The topic model is kept so that [`build_qrels`] can regenerate queries
/// that have no positive judgment.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub corpus: Vec<SynthDoc>,
    pub queries: Vec<SynthQuery>,
    pub teacher: TeacherModel,
    topics: TopicModel,
    seed: u64,
}

/// Generate corpus, queries, and teacher from the config. Fully deterministic
/// in the seed: the same config always yields bit-identical output.
pub fn generate_benchmark(config: &BenchmarkConfig) -> Result<Benchmark> {
    config.validate()?;
    let teacher = TeacherModel::new(config.seed, config.latent_dim, DEFAULT_HIDDEN_WIDTH);
    let topics = TopicModel::new(config.seed, config.latent_dim, config.vocab_size);

    let width = digits(config.n_docs);
    let mut rng = rng::stream(config.seed, "corpus");
    let mut corpus = Vec::with_capacity(config.n_docs);
    for i in 0..config.n_docs {
        let latent = random_unit_latent(&mut rng, config.latent_dim);
        let tokens = topics.sample_tokens(&mut rng, &latent, DOC_LEN_RANGE);
        corpus.push(SynthDoc {
            doc_id: format!("d{i:0width$}"),
            tokens,
            latent,
        });
    }

    let qwidth = digits(config.n_queries);
    let mut rng = rng::stream(config.seed, "queries");
    let mut queries = Vec::with_capacity(config.n_queries);
    for i in 0..config.n_queries {
        let latent = random_unit_latent(&mut rng, config.latent_dim);
        let tokens = topics.sample_tokens(&mut rng, &latent, QUERY_LEN_RANGE);
        queries.push(SynthQuery {
            query_id: format!("q{i:0qwidth$}"),
            tokens,
            latent,
        });
    }

    Ok(Benchmark {
        corpus,
        queries,
        teacher,
        topics,
        seed: config.seed,
    })
}

fn digits(n: usize) -> usize {
    let mut d = 1;
    let mut m = 10;
    while m < n {
        d += 1;
        m *= 10;
    }
    d
}

/// Grade each query's candidate pool (BM25 top-200 plus 50 random docs) and
/// return the qrels. Queries that end up with no positive judgment are
/// regenerated in place (fresh latent and tokens) until every query has at
/// least one grade > 0.
pub fn build_qrels(benchmark: &mut Benchmark) -> Result<Qrels> {
    let index = InvertedIndex::build(&benchmark.corpus, Bm25Params::default())?;
    let mut rng = rng::stream(benchmark.seed, "qrels");
    let mut qrels = Qrels::new();

    for qi in 0..benchmark.queries.len() {
        let mut attempts = 0;
        loop {
            let query = benchmark.queries[qi].clone();
            let graded = grade_pool(benchmark, &index, &query, &mut rng)?;
            if graded.iter().any(|(_, g)| *g > 0) {
                for (doc_id, grade) in graded {
                    qrels.insert(&query.query_id, &doc_id, grade)?;
                }
                break;
            }
            attempts += 1;
            if attempts > MAX_QUERY_REGENERATIONS {
                return Err(CoreError::Data {
                    message: format!(
                        "query {} found no positive doc after {MAX_QUERY_REGENERATIONS} regenerations",
                        query.query_id
                    ),
                });
            }
            let latent = random_unit_latent(&mut rng, benchmark.teacher.latent_dim);
            let tokens = benchmark
                .topics
                .sample_tokens(&mut rng, &latent, QUERY_LEN_RANGE);
            let q = &mut benchmark.queries[qi];
            q.latent = latent;
            q.tokens = tokens;
        }
    }
    Ok(qrels)
}

fn grade_pool(
    benchmark: &Benchmark,
    index: &InvertedIndex,
    query: &SynthQuery,
    rng: &mut Stream,
) -> Result<Vec<(String, u8)>> {
    let run = index.retrieve_topk(&query.query_id, &query.tokens, POOL_TOP)?;
    let mut pool: alloc::collections::BTreeSet<usize> = alloc::collections::BTreeSet::new();
    for entry in run.entries() {
        pool.insert(index.doc_index(&entry.doc_id).expect("doc from own index"));
    }
    for _ in 0..POOL_RANDOM {
        pool.insert(rng::index(rng, benchmark.corpus.len()));
    }
    let mut graded = Vec::with_capacity(pool.len());
    for di in pool {
        let doc = &benchmark.corpus[di];
        graded.push((doc.doc_id.clone(), benchmark.teacher.grade(query, doc)?));
    }
    Ok(graded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn small_config() -> BenchmarkConfig {
        BenchmarkConfig {
            n_docs: 300,
            n_queries: 12,
            vocab_size: 1000,
            latent_dim: 8,
            seed: 7,
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_benchmark(&small_config()).unwrap();
        let b = generate_benchmark(&small_config()).unwrap();
        assert_eq!(a.corpus, b.corpus);
        assert_eq!(a.queries, b.queries);
        assert_eq!(a.teacher, b.teacher);
    }

    #[test]
    fn invalid_config_rejected() {
        let mut cfg = small_config();
        cfg.n_docs = 0;
        match generate_benchmark(&cfg) {
            Err(CoreError::Config { field, .. }) => assert_eq!(field, "n_docs"),
            other => panic!("expected config error, got {other:?}"),
        }
        let mut cfg = small_config();
        cfg.vocab_size = 10;
        assert!(matches!(
            generate_benchmark(&cfg),
            Err(CoreError::Config { field: "vocab_size", .. })
        ));
    }

    #[test]
    fn latents_are_unit_norm() {
        let cfg = BenchmarkConfig {
            n_docs: 1000,
            n_queries: 50,
            vocab_size: 2000,
            latent_dim: 16,
            seed: 7,
        };
        let bench = generate_benchmark(&cfg).unwrap();
        for doc in &bench.corpus {
            assert!(!doc.tokens.is_empty());
            let norm = doc.latent.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12, "norm {norm}");
        }
        for q in &bench.queries {
            let norm = q.latent.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grades_in_range_and_skewed() {
        let bench = generate_benchmark(&small_config()).unwrap();
        // Fresh pairs from the same latent distribution as calibration.
        let mut rng = rng::stream(999, "skew-test");
        let n = 10_000;
        let mut zero = 0usize;
        for _ in 0..n {
            let q = random_unit_latent(&mut rng, 8);
            let d = random_unit_latent(&mut rng, 8);
            let g = bench.teacher.quantize(bench.teacher.signal(&q, &d).unwrap());
            assert!(g <= MAX_GRADE);
            if g == 0 {
                zero += 1;
            }
        }
        let frac = zero as f64 / n as f64;
        assert!((frac - 0.80).abs() < 0.02, "grade-0 fraction {frac}");
    }

    #[test]
    fn grade_monotone_in_signal() {
        let bench = generate_benchmark(&small_config()).unwrap();
        let q = &bench.queries[0];
        let mut scored: Vec<(f64, u8)> = bench
            .corpus
            .iter()
            .map(|d| {
                (
                    bench.teacher.signal(&q.latent, &d.latent).unwrap(),
                    bench.teacher.grade(q, d).unwrap(),
                )
            })
            .collect();
        scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in scored.windows(2) {
            assert!(w[0].1 <= w[1].1, "grade not monotone in signal");
        }
    }

    #[test]
    fn identical_latent_outranks_corpus() {
        let bench = generate_benchmark(&small_config()).unwrap();
        let q = &bench.queries[3];
        let clone_doc = SynthDoc {
            doc_id: "dclone".into(),
            tokens: q.tokens.clone(),
            latent: q.latent.clone(),
        };
        let self_grade = bench.teacher.grade(q, &clone_doc).unwrap();
        for d in &bench.corpus {
            assert!(bench.teacher.grade(q, d).unwrap() <= self_grade);
        }
    }

    #[test]
    fn signal_shape_error() {
        let bench = generate_benchmark(&small_config()).unwrap();
        let bad = vec![0.0; 5];
        let good = vec![0.0; 8];
        assert!(matches!(
            bench.teacher.signal(&bad, &good),
            Err(CoreError::Shape { expected: 8, got: 5 })
        ));
    }

    #[test]
    fn qrels_every_query_has_positive() {
        let mut bench = generate_benchmark(&small_config()).unwrap();
        let qrels = build_qrels(&mut bench).unwrap();
        assert_eq!(qrels.n_queries(), bench.queries.len());
        for q in &bench.queries {
            assert!(qrels.has_positive(&q.query_id), "{} lacks positive", q.query_id);
        }
        qrels.validate().unwrap();
    }

    #[test]
    fn qrels_deterministic_and_consistent_with_teacher() {
        let mut a = generate_benchmark(&small_config()).unwrap();
        let qrels_a = build_qrels(&mut a).unwrap();
        let mut b = generate_benchmark(&small_config()).unwrap();
        let qrels_b = build_qrels(&mut b).unwrap();
        assert_eq!(qrels_a, qrels_b);
        assert_eq!(a.queries, b.queries);

        // Every stored grade matches an independent teacher re-run.
        let by_id: BTreeMap<&str, &SynthQuery> = a
            .queries
            .iter()
            .map(|q| (q.query_id.as_str(), q))
            .collect();
        let docs: BTreeMap<&str, &SynthDoc> =
            a.corpus.iter().map(|d| (d.doc_id.as_str(), d)).collect();
        for (qid, did, g) in qrels_a.iter() {
            let expect = a.teacher.grade(by_id[qid], docs[did]).unwrap();
            assert_eq!(g, expect);
        }
    }

    #[test]
    fn ungraded_pairs_default_to_zero() {
        let mut qrels = Qrels::new();
        qrels.insert("q1", "d1", 2).unwrap();
        assert_eq!(qrels.grade_of("q1", "dX"), 0);
        assert_eq!(qrels.grade_of("qX", "d1"), 0);
        assert!(qrels.insert("q1", "d2", 5).is_err());
    }
}
