//! Run configuration: a flat key-value text format with sections for
//! benchmark, index, sweep, fit, and paths. Unknown sections or keys are
//! errors; every key has a default, so a config file only states overrides.
//!
//! ```text
//! [benchmark]
//! n_docs = 2000
//! seed = 42
//!
//! [sweep]
//! widths = 8,16,32,64,128,256
//! ```

use std::path::{Path, PathBuf};

use rankscale_core::bm25::Bm25Params;
use rankscale_core::ledger::{Objective, ALL_OBJECTIVES};
use rankscale_core::ltr::{BatchConfig, ScorerConfig, TrainSchedule};
use rankscale_core::rng;
use rankscale_core::synth::BenchmarkConfig;

use crate::error::Error;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub benchmark: BenchmarkConfig,
    pub bm25: Bm25Params,
    /// First-stage candidates per query.
    pub top_k: usize,
    pub objectives: Vec<Objective>,
    /// Hidden widths of the size grid (strictly increasing param counts).
    pub widths: Vec<usize>,
    pub depth: usize,
    pub schedule: TrainSchedule,
    /// Fraction of queries used for training; the rest evaluate.
    pub train_fraction: f64,
    pub batch: BatchConfig,
    pub ce_negatives: usize,
    /// Seed for scorer inits, batch sampling, and CE negative sampling.
    pub sweep_seed: u64,
    pub dataset: String,
    pub tag: String,
    pub save_checkpoints: bool,
    /// Held-out tail length for data/joint forecasting.
    pub holdout: usize,
    /// Index into `widths` used by the data-scaling protocol.
    pub data_size_index: usize,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            benchmark: BenchmarkConfig {
                n_docs: 2000,
                n_queries: 64,
                vocab_size: 8192,
                latent_dim: 16,
                seed: 42,
            },
            bm25: Bm25Params::default(),
            top_k: 100,
            objectives: ALL_OBJECTIVES.to_vec(),
            widths: vec![8, 16, 32, 64, 128, 256],
            depth: 2,
            schedule: TrainSchedule {
                n_steps: 800,
                n_checkpoints: 20,
                learning_rate: 1e-3,
            },
            train_fraction: 0.5,
            batch: BatchConfig::default(),
            ce_negatives: 64,
            sweep_seed: 1042,
            dataset: "synthdev".into(),
            tag: "toy".into(),
            save_checkpoints: false,
            holdout: 5,
            data_size_index: 3,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_str_source(&text, path)
    }

    /// Parse config text; `path` is used in error messages only.
    pub fn from_str_source(text: &str, path: &Path) -> Result<Self> {
        let mut config = RunConfig::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    Error::parse(path, lineno, "unterminated section header")
                })?;
                match name {
                    "benchmark" | "index" | "sweep" | "fit" | "paths" => {
                        section = name.to_string();
                    }
                    other => {
                        return Err(Error::parse(path, lineno, format!("unknown section [{other}]")))
                    }
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse(path, lineno, format!("expected `key = value`, got {line:?}"))
            })?;
            let key = key.trim();
            let value = value.trim();
            config
                .apply(&section, key, value)
                .map_err(|message| Error::parse(path, lineno, message))?;
        }
        config.validate()?;
        Ok(config)
    }

    fn apply(&mut self, section: &str, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
            value.parse().map_err(|_| format!("bad value {value:?} for {key}"))
        }
        match (section, key) {
            ("benchmark", "n_docs") => self.benchmark.n_docs = num(key, value)?,
            ("benchmark", "n_queries") => self.benchmark.n_queries = num(key, value)?,
            ("benchmark", "vocab_size") => self.benchmark.vocab_size = num(key, value)?,
            ("benchmark", "latent_dim") => self.benchmark.latent_dim = num(key, value)?,
            ("benchmark", "seed") => self.benchmark.seed = num(key, value)?,
            ("index", "k1") => self.bm25.k1 = num(key, value)?,
            ("index", "b") => self.bm25.b = num(key, value)?,
            ("index", "top_k") => self.top_k = num(key, value)?,
            ("sweep", "objectives") => {
                self.objectives = value
                    .split(',')
                    .map(|o| o.trim().parse::<Objective>().map_err(|e| e.to_string()))
                    .collect::<std::result::Result<_, _>>()?;
            }
            ("sweep", "widths") => {
                self.widths = value
                    .split(',')
                    .map(|w| num::<usize>(key, w.trim()))
                    .collect::<std::result::Result<_, _>>()?;
            }
            ("sweep", "depth") => self.depth = num(key, value)?,
            ("sweep", "n_steps") => self.schedule.n_steps = num(key, value)?,
            ("sweep", "n_checkpoints") => self.schedule.n_checkpoints = num(key, value)?,
            ("sweep", "learning_rate") => self.schedule.learning_rate = num(key, value)?,
            ("sweep", "train_fraction") => self.train_fraction = num(key, value)?,
            ("sweep", "pointwise_batch") => self.batch.pointwise_batch = num(key, value)?,
            ("sweep", "pointwise_negative_ratio") => {
                self.batch.pointwise_negative_ratio = num(key, value)?
            }
            ("sweep", "group_queries") => self.batch.group_queries = num(key, value)?,
            ("sweep", "group_negatives") => self.batch.group_negatives = num(key, value)?,
            ("sweep", "ce_negatives") => self.ce_negatives = num(key, value)?,
            ("sweep", "seed") => self.sweep_seed = num(key, value)?,
            ("sweep", "dataset") => self.dataset = value.to_string(),
            ("sweep", "tag") => self.tag = value.to_string(),
            ("sweep", "save_checkpoints") => self.save_checkpoints = num(key, value)?,
            ("fit", "holdout") => self.holdout = num(key, value)?,
            ("fit", "data_size_index") => self.data_size_index = num(key, value)?,
            ("paths", "out_dir") => self.out_dir = PathBuf::from(value),
            ("", _) => return Err(format!("key {key} appears before any section")),
            (section, key) => return Err(format!("unknown key {key} in section [{section}]")),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if !(0.0 < self.train_fraction && self.train_fraction < 1.0) {
            return Err(Error::Validation(format!(
                "train_fraction must be in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.objectives.is_empty() {
            return Err(Error::Validation("objectives must be non-empty".into()));
        }
        if self.data_size_index >= self.widths.len() {
            return Err(Error::Validation(format!(
                "data_size_index {} out of range for {} widths",
                self.data_size_index,
                self.widths.len()
            )));
        }
        // Size grid strictly increasing in param count.
        let mut prev = 0u64;
        for &w in &self.widths {
            let count = ScorerConfig {
                width: w,
                depth: self.depth,
                feature_dim: self.feature_dim(),
                seed: 0,
            }
            .param_count();
            if count <= prev {
                return Err(Error::Validation(
                    "widths must give strictly increasing param counts".into(),
                ));
            }
            prev = count;
        }
        Ok(())
    }

    /// Feature dimension implied by the benchmark's latent dim.
    pub fn feature_dim(&self) -> usize {
        2 * self.benchmark.latent_dim + 4
    }

    /// Override both the benchmark and sweep seeds from one master seed.
    pub fn override_seed(&mut self, seed: u64) {
        self.benchmark.seed = rng::substream_seed(seed, "benchmark");
        self.sweep_seed = rng::substream_seed(seed, "sweep");
    }

    /// Query ids split deterministically: the first `ceil(fraction * n)`
    /// train, the rest evaluate.
    pub fn split_queries(&self, ids: &[String]) -> (Vec<String>, Vec<String>) {
        let n_train = ((ids.len() as f64) * self.train_fraction).ceil() as usize;
        let n_train = n_train.clamp(1, ids.len().saturating_sub(1).max(1));
        (
            ids[..n_train].to_vec(),
            ids[n_train.min(ids.len())..].to_vec(),
        )
    }

    // Output layout.
    pub fn corpus_path(&self) -> PathBuf {
        self.out_dir.join("corpus.tsv")
    }
    pub fn corpus_latents_path(&self) -> PathBuf {
        self.out_dir.join("corpus_latents.tsv")
    }
    pub fn queries_path(&self) -> PathBuf {
        self.out_dir.join("queries.tsv")
    }
    pub fn query_latents_path(&self) -> PathBuf {
        self.out_dir.join("query_latents.tsv")
    }
    pub fn qrels_path(&self) -> PathBuf {
        self.out_dir.join("qrels.txt")
    }
    pub fn run_path(&self) -> PathBuf {
        self.out_dir.join("bm25.run")
    }
    pub fn ledger_path(&self) -> PathBuf {
        self.out_dir.join("ledger.txt")
    }
    pub fn checkpoints_dir(&self) -> PathBuf {
        self.out_dir.join("checkpoints")
    }
    pub fn forecasts_dir(&self) -> PathBuf {
        self.out_dir.join("forecasts")
    }
    pub fn report_dir(&self) -> PathBuf {
        self.out_dir.join("report")
    }
    pub fn eval_ledger_path(&self) -> PathBuf {
        self.out_dir.join("eval_ledger.txt")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    #[test]
    fn defaults_validate() {
        let c = RunConfig::from_str_source("", Path::new("<empty>")).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.feature_dim(), 36);
    }

    #[test]
    fn overrides_apply() {
        let text = "\
[benchmark]
n_docs = 500   # comment
seed = 7

[sweep]
widths = 4, 8
n_steps = 100
n_checkpoints = 10

[fit]
data_size_index = 1

[paths]
out_dir = /tmp/lab
";
        let c = RunConfig::from_str_source(text, Path::new("toy.cfg")).unwrap();
        assert_eq!(c.benchmark.n_docs, 500);
        assert_eq!(c.benchmark.seed, 7);
        assert_eq!(c.widths, vec![4, 8]);
        assert_eq!(c.schedule.n_steps, 100);
        assert_eq!(c.out_dir, PathBuf::from("/tmp/lab"));
    }

    #[test]
    fn unknown_key_is_error_with_line() {
        let text = "[sweep]\nnonsense = 3\n";
        match RunConfig::from_str_source(text, Path::new("toy.cfg")) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("nonsense"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_section_is_error() {
        assert!(RunConfig::from_str_source("[mystery]\n", Path::new("x")).is_err());
    }

    #[test]
    fn non_increasing_grid_rejected() {
        let text = "[sweep]\nwidths = 8, 8\n";
        assert!(matches!(
            RunConfig::from_str_source(text, Path::new("x")),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn split_is_deterministic() {
        let c = RunConfig::default();
        let ids: Vec<String> = (0..10).map(|i| format!("q{i}")).collect();
        let (train, eval) = c.split_queries(&ids);
        assert_eq!(train.len(), 5);
        assert_eq!(eval.len(), 5);
        assert_eq!(train[0], "q0");
        assert_eq!(eval[0], "q5");
    }

    #[test]
    fn seed_override_derives_both() {
        let mut c = RunConfig::default();
        c.override_seed(9);
        let mut d = RunConfig::default();
        d.override_seed(9);
        assert_eq!(c.benchmark.seed, d.benchmark.seed);
        assert_eq!(c.sweep_seed, d.sweep_seed);
        assert_ne!(c.benchmark.seed, c.sweep_seed);
    }
}
