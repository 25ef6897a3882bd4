//! Experiment ledger records.
//!
//! One record per evaluated checkpoint metric. Persistence and the text
//! format live in the companion crate; this module defines the record and
//! its uniqueness key.

use alloc::format;
use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use crate::error::CoreError;
use crate::metrics::MetricName;
use crate::Result;

/// Learning-to-rank objective family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Objective {
    Pointwise,
    Pairwise,
    Listwise,
}

/// Fixed objective order used for sweeps and reports.
pub const ALL_OBJECTIVES: [Objective; 3] =
    [Objective::Pointwise, Objective::Pairwise, Objective::Listwise];

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Objective::Pointwise => "pointwise",
            Objective::Pairwise => "pairwise",
            Objective::Listwise => "listwise",
        };
        f.write_str(s)
    }
}

impl FromStr for Objective {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pointwise" => Ok(Objective::Pointwise),
            "pairwise" => Ok(Objective::Pairwise),
            "listwise" => Ok(Objective::Listwise),
            other => Err(CoreError::Argument {
                message: format!("unknown objective {other:?}"),
            }),
        }
    }
}

/// One evaluated checkpoint observation.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerRecord {
    pub objective: Objective,
    /// Exact parameter count of the scorer.
    pub model_params: u64,
    /// Training step of the checkpoint.
    pub step: u64,
    /// Training examples consumed up to the checkpoint.
    pub examples: u64,
    pub metric: MetricName,
    pub value: f64,
    pub dataset: String,
    pub run_tag: String,
}

impl LedgerRecord {
    /// Uniqueness key: `(objective, M, S, metric, dataset)`.
    pub fn key(&self) -> (Objective, u64, u64, MetricName, &str) {
        (
            self.objective,
            self.model_params,
            self.step,
            self.metric,
            self.dataset.as_str(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.model_params == 0 {
            return Err(CoreError::Data {
                message: "ledger record with M = 0".into(),
            });
        }
        if self.step == 0 {
            return Err(CoreError::Data {
                message: "ledger record with S = 0".into(),
            });
        }
        if !self.value.is_finite() {
            return Err(CoreError::Data {
                message: format!(
                    "ledger record {}/{}/{} has non-finite value",
                    self.objective, self.model_params, self.step
                ),
            });
        }
        Ok(())
    }
}
