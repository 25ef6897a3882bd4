//! Published reference results from the original large-scale cross-encoder
//! experiments, bundled for side-by-side display.
//!
//! These numbers come from runs that finetuned 17M-1B transformer rerankers
//! on MS MARCO and evaluated on MSMARCO-dev and the TREC DL sets. They are
//! far outside this laboratory's desk-scale budget, so every cell is
//! displayed as labeled reference data and is never treated as a target.

use rankscale_core::ledger::Objective;

/// Flag attached to every reference cell.
pub const REFERENCE_FLAG: &str = "reference — not reproduced";

/// Scaling axis labels used by the reference tables.
pub const SCALING_AXES: [&str; 3] = ["Model", "Data", "Joint"];

/// One reference table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTable {
    pub id: u8,
    pub title: &'static str,
    /// Column labels after (scaling, objective).
    pub columns: &'static [&'static str],
    pub rows: Vec<ReferenceRow>,
}

/// One (scaling axis, objective) row of reference values.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRow {
    pub scaling: &'static str,
    pub objective: Objective,
    pub values: Vec<f64>,
    /// Always [`REFERENCE_FLAG`]; cells are display-only.
    pub flag: &'static str,
}

fn rows(columns_per_row: &[(&'static str, Objective, &[f64])]) -> Vec<ReferenceRow> {
    columns_per_row
        .iter()
        .map(|(scaling, objective, values)| ReferenceRow {
            scaling,
            objective: *objective,
            values: values.to_vec(),
            flag: REFERENCE_FLAG,
        })
        .collect()
}

/// The four bundled reference tables, verbatim.
pub fn bundled_reference_tables() -> Vec<ReferenceTable> {
    use Objective::{Listwise, Pairwise, Pointwise};
    vec![
        ReferenceTable {
            id: 1,
            title: "NDCG@10 scaling-law forecasting errors (MSMARCO-dev)",
            columns: &["Test RMSE", "Test MAE"],
            rows: rows(&[
                ("Model", Pointwise, &[0.015, 0.013]),
                ("Model", Pairwise, &[0.015, 0.014]),
                ("Model", Listwise, &[0.018, 0.013]),
                ("Data", Pointwise, &[0.030, 0.029]),
                ("Data", Pairwise, &[0.026, 0.025]),
                ("Data", Listwise, &[0.016, 0.013]),
                ("Joint", Pointwise, &[0.026, 0.021]),
                ("Joint", Pairwise, &[0.023, 0.019]),
                ("Joint", Listwise, &[0.026, 0.022]),
            ]),
        },
        ReferenceTable {
            id: 2,
            title: "Contrastive-entropy scaling-law forecasting errors (MSMARCO-dev)",
            columns: &["Test RMSE", "Test MAE"],
            rows: rows(&[
                ("Model", Pointwise, &[0.348, 0.346]),
                ("Model", Pairwise, &[0.076, 0.067]),
                ("Model", Listwise, &[0.083, 0.071]),
                ("Data", Pointwise, &[0.129, 0.124]),
                ("Data", Pairwise, &[0.131, 0.128]),
                ("Data", Listwise, &[0.061, 0.049]),
                ("Joint", Pointwise, &[0.241, 0.163]),
                ("Joint", Pairwise, &[0.153, 0.123]),
                ("Joint", Listwise, &[0.105, 0.089]),
            ]),
        },
        ReferenceTable {
            id: 3,
            title: "Scaling-law fit errors (Test RMSE) on the TREC DL datasets",
            columns: &["NDCG", "MAP", "MRR"],
            rows: rows(&[
                ("Model", Pointwise, &[0.015, 0.043, 0.101]),
                ("Model", Pairwise, &[0.011, 0.051, 0.092]),
                ("Model", Listwise, &[0.020, 0.048, 0.087]),
                ("Data", Pointwise, &[0.045, 0.041, 0.107]),
                ("Data", Pairwise, &[0.029, 0.048, 0.084]),
                ("Data", Listwise, &[0.010, 0.048, 0.099]),
                ("Joint", Pointwise, &[0.028, 0.042, 0.103]),
                ("Joint", Pairwise, &[0.025, 0.048, 0.091]),
                ("Joint", Listwise, &[0.022, 0.045, 0.106]),
            ]),
        },
        ReferenceTable {
            id: 4,
            title: "Forecasting errors for MAP and MRR (MSMARCO-dev, Test RMSE)",
            columns: &["MAP", "MRR"],
            rows: rows(&[
                ("Model", Pointwise, &[0.013, 0.013]),
                ("Model", Pairwise, &[0.016, 0.017]),
                ("Model", Listwise, &[0.020, 0.020]),
                ("Data", Pointwise, &[0.025, 0.025]),
                ("Data", Pairwise, &[0.023, 0.023]),
                ("Data", Listwise, &[0.016, 0.016]),
                ("Joint", Pointwise, &[0.021, 0.021]),
                ("Joint", Pairwise, &[0.019, 0.020]),
                ("Joint", Listwise, &[0.022, 0.023]),
            ]),
        },
    ]
}

/// Look up one reference cell.
pub fn cell(table_id: u8, scaling: &str, objective: Objective, column: &str) -> Option<f64> {
    let tables = bundled_reference_tables();
    let table = tables.iter().find(|t| t.id == table_id)?;
    let col = table.columns.iter().position(|c| *c == column)?;
    table
        .rows
        .iter()
        .find(|r| r.scaling == scaling && r.objective == objective)
        .map(|r| r.values[col])
}
