//! Report generation: forecast-error tables with the bundled reference
//! values displayed alongside, plus plot-ready CSVs of observed vs fitted
//! curves. Output is fully deterministic (no timestamps).

use std::fmt::Write as _;

use rankscale_core::ledger::Objective;
use rankscale_core::metrics::MetricName;
use rankscale_core::scaling::{Coords, ForecastReport};

use crate::config::RunConfig;
use crate::error::Error;
use crate::ledger_io::read_ledger;
use crate::pipeline::{forecast_all, metric_file_tag, series_for_axis, ScalingAxis};
use crate::reference::{bundled_reference_tables, cell, REFERENCE_FLAG};
use crate::{format_sig9, Result};

type ForecastSet = Vec<(ScalingAxis, Objective, ForecastReport)>;

fn lookup(set: &ForecastSet, axis: ScalingAxis, objective: Objective) -> Option<&ForecastReport> {
    set.iter()
        .find(|(a, o, _)| *a == axis && *o == objective)
        .map(|(_, _, r)| r)
}

/// Table: toy RMSE/MAE for one metric beside the reference RMSE/MAE columns.
fn error_table(
    title: &str,
    objectives: &[Objective],
    set: &ForecastSet,
    ref_table_id: u8,
    ref_columns: (&str, Option<&str>),
) -> String {
    let mut out = String::new();
    writeln!(out, "{title}").expect("string write");
    writeln!(
        out,
        "{:<8} {:<10} {:>10} {:>10} {:>10} {:>10}   {}",
        "Scaling", "Objective", "RMSE", "MAE", "Ref RMSE", "Ref MAE", "Ref status"
    )
    .expect("string write");
    for axis in ScalingAxis::ALL {
        for &objective in objectives {
            let Some(report) = lookup(set, axis, objective) else { continue };
            let ref_rmse = cell(ref_table_id, axis.label(), objective, ref_columns.0);
            let ref_mae = ref_columns.1.and_then(|c| cell(ref_table_id, axis.label(), objective, c));
            let fmt_ref = |v: Option<f64>| match v {
                Some(v) => format!("{v:>10.3}"),
                None => format!("{:>10}", "-"),
            };
            writeln!(
                out,
                "{:<8} {:<10} {:>10.3} {:>10.3} {} {}   {}",
                axis.label(),
                objective.to_string(),
                report.rmse,
                report.mae,
                fmt_ref(ref_rmse),
                fmt_ref(ref_mae),
                REFERENCE_FLAG
            )
            .expect("string write");
        }
    }
    out
}

fn reference_only_table(id: u8) -> String {
    let tables = bundled_reference_tables();
    let table = tables.iter().find(|t| t.id == id).expect("bundled table");
    let mut out = String::new();
    writeln!(out, "{} [{}]", table.title, REFERENCE_FLAG).expect("string write");
    let mut header = format!("{:<8} {:<10}", "Scaling", "Objective");
    for c in table.columns {
        header.push_str(&format!(" {c:>10}"));
    }
    writeln!(out, "{header}").expect("string write");
    for row in &table.rows {
        let mut line = format!("{:<8} {:<10}", row.scaling, row.objective.to_string());
        for v in &row.values {
            line.push_str(&format!(" {v:>10.3}"));
        }
        writeln!(out, "{line}").expect("string write");
    }
    out
}

/// Plot-ready CSV for one (axis, objective, metric): observed series, the
/// protocol fit's value at each point, and whether the point was held out.
fn curve_csv(
    config: &RunConfig,
    records: &[rankscale_core::ledger::LedgerRecord],
    axis: ScalingAxis,
    objective: Objective,
    metric: MetricName,
    report: &ForecastReport,
) -> Result<String> {
    let series = series_for_axis(config, records, axis, objective, metric)?;
    let mut out = String::new();
    match axis {
        ScalingAxis::Joint => writeln!(out, "m,s,y_observed,y_fitted,held_out"),
        _ => writeln!(out, "x,y_observed,y_fitted,held_out"),
    }
    .expect("string write");
    for p in &series.points {
        let fitted = report.fit.predict(p.coords)?;
        let held = report.held_out.iter().any(|h| h.coords == p.coords);
        match p.coords {
            Coords::X(x) => writeln!(
                out,
                "{x},{},{},{}",
                format_sig9(p.y),
                format_sig9(fitted),
                u8::from(held)
            ),
            Coords::MS(m, s) => writeln!(
                out,
                "{m},{s},{},{},{}",
                format_sig9(p.y),
                format_sig9(fitted),
                u8::from(held)
            ),
        }
        .expect("string write");
    }
    Ok(out)
}

/// Emit the full report: error tables for every metric (with reference
/// columns), the reference-only table for the out-of-domain results, and
/// one CSV per (axis, objective, metric).
pub fn cmd_report(config: &RunConfig) -> Result<()> {
    let records = read_ledger(&config.ledger_path())?;
    let dir = config.report_dir();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;

    let mut summary = String::new();
    let mut csv_count = 0usize;
    for metric in rankscale_core::metrics::ALL_METRICS {
        let set = forecast_all(config, &records, metric)?;
        let table = match metric {
            MetricName::NdcgAt10 => error_table(
                "NDCG@10 hold-out forecasting errors vs reference",
                &config.objectives,
                &set,
                1,
                ("Test RMSE", Some("Test MAE")),
            ),
            MetricName::Ce => error_table(
                "Contrastive-entropy hold-out forecasting errors vs reference",
                &config.objectives,
                &set,
                2,
                ("Test RMSE", Some("Test MAE")),
            ),
            MetricName::Map => error_table(
                "MAP hold-out forecasting errors vs reference (reference reports RMSE only)",
                &config.objectives,
                &set,
                4,
                ("MAP", None),
            ),
            MetricName::Mrr => error_table(
                "MRR hold-out forecasting errors vs reference (reference reports RMSE only)",
                &config.objectives,
                &set,
                4,
                ("MRR", None),
            ),
        };
        summary.push_str(&table);
        summary.push('\n');

        for (axis, objective, report) in &set {
            let csv = curve_csv(config, &records, *axis, *objective, metric, report)?;
            let path = dir.join(format!(
                "curve_{}_{objective}_{}.csv",
                axis.file_tag(),
                metric_file_tag(metric)
            ));
            std::fs::write(&path, csv)
                .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
            csv_count += 1;
        }
    }
    summary.push_str(&reference_only_table(3));

    let summary_path = dir.join("summary.txt");
    std::fs::write(&summary_path, &summary)
        .map_err(|e| Error::io(format!("writing {}", summary_path.display()), e))?;
    println!("{summary}");
    println!("report: wrote summary and {csv_count} curve CSVs -> {}", dir.display());
    Ok(())
}
