//! Command implementations: benchmark synthesis, first-stage indexing, the
//! training sweep, checkpoint re-evaluation, fitting, and forecasting.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rankscale_core::bm25::{InvertedIndex, RankedRun};
use rankscale_core::ledger::{LedgerRecord, Objective};
use rankscale_core::ltr::{sweep, Featurizer, ScorerConfig, SweepRequest};
use rankscale_core::metrics::{evaluate_checkpoint, MetricName, ALL_METRICS};
use rankscale_core::rng;
use rankscale_core::scaling::{
    data_scaling_protocol, data_scaling_series, fit, joint_scaling_protocol, joint_scaling_series,
    model_scaling_protocol, model_scaling_series, Coords, FitParams, ForecastReport,
    ObservationSeries, PowerLawForm, ScalingFit,
};
use rankscale_core::synth::{build_qrels, generate_benchmark, Qrels, SynthDoc, SynthQuery};

use crate::checkpoints;
use crate::config::RunConfig;
use crate::error::Error;
use crate::ledger_io::{read_ledger, LedgerWriter};
use crate::trec;
use crate::{format_sig9, Result};

/// Scaling axes of the forecast protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingAxis {
    Model,
    Data,
    Joint,
}

impl ScalingAxis {
    pub const ALL: [ScalingAxis; 3] = [ScalingAxis::Model, ScalingAxis::Data, ScalingAxis::Joint];

    pub fn label(self) -> &'static str {
        match self {
            ScalingAxis::Model => "Model",
            ScalingAxis::Data => "Data",
            ScalingAxis::Joint => "Joint",
        }
    }

    pub fn file_tag(self) -> &'static str {
        match self {
            ScalingAxis::Model => "model",
            ScalingAxis::Data => "data",
            ScalingAxis::Joint => "joint",
        }
    }
}

impl std::str::FromStr for ScalingAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "model" => Ok(ScalingAxis::Model),
            "data" => Ok(ScalingAxis::Data),
            "joint" => Ok(ScalingAxis::Joint),
            other => Err(Error::Validation(format!(
                "unknown axis {other:?} (expected model, data, or joint)"
            ))),
        }
    }
}

/// File-name tag for a metric.
pub fn metric_file_tag(metric: MetricName) -> &'static str {
    match metric {
        MetricName::NdcgAt10 => "ndcg10",
        MetricName::Map => "map",
        MetricName::Mrr => "mrr",
        MetricName::Ce => "ce",
    }
}

/// Generate the benchmark and write corpus, queries, latents, and qrels.
pub fn cmd_synth(config: &RunConfig) -> Result<()> {
    let mut bench = generate_benchmark(&config.benchmark)?;
    let qrels = build_qrels(&mut bench)?;
    trec::write_corpus(&bench.corpus, &config.corpus_path(), &config.corpus_latents_path())?;
    trec::write_queries(&bench.queries, &config.queries_path(), &config.query_latents_path())?;
    trec::write_qrels(&qrels, &config.qrels_path())?;
    println!(
        "synth: {} docs, {} queries, {} judged pairs -> {}",
        bench.corpus.len(),
        bench.queries.len(),
        qrels.iter().count(),
        config.out_dir.display()
    );
    Ok(())
}

/// Build the BM25 index and write the first-stage run for every query.
pub fn cmd_index(config: &RunConfig) -> Result<()> {
    let corpus = trec::read_corpus(&config.corpus_path(), &config.corpus_latents_path())?;
    let queries = trec::read_queries(&config.queries_path(), &config.query_latents_path())?;
    let index = InvertedIndex::build(&corpus, config.bm25)?;
    let mut runs = Vec::with_capacity(queries.len());
    for q in &queries {
        runs.push(index.retrieve_topk(&q.query_id, &q.tokens, config.top_k)?);
    }
    trec::write_runs(&runs, &config.run_path(), "bm25")?;
    let mean_depth: f64 =
        runs.iter().map(|r| r.len() as f64).sum::<f64>() / runs.len().max(1) as f64;
    println!(
        "index: {} docs, {} queries, mean candidates {:.1} -> {}",
        corpus.len(),
        queries.len(),
        mean_depth,
        config.run_path().display()
    );
    Ok(())
}

/// Benchmark artifacts loaded back from disk.
pub struct LoadedBenchmark {
    pub corpus: Vec<SynthDoc>,
    pub queries: Vec<SynthQuery>,
    pub qrels: Qrels,
    pub runs: BTreeMap<String, RankedRun>,
    pub index: InvertedIndex,
}

pub fn load_benchmark(config: &RunConfig) -> Result<LoadedBenchmark> {
    let corpus = trec::read_corpus(&config.corpus_path(), &config.corpus_latents_path())?;
    let queries = trec::read_queries(&config.queries_path(), &config.query_latents_path())?;
    let qrels = trec::read_qrels(&config.qrels_path())?;
    let runs_vec = trec::read_runs(&config.run_path())?;
    let mut runs = BTreeMap::new();
    for run in runs_vec {
        runs.insert(run.query_id.clone(), run);
    }
    let index = InvertedIndex::build(&corpus, config.bm25)?;
    Ok(LoadedBenchmark {
        corpus,
        queries,
        qrels,
        runs,
        index,
    })
}

/// Resume bookkeeping: a `(objective, M)` run is skipped when all of its
/// records are already in the ledger; a partial run refuses to resume.
fn resume_skip_set(
    config: &RunConfig,
    existing: &[LedgerRecord],
) -> Result<BTreeSet<(Objective, u64)>> {
    let expected = (config.schedule.n_checkpoints as usize) * ALL_METRICS.len();
    let mut counts: BTreeMap<(Objective, u64), usize> = BTreeMap::new();
    for r in existing {
        if r.dataset == config.dataset {
            *counts.entry((r.objective, r.model_params)).or_insert(0) += 1;
        }
    }
    let mut skip = BTreeSet::new();
    for ((objective, m), count) in counts {
        if count == expected {
            skip.insert((objective, m));
        } else {
            return Err(Error::Validation(format!(
                "ledger {} holds a partial run (objective={objective}, M={m}: {count}/{expected} \
                 records); refusing to resume — remove the ledger or restore the full run",
                config.ledger_path().display()
            )));
        }
    }
    Ok(skip)
}

/// Outcome counts of a sweep invocation.
pub struct SweepSummary {
    pub new_records: usize,
    pub skipped_runs: usize,
    pub trained_runs: usize,
}

/// Train the (objective x size) grid and append one ledger record per
/// (checkpoint, metric). Re-running after completion trains nothing.
pub fn cmd_sweep(config: &RunConfig) -> Result<SweepSummary> {
    let bench = load_benchmark(config)?;
    let ids: Vec<String> = bench.queries.iter().map(|q| q.query_id.clone()).collect();
    let (train_ids, eval_ids) = config.split_queries(&ids);
    let featurizer = Featurizer::new(&bench.index, &bench.corpus, &bench.queries, &bench.runs)?;

    let existing = if config.ledger_path().exists() {
        read_ledger(&config.ledger_path())?
    } else {
        Vec::new()
    };
    let skip = resume_skip_set(config, &existing)?;
    let total_runs = config.objectives.len() * config.widths.len();

    let request = SweepRequest {
        objectives: &config.objectives,
        widths: &config.widths,
        depth: config.depth,
        schedule: config.schedule,
        featurizer: &featurizer,
        qrels: &bench.qrels,
        runs: &bench.runs,
        train_query_ids: &train_ids,
        eval_query_ids: &eval_ids,
        batch_config: config.batch,
        ce_negatives: config.ce_negatives,
        seed: config.sweep_seed,
        dataset: &config.dataset,
        run_tag: &config.tag,
    };
    let checkpoints_dir = config.checkpoints_dir();
    let save = config.save_checkpoints;
    let records = sweep(&request, &skip, |objective, scorer_config, checkpoint| {
        if save {
            let path = checkpoints::checkpoint_path(
                &checkpoints_dir,
                objective,
                scorer_config.width,
                checkpoint.step,
            );
            checkpoints::save_scorer(&checkpoint.scorer, &path)
                .map_err(|e| rankscale_core::CoreError::Data { message: e.to_string() })?;
        }
        Ok(())
    })?;

    let mut writer = LedgerWriter::open(&config.ledger_path())?;
    for record in &records {
        writer.append(record)?;
    }
    let summary = SweepSummary {
        new_records: records.len(),
        skipped_runs: skip.len(),
        trained_runs: total_runs - skip.len(),
    };
    println!(
        "sweep: trained {} runs ({} skipped as complete), appended {} records -> {}",
        summary.trained_runs,
        summary.skipped_runs,
        summary.new_records,
        config.ledger_path().display()
    );
    Ok(summary)
}

/// Re-evaluate stored checkpoint dumps and write a fresh evaluation ledger.
pub fn cmd_eval(config: &RunConfig) -> Result<()> {
    let bench = load_benchmark(config)?;
    let ids: Vec<String> = bench.queries.iter().map(|q| q.query_id.clone()).collect();
    let (_, eval_ids) = config.split_queries(&ids);
    let featurizer = Featurizer::new(&bench.index, &bench.corpus, &bench.queries, &bench.runs)?;
    let eval_seed = rng::substream_seed(config.sweep_seed, "eval-ce");

    let out_path = config.eval_ledger_path();
    if out_path.exists() {
        std::fs::remove_file(&out_path)
            .map_err(|e| Error::io(format!("removing {}", out_path.display()), e))?;
    }
    let mut writer = LedgerWriter::open(&out_path)?;
    let mut n_checkpoints = 0usize;

    for &objective in &config.objectives {
        for &width in &config.widths {
            let dir = checkpoints::run_dir(&config.checkpoints_dir(), objective, width);
            if !dir.is_dir() {
                return Err(Error::Validation(format!(
                    "no stored checkpoints at {} — run `sweep` with save_checkpoints = true first",
                    dir.display()
                )));
            }
            let steps = checkpoints::list_checkpoint_steps(&dir)?;
            if steps.is_empty() {
                return Err(Error::Validation(format!(
                    "no checkpoint files under {}",
                    dir.display()
                )));
            }
            for step in steps {
                let path = checkpoints::checkpoint_path(
                    &config.checkpoints_dir(),
                    objective,
                    width,
                    step,
                );
                let scorer = checkpoints::load_scorer(&path)?;
                let m = scorer.config().param_count();
                let report = evaluate_checkpoint(
                    |qid, did| {
                        let x = featurizer.features(qid, did).expect("benchmark pair");
                        scorer.score(&x).expect("feature dim matches")
                    },
                    &eval_ids,
                    &bench.runs,
                    &bench.qrels,
                    config.ce_negatives,
                    eval_seed,
                )?;
                for metric in ALL_METRICS {
                    writer.append(&LedgerRecord {
                        objective,
                        model_params: m,
                        step,
                        examples: step * config.batch.effective_batch_size(objective) as u64,
                        metric,
                        value: report.value(metric),
                        dataset: config.dataset.clone(),
                        run_tag: config.tag.clone(),
                    })?;
                }
                n_checkpoints += 1;
            }
        }
    }
    println!(
        "eval: re-evaluated {} checkpoints -> {}",
        n_checkpoints,
        out_path.display()
    );
    Ok(())
}

/// Parameter count of the width at `data_size_index`, the size used by the
/// data-scaling protocol.
pub fn data_protocol_size(config: &RunConfig) -> u64 {
    ScorerConfig {
        width: config.widths[config.data_size_index],
        depth: config.depth,
        feature_dim: config.feature_dim(),
        seed: 0,
    }
    .param_count()
}

/// Build the observation series for one axis.
pub fn series_for_axis(
    config: &RunConfig,
    records: &[LedgerRecord],
    axis: ScalingAxis,
    objective: Objective,
    metric: MetricName,
) -> Result<ObservationSeries> {
    let series = match axis {
        ScalingAxis::Model => model_scaling_series(records, objective, metric)?,
        ScalingAxis::Data => {
            data_scaling_series(records, objective, metric, data_protocol_size(config))?
        }
        ScalingAxis::Joint => joint_scaling_series(records, objective, metric)?,
    };
    Ok(series)
}

/// Fit one axis/objective/metric slice of the ledger and describe the fit.
pub fn cmd_fit(
    config: &RunConfig,
    axis: ScalingAxis,
    objective: Objective,
    metric: MetricName,
    size_override: Option<u64>,
) -> Result<String> {
    let records = read_ledger(&config.ledger_path())?;
    let series = match (axis, size_override) {
        (ScalingAxis::Data, Some(m)) => data_scaling_series(&records, objective, metric, m)?,
        _ => series_for_axis(config, &records, axis, objective, metric)?,
    };
    let form = match axis {
        ScalingAxis::Model => PowerLawForm::ModelPower,
        ScalingAxis::Data => PowerLawForm::DataPower,
        ScalingAxis::Joint => PowerLawForm::JointAdditive,
    };
    let fit_result = fit(&series, form)?;
    let mut out = String::new();
    writeln!(
        out,
        "fit axis={} objective={objective} metric={metric} n_points={}",
        axis.file_tag(),
        series.points.len()
    )
    .expect("string write");
    writeln!(out, "{}", describe_fit(&fit_result)).expect("string write");
    Ok(out)
}

fn describe_fit(fit: &ScalingFit) -> String {
    let params = match fit.params {
        FitParams::Single { a, b, c } => {
            format!("a={} b={} c={}", format_sig9(a), format_sig9(b), format_sig9(c))
        }
        FitParams::Joint { a, b, alpha, c, beta } => format!(
            "a={} b={} alpha={} c={} beta={}",
            format_sig9(a),
            format_sig9(b),
            format_sig9(alpha),
            format_sig9(c),
            format_sig9(beta)
        ),
    };
    format!(
        "params {params} train_rmse={} converged={} restarts={} bounds_active={}",
        format_sig9(fit.train_rmse),
        fit.converged,
        fit.n_restarts_used,
        fit.bounds_active
    )
}

/// Run one forecast protocol.
pub fn protocol_forecast(
    config: &RunConfig,
    records: &[LedgerRecord],
    axis: ScalingAxis,
    objective: Objective,
    metric: MetricName,
) -> Result<ForecastReport> {
    let report = match axis {
        ScalingAxis::Model => model_scaling_protocol(records, objective, metric)?,
        ScalingAxis::Data => {
            data_scaling_protocol(records, objective, metric, data_protocol_size(config))?
        }
        ScalingAxis::Joint => joint_scaling_protocol(records, objective, metric)?,
    };
    Ok(report)
}

/// All (axis x objective) forecasts for one metric.
pub fn forecast_all(
    config: &RunConfig,
    records: &[LedgerRecord],
    metric: MetricName,
) -> Result<Vec<(ScalingAxis, Objective, ForecastReport)>> {
    let mut out = Vec::new();
    for axis in ScalingAxis::ALL {
        for &objective in &config.objectives {
            let report = protocol_forecast(config, records, axis, objective, metric)?;
            out.push((axis, objective, report));
        }
    }
    Ok(out)
}

fn coord_fields(coords: Coords) -> String {
    match coords {
        Coords::X(x) => format!("x={x}"),
        Coords::MS(m, s) => format!("M={m} S={s}"),
    }
}

/// Machine-readable forecast file: one line per held-out point plus a
/// summary line.
pub fn write_forecast_file(
    path: &Path,
    axis: ScalingAxis,
    objective: Objective,
    metric: MetricName,
    report: &ForecastReport,
) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    }
    let mut out = String::new();
    writeln!(
        out,
        "# forecast axis={} objective={objective} metric={metric}",
        axis.file_tag()
    )
    .expect("string write");
    for p in &report.held_out {
        writeln!(
            out,
            "heldout {} y_true={} y_pred={}",
            coord_fields(p.coords),
            format_sig9(p.y_true),
            format_sig9(p.y_pred)
        )
        .expect("string write");
    }
    writeln!(
        out,
        "summary rmse={} mae={} {}",
        format_sig9(report.rmse),
        format_sig9(report.mae),
        describe_fit(&report.fit)
    )
    .expect("string write");
    std::fs::write(path, out).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Human-readable forecast summary in the reference-table layout
/// (Scaling x Objective with RMSE/MAE columns).
pub fn forecast_summary_table(
    metric: MetricName,
    forecasts: &[(ScalingAxis, Objective, ForecastReport)],
) -> String {
    let mut out = String::new();
    writeln!(out, "{metric} hold-out forecasting errors (this benchmark)").expect("string write");
    writeln!(out, "{:<8} {:<10} {:>10} {:>10}", "Scaling", "Objective", "Test RMSE", "Test MAE")
        .expect("string write");
    for (axis, objective, report) in forecasts {
        writeln!(
            out,
            "{:<8} {:<10} {:>10.3} {:>10.3}",
            axis.label(),
            objective.to_string(),
            report.rmse,
            report.mae
        )
        .expect("string write");
    }
    out
}

/// Run the three protocols for every objective, writing per-combination
/// machine-readable files and one summary table.
pub fn cmd_forecast(config: &RunConfig, metric: MetricName) -> Result<usize> {
    let records = read_ledger(&config.ledger_path())?;
    let forecasts = forecast_all(config, &records, metric)?;
    let dir = config.forecasts_dir();
    for (axis, objective, report) in &forecasts {
        let path = dir.join(format!(
            "forecast_{}_{objective}_{}.txt",
            axis.file_tag(),
            metric_file_tag(metric)
        ));
        write_forecast_file(&path, *axis, *objective, metric, report)?;
    }
    let summary = forecast_summary_table(metric, &forecasts);
    let summary_path = dir.join(format!("summary_{}.txt", metric_file_tag(metric)));
    std::fs::write(&summary_path, &summary)
        .map_err(|e| Error::io(format!("writing {}", summary_path.display()), e))?;
    println!("{summary}");
    println!(
        "forecast: wrote {} reports and {} -> {}",
        forecasts.len(),
        summary_path.file_name().unwrap_or_default().to_string_lossy(),
        dir.display()
    );
    Ok(forecasts.len())
}
