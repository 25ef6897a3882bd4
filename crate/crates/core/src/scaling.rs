//! Saturating power-law fits and hold-out forecasting.
//!
//! Three forms are supported:
//!
//! * model scaling:  `y = a - b * M^-c`
//! * data scaling:   `y = a - b * S^-c`
//! * joint scaling:  `y = a - b * M^-alpha - c * S^-beta`
//!
//! Metrics that improve with scale (NDCG, MAP, MRR) use the forms above;
//! contrastive entropy decreases toward its asymptote, so its fits mirror
//! the sign: `y = a + b * x^-c` (and likewise for the joint form).
//!
//! Fitting minimizes squared error with damped Gauss-Newton steps
//! (Levenberg-Marquardt style damping: x10 on a failed step, /10 on
//! success), analytic Jacobians, and a fixed multi-start grid, so the result
//! is deterministic. Parameters are box-constrained by projection.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math;
use crate::ledger::{LedgerRecord, Objective};
use crate::metrics::MetricName;
use crate::Result;

/// Default number of held-out observations for forecasting.
pub const DEFAULT_HOLDOUT: usize = 5;

/// Which power-law form to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerLawForm {
    /// `y = a -/+ b * x^-c` over model size.
    ModelPower,
    /// `y = a -/+ b * x^-c` over training step.
    DataPower,
    /// `y = a -/+ (b * M^-alpha + c * S^-beta)`.
    JointAdditive,
}

impl PowerLawForm {
    fn n_params(self) -> usize {
        match self {
            PowerLawForm::ModelPower | PowerLawForm::DataPower => 3,
            PowerLawForm::JointAdditive => 5,
        }
    }
}

/// Whether the metric grows toward the asymptote or decays toward it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl Direction {
    /// CE decreases with scale; the ranking metrics increase.
    pub fn for_metric(metric: MetricName) -> Self {
        match metric {
            MetricName::Ce => Direction::Decreasing,
            _ => Direction::Increasing,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Direction::Increasing => -1.0,
            Direction::Decreasing => 1.0,
        }
    }
}

/// Coordinates of one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coords {
    X(f64),
    MS(f64, f64),
}

impl Coords {
    pub fn x(&self) -> f64 {
        match self {
            Coords::X(x) => *x,
            Coords::MS(m, _) => *m,
        }
    }
}

/// One observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObsPoint {
    pub coords: Coords,
    pub y: f64,
}

/// Series metadata carried through fits and reports.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMeta {
    pub objective: Objective,
    pub metric: MetricName,
    pub dataset: String,
}

/// Observations along one scaling axis (or the joint grid).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSeries {
    pub points: Vec<ObsPoint>,
    pub meta: SeriesMeta,
}

impl ObservationSeries {
    /// Validate invariants for the given form: minimum point counts,
    /// strictly positive coordinates, sorted order (by x; by (M, S) for
    /// joint), and coordinate kinds matching the form.
    fn validate(&self, form: PowerLawForm) -> Result<()> {
        let min = match form {
            PowerLawForm::JointAdditive => 6,
            _ => 4,
        };
        if self.points.len() < min {
            return Err(CoreError::Precondition {
                message: format!(
                    "need at least {min} points for {form:?}, got {}",
                    self.points.len()
                ),
            });
        }
        let mut prev: Option<(f64, f64)> = None;
        for p in &self.points {
            let key = match (form, p.coords) {
                (PowerLawForm::JointAdditive, Coords::MS(m, s)) => {
                    if m <= 0.0 || s <= 0.0 {
                        return Err(CoreError::Precondition {
                            message: "joint coordinates must be strictly positive".into(),
                        });
                    }
                    (m, s)
                }
                (PowerLawForm::JointAdditive, Coords::X(_)) => {
                    return Err(CoreError::Argument {
                        message: "joint fit needs (M, S) coordinates".into(),
                    });
                }
                (_, Coords::X(x)) => {
                    if x <= 0.0 {
                        return Err(CoreError::Precondition {
                            message: "x values must be strictly positive".into(),
                        });
                    }
                    (x, 0.0)
                }
                (_, Coords::MS(..)) => {
                    return Err(CoreError::Argument {
                        message: "single-axis fit needs scalar coordinates".into(),
                    });
                }
            };
            if !p.y.is_finite() {
                return Err(CoreError::Precondition {
                    message: "metric values must be finite".into(),
                });
            }
            if let Some(prev) = prev {
                if key <= prev {
                    return Err(CoreError::Precondition {
                        message: "points must be sorted by x (by S within M for joint)".into(),
                    });
                }
            }
            prev = Some(key);
        }
        Ok(())
    }
}

/// Fitted parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitParams {
    /// `(a, b, c)` of the single-axis form.
    Single { a: f64, b: f64, c: f64 },
    /// `(a, b, alpha, c, beta)` of the joint form.
    Joint { a: f64, b: f64, alpha: f64, c: f64, beta: f64 },
}

/// A fitted power law plus residual diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub form: PowerLawForm,
    pub direction: Direction,
    pub params: FitParams,
    pub train_rmse: f64,
    pub converged: bool,
    pub n_restarts_used: u32,
    /// True when the best fit ended on a box-constraint boundary.
    pub bounds_active: bool,
}

impl ScalingFit {
    /// Evaluate the fitted form. Errors on non-positive coordinates or a
    /// coordinate kind that does not match the form.
    pub fn predict(&self, at: Coords) -> Result<f64> {
        match (self.params, at) {
            (FitParams::Single { a, b, c }, Coords::X(x)) => {
                if x <= 0.0 {
                    return Err(CoreError::Argument {
                        message: format!("prediction point must be > 0, got {x}"),
                    });
                }
                Ok(a + self.direction.sign() * b * math::powf(x, -c))
            }
            (FitParams::Joint { a, b, alpha, c, beta }, Coords::MS(m, s)) => {
                if m <= 0.0 || s <= 0.0 {
                    return Err(CoreError::Argument {
                        message: "prediction point must be > 0".into(),
                    });
                }
                Ok(a + self.direction.sign() * (b * math::powf(m, -alpha) + c * math::powf(s, -beta)))
            }
            _ => Err(CoreError::Argument {
                message: "coordinate kind does not match fitted form".into(),
            }),
        }
    }
}

/// Parameter boxes. `a` gets a soft ceiling above 1 only for [0,1]-bounded
/// metrics, leaving mild extrapolation headroom; CE fits allow a large
/// asymptote.
#[derive(Clone, Copy)]
struct Bounds {
    a: (f64, f64),
    scale: (f64, f64),    // b, c of the joint form
    exponent: (f64, f64), // c, alpha, beta
}

fn bounds_for(metric: MetricName) -> Bounds {
    let a_hi = match metric {
        MetricName::Ce => 1.0e6,
        _ => 1.5,
    };
    Bounds {
        a: (0.0, a_hi),
        scale: (1.0e-12, 1.0e9),
        exponent: (1.0e-6, 20.0),
    }
}

const MAX_ITERS: usize = 500;
const REL_TOL: f64 = 1e-10;
const INIT_EXPONENTS: [f64; 3] = [0.1, 0.3, 1.0];

/// Fit one form to the series by damped Gauss-Newton with a fixed restart
/// grid; the restart with the lowest training RMSE wins. Deterministic.
pub fn fit(series: &ObservationSeries, form: PowerLawForm) -> Result<ScalingFit> {
    series.validate(form)?;
    let direction = Direction::for_metric(series.meta.metric);
    let bounds = bounds_for(series.meta.metric);
    let ys: Vec<f64> = series.points.iter().map(|p| p.y).collect();
    let y_best = match direction {
        Direction::Increasing => ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        Direction::Decreasing => ys.iter().cloned().fold(f64::INFINITY, f64::min),
    };
    let a_starts = match direction {
        Direction::Increasing => [y_best, y_best + 0.05],
        Direction::Decreasing => [y_best, (y_best - 0.05).max(0.0)],
    };

    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    let mut restarts = 0u32;
    for &a0 in &a_starts {
        let a0 = a0.clamp(bounds.a.0, bounds.a.1);
        match form {
            PowerLawForm::ModelPower | PowerLawForm::DataPower => {
                for &c0 in &INIT_EXPONENTS {
                    let theta0 = vec![a0, single_b0(series, direction, a0, c0), c0];
                    restarts += 1;
                    consider(series, form, direction, bounds, theta0, &mut best);
                }
            }
            PowerLawForm::JointAdditive => {
                for &alpha0 in &INIT_EXPONENTS {
                    for &beta0 in &INIT_EXPONENTS {
                        let (b0, c0) = joint_scales0(series, direction, a0, alpha0, beta0);
                        let theta0 = vec![a0, b0, alpha0, c0, beta0];
                        restarts += 1;
                        consider(series, form, direction, bounds, theta0, &mut best);
                    }
                }
            }
        }
    }

    let (sse, theta, converged) = best.ok_or_else(|| CoreError::Fit {
        message: format!(
            "all restarts diverged fitting {form:?} for {}/{}",
            series.meta.objective, series.meta.metric
        ),
    })?;
    let n = series.points.len() as f64;
    let params = match form {
        PowerLawForm::JointAdditive => FitParams::Joint {
            a: theta[0],
            b: theta[1],
            alpha: theta[2],
            c: theta[3],
            beta: theta[4],
        },
        _ => FitParams::Single {
            a: theta[0],
            b: theta[1],
            c: theta[2],
        },
    };
    let bounds_active = on_boundary(&theta, form, bounds);
    Ok(ScalingFit {
        form,
        direction,
        params,
        train_rmse: math::sqrt(sse / n),
        converged,
        n_restarts_used: restarts,
        bounds_active,
    })
}

/// Closed-form `b` from the first and last points given `(a0, c0)`:
/// `b = |a - y| * x^c` at each end, averaged.
fn single_b0(series: &ObservationSeries, direction: Direction, a0: f64, c0: f64) -> f64 {
    let first = &series.points[0];
    let last = &series.points[series.points.len() - 1];
    let est = |p: &ObsPoint| {
        let gap = match direction {
            Direction::Increasing => a0 - p.y,
            Direction::Decreasing => p.y - a0,
        };
        gap * math::powf(p.coords.x(), c0)
    };
    let b = 0.5 * (est(first) + est(last));
    if b.is_finite() && b > 0.0 {
        b
    } else {
        0.1
    }
}

/// Split the gap at the smallest-(M, S) corner evenly between the two
/// additive terms.
fn joint_scales0(
    series: &ObservationSeries,
    direction: Direction,
    a0: f64,
    alpha0: f64,
    beta0: f64,
) -> (f64, f64) {
    let p = &series.points[0];
    let Coords::MS(m, s) = p.coords else {
        return (0.1, 0.1);
    };
    let gap = match direction {
        Direction::Increasing => a0 - p.y,
        Direction::Decreasing => p.y - a0,
    };
    let gap = gap.max(1e-6);
    (0.5 * gap * math::powf(m, alpha0), 0.5 * gap * math::powf(s, beta0))
}

fn consider(
    series: &ObservationSeries,
    form: PowerLawForm,
    direction: Direction,
    bounds: Bounds,
    theta0: Vec<f64>,
    best: &mut Option<(f64, Vec<f64>, bool)>,
) {
    if let Some((sse, theta, converged)) = levenberg_marquardt(series, form, direction, bounds, theta0)
    {
        let better = match best {
            Some((best_sse, _, _)) => sse < *best_sse,
            None => true,
        };
        if better {
            *best = Some((sse, theta, converged));
        }
    }
}

fn project(theta: &mut [f64], form: PowerLawForm, bounds: Bounds) {
    theta[0] = theta[0].clamp(bounds.a.0, bounds.a.1);
    match form {
        PowerLawForm::JointAdditive => {
            theta[1] = theta[1].clamp(bounds.scale.0, bounds.scale.1);
            theta[2] = theta[2].clamp(bounds.exponent.0, bounds.exponent.1);
            theta[3] = theta[3].clamp(bounds.scale.0, bounds.scale.1);
            theta[4] = theta[4].clamp(bounds.exponent.0, bounds.exponent.1);
        }
        _ => {
            theta[1] = theta[1].clamp(bounds.scale.0, bounds.scale.1);
            theta[2] = theta[2].clamp(bounds.exponent.0, bounds.exponent.1);
        }
    }
}

fn on_boundary(theta: &[f64], form: PowerLawForm, bounds: Bounds) -> bool {
    let eps = 1e-12;
    let at = |v: f64, (lo, hi): (f64, f64)| (v - lo).abs() <= eps || (hi - v).abs() <= eps;
    match form {
        PowerLawForm::JointAdditive => {
            at(theta[0], bounds.a)
                || at(theta[1], bounds.scale)
                || at(theta[2], bounds.exponent)
                || at(theta[3], bounds.scale)
                || at(theta[4], bounds.exponent)
        }
        _ => at(theta[0], bounds.a) || at(theta[1], bounds.scale) || at(theta[2], bounds.exponent),
    }
}

fn model_value(theta: &[f64], form: PowerLawForm, direction: Direction, coords: Coords) -> f64 {
    match form {
        PowerLawForm::JointAdditive => {
            let Coords::MS(m, s) = coords else { unreachable!("validated") };
            theta[0]
                + direction.sign()
                    * (theta[1] * math::powf(m, -theta[2]) + theta[3] * math::powf(s, -theta[4]))
        }
        _ => {
            let x = coords.x();
            theta[0] + direction.sign() * theta[1] * math::powf(x, -theta[2])
        }
    }
}

/// Row of `d model / d theta` for one point.
fn jacobian_row(theta: &[f64], form: PowerLawForm, direction: Direction, coords: Coords, row: &mut [f64]) {
    let sign = direction.sign();
    match form {
        PowerLawForm::JointAdditive => {
            let Coords::MS(m, s) = coords else { unreachable!("validated") };
            let pm = math::powf(m, -theta[2]);
            let ps = math::powf(s, -theta[4]);
            row[0] = 1.0;
            row[1] = sign * pm;
            row[2] = sign * theta[1] * pm * (-math::ln(m));
            row[3] = sign * ps;
            row[4] = sign * theta[3] * ps * (-math::ln(s));
        }
        _ => {
            let x = coords.x();
            let px = math::powf(x, -theta[2]);
            row[0] = 1.0;
            row[1] = sign * px;
            row[2] = sign * theta[1] * px * (-math::ln(x));
        }
    }
}

fn sse_of(series: &ObservationSeries, form: PowerLawForm, direction: Direction, theta: &[f64]) -> f64 {
    series
        .points
        .iter()
        .map(|p| {
            let r = p.y - model_value(theta, form, direction, p.coords);
            r * r
        })
        .sum()
}

/// Damped Gauss-Newton from one start. Returns `(sse, theta, converged)`;
/// `None` when every step fails (singular systems throughout).
fn levenberg_marquardt(
    series: &ObservationSeries,
    form: PowerLawForm,
    direction: Direction,
    bounds: Bounds,
    mut theta: Vec<f64>,
) -> Option<(f64, Vec<f64>, bool)> {
    let np = form.n_params();
    project(&mut theta, form, bounds);
    let mut sse = sse_of(series, form, direction, &theta);
    if !sse.is_finite() {
        return None;
    }
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut row = vec![0.0; np];

    for _ in 0..MAX_ITERS {
        // Accumulate J^T J and J^T r.
        let mut jtj = vec![0.0; np * np];
        let mut jtr = vec![0.0; np];
        for p in &series.points {
            jacobian_row(&theta, form, direction, p.coords, &mut row);
            let r = p.y - model_value(&theta, form, direction, p.coords);
            for i in 0..np {
                jtr[i] += row[i] * r;
                for j in 0..np {
                    jtj[i * np + j] += row[i] * row[j];
                }
            }
        }

        let mut stepped = false;
        for _ in 0..24 {
            let mut damped = jtj.clone();
            for i in 0..np {
                damped[i * np + i] += lambda;
            }
            let Some(delta) = solve(&mut damped, &jtr, np) else {
                lambda = (lambda * 10.0).min(1e12);
                continue;
            };
            let mut candidate: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + d).collect();
            project(&mut candidate, form, bounds);
            let candidate_sse = sse_of(series, form, direction, &candidate);
            if candidate_sse.is_finite() && candidate_sse <= sse {
                let rel_change = theta
                    .iter()
                    .zip(&candidate)
                    .map(|(a, b)| (a - b).abs() / a.abs().max(1e-12))
                    .fold(0.0, f64::max);
                theta = candidate;
                sse = candidate_sse;
                lambda = (lambda / 10.0).max(1e-14);
                stepped = true;
                if rel_change < REL_TOL {
                    converged = true;
                }
                break;
            }
            lambda = (lambda * 10.0).min(1e12);
        }
        if converged || !stepped {
            break;
        }
    }
    Some((sse, theta, converged))
}

/// Gaussian elimination with partial pivoting on an `n x n` system.
fn solve(a: &mut [f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut x: Vec<f64> = b.to_vec();
    for col in 0..n {
        let mut pivot = col;
        for r in (col + 1)..n {
            if a[r * n + col].abs() > a[pivot * n + col].abs() {
                pivot = r;
            }
        }
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            x.swap(col, pivot);
        }
        let d = a[col * n + col];
        for r in (col + 1)..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut v = x[col];
        for k in (col + 1)..n {
            v -= a[col * n + k] * x[k];
        }
        x[col] = v / a[col * n + col];
        if !x[col].is_finite() {
            return None;
        }
    }
    Some(x)
}

/// One held-out observation with its prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeldOutPoint {
    pub coords: Coords,
    pub y_true: f64,
    pub y_pred: f64,
}

/// Held-out predictions vs. actuals: the artifact's headline output.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastReport {
    pub held_out: Vec<HeldOutPoint>,
    pub rmse: f64,
    pub mae: f64,
    pub fit: ScalingFit,
}

impl ForecastReport {
    fn from_predictions(held_out: Vec<HeldOutPoint>, fit: ScalingFit) -> Result<Self> {
        if held_out.is_empty() {
            return Err(CoreError::Precondition {
                message: "forecast needs at least one held-out point".into(),
            });
        }
        let n = held_out.len() as f64;
        let mae = held_out.iter().map(|p| (p.y_true - p.y_pred).abs()).sum::<f64>() / n;
        let rmse = math::sqrt(
            held_out
                .iter()
                .map(|p| (p.y_true - p.y_pred) * (p.y_true - p.y_pred))
                .sum::<f64>()
                / n,
        );
        debug_assert!(rmse >= mae - 1e-12);
        Ok(ForecastReport { held_out, rmse, mae, fit })
    }
}

/// Hold out the tail of the series, refit on the rest, and report the
/// held-out error. Single-axis series hold out the `n_holdout` largest-x
/// points; joint series hold out the `n_holdout` largest-S checkpoints per
/// model size.
pub fn holdout_forecast(
    series: &ObservationSeries,
    n_holdout: usize,
    form: PowerLawForm,
) -> Result<ForecastReport> {
    series.validate(form)?;
    if n_holdout == 0 {
        return Err(CoreError::Argument {
            message: "n_holdout must be >= 1".into(),
        });
    }
    let (train_points, held): (Vec<ObsPoint>, Vec<ObsPoint>) = match form {
        PowerLawForm::JointAdditive => {
            let mut held = Vec::new();
            let mut train = Vec::new();
            // Points are sorted by (M, S); group by M and split each tail.
            let mut group: Vec<ObsPoint> = Vec::new();
            let flush = |group: &mut Vec<ObsPoint>, train: &mut Vec<ObsPoint>, held: &mut Vec<ObsPoint>| {
                let cut = group.len().saturating_sub(n_holdout);
                for (i, p) in group.drain(..).enumerate() {
                    if i < cut {
                        train.push(p);
                    } else {
                        held.push(p);
                    }
                }
            };
            let mut current_m = f64::NAN;
            for p in &series.points {
                let Coords::MS(m, _) = p.coords else { unreachable!("validated") };
                if m != current_m && !group.is_empty() {
                    flush(&mut group, &mut train, &mut held);
                }
                current_m = m;
                group.push(*p);
            }
            flush(&mut group, &mut train, &mut held);
            (train, held)
        }
        _ => {
            if series.points.len() <= n_holdout {
                return Err(CoreError::Precondition {
                    message: format!(
                        "cannot hold out {n_holdout} of {} points",
                        series.points.len()
                    ),
                });
            }
            let cut = series.points.len() - n_holdout;
            (
                series.points[..cut].to_vec(),
                series.points[cut..].to_vec(),
            )
        }
    };
    let train_series = ObservationSeries {
        points: train_points,
        meta: series.meta.clone(),
    };
    // Fit validation raises the precondition error when the training split
    // is too small.
    let fit_result = fit(&train_series, form)?;
    let held_out = held
        .iter()
        .map(|p| {
            Ok(HeldOutPoint {
                coords: p.coords,
                y_true: p.y,
                y_pred: fit_result.predict(p.coords)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ForecastReport::from_predictions(held_out, fit_result)
}

// ───────────────────────── ledger-driven protocols ─────────────────────────

fn filtered(records: &[LedgerRecord], objective: Objective, metric: MetricName) -> Vec<&LedgerRecord> {
    records
        .iter()
        .filter(|r| r.objective == objective && r.metric == metric)
        .collect()
}

fn meta_of(records: &[&LedgerRecord], objective: Objective, metric: MetricName) -> SeriesMeta {
    SeriesMeta {
        objective,
        metric,
        dataset: records
            .first()
            .map(|r| r.dataset.clone())
            .unwrap_or_else(|| "unknown".to_string()),
    }
}

/// Final-checkpoint metric per model size, sorted by size.
pub fn model_scaling_series(
    records: &[LedgerRecord],
    objective: Objective,
    metric: MetricName,
) -> Result<ObservationSeries> {
    let recs = filtered(records, objective, metric);
    let mut finals: alloc::collections::BTreeMap<u64, (u64, f64)> = alloc::collections::BTreeMap::new();
    for r in &recs {
        let entry = finals.entry(r.model_params).or_insert((r.step, r.value));
        if r.step >= entry.0 {
            *entry = (r.step, r.value);
        }
    }
    let points: Vec<ObsPoint> = finals
        .iter()
        .map(|(&m, &(_, y))| ObsPoint {
            coords: Coords::X(m as f64),
            y,
        })
        .collect();
    Ok(ObservationSeries {
        points,
        meta: meta_of(&recs, objective, metric),
    })
}

/// Per-checkpoint metric for one model size, sorted by step.
pub fn data_scaling_series(
    records: &[LedgerRecord],
    objective: Objective,
    metric: MetricName,
    model_size: u64,
) -> Result<ObservationSeries> {
    let recs: Vec<&LedgerRecord> = filtered(records, objective, metric)
        .into_iter()
        .filter(|r| r.model_params == model_size)
        .collect();
    let mut points: Vec<ObsPoint> = recs
        .iter()
        .map(|r| ObsPoint {
            coords: Coords::X(r.step as f64),
            y: r.value,
        })
        .collect();
    points.sort_by(|a, b| a.coords.x().partial_cmp(&b.coords.x()).expect("finite steps"));
    Ok(ObservationSeries {
        points,
        meta: meta_of(&recs, objective, metric),
    })
}

/// The full (size x checkpoint) grid, sorted by (M, S). Errors list the
/// missing cells when the grid is ragged.
pub fn joint_scaling_series(
    records: &[LedgerRecord],
    objective: Objective,
    metric: MetricName,
) -> Result<ObservationSeries> {
    let recs = filtered(records, objective, metric);
    let mut sizes: Vec<u64> = recs.iter().map(|r| r.model_params).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let mut steps: Vec<u64> = recs.iter().map(|r| r.step).collect();
    steps.sort_unstable();
    steps.dedup();
    let mut cells: alloc::collections::BTreeMap<(u64, u64), f64> = alloc::collections::BTreeMap::new();
    for r in &recs {
        cells.insert((r.model_params, r.step), r.value);
    }
    let mut missing = Vec::new();
    let mut points = Vec::with_capacity(sizes.len() * steps.len());
    for &m in &sizes {
        for &s in &steps {
            match cells.get(&(m, s)) {
                Some(&y) => points.push(ObsPoint {
                    coords: Coords::MS(m as f64, s as f64),
                    y,
                }),
                None => missing.push(format!("(M={m}, S={s})")),
            }
        }
    }
    if !missing.is_empty() {
        return Err(CoreError::Data {
            message: format!("ragged checkpoint grid; missing cells: {}", missing.join(", ")),
        });
    }
    Ok(ObservationSeries {
        points,
        meta: meta_of(&recs, objective, metric),
    })
}

/// Forecast the largest model size's metric from the smaller sizes' final
/// checkpoints. Needs at least 4 sizes.
pub fn model_scaling_protocol(
    records: &[LedgerRecord],
    objective: Objective,
    metric: MetricName,
) -> Result<ForecastReport> {
    let series = model_scaling_series(records, objective, metric)?;
    if series.points.len() < 4 {
        return Err(CoreError::Precondition {
            message: format!(
                "model scaling needs final checkpoints for >= 4 sizes, got {}",
                series.points.len()
            ),
        });
    }
    holdout_forecast(&series, 1, PowerLawForm::ModelPower)
}

/// Forecast the last `DEFAULT_HOLDOUT` checkpoints of one model size from
/// its earlier checkpoints. Needs at least 10 checkpoints.
pub fn data_scaling_protocol(
    records: &[LedgerRecord],
    objective: Objective,
    metric: MetricName,
    model_size: u64,
) -> Result<ForecastReport> {
    let series = data_scaling_series(records, objective, metric, model_size)?;
    if series.points.len() < 10 {
        return Err(CoreError::Precondition {
            message: format!(
                "data scaling needs >= 10 checkpoints for M={model_size}, got {}",
                series.points.len()
            ),
        });
    }
    holdout_forecast(&series, DEFAULT_HOLDOUT, PowerLawForm::DataPower)
}

/// Fit the joint surface on all but the last `DEFAULT_HOLDOUT` checkpoints
/// per size and report pooled error over the held-out union.
pub fn joint_scaling_protocol(
    records: &[LedgerRecord],
    objective: Objective,
    metric: MetricName,
) -> Result<ForecastReport> {
    let series = joint_scaling_series(records, objective, metric)?;
    holdout_forecast(&series, DEFAULT_HOLDOUT, PowerLawForm::JointAdditive)
}
