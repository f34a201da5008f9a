//! Regret and constraint-violation accounting and growth-rate fits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::RoundFunctions;
use crate::point::Point;

/// Floor applied to magnitudes before taking logs in slope fits.
pub const SLOPE_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub t: usize,
    pub f_val: f64,
    pub g_val: f64,
    /// Dual variable in force when `x_t` was played.
    pub lambda: f64,
    pub x_hash: String,
}

/// Output of one online run.
#[derive(Clone, Debug, Default)]
pub struct RunLog {
    pub records: Vec<RoundRecord>,
    /// Played points `x_1..x_T`, when requested.
    pub iterates: Option<Vec<Point>>,
    /// Number of points (played and inner) that passed the feasibility check.
    pub feasibility_checks: usize,
    /// `Σ_t λ_t²`, the dual-dependent term of the FTPL regret bound.
    pub lambda_sq_sum: f64,
    /// Effective parameters, for logging.
    pub params: serde_json::Value,
}

impl RunLog {
    pub fn violation(&self) -> f64 {
        self.records.iter().map(|r| r.g_val).sum()
    }

    pub fn cumulative_violation(&self) -> f64 {
        self.records.iter().map(|r| r.g_val.max(0.0)).sum()
    }
}

/// Prefix sums of `f_t(x_t) − f_t(x*)`.
pub fn regret_curve(records: &[RoundRecord], x_star: &Point, rounds: &[RoundFunctions]) -> Result<Vec<f64>> {
    if records.len() != rounds.len() {
        return Err(Error::LengthMismatch(format!(
            "{} records but {} rounds",
            records.len(),
            rounds.len()
        )));
    }
    let mut total = 0.0;
    Ok(records
        .iter()
        .zip(rounds)
        .map(|(r, rf)| {
            total += r.f_val - rf.loss_value(x_star);
            total
        })
        .collect())
}

/// Prefix sums of `g_t(x_t)`.
pub fn violation_curve(records: &[RoundRecord]) -> Vec<f64> {
    prefix_sums(records.iter().map(|r| r.g_val))
}

/// Prefix sums of `[g_t(x_t)]₊`.
pub fn cumulative_violation_curve(records: &[RoundRecord]) -> Vec<f64> {
    prefix_sums(records.iter().map(|r| r.g_val.max(0.0)))
}

fn prefix_sums(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut total = 0.0;
    values
        .map(|v| {
            total += v;
            total
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least-squares line through `(log T, log metric)`.
pub fn slope_fit(horizons: &[f64], values: &[f64]) -> Result<SlopeFit> {
    if horizons.len() != values.len() {
        return Err(Error::LengthMismatch(format!(
            "{} horizons but {} values",
            horizons.len(),
            values.len()
        )));
    }
    let mut distinct = horizons.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InvalidParameter("slope fit needs at least 3 distinct horizons".into()));
    }
    if let Some(bad) = horizons.iter().chain(values).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "slope fit needs positive finite inputs, got {bad}"
        )));
    }
    let xs: Vec<f64> = horizons.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(SlopeFit { slope, intercept, r2 })
}

/// Slope fit of `max(|metric|, 1e-6)`; the growth bounds are one-sided.
pub fn slope_fit_magnitude(horizons: &[f64], values: &[f64]) -> Result<SlopeFit> {
    let mags: Vec<f64> = values.iter().map(|v| v.abs().max(SLOPE_FLOOR)).collect();
    slope_fit(horizons, &mags)
}

/// Mean and standard error of a sample.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
