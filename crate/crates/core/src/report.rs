//! Convergence-rate fits and run summaries.

use serde::{Deserialize, Serialize};

use crate::adapt::{AdaptiveConfig, Column, ConvergenceRecord, StopReason};
use crate::error::{AfemError, Result};

/// Least-squares line `log(value) = intercept + slope · log(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    let n = xs.len();
    if n < 3 {
        return Err(AfemError::InsufficientData(n));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(AfemError::InsufficientData(1));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        points: n,
    })
}

/// Fits `log(value)` against `log(n)` over the last `window` rows (all rows when `None`).
///
/// Non-positive and non-finite values are dropped after the window is taken.
pub fn fit_rate(n: &[f64], values: &[f64], window: Option<usize>) -> Result<RateFit> {
    let start = window.map_or(0, |w| n.len().saturating_sub(w));
    let (xs, ys): (Vec<f64>, Vec<f64>) = n[start..]
        .iter()
        .zip(&values[start..])
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    least_squares(&xs, &ys)
}

/// Fits `log(value_k) = intercept + slope · k` for `k ≥ first`; the
/// contraction factor is `exp(slope)`.
pub fn fit_geometric(values: &[f64], first: usize) -> Result<RateFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = values
        .iter()
        .enumerate()
        .skip(first)
        .filter(|(_, y)| **y > 0.0 && y.is_finite())
        .map(|(k, y)| (k as f64, y.ln()))
        .unzip();
    least_squares(&xs, &ys)
}

impl ConvergenceRecord {
    /// [`fit_rate`] of a column against the number of degrees of freedom.
    pub fn fit(&self, column: Column, window: Option<usize>) -> Result<RateFit> {
        fit_rate(&self.ndofs(), &self.column(column), window)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalValues {
    pub ndof: usize,
    pub elements: usize,
    pub eta: f64,
    pub osc: f64,
    pub error: Option<f64>,
    pub recovered_error: Option<f64>,
    pub effectivity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub error: Option<RateFit>,
    pub eta: Option<RateFit>,
    pub recovered_error: Option<RateFit>,
}

/// Machine-readable summary of one run (`summary.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub estimator: String,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub config: AdaptiveConfig,
    #[serde(rename = "final")]
    pub final_values: FinalValues,
    pub rates: Rates,
}

/// Trailing window used for the summary rates.
pub const SUMMARY_WINDOW: usize = 5;

impl RunSummary {
    pub fn new(problem: &str, config: &AdaptiveConfig, record: &ConvergenceRecord, stop: StopReason) -> Result<Self> {
        let last = record.last().ok_or(AfemError::InsufficientData(0))?;
        let w = Some(SUMMARY_WINDOW);
        Ok(RunSummary {
            problem: problem.to_string(),
            estimator: config.estimator.to_string(),
            iterations: record.len(),
            stop_reason: stop,
            config: config.clone(),
            final_values: FinalValues {
                ndof: last.ndof,
                elements: last.ne,
                eta: last.eta,
                osc: last.osc,
                error: last.err,
                recovered_error: last.rec_err,
                effectivity: last.effectivity,
            },
            rates: Rates {
                error: record.fit(Column::Err, w).ok(),
                eta: record.fit(Column::Eta, w).ok(),
                recovered_error: record.fit(Column::RecErr, w).ok(),
            },
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary is serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let n: Vec<f64> = (1..8).map(|i| (100 * i * i) as f64).collect();
        let half: Vec<f64> = n.iter().map(|x| x.powf(-0.5)).collect();
        let fit = fit_rate(&n, &half, None).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12 && (fit.r_squared - 1.0).abs() < 1e-12);
        let one: Vec<f64> = n.iter().map(|x| 3.0 / x).collect();
        let fit = fit_rate(&n, &one, Some(4)).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-10);
        assert_eq!(fit.points, 4);
    }

    #[test]
    fn drops_non_positive_values_and_needs_three_points() {
        let n = [10.0, 20.0, 40.0, 80.0];
        let v = [0.0, 1.0, f64::NAN, 0.25];
        assert_eq!(fit_rate(&n, &v, None), Err(AfemError::InsufficientData(2)));
        assert_eq!(
            fit_rate(&n, &[1.0, 0.5, 0.25, 0.125], Some(2)),
            Err(AfemError::InsufficientData(2))
        );
    }

    #[test]
    fn geometric_contraction() {
        let v: Vec<f64> = (0..10).map(|k| 2.0 * 0.7f64.powi(k)).collect();
        let fit = fit_geometric(&v, 3).unwrap();
        assert!((fit.slope.exp() - 0.7).abs() < 1e-12);
        assert_eq!(fit.points, 7);
    }
}
