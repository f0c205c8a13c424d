use serde::{Deserialize, Serialize};

use super::series::{align, Series};
use super::StatsError;

const MIN_PAIRS: usize = 6;

/// Linear model `ΔI[t + lag] ≈ slope · ratio[t] + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastModel {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub lag: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastEvaluation {
    pub train_pairs: usize,
    pub test_pairs: usize,
    /// Walk-forward mean absolute error of the model.
    pub mae_model: f64,
    /// Mean absolute error of always predicting no change.
    pub mae_naive: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub model: ForecastModel,
    pub evaluation: ForecastEvaluation,
}

/// Ordinary least squares `(slope, intercept, r_squared)`. With no spread in
/// `x` the slope is 0 and the intercept is the mean of `y`; with no spread in
/// `y` the fit is perfect exactly when every residual is zero.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - (slope * a + intercept)).powi(2))
        .sum();
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    (slope, intercept, r2)
}

/// Fits on the chronologically first `train_fraction` of the
/// `(ratio[t], ΔI[t + lag])` pairs and evaluates walk-forward on the rest:
/// each test pair is predicted from a model refitted on all pairs before it.
pub fn fit_and_evaluate_forecast(
    ratios: &Series,
    instability: &Series,
    lag: usize,
    train_fraction: f64,
) -> Result<Forecast, StatsError> {
    if lag < 1 {
        return Err(StatsError::InvalidArgument("lag must be at least 1".into()));
    }
    if !(0.5..1.0).contains(&train_fraction) {
        return Err(StatsError::InvalidArgument(format!(
            "train_fraction must be in [0.5, 1), got {train_fraction}"
        )));
    }
    let (_, r, inst) = align(ratios, instability);
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..r.len())
        .filter(|t| t + lag < inst.len())
        .map(|t| (r[t], inst[t + lag] - inst[t + lag - 1]))
        .unzip();
    let m = xs.len();
    if m < MIN_PAIRS {
        return Err(StatsError::InsufficientSamples {
            needed: MIN_PAIRS,
            got: m,
        });
    }
    let train = ((train_fraction * m as f64).floor() as usize).clamp(2, m - 1);
    let (slope, intercept, r_squared) = ols(&xs[..train], &ys[..train]);

    let (mut err_model, mut err_naive) = (0.0, 0.0);
    for j in train..m {
        let (s, c, _) = ols(&xs[..j], &ys[..j]);
        err_model += (ys[j] - (s * xs[j] + c)).abs();
        err_naive += ys[j].abs();
    }
    let test = (m - train) as f64;
    Ok(Forecast {
        model: ForecastModel {
            slope,
            intercept,
            r_squared,
            lag,
        },
        evaluation: ForecastEvaluation {
            train_pairs: train,
            test_pairs: m - train,
            mae_model: err_model / test,
            mae_naive: err_naive / test,
        },
    })
}
