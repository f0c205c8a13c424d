//! Correlation, hot-spot detection and forecasting over metric series.

mod correlation;
mod forecast;
mod hotspot;
mod series;

pub use correlation::{
    pearson_r, pearson_test, ranks, spearman_test, CorrelationMethod, CorrelationResult, EXACT_MAX_N,
};
pub use forecast::{fit_and_evaluate_forecast, ols, Forecast, ForecastEvaluation, ForecastModel};
pub use hotspot::{detect_hotspots, Hotspot, HotspotReport};
pub use series::{align, Point, Series};

/// Default number of Monte Carlo permutations.
pub const DEFAULT_PERMUTATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least {needed} paired samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("series `{0}` has zero variance")]
    ZeroVariance(String),
    #[error("series `{name}`: {reason}")]
    InvalidSeries { name: String, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
