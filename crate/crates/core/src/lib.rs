//! Analysis pipeline for monthly house-price index panels: bubble model
//! fitting, growth-versus-price analysis, seasonality and sign statistics,
//! seasonal forecasting, and a seeded synthetic panel generator.

pub mod bubble;
pub mod error;
pub mod forecast;
pub mod phase;
pub mod seasonality;
pub mod series;
pub mod synth;

pub use bubble::{
    classify_regime, eval_model, fit_matched_crossover, fit_model, FitOptions, FitParams, FitResult, MatchedParams,
    ModelKind, RegimeClass,
};
pub use error::{Error, Result};
pub use forecast::{
    evaluate_signs, forecast_levels, predict_signs, Scheme, SeasonalForecast, SignEvaluation, SignPrediction,
};
pub use phase::{
    ode_singularity_time, phase_points, regress_growth_on_price, GrowthPriceRegression, PeriodSegmentation,
    PhaseRegressions,
};
pub use seasonality::{
    decompose_bilinear, periodogram, sign_table, Periodogram, SeasonalDecomposition, Sign, SignLabel, SignTable,
};
pub use series::{
    compute_growth, load_panel, month_profile, write_panel, GrowthSeries, IndexSeries, MonthProfile, MonthRange,
    MonthStamp, MonthlySeries, PanelFormat, PricePanel,
};
pub use synth::{generate, GroundTruth, ScenarioSpec, TrendSpec};

/// Library version embedded in every output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
