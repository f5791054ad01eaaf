//! Bubble and background model fitting.
//!
//! Every model is fitted on calendar time measured in fractional years. The
//! coefficients entering a model linearly are solved exactly at each
//! evaluation of the nonlinear parameters, which are searched by multi-start
//! Nelder-Mead over a bounded box.

mod fit;
mod linear;
mod matched;
mod models;
mod simplex;

pub use fit::{
    fit_model, rms_of, FitOptions, FitResult, EXPONENT_BOUNDS, EXPONENT_EXCLUSION, MATCHED_RATE_EXCLUSION, RATE_BOUNDS,
    TAU_BOUNDS, TC_MAX_AHEAD, TC_MIN_AHEAD,
};
pub use linear::solve_slaved;
pub use matched::{continuity_root, fit_matched_crossover, MATCHING_TOLERANCE};
pub use models::{classify_regime, eval_model, FitParams, MatchedParams, ModelKind, RegimeClass};
