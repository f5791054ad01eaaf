//! Spectral analysis, the bilinear yearly-modulated seasonal model and sign
//! statistics of growth-rate increments.

mod bilinear;
mod signs;
mod spectrum;

pub use bilinear::{
    decompose_bilinear, decompose_bilinear_with, normalize_gauge, BilinearOptions, Observation, SeasonalDecomposition,
};
pub use signs::{increments, sign_table, sign_table_with, MonthSigns, Sign, SignLabel, SignTable};
pub use spectrum::{mean_periodogram, periodogram, periodogram_of, Periodogram};
