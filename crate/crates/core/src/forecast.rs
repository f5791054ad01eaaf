//! Seasonal level forecasts and month-ahead sign prediction.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seasonality::{Sign, SignLabel, SignTable};
use crate::series::profile::{pooled_month_moments, profile_from_moments};
use crate::series::{compute_growth, GrowthSeries, MonthProfile, MonthRange, MonthStamp, MonthlySeries, PricePanel};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Monthly means pooled over every series of the panel.
    #[default]
    Pooled,
    /// Monthly means of the forecast region alone.
    PerIndex,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Pooled => "pooled",
            Scheme::PerIndex => "per-index",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pooled" => Ok(Scheme::Pooled),
            "per-index" => Ok(Scheme::PerIndex),
            other => Err(Error::Domain(format!(
                "unknown scheme {other:?}, expected pooled or per-index"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeasonalForecast {
    pub region: String,
    /// Last observed month; its level anchors the forecast.
    pub origin: MonthStamp,
    pub origin_level: f64,
    pub horizon: usize,
    /// Scheme actually used.
    pub scheme: Scheme,
    /// Set when a per-index request fell back to pooled means because the
    /// region's training data misses a calendar month.
    pub fell_back: bool,
    pub training_window: MonthRange,
    pub months: Vec<MonthStamp>,
    pub predicted_levels: Vec<f64>,
    /// Heuristic band: pooled monthly standard deviations accumulated in
    /// quadrature in log space.
    pub low_band: Vec<f64>,
    pub high_band: Vec<f64>,
    pub monthly_mean: [f64; 12],
}

fn training_profile(growth: &[GrowthSeries], window: MonthRange) -> Result<MonthProfile> {
    profile_from_moments(window, &pooled_month_moments(growth, window))
}

/// Forecasts `region` for `horizon` months past its last observation by
/// compounding the mean growth of each calendar month over `training`.
pub fn forecast_levels(
    panel: &PricePanel,
    region: &str,
    scheme: Scheme,
    training: MonthRange,
    horizon: usize,
) -> Result<SeasonalForecast> {
    let series = panel.get(region)?;
    let growth = panel.growth()?;
    let pooled = training_profile(&growth, training)?;
    let (means, used, fell_back) = match scheme {
        Scheme::Pooled => (pooled.mean, Scheme::Pooled, false),
        Scheme::PerIndex => {
            let own = compute_growth(series)?;
            match training_profile(std::slice::from_ref(&own), training) {
                Ok(p) => (p.mean, Scheme::PerIndex, false),
                Err(Error::InsufficientData(_)) => (pooled.mean, Scheme::Pooled, true),
                Err(e) => return Err(e),
            }
        }
    };

    let origin = series.end();
    let p0 = *series.values().last().expect("series is non-empty");
    let mut months = Vec::with_capacity(horizon);
    let mut levels = Vec::with_capacity(horizon);
    let mut low = Vec::with_capacity(horizon);
    let mut high = Vec::with_capacity(horizon);
    let (mut cum, mut var) = (0.0, 0.0);
    for k in 1..=horizon {
        let m = origin.add_months(k as i64);
        let i = m.month_index();
        cum += means[i];
        var += pooled.std[i] * pooled.std[i];
        let level = p0 * cum.exp();
        let band = var.sqrt();
        months.push(m);
        levels.push(level);
        low.push(level * (-band).exp());
        high.push(level * band.exp());
    }
    Ok(SeasonalForecast {
        region: region.to_string(),
        origin,
        origin_level: p0,
        horizon,
        scheme: used,
        fell_back,
        training_window: training,
        months,
        predicted_levels: levels,
        low_band: low,
        high_band: high,
        monthly_mean: means,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignPrediction {
    pub label: SignLabel,
    pub months: Vec<MonthStamp>,
    pub signs: Vec<Sign>,
}

/// Predicts each month's increment sign as the table's dominant sign for
/// that calendar month.
pub fn predict_signs(table: &SignTable, months: &[MonthStamp]) -> SignPrediction {
    SignPrediction {
        label: table.label,
        months: months.to_vec(),
        signs: months.iter().map(|m| table.dominant(*m)).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonthHits {
    pub month: MonthStamp,
    pub predicted: Sign,
    pub hits: usize,
    pub misses: usize,
    /// Regions whose realised increment is exactly zero.
    pub ties: usize,
    pub hit_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignEvaluation {
    pub months: Vec<MonthHits>,
    pub hits: usize,
    pub total: usize,
    pub hit_ratio: f64,
}

/// Scores a prediction against realised growth. A predicted month counts
/// for a region when that region's growth covers both endpoints of the
/// increment; months no region covers are left out.
pub fn evaluate_signs(prediction: &SignPrediction, realized: &[GrowthSeries]) -> Result<SignEvaluation> {
    let mut months = Vec::new();
    for (&month, &predicted) in prediction.months.iter().zip(&prediction.signs) {
        let (a, b) = prediction.label.endpoints(month);
        let (mut hits, mut misses, mut ties) = (0, 0, 0);
        for g in realized {
            let (Some(ga), Some(gb)) = (g.at(a), g.at(b)) else {
                continue;
            };
            match Sign::of(gb - ga) {
                Some(s) if s == predicted => hits += 1,
                Some(_) => misses += 1,
                None => ties += 1,
            }
        }
        if hits + misses + ties == 0 {
            continue;
        }
        let n = hits + misses;
        months.push(MonthHits {
            month,
            predicted,
            hits,
            misses,
            ties,
            hit_ratio: if n > 0 { hits as f64 / n as f64 } else { 0.0 },
        });
    }
    if months.is_empty() {
        return Err(Error::InsufficientData(
            "realised data covers none of the predicted months".into(),
        ));
    }
    let hits: usize = months.iter().map(|m| m.hits).sum();
    let total: usize = months.iter().map(|m| m.hits + m.misses).sum();
    Ok(SignEvaluation {
        months,
        hits,
        total,
        hit_ratio: if total > 0 { hits as f64 / total as f64 } else { 0.0 },
    })
}

/// Monte Carlo success rate of the best sign predictor for `g(t+1) - g(t)`
/// on i.i.d. Gaussian growth: predict `+` when `g(t)` lies below the median
/// and `-` otherwise. The exact value is 3/4.
pub fn white_noise_sign_null(draws: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prev: f64 = StandardNormal.sample(&mut rng);
    let mut hits = 0usize;
    for _ in 0..draws {
        let next: f64 = StandardNormal.sample(&mut rng);
        let predicted = if prev < 0.0 { Sign::Plus } else { Sign::Minus };
        if Sign::of(next - prev) == Some(predicted) {
            hits += 1;
        }
        prev = next;
    }
    hits as f64 / draws as f64
}
