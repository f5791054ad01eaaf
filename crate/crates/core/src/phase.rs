//! Growth rate against price level: linear regressions, period labels and the
//! blow-up time of the logistic-type growth law `dp/dt = alpha p^2 - beta p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{compute_growth, MonthStamp, MonthlySeries, PricePanel};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "scope", content = "region")]
pub enum RegressionScope {
    Pooled,
    Region(String),
}

/// Ordinary least squares fit `g = alpha p - beta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthPriceRegression {
    /// Slope per index unit, per month.
    pub alpha: f64,
    /// Negated intercept, per month.
    pub beta: f64,
    pub correlation: f64,
    pub n: usize,
    pub scope: RegressionScope,
}

impl GrowthPriceRegression {
    /// Slope expressed per 100 index units.
    pub fn slope_per_100(&self) -> f64 {
        self.alpha * 100.0
    }

    pub fn intercept(&self) -> f64 {
        -self.beta
    }
}

/// Splits the calendar into consecutive periods at the given boundary
/// months. Period `k` (0-based) starts at `boundaries[k - 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodSegmentation {
    boundaries: Vec<MonthStamp>,
}

impl Default for PeriodSegmentation {
    fn default() -> Self {
        Self {
            boundaries: vec![
                MonthStamp::new(2003, 10).expect("valid month"),
                MonthStamp::new(2004, 10).expect("valid month"),
            ],
        }
    }
}

impl PeriodSegmentation {
    pub fn new(boundaries: Vec<MonthStamp>) -> Result<Self> {
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Range("period boundaries must be strictly increasing".into()));
        }
        Ok(Self { boundaries })
    }

    /// A single period covering everything.
    pub fn whole() -> Self {
        Self { boundaries: Vec::new() }
    }

    pub fn boundaries(&self) -> &[MonthStamp] {
        &self.boundaries
    }

    pub fn n_periods(&self) -> usize {
        self.boundaries.len() + 1
    }

    pub fn period_of(&self, month: MonthStamp) -> usize {
        self.boundaries.partition_point(|b| *b <= month)
    }

    /// 1-based label used in outputs.
    pub fn label(&self, period: usize) -> String {
        format!("period-{}", period + 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub period: usize,
    pub region: String,
    pub month: MonthStamp,
    pub p: f64,
    pub g: f64,
}

/// Every `(p(t), g(t))` pair of the panel, with `g(t) = ln(p(t)/p(t-1))`
/// paired with the later price. Regions in panel order, months ascending.
pub fn phase_points(panel: &PricePanel, segmentation: &PeriodSegmentation) -> Result<Vec<PhasePoint>> {
    let mut points = Vec::new();
    for series in panel.series() {
        let growth = compute_growth(series)?;
        for (month, g) in growth.iter_stamped() {
            let p = series.at(month).expect("growth month lies inside the parent span");
            points.push(PhasePoint {
                period: segmentation.period_of(month),
                region: series.region().to_string(),
                month,
                p,
                g,
            });
        }
    }
    Ok(points)
}

/// OLS of `g` on `p` over the given pairs.
pub fn regress_points(pairs: &[(f64, f64)], scope: RegressionScope) -> Result<GrowthPriceRegression> {
    let n = pairs.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "growth-price regression needs at least 3 points, got {n}"
        )));
    }
    let nf = n as f64;
    let pm = pairs.iter().map(|(p, _)| p).sum::<f64>() / nf;
    let gm = pairs.iter().map(|(_, g)| g).sum::<f64>() / nf;
    let (mut spp, mut sgg, mut spg) = (0.0, 0.0, 0.0);
    for (p, g) in pairs {
        let (dp, dg) = (p - pm, g - gm);
        spp += dp * dp;
        sgg += dg * dg;
        spg += dp * dg;
    }
    if spp == 0.0 {
        return Err(Error::DegenerateRegression(
            "price has zero variance; slope is undefined".into(),
        ));
    }
    let alpha = spg / spp;
    let correlation = if sgg == 0.0 {
        0.0
    } else {
        (spg / (spp.sqrt() * sgg.sqrt())).clamp(-1.0, 1.0)
    };
    Ok(GrowthPriceRegression {
        alpha,
        beta: alpha * pm - gm,
        correlation,
        n,
        scope,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodRegression {
    pub period: usize,
    pub label: String,
    /// Absent when the period holds fewer than 3 points.
    pub regression: Option<GrowthPriceRegression>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRegressions {
    pub pooled: GrowthPriceRegression,
    pub per_period: Vec<PeriodRegression>,
    pub per_region: Vec<GrowthPriceRegression>,
    pub region_correlation_mean: f64,
    /// Sample standard deviation (n - 1) of the per-region correlations.
    pub region_correlation_std: f64,
}

/// Pooled, per-period (when `segmentation` is given) and per-region
/// regressions of growth on price.
pub fn regress_growth_on_price(
    panel: &PricePanel,
    segmentation: Option<&PeriodSegmentation>,
) -> Result<PhaseRegressions> {
    let seg = segmentation.cloned().unwrap_or_else(PeriodSegmentation::whole);
    let points = phase_points(panel, &seg)?;
    let all: Vec<(f64, f64)> = points.iter().map(|pt| (pt.p, pt.g)).collect();
    let pooled = regress_points(&all, RegressionScope::Pooled)?;

    let per_period = match segmentation {
        None => Vec::new(),
        Some(seg) => (0..seg.n_periods())
            .map(|k| {
                let pairs: Vec<(f64, f64)> = points
                    .iter()
                    .filter(|pt| pt.period == k)
                    .map(|pt| (pt.p, pt.g))
                    .collect();
                let regression = match regress_points(&pairs, RegressionScope::Pooled) {
                    Ok(r) => Some(r),
                    Err(Error::InsufficientData(_)) => None,
                    Err(e) => return Err(e),
                };
                Ok(PeriodRegression {
                    period: k,
                    label: seg.label(k),
                    regression,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };

    let mut per_region = Vec::with_capacity(panel.len());
    for region in panel.regions() {
        let pairs: Vec<(f64, f64)> = points
            .iter()
            .filter(|pt| pt.region == region)
            .map(|pt| (pt.p, pt.g))
            .collect();
        per_region.push(regress_points(&pairs, RegressionScope::Region(region.to_string()))?);
    }
    let k = per_region.len() as f64;
    let mean = per_region.iter().map(|r| r.correlation).sum::<f64>() / k;
    let std = if per_region.len() > 1 {
        (per_region.iter().map(|r| (r.correlation - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(PhaseRegressions {
        pooled,
        per_period,
        per_region,
        region_correlation_mean: mean,
        region_correlation_std: std,
    })
}

fn check_ode_inputs(alpha: f64, beta: f64, p0: f64) -> Result<()> {
    for (name, v) in [("alpha", alpha), ("beta", beta), ("p0", p0)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
        }
    }
    Ok(())
}

/// Blow-up time of `dp/dt = alpha p^2 - beta p` started from `p(t0) = p0`,
/// in the same time unit as `1/beta`. `None` when `p0 <= beta/alpha`, where
/// the solution never diverges.
pub fn ode_singularity_time(alpha: f64, beta: f64, p0: f64, t0: f64) -> Result<Option<f64>> {
    check_ode_inputs(alpha, beta, p0)?;
    let x = beta / (alpha * p0);
    if x >= 1.0 {
        return Ok(None);
    }
    Ok(Some(t0 - (-x).ln_1p() / beta))
}

/// Closed-form solution `p(t)` of the same equation, through `1/p`.
/// Returns `+inf` at or beyond the singularity.
pub fn ode_solution(alpha: f64, beta: f64, p0: f64, t0: f64, t: f64) -> Result<f64> {
    check_ode_inputs(alpha, beta, p0)?;
    let r = alpha / beta;
    let u = r + (1.0 / p0 - r) * (beta * (t - t0)).exp();
    Ok(if u > 0.0 { 1.0 / u } else { f64::INFINITY })
}
