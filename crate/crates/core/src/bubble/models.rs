use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The bubble and background model family.
///
/// Time `t` is calendar time in fractional years. Every form containing
/// `(tc - t)^m` is evaluated with `|tc - t|`; fits constrain `tc` beyond the
/// window so the absolute value never matters there. Exponential terms are
/// written `exp(mu (t - t_ref))` with `t_ref` the first month of the fit
/// window, which keeps the linear coefficient `b` well scaled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// `A + B |tc - t|^m`
    PowerLaw,
    /// `a + b exp(mu (t - t_ref))`
    Exponential,
    /// `A + B tanh(|tc - t| / tau)^m`
    TanhCrossover,
    /// `a + b exp(mu (t - t_ref)) |tc - t|^m`
    ExpTimesPower,
    /// `a + b exp(mu (t - t_ref)) + c |tc - t|^m`
    ExpPlusPower,
    /// Exponential before `t_star`, power law after, joined with matching
    /// value and slope at `t_star`.
    MatchedCrossover,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::PowerLaw,
        ModelKind::Exponential,
        ModelKind::TanhCrossover,
        ModelKind::ExpTimesPower,
        ModelKind::ExpPlusPower,
        ModelKind::MatchedCrossover,
    ];

    /// Number of free parameters, counting the matched crossover's `t_star`
    /// and subtracting its two matching constraints.
    pub fn free_parameters(self) -> usize {
        match self {
            ModelKind::PowerLaw => 4,
            ModelKind::Exponential => 3,
            ModelKind::TanhCrossover => 5,
            ModelKind::ExpTimesPower => 5,
            ModelKind::ExpPlusPower => 6,
            ModelKind::MatchedCrossover => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::PowerLaw => "power-law",
            ModelKind::Exponential => "exponential",
            ModelKind::TanhCrossover => "tanh-crossover",
            ModelKind::ExpTimesPower => "exp-times-power",
            ModelKind::ExpPlusPower => "exp-plus-power",
            ModelKind::MatchedCrossover => "matched-crossover",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown model {s:?}")))
    }
}

/// Fitted parameters, one variant per [`ModelKind`]. Critical times are
/// fractional calendar years; rates are per year.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FitParams {
    PowerLaw {
        #[serde(rename = "A")]
        a: f64,
        #[serde(rename = "B")]
        b: f64,
        m: f64,
        #[serde(rename = "t_c")]
        tc: f64,
    },
    Exponential {
        a: f64,
        b: f64,
        mu: f64,
        t_ref: f64,
    },
    TanhCrossover {
        #[serde(rename = "A")]
        a: f64,
        #[serde(rename = "B")]
        b: f64,
        m: f64,
        #[serde(rename = "t_c")]
        tc: f64,
        tau: f64,
    },
    ExpTimesPower {
        a: f64,
        b: f64,
        mu: f64,
        #[serde(rename = "t_c")]
        tc: f64,
        m: f64,
        t_ref: f64,
    },
    ExpPlusPower {
        a: f64,
        b: f64,
        mu: f64,
        c: f64,
        #[serde(rename = "t_c")]
        tc: f64,
        m: f64,
        t_ref: f64,
    },
    MatchedCrossover(MatchedParams),
}

/// Parameters of the exponential-to-power-law crossover.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchedParams {
    pub a: f64,
    pub b: f64,
    pub mu: f64,
    #[serde(rename = "A")]
    pub pa: f64,
    #[serde(rename = "B")]
    pub pb: f64,
    #[serde(rename = "t_c")]
    pub tc: f64,
    pub m: f64,
    pub t_star: f64,
    pub t_ref: f64,
}

impl MatchedParams {
    pub fn exponential_branch(&self, t: f64) -> f64 {
        self.a + self.b * (self.mu * (t - self.t_ref)).exp()
    }

    pub fn exponential_slope(&self, t: f64) -> f64 {
        self.b * self.mu * (self.mu * (t - self.t_ref)).exp()
    }

    pub fn power_branch(&self, t: f64) -> f64 {
        self.pa + self.pb * (self.tc - t).abs().powf(self.m)
    }

    pub fn power_slope(&self, t: f64) -> f64 {
        -self.pb * self.m * (self.tc - t).abs().powf(self.m - 1.0)
    }

    /// Relative mismatch of value and slope between the branches at `t_star`.
    pub fn matching_residuals(&self) -> (f64, f64) {
        let (e, p) = (self.exponential_branch(self.t_star), self.power_branch(self.t_star));
        let (de, dp) = (self.exponential_slope(self.t_star), self.power_slope(self.t_star));
        let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE);
        (rel(e, p), rel(de, dp))
    }
}

impl FitParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            FitParams::PowerLaw { .. } => ModelKind::PowerLaw,
            FitParams::Exponential { .. } => ModelKind::Exponential,
            FitParams::TanhCrossover { .. } => ModelKind::TanhCrossover,
            FitParams::ExpTimesPower { .. } => ModelKind::ExpTimesPower,
            FitParams::ExpPlusPower { .. } => ModelKind::ExpPlusPower,
            FitParams::MatchedCrossover(_) => ModelKind::MatchedCrossover,
        }
    }

    /// Critical time, if the model has one.
    pub fn critical_time(&self) -> Option<f64> {
        match *self {
            FitParams::Exponential { .. } => None,
            FitParams::PowerLaw { tc, .. }
            | FitParams::TanhCrossover { tc, .. }
            | FitParams::ExpTimesPower { tc, .. }
            | FitParams::ExpPlusPower { tc, .. } => Some(tc),
            FitParams::MatchedCrossover(p) => Some(p.tc),
        }
    }

    /// Exponent of the power-law component, if any.
    pub fn exponent(&self) -> Option<f64> {
        match *self {
            FitParams::Exponential { .. } => None,
            FitParams::PowerLaw { m, .. }
            | FitParams::TanhCrossover { m, .. }
            | FitParams::ExpTimesPower { m, .. }
            | FitParams::ExpPlusPower { m, .. } => Some(m),
            FitParams::MatchedCrossover(p) => Some(p.m),
        }
    }

    /// Coefficient multiplying the power-law component.
    pub fn power_coefficient(&self) -> Option<f64> {
        match *self {
            FitParams::Exponential { .. } => None,
            FitParams::PowerLaw { b, .. } | FitParams::TanhCrossover { b, .. } | FitParams::ExpTimesPower { b, .. } => {
                Some(b)
            }
            FitParams::ExpPlusPower { c, .. } => Some(c),
            FitParams::MatchedCrossover(p) => Some(p.pb),
        }
    }

    /// Same parameters with every level and scale coefficient multiplied by `s`.
    pub fn scaled(&self, s: f64) -> FitParams {
        let mut p = *self;
        match &mut p {
            FitParams::PowerLaw { a, b, .. }
            | FitParams::Exponential { a, b, .. }
            | FitParams::TanhCrossover { a, b, .. }
            | FitParams::ExpTimesPower { a, b, .. } => {
                *a *= s;
                *b *= s;
            }
            FitParams::ExpPlusPower { a, b, c, .. } => {
                *a *= s;
                *b *= s;
                *c *= s;
            }
            FitParams::MatchedCrossover(m) => {
                m.a *= s;
                m.b *= s;
                m.pa *= s;
                m.pb *= s;
            }
        }
        p
    }
}

fn power(tc: f64, t: f64, m: f64) -> Result<f64> {
    let d = (tc - t).abs();
    if d == 0.0 && m < 0.0 {
        return Err(Error::Singularity { t });
    }
    Ok(d.powf(m))
}

/// Value of the model at calendar time `t` (fractional years).
pub fn eval_model(params: &FitParams, t: f64) -> Result<f64> {
    match *params {
        FitParams::PowerLaw { a, b, m, tc } => Ok(a + b * power(tc, t, m)?),
        FitParams::Exponential { a, b, mu, t_ref } => Ok(a + b * (mu * (t - t_ref)).exp()),
        FitParams::TanhCrossover { a, b, m, tc, tau } => {
            if tau <= 0.0 {
                return Err(Error::Domain(format!("tau must be positive, got {tau}")));
            }
            let x = ((tc - t).abs() / tau).tanh();
            if x == 0.0 && m < 0.0 {
                return Err(Error::Singularity { t });
            }
            Ok(a + b * x.powf(m))
        }
        FitParams::ExpTimesPower { a, b, mu, tc, m, t_ref } => Ok(a + b * (mu * (t - t_ref)).exp() * power(tc, t, m)?),
        FitParams::ExpPlusPower {
            a,
            b,
            mu,
            c,
            tc,
            m,
            t_ref,
        } => Ok(a + b * (mu * (t - t_ref)).exp() + c * power(tc, t, m)?),
        FitParams::MatchedCrossover(p) => {
            if t < p.t_star {
                Ok(p.exponential_branch(t))
            } else {
                Ok(p.pa + p.pb * power(p.tc, t, p.m)?)
            }
        }
    }
}

/// Whether a fitted trajectory accelerates faster than exponentially.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeClass {
    SuperExponential,
    NotSuperExponential,
}

/// Super-exponential iff the power-law coefficient and exponent satisfy
/// `B < 0, 0 < m < 1` or `B > 0, m < 0`.
pub fn classify_regime(params: &FitParams) -> Result<RegimeClass> {
    let (Some(b), Some(m)) = (params.power_coefficient(), params.exponent()) else {
        return Err(Error::NotApplicable(format!(
            "{} has no power-law component",
            params.kind()
        )));
    };
    let accelerating = (b < 0.0 && m > 0.0 && m < 1.0) || (b > 0.0 && m < 0.0);
    Ok(if accelerating {
        RegimeClass::SuperExponential
    } else {
        RegimeClass::NotSuperExponential
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_forms_are_constant() {
        let pl = FitParams::PowerLaw {
            a: 7.0,
            b: 0.0,
            m: 0.3,
            tc: 2010.0,
        };
        let ex = FitParams::Exponential {
            a: 3.0,
            b: 0.0,
            mu: 0.4,
            t_ref: 2000.0,
        };
        for t in [1990.0, 2001.5, 2009.9] {
            assert_eq!(eval_model(&pl, t).unwrap(), 7.0);
            assert_eq!(eval_model(&ex, t).unwrap(), 3.0);
        }
    }

    #[test]
    fn tanh_reduces_to_power_law_near_tc() {
        // tanh(x) = x - x^3/3 + ..., so at x = 0.01 the relative gap of the
        // increment is about 3.3e-5.
        let (a, b, tc, tau) = (100.0, -20.0, 2006.0, 3.0);
        let t = tc - 0.01 * tau;
        let tanh = FitParams::TanhCrossover { a, b, m: 1.0, tc, tau };
        let pl = FitParams::PowerLaw {
            a,
            b: b / tau,
            m: 1.0,
            tc,
        };
        let (x, y) = (eval_model(&tanh, t).unwrap(), eval_model(&pl, t).unwrap());
        let series = a + b * (0.01 - 0.01f64.powi(3) / 3.0);
        assert!((x - y).abs() / y.abs() < 1e-3);
        assert!((x - series).abs() < 1e-9);
    }

    #[test]
    fn singular_at_tc_for_negative_exponent() {
        let pl = FitParams::PowerLaw {
            a: 1.0,
            b: 1.0,
            m: -0.5,
            tc: 2005.0,
        };
        assert!(matches!(eval_model(&pl, 2005.0), Err(Error::Singularity { .. })));
        let ok = FitParams::PowerLaw {
            a: 1.0,
            b: 1.0,
            m: 0.5,
            tc: 2005.0,
        };
        assert_eq!(eval_model(&ok, 2005.0).unwrap(), 1.0);
    }

    #[test]
    fn regime_rule() {
        let pl = |b, m| FitParams::PowerLaw { a: 0.0, b, m, tc: 0.0 };
        assert_eq!(classify_regime(&pl(-50.0, 0.5)).unwrap(), RegimeClass::SuperExponential);
        assert_eq!(classify_regime(&pl(50.0, -0.5)).unwrap(), RegimeClass::SuperExponential);
        assert_eq!(
            classify_regime(&pl(50.0, 0.5)).unwrap(),
            RegimeClass::NotSuperExponential
        );
        assert_eq!(
            classify_regime(&pl(-50.0, 1.5)).unwrap(),
            RegimeClass::NotSuperExponential
        );
        let epp = FitParams::ExpPlusPower {
            a: 0.0,
            b: 1.0,
            mu: 0.1,
            c: -2.0,
            tc: 0.0,
            m: 0.4,
            t_ref: 0.0,
        };
        assert_eq!(classify_regime(&epp).unwrap(), RegimeClass::SuperExponential);
        let ex = FitParams::Exponential {
            a: 0.0,
            b: 1.0,
            mu: 0.1,
            t_ref: 0.0,
        };
        assert!(matches!(classify_regime(&ex), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn kind_names_roundtrip() {
        for k in ModelKind::ALL {
            assert_eq!(k.name().parse::<ModelKind>().unwrap(), k);
        }
        assert!("lppl".parse::<ModelKind>().is_err());
    }
}
