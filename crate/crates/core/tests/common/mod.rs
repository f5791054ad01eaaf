#![allow(dead_code)]

use hpi_core::synth::{SeasonalSpec, YearFactors};
use hpi_core::{MonthStamp, ScenarioSpec, TrendSpec};

pub fn ms(y: i32, m: u32) -> MonthStamp {
    MonthStamp::new(y, m).unwrap()
}

/// 120 months from 1995-01 of `300 - 50 (t_c - t)^0.5`, with `t_c` one
/// year after the last month.
pub fn power_law_spec() -> ScenarioSpec {
    let start = ms(1995, 1);
    let end = start.add_months(119);
    ScenarioSpec::new(
        start,
        120,
        TrendSpec::PowerLaw {
            a: 300.0,
            b: -50.0,
            m: 0.5,
            tc: end.fractional_year() + 1.0,
        },
    )
}

/// Exponential background joined to a power law at 2000.3.
pub fn matched_spec() -> ScenarioSpec {
    ScenarioSpec::new(
        ms(1995, 1),
        120,
        TrendSpec::Matched {
            mu: 0.3,
            pa: 400.0,
            pb: -100.0,
            tc: 2006.0,
            m: 0.5,
            t_star: 2000.3,
        },
    )
}

pub fn pattern() -> [f64; 12] {
    [
        -0.004, -0.006, 0.003, -0.002, 0.009, 0.001, -0.003, 0.004, -0.005, -0.001, 0.002, 0.0025,
    ]
}

/// Exactly seasonal growth on top of a steady exponential trend.
pub fn seasonal_spec(n_regions: usize, n_months: usize) -> ScenarioSpec {
    let mut spec = ScenarioSpec::new(
        ms(1990, 1),
        n_months,
        TrendSpec::Exponential {
            a: 0.0,
            b: 100.0,
            mu: 0.04,
            bubble: None,
        },
    );
    spec.n_regions = n_regions;
    spec.seasonal = Some(SeasonalSpec {
        h: pattern(),
        f: YearFactors::Constant(1.0),
        j: YearFactors::Constant(0.0),
    });
    spec
}

/// Blow-up time of `dp/dt = alpha p^2 - beta p` by classical Runge-Kutta
/// with steps sized to the local relative growth rate, stopping once `p`
/// exceeds 1e9. `None` if the solution does not blow up within `t_max`.
pub fn rk_blowup(alpha: f64, beta: f64, p0: f64, t_max: f64) -> Option<f64> {
    let rhs = |p: f64| alpha * p * p - beta * p;
    let (mut t, mut p) = (0.0, p0);
    while p < 1e9 {
        if t > t_max {
            return None;
        }
        let rate = (alpha * p - beta).abs().max(1e-12);
        let h = (1e-3 / rate).min(0.05 / beta);
        let k1 = rhs(p);
        let k2 = rhs(p + 0.5 * h * k1);
        let k3 = rhs(p + 0.5 * h * k2);
        let k4 = rhs(p + h * k3);
        p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    Some(t)
}
