use serde::{Deserialize, Serialize};

use super::{GrowthSeries, MonthRange, MonthStamp, MonthlySeries, MONTH_NAMES};
use crate::error::{Error, Result};

/// Superposed calendar-month statistics of growth rates, pooled over years
/// and regions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonthProfile {
    pub window: MonthRange,
    /// Mean growth per calendar month, January first.
    pub mean: [f64; 12],
    /// Population standard deviation (divides by the count).
    pub std: [f64; 12],
    pub counts: [usize; 12],
    pub std_kind: String,
}

impl MonthProfile {
    /// Calendar month (1-based) with the largest mean growth.
    pub fn peak_month(&self) -> u32 {
        let mut best = 0;
        for m in 1..12 {
            if self.mean[m] > self.mean[best] {
                best = m;
            }
        }
        best as u32 + 1
    }

    pub fn month_name(m: usize) -> &'static str {
        MONTH_NAMES[m]
    }
}

/// Count, mean and sum of squared deviations of one sample, merged with the
/// pairwise update so identical blocks merge without rounding.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Moments {
    pub n: usize,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.n as f64 * w;
        self.n = n;
    }

    pub fn population_std(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.m2 / self.n as f64).max(0.0).sqrt()
        }
    }
}

/// Per-calendar-month moments of one series restricted to `window`.
pub(crate) fn series_month_moments(series: &GrowthSeries, window: MonthRange) -> [Moments; 12] {
    let mut acc = [Moments::default(); 12];
    for (m, v) in series.iter_stamped().filter(|(m, _)| window.contains(*m)) {
        acc[m.month_index()].push(v);
    }
    acc
}

/// Pooled moments of several series. Per-series blocks are merged in a
/// canonical order so the result does not depend on the input order.
pub(crate) fn pooled_month_moments(growth: &[GrowthSeries], window: MonthRange) -> [Moments; 12] {
    let mut order: Vec<&GrowthSeries> = growth.iter().collect();
    order.sort_by(|a, b| {
        a.region()
            .cmp(b.region())
            .then(a.start().cmp(&b.start()))
            .then_with(|| {
                let ka = a.values().iter().map(|v| v.to_bits());
                let kb = b.values().iter().map(|v| v.to_bits());
                ka.cmp(kb)
            })
    });
    let mut acc = [Moments::default(); 12];
    for s in order {
        for (total, part) in acc.iter_mut().zip(series_month_moments(s, window)) {
            total.merge(&part);
        }
    }
    acc
}

pub(crate) fn profile_from_moments(window: MonthRange, acc: &[Moments; 12]) -> Result<MonthProfile> {
    if let Some(m) = acc.iter().position(|a| a.n == 0) {
        return Err(Error::InsufficientData(format!(
            "no growth values for {} in {window}",
            MONTH_NAMES[m]
        )));
    }
    Ok(MonthProfile {
        window,
        mean: std::array::from_fn(|m| acc[m].mean),
        std: std::array::from_fn(|m| acc[m].population_std()),
        counts: std::array::from_fn(|m| acc[m].n),
        std_kind: "population".into(),
    })
}

/// Mean and population standard deviation of growth rates per calendar
/// month, over every value stamped inside `[from, to]`.
pub fn month_profile(growth: &[GrowthSeries], from: MonthStamp, to: MonthStamp) -> Result<MonthProfile> {
    let window = MonthRange::new(from, to)?;
    profile_from_moments(window, &pooled_month_moments(growth, window))
}
