use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{GrowthSeries, MonthRange, MonthStamp, MonthlySeries, MONTH_NAMES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn of(x: f64) -> Option<Sign> {
        if x > 0.0 {
            Some(Sign::Plus)
        } else if x < 0.0 {
            Some(Sign::Minus)
        } else {
            None
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Which calendar month an increment `g(t+1) - g(t)` is filed under.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignLabel {
    /// The month `t` the increment starts from: the January column holds
    /// `g(Feb) - g(Jan)`.
    #[default]
    Origin,
    /// The month `t + 1` the increment ends at.
    Later,
}

impl FromStr for SignLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "origin" => Ok(SignLabel::Origin),
            "later" => Ok(SignLabel::Later),
            other => Err(Error::Domain(format!(
                "unknown sign labelling {other:?}, expected origin or later"
            ))),
        }
    }
}

impl SignLabel {
    /// Months `(earlier, later)` of the increment filed under `label`.
    pub fn endpoints(self, label: MonthStamp) -> (MonthStamp, MonthStamp) {
        match self {
            SignLabel::Origin => (label, label.succ()),
            SignLabel::Later => (label.pred(), label),
        }
    }

    pub fn label_of(self, earlier: MonthStamp) -> MonthStamp {
        match self {
            SignLabel::Origin => earlier,
            SignLabel::Later => earlier.succ(),
        }
    }
}

/// Labelled increments `g(t+1) - g(t)` of one growth series with both
/// endpoints inside `window`.
pub fn increments(series: &GrowthSeries, window: MonthRange, label: SignLabel) -> Vec<(MonthStamp, f64)> {
    let v = series.values();
    series
        .iter_stamped()
        .zip(v.iter().skip(1))
        .filter(|((m, _), _)| window.contains(*m) && window.contains(m.succ()))
        .map(|((m, g0), g1)| (label.label_of(m), g1 - g0))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonthSigns {
    pub month: u32,
    pub positive: usize,
    pub negative: usize,
    /// Exact zero increments, excluded from the fractions.
    pub ties: usize,
    pub positive_fraction: f64,
    pub negative_fraction: f64,
    pub dominant_sign: Sign,
    pub dominant_fraction: f64,
}

impl MonthSigns {
    pub fn n_observations(&self) -> usize {
        self.positive + self.negative
    }

    pub fn name(&self) -> &'static str {
        MONTH_NAMES[self.month as usize - 1]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignTable {
    pub window: MonthRange,
    pub label: SignLabel,
    pub months: Vec<MonthSigns>,
}

impl SignTable {
    pub fn dominant(&self, month: MonthStamp) -> Sign {
        self.months[month.month_index()].dominant_sign
    }

    /// Table laid out like a printed sign table: one column per month,
    /// rows `+%`, `-%`, `sign`, `%`.
    pub fn to_wide_text(&self) -> String {
        let mut out = String::from("Mon");
        for m in &self.months {
            out.push_str(&format!("\t{}", m.name()));
        }
        fn pct(v: f64) -> String {
            format!("{:.2}", 100.0 * v)
        }
        let rows: [(&str, fn(&MonthSigns) -> String); 4] = [
            ("+%", |m| pct(m.positive_fraction)),
            ("-%", |m| pct(m.negative_fraction)),
            ("sign", |m| m.dominant_sign.to_string()),
            ("%", |m| pct(m.dominant_fraction)),
        ];
        for (name, cell) in rows.iter() {
            out.push('\n');
            out.push_str(name);
            for m in &self.months {
                out.push('\t');
                out.push_str(&cell(m));
            }
        }
        out.push('\n');
        out
    }
}

/// Sign frequencies of growth-rate increments per calendar month, pooled
/// over years and series, using increments with both endpoints in
/// `[from, to]`.
pub fn sign_table(growth: &[GrowthSeries], from: MonthStamp, to: MonthStamp) -> Result<SignTable> {
    sign_table_with(growth, from, to, SignLabel::default())
}

pub fn sign_table_with(
    growth: &[GrowthSeries],
    from: MonthStamp,
    to: MonthStamp,
    label: SignLabel,
) -> Result<SignTable> {
    let window = MonthRange::new(from, to)?;
    let mut counts = [[0usize; 3]; 12];
    for series in growth {
        for (m, d) in increments(series, window, label) {
            let slot = match Sign::of(d) {
                Some(Sign::Plus) => 0,
                Some(Sign::Minus) => 1,
                None => 2,
            };
            counts[m.month_index()][slot] += 1;
        }
    }
    let mut months = Vec::with_capacity(12);
    for (i, [pos, neg, ties]) in counts.into_iter().enumerate() {
        let n = pos + neg;
        if n == 0 {
            return Err(Error::InsufficientData(format!(
                "no non-zero growth increments for {} in {window}",
                MONTH_NAMES[i]
            )));
        }
        let positive_fraction = pos as f64 / n as f64;
        let negative_fraction = neg as f64 / n as f64;
        let dominant_sign = if pos >= neg { Sign::Plus } else { Sign::Minus };
        months.push(MonthSigns {
            month: i as u32 + 1,
            positive: pos,
            negative: neg,
            ties,
            positive_fraction,
            negative_fraction,
            dominant_sign,
            dominant_fraction: positive_fraction.max(negative_fraction),
        });
    }
    Ok(SignTable { window, label, months })
}
