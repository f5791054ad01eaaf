//! Monthly index series, growth rates, panel ingestion and calendar-month
//! statistics.

mod io;
mod month;
pub(crate) mod profile;

pub use io::{load_panel, write_panel, PanelFormat};
pub use month::{MonthRange, MonthStamp, MONTH_NAMES};
pub use profile::{month_profile, MonthProfile};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Common view over uniformly sampled monthly series.
pub trait MonthlySeries: Sized {
    fn region(&self) -> &str;
    fn start(&self) -> MonthStamp;
    fn values(&self) -> &[f64];

    /// Builds a series of the same kind sharing this one's region.
    fn with_values(&self, start: MonthStamp, values: Vec<f64>) -> Self;

    fn len(&self) -> usize {
        self.values().len()
    }

    fn is_empty(&self) -> bool {
        self.values().is_empty()
    }

    fn end(&self) -> MonthStamp {
        self.start().add_months(self.len() as i64 - 1)
    }

    fn span(&self) -> MonthRange {
        MonthRange {
            from: self.start(),
            to: self.end(),
        }
    }

    /// Value observed at `month`, if inside the span.
    fn at(&self, month: MonthStamp) -> Option<f64> {
        let k = self.start().months_until(month);
        if k < 0 {
            return None;
        }
        self.values().get(k as usize).copied()
    }

    /// `(month, value)` pairs in chronological order.
    fn iter_stamped(&self) -> impl Iterator<Item = (MonthStamp, f64)> + '_ {
        let start = self.start();
        self.values()
            .iter()
            .enumerate()
            .map(move |(k, &v)| (start.add_months(k as i64), v))
    }

    /// Inclusive sub-series between `from` and `to`.
    fn window(&self, from: MonthStamp, to: MonthStamp) -> Result<Self> {
        if from > to {
            return Err(Error::Range(format!("window start {from} is after its end {to}")));
        }
        let span = self.span();
        if !span.contains(from) || !span.contains(to) {
            return Err(Error::Range(format!(
                "window {from}:{to} outside span {span} of region {}",
                self.region()
            )));
        }
        let lo = self.start().months_until(from) as usize;
        let hi = self.start().months_until(to) as usize;
        Ok(self.with_values(from, self.values()[lo..=hi].to_vec()))
    }
}

/// Monthly index levels for one region. Values are strictly positive and
/// consecutive values are exactly one month apart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexSeries {
    region: String,
    start: MonthStamp,
    values: Vec<f64>,
}

impl IndexSeries {
    pub fn new(region: impl Into<String>, start: MonthStamp, values: Vec<f64>) -> Result<Self> {
        let region = region.into();
        if values.is_empty() {
            return Err(Error::InsufficientData(format!("region {region}: empty series")));
        }
        if let Some(k) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Domain(format!(
                "region {region}: non-positive or non-finite index value {} at {}",
                values[k],
                start.add_months(k as i64)
            )));
        }
        Ok(Self { region, start, values })
    }

    /// Returns the series with every level multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        IndexSeries::new(
            self.region.clone(),
            self.start,
            self.values.iter().map(|v| v * factor).collect(),
        )
    }

    /// Appends the months of `later` that follow this series' last month.
    /// Overlapping months are taken from `self`.
    pub fn extended_with(&self, later: &IndexSeries) -> Result<Self> {
        let next = self.end().succ();
        if later.start() > next {
            return Err(Error::Gap {
                region: self.region.clone(),
                month: next,
            });
        }
        let mut values = self.values.clone();
        values.extend(later.iter_stamped().filter(|(m, _)| *m >= next).map(|(_, v)| v));
        IndexSeries::new(self.region.clone(), self.start, values)
    }
}

impl MonthlySeries for IndexSeries {
    fn region(&self) -> &str {
        &self.region
    }
    fn start(&self) -> MonthStamp {
        self.start
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
    fn with_values(&self, start: MonthStamp, values: Vec<f64>) -> Self {
        Self {
            region: self.region.clone(),
            start,
            values,
        }
    }
}

/// Monthly log growth rates `g(t) = ln(p(t)/p(t-1))`, stamped at the later
/// month `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthSeries {
    region: String,
    start: MonthStamp,
    values: Vec<f64>,
}

impl GrowthSeries {
    pub fn new(region: impl Into<String>, start: MonthStamp, values: Vec<f64>) -> Self {
        Self {
            region: region.into(),
            start,
            values,
        }
    }
}

impl MonthlySeries for GrowthSeries {
    fn region(&self) -> &str {
        &self.region
    }
    fn start(&self) -> MonthStamp {
        self.start
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
    fn with_values(&self, start: MonthStamp, values: Vec<f64>) -> Self {
        Self {
            region: self.region.clone(),
            start,
            values,
        }
    }
}

/// Log growth rates of `series`.
pub fn compute_growth(series: &IndexSeries) -> Result<GrowthSeries> {
    if series.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "region {}: growth needs at least 2 months, got {}",
            series.region,
            series.len()
        )));
    }
    let values = series.values.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    Ok(GrowthSeries::new(series.region.clone(), series.start.succ(), values))
}

/// A set of index series with unique region codes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PricePanel {
    series: Vec<IndexSeries>,
}

impl PricePanel {
    pub fn new(series: Vec<IndexSeries>) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::InsufficientData("panel has no series".into()));
        }
        for (i, s) in series.iter().enumerate() {
            if series[..i].iter().any(|o| o.region == s.region) {
                return Err(Error::MalformedInput {
                    line: 1,
                    column: i + 1,
                    message: format!("duplicate region code {:?}", s.region),
                });
            }
        }
        Ok(Self { series })
    }

    pub fn series(&self) -> &[IndexSeries] {
        &self.series
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn regions(&self) -> impl Iterator<Item = &str> {
        self.series.iter().map(|s| s.region.as_str())
    }

    pub fn get(&self, region: &str) -> Result<&IndexSeries> {
        self.series
            .iter()
            .find(|s| s.region == region)
            .ok_or_else(|| Error::UnknownRegion(region.to_string()))
    }

    /// Earliest start and latest end over all series.
    pub fn span(&self) -> MonthRange {
        let from = self.series.iter().map(|s| s.start()).min().expect("non-empty panel");
        let to = self.series.iter().map(|s| s.end()).max().expect("non-empty panel");
        MonthRange { from, to }
    }

    /// Growth series of every region, in panel order.
    pub fn growth(&self) -> Result<Vec<GrowthSeries>> {
        self.series.iter().map(compute_growth).collect()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        PricePanel::new(self.series.iter().map(|s| s.scaled(factor)).collect::<Result<_>>()?)
    }

    /// Continues each region of `self` with the later months of the matching
    /// region in `later`. Regions absent from `later` are kept as they are.
    pub fn extended_with(&self, later: &PricePanel) -> Result<Self> {
        let series = self
            .series
            .iter()
            .map(|s| match later.get(&s.region) {
                Ok(l) => s.extended_with(l),
                Err(_) => Ok(s.clone()),
            })
            .collect::<Result<_>>()?;
        PricePanel::new(series)
    }
}
