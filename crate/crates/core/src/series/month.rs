use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A calendar month. Ordered chronologically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonthStamp {
    year: i32,
    month: u8,
}

/// English three-letter month names, January first.
pub const MONTH_NAMES: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

impl MonthStamp {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Domain(format!("month {month} outside 1..=12")));
        }
        Ok(Self {
            year,
            month: month as u8,
        })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    /// Month within the year, 1 = January.
    pub fn month(self) -> u32 {
        u32::from(self.month)
    }

    /// Zero-based month index within the year, 0 = January.
    pub fn month_index(self) -> usize {
        usize::from(self.month - 1)
    }

    /// Months since January of year 0.
    pub fn ordinal(self) -> i64 {
        12 * i64::from(self.year) + i64::from(self.month) - 1
    }

    pub fn from_ordinal(ordinal: i64) -> Self {
        let year = ordinal.div_euclid(12);
        let month = ordinal.rem_euclid(12) + 1;
        Self {
            year: year as i32,
            month: month as u8,
        }
    }

    pub fn add_months(self, months: i64) -> Self {
        Self::from_ordinal(self.ordinal() + months)
    }

    pub fn succ(self) -> Self {
        self.add_months(1)
    }

    pub fn pred(self) -> Self {
        self.add_months(-1)
    }

    /// Signed number of months from `self` to `other`.
    pub fn months_until(self, other: MonthStamp) -> i64 {
        other.ordinal() - self.ordinal()
    }

    /// Calendar time in years, January of year `y` being exactly `y.0`.
    pub fn fractional_year(self) -> f64 {
        f64::from(self.year) + f64::from(self.month - 1) / 12.0
    }

    pub fn month_name(self) -> &'static str {
        MONTH_NAMES[self.month_index()]
    }
}

impl fmt::Display for MonthStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for MonthStamp {
    type Err = Error;

    /// Parses `YYYY-MM`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("invalid month stamp {s:?}, expected YYYY-MM"));
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        if y.len() != 4 || m.len() != 2 || !y.bytes().chain(m.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let year: i32 = y.parse().map_err(|_| bad())?;
        let month: u32 = m.parse().map_err(|_| bad())?;
        MonthStamp::new(year, month).map_err(|_| bad())
    }
}

impl Serialize for MonthStamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MonthStamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive month range, written `YYYY-MM:YYYY-MM`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthRange {
    pub from: MonthStamp,
    pub to: MonthStamp,
}

impl MonthRange {
    pub fn new(from: MonthStamp, to: MonthStamp) -> Result<Self> {
        if from > to {
            return Err(Error::Range(format!("window start {from} is after its end {to}")));
        }
        Ok(Self { from, to })
    }

    pub fn contains(&self, m: MonthStamp) -> bool {
        self.from <= m && m <= self.to
    }

    pub fn len(&self) -> usize {
        (self.from.months_until(self.to) + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = MonthStamp> {
        let from = self.from.ordinal();
        (from..=self.to.ordinal()).map(MonthStamp::from_ordinal)
    }
}

impl fmt::Display for MonthRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.from, self.to)
    }
}

impl FromStr for MonthRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Range(format!("invalid window {s:?}, expected YYYY-MM:YYYY-MM")))?;
        MonthRange::new(a.parse()?, b.parse()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_follows_ordinal() {
        let a = MonthStamp::new(1999, 12).unwrap();
        let b = MonthStamp::new(2000, 1).unwrap();
        assert!(a < b);
        assert_eq!(a.succ(), b);
        assert_eq!(b.pred(), a);
        assert_eq!(a.months_until(b), 1);
    }

    #[test]
    fn ordinal_roundtrip_negative_years() {
        for ord in -30..30 {
            assert_eq!(MonthStamp::from_ordinal(ord).ordinal(), ord);
        }
    }

    #[test]
    fn rejects_bad_months() {
        assert!(MonthStamp::new(2000, 0).is_err());
        assert!(MonthStamp::new(2000, 13).is_err());
        assert!("2000-13".parse::<MonthStamp>().is_err());
        assert!("2000-1".parse::<MonthStamp>().is_err());
        assert!("2000/01".parse::<MonthStamp>().is_err());
        assert!("20000-01".parse::<MonthStamp>().is_err());
    }

    #[test]
    fn parse_and_display() {
        let m: MonthStamp = "1999-07".parse().unwrap();
        assert_eq!((m.year(), m.month()), (1999, 7));
        assert_eq!(m.to_string(), "1999-07");
        assert_eq!(m.month_name(), "Jul");
        assert!((m.fractional_year() - 1999.5).abs() < 1e-12);
    }

    #[test]
    fn range_parse() {
        let r: MonthRange = "2001-08:2005-06".parse().unwrap();
        assert_eq!(r.len(), 47);
        assert!("2005-06:2001-08".parse::<MonthRange>().is_err());
    }
}
