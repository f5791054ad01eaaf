use std::collections::BTreeMap;
use std::io::{Read, Write};

use super::{IndexSeries, MonthStamp, MonthlySeries, PricePanel};
use crate::error::{Error, Result};

/// Delimiter-separated panel layout: a `date` column in `YYYY-MM` followed by
/// one column per region. Lines starting with `#` are comments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PanelFormat {
    pub delimiter: u8,
}

impl Default for PanelFormat {
    fn default() -> Self {
        Self { delimiter: b',' }
    }
}

impl PanelFormat {
    pub fn tab() -> Self {
        Self { delimiter: b'\t' }
    }

    /// Tab if the first non-comment line contains a tab, comma otherwise.
    pub fn sniff(text: &str) -> Self {
        match text.lines().find(|l| !l.trim_start().starts_with('#')) {
            Some(l) if l.contains('\t') => Self::tab(),
            _ => Self::default(),
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::MalformedInput {
        line,
        column: 0,
        message: e.to_string(),
    }
}

/// Reads a panel. Regions may start and end at different months (cells
/// outside a region's span are left empty), but every month between a
/// region's first and last value must be present.
pub fn load_panel<R: Read>(source: R, format: PanelFormat) -> Result<PricePanel> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.len() < 2 || !headers[0].eq_ignore_ascii_case("date") {
        return Err(Error::MalformedInput {
            line: 1,
            column: 1,
            message: "header must be `date` followed by at least one region column".into(),
        });
    }
    let regions: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();

    let mut rows: BTreeMap<MonthStamp, Vec<Option<f64>>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let date: MonthStamp = record[0].parse().map_err(|e: Error| Error::MalformedInput {
            line,
            column: 1,
            message: e.to_string(),
        })?;
        let mut cells = Vec::with_capacity(regions.len());
        for (j, cell) in record.iter().skip(1).enumerate() {
            if cell.is_empty() {
                cells.push(None);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::MalformedInput {
                line,
                column: j + 2,
                message: format!("cannot parse {cell:?} as a number"),
            })?;
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!(
                    "region {}: non-positive or non-finite value {v} at {date} (line {line})",
                    regions[j]
                )));
            }
            cells.push(Some(v));
        }
        if rows.insert(date, cells).is_some() {
            return Err(Error::MalformedInput {
                line,
                column: 1,
                message: format!("duplicate date row {date}"),
            });
        }
    }

    let mut series = Vec::with_capacity(regions.len());
    for (j, region) in regions.iter().enumerate() {
        let present = || rows.iter().filter(|(_, c)| c[j].is_some()).map(|(m, _)| *m);
        let (Some(first), Some(last)) = (present().next(), present().next_back()) else {
            return Err(Error::MalformedInput {
                line: 1,
                column: j + 2,
                message: format!("region {region} has no values"),
            });
        };
        let mut values = Vec::with_capacity((first.months_until(last) + 1) as usize);
        let mut month = first;
        while month <= last {
            match rows.get(&month).and_then(|c| c[j]) {
                Some(v) => values.push(v),
                None => {
                    return Err(Error::Gap {
                        region: region.clone(),
                        month,
                    })
                }
            }
            month = month.succ();
        }
        series.push(IndexSeries::new(region.clone(), first, values)?);
    }
    PricePanel::new(series)
}

/// Writes a panel in the canonical layout. Values use the shortest decimal
/// representation that parses back to the same `f64`.
pub fn write_panel<W: Write>(sink: W, panel: &PricePanel, format: PanelFormat) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().delimiter(format.delimiter).from_writer(sink);
    let header = std::iter::once("date").chain(panel.regions());
    writer.write_record(header).map_err(csv_error)?;
    for month in panel.span().iter() {
        let mut row = vec![month.to_string()];
        row.extend(
            panel
                .series()
                .iter()
                .map(|s| s.at(month).map(|v| v.to_string()).unwrap_or_default()),
        );
        writer.write_record(&row).map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn load(text: &str) -> Result<PricePanel> {
        load_panel(text.as_bytes(), PanelFormat::sniff(text))
    }

    #[test]
    fn loads_and_sorts_rows() {
        let p = load("date,a,b\n2000-02,2,20\n2000-01,1,10\n2000-03,3,30\n").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.get("a").unwrap().values(), &[1.0, 2.0, 3.0]);
        assert_eq!(p.get("b").unwrap().start(), MonthStamp::new(2000, 1).unwrap());
    }

    #[test]
    fn large_panel_dimensions() {
        let mut text = String::from("date,r1,r2,r3\n");
        let start = MonthStamp::new(1983, 6).unwrap();
        for k in 0..262 {
            let m = start.add_months(k);
            text.push_str(&format!("{m},{},{},{}\n", 100 + k, 200 + k, 300 + k));
        }
        let p = load(&text).unwrap();
        assert_eq!(p.len(), 3);
        assert!(p.series().iter().all(|s| s.len() == 262));
    }

    #[test]
    fn tab_delimited_and_comments() {
        let p = load("# produced by hand\ndate\ta\n2000-01\t1.5\n2000-02\t1.75\n").unwrap();
        assert_eq!(p.get("a").unwrap().values(), &[1.5, 1.75]);
    }

    #[test]
    fn ragged_region_spans() {
        let p = load("date,a,b\n2000-01,1,\n2000-02,2,5\n2000-03,3,6\n").unwrap();
        let b = p.get("b").unwrap();
        assert_eq!(b.start(), MonthStamp::new(2000, 2).unwrap());
        assert_eq!(b.values(), &[5.0, 6.0]);
    }

    #[test]
    fn missing_row_is_gap() {
        let err = load("date,89120\n1999-06,100\n1999-08,101\n").unwrap_err();
        match err {
            Error::Gap { region, month } => {
                assert_eq!(region, "89120");
                assert_eq!(month.to_string(), "1999-07");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn empty_cell_inside_span_is_gap() {
        let err = load("date,a,89120\n1999-06,1,100\n1999-07,1,\n1999-08,1,101\n").unwrap_err();
        assert!(matches!(err, Error::Gap { ref region, .. } if region == "89120"));
    }

    #[test]
    fn zero_value_is_domain_error() {
        assert!(matches!(load("date,a\n2000-01,0.0\n"), Err(Error::Domain(_))));
        assert!(matches!(load("date,a\n2000-01,-3\n"), Err(Error::Domain(_))));
    }

    #[test]
    fn duplicate_date_is_malformed() {
        assert!(matches!(
            load("date,a\n2000-01,1\n2000-01,2\n"),
            Err(Error::MalformedInput { .. })
        ));
    }

    #[test]
    fn unparseable_cell_reports_position() {
        match load("date,a,b\n2000-01,1,2\n2000-02,1,x\n").unwrap_err() {
            Error::MalformedInput { line, column, .. } => assert_eq!((line, column), (3, 3)),
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(
            load("date,a\n2000-1,1\n"),
            Err(Error::MalformedInput { column: 1, .. })
        ));
        assert!(matches!(load("when,a\n2000-01,1\n"), Err(Error::MalformedInput { .. })));
    }

    proptest! {
        #[test]
        fn write_then_load_is_bit_exact(
            values in prop::collection::vec(
                prop::collection::vec(1e-6f64..1e9, 1..40), 1..5),
        ) {
            let start = MonthStamp::new(1990, 3).unwrap();
            let series: Vec<_> = values
                .into_iter()
                .enumerate()
                .map(|(i, v)| IndexSeries::new(format!("r{i}"), start.add_months(i as i64), v).unwrap())
                .collect();
            let panel = PricePanel::new(series).unwrap();
            let mut buf = Vec::new();
            write_panel(&mut buf, &panel, PanelFormat::default()).unwrap();
            let back = load_panel(buf.as_slice(), PanelFormat::default()).unwrap();
            for (a, b) in panel.series().iter().zip(back.series()) {
                prop_assert_eq!(a.start(), b.start());
                let bits_a: Vec<u64> = a.values().iter().map(|v| v.to_bits()).collect();
                let bits_b: Vec<u64> = b.values().iter().map(|v| v.to_bits()).collect();
                prop_assert_eq!(bits_a, bits_b);
            }
        }
    }
}
