//! Time series ingestion, validation and the CSV contracts shared by every
//! output file.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use thiserror::Error;

pub const ISO_DATE: &str = "%Y-%m-%d";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("line {line}: cannot parse date {text:?}")]
    BadDate { line: u64, text: String },
    #[error("line {line}: cannot parse value {text:?}")]
    BadValue { line: u64, text: String },
    #[error("line {line}: non-finite value {text:?}")]
    NonFinite { line: u64, text: String },
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("dates not strictly increasing at {0}")]
    Unordered(NaiveDate),
    #[error("series needs at least {need} observations, has {have}")]
    TooShort { need: usize, have: usize },
    #[error("series {left:?} and {right:?} are not date-aligned")]
    Misaligned { left: String, right: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io { path: path.display().to_string(), source }
}

/// Dated sequence of finite observations with strictly increasing dates.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    label: String,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(
        label: impl Into<String>,
        dates: Vec<NaiveDate>,
        values: Vec<f64>,
    ) -> Result<Self, DataError> {
        assert_eq!(dates.len(), values.len(), "dates and values differ in length");
        if values.is_empty() {
            return Err(DataError::TooShort { need: 1, have: 0 });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(DataError::NonFinite { line: i as u64 + 1, text: v.to_string() });
            }
        }
        for w in dates.windows(2) {
            if w[1] == w[0] {
                return Err(DataError::DuplicateDate(w[1]));
            }
            if w[1] < w[0] {
                return Err(DataError::Unordered(w[1]));
            }
        }
        Ok(Self { label: label.into(), dates, values })
    }

    /// Monthly series starting at `start`, one observation per month.
    pub fn monthly(label: impl Into<String>, start: NaiveDate, values: Vec<f64>) -> Result<Self, DataError> {
        let dates = (0..values.len())
            .map(|i| start.checked_add_months(chrono::Months::new(i as u32)).expect("date overflow"))
            .collect();
        Self::new(label, dates, values)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// First `n` observations.
    pub fn head(&self, n: usize) -> TimeSeries {
        TimeSeries {
            label: self.label.clone(),
            dates: self.dates[..n].to_vec(),
            values: self.values[..n].to_vec(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Index of `date`, if present.
    pub fn position(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    /// Logs a warning when consecutive dates are not one calendar month apart.
    pub fn warn_if_not_monthly(&self) {
        for w in self.dates.windows(2) {
            let months = (w[1].year() - w[0].year()) * 12 + w[1].month() as i32 - w[0].month() as i32;
            if months != 1 {
                log::warn!("{}: gap of {months} months between {} and {}", self.label, w[0], w[1]);
                return;
            }
        }
    }
}

/// First differences dated at the later endpoint.
pub fn diff(y: &TimeSeries) -> Result<TimeSeries, DataError> {
    if y.len() < 2 {
        return Err(DataError::TooShort { need: 2, have: y.len() });
    }
    let values = y.values.windows(2).map(|w| w[1] - w[0]).collect();
    TimeSeries::new(y.label.clone(), y.dates[1..].to_vec(), values)
}

/// Reads a headed, comma-delimited file into a validated series.
pub fn read_csv(
    path: &Path,
    date_column: &str,
    value_column: &str,
    date_format: &str,
) -> Result<TimeSeries, DataError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let date_idx = find(date_column)?;
    let value_idx = find(value_column)?;

    let mut dates = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let date_text = record.get(date_idx).unwrap_or_default();
        let value_text = record.get(value_idx).unwrap_or_default();
        let date = NaiveDate::parse_from_str(date_text, date_format)
            .map_err(|_| DataError::BadDate { line, text: date_text.to_string() })?;
        let value: f64 = value_text
            .parse()
            .map_err(|_| DataError::BadValue { line, text: value_text.to_string() })?;
        if !value.is_finite() {
            return Err(DataError::NonFinite { line, text: value_text.to_string() });
        }
        if let Some(&last) = dates.last() {
            if date == last {
                return Err(DataError::DuplicateDate(date));
            }
            if date < last {
                return Err(DataError::Unordered(date));
            }
        }
        dates.push(date);
        values.push(value);
    }
    let label = path.file_stem().map_or_else(|| value_column.to_string(), |s| s.to_string_lossy().into_owned());
    let series = TimeSeries::new(label, dates, values)?;
    series.warn_if_not_monthly();
    Ok(series)
}

/// Reads an ISO-dated file with columns `date,value`.
pub fn read_series(path: &Path) -> Result<TimeSeries, DataError> {
    read_csv(path, "date", "value", ISO_DATE)
}

/// Writes `date,value` with shortest round-trip decimal text.
pub fn write_csv(path: &Path, series: &TimeSeries) -> Result<(), DataError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    let mut body = String::from("date,value\n");
    for (d, v) in series.dates.iter().zip(&series.values) {
        body.push_str(&format!("{},{}\n", d.format(ISO_DATE), v));
    }
    out.write_all(body.as_bytes()).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

/// Writes a text file, mapping failures to [`DataError::Io`].
pub fn write_text(path: &Path, text: &str) -> Result<(), DataError> {
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn read_text(path: &Path) -> Result<String, DataError> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(y: i32, m: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, 1).unwrap()
    }

    fn tmp_csv(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_two_rows() {
        let f = tmp_csv("date,value\n2020-01-01,1.5\n2020-02-01,-0.25\n");
        let s = read_series(f.path()).unwrap();
        assert_eq!(s.values(), &[1.5, -0.25]);
        assert_eq!(s.dates(), &[d(2020, 1), d(2020, 2)]);
    }

    #[test]
    fn duplicate_date_named() {
        let f = tmp_csv("date,value\n2020-01-01,1\n2020-01-01,2\n");
        let err = read_series(f.path()).unwrap_err();
        assert!(err.to_string().contains("2020-01-01"), "{err}");
    }

    #[test]
    fn nan_reports_line() {
        let f = tmp_csv("date,value\n2020-01-01,1\n2020-02-01,NaN\n");
        match read_series(f.path()).unwrap_err() {
            DataError::NonFinite { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn unordered_and_bad_text() {
        let f = tmp_csv("date,value\n2020-02-01,1\n2020-01-01,2\n");
        assert!(matches!(read_series(f.path()), Err(DataError::Unordered(_))));
        let f = tmp_csv("date,value\n2020-02-01,abc\n");
        assert!(matches!(read_series(f.path()), Err(DataError::BadValue { line: 2, .. })));
        let f = tmp_csv("when,value\n2020-02-01,1\n");
        assert!(matches!(read_series(f.path()), Err(DataError::MissingColumn(_))));
    }

    #[test]
    fn custom_columns_and_format() {
        let g = tmp_csv("month,other,yield\n15.01.2020,9,1.0\n15.02.2020,9,1.5\n");
        let s = read_csv(g.path(), "month", "yield", "%d.%m.%Y").unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn diff_examples() {
        let s = TimeSeries::monthly("y", d(2000, 1), vec![1.0, 3.0, 2.0]).unwrap();
        let dy = diff(&s).unwrap();
        assert_eq!(dy.values(), &[2.0, -1.0]);
        assert_eq!(dy.dates()[0], d(2000, 2));

        let c = TimeSeries::monthly("c", d(2000, 1), vec![4.0; 5]).unwrap();
        assert!(diff(&c).unwrap().values().iter().all(|&v| v == 0.0));

        let one = TimeSeries::monthly("c", d(2000, 1), vec![4.0]).unwrap();
        assert!(matches!(diff(&one), Err(DataError::TooShort { .. })));
    }

    #[test]
    fn diff_then_cumsum_restores() {
        let vals = vec![1.0, 3.0, 2.0, 2.5, -4.0];
        let s = TimeSeries::monthly("y", d(2000, 1), vals.clone()).unwrap();
        let dy = diff(&s).unwrap();
        let mut acc = vals[0];
        let mut rebuilt = vec![acc];
        for v in dy.values() {
            acc += v;
            rebuilt.push(acc);
        }
        assert_eq!(rebuilt, vals);
    }

    proptest! {
        #[test]
        fn write_then_read_is_bitwise(values in prop::collection::vec(-1e12f64..1e12, 1..40)) {
            let s = TimeSeries::monthly("series", d(1990, 1), values).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("series.csv");
            write_csv(&path, &s).unwrap();
            let back = read_series(&path).unwrap();
            prop_assert_eq!(back.dates(), s.dates());
            for (a, b) in back.values().iter().zip(s.values()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
