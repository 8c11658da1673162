//! Tick CSV loading: session filtering, per-day splitting, log transform.
//!
//! The canonical input schema is `date,time,price` with a header, e.g.
//!
//! ```text
//! date,time,price
//! 2011-01-03,09:30:00.125,4.71
//! ```
//!
//! Column names or zero-based indices, formats and the session window are
//! configurable through [`IngestSpec`].

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TickSeries;

/// A column selected by header name or zero-based position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl ColumnRef {
    fn resolve(&self, headers: Option<&csv::StringRecord>) -> Result<usize> {
        match (self, headers) {
            (ColumnRef::Index(i), _) => Ok(*i),
            (ColumnRef::Name(name), Some(h)) => h
                .iter()
                .position(|c| c.trim() == name)
                .ok_or_else(|| Error::Ingest(format!("column `{name}` not found in header"))),
            (ColumnRef::Name(name), None) => Err(Error::Ingest(format!(
                "column `{name}` given by name but the file has no header"
            ))),
        }
    }
}

impl From<&str> for ColumnRef {
    fn from(s: &str) -> Self {
        match s.parse() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceScale {
    /// Prices in levels; must be positive and are log-transformed.
    #[default]
    Raw,
    /// Already log prices.
    Log,
}

/// Handling of rows sharing a timestamp within a day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    /// Keep the first row, drop later ones.
    #[default]
    KeepFirst,
    /// Keep every row, shifting later ones by [`JITTER_SECONDS`] steps in
    /// row order.
    Jitter,
}

pub const JITTER_SECONDS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestSpec {
    pub path: PathBuf,
    pub delimiter: char,
    pub has_header: bool,
    /// Date column; `None` when the time column holds full date-times.
    pub date_column: Option<ColumnRef>,
    pub time_column: ColumnRef,
    pub price_column: ColumnRef,
    pub date_format: String,
    pub time_format: String,
    /// Used for the time column when `date_column` is `None`.
    pub datetime_format: String,
    /// Session bounds `HH:MM:SS`, both inclusive.
    pub session_start: String,
    pub session_end: String,
    pub price_scale: PriceScale,
    pub ties: TieRule,
}

impl Default for IngestSpec {
    fn default() -> Self {
        Self {
            path: PathBuf::new(),
            delimiter: ',',
            has_header: true,
            date_column: Some(ColumnRef::Name("date".into())),
            time_column: ColumnRef::Name("time".into()),
            price_column: ColumnRef::Name("price".into()),
            date_format: "%Y-%m-%d".into(),
            time_format: "%H:%M:%S%.f".into(),
            datetime_format: "%Y-%m-%d %H:%M:%S%.f".into(),
            session_start: "09:30:00".into(),
            session_end: "16:00:00".into(),
            price_scale: PriceScale::Raw,
            ties: TieRule::KeepFirst,
        }
    }
}

impl IngestSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            ..Self::default()
        }
    }

    fn session(&self) -> Result<(f64, f64)> {
        let parse = |s: &str, name: &'static str| {
            NaiveTime::parse_from_str(s, "%H:%M:%S%.f")
                .map(seconds_of_day)
                .map_err(|e| Error::param(name, format!("`{s}`: {e}")))
        };
        let start = parse(&self.session_start, "session_start")?;
        let end = parse(&self.session_end, "session_end")?;
        if start >= end {
            return Err(Error::param(
                "session",
                format!("start {} must precede end {}", self.session_start, self.session_end),
            ));
        }
        Ok((start, end))
    }

    fn delimiter_byte(&self) -> Result<u8> {
        u8::try_from(self.delimiter)
            .ok()
            .filter(|b| b.is_ascii())
            .ok_or_else(|| {
                Error::param(
                    "delimiter",
                    format!("must be a single ASCII character, got {:?}", self.delimiter),
                )
            })
    }
}

fn seconds_of_day(t: NaiveTime) -> f64 {
    t.num_seconds_from_midnight() as f64 + t.nanosecond() as f64 * 1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseIssue {
    /// 1-based line number in the file.
    pub line: u64,
    pub message: String,
}

/// Row accounting; `rows_in = rows_kept + dropped_total()`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_in: usize,
    pub rows_kept: usize,
    pub dropped_unparseable: usize,
    pub dropped_outside_session: usize,
    pub dropped_nonpositive: usize,
    pub dropped_duplicate_timestamp: usize,
    pub dropped_out_of_order: usize,
    /// Rows kept with a shifted timestamp under [`TieRule::Jitter`].
    pub jittered: usize,
    /// Days present in the file with no surviving rows.
    pub empty_days: Vec<NaiveDate>,
    /// First parse failures, capped at [`MAX_ISSUES`].
    pub issues: Vec<ParseIssue>,
}

pub const MAX_ISSUES: usize = 100;

impl IngestReport {
    pub fn dropped_total(&self) -> usize {
        self.dropped_unparseable
            + self.dropped_outside_session
            + self.dropped_nonpositive
            + self.dropped_duplicate_timestamp
            + self.dropped_out_of_order
    }

    fn issue(&mut self, line: u64, message: String) {
        self.dropped_unparseable += 1;
        if self.issues.len() < MAX_ISSUES {
            self.issues.push(ParseIssue { line, message });
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DaySeries {
    pub date: NaiveDate,
    pub series: TickSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub days: Vec<DaySeries>,
    pub report: IngestReport,
}

/// Load `spec.path` and split it into per-day series.
pub fn load_days(spec: &IngestSpec) -> Result<Ingested> {
    let file = std::fs::File::open(&spec.path)
        .map_err(|e| Error::Ingest(format!("cannot open {}: {e}", spec.path.display())))?;
    load_days_from_reader(spec, std::io::BufReader::new(file))
}

struct Columns {
    date: Option<usize>,
    time: usize,
    price: usize,
}

pub fn load_days_from_reader<R: Read>(spec: &IngestSpec, reader: R) -> Result<Ingested> {
    let (open, close) = spec.session()?;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter_byte()?)
        .has_headers(spec.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = if spec.has_header {
        Some(rdr.headers()?.clone())
    } else {
        None
    };
    let cols = Columns {
        date: spec
            .date_column
            .as_ref()
            .map(|c| c.resolve(headers.as_ref()))
            .transpose()?,
        time: spec.time_column.resolve(headers.as_ref())?,
        price: spec.price_column.resolve(headers.as_ref())?,
    };

    let mut report = IngestReport::default();
    // (seconds since open, log price) per day, in file order
    let mut days: BTreeMap<NaiveDate, Vec<(f64, f64)>> = BTreeMap::new();
    let mut record = csv::StringRecord::new();
    loop {
        let line = rdr.position().line();
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                report.rows_in += 1;
                report.issue(line, e.to_string());
                continue;
            }
        }
        report.rows_in += 1;
        let (date, secs, price) = match parse_row(spec, &cols, &record) {
            Ok(v) => v,
            Err(msg) => {
                report.issue(line, msg);
                continue;
            }
        };
        let day = days.entry(date).or_default();
        if secs < open || secs > close {
            report.dropped_outside_session += 1;
            continue;
        }
        let log_price = match spec.price_scale {
            PriceScale::Raw if price <= 0.0 => {
                report.dropped_nonpositive += 1;
                continue;
            }
            PriceScale::Raw => price.ln(),
            PriceScale::Log => price,
        };
        day.push((secs - open, log_price));
    }

    let mut out = Vec::new();
    for (date, rows) in days {
        let mut ts = Vec::with_capacity(rows.len());
        let mut ps = Vec::with_capacity(rows.len());
        let mut last_raw = f64::NEG_INFINITY;
        for (t, p) in rows {
            let Some(&prev) = ts.last() else {
                ts.push(t);
                ps.push(p);
                last_raw = t;
                continue;
            };
            if t < last_raw {
                report.dropped_out_of_order += 1;
                continue;
            }
            if t == last_raw {
                match spec.ties {
                    TieRule::KeepFirst => {
                        report.dropped_duplicate_timestamp += 1;
                        continue;
                    }
                    TieRule::Jitter => {
                        report.jittered += 1;
                        ts.push(prev + JITTER_SECONDS);
                        ps.push(p);
                        continue;
                    }
                }
            }
            // a jittered run may have reached past the next raw timestamp
            if t <= prev {
                report.jittered += 1;
                ts.push(prev + JITTER_SECONDS);
            } else {
                ts.push(t);
            }
            ps.push(p);
            last_raw = t;
        }
        if ts.is_empty() {
            log::warn!("{date}: no rows left after filtering, day skipped");
            report.empty_days.push(date);
            continue;
        }
        report.rows_kept += ts.len();
        let series = TickSeries::new(ts, ps, date.to_string())?;
        out.push(DaySeries { date, series });
    }
    debug_assert_eq!(report.rows_in, report.rows_kept + report.dropped_total());
    Ok(Ingested { days: out, report })
}

fn parse_row(
    spec: &IngestSpec,
    cols: &Columns,
    rec: &csv::StringRecord,
) -> std::result::Result<(NaiveDate, f64, f64), String> {
    let field = |i: usize, what: &str| rec.get(i).ok_or_else(|| format!("missing {what} field (column {i})"));
    let (date, time) = match cols.date {
        Some(dc) => {
            let d = field(dc, "date")?;
            let date = NaiveDate::parse_from_str(d, &spec.date_format).map_err(|e| format!("date `{d}`: {e}"))?;
            let t = field(cols.time, "time")?;
            let time = NaiveTime::parse_from_str(t, &spec.time_format).map_err(|e| format!("time `{t}`: {e}"))?;
            (date, time)
        }
        None => {
            let s = field(cols.time, "timestamp")?;
            let dt =
                NaiveDateTime::parse_from_str(s, &spec.datetime_format).map_err(|e| format!("timestamp `{s}`: {e}"))?;
            (dt.date(), dt.time())
        }
    };
    let p = field(cols.price, "price")?;
    let price: f64 = p.parse().map_err(|_| format!("price `{p}` is not a number"))?;
    if !price.is_finite() {
        return Err(format!("price `{p}` is not finite"));
    }
    Ok((date, seconds_of_day(time), price))
}

/// Canonical series CSV: `timestamp_seconds,log_price`, 12 significant
/// digits.
pub fn write_series_csv<W: Write>(s: &TickSeries, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["timestamp_seconds", "log_price"])?;
    for (t, p) in s.timestamps().iter().zip(s.log_prices()) {
        wr.write_record([format!("{t:.11e}"), format!("{p:.11e}")])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_series_csv<R: Read>(r: R, label: impl Into<String>) -> Result<TickSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut ts = Vec::new();
    let mut ps = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let get = |i: usize| -> Result<f64> {
            let v = rec
                .get(i)
                .ok_or_else(|| Error::InvalidSeries(format!("row {}: expected 2 columns", k + 2)))?;
            v.parse()
                .map_err(|_| Error::InvalidSeries(format!("row {}: `{v}` is not a number", k + 2)))
        };
        ts.push(get(0)?);
        ps.push(get(1)?);
    }
    TickSeries::new(ts, ps, label)
}

pub fn read_series_file(path: &Path) -> Result<TickSeries> {
    let f = std::fs::File::open(path)?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_series_csv(std::io::BufReader::new(f), label)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, spec: &IngestSpec) -> Ingested {
        load_days_from_reader(spec, text.as_bytes()).unwrap()
    }

    fn accounted(r: &IngestReport) -> bool {
        r.rows_in == r.rows_kept + r.dropped_total()
    }

    #[test]
    fn toy_file() {
        let text = "date,time,price\n2011-01-03,09:30:00,10\n2011-01-03,09:30:01.5,11\n2011-01-03,10:00:00,12\n";
        let got = load(text, &IngestSpec::default());
        assert_eq!(got.days.len(), 1);
        let s = &got.days[0].series;
        assert_eq!(s.len(), 3);
        assert_eq!(s.timestamps(), &[0.0, 1.5, 1800.0]);
        assert_eq!(s.log_prices()[1], 11f64.ln());
        assert_eq!(got.days[0].date, NaiveDate::from_ymd_opt(2011, 1, 3).unwrap());
        assert!(accounted(&got.report));
    }

    #[test]
    fn session_bounds_are_inclusive() {
        let text = "date,time,price\n\
                    2011-01-03,09:29:59,10\n\
                    2011-01-03,09:30:00,10\n\
                    2011-01-03,16:00:00,10\n\
                    2011-01-03,16:00:00.001,10\n";
        let got = load(text, &IngestSpec::default());
        assert_eq!(got.days[0].series.len(), 2);
        assert_eq!(got.report.dropped_outside_session, 2);
        assert_eq!(*got.days[0].series.timestamps().last().unwrap(), 23_400.0);
    }

    #[test]
    fn drops_are_counted() {
        let text = "date,time,price\n\
                    2011-01-03,09:31:00,10\n\
                    2011-01-03,09:31:00,10.5\n\
                    2011-01-03,09:30:30,10\n\
                    2011-01-03,09:32:00,-1\n\
                    2011-01-03,09:33:00,abc\n\
                    2011-01-03,nonsense,10\n\
                    2011-01-04,09:40:00,20\n\
                    2011-01-05,08:00:00,20\n";
        let got = load(text, &IngestSpec::default());
        let r = &got.report;
        assert_eq!(r.rows_in, 8);
        assert_eq!(r.dropped_duplicate_timestamp, 1);
        assert_eq!(r.dropped_out_of_order, 1);
        assert_eq!(r.dropped_nonpositive, 1);
        assert_eq!(r.dropped_unparseable, 2);
        assert_eq!(r.dropped_outside_session, 1);
        assert_eq!(r.issues[0].line, 6);
        assert_eq!(r.empty_days, vec![NaiveDate::from_ymd_opt(2011, 1, 5).unwrap()]);
        assert_eq!(got.days.len(), 2);
        assert_eq!(got.days[0].series.log_prices(), &[10f64.ln()]);
        assert!(accounted(r));
    }

    #[test]
    fn jitter_keeps_ties_in_row_order() {
        let text = "date,time,price\n\
                    2011-01-03,09:31:00,10\n\
                    2011-01-03,09:31:00,11\n\
                    2011-01-03,09:31:00,12\n\
                    2011-01-03,09:31:01,13\n";
        let spec = IngestSpec {
            ties: TieRule::Jitter,
            ..IngestSpec::default()
        };
        let got = load(text, &spec);
        let s = &got.days[0].series;
        assert_eq!(s.len(), 4);
        assert_eq!(got.report.jittered, 2);
        assert_eq!(s.log_prices()[2], 12f64.ln());
        assert!((s.timestamps()[2] - 60.0 - 2e-6).abs() < 1e-9);
        assert!(accounted(&got.report));
    }

    #[test]
    fn indices_no_header_log_scale_and_datetime() {
        let text = "4.6;2011-01-03 09:45:00\n4.7;2011-01-03 09:45:02\n";
        let spec = IngestSpec {
            delimiter: ';',
            has_header: false,
            date_column: None,
            time_column: ColumnRef::Index(1),
            price_column: ColumnRef::Index(0),
            price_scale: PriceScale::Log,
            ..IngestSpec::default()
        };
        let got = load(text, &spec);
        assert_eq!(got.days[0].series.log_prices(), &[4.6, 4.7]);
        assert_eq!(got.days[0].series.timestamps(), &[900.0, 902.0]);
    }

    #[test]
    fn config_errors() {
        let text = "date,time,px\n2011-01-03,09:45:00,1\n";
        let err = load_days_from_reader(&IngestSpec::default(), text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("`price`"));
        let spec = IngestSpec {
            session_start: "16:00:00".into(),
            session_end: "09:30:00".into(),
            ..IngestSpec::default()
        };
        assert!(load_days_from_reader(&spec, text.as_bytes()).is_err());
        let spec = IngestSpec {
            has_header: false,
            ..IngestSpec::default()
        };
        assert!(load_days_from_reader(&spec, text.as_bytes()).is_err());
        assert!(load_days(&IngestSpec::new("/nonexistent/file.csv")).is_err());
    }

    #[test]
    fn write_back_round_trip() {
        let text = "date,time,price\n2011-01-03,09:30:00,10\n2011-01-03,09:30:00.25,10.01\n2011-01-03,12:00:00,9.99\n";
        let s = load(text, &IngestSpec::default()).days.remove(0).series;
        let mut buf = Vec::new();
        write_series_csv(&s, &mut buf).unwrap();
        let back = read_series_csv(buf.as_slice(), s.label.clone()).unwrap();
        let mut again = Vec::new();
        write_series_csv(&back, &mut again).unwrap();
        assert_eq!(buf, again);
        let third = read_series_csv(again.as_slice(), s.label.clone()).unwrap();
        assert_eq!(back, third);
        for (a, b) in s.log_prices().iter().zip(back.log_prices()) {
            assert!((a - b).abs() <= 1e-11 * a.abs());
        }
    }

    #[test]
    fn spec_json_defaults() {
        let spec: IngestSpec = serde_json::from_str(r#"{"path":"x.csv","price_column":3}"#).unwrap();
        assert_eq!(spec.price_column, ColumnRef::Index(3));
        assert_eq!(spec.time_column, ColumnRef::Name("time".into()));
        assert_eq!(ColumnRef::from("2"), ColumnRef::Index(2));
        assert_eq!(ColumnRef::from("px"), ColumnRef::Name("px".into()));
    }
}
