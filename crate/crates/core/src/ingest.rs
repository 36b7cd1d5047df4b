//! CSV ingestion, gap imputation and per-origin instance construction.
//!
//! A [`RawSeries`] is an hourly, gap-free table with one endogenous target
//! column, any number of numeric exogenous columns, an optional exogenous
//! forecast feed and boolean calendar flags. [`build_instances`] turns it into
//! one [`Instance`] per forecast origin.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, Datelike, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default number of consecutive missing hours that may be interpolated.
pub const DEFAULT_MAX_GAP: usize = 6;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("format error at row {row}: {message}")]
    Format { row: usize, message: String },
    #[error("unrecoverable gap in column `{column}`: {len} missing hours starting at {start}")]
    UnrecoverableGap {
        column: String,
        start: NaiveDateTime,
        len: usize,
    },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid feature config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, IngestError>;

/// Mapping from CSV columns to the roles the engine understands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnRoles {
    pub timestamp: String,
    pub target: String,
    #[serde(default)]
    pub exogenous: Vec<String>,
    /// Column holding an external forecast of one exogenous series, aligned
    /// so that the value at hour `t` is the forecast for hour `t`.
    #[serde(default)]
    pub forecast: Option<String>,
    #[serde(default)]
    pub flags: Vec<String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    /// Longest run of missing hours (absent rows or empty cells) tolerated.
    #[serde(default = "default_max_gap")]
    pub max_gap: usize,
}

fn default_delimiter() -> char {
    ','
}

fn default_max_gap() -> usize {
    DEFAULT_MAX_GAP
}

impl ColumnRoles {
    pub fn new(timestamp: impl Into<String>, target: impl Into<String>) -> Self {
        Self {
            timestamp: timestamp.into(),
            target: target.into(),
            exogenous: Vec::new(),
            forecast: None,
            flags: Vec::new(),
            delimiter: default_delimiter(),
            max_gap: default_max_gap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSeries {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedFlags {
    pub name: String,
    pub values: Vec<Option<bool>>,
}

/// Hourly multivariate series. Missing numeric values are `NaN` and missing
/// flags are `None` until [`impute_gaps`] has run.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub timestamps: Vec<NaiveDateTime>,
    pub target: Vec<f64>,
    pub exogenous: Vec<NamedSeries>,
    pub forecast: Option<NamedSeries>,
    pub flags: Vec<NamedFlags>,
}

impl RawSeries {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn exogenous(&self, name: &str) -> Option<&NamedSeries> {
        self.exogenous.iter().find(|s| s.name == name)
    }

    pub fn flag(&self, name: &str) -> Option<&NamedFlags> {
        self.flags.iter().find(|s| s.name == name)
    }

    /// Restrict to `[start, end)` by timestamp.
    pub fn slice_by_time(&self, start: NaiveDateTime, end: NaiveDateTime) -> RawSeries {
        let lo = self.timestamps.partition_point(|t| *t < start);
        let hi = self.timestamps.partition_point(|t| *t < end);
        self.slice(lo, hi)
    }

    pub fn slice(&self, lo: usize, hi: usize) -> RawSeries {
        RawSeries {
            timestamps: self.timestamps[lo..hi].to_vec(),
            target: self.target[lo..hi].to_vec(),
            exogenous: self
                .exogenous
                .iter()
                .map(|s| NamedSeries {
                    name: s.name.clone(),
                    values: s.values[lo..hi].to_vec(),
                })
                .collect(),
            forecast: self.forecast.as_ref().map(|s| NamedSeries {
                name: s.name.clone(),
                values: s.values[lo..hi].to_vec(),
            }),
            flags: self
                .flags
                .iter()
                .map(|s| NamedFlags {
                    name: s.name.clone(),
                    values: s.values[lo..hi].to_vec(),
                })
                .collect(),
        }
    }

    fn numeric_columns_mut(&mut self) -> impl Iterator<Item = (&str, &mut Vec<f64>)> {
        let target = std::iter::once(("target", &mut self.target));
        let exo = self
            .exogenous
            .iter_mut()
            .map(|s| (s.name.as_str(), &mut s.values));
        let fc = self
            .forecast
            .iter_mut()
            .map(|s| (s.name.as_str(), &mut s.values));
        target.chain(exo).chain(fc)
    }
}

/// Parse an ISO-8601 / RFC 3339 or `YYYY-MM-DD HH:MM[:SS]` timestamp.
/// Values carrying an offset are converted to UTC.
pub fn parse_timestamp(raw: &str) -> Option<NaiveDateTime> {
    let s = raw.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.naive_utc());
    }
    const FORMATS: [&str; 4] = [
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

fn parse_number(raw: &str) -> Option<f64> {
    let s = raw.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("na") || s.eq_ignore_ascii_case("nan") {
        return None;
    }
    s.parse::<f64>().ok()
}

fn parse_flag(raw: &str) -> std::result::Result<Option<bool>, ()> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "" | "na" | "nan" => Ok(None),
        "1" | "1.0" | "true" | "yes" | "y" => Ok(Some(true)),
        "0" | "0.0" | "false" | "no" | "n" => Ok(Some(false)),
        _ => Err(()),
    }
}

/// Read a CSV file according to `roles`.
pub fn load_csv(path: impl AsRef<Path>, roles: &ColumnRoles) -> Result<RawSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(file, roles)
}

/// Read CSV data from any reader. Rows are sorted by timestamp; hourly gaps of
/// at most `roles.max_gap` missing rows are filled with missing values so that
/// [`impute_gaps`] can repair them.
pub fn read_csv<R: Read>(reader: R, roles: &ColumnRoles) -> Result<RawSeries> {
    if !roles.delimiter.is_ascii() {
        return Err(IngestError::Schema(
            "delimiter must be an ASCII character".into(),
        ));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(roles.delimiter as u8)
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| IngestError::Format {
            row: 1,
            message: e.to_string(),
        })?
        .clone();

    let column = |name: &str, role: &str| -> Result<usize> {
        let matches: Vec<usize> = headers
            .iter()
            .enumerate()
            .filter(|(_, h)| h.trim() == name)
            .map(|(i, _)| i)
            .collect();
        match matches.as_slice() {
            [i] => Ok(*i),
            [] => Err(IngestError::Schema(format!(
                "column `{name}` for role `{role}` not found in header"
            ))),
            _ => Err(IngestError::Schema(format!(
                "column `{name}` for role `{role}` appears more than once"
            ))),
        }
    };

    let ts_col = column(&roles.timestamp, "timestamp")?;
    let target_col = column(&roles.target, "target")?;
    let exo_cols = roles
        .exogenous
        .iter()
        .map(|n| column(n, "exogenous"))
        .collect::<Result<Vec<_>>>()?;
    let fc_col = roles
        .forecast
        .as_deref()
        .map(|n| column(n, "forecast"))
        .transpose()?;
    let flag_cols = roles
        .flags
        .iter()
        .map(|n| column(n, "flag"))
        .collect::<Result<Vec<_>>>()?;

    struct Row {
        line: usize,
        ts: NaiveDateTime,
        target: f64,
        exo: Vec<f64>,
        fc: f64,
        flags: Vec<Option<bool>>,
    }

    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        // header is line 1
        let line = i + 2;
        let rec = rec.map_err(|e| IngestError::Format {
            row: line,
            message: e.to_string(),
        })?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let ts = parse_timestamp(field(ts_col)).ok_or_else(|| IngestError::Format {
            row: line,
            message: format!("unparseable timestamp `{}`", field(ts_col)),
        })?;
        let num = |c: usize| -> Result<f64> {
            let raw = field(c);
            match parse_number(raw) {
                Some(v) => Ok(v),
                None if raw.trim().is_empty()
                    || raw.trim().eq_ignore_ascii_case("na")
                    || raw.trim().eq_ignore_ascii_case("nan") =>
                {
                    Ok(f64::NAN)
                }
                None => Err(IngestError::Format {
                    row: line,
                    message: format!("non-numeric value `{raw}` in column `{}`", &headers[c]),
                }),
            }
        };
        let flags = flag_cols
            .iter()
            .map(|&c| {
                parse_flag(field(c)).map_err(|_| IngestError::Format {
                    row: line,
                    message: format!("invalid flag `{}` in column `{}`", field(c), &headers[c]),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(Row {
            line,
            ts,
            target: num(target_col)?,
            exo: exo_cols.iter().map(|&c| num(c)).collect::<Result<_>>()?,
            fc: fc_col.map(num).transpose()?.unwrap_or(f64::NAN),
            flags,
        });
    }

    // stable sort keeps the original order of duplicates, so the second copy
    // is the one reported
    rows.sort_by_key(|r| r.ts);

    let mut out = RawSeries {
        timestamps: Vec::with_capacity(rows.len()),
        target: Vec::with_capacity(rows.len()),
        exogenous: roles
            .exogenous
            .iter()
            .map(|n| NamedSeries {
                name: n.clone(),
                values: Vec::with_capacity(rows.len()),
            })
            .collect(),
        forecast: roles.forecast.as_ref().map(|n| NamedSeries {
            name: n.clone(),
            values: Vec::with_capacity(rows.len()),
        }),
        flags: roles
            .flags
            .iter()
            .map(|n| NamedFlags {
                name: n.clone(),
                values: Vec::with_capacity(rows.len()),
            })
            .collect(),
    };

    let hour = chrono::Duration::hours(1);
    for (idx, row) in rows.iter().enumerate() {
        if idx > 0 {
            let prev = rows[idx - 1].ts;
            let step = row.ts - prev;
            if step.is_zero() {
                return Err(IngestError::Format {
                    row: row.line,
                    message: format!("duplicated timestamp {}", row.ts),
                });
            }
            if step.num_seconds() % 3600 != 0 {
                return Err(IngestError::Format {
                    row: row.line,
                    message: format!("timestamp {} is not on the hourly grid", row.ts),
                });
            }
            let missing = (step.num_hours() - 1) as usize;
            if missing > roles.max_gap {
                return Err(IngestError::Format {
                    row: row.line,
                    message: format!(
                        "gap of {missing} missing hours after {prev} exceeds tolerance {}",
                        roles.max_gap
                    ),
                });
            }
            for k in 1..=missing {
                out.timestamps.push(prev + hour * k as i32);
                out.target.push(f64::NAN);
                out.exogenous
                    .iter_mut()
                    .for_each(|s| s.values.push(f64::NAN));
                if let Some(f) = out.forecast.as_mut() {
                    f.values.push(f64::NAN);
                }
                out.flags.iter_mut().for_each(|s| s.values.push(None));
            }
        }
        out.timestamps.push(row.ts);
        out.target.push(row.target);
        for (s, v) in out.exogenous.iter_mut().zip(&row.exo) {
            s.values.push(*v);
        }
        if let Some(f) = out.forecast.as_mut() {
            f.values.push(row.fc);
        }
        for (s, v) in out.flags.iter_mut().zip(&row.flags) {
            s.values.push(*v);
        }
    }
    Ok(out)
}

/// Write `series` as CSV using the timestamp and target names of `roles`.
/// Missing values become empty cells and flags are written as 0/1.
pub fn write_csv<W: Write>(series: &RawSeries, roles: &ColumnRoles, writer: W) -> Result<()> {
    let fmt_err = |e: csv::Error| IngestError::Format {
        row: 0,
        message: e.to_string(),
    };
    let mut w = csv::WriterBuilder::new()
        .delimiter(roles.delimiter as u8)
        .from_writer(writer);
    let mut header = vec![roles.timestamp.clone(), roles.target.clone()];
    header.extend(series.exogenous.iter().map(|s| s.name.clone()));
    header.extend(series.forecast.iter().map(|s| s.name.clone()));
    header.extend(series.flags.iter().map(|s| s.name.clone()));
    w.write_record(&header).map_err(fmt_err)?;
    let num = |v: f64| {
        if v.is_nan() {
            String::new()
        } else {
            v.to_string()
        }
    };
    for i in 0..series.len() {
        let mut row = vec![
            series.timestamps[i].format("%Y-%m-%d %H:%M:%S").to_string(),
            num(series.target[i]),
        ];
        row.extend(series.exogenous.iter().map(|s| num(s.values[i])));
        row.extend(series.forecast.iter().map(|s| num(s.values[i])));
        row.extend(series.flags.iter().map(|s| match s.values[i] {
            Some(true) => "1".to_string(),
            Some(false) => "0".to_string(),
            None => String::new(),
        }));
        w.write_record(&row).map_err(fmt_err)?;
    }
    w.flush().map_err(|source| IngestError::Io {
        path: "<writer>".into(),
        source,
    })
}

/// Fill missing numeric values by linear interpolation (nearest observed value
/// at the series edges) and carry flags forward. Runs longer than `max_gap`
/// are an error.
pub fn impute_gaps(series: &RawSeries, max_gap: usize) -> Result<RawSeries> {
    let mut out = series.clone();
    let timestamps = series.timestamps.clone();
    for (name, values) in out.numeric_columns_mut() {
        interpolate(values, max_gap).map_err(|(start, len)| IngestError::UnrecoverableGap {
            column: name.to_string(),
            start: timestamps.get(start).copied().unwrap_or_default(),
            len,
        })?;
    }
    for flags in &mut out.flags {
        let mut last = false;
        for v in &mut flags.values {
            match v {
                Some(b) => last = *b,
                None => *v = Some(last),
            }
        }
    }
    Ok(out)
}

/// Returns `(start, len)` of the first run that cannot be filled.
fn interpolate(values: &mut [f64], max_gap: usize) -> std::result::Result<(), (usize, usize)> {
    let n = values.len();
    let mut i = 0;
    while i < n {
        if !values[i].is_nan() {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && values[i].is_nan() {
            i += 1;
        }
        let len = i - start;
        if len > max_gap || len == n {
            return Err((start, len));
        }
        match (start.checked_sub(1), (i < n).then_some(i)) {
            (Some(a), Some(b)) => {
                let (ya, yb) = (values[a], values[b]);
                let span = (b - a) as f64;
                for (k, v) in values[start..i].iter_mut().enumerate() {
                    let frac = (k + 1) as f64 / span;
                    *v = ya + (yb - ya) * frac;
                }
            }
            (Some(a), None) => {
                let ya = values[a];
                values[start..i].iter_mut().for_each(|v| *v = ya);
            }
            (None, Some(b)) => {
                let yb = values[b];
                values[start..i].iter_mut().for_each(|v| *v = yb);
            }
            (None, None) => unreachable!(),
        }
    }
    Ok(())
}

/// Calendar features appended after the lag and forecast blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalendarEncoding {
    /// Monday = 0 .. Sunday = 6.
    pub day_of_week: bool,
    /// January = 1 .. December = 12.
    pub month: bool,
    /// Flag columns encoded as 0/1 at the origin hour. `None` selects every
    /// flag present in the series.
    pub flags: Option<Vec<String>>,
}

impl Default for CalendarEncoding {
    fn default() -> Self {
        Self {
            day_of_week: true,
            month: true,
            flags: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Hours of history per lagged series.
    pub lags: usize,
    /// Hours of exogenous forecast after the origin.
    pub forecast_steps: usize,
    /// Forecast horizon in hours; also the target length.
    pub horizon: usize,
    pub origin_hour: u32,
    /// Exogenous series lagged alongside the target. `None` selects all.
    pub exogenous: Option<Vec<String>>,
    /// Exogenous series repeated as a persistence forecast when the series
    /// carries no forecast column.
    pub forecast_source: Option<String>,
    pub calendar: CalendarEncoding,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            lags: 72,
            forecast_steps: 24,
            horizon: 24,
            origin_hour: 0,
            exogenous: None,
            forecast_source: None,
            calendar: CalendarEncoding::default(),
        }
    }
}

/// One forecast origin: features known at the origin and the next `horizon`
/// target values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub origin: NaiveDateTime,
    pub features: Vec<f64>,
    pub target: Vec<f64>,
}

enum ForecastBlock<'a> {
    None,
    Column(&'a [f64]),
    Persistence(&'a [f64]),
}

/// Feature layout produced by [`build_instances`] for a given series.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureLayout {
    pub lagged: Vec<String>,
    pub forecast_steps: usize,
    pub calendar: Vec<String>,
    pub lags: usize,
}

impl FeatureLayout {
    pub fn width(&self) -> usize {
        self.lagged.len() * self.lags + self.forecast_steps + self.calendar.len()
    }

    /// Human-readable column names in positional order.
    pub fn names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.width());
        for s in &self.lagged {
            names.extend((1..=self.lags).rev().map(|k| format!("{s}[t-{k}]")));
        }
        names.extend((0..self.forecast_steps).map(|k| format!("forecast[t+{k}]")));
        names.extend(self.calendar.iter().cloned());
        names
    }
}

pub fn feature_layout(series: &RawSeries, cfg: &FeatureConfig) -> Result<FeatureLayout> {
    let exo = selected_exogenous(series, cfg)?;
    let mut lagged = vec!["target".to_string()];
    lagged.extend(exo.iter().map(|s| s.name.clone()));
    let mut calendar = Vec::new();
    if cfg.calendar.day_of_week {
        calendar.push("day_of_week".to_string());
    }
    if cfg.calendar.month {
        calendar.push("month".to_string());
    }
    calendar.extend(selected_flags(series, cfg)?.iter().map(|f| f.name.clone()));
    Ok(FeatureLayout {
        lagged,
        forecast_steps: cfg.forecast_steps,
        calendar,
        lags: cfg.lags,
    })
}

fn selected_exogenous<'a>(
    series: &'a RawSeries,
    cfg: &FeatureConfig,
) -> Result<Vec<&'a NamedSeries>> {
    match &cfg.exogenous {
        None => Ok(series.exogenous.iter().collect()),
        Some(names) => names
            .iter()
            .map(|n| {
                series
                    .exogenous(n)
                    .ok_or_else(|| IngestError::Config(format!("unknown exogenous series `{n}`")))
            })
            .collect(),
    }
}

fn selected_flags<'a>(series: &'a RawSeries, cfg: &FeatureConfig) -> Result<Vec<&'a NamedFlags>> {
    match &cfg.calendar.flags {
        None => Ok(series.flags.iter().collect()),
        Some(names) => names
            .iter()
            .map(|n| {
                series
                    .flag(n)
                    .ok_or_else(|| IngestError::Config(format!("unknown flag column `{n}`")))
            })
            .collect(),
    }
}

/// Materialize one instance per origin that has `lags` hours of history and
/// `horizon` hours of future.
pub fn build_instances(series: &RawSeries, cfg: &FeatureConfig) -> Result<Vec<Instance>> {
    if cfg.lags == 0 || cfg.horizon == 0 {
        return Err(IngestError::Config(
            "lags and horizon must be positive".into(),
        ));
    }
    if cfg.origin_hour > 23 {
        return Err(IngestError::Config("origin_hour must be in 0..=23".into()));
    }
    let n = series.len();
    if n < cfg.lags + cfg.horizon {
        return Err(IngestError::InsufficientData(format!(
            "series has {n} hours, need at least lags + horizon = {}",
            cfg.lags + cfg.horizon
        )));
    }
    if series.target.iter().any(|v| v.is_nan()) {
        return Err(IngestError::InsufficientData(
            "target contains missing values; run imputation first".into(),
        ));
    }

    let exo = selected_exogenous(series, cfg)?;
    let flags = selected_flags(series, cfg)?;
    let block = if cfg.forecast_steps == 0 {
        ForecastBlock::None
    } else if let Some(fc) = &series.forecast {
        ForecastBlock::Column(&fc.values)
    } else {
        let source = cfg.forecast_source.as_deref().ok_or_else(|| {
            IngestError::Config(
                "forecast_steps > 0 needs a forecast column or a forecast_source series".into(),
            )
        })?;
        let s = series.exogenous(source).ok_or_else(|| {
            IngestError::Config(format!("unknown forecast_source series `{source}`"))
        })?;
        ForecastBlock::Persistence(&s.values)
    };
    let future_needed = match block {
        ForecastBlock::Column(_) => cfg.horizon.max(cfg.forecast_steps),
        _ => cfg.horizon,
    };

    let width = (1 + exo.len()) * cfg.lags
        + cfg.forecast_steps
        + usize::from(cfg.calendar.day_of_week)
        + usize::from(cfg.calendar.month)
        + flags.len();

    let mut out = Vec::new();
    for t in cfg.lags..=n - cfg.horizon {
        let origin = series.timestamps[t];
        if origin.hour() != cfg.origin_hour || origin.minute() != 0 || t + future_needed > n {
            continue;
        }
        let mut features = Vec::with_capacity(width);
        features.extend_from_slice(&series.target[t - cfg.lags..t]);
        for s in &exo {
            features.extend_from_slice(&s.values[t - cfg.lags..t]);
        }
        match block {
            ForecastBlock::None => {}
            ForecastBlock::Column(v) => features.extend_from_slice(&v[t..t + cfg.forecast_steps]),
            ForecastBlock::Persistence(v) => {
                features.extend(std::iter::repeat_n(v[t - 1], cfg.forecast_steps))
            }
        }
        if cfg.calendar.day_of_week {
            features.push(origin.weekday().num_days_from_monday() as f64);
        }
        if cfg.calendar.month {
            features.push(origin.month() as f64);
        }
        for f in &flags {
            features.push(if f.values[t].unwrap_or(false) {
                1.0
            } else {
                0.0
            });
        }
        debug_assert_eq!(features.len(), width);
        out.push(Instance {
            origin,
            features,
            target: series.target[t..t + cfg.horizon].to_vec(),
        });
    }
    Ok(out)
}
