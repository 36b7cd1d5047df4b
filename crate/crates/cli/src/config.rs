//! TOML run configuration.
//!
//! Unknown keys are rejected. Relative paths are resolved against the
//! directory of the config file.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate, NaiveDateTime};
use cpdcast::changepoint::{DateWindow, PeltConfig, PenaltyPreset};
use cpdcast::collections::{FeedbackMetric, SchemaKind, SchemaSettings};
use cpdcast::hoeffding::TreeParams;
use cpdcast::ingest::{
    parse_timestamp, CalendarEncoding, ColumnRoles, FeatureConfig, DEFAULT_MAX_GAP,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Stage};

pub const OUTPUT_DIR_ENV: &str = "CPDCAST_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_label")]
    pub label: String,
    /// First origin that counts towards the reported errors. Earlier origins
    /// are still forecast and trained on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_start: Option<String>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Precomputed change points, one day-of-year per line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub change_point_file: Option<PathBuf>,
    pub input: InputConfig,
    #[serde(default)]
    pub features: FeaturesConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorConfig>,
    #[serde(default)]
    pub schema: SchemaConfig,
    #[serde(default)]
    pub tree: TreeConfig,
}

fn default_label() -> String {
    "run".into()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub path: PathBuf,
    pub timestamp: String,
    pub target: String,
    #[serde(default)]
    pub exogenous: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forecast: Option<String>,
    #[serde(default)]
    pub flags: Vec<String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default = "default_max_gap")]
    pub max_gap: usize,
}

fn default_delimiter() -> char {
    ','
}

fn default_max_gap() -> usize {
    DEFAULT_MAX_GAP
}

impl InputConfig {
    pub fn roles(&self) -> ColumnRoles {
        ColumnRoles {
            timestamp: self.timestamp.clone(),
            target: self.target.clone(),
            exogenous: self.exogenous.clone(),
            forecast: self.forecast.clone(),
            flags: self.flags.clone(),
            delimiter: self.delimiter,
            max_gap: self.max_gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeaturesConfig {
    pub lags: usize,
    pub forecast_steps: usize,
    pub horizon: usize,
    pub origin_hour: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exogenous: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forecast_source: Option<String>,
    pub day_of_week: bool,
    pub month: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calendar_flags: Option<Vec<String>>,
}

impl Default for FeaturesConfig {
    fn default() -> Self {
        let f = FeatureConfig::default();
        Self {
            lags: f.lags,
            forecast_steps: f.forecast_steps,
            horizon: f.horizon,
            origin_hour: f.origin_hour,
            exogenous: None,
            forecast_source: None,
            day_of_week: f.calendar.day_of_week,
            month: f.calendar.month,
            calendar_flags: None,
        }
    }
}

impl FeaturesConfig {
    pub fn to_core(&self) -> FeatureConfig {
        FeatureConfig {
            lags: self.lags,
            forecast_steps: self.forecast_steps,
            horizon: self.horizon,
            origin_hour: self.origin_hour,
            exogenous: self.exogenous.clone(),
            forecast_source: self.forecast_source.clone(),
            calendar: CalendarEncoding {
                day_of_week: self.day_of_week,
                month: self.month,
                flags: self.calendar_flags.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PenaltyPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<f64>,
    #[serde(default = "default_min_segment")]
    pub min_segment: usize,
    #[serde(default = "default_subsample")]
    pub subsample: usize,
    /// Reference window, `[start, end)`. Defaults to the first calendar year
    /// of the input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_start: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_end: Option<String>,
    /// Segment daily means instead of hourly values.
    #[serde(default)]
    pub daily_mean: bool,
}

fn default_min_segment() -> usize {
    PeltConfig::default().min_segment
}

fn default_subsample() -> usize {
    PeltConfig::default().subsample
}

impl DetectorConfig {
    pub fn pelt(&self) -> PeltConfig {
        let penalty = match (self.penalty, self.preset) {
            (Some(p), _) => p,
            (None, Some(preset)) => preset.value(),
            (None, None) => PeltConfig::default().penalty,
        };
        PeltConfig {
            penalty,
            min_segment: self.min_segment,
            subsample: self.subsample,
        }
    }

    /// Reference window; `first` is the first timestamp of the series.
    pub fn window(&self, first: NaiveDateTime) -> Result<DateWindow, CliError> {
        let start = match &self.reference_start {
            Some(s) => parse_instant(s, "detector.reference_start")?,
            None => first,
        };
        let end = match &self.reference_end {
            Some(s) => parse_instant(s, "detector.reference_end")?,
            None => start_of_year(start.year() + 1),
        };
        Ok(DateWindow { start, end })
    }
}

fn start_of_year(year: i32) -> NaiveDateTime {
    NaiveDate::from_ymd_opt(year, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid year")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemaConfig {
    pub kind: String,
    pub boundary_days: u32,
    pub feedback: FeedbackMetric,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        let s = SchemaSettings::default();
        Self {
            kind: s.kind.label().into(),
            boundary_days: s.boundary_days,
            feedback: s.feedback,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TreeConfig {
    pub grace_period: u64,
    pub delta: f64,
    pub tau: f64,
    pub decay: f64,
    pub max_depth: usize,
    pub learning_rate: f64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        let t = TreeParams::default();
        Self {
            grace_period: t.grace_period,
            delta: t.delta,
            tau: t.tau,
            decay: t.decay,
            max_depth: t.max_depth,
            learning_rate: t.learning_rate,
        }
    }
}

impl TreeConfig {
    pub fn params(&self) -> TreeParams {
        TreeParams {
            grace_period: self.grace_period,
            delta: self.delta,
            tau: self.tau,
            decay: self.decay,
            max_depth: self.max_depth,
            learning_rate: self.learning_rate,
        }
    }
}

/// Accepts any timestamp the CSV reader accepts, or a bare date.
pub fn parse_instant(raw: &str, key: &str) -> Result<NaiveDateTime, CliError> {
    parse_timestamp(raw)
        .or_else(|| {
            NaiveDate::parse_from_str(raw.trim(), "%Y-%m-%d")
                .ok()
                .and_then(|d| d.and_hms_opt(0, 0, 0))
        })
        .ok_or_else(|| {
            CliError::new(
                Stage::Config,
                format!("{key}: cannot parse timestamp {raw:?}"),
            )
        })
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text)
            .map_err(|e| CliError::new(Stage::Config, e.to_string().trim_end().to_string()))
    }

    /// Read, resolve relative paths against the file's directory, apply the
    /// output-directory override and validate.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::new(
                Stage::Config,
                format!("cannot read {}: {e}", path.display()),
            )
        })?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()) {
            cfg.output_dir = PathBuf::from(dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.input.path);
        fix(&mut self.output_dir);
        if let Some(p) = self.change_point_file.as_mut() {
            fix(p);
        }
    }

    pub fn kind(&self) -> Result<SchemaKind, CliError> {
        self.schema
            .kind
            .parse()
            .map_err(|e: String| CliError::new(Stage::Config, format!("schema.kind: {e}")))
    }

    pub fn settings(&self) -> Result<SchemaSettings, CliError> {
        Ok(SchemaSettings {
            kind: self.kind()?,
            boundary_days: self.schema.boundary_days,
            feedback: self.schema.feedback,
        })
    }

    pub fn eval_start(&self) -> Result<Option<NaiveDateTime>, CliError> {
        self.eval_start
            .as_deref()
            .map(|s| parse_instant(s, "eval_start"))
            .transpose()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let err = |m: String| CliError::new(Stage::Config, m);
        let kind = self.kind()?;
        self.eval_start()?;
        if kind.uses_change_points() {
            match (&self.detector, &self.change_point_file) {
                (None, None) => {
                    return Err(err(format!(
                        "schema {kind} needs change points: add a [detector] section or change_point_file"
                    )))
                }
                (Some(_), Some(_)) => {
                    return Err(err("[detector] and change_point_file are mutually exclusive".into()))
                }
                _ => {}
            }
        } else if self.detector.is_some() || self.change_point_file.is_some() {
            return Err(err(format!(
                "schema {kind} does not use change points; remove [detector] / change_point_file"
            )));
        }
        if let Some(d) = &self.detector {
            if d.preset.is_some() && d.penalty.is_some() {
                return Err(err(
                    "detector: set either preset or penalty, not both".into()
                ));
            }
            d.pelt()
                .validate()
                .map_err(|e| err(format!("detector: {e}")))?;
            if let Some(s) = &d.reference_start {
                parse_instant(s, "detector.reference_start")?;
            }
            if let Some(s) = &d.reference_end {
                parse_instant(s, "detector.reference_end")?;
            }
        }
        if self.schema.boundary_days == 0 && kind.is_mixed() {
            return Err(err("schema.boundary_days must be >= 1".into()));
        }
        self.tree
            .params()
            .validate()
            .map_err(|e| err(format!("tree: {e}")))?;
        if self.features.horizon == 0 || self.features.lags == 0 {
            return Err(err("features.horizon and features.lags must be >= 1".into()));
        }
        if self.features.origin_hour > 23 {
            return Err(err("features.origin_hour must be in 0..=23".into()));
        }
        if self.label.is_empty() || self.label.contains(['/', '\\']) {
            return Err(err(format!(
                "label {:?} must be non-empty and free of path separators",
                self.label
            )));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
