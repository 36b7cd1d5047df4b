//! Penalized change-point detection with PELT and annual reuse of the
//! detected positions.
//!
//! [`pelt`] minimizes `sum_i [C(segment_i) + penalty]` with the L2 segment
//! cost, restricted to boundaries on multiples of `subsample` and segments of
//! at least `min_segment` samples. [`detect_reference`] runs it on a reference
//! window and maps the boundaries to day-of-year positions that are then
//! applied to every year of the stream.

use std::fmt;
use std::fs;
use std::path::Path;

use chrono::{Datelike, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::RawSeries;

#[derive(Debug, Error)]
pub enum ChangePointError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("empty segment [{0}, {1})")]
    EmptySegment(usize, usize),
    #[error("invalid change point set: {0}")]
    InvalidSet(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, ChangePointError>;

/// Named penalty tiers for the gas and electricity settings.
/// `PeltConfig::default` uses the gas-low tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyPreset {
    GasLow,
    GasMedium,
    GasHigh,
    ElectricityLow,
    ElectricityMedium,
    ElectricityHigh,
}

impl PenaltyPreset {
    pub fn value(self) -> f64 {
        match self {
            PenaltyPreset::GasLow => 732e9,
            PenaltyPreset::GasMedium => 244e9,
            PenaltyPreset::GasHigh => 122e9,
            // Low < Medium < High in penalty, unlike the gas tiers
            PenaltyPreset::ElectricityLow => 100e6,
            PenaltyPreset::ElectricityMedium => 150e6,
            PenaltyPreset::ElectricityHigh => 250e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeltConfig {
    pub penalty: f64,
    /// Minimum segment length in samples.
    pub min_segment: usize,
    /// Boundaries may only fall on multiples of this stride.
    pub subsample: usize,
}

impl Default for PeltConfig {
    fn default() -> Self {
        Self {
            penalty: PenaltyPreset::GasLow.value(),
            min_segment: 168,
            subsample: 24,
        }
    }
}

impl PeltConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.penalty >= 0.0) {
            return Err(ChangePointError::Config(format!(
                "penalty must be non-negative, got {}",
                self.penalty
            )));
        }
        if self.subsample == 0 || self.min_segment == 0 {
            return Err(ChangePointError::Config(
                "min_segment and subsample must be positive".into(),
            ));
        }
        if self.min_segment < self.subsample {
            return Err(ChangePointError::Config(format!(
                "min_segment ({}) must be >= subsample ({})",
                self.min_segment, self.subsample
            )));
        }
        Ok(())
    }
}

/// Prefix sums of `y` and `y^2` for O(1) L2 segment costs.
#[derive(Debug, Clone)]
pub struct PrefixSums {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl PrefixSums {
    pub fn new(y: &[f64]) -> Self {
        let mut sum = Vec::with_capacity(y.len() + 1);
        let mut sum_sq = Vec::with_capacity(y.len() + 1);
        let (mut s, mut q) = (0.0, 0.0);
        sum.push(0.0);
        sum_sq.push(0.0);
        for &v in y {
            s += v;
            q += v * v;
            sum.push(s);
            sum_sq.push(q);
        }
        Self { sum, sum_sq }
    }

    pub fn len(&self) -> usize {
        self.sum.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    fn cost(&self, a: usize, b: usize) -> f64 {
        let n = (b - a) as f64;
        let s = self.sum[b] - self.sum[a];
        let q = self.sum_sq[b] - self.sum_sq[a];
        (q - s * s / n).max(0.0)
    }
}

/// Sum of squared deviations from the segment mean over `y[a..b]`.
pub fn segment_cost_l2(prefix: &PrefixSums, a: usize, b: usize) -> Result<f64> {
    if a >= b || b > prefix.len() {
        return Err(ChangePointError::EmptySegment(a, b));
    }
    Ok(prefix.cost(a, b))
}

/// Segment boundaries of the optimal penalized segmentation together with its
/// objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    /// Start index of every segment after the first.
    pub changes: Vec<usize>,
    /// Total segment cost plus one penalty per change.
    pub objective: f64,
}

/// Change indices of the optimal penalized L2 segmentation.
pub fn pelt(y: &[f64], cfg: &PeltConfig) -> Result<Vec<usize>> {
    pelt_segmentation(y, cfg).map(|s| s.changes)
}

pub fn pelt_segmentation(y: &[f64], cfg: &PeltConfig) -> Result<Segmentation> {
    cfg.validate()?;
    let n = y.len();
    if n < 2 * cfg.min_segment {
        return Err(ChangePointError::InsufficientData(format!(
            "series of length {n} is shorter than 2 * min_segment = {}",
            2 * cfg.min_segment
        )));
    }
    let prefix = PrefixSums::new(y);
    let beta = cfg.penalty;
    let scale = prefix.sum_sq[n].abs().max(1.0);
    let tol = 1e-10 * scale;

    // endpoints: multiples of subsample strictly inside (0, n), then n
    let mut ends: Vec<usize> = (1..)
        .map(|k| k * cfg.subsample)
        .take_while(|&t| t < n)
        .collect();
    ends.push(n);

    // best[i] is F(ends[i-1]) with best[0] = F(0) = -beta
    let mut best = vec![f64::INFINITY; ends.len() + 1];
    let mut last = vec![0usize; ends.len() + 1];
    best[0] = -beta;
    let pos = |i: usize| if i == 0 { 0 } else { ends[i - 1] };

    // (endpoint slot, slot index after which it may be discarded)
    let mut candidates: Vec<(usize, usize)> = vec![(0, usize::MAX)];

    for (slot, &t) in ends.iter().enumerate().map(|(i, t)| (i + 1, t)) {
        candidates.retain(|&(_, expire)| t < expire);

        let mut f_t = f64::INFINITY;
        let mut arg = 0;
        for &(c, _) in &candidates {
            let tau = pos(c);
            if t - tau < cfg.min_segment {
                continue;
            }
            let v = best[c] + prefix.cost(tau, t) + beta;
            if v < f_t {
                f_t = v;
                arg = c;
            }
        }
        best[slot] = f_t;
        last[slot] = arg;
        if !f_t.is_finite() {
            continue;
        }

        // A candidate dominated at t stays dominated for every later end that
        // can use t itself, i.e. from t + min_segment on.
        for (c, expire) in candidates.iter_mut() {
            let tau = pos(*c);
            if t - tau >= cfg.min_segment && best[*c] + prefix.cost(tau, t) > f_t + tol {
                *expire = (*expire).min(t + cfg.min_segment);
            }
        }
        candidates.push((slot, usize::MAX));
    }

    let objective = best[ends.len()];
    let mut changes = Vec::new();
    let mut slot = ends.len();
    while slot > 0 {
        let prev = last[slot];
        if prev > 0 {
            changes.push(pos(prev));
        }
        slot = prev;
    }
    changes.reverse();
    Ok(Segmentation { changes, objective })
}

/// Ordered day-of-year positions (1..=365) at which a new segment starts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangePointSet {
    positions: Vec<u16>,
}

impl ChangePointSet {
    pub fn new(mut positions: Vec<u16>) -> Result<Self> {
        positions.sort_unstable();
        positions.dedup();
        if let Some(bad) = positions.iter().find(|p| !(1..=365).contains(*p)) {
            return Err(ChangePointError::InvalidSet(format!(
                "position {bad} outside 1..=365"
            )));
        }
        Ok(Self { positions })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn positions(&self) -> &[u16] {
        &self.positions
    }

    /// Number of segments.
    pub fn k(&self) -> usize {
        self.positions.len() + 1
    }

    /// Segment index of a day of year; day 366 falls into the last segment.
    pub fn segment_of(&self, day_of_year: u32) -> usize {
        segment_of(day_of_year, self)
    }

    /// Write one position per line.
    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_string()).map_err(|source| ChangePointError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ChangePointError::Io {
            path: path.display().to_string(),
            source,
        })?;
        text.parse()
    }
}

impl fmt::Display for ChangePointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.positions {
            writeln!(f, "{p}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for ChangePointSet {
    type Err = ChangePointError;

    fn from_str(s: &str) -> Result<Self> {
        let positions = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.parse::<u16>()
                    .map_err(|_| ChangePointError::InvalidSet(format!("not a day of year: `{l}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut sorted = positions.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted != positions {
            return Err(ChangePointError::InvalidSet(
                "positions must be strictly increasing".into(),
            ));
        }
        Self::new(positions)
    }
}

/// A change point at position `p` means day `p` is the first day of the new
/// segment.
pub fn segment_of(day_of_year: u32, cps: &ChangePointSet) -> usize {
    let day = day_of_year.min(366);
    cps.positions.partition_point(|&p| u32::from(p) <= day)
}

/// Reference window used for detection, `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
}

/// Run PELT on the target inside `window` and convert the boundaries to
/// day-of-year positions. With `daily_mean` the target is first averaged per
/// calendar day and `min_segment`/`subsample` are converted from hours to days.
pub fn detect_reference(
    series: &RawSeries,
    window: DateWindow,
    cfg: &PeltConfig,
    daily_mean: bool,
) -> Result<ChangePointSet> {
    cfg.validate()?;
    let (Some(first), Some(last)) = (series.timestamps.first(), series.timestamps.last()) else {
        return Err(ChangePointError::InsufficientData("empty series".into()));
    };
    if window.start < *first
        || window.end > *last + chrono::Duration::hours(1)
        || window.start >= window.end
    {
        return Err(ChangePointError::Config(format!(
            "reference window {}..{} is not inside the series {}..{}",
            window.start, window.end, first, last
        )));
    }
    let part = series.slice_by_time(window.start, window.end);

    let (values, stamps, run_cfg) = if daily_mean {
        let mut days: Vec<(NaiveDateTime, f64, usize)> = Vec::new();
        for (t, v) in part.timestamps.iter().zip(&part.target) {
            let day = t.date().and_hms_opt(0, 0, 0).expect("midnight");
            match days.last_mut() {
                Some((d, s, c)) if *d == day => {
                    *s += v;
                    *c += 1;
                }
                _ => days.push((day, *v, 1)),
            }
        }
        let to_days = |h: usize| h.div_ceil(24).max(1);
        let run_cfg = PeltConfig {
            penalty: cfg.penalty,
            min_segment: to_days(cfg.min_segment),
            subsample: to_days(cfg.subsample),
        };
        (
            days.iter()
                .map(|(_, s, c)| s / *c as f64)
                .collect::<Vec<_>>(),
            days.iter().map(|(d, _, _)| *d).collect::<Vec<_>>(),
            run_cfg,
        )
    } else {
        (part.target.clone(), part.timestamps.clone(), *cfg)
    };

    let changes = pelt(&values, &run_cfg)?;
    let positions = changes
        .iter()
        .map(|&i| stamps[i].ordinal())
        .filter(|&d| d <= 365)
        .map(|d| d as u16)
        .collect();
    ChangePointSet::new(positions)
}
