//! Model collections (one tree per horizon step) and the schemas that choose
//! which collection forecasts and trains at each origin.
//!
//! Inside a boundary window of a change point the mixed schemas run both
//! adjacent collections: the weighted-average variant blends their forecasts
//! with weights `w_j = 1 - E_j / (E_1 + E_2)`, the switching variant emits the
//! forecast of the collection with the lower previous-step error `E`.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDateTime};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::changepoint::{segment_of, ChangePointSet};
use crate::hoeffding::{HoeffdingTreeRegressor, TreeError, TreeParams};

#[derive(Debug, Error, PartialEq)]
pub enum SchemaError {
    #[error("feature arity mismatch: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("target length {got} does not match horizon {expected}")]
    Horizon { expected: usize, got: usize },
    #[error("schema {0} needs a change point set")]
    MissingChangePoints(SchemaKind),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

pub type Result<T> = std::result::Result<T, SchemaError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemaKind {
    /// Single model collection for the whole stream.
    #[serde(rename = "SMCA")]
    Smca,
    /// One collection per calendar quarter.
    #[serde(rename = "QDMDC")]
    Qdmdc,
    /// One collection per change-point segment.
    #[serde(rename = "PCPDMC")]
    Pcpdmc,
    /// Segments plus weighted-average ensembling inside boundary windows.
    #[serde(rename = "MCPDMC-WA")]
    McpdmcWa,
    /// Segments plus error-driven switching inside boundary windows.
    #[serde(rename = "MCPDMC-SW")]
    McpdmcSw,
}

impl SchemaKind {
    pub const ALL: [SchemaKind; 5] = [
        SchemaKind::Smca,
        SchemaKind::Qdmdc,
        SchemaKind::Pcpdmc,
        SchemaKind::McpdmcWa,
        SchemaKind::McpdmcSw,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SchemaKind::Smca => "SMCA",
            SchemaKind::Qdmdc => "QDMDC",
            SchemaKind::Pcpdmc => "PCPDMC",
            SchemaKind::McpdmcWa => "MCPDMC-WA",
            SchemaKind::McpdmcSw => "MCPDMC-SW",
        }
    }

    pub fn uses_change_points(self) -> bool {
        matches!(
            self,
            SchemaKind::Pcpdmc | SchemaKind::McpdmcWa | SchemaKind::McpdmcSw
        )
    }

    pub fn is_mixed(self) -> bool {
        matches!(self, SchemaKind::McpdmcWa | SchemaKind::McpdmcSw)
    }
}

impl fmt::Display for SchemaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SchemaKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let norm = s.trim().to_ascii_uppercase().replace('_', "-");
        SchemaKind::ALL
            .into_iter()
            .find(|k| k.label() == norm)
            .ok_or_else(|| format!("unknown schema `{s}` (expected one of SMCA, QDMDC, PCPDMC, MCPDMC-WA, MCPDMC-SW)"))
    }
}

/// Error measure `E` fed back into the mixed schemas.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackMetric {
    #[default]
    Mae,
    Mse,
}

impl FeedbackMetric {
    pub fn eval(self, predicted: &[f64], actual: &[f64]) -> f64 {
        let n = predicted.len().max(1) as f64;
        let pairs = predicted.iter().zip(actual);
        match self {
            FeedbackMetric::Mae => pairs.map(|(p, a)| (a - p).abs()).sum::<f64>() / n,
            FeedbackMetric::Mse => pairs.map(|(p, a)| (a - p).powi(2)).sum::<f64>() / n,
        }
    }
}

/// Ordered set of `m` trees; tree `i` forecasts horizon step `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCollection {
    pub id: String,
    models: Vec<HoeffdingTreeRegressor>,
}

impl ModelCollection {
    pub fn new(id: impl Into<String>, horizon: usize, params: TreeParams) -> Self {
        Self {
            id: id.into(),
            models: (0..horizon)
                .map(|_| HoeffdingTreeRegressor::new(params))
                .collect(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.models.len()
    }

    pub fn models(&self) -> &[HoeffdingTreeRegressor] {
        &self.models
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        self.models.iter().map(|t| t.predict_one(x)).collect()
    }

    /// Tree `i` learns `(x, y[i])`. The trees share no state and train in
    /// parallel.
    pub fn learn(&mut self, x: &[f64], y: &[f64]) -> Result<()> {
        if y.len() != self.models.len() {
            return Err(SchemaError::Horizon {
                expected: self.models.len(),
                got: y.len(),
            });
        }
        self.models
            .par_iter_mut()
            .zip(y.par_iter())
            .try_for_each(|(t, &yi)| t.learn_one(x, yi))?;
        Ok(())
    }

    /// Instances learned, equal across the trees of a collection.
    pub fn trained(&self) -> u64 {
        self.models.first().map_or(0, |t| t.seen())
    }
}

/// Which collections are in play at an origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Active {
    Single(usize),
    /// Inside the window of change point `change_point`; `c1` precedes it and
    /// `c2` follows it.
    Boundary {
        change_point: usize,
        c1: usize,
        c2: usize,
    },
}

impl Active {
    pub fn collections(&self) -> Vec<usize> {
        match *self {
            Active::Single(c) => vec![c],
            Active::Boundary { c1, c2, .. } => vec![c1, c2],
        }
    }
}

/// How a forecast vector was assembled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ForecastTrace {
    Single {
        collection: usize,
    },
    Weighted {
        c1: usize,
        c2: usize,
        w1: f64,
        w2: f64,
    },
    Switched {
        c1: usize,
        c2: usize,
        chosen: usize,
    },
}

impl ForecastTrace {
    pub fn collections(&self) -> Vec<usize> {
        match *self {
            ForecastTrace::Single { collection } => vec![collection],
            ForecastTrace::Weighted { c1, c2, .. } | ForecastTrace::Switched { c1, c2, .. } => {
                vec![c1, c2]
            }
        }
    }

    /// Contribution of each collection in [`Self::collections`] order.
    pub fn weights(&self) -> Vec<f64> {
        match *self {
            ForecastTrace::Single { .. } => vec![1.0],
            ForecastTrace::Weighted { w1, w2, .. } => vec![w1, w2],
            ForecastTrace::Switched { c1, chosen, .. } => {
                if chosen == c1 {
                    vec![1.0, 0.0]
                } else {
                    vec![0.0, 1.0]
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub values: Vec<f64>,
    pub trace: ForecastTrace,
}

/// Weights of the two boundary collections from their previous-step errors.
/// Both-zero errors give equal weights.
pub fn wavg_weights(e1: f64, e2: f64) -> (f64, f64) {
    let total = e1 + e2;
    if !(total > 0.0) {
        return (0.5, 0.5);
    }
    (1.0 - e1 / total, 1.0 - e2 / total)
}

/// Calendar quarter of a date, 0-based.
pub fn quarter(origin: NaiveDateTime) -> usize {
    (origin.month0() / 3) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemaSettings {
    pub kind: SchemaKind,
    /// Half-width of a boundary window in days.
    pub boundary_days: u32,
    pub feedback: FeedbackMetric,
}

impl Default for SchemaSettings {
    fn default() -> Self {
        Self {
            kind: SchemaKind::Smca,
            boundary_days: 7,
            feedback: FeedbackMetric::Mae,
        }
    }
}

/// Routing state of one schema run.
#[derive(Debug, Clone)]
pub struct SchemaState {
    settings: SchemaSettings,
    collections: Vec<ModelCollection>,
    cps: ChangePointSet,
    arity: Option<usize>,
    /// Window the previous training step was in.
    window: Option<usize>,
    prev_error: Option<[f64; 2]>,
}

impl SchemaState {
    pub fn new(
        settings: SchemaSettings,
        horizon: usize,
        params: TreeParams,
        cps: Option<ChangePointSet>,
    ) -> Result<Self> {
        let kind = settings.kind;
        let cps = match (kind.uses_change_points(), cps) {
            (true, Some(c)) => c,
            (true, None) => return Err(SchemaError::MissingChangePoints(kind)),
            (false, _) => ChangePointSet::empty(),
        };
        let count = match kind {
            SchemaKind::Smca => 1,
            SchemaKind::Qdmdc => 4,
            _ => cps.k(),
        };
        let collections = (0..count)
            .map(|i| ModelCollection::new(format!("{}-{i}", kind.label()), horizon, params))
            .collect();
        Ok(Self {
            settings,
            collections,
            cps,
            arity: None,
            window: None,
            prev_error: None,
        })
    }

    pub fn kind(&self) -> SchemaKind {
        self.settings.kind
    }

    pub fn settings(&self) -> &SchemaSettings {
        &self.settings
    }

    pub fn collections(&self) -> &[ModelCollection] {
        &self.collections
    }

    pub fn change_points(&self) -> &ChangePointSet {
        &self.cps
    }

    pub fn horizon(&self) -> usize {
        self.collections[0].horizon()
    }

    /// Change point whose window the last training step fell in.
    pub fn window(&self) -> Option<usize> {
        self.window
    }

    /// Previous-step errors `(E_C1, E_C2)` of the current boundary window.
    pub fn prev_error(&self) -> Option<[f64; 2]> {
        self.prev_error
    }

    /// Nearest change point whose window contains `day`, ties to the earlier
    /// one. Distances wrap around the 365-day year.
    fn window_of(&self, day: u32) -> Option<usize> {
        let d = day.min(365) as i64;
        let b = self.settings.boundary_days as i64;
        let mut best: Option<(usize, i64)> = None;
        for (j, &p) in self.cps.positions().iter().enumerate() {
            let raw = (d - p as i64).abs();
            let dist = raw.min(365 - raw);
            if dist <= b && best.is_none_or(|(_, bd)| dist < bd) {
                best = Some((j, dist));
            }
        }
        best.map(|(j, _)| j)
    }

    pub fn active_collections(&self, origin: NaiveDateTime) -> Active {
        match self.settings.kind {
            SchemaKind::Smca => Active::Single(0),
            SchemaKind::Qdmdc => Active::Single(quarter(origin)),
            SchemaKind::Pcpdmc => Active::Single(segment_of(origin.ordinal(), &self.cps)),
            SchemaKind::McpdmcWa | SchemaKind::McpdmcSw => match self.window_of(origin.ordinal()) {
                Some(j) => Active::Boundary {
                    change_point: j,
                    c1: j,
                    c2: j + 1,
                },
                None => Active::Single(segment_of(origin.ordinal(), &self.cps)),
            },
        }
    }

    fn check_arity(&self, x: &[f64]) -> Result<()> {
        match self.arity {
            Some(a) if a != x.len() => Err(SchemaError::Arity {
                expected: a,
                got: x.len(),
            }),
            _ => Ok(()),
        }
    }

    pub fn forecast(&self, x: &[f64], origin: NaiveDateTime) -> Result<Forecast> {
        self.check_arity(x)?;
        let out = match self.active_collections(origin) {
            Active::Single(c) => Forecast {
                values: self.collections[c].predict(x),
                trace: ForecastTrace::Single { collection: c },
            },
            Active::Boundary {
                change_point,
                c1,
                c2,
            } => {
                let f1 = self.collections[c1].predict(x);
                let f2 = self.collections[c2].predict(x);
                let prev = if self.window == Some(change_point) {
                    self.prev_error
                } else {
                    None
                };
                if self.settings.kind == SchemaKind::McpdmcWa {
                    let (w1, w2) = prev.map_or((0.5, 0.5), |[e1, e2]| wavg_weights(e1, e2));
                    let values = f1
                        .iter()
                        .zip(&f2)
                        .map(|(a, b)| (w1 * a + w2 * b) / (w1 + w2))
                        .collect();
                    Forecast {
                        values,
                        trace: ForecastTrace::Weighted { c1, c2, w1, w2 },
                    }
                } else {
                    let pick_c1 = match prev {
                        None => true,
                        Some([e1, e2]) if e1 == 0.0 && e2 == 0.0 => true,
                        Some([e1, e2]) => e1 < e2,
                    };
                    let (chosen, values) = if pick_c1 { (c1, f1) } else { (c2, f2) };
                    Forecast {
                        values,
                        trace: ForecastTrace::Switched { c1, c2, chosen },
                    }
                }
            }
        };
        Ok(out)
    }

    /// Train every active collection on `(x, y)`; in boundary windows also
    /// record each collection's error on this origin for the next step.
    pub fn train(&mut self, x: &[f64], y: &[f64], origin: NaiveDateTime) -> Result<()> {
        self.check_arity(x)?;
        if y.len() != self.horizon() {
            return Err(SchemaError::Horizon {
                expected: self.horizon(),
                got: y.len(),
            });
        }
        match self.active_collections(origin) {
            Active::Single(c) => {
                self.collections[c].learn(x, y)?;
                self.window = None;
                self.prev_error = None;
            }
            Active::Boundary {
                change_point,
                c1,
                c2,
            } => {
                let metric = self.settings.feedback;
                let e1 = metric.eval(&self.collections[c1].predict(x), y);
                let e2 = metric.eval(&self.collections[c2].predict(x), y);
                self.collections[c1].learn(x, y)?;
                self.collections[c2].learn(x, y)?;
                self.window = Some(change_point);
                self.prev_error = Some([e1, e2]);
            }
        }
        self.arity = Some(x.len());
        Ok(())
    }
}
