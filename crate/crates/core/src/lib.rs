//! Continual-learning multistep forecasting of hourly multivariate series.
//!
//! The pipeline:
//!
//! 1. [`ingest`] loads a CSV, repairs short gaps and builds one
//!    [`ingest::Instance`] per forecast origin.
//! 2. [`changepoint`] segments a reference year with PELT and reuses the
//!    day-of-year boundaries for every later year.
//! 3. [`collections`] holds model collections of [`hoeffding`] trees, one tree
//!    per horizon step, and routes each origin to one or two collections.
//! 4. [`evaluation`] streams the instances test-then-train and scores the
//!    forecasts.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod changepoint;
pub mod collections;
pub mod evaluation;
pub mod hoeffding;
pub mod ingest;
pub mod synthetic;

pub use changepoint::{ChangePointSet, PeltConfig};
pub use collections::{ModelCollection, SchemaKind, SchemaSettings, SchemaState};
pub use evaluation::{run_stream, ForecastRecord};
pub use hoeffding::{HoeffdingTreeRegressor, TreeParams};
pub use ingest::{FeatureConfig, Instance, RawSeries};
