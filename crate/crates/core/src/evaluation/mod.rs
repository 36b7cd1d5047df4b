//! Interleaved test-then-train evaluation: every instance is forecast first
//! and only then used for training.

mod aggregate;
mod dm;
mod metrics;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::collections::{ForecastTrace, SchemaError, SchemaState};
use crate::ingest::Instance;

pub use aggregate::{
    aggregate, error_report, median, BucketRow, ErrorReport, Granularity, Summary,
};
pub use dm::{diebold_mariano, diebold_mariano_with, origin_losses, DmLoss, DmResult};
pub use metrics::{mae, mse, pairs, sape, smape};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("no included records")]
    Empty,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("degenerate test: {0}")]
    DegenerateTest(String),
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

pub type Result<T> = std::result::Result<T, EvalError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    pub origin: NaiveDateTime,
    pub predicted: Vec<f64>,
    pub actual: Vec<f64>,
    pub schema: String,
    pub trace: ForecastTrace,
    /// False for origins before the evaluation start; such records are kept
    /// but skipped by every metric.
    pub included: bool,
}

/// Step of the stream protocol, reported to observers in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamEvent {
    Forecast(NaiveDateTime),
    Train(NaiveDateTime),
}

/// Run the stream through `state`, forecasting each instance before training
/// on it.
pub fn run_stream(
    instances: &[Instance],
    state: &mut SchemaState,
    eval_start: Option<NaiveDateTime>,
) -> Result<Vec<ForecastRecord>> {
    run_stream_observed(instances, state, eval_start, |_| {})
}

pub fn run_stream_observed(
    instances: &[Instance],
    state: &mut SchemaState,
    eval_start: Option<NaiveDateTime>,
    mut observe: impl FnMut(StreamEvent),
) -> Result<Vec<ForecastRecord>> {
    if let Some(w) = instances.windows(2).find(|w| w[1].origin <= w[0].origin) {
        return Err(EvalError::Protocol(format!(
            "instances out of order: {} follows {}",
            w[1].origin, w[0].origin
        )));
    }
    let label = state.kind().label().to_string();
    let mut records = Vec::with_capacity(instances.len());
    for inst in instances {
        let fc = state.forecast(&inst.features, inst.origin)?;
        observe(StreamEvent::Forecast(inst.origin));
        records.push(ForecastRecord {
            origin: inst.origin,
            predicted: fc.values,
            actual: inst.target.clone(),
            schema: label.clone(),
            trace: fc.trace,
            included: eval_start.is_none_or(|s| inst.origin >= s),
        });
        state.train(&inst.features, &inst.target, inst.origin)?;
        observe(StreamEvent::Train(inst.origin));
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collections::SchemaSettings;
    use crate::hoeffding::TreeParams;
    use chrono::{Datelike, Duration, NaiveDate};

    fn start() -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2014, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap()
    }

    fn instances(days: usize) -> Vec<Instance> {
        (0..days)
            .map(|d| {
                let x = ((d * 37) % 19) as f64;
                Instance {
                    origin: start() + Duration::days(d as i64),
                    features: vec![x, (d % 7) as f64],
                    target: vec![2.0 * x + 1.0, x - 3.0],
                }
            })
            .collect()
    }

    fn smca() -> SchemaState {
        SchemaState::new(SchemaSettings::default(), 2, TreeParams::default(), None).unwrap()
    }

    #[test]
    fn forecast_precedes_training() {
        let inst = instances(10);
        let mut events = Vec::new();
        let records = run_stream_observed(&inst, &mut smca(), None, |e| events.push(e)).unwrap();
        assert_eq!(records.len(), 10);
        let expected: Vec<StreamEvent> = inst
            .iter()
            .flat_map(|i| {
                [
                    StreamEvent::Forecast(i.origin),
                    StreamEvent::Train(i.origin),
                ]
            })
            .collect();
        assert_eq!(events, expected);
        // the first forecast comes from an untrained model
        assert_eq!(records[0].predicted, vec![0.0, 0.0]);
    }

    #[test]
    fn eval_start_excludes_warmup() {
        let inst = instances(10);
        let records = run_stream(&inst, &mut smca(), Some(inst[3].origin)).unwrap();
        let flags: Vec<bool> = records.iter().map(|r| r.included).collect();
        assert_eq!(flags, [vec![false; 3], vec![true; 7]].concat());
    }

    #[test]
    fn out_of_order_origins_are_rejected() {
        let mut inst = instances(5);
        inst.swap(1, 2);
        assert!(matches!(
            run_stream(&inst, &mut smca(), None),
            Err(EvalError::Protocol(_))
        ));
    }

    #[test]
    fn truncation_does_not_change_earlier_records() {
        let inst = instances(60);
        let full = run_stream(&inst, &mut smca(), None).unwrap();
        for cut in [5, 23, 47] {
            let part = run_stream(&inst[..=cut], &mut smca(), None).unwrap();
            assert_eq!(
                serde_json::to_string(&part).unwrap(),
                serde_json::to_string(&full[..=cut]).unwrap()
            );
        }
    }

    #[test]
    fn constant_stream_yearly_error_does_not_grow() {
        let inst: Vec<Instance> = (0..3 * 365)
            .map(|d| Instance {
                origin: start() + Duration::days(d),
                features: vec![(d % 11) as f64],
                target: vec![5.0; 2],
            })
            .collect();
        let records = run_stream(&inst, &mut smca(), None).unwrap();
        let yearly = aggregate(&records, Granularity::Year).unwrap();
        assert_eq!(yearly.len(), 3);
        assert!(yearly.windows(2).all(|w| w[1].mae <= w[0].mae));
    }

    #[test]
    fn dm_is_antisymmetric() {
        let a: Vec<f64> = (0..40).map(|i| ((i * 13) % 7) as f64).collect();
        let b: Vec<f64> = (0..40).map(|i| ((i * 5) % 9) as f64 * 0.8).collect();
        let ab = diebold_mariano(&a, &b, 3).unwrap();
        let ba = diebold_mariano(&b, &a, 3).unwrap();
        assert_eq!(ab.statistic, -ba.statistic);
        assert_eq!(ab.p_value, ba.p_value);
    }

    fn records_over_year(noisy_month: u32) -> Vec<ForecastRecord> {
        (0..365)
            .map(|d| {
                let origin = start() + Duration::days(d);
                let actual: Vec<f64> = (0..4).map(|i| 100.0 + i as f64).collect();
                let spread = if origin.month() == noisy_month {
                    30.0
                } else {
                    2.0
                };
                let predicted = actual
                    .iter()
                    .enumerate()
                    .map(|(i, a)| a + spread * (1.0 + ((d as usize + i) % 3) as f64) / 3.0)
                    .collect();
                ForecastRecord {
                    origin,
                    predicted,
                    actual,
                    schema: "SMCA".into(),
                    trace: ForecastTrace::Single { collection: 0 },
                    included: true,
                }
            })
            .collect()
    }

    #[test]
    fn buckets_pool_to_overall() {
        let mut records = records_over_year(6);
        records.extend(records_over_year(9).into_iter().map(|mut r| {
            r.origin += Duration::days(365);
            r
        }));
        let report = error_report(&records).unwrap();
        let n: usize = report.yearly.iter().map(|r| r.n).sum();
        assert_eq!(n, report.overall.n);
        let pooled = report
            .yearly
            .iter()
            .map(|r| r.mae * r.n as f64)
            .sum::<f64>()
            / n as f64;
        assert!((pooled - report.overall.mae).abs() < 1e-9);
        let pooled = report
            .monthly
            .iter()
            .map(|r| r.smape * r.n as f64)
            .sum::<f64>()
            / n as f64;
        assert!((pooled - report.overall.smape).abs() < 1e-9);
        assert!(report.overall.mse >= report.overall.mae.powi(2));
        for r in report.yearly.iter().chain(&report.monthly) {
            assert!(r.mse >= r.mae.powi(2));
        }
    }

    #[test]
    fn noisy_month_has_largest_median_sape() {
        let records = records_over_year(6);
        let rows = aggregate(&records, Granularity::MonthOfYear(2014)).unwrap();
        assert_eq!(rows.len(), 12);
        let worst = rows
            .iter()
            .max_by(|a, b| a.median_sape.total_cmp(&b.median_sape))
            .unwrap();
        assert_eq!(worst.bucket, "2014-06");
        assert!(rows
            .iter()
            .filter(|r| r.bucket != "2014-06")
            .all(|r| r.median_sape < worst.median_sape));
    }
}
