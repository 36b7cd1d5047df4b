use std::collections::BTreeMap;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use super::metrics::{sape, Sums};
use super::{EvalError, ForecastRecord, Result};

/// Calendar bucketing of records by their origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Granularity {
    Year,
    /// Calendar month pooled across all years.
    Month,
    /// Months of one given year.
    MonthOfYear(i32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub bucket: String,
    pub n: usize,
    pub mae: f64,
    pub mse: f64,
    pub smape: f64,
    pub median_sape: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mae: f64,
    pub mse: f64,
    pub smape: f64,
    pub median_sape: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub overall: Summary,
    pub yearly: Vec<BucketRow>,
    pub monthly: Vec<BucketRow>,
    /// SAPE of every included pair in record order.
    #[serde(skip)]
    pub sape: Vec<f64>,
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

fn summarize(pairs: &[(f64, f64)]) -> Summary {
    let s = Sums::from_pairs(pairs.iter().copied());
    let mut sapes: Vec<f64> = pairs.iter().map(|&(a, p)| sape(a, p)).collect();
    let n = s.n as f64;
    Summary {
        n: s.n,
        mae: s.abs / n,
        mse: s.sq / n,
        smape: s.sape / n,
        median_sape: median(&mut sapes),
    }
}

/// Group included pairs by the calendar bucket of their origin. Empty buckets
/// are omitted.
pub fn aggregate(records: &[ForecastRecord], granularity: Granularity) -> Result<Vec<BucketRow>> {
    let mut buckets: BTreeMap<(i32, u32), Vec<(f64, f64)>> = BTreeMap::new();
    let mut any = false;
    for r in records.iter().filter(|r| r.included) {
        any = true;
        let key = match granularity {
            Granularity::Year => (r.origin.year(), 0),
            Granularity::Month => (0, r.origin.month()),
            Granularity::MonthOfYear(y) if r.origin.year() == y => (y, r.origin.month()),
            Granularity::MonthOfYear(_) => continue,
        };
        buckets
            .entry(key)
            .or_default()
            .extend(r.actual.iter().copied().zip(r.predicted.iter().copied()));
    }
    if !any {
        return Err(EvalError::Empty);
    }
    Ok(buckets
        .into_iter()
        .map(|((y, m), pairs)| {
            let s = summarize(&pairs);
            BucketRow {
                bucket: match granularity {
                    Granularity::Year => format!("{y}"),
                    Granularity::Month => format!("{m:02}"),
                    Granularity::MonthOfYear(_) => format!("{y}-{m:02}"),
                },
                n: s.n,
                mae: s.mae,
                mse: s.mse,
                smape: s.smape,
                median_sape: s.median_sape,
            }
        })
        .collect())
}

pub fn error_report(records: &[ForecastRecord]) -> Result<ErrorReport> {
    let pairs: Vec<(f64, f64)> = super::metrics::pairs(records).collect();
    if pairs.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(ErrorReport {
        overall: summarize(&pairs),
        yearly: aggregate(records, Granularity::Year)?,
        monthly: aggregate(records, Granularity::Month)?,
        sape: pairs.iter().map(|&(a, p)| sape(a, p)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_even() {
        assert_eq!(median(&mut [100.0, 1.0, 9.0]), 9.0);
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
        assert!(median(&mut []).is_nan());
    }
}
