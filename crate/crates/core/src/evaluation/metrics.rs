//! MAE, MSE and SMAPE over flattened `(actual, predicted)` pairs.

use super::{EvalError, ForecastRecord, Result};

/// Symmetric absolute percentage error of one pair; 0 when both are 0.
pub fn sape(actual: f64, predicted: f64) -> f64 {
    let denom = 0.5 * (actual.abs() + predicted.abs());
    if denom == 0.0 {
        0.0
    } else {
        100.0 * (actual - predicted).abs() / denom
    }
}

/// `(actual, predicted)` pairs of every included record and horizon step.
pub fn pairs(records: &[ForecastRecord]) -> impl Iterator<Item = (f64, f64)> + '_ {
    records
        .iter()
        .filter(|r| r.included)
        .flat_map(|r| r.actual.iter().copied().zip(r.predicted.iter().copied()))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Sums {
    pub n: usize,
    pub abs: f64,
    pub sq: f64,
    pub sape: f64,
}

impl Sums {
    pub fn push(&mut self, actual: f64, predicted: f64) {
        let e = actual - predicted;
        self.n += 1;
        self.abs += e.abs();
        self.sq += e * e;
        self.sape += sape(actual, predicted);
    }

    pub fn from_pairs(it: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut s = Sums::default();
        it.for_each(|(a, p)| s.push(a, p));
        s
    }

    fn checked(self) -> Result<Self> {
        if self.n == 0 {
            Err(EvalError::Empty)
        } else {
            Ok(self)
        }
    }
}

pub fn mae(records: &[ForecastRecord]) -> Result<f64> {
    let s = Sums::from_pairs(pairs(records)).checked()?;
    Ok(s.abs / s.n as f64)
}

pub fn mse(records: &[ForecastRecord]) -> Result<f64> {
    let s = Sums::from_pairs(pairs(records)).checked()?;
    Ok(s.sq / s.n as f64)
}

pub fn smape(records: &[ForecastRecord]) -> Result<f64> {
    let s = Sums::from_pairs(pairs(records)).checked()?;
    Ok(s.sape / s.n as f64)
}
