//! Diebold-Mariano test of equal predictive accuracy.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use super::{EvalError, ForecastRecord, Result};

/// Loss applied to each origin's forecast errors before averaging over the
/// horizon.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DmLoss {
    #[default]
    Squared,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Per-origin loss: mean over horizon steps of the chosen loss. Only included
/// records contribute.
pub fn origin_losses(records: &[ForecastRecord], loss: DmLoss) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.included)
        .map(|r| {
            let m = r.actual.len().max(1) as f64;
            r.actual
                .iter()
                .zip(&r.predicted)
                .map(|(a, p)| match loss {
                    DmLoss::Squared => (a - p).powi(2),
                    DmLoss::Absolute => (a - p).abs(),
                })
                .sum::<f64>()
                / m
        })
        .collect()
}

/// DM statistic `mean(d) / sqrt(V / n)` on `d_t = a_t - b_t` with
/// `V = gamma_0 + 2 sum_{j=1}^{h-1} gamma_j`, and its two-sided normal
/// p-value. An identically zero differential yields `(0, 1)`.
pub fn diebold_mariano(loss_a: &[f64], loss_b: &[f64], h: usize) -> Result<DmResult> {
    diebold_mariano_with(loss_a, loss_b, h, false)
}

/// Like [`diebold_mariano`]; with `harvey` the statistic gets the
/// Harvey-Leybourne-Newbold small-sample factor and the p-value comes from a
/// Student t with `n - 1` degrees of freedom.
pub fn diebold_mariano_with(
    loss_a: &[f64],
    loss_b: &[f64],
    h: usize,
    harvey: bool,
) -> Result<DmResult> {
    if loss_a.len() != loss_b.len() {
        return Err(EvalError::Alignment(format!(
            "loss series lengths differ: {} vs {}",
            loss_a.len(),
            loss_b.len()
        )));
    }
    let n = loss_a.len();
    if n < 10 {
        return Err(EvalError::Domain(format!(
            "need at least 10 losses, got {n}"
        )));
    }
    if h == 0 {
        return Err(EvalError::Domain("horizon h must be >= 1".into()));
    }
    let d: Vec<f64> = loss_a.iter().zip(loss_b).map(|(a, b)| a - b).collect();
    if d.iter().all(|v| *v == 0.0) {
        return Ok(DmResult {
            statistic: 0.0,
            p_value: 1.0,
            n,
        });
    }
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let centered: Vec<f64> = d.iter().map(|v| v - mean).collect();
    let autocov = |lag: usize| -> f64 {
        centered[lag..]
            .iter()
            .zip(&centered[..n - lag])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / nf
    };
    let v = autocov(0) + 2.0 * (1..h.min(n)).map(autocov).sum::<f64>();
    if !(v > 0.0) {
        return Err(EvalError::DegenerateTest(format!(
            "long-run variance of the loss differential is {v}"
        )));
    }
    let statistic = mean / (v / nf).sqrt();
    if harvey {
        let hf = h as f64;
        let factor = ((nf + 1.0 - 2.0 * hf + hf * (hf - 1.0) / nf) / nf).sqrt();
        let statistic = statistic * factor;
        let t = StudentsT::new(0.0, 1.0, nf - 1.0).map_err(|e| EvalError::Domain(e.to_string()))?;
        let p_value = (2.0 * t.sf(statistic.abs())).min(1.0);
        return Ok(DmResult {
            statistic,
            p_value,
            n,
        });
    }
    let p_value = (2.0 * Normal::standard().sf(statistic.abs())).min(1.0);
    Ok(DmResult {
        statistic,
        p_value,
        n,
    })
}
