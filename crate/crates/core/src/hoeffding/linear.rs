use serde::{Deserialize, Serialize};

use super::moments::Moments;

/// Incremental linear leaf model on standardized features.
///
/// The intercept is the leaf's running target mean, so the weights only model
/// the deviation from it. Each step is a normalized least-mean-squares update
/// `w += lr * e * z / (1 + lr * |z|^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    weights: Vec<f64>,
    scalers: Vec<Moments>,
    learning_rate: f64,
}

impl LinearModel {
    pub fn new(arity: usize, learning_rate: f64) -> Self {
        Self {
            weights: vec![0.0; arity],
            scalers: vec![Moments::default(); arity],
            learning_rate,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn standardize(&self, x: &[f64], z: &mut Vec<f64>) {
        z.clear();
        z.extend(x.iter().zip(&self.scalers).map(|(&v, s)| {
            let sd = s.variance().sqrt();
            if s.n > 1.0 && sd > 0.0 {
                (v - s.mean) / sd
            } else {
                0.0
            }
        }));
    }

    pub fn predict(&self, x: &[f64], intercept: f64) -> f64 {
        let mut z = Vec::with_capacity(x.len());
        self.standardize(x, &mut z);
        intercept + dot(&self.weights, &z)
    }

    /// One update step. `intercept` is the leaf mean after absorbing `y`.
    pub fn learn(&mut self, x: &[f64], y: f64, intercept: f64) {
        for (s, &v) in self.scalers.iter_mut().zip(x) {
            s.push(v);
        }
        let mut z = Vec::with_capacity(x.len());
        self.standardize(x, &mut z);
        let err = y - intercept - dot(&self.weights, &z);
        let norm = dot(&z, &z);
        let step = self.learning_rate * err / (1.0 + self.learning_rate * norm);
        if !step.is_finite() {
            return;
        }
        for (w, zi) in self.weights.iter_mut().zip(&z) {
            *w += step * zi;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
