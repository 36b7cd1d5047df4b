//! Exact numeric split statistics: an ordered map from every observed feature
//! value to the target moments of the instances carrying that value.

use std::collections::BTreeMap;

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use super::moments::Moments;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<(f64, Moments)>", into = "Vec<(f64, Moments)>")]
pub struct SplitObserver {
    values: BTreeMap<OrderedFloat<f64>, Moments>,
}

/// Best threshold for one feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub merit: f64,
    pub left: Moments,
    pub right: Moments,
}

impl SplitObserver {
    pub fn update(&mut self, x: f64, y: f64) {
        self.values.entry(OrderedFloat(x)).or_default().push(y);
    }

    pub fn distinct(&self) -> usize {
        self.values.len()
    }

    /// Target moments of the instances with `x <= threshold` and `x > threshold`.
    pub fn partition(&self, threshold: f64) -> (Moments, Moments) {
        let mut left = Moments::default();
        let mut right = Moments::default();
        for (k, m) in &self.values {
            if k.0 <= threshold {
                left = left.merge(m);
            } else {
                right = right.merge(m);
            }
        }
        (left, right)
    }

    /// Highest variance-reduction split, thresholds placed halfway between
    /// consecutive observed values. Ties keep the lowest threshold.
    pub fn best_split(&self, feature: usize) -> Option<SplitCandidate> {
        if self.values.len() < 2 {
            return None;
        }
        let entries: Vec<(f64, Moments)> = self.values.iter().map(|(k, m)| (k.0, *m)).collect();
        let mut suffix = vec![Moments::default(); entries.len() + 1];
        for i in (0..entries.len()).rev() {
            suffix[i] = entries[i].1.merge(&suffix[i + 1]);
        }
        let total = suffix[0];
        let mut left = Moments::default();
        let mut best: Option<SplitCandidate> = None;
        for i in 0..entries.len() - 1 {
            left = left.merge(&entries[i].1);
            let right = suffix[i + 1];
            let merit = variance_reduction(&total, &left, &right);
            if best.is_none_or(|b| merit > b.merit) {
                best = Some(SplitCandidate {
                    feature,
                    threshold: 0.5 * (entries[i].0 + entries[i + 1].0),
                    merit,
                    left,
                    right,
                });
            }
        }
        best
    }
}

/// `Var(all) - n_L/n Var(left) - n_R/n Var(right)`; zero when a side is empty.
pub fn variance_reduction(total: &Moments, left: &Moments, right: &Moments) -> f64 {
    if left.n == 0.0 || right.n == 0.0 || total.n < 2.0 {
        return 0.0;
    }
    total.variance() - left.n / total.n * left.variance() - right.n / total.n * right.variance()
}

impl From<Vec<(f64, Moments)>> for SplitObserver {
    fn from(v: Vec<(f64, Moments)>) -> Self {
        Self {
            values: v.into_iter().map(|(k, m)| (OrderedFloat(k), m)).collect(),
        }
    }
}

impl From<SplitObserver> for Vec<(f64, Moments)> {
    fn from(o: SplitObserver) -> Self {
        o.values.into_iter().map(|(k, m)| (k.0, m)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_split_is_between_groups() {
        let mut o = SplitObserver::default();
        for i in 0..20 {
            let x = i as f64 / 20.0;
            o.update(x, if x < 0.5 { 0.0 } else { 1.0 });
        }
        let best = o.best_split(0).unwrap();
        assert!(best.threshold > 0.45 && best.threshold < 0.5);
        assert!((best.merit - 0.25).abs() < 1e-12);
    }

    #[test]
    fn single_value_has_no_split() {
        let mut o = SplitObserver::default();
        o.update(1.0, 3.0);
        o.update(1.0, 5.0);
        assert!(o.best_split(0).is_none());
    }
}
