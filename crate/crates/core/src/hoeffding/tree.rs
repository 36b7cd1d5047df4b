use serde::{Deserialize, Serialize};

use super::linear::LinearModel;
use super::moments::Moments;
use super::observer::{variance_reduction, SplitCandidate, SplitObserver};
use super::{hoeffding_epsilon, Result, TreeError, TreeParams};

pub const SNAPSHOT_VERSION: u32 = 1;

/// Statistics and predictors held by one leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafStats {
    pub target: Moments,
    /// One observer per feature; empty once the leaf can no longer split.
    pub observers: Vec<SplitObserver>,
    pub linear: LinearModel,
    pub error_mean: f64,
    pub error_linear: f64,
    /// Mean predicted while the leaf has seen no instance.
    pub inherited_mean: f64,
    pub depth: usize,
}

impl LeafStats {
    fn new(
        arity: usize,
        depth: usize,
        inherited_mean: f64,
        linear: LinearModel,
        active: bool,
    ) -> Self {
        Self {
            target: Moments::default(),
            observers: if active {
                vec![SplitObserver::default(); arity]
            } else {
                Vec::new()
            },
            linear,
            error_mean: 0.0,
            error_linear: 0.0,
            inherited_mean,
            depth,
        }
    }

    pub fn n(&self) -> u64 {
        self.target.n as u64
    }

    pub fn mean(&self) -> f64 {
        if self.target.n > 0.0 {
            self.target.mean
        } else {
            self.inherited_mean
        }
    }

    pub fn predict_mean(&self) -> f64 {
        self.mean()
    }

    pub fn predict_linear(&self, x: &[f64]) -> f64 {
        self.linear.predict(x, self.mean())
    }

    /// Prediction of whichever leaf model has the lower decayed error; the
    /// mean wins ties.
    pub fn predict(&self, x: &[f64]) -> f64 {
        if self.error_linear < self.error_mean {
            self.predict_linear(x)
        } else {
            self.predict_mean()
        }
    }

    /// Variance reduction of splitting `feature` at `threshold`.
    pub fn candidate_merit(&self, feature: usize, threshold: f64) -> f64 {
        if self.target.n < 2.0 {
            return 0.0;
        }
        let Some(obs) = self.observers.get(feature) else {
            return 0.0;
        };
        let (left, right) = obs.partition(threshold);
        variance_reduction(&self.target, &left, &right)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf(Box<LeafStats>),
}

/// Inputs of an accepted split decision, kept for inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub node: usize,
    pub leaf_n: u64,
    pub feature: usize,
    pub threshold: f64,
    pub best_merit: f64,
    pub second_merit: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingTreeRegressor {
    version: u32,
    params: TreeParams,
    arity: Option<usize>,
    seen: u64,
    nodes: Vec<Node>,
    splits: Vec<SplitRecord>,
}

impl HoeffdingTreeRegressor {
    pub fn new(params: TreeParams) -> Self {
        Self {
            version: SNAPSHOT_VERSION,
            params,
            arity: None,
            seen: 0,
            nodes: Vec::new(),
            splits: Vec::new(),
        }
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn arity(&self) -> Option<usize> {
        self.arity
    }

    /// Total instances learned.
    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf(_)))
            .count()
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.len() - self.n_leaves()
    }

    pub fn depth(&self) -> usize {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf(l) => Some(l.depth),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn split_history(&self) -> &[SplitRecord] {
        &self.splits
    }

    /// `(feature, threshold)` of every internal node in creation order.
    pub fn split_nodes(&self) -> Vec<(usize, f64)> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split {
                    feature, threshold, ..
                } => Some((*feature, *threshold)),
                _ => None,
            })
            .collect()
    }

    fn route(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
                Node::Leaf(_) => return idx,
            }
        }
    }

    /// Index of the leaf `x` is routed to, if the tree has been initialized.
    pub fn leaf_index(&self, x: &[f64]) -> Option<usize> {
        (!self.nodes.is_empty()).then(|| self.route(x))
    }

    pub fn leaf_for(&self, x: &[f64]) -> Option<&LeafStats> {
        self.leaf_index(x).map(|i| match &self.nodes[i] {
            Node::Leaf(l) => l.as_ref(),
            Node::Split { .. } => unreachable!("route ends at a leaf"),
        })
    }

    /// Prediction for `x`; 0.0 before the first training instance.
    ///
    /// Panics if `x` does not match the arity fixed by the first `learn_one`.
    pub fn predict_one(&self, x: &[f64]) -> f64 {
        if let Some(arity) = self.arity {
            assert_eq!(x.len(), arity, "feature arity mismatch");
        }
        self.leaf_for(x).map_or(0.0, |l| l.predict(x))
    }

    pub fn learn_one(&mut self, x: &[f64], y: f64) -> Result<()> {
        let arity = *self.arity.get_or_insert(x.len());
        if x.len() != arity {
            return Err(TreeError::Arity {
                expected: arity,
                got: x.len(),
            });
        }
        if self.nodes.is_empty() {
            let linear = LinearModel::new(arity, self.params.learning_rate);
            let active = self.params.max_depth > 0;
            self.nodes.push(Node::Leaf(Box::new(LeafStats::new(
                arity, 0, 0.0, linear, active,
            ))));
        }
        self.seen += 1;
        let idx = self.route(x);
        let decay = self.params.decay;
        let Node::Leaf(leaf) = &mut self.nodes[idx] else {
            unreachable!("route ends at a leaf")
        };

        let mean_pred = leaf.predict_mean();
        let linear_pred = leaf.predict_linear(x);
        leaf.error_mean = (1.0 - decay) * leaf.error_mean + decay * (y - mean_pred).abs();
        leaf.error_linear = (1.0 - decay) * leaf.error_linear + decay * (y - linear_pred).abs();

        leaf.target.push(y);
        for (obs, &v) in leaf.observers.iter_mut().zip(x) {
            obs.update(v, y);
        }
        let mean = leaf.target.mean;
        leaf.linear.learn(x, y, mean);

        let n = leaf.n();
        if !leaf.observers.is_empty() && n % self.params.grace_period == 0 {
            self.attempt_split(idx)?;
        }
        Ok(())
    }

    fn attempt_split(&mut self, idx: usize) -> Result<()> {
        let Node::Leaf(leaf) = &self.nodes[idx] else {
            return Ok(());
        };
        let n = leaf.n();
        if n < 2 {
            return Ok(());
        }
        let mut candidates: Vec<SplitCandidate> = leaf
            .observers
            .iter()
            .enumerate()
            .filter_map(|(f, o)| o.best_split(f))
            .collect();
        // stable: equal merits keep the lower feature index first
        candidates.sort_by(|a, b| b.merit.total_cmp(&a.merit));
        let Some(best) = candidates.first().copied() else {
            return Ok(());
        };
        if !(best.merit > 0.0) {
            return Ok(());
        }
        let second = candidates.get(1).map_or(0.0, |c| c.merit.max(0.0));
        let ratio = second / best.merit;
        let epsilon = hoeffding_epsilon(TreeParams::MERIT_RANGE, self.params.delta, n)?;
        if !(1.0 - ratio > epsilon || epsilon < self.params.tau) {
            return Ok(());
        }

        let depth = leaf.depth + 1;
        let arity = leaf.observers.len();
        let active = depth < self.params.max_depth;
        let parent_mean = leaf.mean();
        let side_mean = |m: &Moments| if m.n > 0.0 { m.mean } else { parent_mean };
        let left = LeafStats::new(
            arity,
            depth,
            side_mean(&best.left),
            leaf.linear.clone(),
            active,
        );
        let right = LeafStats::new(
            arity,
            depth,
            side_mean(&best.right),
            leaf.linear.clone(),
            active,
        );

        let l = self.nodes.len();
        self.nodes.push(Node::Leaf(Box::new(left)));
        self.nodes.push(Node::Leaf(Box::new(right)));
        self.nodes[idx] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: l + 1,
        };
        self.splits.push(SplitRecord {
            node: idx,
            leaf_n: n,
            feature: best.feature,
            threshold: best.threshold,
            best_merit: best.merit,
            second_merit: second,
            epsilon,
        });
        Ok(())
    }

    /// Versioned JSON snapshot of the full tree state.
    pub fn to_snapshot(&self) -> String {
        serde_json::to_string(self).expect("tree state is always serializable")
    }

    pub fn from_snapshot(text: &str) -> Result<Self> {
        let tree: Self =
            serde_json::from_str(text).map_err(|e| TreeError::Snapshot(e.to_string()))?;
        if tree.version != SNAPSHOT_VERSION {
            return Err(TreeError::Snapshot(format!(
                "unsupported snapshot version {} (expected {SNAPSHOT_VERSION})",
                tree.version
            )));
        }
        Ok(tree)
    }
}
