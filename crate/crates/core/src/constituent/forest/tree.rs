//! CART regression tree with variance-reduction splits.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constituent::features::FeatureTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        id: u32,
        value: f64,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features tried at each split.
    pub mtry: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub root: Node,
    pub leaves: u32,
}

struct Builder<'a, R> {
    table: &'a FeatureTable,
    target: &'a [f64],
    params: TreeParams,
    rng: &'a mut R,
    next_leaf: u32,
}

fn mean(target: &[f64], samples: &[usize]) -> f64 {
    samples.iter().map(|&s| target[s]).sum::<f64>() / samples.len() as f64
}

impl<R: Rng> Builder<'_, R> {
    fn leaf(&mut self, samples: &[usize]) -> Node {
        let id = self.next_leaf;
        self.next_leaf += 1;
        Node::Leaf {
            id,
            value: mean(self.target, samples),
        }
    }

    /// Best `(feature, threshold, gain)` among a random feature subset.
    fn best_split(&mut self, samples: &mut [usize]) -> Option<(usize, f64)> {
        let p = self.table.ncols();
        let n = samples.len();
        let total: f64 = samples.iter().map(|&s| self.target[s]).sum();
        let total_sq: f64 = samples.iter().map(|&s| self.target[s].powi(2)).sum();
        let parent_sse = total_sq - total * total / n as f64;
        if parent_sse <= 1e-12 {
            return None;
        }
        let mut best: Option<(usize, f64, f64)> = None;
        let features = sample(self.rng, p, self.params.mtry.min(p).max(1)).into_vec();
        for feature in features {
            samples.sort_by(|&a, &b| {
                self.table
                    .get(a, feature)
                    .total_cmp(&self.table.get(b, feature))
                    .then(a.cmp(&b))
            });
            let (mut left_sum, mut left_sq) = (0.0, 0.0);
            for k in 0..n - 1 {
                let y = self.target[samples[k]];
                left_sum += y;
                left_sq += y * y;
                let left_n = k + 1;
                let right_n = n - left_n;
                if left_n < self.params.min_leaf || right_n < self.params.min_leaf {
                    continue;
                }
                let here = self.table.get(samples[k], feature);
                let next = self.table.get(samples[k + 1], feature);
                if next <= here {
                    continue;
                }
                let right_sum = total - left_sum;
                let right_sq = total_sq - left_sq;
                let sse = (left_sq - left_sum * left_sum / left_n as f64)
                    + (right_sq - right_sum * right_sum / right_n as f64);
                let gain = parent_sse - sse;
                if gain > 1e-12 && best.map_or(true, |(_, _, g)| gain > g) {
                    best = Some((feature, 0.5 * (here + next), gain));
                }
            }
        }
        best.map(|(f, t, _)| (f, t))
    }

    fn grow(&mut self, samples: &mut [usize], depth: usize) -> Node {
        if depth >= self.params.max_depth || samples.len() < 2 * self.params.min_leaf {
            return self.leaf(samples);
        }
        let Some((feature, threshold)) = self.best_split(samples) else {
            return self.leaf(samples);
        };
        let (mut left, mut right): (Vec<usize>, Vec<usize>) = samples
            .iter()
            .partition(|&&s| self.table.get(s, feature) <= threshold);
        let left_node = self.grow(&mut left, depth + 1);
        let right_node = self.grow(&mut right, depth + 1);
        Node::Split {
            feature,
            threshold,
            left: Box::new(left_node),
            right: Box::new(right_node),
        }
    }
}

impl RegressionTree {
    /// Grows a tree on `samples` (row indices, repeats allowed).
    pub fn fit<R: Rng>(
        table: &FeatureTable,
        target: &[f64],
        samples: &mut [usize],
        params: TreeParams,
        rng: &mut R,
    ) -> Self {
        let mut builder = Builder {
            table,
            target,
            params,
            rng,
            next_leaf: 0,
        };
        let root = builder.grow(samples, 0);
        Self {
            root,
            leaves: builder.next_leaf,
        }
    }

    fn leaf_node(&self, row: &[f64]) -> (u32, f64) {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { id, value } => return (*id, *value),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn leaf(&self, row: &[f64]) -> u32 {
        self.leaf_node(row).0
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        self.leaf_node(row).1
    }
}
