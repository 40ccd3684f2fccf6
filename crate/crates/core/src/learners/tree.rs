//! Greedy least-squares CART regression trees, fit by exact split search
//! over midpoints of consecutive distinct feature values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A regression tree node: either an internal split routing rows with
/// `x[feature] <= threshold` to the left child, or a leaf holding the mean of
/// its training residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        value: f64,
    },
}

impl TreeNode {
    /// Routes one row (given column-major features) to its leaf value.
    pub fn predict_row(&self, x: &[Vec<f64>], row: usize) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature][row] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    /// Predicts every row of a column-major feature matrix.
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        let needed = self.max_feature_index().map_or(0, |f| f + 1);
        if x.len() < needed {
            return Err(Error::DimensionMismatch {
                expected: needed,
                got: x.len(),
            });
        }
        let n = x.first().map_or(0, Vec::len);
        Ok((0..n).map(|row| self.predict_row(x, row)).collect())
    }

    fn max_feature_index(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Internal {
                feature,
                left,
                right,
                ..
            } => {
                let mut max = *feature;
                if let Some(l) = left.max_feature_index() {
                    max = max.max(l);
                }
                if let Some(r) = right.max_feature_index() {
                    max = max.max(r);
                }
                Some(max)
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// Stopping rules for tree growth.
#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 3,
            min_samples_split: 2,
            min_samples_leaf: 1,
        }
    }
}

/// Fits a regression tree to residuals. Splits minimize the total squared
/// error of child means; candidate thresholds are midpoints of consecutive
/// distinct sorted values; ties in gain break toward the lowest feature
/// index, then the lowest threshold.
pub fn fit_tree(x: &[Vec<f64>], residuals: &[f64], params: &TreeParams) -> Result<TreeNode> {
    let n = residuals.len();
    if n == 0 || x.is_empty() {
        return Err(Error::EmptyInput);
    }
    for col in x {
        if col.len() != n {
            return Err(Error::LengthMismatch {
                left: col.len(),
                right: n,
            });
        }
    }
    let sorted = presort_features(x);
    Ok(Grower::new(x, residuals, params).grow(&sorted, 0))
}

/// Per-feature row indices sorted by feature value (ties by row index), the
/// shared preprocessing for every tree in a boosting run.
pub(crate) fn presort_features(x: &[Vec<f64>]) -> Vec<Vec<u32>> {
    let n = x.first().map_or(0, Vec::len);
    x.iter()
        .map(|col| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_unstable_by(|&a, &b| {
                col[a as usize]
                    .total_cmp(&col[b as usize])
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect()
}

pub(crate) struct Grower<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    params: &'a TreeParams,
    go_left: Vec<bool>,
}

struct Split {
    feature: usize,
    threshold: f64,
    left_count: usize,
    score: f64,
}

impl<'a> Grower<'a> {
    pub(crate) fn new(x: &'a [Vec<f64>], y: &'a [f64], params: &'a TreeParams) -> Self {
        Grower {
            x,
            y,
            params,
            go_left: vec![false; y.len()],
        }
    }

    /// Grows a node over the rows of `sorted` (one sorted index list per
    /// feature, all holding the same row set).
    pub(crate) fn grow(&mut self, sorted: &[Vec<u32>], depth: usize) -> TreeNode {
        let rows = &sorted[0];
        let n = rows.len();
        let sum: f64 = rows.iter().map(|&r| self.y[r as usize]).sum();
        let mean = sum / n as f64;

        if depth >= self.params.max_depth || n < self.params.min_samples_split {
            return TreeNode::Leaf { value: mean };
        }
        let first = self.y[rows[0] as usize];
        if rows.iter().all(|&r| self.y[r as usize] == first) {
            return TreeNode::Leaf { value: mean };
        }

        let Some(split) = self.best_split(sorted, sum) else {
            return TreeNode::Leaf { value: mean };
        };

        for &r in rows {
            self.go_left[r as usize] = self.x[split.feature][r as usize] <= split.threshold;
        }
        let n_features = sorted.len();
        let mut left_sorted = Vec::with_capacity(n_features);
        let mut right_sorted = Vec::with_capacity(n_features);
        for feature_order in sorted {
            let mut left = Vec::with_capacity(split.left_count);
            let mut right = Vec::with_capacity(n - split.left_count);
            for &r in feature_order {
                if self.go_left[r as usize] {
                    left.push(r);
                } else {
                    right.push(r);
                }
            }
            left_sorted.push(left);
            right_sorted.push(right);
        }
        debug_assert_eq!(left_sorted[0].len(), split.left_count);

        let left = self.grow(&left_sorted, depth + 1);
        drop(left_sorted);
        let right = self.grow(&right_sorted, depth + 1);
        TreeNode::Internal {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Exact split search. Minimizing child SSE is equivalent to maximizing
    /// sum_l^2/n_l + sum_r^2/n_r, which needs only running sums.
    fn best_split(&self, sorted: &[Vec<u32>], total_sum: f64) -> Option<Split> {
        let n = sorted[0].len();
        let msl = self.params.min_samples_leaf;
        let mut best: Option<Split> = None;
        for (feature, order) in sorted.iter().enumerate() {
            let col = &self.x[feature];
            let mut sum_left = 0.0;
            for (count_left, window) in order.windows(2).enumerate() {
                let row = window[0] as usize;
                sum_left += self.y[row];
                let count_left = count_left + 1;
                let v = col[row];
                let v_next = col[window[1] as usize];
                if v >= v_next {
                    continue;
                }
                if count_left < msl || n - count_left < msl {
                    continue;
                }
                let sum_right = total_sum - sum_left;
                let score = sum_left * sum_left / count_left as f64
                    + sum_right * sum_right / (n - count_left) as f64;
                if best.as_ref().is_none_or(|b| score > b.score) {
                    let mut threshold = 0.5 * (v + v_next);
                    // Midpoints of adjacent floats can round up to v_next,
                    // which would route both sides left; pin to v instead.
                    if threshold >= v_next {
                        threshold = v;
                    }
                    best = Some(Split {
                        feature,
                        threshold,
                        left_count: count_left,
                        score,
                    });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf_value(node: &TreeNode) -> Option<f64> {
        match node {
            TreeNode::Leaf { value } => Some(*value),
            _ => None,
        }
    }

    #[test]
    fn constant_residuals_single_leaf() {
        let x = vec![vec![1.0, 2.0, 3.0, 4.0]];
        let y = vec![7.5; 4];
        let tree = fit_tree(&x, &y, &TreeParams::default()).unwrap();
        assert_eq!(leaf_value(&tree), Some(7.5));
    }

    /// Brute-force single split: tries every candidate midpoint and returns
    /// the (threshold, sse) minimizer.
    fn brute_force_stump(x: &[f64], y: &[f64]) -> (f64, f64) {
        let mut vals: Vec<f64> = x.to_vec();
        vals.sort_unstable_by(f64::total_cmp);
        vals.dedup();
        let mut best = (f64::NAN, f64::INFINITY);
        for w in vals.windows(2) {
            let thr = 0.5 * (w[0] + w[1]);
            let (mut ls, mut ln, mut rs, mut rn) = (0.0, 0usize, 0.0, 0usize);
            for (&xv, &yv) in x.iter().zip(y) {
                if xv <= thr {
                    ls += yv;
                    ln += 1;
                } else {
                    rs += yv;
                    rn += 1;
                }
            }
            let lm = ls / ln as f64;
            let rm = rs / rn as f64;
            let sse: f64 = x
                .iter()
                .zip(y)
                .map(|(&xv, &yv)| {
                    let m = if xv <= thr { lm } else { rm };
                    (yv - m) * (yv - m)
                })
                .sum();
            if sse < best.1 {
                best = (thr, sse);
            }
        }
        best
    }

    #[test]
    fn depth_one_step_function() {
        let x = vec![vec![1.0, 2.0, 3.0, 4.0]];
        let y = vec![0.0, 0.0, 1.0, 1.0];
        let (oracle_thr, oracle_sse) = brute_force_stump(&x[0], &y);
        assert_eq!(oracle_thr, 2.5);
        assert_eq!(oracle_sse, 0.0);

        let params = TreeParams {
            max_depth: 1,
            ..TreeParams::default()
        };
        let tree = fit_tree(&x, &y, &params).unwrap();
        match &tree {
            TreeNode::Internal {
                feature,
                threshold,
                left,
                right,
            } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, oracle_thr);
                assert_eq!(leaf_value(left), Some(0.0));
                assert_eq!(leaf_value(right), Some(1.0));
            }
            _ => panic!("expected a split"),
        }
        let preds = tree.predict(&x).unwrap();
        let sse: f64 = preds.iter().zip(&y).map(|(p, t)| (p - t) * (p - t)).sum();
        assert_eq!(sse, 0.0);
    }

    #[test]
    fn min_samples_leaf_forces_single_leaf() {
        let x = vec![vec![1.0, 2.0, 3.0, 4.0]];
        let y = vec![0.0, 1.0, 2.0, 3.0];
        let params = TreeParams {
            max_depth: 5,
            min_samples_split: 2,
            min_samples_leaf: 4,
        };
        let tree = fit_tree(&x, &y, &params).unwrap();
        assert_eq!(leaf_value(&tree), Some(1.5));
    }

    #[test]
    fn leaves_hold_routed_means() {
        // Route every training row and check each leaf equals the mean of
        // the residuals that reach it.
        let x = vec![
            vec![0.1, 0.9, 1.3, 2.0, 2.2, 3.7, 4.1, 5.0],
            vec![1.0, -1.0, 0.5, 0.2, 0.9, -0.3, 0.0, 2.0],
        ];
        let y = vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let params = TreeParams {
            max_depth: 3,
            ..TreeParams::default()
        };
        let tree = fit_tree(&x, &y, &params).unwrap();
        let preds = tree.predict(&x).unwrap();

        use std::collections::HashMap;
        let mut groups: HashMap<u64, Vec<f64>> = HashMap::new();
        for (p, &t) in preds.iter().zip(&y) {
            groups.entry(p.to_bits()).or_default().push(t);
        }
        for (leaf_bits, members) in groups {
            let mean = members.iter().sum::<f64>() / members.len() as f64;
            assert!((f64::from_bits(leaf_bits) - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn respects_max_depth() {
        let n = 128;
        let x = vec![(0..n).map(|i| i as f64).collect::<Vec<f64>>()];
        let y: Vec<f64> = (0..n).map(|i| (i * 7 % 13) as f64).collect();
        for depth in 1..=4 {
            let params = TreeParams {
                max_depth: depth,
                ..TreeParams::default()
            };
            let tree = fit_tree(&x, &y, &params).unwrap();
            assert!(tree.depth() <= depth);
        }
    }

    #[test]
    fn empty_input_errors() {
        assert!(matches!(
            fit_tree(&[], &[], &TreeParams::default()).unwrap_err(),
            Error::EmptyInput
        ));
    }

    #[test]
    fn single_leaf_predicts_everywhere() {
        let tree = TreeNode::Leaf { value: 3.5 };
        let x = vec![vec![1.0, 2.0, 3.0]];
        assert_eq!(tree.predict(&x).unwrap(), vec![3.5, 3.5, 3.5]);
    }

    #[test]
    fn predict_dimension_check() {
        let tree = TreeNode::Internal {
            feature: 2,
            threshold: 0.0,
            left: Box::new(TreeNode::Leaf { value: 0.0 }),
            right: Box::new(TreeNode::Leaf { value: 1.0 }),
        };
        let x = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            tree.predict(&x).unwrap_err(),
            Error::DimensionMismatch {
                expected: 3,
                got: 2
            }
        ));
    }
}
