//! Exact-overlap baselines.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::set::WeightedSet;
use crate::trace::MetricResult;

/// `|X ∩ Y| / |X ∪ Y|` over constituent ids; weights are ignored.
pub fn jaccard(x: &WeightedSet, y: &WeightedSet) -> MetricResult {
    let common = x.ids().iter().filter(|id| y.contains(id.as_str())).count();
    let union = x.len() + y.len() - common;
    let score = common as f64 / union as f64;
    MetricResult::new(score, 1.0 - score)
}

/// Sum of element-wise minimum weights over the sum of element-wise maxima;
/// an id missing from one side counts as weight zero there.
pub fn weighted_jaccard(x: &WeightedSet, y: &WeightedSet) -> Result<MetricResult> {
    let mut min_sum = 0.0;
    let mut max_sum = 0.0;
    for (id, wx) in x.iter() {
        let wy = y.weight_of(id.as_str()).unwrap_or(0.0);
        min_sum += wx.min(wy);
        max_sum += wx.max(wy);
    }
    let seen: HashSet<&str> = x.ids().iter().map(|id| id.as_str()).collect();
    for (id, wy) in y.iter() {
        if !seen.contains(id.as_str()) {
            max_sum += wy;
        }
    }
    if !(max_sum > 0.0) {
        return Err(Error::DegenerateUnion);
    }
    let score = min_sum / max_sum;
    Ok(MetricResult::new(score, 1.0 - score))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(entries: &[(&str, f64)]) -> WeightedSet {
        WeightedSet::new("s", entries.iter().copied(), false).unwrap()
    }

    #[test]
    fn jaccard_examples() {
        let r = jaccard(&set(&[("a", 1.0), ("b", 1.0)]), &set(&[("b", 1.0), ("c", 1.0)]));
        assert!((r.score - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.residual - 2.0 / 3.0).abs() < 1e-15);

        let a = set(&[("a", 0.3), ("b", 0.7)]);
        assert_eq!(jaccard(&a, &a), MetricResult::new(1.0, 0.0));
        assert_eq!(jaccard(&a, &set(&[("z", 1.0)])), MetricResult::new(0.0, 1.0));
    }

    #[test]
    fn weighted_jaccard_examples() {
        let x = set(&[("a", 0.5), ("b", 0.5)]);
        let y = set(&[("a", 0.5), ("c", 0.5)]);
        // min-sum 0.5 over max-sum 1.5
        let r = weighted_jaccard(&x, &y).unwrap();
        assert!((r.score - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.score + r.residual, 1.0);

        assert_eq!(weighted_jaccard(&x, &x).unwrap().score, 1.0);
        assert_eq!(weighted_jaccard(&x, &set(&[("z", 1.0)])).unwrap().score, 0.0);
    }
}
