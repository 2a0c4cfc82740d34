//! Similarity-weighted nearest-neighbour prediction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::WeightedSet;

/// The `k` most similar pool members of one query, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborList {
    pub query: String,
    pub neighbors: Vec<(String, f64)>,
    pub k: usize,
}

/// Indices of the top `k` candidates by score, best first. Equal scores keep
/// the candidate order, so results do not depend on sort stability.
pub fn top_k(scores: &[(usize, f64)], k: usize) -> Vec<(usize, f64)> {
    let mut ranked = scores.to_vec();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}

/// Majority label; ties go to the larger similarity sum, then the smaller label.
pub fn vote<'a>(neighbors: impl IntoIterator<Item = (&'a str, f64)>) -> Option<String> {
    let mut tally: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for (label, sim) in neighbors {
        let e = tally.entry(label).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += sim;
    }
    let mut best: Option<(&str, usize, f64)> = None;
    // BTreeMap iterates labels in ascending order, so `>` keeps the smallest on full ties
    for (label, (count, sum)) in tally {
        let better = match best {
            None => true,
            Some((_, c, s)) => count > c || (count == c && sum > s),
        };
        if better {
            best = Some((label, count, sum));
        }
    }
    best.map(|(l, _, _)| l.to_string())
}

/// `Σ sim·y / Σ sim`, or the plain mean when no neighbour has positive similarity.
pub fn weighted_mean(neighbors: impl IntoIterator<Item = (f64, f64)>) -> Option<f64> {
    let (mut num, mut den, mut plain, mut n) = (0.0, 0.0, 0.0, 0usize);
    for (y, sim) in neighbors {
        let w = sim.max(0.0);
        num += w * y;
        den += w;
        plain += y;
        n += 1;
    }
    if n == 0 {
        None
    } else if den > 0.0 {
        Some(num / den)
    } else {
        Some(plain / n as f64)
    }
}

fn rank_pool<T, F>(query: &WeightedSet, pool: &[(WeightedSet, T)], sim: &F, k: usize) -> Result<Vec<(usize, f64)>>
where
    F: Fn(&WeightedSet, &WeightedSet) -> Result<f64>,
{
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let scores = pool
        .iter()
        .enumerate()
        .map(|(i, (member, _))| sim(query, member).map(|s| (i, s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(top_k(&scores, k))
}

/// Neighbour list of `query` over `pool`, skipping pool members with the
/// query's own label.
pub fn neighbor_list<F>(query: &WeightedSet, pool: &[WeightedSet], sim: F, k: usize) -> Result<NeighborList>
where
    F: Fn(&WeightedSet, &WeightedSet) -> Result<f64>,
{
    let others: Vec<(WeightedSet, ())> = pool
        .iter()
        .filter(|p| p.label() != query.label())
        .map(|p| (p.clone(), ()))
        .collect();
    let top = rank_pool(query, &others, &sim, k)?;
    Ok(NeighborList {
        query: query.label().to_string(),
        neighbors: top
            .into_iter()
            .map(|(i, s)| (others[i].0.label().to_string(), s))
            .collect(),
        k,
    })
}

pub fn knn_classify<F>(query: &WeightedSet, pool: &[(WeightedSet, String)], sim: F, k: usize) -> Result<String>
where
    F: Fn(&WeightedSet, &WeightedSet) -> Result<f64>,
{
    let top = rank_pool(query, pool, &sim, k)?;
    Ok(vote(top.iter().map(|&(i, s)| (pool[i].1.as_str(), s))).expect("pool is non-empty"))
}

pub fn knn_regress<F>(query: &WeightedSet, pool: &[(WeightedSet, f64)], sim: F, k: usize) -> Result<f64>
where
    F: Fn(&WeightedSet, &WeightedSet) -> Result<f64>,
{
    let top = rank_pool(query, pool, &sim, k)?;
    Ok(weighted_mean(top.iter().map(|&(i, s)| (pool[i].1, s))).expect("pool is non-empty"))
}
