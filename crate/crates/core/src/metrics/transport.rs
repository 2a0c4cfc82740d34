//! Exact maximum-similarity transport, used as a test oracle for the greedy
//! matcher.
//!
//! Maximizes `sum mass[i][j] * S[i][j]` subject to row capacities `w_x(i)`
//! and column capacities `w_y(j)` (inequalities: mass may stay unshipped).
//! Solved as a min-cost flow (cost `-S`) with successive shortest paths and
//! Bellman-Ford, which is exact for real capacities and tiny graphs.

use crate::error::{Error, Result};
use crate::matrix::SimilarityMatrix;
use crate::set::{WeightedSet, MASS_EPSILON};

/// Largest `|x| * |y|` the oracle accepts.
pub const ORACLE_CELL_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    /// `(row, col, mass)` for every cell with positive flow, row-major.
    pub assignments: Vec<(usize, usize, f64)>,
    pub objective: f64,
}

struct Edge {
    to: usize,
    cap: f64,
    cost: f64,
}

struct FlowGraph {
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

impl FlowGraph {
    fn new(nodes: usize) -> Self {
        Self {
            edges: Vec::new(),
            adjacency: vec![Vec::new(); nodes],
        }
    }

    /// Adds an arc and its residual twin; returns the forward edge index.
    fn add(&mut self, from: usize, to: usize, cap: f64, cost: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge {
            to: from,
            cap: 0.0,
            cost: -cost,
        });
        self.adjacency[from].push(id);
        self.adjacency[to].push(id + 1);
        id
    }

    fn shortest_path(&self, source: usize, sink: usize) -> Option<(f64, Vec<usize>)> {
        let n = self.adjacency.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut via = vec![usize::MAX; n];
        dist[source] = 0.0;
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                if !dist[u].is_finite() {
                    continue;
                }
                for &e in &self.adjacency[u] {
                    let edge = &self.edges[e];
                    if edge.cap > MASS_EPSILON && dist[u] + edge.cost < dist[edge.to] - 1e-15 {
                        dist[edge.to] = dist[u] + edge.cost;
                        via[edge.to] = e;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if !dist[sink].is_finite() {
            return None;
        }
        let mut path = Vec::new();
        let mut node = sink;
        while node != source {
            let e = via[node];
            path.push(e);
            node = self.edges[e ^ 1].to;
        }
        Some((dist[sink], path))
    }
}

/// Exact optimum of the capacity-constrained transport problem.
pub fn exact_transport_oracle(
    x: &WeightedSet,
    y: &WeightedSet,
    s: &SimilarityMatrix,
) -> Result<TransportPlan> {
    let (m, n) = (x.len(), y.len());
    if s.shape() != (m, n) {
        return Err(Error::DimensionMismatch {
            expected: (m, n),
            found: s.shape(),
        });
    }
    if m * n > ORACLE_CELL_CAP {
        return Err(Error::TooLarge {
            cells: m * n,
            cap: ORACLE_CELL_CAP,
        });
    }

    let source = m + n;
    let sink = source + 1;
    let mut graph = FlowGraph::new(m + n + 2);
    for (i, &w) in x.weights().iter().enumerate() {
        graph.add(source, i, w, 0.0);
    }
    for (j, &w) in y.weights().iter().enumerate() {
        graph.add(m + j, sink, w, 0.0);
    }
    let mut cells = Vec::new();
    for i in 0..m {
        for j in 0..n {
            let v = s.get(i, j);
            if v > 0.0 {
                cells.push((i, j, graph.add(i, m + j, f64::INFINITY, -v)));
            }
        }
    }

    // Augment while a path still gains similarity.
    while let Some((cost, path)) = graph.shortest_path(source, sink) {
        if cost >= -1e-15 {
            break;
        }
        let bottleneck = path
            .iter()
            .map(|&e| graph.edges[e].cap)
            .fold(f64::INFINITY, f64::min);
        if bottleneck <= MASS_EPSILON {
            break;
        }
        for &e in &path {
            graph.edges[e].cap -= bottleneck;
            graph.edges[e ^ 1].cap += bottleneck;
        }
    }

    let mut assignments = Vec::new();
    let mut objective = 0.0;
    for (i, j, e) in cells {
        let mass = graph.edges[e ^ 1].cap;
        if mass > MASS_EPSILON {
            objective += mass * s.get(i, j);
            assignments.push((i, j, mass));
        }
    }
    Ok(TransportPlan {
        assignments,
        objective,
    })
}
