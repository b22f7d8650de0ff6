//! Max-flow formulation of the LP feasibility test.
//!
//! For a fixed radius the edge set `{(i, j) : d(x_i, y_j) ≤ ε}` is fixed and
//! the largest violation `max_A μ(A) − ν(N(A))` equals `1 − maxflow` by
//! max-flow/min-cut, so `ε` is feasible iff `maxflow ≥ 1 − ε`.

use std::collections::VecDeque;

use crate::measure::DiscreteMeasure;

/// Residual capacities below this are treated as saturated.
const FLOW_EPS: f64 = 1e-15;

/// Tolerance on the feasibility comparison `maxflow ≥ 1 − ε`.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Which neighborhoods define the bipartite edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighborhood {
    /// `d ≤ ε` (closed balls, normed spaces).
    Closed,
    /// `d < ε` (open balls, finite metric spaces).
    Open,
}

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: f64,
    rev: usize,
}

/// Bipartite transport network between the atoms of two measures.
///
/// Node 0 is the source, `1..=n` the atoms of `mu`, `n+1..=n+m` the atoms of
/// `nu`, and the last node the sink.
#[derive(Debug, Clone)]
pub struct FeasibilityNetwork {
    graph: Vec<Vec<Edge>>,
    source: usize,
    sink: usize,
    left: usize,
    right: usize,
}

impl FeasibilityNetwork {
    /// Builds the network whose middle edges are the pairs with
    /// `pair_distance(i, j) ≤ radius` (or `<` for open neighborhoods).
    pub fn new(
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        pair_distance: &[Vec<f64>],
        radius: f64,
        hood: Neighborhood,
    ) -> Self {
        let n = mu.len();
        let m = nu.len();
        let mut net = FeasibilityNetwork {
            graph: vec![Vec::new(); n + m + 2],
            source: 0,
            sink: n + m + 1,
            left: n,
            right: m,
        };
        for (i, w) in mu.weights().enumerate() {
            net.add_edge(net.source, 1 + i, w);
        }
        for (j, w) in nu.weights().enumerate() {
            net.add_edge(1 + n + j, net.sink, w);
        }
        for (i, row) in pair_distance.iter().enumerate() {
            for (j, &d) in row.iter().enumerate() {
                let linked = match hood {
                    Neighborhood::Closed => d <= radius,
                    Neighborhood::Open => d < radius,
                };
                if linked {
                    net.add_edge(1 + i, 1 + n + j, 2.0);
                }
            }
        }
        net
    }

    pub fn left_len(&self) -> usize {
        self.left
    }

    pub fn right_len(&self) -> usize {
        self.right
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: f64) {
        let rev_from = self.graph[to].len();
        let rev_to = self.graph[from].len();
        self.graph[from].push(Edge {
            to,
            cap,
            rev: rev_from,
        });
        self.graph[to].push(Edge {
            to: from,
            cap: 0.0,
            rev: rev_to,
        });
    }

    /// Dinic's algorithm. Consumes residual capacities.
    pub fn max_flow(mut self) -> f64 {
        let n = self.graph.len();
        let mut total = 0.0;
        loop {
            let mut level = vec![usize::MAX; n];
            level[self.source] = 0;
            let mut queue = VecDeque::from([self.source]);
            while let Some(v) = queue.pop_front() {
                for e in &self.graph[v] {
                    if e.cap > FLOW_EPS && level[e.to] == usize::MAX {
                        level[e.to] = level[v] + 1;
                        queue.push_back(e.to);
                    }
                }
            }
            if level[self.sink] == usize::MAX {
                return total;
            }
            let mut iter = vec![0usize; n];
            loop {
                let pushed = self.augment(self.source, f64::INFINITY, &level, &mut iter);
                if pushed <= FLOW_EPS {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn augment(&mut self, v: usize, limit: f64, level: &[usize], iter: &mut [usize]) -> f64 {
        if v == self.sink {
            return limit;
        }
        while iter[v] < self.graph[v].len() {
            let Edge { to, cap, rev } = self.graph[v][iter[v]];
            if cap > FLOW_EPS && level[to] == level[v].wrapping_add(1) {
                let got = self.augment(to, limit.min(cap), level, iter);
                if got > FLOW_EPS {
                    self.graph[v][iter[v]].cap -= got;
                    self.graph[to][rev].cap += got;
                    return got;
                }
            }
            iter[v] += 1;
        }
        0.0
    }
}

/// Largest subset violation `max_A μ(A) − ν(N_r(A))`, clamped at zero.
pub(crate) fn deficiency(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    pair_distance: &[Vec<f64>],
    radius: f64,
    hood: Neighborhood,
) -> f64 {
    let flow = FeasibilityNetwork::new(mu, nu, pair_distance, radius, hood).max_flow();
    (1.0 - flow).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Atom;
    use crate::space::Space;

    #[test]
    fn full_matching_saturates() {
        let s = Space::euclidean(1);
        let mu = DiscreteMeasure::new(
            s.clone(),
            vec![Atom::new(vec![0.0], 0.25), Atom::new(vec![1.0], 0.75)],
        )
        .unwrap();
        let nu = mu.clone();
        let d = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let f = FeasibilityNetwork::new(&mu, &nu, &d, 0.0, Neighborhood::Closed).max_flow();
        assert!((f - 1.0).abs() < 1e-15);
        let f = FeasibilityNetwork::new(&mu, &nu, &d, 0.0, Neighborhood::Open).max_flow();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn bottleneck() {
        // Both left atoms only reach the right atom of mass 0.3.
        let s = Space::euclidean(1);
        let mu = DiscreteMeasure::new(
            s.clone(),
            vec![Atom::new(vec![0.0], 0.5), Atom::new(vec![0.1], 0.5)],
        )
        .unwrap();
        let nu = DiscreteMeasure::new(
            s,
            vec![Atom::new(vec![0.05], 0.3), Atom::new(vec![5.0], 0.7)],
        )
        .unwrap();
        let d = vec![vec![0.05, 5.0], vec![0.05, 4.9]];
        let net = FeasibilityNetwork::new(&mu, &nu, &d, 0.06, Neighborhood::Closed);
        assert_eq!((net.left_len(), net.right_len()), (2, 2));
        assert!((net.max_flow() - 0.3).abs() < 1e-15);
        assert!((deficiency(&mu, &nu, &d, 0.06, Neighborhood::Closed) - 0.7).abs() < 1e-15);
    }
}
