//! Bipartite matching and integral max-flow.

use std::collections::VecDeque;

/// Maximum bipartite matching by augmenting paths. Left vertices are
/// processed in ascending order and adjacency lists are tried in the order
/// given, so the result is deterministic.
///
/// Returns `match_left[u] = Some(v)` for matched pairs.
pub fn max_bipartite_matching(right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    fn try_augment(
        u: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        match_right: &mut [Option<usize>],
        match_left: &mut [Option<usize>],
    ) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            let free = match match_right[v] {
                None => true,
                Some(w) => try_augment(w, adj, seen, match_right, match_left),
            };
            if free {
                match_right[v] = Some(u);
                match_left[u] = Some(v);
                return true;
            }
        }
        false
    }

    let mut match_left = vec![None; adj.len()];
    let mut match_right = vec![None; right];
    for u in 0..adj.len() {
        let mut seen = vec![false; right];
        try_augment(u, adj, &mut seen, &mut match_right, &mut match_left);
    }
    match_left
}

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: i64,
}

/// Dinic max-flow on integer capacities.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        Self {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    pub fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    /// Adds `u → v` with capacity `cap`; returns an edge handle.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: i64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to: v, cap });
        self.adj[u].push(id);
        self.edges.push(Edge { to: u, cap: 0 });
        self.adj[v].push(id + 1);
        id
    }

    /// Flow currently routed through edge `id`.
    pub fn flow(&self, id: usize) -> i64 {
        self.edges[id ^ 1].cap
    }

    fn levels(&self, s: usize) -> Vec<Option<usize>> {
        let mut level = vec![None; self.adj.len()];
        level[s] = Some(0);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let edge = &self.edges[e];
                if edge.cap > 0 && level[edge.to].is_none() {
                    level[edge.to] = Some(level[u].unwrap() + 1);
                    queue.push_back(edge.to);
                }
            }
        }
        level
    }

    fn push(&mut self, u: usize, t: usize, limit: i64, level: &[Option<usize>], next: &mut [usize]) -> i64 {
        if u == t {
            return limit;
        }
        while next[u] < self.adj[u].len() {
            let e = self.adj[u][next[u]];
            let to = self.edges[e].to;
            let cap = self.edges[e].cap;
            if cap > 0 && level[to] == level[u].map(|l| l + 1) {
                let pushed = self.push(to, t, limit.min(cap), level, next);
                if pushed > 0 {
                    self.edges[e].cap -= pushed;
                    self.edges[e ^ 1].cap += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        loop {
            let level = self.levels(s);
            if level[t].is_none() {
                return total;
            }
            let mut next = vec![0; self.adj.len()];
            loop {
                let pushed = self.push(s, t, i64::MAX, &level, &mut next);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }

    /// Nodes reachable from `s` in the residual graph (the source side of a
    /// minimum cut once `max_flow` has run).
    pub fn residual_reachable(&self, s: usize) -> Vec<bool> {
        self.levels(s).into_iter().map(|l| l.is_some()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_prefers_low_indices() {
        let adj = vec![vec![0, 1], vec![0], vec![1, 2]];
        let m = max_bipartite_matching(3, &adj);
        assert_eq!(m, vec![Some(1), Some(0), Some(2)]);
    }

    #[test]
    fn matching_limited_by_shared_vertex() {
        let adj = vec![vec![0], vec![0], vec![0]];
        let m = max_bipartite_matching(1, &adj);
        assert_eq!(m.iter().flatten().count(), 1);
    }

    #[test]
    fn small_flow_and_cut() {
        let mut net = FlowNetwork::new(4);
        let a = net.add_edge(0, 1, 3);
        net.add_edge(0, 2, 2);
        net.add_edge(1, 3, 2);
        net.add_edge(2, 3, 3);
        net.add_edge(1, 2, 1);
        assert_eq!(net.max_flow(0, 3), 5);
        assert_eq!(net.flow(a), 3);
        let side = net.residual_reachable(0);
        assert!(side[0] && !side[3]);
    }
}
