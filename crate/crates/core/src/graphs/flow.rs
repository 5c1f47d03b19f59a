//! Unit-capacity max-flow (Dinic) on small undirected multigraphs.
//!
//! Used as the bounding oracle of the branch-and-bound section solver: with
//! a set of vertices pinned to each side, the cheapest completion of the
//! partition is a minimum `s`–`t` cut.

use std::collections::VecDeque;

const INF: u32 = u32::MAX / 4;

#[derive(Clone, Copy)]
struct Arc {
    to: usize,
    cap: u32,
}

pub(crate) struct FlowNetwork {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl FlowNetwork {
    /// Network on `vertices + 2` nodes; the last two are source and sink.
    pub(crate) fn new(vertices: usize, edges: &[(usize, usize)]) -> Self {
        let mut net = FlowNetwork {
            arcs: Vec::with_capacity(edges.len() * 2),
            adj: vec![Vec::new(); vertices + 2],
            level: vec![0; vertices + 2],
            iter: vec![0; vertices + 2],
        };
        for &(u, v) in edges {
            // An undirected unit edge is one arc pair with capacity in both directions.
            net.push(u, v, 1, 1);
        }
        net
    }

    fn push(&mut self, u: usize, v: usize, cap: u32, rev_cap: u32) {
        self.adj[u].push(self.arcs.len());
        self.arcs.push(Arc { to: v, cap });
        self.adj[v].push(self.arcs.len());
        self.arcs.push(Arc { to: u, cap: rev_cap });
    }

    fn source(&self) -> usize {
        self.adj.len() - 2
    }

    fn sink(&self) -> usize {
        self.adj.len() - 1
    }

    fn bfs(&mut self) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        let s = self.source();
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let Arc { to, cap } = self.arcs[a];
                if cap > 0 && self.level[to] < 0 {
                    self.level[to] = self.level[u] + 1;
                    queue.push_back(to);
                }
            }
        }
        self.level[self.sink()] >= 0
    }

    fn dfs(&mut self, u: usize, pushed: u32) -> u32 {
        if u == self.sink() {
            return pushed;
        }
        while self.iter[u] < self.adj[u].len() {
            let a = self.adj[u][self.iter[u]];
            let Arc { to, cap } = self.arcs[a];
            if cap > 0 && self.level[to] == self.level[u] + 1 {
                let d = self.dfs(to, pushed.min(cap));
                if d > 0 {
                    self.arcs[a].cap -= d;
                    self.arcs[a ^ 1].cap += d;
                    return d;
                }
            }
            self.iter[u] += 1;
        }
        0
    }

    /// Minimum cut separating `upper` from `lower`, plus the source side of
    /// one minimum cut (vertices reachable from `upper` in the residual graph).
    /// `limit` stops early once the flow reaches it.
    pub(crate) fn min_cut(mut self, upper: &[usize], lower: &[usize], limit: u32) -> (u32, Vec<bool>) {
        let vertices = self.adj.len() - 2;
        let (s, t) = (self.source(), self.sink());
        if upper.is_empty() || lower.is_empty() {
            let side = vec![!upper.is_empty(); vertices];
            return (0, side);
        }
        for &u in upper {
            self.push(s, u, INF, 0);
        }
        for &v in lower {
            self.push(v, t, INF, 0);
        }
        let mut flow = 0;
        while flow < limit && self.bfs() {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, INF);
                if f == 0 {
                    break;
                }
                flow += f;
                if flow >= limit {
                    break;
                }
            }
        }
        let _ = self.bfs();
        let side = (0..vertices).map(|v| self.level[v] >= 0).collect();
        (flow, side)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_cut_is_two() {
        let edges = [(0, 1), (1, 2), (2, 3), (3, 0)];
        let (f, side) = FlowNetwork::new(4, &edges).min_cut(&[0], &[2], u32::MAX);
        assert_eq!(f, 2);
        assert!(side[0] && !side[2]);
    }

    #[test]
    fn parallel_edges_add_capacity() {
        let edges = [(0, 1), (0, 1), (0, 1)];
        let (f, _) = FlowNetwork::new(2, &edges).min_cut(&[0], &[1], u32::MAX);
        assert_eq!(f, 3);
    }

    #[test]
    fn empty_side_costs_nothing() {
        let (f, side) = FlowNetwork::new(3, &[(0, 1)]).min_cut(&[0], &[], u32::MAX);
        assert_eq!(f, 0);
        assert!(side.iter().all(|&s| s));
    }
}
