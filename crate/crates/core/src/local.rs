//! Small explicit subgraphs (induced parts, merged shortcut subgraphs, minor
//! branch sets) with their own compact indexing.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::NodeId;

pub(crate) struct LocalGraph {
    nodes: Vec<NodeId>,
    adj: Vec<Vec<usize>>,
}

impl LocalGraph {
    /// Edges with an endpoint outside `nodes` are dropped.
    pub(crate) fn new<N, E>(nodes: N, edges: E) -> Self
    where
        N: IntoIterator<Item = NodeId>,
        E: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut nodes: Vec<NodeId> = nodes.into_iter().collect();
        nodes.sort_unstable();
        nodes.dedup();
        let mut adj = vec![Vec::new(); nodes.len()];
        for (u, v) in edges {
            if let (Ok(a), Ok(b)) = (nodes.binary_search(&u), nodes.binary_search(&v)) {
                if a != b {
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        LocalGraph { nodes, adj }
    }

    pub(crate) fn distances_from(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.nodes.len()];
        let mut queue = VecDeque::new();
        dist[src] = Some(0);
        queue.push_back(src);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x].unwrap_or(0);
            for &y in &self.adj[x] {
                if dist[y].is_none() {
                    dist[y] = Some(dx + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// `None` when the subgraph is disconnected. Empty subgraphs have
    /// diameter 0.
    pub(crate) fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for src in 0..self.nodes.len() {
            for d in self.distances_from(src) {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    pub(crate) fn is_connected(&self) -> bool {
        self.nodes.is_empty() || self.distances_from(0).iter().all(Option::is_some)
    }

    pub(crate) fn component_count(&self) -> usize {
        let mut seen = vec![false; self.nodes.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.nodes.len() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(x) = stack.pop() {
                for &y in &self.adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        count
    }
}
