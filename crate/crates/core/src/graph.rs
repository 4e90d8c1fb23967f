//! Undirected graphs, BFS trees and partitions into connected parts.
//!
//! Nodes are `0..n` and edges are `0..m`. Adjacency lists are sorted by
//! neighbor id, so every traversal in the crate is deterministic.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::local::LocalGraph;

pub type NodeId = usize;
pub type EdgeId = usize;

/// Weights live in `[1, 2^31)`.
pub const MAX_WEIGHT: u32 = (1 << 31) - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: Option<u32>,
}

impl Edge {
    pub fn other(&self, x: NodeId) -> NodeId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn has(&self, x: NodeId) -> bool {
        self.u == x || self.v == x
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("edge {edge} references node {node} but the graph has {n} nodes")]
    NodeOutOfRange { edge: EdgeId, node: NodeId, n: usize },
    #[error("edge {edge} is a self-loop at node {node}")]
    SelfLoop { edge: EdgeId, node: NodeId },
    #[error("edges {first} and {second} join the same pair of nodes")]
    ParallelEdge { first: EdgeId, second: EdgeId },
    #[error("edge {edge} is unweighted while other edges carry weights")]
    MixedWeights { edge: EdgeId },
    #[error("edge {edge} has weight {weight}, outside [1, 2^31)")]
    WeightOutOfRange { edge: EdgeId, weight: u32 },
    #[error("edges {first} and {second} share weight {weight}")]
    DuplicateWeight { first: EdgeId, second: EdgeId, weight: u32 },
    #[error("graph is not weighted")]
    Unweighted,
    #[error("node {node} is unreachable from node {from}")]
    Disconnected { from: NodeId, node: NodeId },
    #[error("node {node} is not a node of a {n}-node graph")]
    InvalidNode { node: NodeId, n: usize },
    #[error("node set is empty")]
    EmptySet,
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
}

/// Simple undirected graph with dense node and edge identifiers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<(NodeId, EdgeId)>>,
    weighted: bool,
}

impl Graph {
    /// Unweighted graph; edge `i` is the `i`-th pair.
    pub fn new<I>(n: usize, pairs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let edges = pairs
            .into_iter()
            .map(|(u, v)| Edge { u, v, weight: None })
            .collect();
        Self::from_edges(n, edges)
    }

    /// Either every edge is weighted or none is.
    pub fn from_edges(n: usize, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let weighted = edges.first().is_some_and(|e| e.weight.is_some());
        let mut adj: Vec<Vec<(NodeId, EdgeId)>> = vec![Vec::new(); n];
        for (id, e) in edges.iter().enumerate() {
            for node in [e.u, e.v] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { edge: id, node, n });
                }
            }
            if e.u == e.v {
                return Err(GraphError::SelfLoop { edge: id, node: e.u });
            }
            match e.weight {
                // edge 0 decided the graph is unweighted
                Some(_) if !weighted => return Err(GraphError::MixedWeights { edge: 0 }),
                None if weighted => return Err(GraphError::MixedWeights { edge: id }),
                Some(w) if w == 0 || w > MAX_WEIGHT => {
                    return Err(GraphError::WeightOutOfRange { edge: id, weight: w })
                }
                _ => {}
            }
            adj[e.u].push((e.v, id));
            adj[e.v].push((e.u, id));
        }
        for list in &mut adj {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0].0 == w[1].0) {
                let (a, b) = (w[0].1.min(w[1].1), w[0].1.max(w[1].1));
                return Err(GraphError::ParallelEdge { first: a, second: b });
            }
        }
        Ok(Graph { n, edges, adj, weighted })
    }

    /// Same topology with `weights[e]` on edge `e`.
    pub fn with_weights(&self, weights: &[u32]) -> Result<Self, GraphError> {
        if weights.len() != self.edges.len() {
            return Err(GraphError::WeightCount {
                expected: self.edges.len(),
                got: weights.len(),
            });
        }
        let edges = self
            .edges
            .iter()
            .zip(weights)
            .map(|(e, &w)| Edge { weight: Some(w), ..*e })
            .collect();
        Self::from_edges(self.n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn weight(&self, e: EdgeId) -> Option<u32> {
        self.edges[e].weight
    }

    /// `(neighbor, edge)` pairs sorted by neighbor id.
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn edge_between(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        let list = self.adj.get(u)?;
        list.binary_search_by_key(&v, |&(x, _)| x)
            .ok()
            .map(|i| list[i].1)
    }

    pub fn check_node(&self, v: NodeId) -> Result<(), GraphError> {
        if v < self.n {
            Ok(())
        } else {
            Err(GraphError::InvalidNode { node: v, n: self.n })
        }
    }

    /// Fails unless every edge has a weight and no two weights coincide.
    pub fn check_distinct_weights(&self) -> Result<(), GraphError> {
        if !self.weighted && !self.edges.is_empty() {
            return Err(GraphError::Unweighted);
        }
        let mut by_weight: Vec<(u32, EdgeId)> = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.weight.unwrap_or(0), i))
            .collect();
        by_weight.sort_unstable();
        match by_weight.windows(2).find(|w| w[0].0 == w[1].0) {
            Some(w) => Err(GraphError::DuplicateWeight {
                first: w[0].1,
                second: w[1].1,
                weight: w[0].0,
            }),
            None => Ok(()),
        }
    }

    /// Hop distances from `src`; `None` marks unreachable nodes.
    pub fn distances_from(&self, src: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[src] = Some(0);
        queue.push_back(src);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x].unwrap_or(0);
            for &(y, _) in &self.adj[x] {
                if dist[y].is_none() {
                    dist[y] = Some(dx + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.distances_from(0).iter().all(Option::is_some)
    }

    /// Largest distance from `v`.
    pub fn eccentricity(&self, v: NodeId) -> Result<usize, GraphError> {
        self.check_node(v)?;
        let mut best = 0;
        for (node, d) in self.distances_from(v).into_iter().enumerate() {
            best = best.max(d.ok_or(GraphError::Disconnected { from: v, node })?);
        }
        Ok(best)
    }
}

/// Rooted spanning tree of a host graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedTree {
    root: NodeId,
    parent: Vec<NodeId>,
    parent_edge: Vec<Option<EdgeId>>,
    depth: Vec<usize>,
    height: usize,
    children: Vec<Vec<NodeId>>,
    order: Vec<NodeId>,
    in_tree: Vec<bool>,
}

impl RootedTree {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    /// The root is its own parent.
    pub fn parent(&self, v: NodeId) -> NodeId {
        self.parent[v]
    }

    /// The tree edge to the parent; `None` for the root.
    pub fn parent_edge(&self, v: NodeId) -> Option<EdgeId> {
        self.parent_edge[v]
    }

    pub fn depth(&self, v: NodeId) -> usize {
        self.depth[v]
    }

    /// Maximum depth, `D`.
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v]
    }

    /// Nodes in non-decreasing depth order.
    pub fn bfs_order(&self) -> &[NodeId] {
        &self.order
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        self.in_tree.get(e).copied().unwrap_or(false)
    }

    /// Tree edge ids in ascending order.
    pub fn tree_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.in_tree
            .iter()
            .enumerate()
            .filter_map(|(e, &t)| t.then_some(e))
    }

    /// The endpoint of tree edge `e` farther from the root.
    pub fn lower_endpoint(&self, g: &Graph, e: EdgeId) -> Option<NodeId> {
        if !self.contains_edge(e) {
            return None;
        }
        let edge = g.edge(e);
        Some(if self.depth[edge.u] > self.depth[edge.v] {
            edge.u
        } else {
            edge.v
        })
    }

    /// Builds a tree from a parent array, checking that every parent link is
    /// a host edge and that the links reach the root without cycles.
    pub fn from_parents(g: &Graph, root: NodeId, parent: &[NodeId]) -> Result<Self, GraphError> {
        g.check_node(root)?;
        let n = g.n();
        if parent.len() != n {
            return Err(GraphError::InvalidNode { node: parent.len(), n });
        }
        let mut children = vec![Vec::new(); n];
        let mut parent_edge = vec![None; n];
        for v in 0..n {
            if v == root {
                continue;
            }
            let p = parent[v];
            let e = g
                .edge_between(p, v)
                .ok_or(GraphError::Disconnected { from: root, node: v })?;
            parent_edge[v] = Some(e);
            children[p].push(v);
        }
        let mut depth = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([root]);
        depth[root] = 0;
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for &c in &children[x] {
                depth[c] = depth[x] + 1;
                queue.push_back(c);
            }
        }
        if let Some(node) = (0..n).find(|&v| depth[v] == usize::MAX) {
            return Err(GraphError::Disconnected { from: root, node });
        }
        let mut in_tree = vec![false; g.m()];
        for e in parent_edge.iter().flatten() {
            in_tree[*e] = true;
        }
        let height = depth.iter().copied().max().unwrap_or(0);
        let mut parent = parent.to_vec();
        parent[root] = root;
        Ok(RootedTree {
            root,
            parent,
            parent_edge,
            depth,
            height,
            children,
            order,
            in_tree,
        })
    }
}

/// BFS tree from `root`; ties go to the smallest-id discoverer.
pub fn bfs_tree(g: &Graph, root: NodeId) -> Result<RootedTree, GraphError> {
    g.check_node(root)?;
    let n = g.n();
    let mut parent = vec![usize::MAX; n];
    parent[root] = root;
    let mut queue = VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        for &(y, _) in g.neighbors(x) {
            if parent[y] == usize::MAX {
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    if let Some(node) = (0..n).find(|&v| parent[v] == usize::MAX) {
        return Err(GraphError::Disconnected { from: root, node });
    }
    RootedTree::from_parents(g, root, &parent)
}

/// Exact diameter by BFS from every node.
pub fn diameter(g: &Graph) -> Result<usize, GraphError> {
    let mut best = 0;
    for v in 0..g.n() {
        best = best.max(g.eccentricity(v)?);
    }
    Ok(best)
}

/// Diameter of `G[s]`; `Ok(None)` when `G[s]` is disconnected.
pub fn induced_diameter(g: &Graph, s: &[NodeId]) -> Result<Option<usize>, GraphError> {
    if s.is_empty() {
        return Err(GraphError::EmptySet);
    }
    for &v in s {
        g.check_node(v)?;
    }
    Ok(induced(g, s).diameter())
}

pub(crate) fn induced(g: &Graph, s: &[NodeId]) -> LocalGraph {
    let edges = s.iter().flat_map(|&u| {
        g.neighbors(u)
            .iter()
            .filter(move |&&(v, _)| u < v)
            .map(move |&(v, _)| (u, v))
    });
    LocalGraph::new(s.iter().copied(), edges)
}

/// Disjoint node sets `P_1..P_k`; nodes may stay unassigned.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    parts: Vec<Vec<NodeId>>,
    part_of: Vec<Option<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PartitionViolation {
    #[error("partition covers {got} nodes but the graph has {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("part {part} is empty")]
    Empty { part: usize },
    #[error("part {part} names node {node}, which is not in the graph")]
    NodeOutOfRange { part: usize, node: NodeId },
    #[error("node {node} is in part {first} and part {second}")]
    Overlap { node: NodeId, first: usize, second: usize },
    #[error("part {part} does not induce a connected subgraph")]
    Disconnected { part: usize },
}

impl Partition {
    /// Parts are stored sorted. Membership of a node listed twice goes to the
    /// first part naming it; [`validate_partition`] reports such overlaps.
    pub fn new(n: usize, parts: Vec<Vec<NodeId>>) -> Self {
        let mut parts = parts;
        let mut part_of = vec![None; n];
        for (i, part) in parts.iter_mut().enumerate() {
            part.sort_unstable();
            for &v in part.iter() {
                if v < n && part_of[v].is_none() {
                    part_of[v] = Some(i);
                }
            }
        }
        Partition { parts, part_of }
    }

    pub fn singletons(n: usize) -> Self {
        Self::new(n, (0..n).map(|v| vec![v]).collect())
    }

    pub fn whole(n: usize) -> Self {
        Self::new(n, vec![(0..n).collect()])
    }

    /// Parts are the classes of `labels`, ordered by their smallest node.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut first_of = alloc::collections::BTreeMap::new();
        let mut parts: Vec<Vec<NodeId>> = Vec::new();
        for (v, &l) in labels.iter().enumerate() {
            let idx = *first_of.entry(l).or_insert_with(|| {
                parts.push(Vec::new());
                parts.len() - 1
            });
            parts[idx].push(v);
        }
        Self::new(labels.len(), parts)
    }

    pub fn n(&self) -> usize {
        self.part_of.len()
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Vec<NodeId>] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &[NodeId] {
        &self.parts[i]
    }

    pub fn part_of(&self, v: NodeId) -> Option<usize> {
        self.part_of.get(v).copied().flatten()
    }
}

/// Checks sizes, disjointness and per-part connectivity, reporting the first
/// violation found.
pub fn validate_partition(g: &Graph, p: &Partition) -> Result<(), PartitionViolation> {
    if p.n() != g.n() {
        return Err(PartitionViolation::SizeMismatch {
            expected: g.n(),
            got: p.n(),
        });
    }
    let mut owner: Vec<Option<usize>> = vec![None; g.n()];
    for (i, part) in p.parts().iter().enumerate() {
        if part.is_empty() {
            return Err(PartitionViolation::Empty { part: i });
        }
        for &v in part {
            if v >= g.n() {
                return Err(PartitionViolation::NodeOutOfRange { part: i, node: v });
            }
            if let Some(first) = owner[v] {
                return Err(PartitionViolation::Overlap {
                    node: v,
                    first,
                    second: i,
                });
            }
            owner[v] = Some(i);
        }
    }
    for (i, part) in p.parts().iter().enumerate() {
        if !induced(g, part).is_connected() {
            return Err(PartitionViolation::Disconnected { part: i });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_grid, gen_wheel};

    fn path(n: usize) -> Graph {
        Graph::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn rejects_malformed_graphs() {
        assert_eq!(
            Graph::new(2, [(0, 0)]),
            Err(GraphError::SelfLoop { edge: 0, node: 0 })
        );
        assert_eq!(
            Graph::new(3, [(0, 1), (1, 0)]),
            Err(GraphError::ParallelEdge { first: 0, second: 1 })
        );
        assert!(matches!(
            Graph::new(2, [(0, 2)]),
            Err(GraphError::NodeOutOfRange { node: 2, .. })
        ));
        let g = path(3);
        assert!(g.with_weights(&[0, 1]).is_err());
        assert!(g.with_weights(&[1, 1]).unwrap().check_distinct_weights().is_err());
        assert!(g.with_weights(&[2, 1]).unwrap().check_distinct_weights().is_ok());
    }

    #[test]
    fn bfs_tree_on_path() {
        let t = bfs_tree(&path(3), 0).unwrap();
        assert_eq!((t.depth(0), t.depth(1), t.depth(2)), (0, 1, 2));
        assert_eq!(t.height(), 2);
        assert_eq!(t.parent(0), 0);
        assert_eq!(t.lower_endpoint(&path(3), 1), Some(2));
    }

    #[test]
    fn bfs_tree_on_wheel_hub() {
        let t = bfs_tree(&gen_wheel(9).unwrap(), 0).unwrap();
        assert_eq!(t.height(), 1);
    }

    #[test]
    fn bfs_tree_on_grid_corner() {
        let t = bfs_tree(&gen_grid(5, 5).unwrap(), 0).unwrap();
        assert_eq!(t.height(), 8);
        assert_eq!(t.tree_edges().count(), 24);
    }

    #[test]
    fn bfs_tree_reports_unreached_node() {
        let g = Graph::new(3, [(0, 1)]).unwrap();
        assert_eq!(
            bfs_tree(&g, 0),
            Err(GraphError::Disconnected { from: 0, node: 2 })
        );
        assert!(diameter(&g).is_err());
    }

    #[test]
    fn diameters() {
        assert_eq!(diameter(&path(7)).unwrap(), 6);
        assert_eq!(diameter(&gen_wheel(10).unwrap()).unwrap(), 2);
    }

    #[test]
    fn induced_diameters() {
        let wheel = gen_wheel(10).unwrap();
        assert_eq!(induced_diameter(&wheel, &[3]).unwrap(), Some(0));
        // The rim of a 10-node wheel is a 9-cycle.
        let rim: Vec<_> = (1..10).collect();
        assert_eq!(induced_diameter(&wheel, &rim).unwrap(), Some(4));
        assert_eq!(induced_diameter(&path(3), &[0, 2]).unwrap(), None);
        assert_eq!(induced_diameter(&path(3), &[]), Err(GraphError::EmptySet));
        let all: Vec<_> = (0..10).collect();
        assert_eq!(induced_diameter(&wheel, &all).unwrap(), Some(2));
    }

    #[test]
    fn partition_checks() {
        let g = path(2);
        assert_eq!(validate_partition(&g, &Partition::new(2, vec![vec![0], vec![1]])), Ok(()));
        let g = path(3);
        assert_eq!(
            validate_partition(&g, &Partition::new(3, vec![vec![0, 2]])),
            Err(PartitionViolation::Disconnected { part: 0 })
        );
        assert_eq!(
            validate_partition(&g, &Partition::new(3, vec![vec![0, 1], vec![1, 2]])),
            Err(PartitionViolation::Overlap { node: 1, first: 0, second: 1 })
        );
        assert_eq!(
            validate_partition(&g, &Partition::new(3, vec![vec![]])),
            Err(PartitionViolation::Empty { part: 0 })
        );
        // Unassigned nodes are fine.
        assert_eq!(validate_partition(&g, &Partition::new(3, vec![vec![1]])), Ok(()));
    }

    #[test]
    fn partition_from_labels() {
        let p = Partition::from_labels(&[5, 5, 2, 5, 2]);
        assert_eq!(p.parts(), &[vec![0, 1, 3], vec![2, 4]]);
        assert_eq!(p.part_of(4), Some(1));
    }
}
