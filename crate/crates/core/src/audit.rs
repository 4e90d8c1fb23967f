//! Measurements of shortcut quality, minor validation, and the closed-form
//! bounds the measurements are compared against.

use alloc::vec;
use alloc::vec::Vec;

use crate::engine::{MinorCertificate, Shortcut};
use crate::graph::{induced, EdgeId, Graph, NodeId, Partition, RootedTree};
use crate::local::LocalGraph;
use crate::ratio::Fraction;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AuditError {
    #[error("part {part} uses edge {edge}, which is not in the graph")]
    UnknownEdge { part: usize, edge: EdgeId },
    #[error("part {part} uses edge {edge}, which is not a tree edge")]
    NonTreeEdge { part: usize, edge: EdgeId },
    #[error("shortcut has {shortcut} parts, partition has {partition}")]
    PartCount { shortcut: usize, partition: usize },
    #[error("complete-minor size must be at least 2, got {0}")]
    RankTooSmall(usize),
}

/// Congestion, dilation and block number of one shortcut.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QualityReport {
    pub congestion: usize,
    /// `None` when some merged part subgraph is disconnected.
    pub dilation: Option<usize>,
    /// `None` when the shortcut is not tree-restricted.
    pub blocks: Option<usize>,
    /// `congestion + dilation`.
    pub quality: Option<usize>,
    pub per_part: Vec<PartQuality>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PartQuality {
    pub part: usize,
    pub dilation: Option<usize>,
    pub blocks: Option<usize>,
}

/// Largest number of parts sharing one edge.
pub fn measure_congestion(g: &Graph, shortcut: &Shortcut) -> Result<usize, AuditError> {
    let mut load = vec![0usize; g.m()];
    for (part, set) in shortcut.sets().iter().enumerate() {
        for &edge in set {
            *load
                .get_mut(edge)
                .ok_or(AuditError::UnknownEdge { part, edge })? += 1;
        }
    }
    Ok(load.into_iter().max().unwrap_or(0))
}

fn merged_subgraph(g: &Graph, part: &[NodeId], h: &[EdgeId]) -> LocalGraph {
    let h_edges = h.iter().map(|&e| (g.edge(e).u, g.edge(e).v));
    let nodes = part.iter().copied().chain(h_edges.clone().flat_map(|(u, v)| [u, v]));
    let part_edges = part.iter().flat_map(|&u| {
        g.neighbors(u)
            .iter()
            .filter(move |&&(v, _)| u < v && part.binary_search(&v).is_ok())
            .map(move |&(v, _)| (u, v))
    });
    LocalGraph::new(nodes, part_edges.chain(h_edges))
}

/// Diameter of `G[P_i] + H_i`, `None` if that subgraph is disconnected.
pub fn part_dilation(g: &Graph, part: &[NodeId], h: &[EdgeId]) -> Option<usize> {
    if h.is_empty() {
        return induced(g, part).diameter();
    }
    merged_subgraph(g, part, h).diameter()
}

/// Largest [`part_dilation`]; `None` if any part is disconnected.
pub fn measure_dilation(g: &Graph, p: &Partition, shortcut: &Shortcut) -> Option<usize> {
    let mut best = 0;
    for (i, part) in p.parts().iter().enumerate() {
        best = best.max(part_dilation(g, part, shortcut.part_edges(i))?);
    }
    Some(best)
}

fn part_blocks(g: &Graph, part: &[NodeId], h: &[EdgeId]) -> usize {
    let h_edges = h.iter().map(|&e| (g.edge(e).u, g.edge(e).v));
    let nodes = part.iter().copied().chain(h_edges.clone().flat_map(|(u, v)| [u, v]));
    LocalGraph::new(nodes, h_edges).component_count()
}

/// Largest number of connected components of `(P_i ∪ V(H_i), H_i)`.
pub fn measure_blocks(
    g: &Graph,
    t: &RootedTree,
    p: &Partition,
    shortcut: &Shortcut,
) -> Result<usize, AuditError> {
    check_part_count(p, shortcut)?;
    for (part, set) in shortcut.sets().iter().enumerate() {
        if let Some(&edge) = set.iter().find(|&&e| !t.contains_edge(e)) {
            return Err(if edge < g.m() {
                AuditError::NonTreeEdge { part, edge }
            } else {
                AuditError::UnknownEdge { part, edge }
            });
        }
    }
    Ok(p.parts()
        .iter()
        .enumerate()
        .map(|(i, part)| part_blocks(g, part, shortcut.part_edges(i)))
        .max()
        .unwrap_or(0))
}

/// `true` iff every shortcut edge is an edge of `t`.
pub fn check_tree_restricted(shortcut: &Shortcut, t: &RootedTree) -> bool {
    shortcut.sets().iter().flatten().all(|&e| t.contains_edge(e))
}

fn check_part_count(p: &Partition, shortcut: &Shortcut) -> Result<(), AuditError> {
    if p.k() == shortcut.k() {
        Ok(())
    } else {
        Err(AuditError::PartCount {
            shortcut: shortcut.k(),
            partition: p.k(),
        })
    }
}

/// Full report. Block numbers are reported only for tree-restricted
/// shortcuts.
pub fn audit(
    g: &Graph,
    t: &RootedTree,
    p: &Partition,
    shortcut: &Shortcut,
) -> Result<QualityReport, AuditError> {
    check_part_count(p, shortcut)?;
    let congestion = measure_congestion(g, shortcut)?;
    let tree = check_tree_restricted(shortcut, t);
    let per_part: Vec<PartQuality> = p
        .parts()
        .iter()
        .enumerate()
        .map(|(i, part)| {
            let h = shortcut.part_edges(i);
            PartQuality {
                part: i,
                dilation: part_dilation(g, part, h),
                blocks: tree.then(|| part_blocks(g, part, h)),
            }
        })
        .collect();
    let dilation = per_part
        .iter()
        .try_fold(0, |acc, q| q.dilation.map(|d| acc.max(d)));
    let blocks = tree.then(|| per_part.iter().filter_map(|q| q.blocks).max().unwrap_or(0));
    Ok(QualityReport {
        congestion,
        dilation,
        blocks,
        quality: dilation.map(|d| d + congestion),
        per_part,
    })
}

/// Dilation implied by `b` blocks in a tree of depth `depth`: `b (2D + 1)`.
pub fn block_dilation_bound(blocks: usize, depth: usize) -> usize {
    blocks * (2 * depth + 1)
}

/// `⌈log₂ x⌉` for `x >= 1`.
pub fn ceil_log2(x: usize) -> usize {
    match x {
        0 | 1 => 0,
        _ => (usize::BITS - (x - 1).leading_zeros()) as usize,
    }
}

/// Congestion of a full shortcut assembled from partial rounds of
/// congestion `c`: `c ⌈log₂ max(k, 2)⌉`.
pub fn partial_to_full_congestion(c: usize, k: usize) -> usize {
    c * ceil_log2(k.max(2))
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MinorViolation {
    #[error("minor node {node} has an empty branch set")]
    EmptyBranchSet { node: usize },
    #[error("minor node {node} contains vertex {vertex}, which is not in the graph")]
    VertexOutOfRange { node: usize, vertex: NodeId },
    #[error("vertex {vertex} is in the branch sets of minor nodes {first} and {second}")]
    NotDisjoint { vertex: NodeId, first: usize, second: usize },
    #[error("branch set of minor node {node} is not connected")]
    Disconnected { node: usize },
    #[error("minor edge {edge} names a missing or repeated minor node")]
    BadEndpoints { edge: usize },
    #[error("minor edge {edge} duplicates an earlier minor edge")]
    DuplicateEdge { edge: usize },
    #[error("minor edge {edge} has witness {witness}, which is not in the graph")]
    UnknownWitness { edge: usize, witness: EdgeId },
    #[error("witness of minor edge {edge} does not join its two branch sets")]
    EdgeRealization { edge: usize },
    #[error("stated density {stated} differs from recomputed {actual}")]
    DensityMismatch { stated: Fraction, actual: Fraction },
}

/// Checks that `cert` describes a minor of `g` and that its density field is
/// exact.
pub fn validate_minor(g: &Graph, cert: &MinorCertificate) -> Result<(), MinorViolation> {
    let mut owner: Vec<Option<usize>> = vec![None; g.n()];
    for (node, branch) in cert.nodes.iter().enumerate() {
        if branch.vertices.is_empty() {
            return Err(MinorViolation::EmptyBranchSet { node });
        }
        for &vertex in &branch.vertices {
            let slot = owner
                .get_mut(vertex)
                .ok_or(MinorViolation::VertexOutOfRange { node, vertex })?;
            if let Some(first) = *slot {
                return Err(MinorViolation::NotDisjoint {
                    vertex,
                    first,
                    second: node,
                });
            }
            *slot = Some(node);
        }
    }
    for (node, branch) in cert.nodes.iter().enumerate() {
        if !induced(g, &branch.vertices).is_connected() {
            return Err(MinorViolation::Disconnected { node });
        }
    }
    let mut seen = alloc::collections::BTreeSet::new();
    for (edge, me) in cert.edges.iter().enumerate() {
        if me.a == me.b || me.a >= cert.nodes.len() || me.b >= cert.nodes.len() {
            return Err(MinorViolation::BadEndpoints { edge });
        }
        if !seen.insert((me.a.min(me.b), me.a.max(me.b))) {
            return Err(MinorViolation::DuplicateEdge { edge });
        }
        if me.witness >= g.m() {
            return Err(MinorViolation::UnknownWitness {
                edge,
                witness: me.witness,
            });
        }
        let w = g.edge(me.witness);
        let ends = (owner[w.u], owner[w.v]);
        if ends != (Some(me.a), Some(me.b)) && ends != (Some(me.b), Some(me.a)) {
            return Err(MinorViolation::EdgeRealization { edge });
        }
    }
    let actual = Fraction::new(cert.edges.len() as u64, cert.nodes.len() as u64);
    if actual != cert.density {
        return Err(MinorViolation::DensityMismatch {
            stated: cert.density,
            actual,
        });
    }
    Ok(())
}

/// Bounds on the minor density of a graph whose largest complete minor has
/// `r` nodes: `(r - 1)/2 <= δ <= 8 r √(log₂ r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityBounds {
    pub r: usize,
    pub delta_low: Fraction,
    pub delta_high: f64,
}

pub fn thomason_bounds(r: usize) -> Result<DensityBounds, AuditError> {
    if r < 2 {
        return Err(AuditError::RankTooSmall(r));
    }
    let rf = r as f64;
    Ok(DensityBounds {
        r,
        delta_low: Fraction::new(r as u64 - 1, 2),
        delta_high: 8.0 * rf * libm::sqrt(libm::log2(rf)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{MinorEdge, MinorLabel, MinorNode};
    use crate::generators::{gen_grid, gen_wheel};
    use crate::graph::bfs_tree;

    fn k4() -> Graph {
        gen_wheel(4).unwrap()
    }

    #[test]
    fn congestion_counts_shared_edges() {
        let g = k4();
        assert_eq!(measure_congestion(&g, &Shortcut::from_sets(vec![vec![2], vec![2]])), Ok(2));
        assert_eq!(measure_congestion(&g, &Shortcut::empty(3)), Ok(0));
        assert_eq!(
            measure_congestion(&g, &Shortcut::from_sets(vec![vec![9]])),
            Err(AuditError::UnknownEdge { part: 0, edge: 9 })
        );
    }

    #[test]
    fn wheel_rim_with_spokes() {
        let g = gen_wheel(10).unwrap();
        let p = Partition::new(10, vec![(1..10).collect()]);
        let spokes: Vec<EdgeId> = (0..9).collect();
        assert!(spokes.iter().all(|&e| g.edge(e).has(0)));
        let s = Shortcut::from_sets(vec![spokes]);
        assert_eq!(measure_dilation(&g, &p, &s), Some(2));
        assert_eq!(measure_dilation(&g, &p, &Shortcut::empty(1)), Some(4));
        let single = Partition::new(10, vec![vec![4]]);
        assert_eq!(measure_dilation(&g, &single, &Shortcut::empty(1)), Some(0));
    }

    #[test]
    fn disconnected_merged_part_is_infinite() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let p = Partition::new(3, vec![vec![0, 2]]);
        assert_eq!(measure_dilation(&g, &p, &Shortcut::empty(1)), None);
        assert_eq!(measure_dilation(&g, &p, &Shortcut::from_sets(vec![vec![0, 1]])), Some(2));
    }

    #[test]
    fn block_counts() {
        let g = gen_grid(3, 1).unwrap();
        let t = bfs_tree(&g, 0).unwrap();
        let whole = Partition::whole(3);
        assert_eq!(measure_blocks(&g, &t, &whole, &Shortcut::empty(1)), Ok(3));
        let single = Partition::new(3, vec![vec![1]]);
        assert_eq!(measure_blocks(&g, &t, &single, &Shortcut::empty(1)), Ok(1));
        // Part {0,1,2} with only edge (1,2): fragments {0} and {1,2}.
        assert_eq!(measure_blocks(&g, &t, &whole, &Shortcut::from_sets(vec![vec![1]])), Ok(2));
    }

    #[test]
    fn tree_restriction() {
        let g = gen_grid(2, 2).unwrap();
        let t = bfs_tree(&g, 0).unwrap();
        let non_tree = (0..g.m()).find(|&e| !t.contains_edge(e)).unwrap();
        let s = Shortcut::from_sets(vec![vec![non_tree]]);
        assert!(!check_tree_restricted(&s, &t));
        assert!(check_tree_restricted(&Shortcut::empty(2), &t));
        let p = Partition::whole(4);
        assert_eq!(
            measure_blocks(&g, &t, &p, &s),
            Err(AuditError::NonTreeEdge { part: 0, edge: non_tree })
        );
        let report = audit(&g, &t, &p, &s).unwrap();
        assert_eq!(report.blocks, None);
    }

    #[test]
    fn closed_forms() {
        assert_eq!(block_dilation_bound(1, 0), 1);
        assert_eq!(block_dilation_bound(8, 5), 88);
        assert_eq!(block_dilation_bound(24, 6), 312);
        assert_eq!(partial_to_full_congestion(10, 1), 10);
        assert_eq!(partial_to_full_congestion(10, 8), 30);
        assert_eq!(partial_to_full_congestion(144, 50), 864);
        assert_eq!(
            (0..10).map(ceil_log2).collect::<Vec<_>>(),
            [0, 0, 1, 2, 2, 3, 3, 3, 3, 4]
        );
    }

    #[test]
    fn thomason() {
        let b = thomason_bounds(2).unwrap();
        assert_eq!((b.delta_low.to_f64(), b.delta_high), (0.5, 16.0));
        let b = thomason_bounds(4).unwrap();
        assert_eq!(b.delta_low, Fraction::new(3, 2));
        assert!((b.delta_high - 32.0 * 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(thomason_bounds(3).unwrap().delta_low, Fraction::new(1, 1));
        assert_eq!(thomason_bounds(1), Err(AuditError::RankTooSmall(1)));
    }

    fn singleton_k4_cert(g: &Graph) -> MinorCertificate {
        let nodes = (0..4)
            .map(|v| MinorNode {
                label: MinorLabel::Part(v),
                vertices: vec![v],
            })
            .collect();
        let edges = (0..g.m())
            .map(|e| MinorEdge {
                a: g.edge(e).u,
                b: g.edge(e).v,
                witness: e,
            })
            .collect();
        MinorCertificate::new(1, nodes, edges)
    }

    #[test]
    fn k4_minor_is_valid() {
        let g = k4();
        let cert = singleton_k4_cert(&g);
        assert_eq!(validate_minor(&g, &cert), Ok(()));
        assert_eq!(cert.density, Fraction::new(6, 4));
    }

    #[test]
    fn minor_violations() {
        let g = k4();
        let mut cert = singleton_k4_cert(&g);
        cert.nodes[1].vertices = vec![0, 1];
        assert!(matches!(
            validate_minor(&g, &cert),
            Err(MinorViolation::NotDisjoint { vertex: 0, .. })
        ));

        let mut cert = singleton_k4_cert(&g);
        cert.nodes[0].vertices = vec![0, 1];
        cert.nodes[1].vertices = vec![2];
        cert.nodes[2].vertices = vec![3];
        cert.nodes.pop();
        let inner = g.edge_between(0, 1).unwrap();
        cert.edges = vec![MinorEdge { a: 0, b: 1, witness: inner }];
        cert.density = Fraction::new(1, 3);
        assert_eq!(
            validate_minor(&g, &cert),
            Err(MinorViolation::EdgeRealization { edge: 0 })
        );

        let mut cert = singleton_k4_cert(&g);
        cert.density = Fraction::new(2, 1);
        assert!(matches!(
            validate_minor(&g, &cert),
            Err(MinorViolation::DensityMismatch { .. })
        ));
    }
}
