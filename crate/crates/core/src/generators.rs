//! Deterministic instance families.
//!
//! Every generator is a pure function of its parameters and seed. The random
//! ones draw from a ChaCha8 stream seeded with `seed`.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, GraphError, NodeId, Partition, MAX_WEIGHT};
use crate::ratio::Fraction;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("invalid parameters: {0}")]
    Params(&'static str),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `w × h` grid; node `(row, col)` is `row * w + col`.
pub fn gen_grid(w: usize, h: usize) -> Result<Graph, GenError> {
    if w == 0 || h == 0 {
        return Err(GenError::Params("grid sides must be at least 1"));
    }
    let id = |r: usize, c: usize| r * w + c;
    let mut edges = Vec::with_capacity(2 * w * h);
    for r in 0..h {
        for c in 1..w {
            edges.push((id(r, c - 1), id(r, c)));
        }
    }
    for r in 1..h {
        for c in 0..w {
            edges.push((id(r - 1, c), id(r, c)));
        }
    }
    Ok(Graph::new(w * h, edges)?)
}

/// Hub `0` joined to every node of the rim cycle `1..n`.
pub fn gen_wheel(n: usize) -> Result<Graph, GenError> {
    if n < 4 {
        return Err(GenError::Params("a wheel needs at least 4 nodes"));
    }
    let spokes = (1..n).map(|v| (0, v));
    let rim = (1..n - 1).map(|v| (v, v + 1)).chain([(n - 1, 1)]);
    Ok(Graph::new(n, spokes.chain(rim))?)
}

/// Random `k`-tree on `n` nodes: start from `K_{k+1}` and attach every
/// further node to a uniformly chosen existing `k`-clique.
pub fn gen_ktree(n: usize, k: usize, seed: u64) -> Result<Graph, GenError> {
    if k == 0 || n < k + 1 {
        return Err(GenError::Params("a k-tree needs k >= 1 and n >= k + 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..=k {
        for v in u + 1..=k {
            edges.push((u, v));
        }
    }
    let mut cliques: Vec<Vec<NodeId>> = (0..=k)
        .map(|skip| (0..=k).filter(|&x| x != skip).collect())
        .collect();
    for v in k + 1..n {
        let base = cliques[rng.gen_range(0..cliques.len())].clone();
        for &u in &base {
            edges.push((u, v));
        }
        for skip in 0..k {
            let mut c: Vec<NodeId> = base
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &x)| x)
                .collect();
            c.push(v);
            cliques.push(c);
        }
    }
    Ok(Graph::new(n, edges)?)
}

/// Random recursive tree: node `v > 0` hangs off a uniform node in `0..v`.
pub fn gen_random_tree(n: usize, seed: u64) -> Result<Graph, GenError> {
    if n == 0 {
        return Err(GenError::Params("a tree needs at least one node"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<_> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    Ok(Graph::new(n, edges)?)
}

/// Connected parts grown by a multi-source BFS from `count` random roots.
/// Part `i` grows from the `i`-th root drawn.
pub fn gen_parts_random(g: &Graph, count: usize, seed: u64) -> Result<Partition, GenError> {
    if count == 0 || count > g.n() {
        return Err(GenError::Params("part count must be in 1..=n"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<NodeId> = (0..g.n()).collect();
    nodes.shuffle(&mut rng);
    let mut owner = vec![None; g.n()];
    let mut queue = VecDeque::new();
    for (i, &root) in nodes[..count].iter().enumerate() {
        owner[root] = Some(i);
        queue.push_back(root);
    }
    while let Some(x) = queue.pop_front() {
        let part = owner[x];
        for &(y, _) in g.neighbors(x) {
            if owner[y].is_none() {
                owner[y] = part;
                queue.push_back(y);
            }
        }
    }
    let mut parts = vec![Vec::new(); count];
    for (v, o) in owner.iter().enumerate() {
        if let Some(i) = o {
            parts[*i].push(v);
        }
    }
    Ok(Partition::new(g.n(), parts))
}

/// Pairwise distinct weights drawn uniformly from `[1, 2^31)`.
pub fn assign_weights(g: &Graph, seed: u64) -> Result<Graph, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used = BTreeSet::new();
    let mut weights = Vec::with_capacity(g.m());
    while weights.len() < g.m() {
        let w = rng.gen_range(1..=MAX_WEIGHT);
        if used.insert(w) {
            weights.push(w);
        }
    }
    Ok(g.with_weights(&weights)?)
}

/// Comb over a star: root `0`, spine nodes `1..=columns`, and `rows` parts,
/// each a path that visits one child of every spine node. Contracting the
/// parts gives `K_{columns, rows}` plus the root, so the minor density grows
/// like `columns * rows / (columns + rows)` while the BFS tree from `0` has
/// depth 2.
pub fn gen_comb(columns: usize, rows: usize) -> Result<(Graph, Partition), GenError> {
    if columns == 0 || rows == 0 {
        return Err(GenError::Params("comb needs at least one column and one row"));
    }
    let cell = |r: usize, c: usize| 1 + columns + r * columns + c;
    let n = 1 + columns + rows * columns;
    let mut edges = Vec::new();
    for c in 0..columns {
        edges.push((0, 1 + c));
    }
    for r in 0..rows {
        for c in 0..columns {
            edges.push((1 + c, cell(r, c)));
        }
    }
    for r in 0..rows {
        for c in 1..columns {
            edges.push((cell(r, c - 1), cell(r, c)));
        }
    }
    let parts = (0..rows)
        .map(|r| (0..columns).map(|c| cell(r, c)).collect())
        .collect();
    Ok((Graph::new(n, edges)?, Partition::new(n, parts)))
}

/// Original (1-based) name of a lower-bound node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LowerBoundLabel {
    /// `p_i`
    Top(usize),
    /// `v_{i,j}`
    Grid(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowerBoundMeta {
    pub delta_prime: usize,
    pub d_prime: usize,
    pub delta: usize,
    pub k: usize,
    /// `D = k * delta`.
    pub depth: usize,
    /// Number of `p` nodes, `(delta - 1) k + 1`.
    pub top_nodes: usize,
    /// Rows, columns and row length of the grid part, `(delta - 1) D + 1`.
    pub side: usize,
    pub node_count: usize,
    pub edge_count: usize,
    /// `(delta' - 3) D' / 6` as a reduced fraction.
    pub quality_floor: Fraction,
}

#[derive(Clone, Debug)]
pub struct LowerBoundInstance {
    pub graph: Graph,
    /// The row paths, in row order. Top-path nodes are unassigned.
    pub parts: Partition,
    pub meta: LowerBoundMeta,
    pub labels: Vec<LowerBoundLabel>,
}

impl LowerBoundMeta {
    pub fn new(delta_prime: usize, d_prime: usize) -> Result<Self, GenError> {
        if delta_prime < 5 || 2 * delta_prime > d_prime {
            return Err(GenError::Params("need 5 <= delta' <= D'/2"));
        }
        let delta = delta_prime - 2;
        let k = d_prime / (2 * delta);
        let depth = k * delta;
        let top_nodes = (delta - 1) * k + 1;
        let side = (delta - 1) * depth + 1;
        let edge_count = (top_nodes - 1) + side * (side - 1) + delta * (side - 1) + delta * delta;
        Ok(LowerBoundMeta {
            delta_prime,
            d_prime,
            delta,
            k,
            depth,
            top_nodes,
            side,
            node_count: top_nodes + side * side,
            edge_count,
            quality_floor: Fraction::new(((delta_prime - 3) * d_prime) as u64, 6),
        })
    }
}

/// The lower-bound topology: a top path `p_1..p_{(δ-1)k+1}`, a square of row
/// paths `v_{i,*}`, column paths at every `D`-th column, and attachments
/// `{v_{(j'-1)D+1,(j-1)D+1}, p_{(j-1)k+1}}` for `j, j' ∈ [δ]`.
///
/// Ids: `p_i` is `i - 1`; `v_{i,j}` is `top_nodes + (i - 1) * side + (j - 1)`.
pub fn gen_lower_bound(delta_prime: usize, d_prime: usize) -> Result<LowerBoundInstance, GenError> {
    let meta = LowerBoundMeta::new(delta_prime, d_prime)?;
    let LowerBoundMeta { delta, k, depth, top_nodes, side, .. } = meta;
    let p = |i: usize| i - 1;
    let v = |i: usize, j: usize| top_nodes + (i - 1) * side + (j - 1);

    let mut edges = Vec::with_capacity(meta.edge_count);
    for i in 1..top_nodes {
        edges.push((p(i), p(i + 1)));
    }
    for i in 1..=side {
        for j in 1..side {
            edges.push((v(i, j), v(i, j + 1)));
        }
    }
    for j in 1..=delta {
        let col = (j - 1) * depth + 1;
        for i in 1..side {
            edges.push((v(i, col), v(i + 1, col)));
        }
    }
    for j in 1..=delta {
        for jp in 1..=delta {
            edges.push((v((jp - 1) * depth + 1, (j - 1) * depth + 1), p((j - 1) * k + 1)));
        }
    }

    let n = meta.node_count;
    let graph = Graph::new(n, edges)?;
    let parts = (1..=side)
        .map(|i| (1..=side).map(|j| v(i, j)).collect())
        .collect();
    let labels = (1..=top_nodes)
        .map(LowerBoundLabel::Top)
        .chain((1..=side).flat_map(|i| (1..=side).map(move |j| LowerBoundLabel::Grid(i, j))))
        .collect();
    Ok(LowerBoundInstance {
        graph,
        parts: Partition::new(n, parts),
        meta,
        labels,
    })
}

/// Edge ids of the `δ(δ-1)` attachments that touch rows other than the first.
/// Removing them leaves a planar graph.
pub fn lower_bound_extra_attachments(inst: &LowerBoundInstance) -> Vec<usize> {
    let LowerBoundMeta { delta, top_nodes, side, .. } = inst.meta;
    let first = (top_nodes - 1) + side * (side - 1) + delta * (side - 1);
    (0..delta)
        .flat_map(|j| (1..delta).map(move |jp| first + j * delta + jp))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{diameter, validate_partition};

    #[test]
    fn grid_counts() {
        let g = gen_grid(1, 3).unwrap();
        assert_eq!((g.n(), g.m()), (3, 2));
        let g = gen_grid(2, 2).unwrap();
        assert_eq!((g.n(), g.m()), (4, 4));
        assert!((0..4).all(|v| g.degree(v) == 2));
        let g = gen_grid(5, 5).unwrap();
        assert_eq!((g.n(), g.m()), (25, 2 * 25 - 5 - 5));
        assert!(gen_grid(0, 3).is_err());
    }

    #[test]
    fn wheel_shapes() {
        let k4 = gen_wheel(4).unwrap();
        assert_eq!(k4.m(), 6);
        assert!((0..4).all(|v| k4.degree(v) == 3));
        let w = gen_wheel(10).unwrap();
        assert_eq!(w.m(), 18);
        assert_eq!(diameter(&w).unwrap(), 2);
        assert!(gen_wheel(3).is_err());
    }

    #[test]
    fn ktree_edge_counts() {
        let g = gen_ktree(4, 3, 7).unwrap();
        assert_eq!(g.m(), 6);
        let t = gen_ktree(10, 1, 7).unwrap();
        assert_eq!(t.m(), 9);
        assert!(t.is_connected());
        let g = gen_ktree(50, 3, 7).unwrap();
        assert_eq!(g.m(), 3 * 50 - 6);
        assert_eq!(g, gen_ktree(50, 3, 7).unwrap());
        assert!(gen_ktree(3, 3, 0).is_err());
    }

    #[test]
    fn random_parts() {
        let g = gen_grid(5, 5).unwrap();
        let one = gen_parts_random(&g, 1, 3).unwrap();
        assert_eq!(one.parts(), &[(0..25).collect::<Vec<_>>()]);
        let all = gen_parts_random(&g, 25, 3).unwrap();
        assert!(all.parts().iter().all(|p| p.len() == 1));
        let four = gen_parts_random(&g, 4, 3).unwrap();
        assert_eq!(four.k(), 4);
        assert_eq!(validate_partition(&g, &four), Ok(()));
        assert_eq!(four, gen_parts_random(&g, 4, 3).unwrap());
        assert!(gen_parts_random(&g, 0, 3).is_err());
        assert!(gen_parts_random(&g, 26, 3).is_err());
    }

    #[test]
    fn weights_are_distinct_and_seeded() {
        let g = gen_grid(6, 6).unwrap();
        let a = assign_weights(&g, 1).unwrap();
        a.check_distinct_weights().unwrap();
        assert_eq!(a, assign_weights(&g, 1).unwrap());
        assert_ne!(a, assign_weights(&g, 2).unwrap());
    }

    #[test]
    fn comb_shape() {
        let (g, p) = gen_comb(9, 16).unwrap();
        assert_eq!(g.n(), 1 + 9 + 144);
        assert_eq!(g.m(), 9 + 144 + 16 * 8);
        assert_eq!(validate_partition(&g, &p), Ok(()));
    }

    #[test]
    fn lower_bound_small_case() {
        let inst = gen_lower_bound(5, 12).unwrap();
        let m = &inst.meta;
        assert_eq!((m.delta, m.k, m.depth), (3, 2, 6));
        assert_eq!((m.top_nodes, m.side), (5, 13));
        assert_eq!(inst.graph.n(), 174);
        assert_eq!(inst.graph.m(), m.edge_count);
        assert_eq!(m.quality_floor, Fraction::new(4, 1));
        assert_eq!(inst.parts.k(), 13);
        assert_eq!(validate_partition(&inst.graph, &inst.parts), Ok(()));
        assert_eq!(inst.labels[0], LowerBoundLabel::Top(1));
        assert_eq!(inst.labels[5], LowerBoundLabel::Grid(1, 1));
    }

    #[test]
    fn lower_bound_rejects_bad_parameters() {
        assert!(gen_lower_bound(4, 12).is_err());
        assert!(gen_lower_bound(7, 13).is_err());
    }
}
