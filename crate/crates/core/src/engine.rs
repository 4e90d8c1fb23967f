//! Certifying construction of tree-restricted shortcuts.
//!
//! For a density guess `δ` and a rooted tree of depth `D`, tree edges are
//! marked overcongested bottom-up at threshold `c = 8δD`. Either at least
//! half of the parts touch at most `8δ` overcongested edges, in which case
//! those parts get a partial shortcut of congestion below `c` and at most
//! `8δ` blocks, or a random sample of the parts and overcongested edges
//! yields a minor of density above `δ`. [`construct_full`] doubles `δ` until
//! the first case covers every part, collecting the certificates on the way.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::mem;

use rand::Rng;

use crate::graph::{EdgeId, Graph, NodeId, Partition, RootedTree};
use crate::ratio::Fraction;

/// Overcongested tree edges and the parts below them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongestionMarking {
    threshold: usize,
    active: Vec<usize>,
    overcongested: BTreeSet<EdgeId>,
    parts_below: BTreeMap<EdgeId, Vec<usize>>,
    reps: BTreeMap<(EdgeId, usize), NodeId>,
    lower: BTreeMap<EdgeId, NodeId>,
    in_o: Vec<bool>,
}

impl CongestionMarking {
    /// The threshold `c`.
    pub fn threshold(&self) -> usize {
        self.threshold
    }

    /// Part indices the marking was computed for, ascending.
    pub fn active_parts(&self) -> &[usize] {
        &self.active
    }

    /// The set `O`.
    pub fn overcongested(&self) -> &BTreeSet<EdgeId> {
        &self.overcongested
    }

    pub fn is_overcongested(&self, e: EdgeId) -> bool {
        self.in_o.get(e).copied().unwrap_or(false)
    }

    /// `I_e` for `e ∈ O`, ascending.
    pub fn parts_below(&self, e: EdgeId) -> Option<&[usize]> {
        self.parts_below.get(&e).map(Vec::as_slice)
    }

    /// Smallest node of part `i` below `e` that is reachable from the lower
    /// endpoint of `e` without crossing another overcongested edge.
    pub fn representative(&self, e: EdgeId, part: usize) -> Option<NodeId> {
        self.reps.get(&(e, part)).copied()
    }

    /// Lower endpoint `v_e` of an overcongested edge.
    pub fn lower_endpoint(&self, e: EdgeId) -> Option<NodeId> {
        self.lower.get(&e).copied()
    }

    /// Degree of part `i` in the bipartite congestion graph.
    pub fn part_degree(&self, part: usize) -> usize {
        self.parts_below
            .values()
            .filter(|parts| parts.binary_search(&part).is_ok())
            .count()
    }

    pub fn bipartite(&self) -> BipartiteCongestionGraph {
        let mut part_degree: BTreeMap<usize, usize> =
            self.active.iter().map(|&i| (i, 0)).collect();
        let mut edge_degree = BTreeMap::new();
        let mut links = Vec::new();
        for (&e, parts) in &self.parts_below {
            edge_degree.insert(e, parts.len());
            for &i in parts {
                links.push((e, i));
                *part_degree.entry(i).or_default() += 1;
            }
        }
        BipartiteCongestionGraph {
            edge_nodes: self.overcongested.iter().copied().collect(),
            part_nodes: self.active.clone(),
            links,
            edge_degree,
            part_degree,
        }
    }
}

/// The bipartite graph `B` between overcongested edges and parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteCongestionGraph {
    pub edge_nodes: Vec<EdgeId>,
    pub part_nodes: Vec<usize>,
    /// `(e, i)` with `i ∈ I_e`, sorted.
    pub links: Vec<(EdgeId, usize)>,
    pub edge_degree: BTreeMap<EdgeId, usize>,
    pub part_degree: BTreeMap<usize, usize>,
}

/// Marks overcongested edges for every part of `p`.
pub fn mark_overcongested(t: &RootedTree, p: &Partition, threshold: usize) -> CongestionMarking {
    let all: Vec<usize> = (0..p.k()).collect();
    mark_overcongested_for(t, p, &all, threshold)
}

/// Marks overcongested edges considering only the parts listed in `active`.
///
/// Tree edges are processed by decreasing depth of their lower endpoint. Each
/// node carries the parts met in its subtree, cut at edges already in `O`,
/// together with the smallest such node per part.
pub fn mark_overcongested_for(
    t: &RootedTree,
    p: &Partition,
    active: &[usize],
    threshold: usize,
) -> CongestionMarking {
    let threshold = threshold.max(1);
    let mut is_active = vec![false; p.k()];
    for &i in active {
        is_active[i] = true;
    }
    let max_edge = (0..t.n()).filter_map(|v| t.parent_edge(v)).max();
    let mut marking = CongestionMarking {
        threshold,
        active: (0..p.k()).filter(|&i| is_active[i]).collect(),
        overcongested: BTreeSet::new(),
        parts_below: BTreeMap::new(),
        reps: BTreeMap::new(),
        lower: BTreeMap::new(),
        in_o: vec![false; max_edge.map_or(0, |e| e + 1)],
    };

    let mut below: Vec<BTreeMap<usize, NodeId>> = vec![BTreeMap::new(); t.n()];
    for &v in t.bfs_order().iter().rev() {
        let mut set = mem::take(&mut below[v]);
        if let Some(i) = p.part_of(v).filter(|&i| is_active[i]) {
            let rep = set.entry(i).or_insert(v);
            *rep = (*rep).min(v);
        }
        let Some(e) = t.parent_edge(v) else {
            continue;
        };
        if set.len() >= threshold {
            marking.overcongested.insert(e);
            marking.in_o[e] = true;
            marking.lower.insert(e, v);
            marking.parts_below.insert(e, set.keys().copied().collect());
            marking.reps.extend(set.into_iter().map(|(i, r)| ((e, i), r)));
        } else {
            let target = &mut below[t.parent(v)];
            if target.len() < set.len() {
                mem::swap(target, &mut set);
            }
            for (i, r) in set {
                let rep = target.entry(i).or_insert(r);
                *rep = (*rep).min(r);
            }
        }
    }
    marking
}

/// Shortcut edges for a subset of the parts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialShortcut {
    /// Covered part indices, ascending.
    pub covered: Vec<usize>,
    /// Tree edges assigned to each covered part, ascending.
    pub edges: BTreeMap<usize, Vec<EdgeId>>,
}

/// Case I: if at least `⌈k/2⌉` of the marked parts have degree at most `8δ`
/// in the bipartite congestion graph, every such part receives all of its
/// ancestor edges in the forest `T \ O`.
pub fn case_one_partial(
    marking: &CongestionMarking,
    t: &RootedTree,
    p: &Partition,
    delta: usize,
) -> Option<PartialShortcut> {
    let limit = 8 * delta;
    let bip = marking.bipartite();
    let qualifying: Vec<usize> = marking
        .active
        .iter()
        .copied()
        .filter(|i| bip.part_degree.get(i).copied().unwrap_or(0) <= limit)
        .collect();
    if qualifying.len() < marking.active.len().div_ceil(2) {
        return None;
    }
    let edges = qualifying
        .iter()
        .map(|&i| (i, forest_ancestor_edges(marking, t, p.part(i))))
        .collect();
    Some(PartialShortcut {
        covered: qualifying,
        edges,
    })
}

fn forest_ancestor_edges(marking: &CongestionMarking, t: &RootedTree, part: &[NodeId]) -> Vec<EdgeId> {
    let mut edges = BTreeSet::new();
    for &u in part {
        let mut w = u;
        while let Some(e) = t.parent_edge(w) {
            if marking.is_overcongested(e) || !edges.insert(e) {
                break;
            }
            w = t.parent(w);
        }
    }
    edges.into_iter().collect()
}

/// What a minor node stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MinorLabel {
    Part(usize),
    EdgeNode(EdgeId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinorNode {
    pub label: MinorLabel,
    /// Branch set in the host graph, ascending.
    pub vertices: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinorEdge {
    pub a: usize,
    pub b: usize,
    /// Host edge with one endpoint in each branch set.
    pub witness: EdgeId,
}

/// A minor of the host graph, given by disjoint connected branch sets and
/// witness edges, together with its exact density.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinorCertificate {
    /// The density guess this certificate refutes.
    pub delta: usize,
    pub nodes: Vec<MinorNode>,
    pub edges: Vec<MinorEdge>,
    pub density: Fraction,
}

impl MinorCertificate {
    pub fn new(delta: usize, nodes: Vec<MinorNode>, edges: Vec<MinorEdge>) -> Self {
        let density = Fraction::new(edges.len() as u64, nodes.len() as u64);
        MinorCertificate {
            delta,
            nodes,
            edges,
            density,
        }
    }
}

/// Attempts allowed to Case II sampling for a tree of depth `depth`.
pub fn sampling_attempts(depth: usize) -> usize {
    64 * depth.max(1)
}

/// Probability with which each part joins the sample.
pub fn sampling_probability(depth: usize) -> f64 {
    if depth == 0 {
        0.25
    } else {
        1.0 / (4 * depth) as f64
    }
}

/// Case II: samples parts with probability `1/(4D)` and keeps the first
/// induced minor whose density exceeds `delta`. Gives up after
/// [`sampling_attempts`] tries.
pub fn sample_dense_minor<R: Rng + ?Sized>(
    g: &Graph,
    t: &RootedTree,
    p: &Partition,
    marking: &CongestionMarking,
    delta: usize,
    rng: &mut R,
) -> Option<MinorCertificate> {
    if marking.overcongested.is_empty() {
        return None;
    }
    let depth = t.height();
    let prob = sampling_probability(depth);
    let mut sampled_node = vec![false; g.n()];
    for _ in 0..sampling_attempts(depth) {
        let cert = sample_once(t, p, marking, delta, prob, &mut sampled_node, rng);
        if cert.density.exceeds(delta as u64) {
            return Some(cert);
        }
    }
    None
}

fn sample_once<R: Rng + ?Sized>(
    t: &RootedTree,
    p: &Partition,
    marking: &CongestionMarking,
    delta: usize,
    prob: f64,
    sampled_node: &mut [bool],
    rng: &mut R,
) -> MinorCertificate {
    sampled_node.fill(false);
    let mut nodes = Vec::new();
    let mut part_index = BTreeMap::new();
    for &i in &marking.active {
        if rng.gen_bool(prob) {
            for &v in p.part(i) {
                sampled_node[v] = true;
            }
            part_index.insert(i, nodes.len());
            nodes.push(MinorNode {
                label: MinorLabel::Part(i),
                vertices: p.part(i).to_vec(),
            });
        }
    }

    let mut edges = Vec::new();
    let mut stack = Vec::new();
    for &e in &marking.overcongested {
        let top = marking.lower[&e];
        if sampled_node[top] {
            continue;
        }
        let mut branch = Vec::new();
        stack.push(top);
        while let Some(x) = stack.pop() {
            branch.push(x);
            for &c in t.children(x) {
                let open = t.parent_edge(c).is_some_and(|ce| !marking.is_overcongested(ce));
                if open && !sampled_node[c] {
                    stack.push(c);
                }
            }
        }
        branch.sort_unstable();
        let me = nodes.len();
        nodes.push(MinorNode {
            label: MinorLabel::EdgeNode(e),
            vertices: branch,
        });

        for &i in &marking.parts_below[&e] {
            let Some(&pi) = part_index.get(&i) else {
                continue;
            };
            let rep = marking.reps[&(e, i)];
            // Path from v_e down to the representative, v_e included and
            // the representative excluded, must avoid sampled parts.
            let mut w = t.parent(rep);
            let present = loop {
                if sampled_node[w] {
                    break false;
                }
                if w == top {
                    break true;
                }
                w = t.parent(w);
            };
            if present {
                if let Some(witness) = t.parent_edge(rep) {
                    edges.push(MinorEdge {
                        a: me,
                        b: pi,
                        witness,
                    });
                }
            }
        }
    }
    MinorCertificate::new(delta, nodes, edges)
}

/// Result of one partial-shortcut round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartialOutcome {
    CaseOne(PartialShortcut),
    /// Case I failed. `None` means sampling found no certificate within its
    /// budget (uncertified infeasibility).
    CaseTwo(Option<MinorCertificate>),
}

/// Congestion threshold `8 δ max(D, 1)`.
pub fn congestion_threshold(delta: usize, depth: usize) -> usize {
    8 * delta * depth.max(1)
}

/// One round over all parts of `p`.
pub fn construct_partial<R: Rng + ?Sized>(
    g: &Graph,
    t: &RootedTree,
    p: &Partition,
    delta: usize,
    rng: &mut R,
) -> PartialOutcome {
    let all: Vec<usize> = (0..p.k()).collect();
    construct_partial_for(g, t, p, &all, delta, rng)
}

/// One round over the parts listed in `active`.
pub fn construct_partial_for<R: Rng + ?Sized>(
    g: &Graph,
    t: &RootedTree,
    p: &Partition,
    active: &[usize],
    delta: usize,
    rng: &mut R,
) -> PartialOutcome {
    let delta = delta.max(1);
    let marking = mark_overcongested_for(t, p, active, congestion_threshold(delta, t.height()));
    match case_one_partial(&marking, t, p, delta) {
        Some(partial) => PartialOutcome::CaseOne(partial),
        None => PartialOutcome::CaseTwo(sample_dense_minor(g, t, p, &marking, delta, rng)),
    }
}

/// When and where a part's shortcut edges were fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Provenance {
    pub delta: usize,
    /// 1-based partial round within that `delta`.
    pub iteration: usize,
}

/// Per-part shortcut edge sets `H_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shortcut {
    edges: Vec<Vec<EdgeId>>,
    tree_restricted: bool,
    provenance: Vec<Option<Provenance>>,
}

impl Shortcut {
    /// A hand-made shortcut. It makes no tree-restriction claim; use
    /// [`crate::audit::check_tree_restricted`] to test one.
    pub fn from_sets(mut edges: Vec<Vec<EdgeId>>) -> Self {
        for set in &mut edges {
            set.sort_unstable();
            set.dedup();
        }
        let k = edges.len();
        Shortcut {
            edges,
            tree_restricted: false,
            provenance: vec![None; k],
        }
    }

    pub fn empty(k: usize) -> Self {
        Self::from_sets(vec![Vec::new(); k])
    }

    pub fn k(&self) -> usize {
        self.edges.len()
    }

    pub fn part_edges(&self, i: usize) -> &[EdgeId] {
        &self.edges[i]
    }

    pub fn sets(&self) -> &[Vec<EdgeId>] {
        &self.edges
    }

    /// Set by the engine, which only emits tree edges.
    pub fn tree_restricted(&self) -> bool {
        self.tree_restricted
    }

    pub fn provenance(&self, i: usize) -> Option<Provenance> {
        self.provenance[i]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    /// Largest density guess tried; `None` means `n`.
    pub max_delta: Option<usize>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { max_delta: None }
    }
}

/// How one density guess ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeltaPass {
    pub delta: usize,
    /// Partial rounds run under this guess.
    pub iterations: usize,
    /// `None` if every part got covered, otherwise whether the Case II
    /// event came with a certificate.
    pub case_two_certified: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstructionStats {
    pub passes: Vec<DeltaPass>,
    pub case_two_events: usize,
    pub uncertified_events: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Construction {
    pub shortcut: Shortcut,
    pub delta_final: usize,
    pub certificates: Vec<MinorCertificate>,
    pub stats: ConstructionStats,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("density guess exceeded the cap {max_delta} ({} certificates collected)", certificates.len())]
    MaxDeltaExceeded {
        max_delta: usize,
        certificates: Vec<MinorCertificate>,
    },
    #[error("graph, tree and partition disagree on the node count")]
    SizeMismatch,
}

/// Full shortcut by doubling `δ` from 1. Under a fixed `δ` partial rounds
/// run on the still-uncovered parts; a Case II event discards every
/// assignment made under that `δ`, doubles it, and starts over with all
/// parts.
pub fn construct_full<R: Rng + ?Sized>(
    g: &Graph,
    t: &RootedTree,
    p: &Partition,
    config: &EngineConfig,
    rng: &mut R,
) -> Result<Construction, EngineError> {
    if g.n() != t.n() || g.n() != p.n() {
        return Err(EngineError::SizeMismatch);
    }
    let max_delta = config.max_delta.unwrap_or(g.n()).max(1);
    let mut certificates = Vec::new();
    let mut stats = ConstructionStats::default();
    let mut delta = 1;
    'guess: loop {
        if delta > max_delta {
            return Err(EngineError::MaxDeltaExceeded {
                max_delta,
                certificates,
            });
        }
        let mut edges = vec![Vec::new(); p.k()];
        let mut provenance = vec![None; p.k()];
        let mut remaining: Vec<usize> = (0..p.k()).collect();
        let mut iteration = 0;
        while !remaining.is_empty() {
            iteration += 1;
            match construct_partial_for(g, t, p, &remaining, delta, rng) {
                PartialOutcome::CaseOne(partial) => {
                    for (i, set) in partial.edges {
                        edges[i] = set;
                        provenance[i] = Some(Provenance { delta, iteration });
                    }
                    remaining.retain(|i| partial.covered.binary_search(i).is_err());
                }
                PartialOutcome::CaseTwo(cert) => {
                    stats.case_two_events += 1;
                    stats.passes.push(DeltaPass {
                        delta,
                        iterations: iteration,
                        case_two_certified: Some(cert.is_some()),
                    });
                    match cert {
                        Some(cert) => certificates.push(cert),
                        None => stats.uncertified_events += 1,
                    }
                    delta *= 2;
                    continue 'guess;
                }
            }
        }
        stats.passes.push(DeltaPass {
            delta,
            iterations: iteration,
            case_two_certified: None,
        });
        return Ok(Construction {
            shortcut: Shortcut {
                edges,
                tree_restricted: true,
                provenance,
            },
            delta_final: delta,
            certificates,
            stats,
        });
    }
}
