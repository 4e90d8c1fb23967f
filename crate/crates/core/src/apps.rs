//! Boruvka MST and subgraph component labeling on top of partwise
//! aggregation. Fragment relabeling between phases is done centrally; only
//! the aggregations are charged.

use alloc::vec;
use alloc::vec::Vec;

use petgraph::unionfind::UnionFind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::audit::{audit, ceil_log2};
use crate::engine::{construct_full, EngineConfig, EngineError, Shortcut};
use crate::graph::{bfs_tree, EdgeId, Graph, GraphError, NodeId, Partition};
use crate::sim::{id_bits, partwise_aggregate, AggOp, AggregationTask, SimConfig, SimError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("phase {phase}: fragment {fragment} has no outgoing edge")]
    Stuck { phase: usize, fragment: usize },
}

/// Exact MST by sorting and union-find.
pub fn kruskal_oracle(g: &Graph) -> Result<(Vec<EdgeId>, u64), GraphError> {
    g.check_distinct_weights()?;
    if !g.is_connected() {
        return Err(unreachable_node(g));
    }
    let mut order: Vec<EdgeId> = (0..g.m()).collect();
    order.sort_by_key(|&e| (g.weight(e), e));
    let mut uf = UnionFind::<usize>::new(g.n());
    let mut tree = Vec::with_capacity(g.n().saturating_sub(1));
    let mut total = 0u64;
    for e in order {
        let edge = g.edge(e);
        if uf.union(edge.u, edge.v) {
            tree.push(e);
            total += u64::from(g.weight(e).unwrap_or(0));
        }
    }
    tree.sort_unstable();
    Ok((tree, total))
}

fn unreachable_node(g: &Graph) -> GraphError {
    let node = g
        .distances_from(0)
        .iter()
        .position(Option::is_none)
        .unwrap_or(0);
    GraphError::Disconnected { from: 0, node }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhaseStats {
    pub fragments: usize,
    pub delta: usize,
    pub congestion: usize,
    pub quality: Option<usize>,
    pub rounds: usize,
    pub messages: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MstResult {
    pub tree_edges: Vec<EdgeId>,
    pub total_weight: u64,
    pub phases: usize,
    pub rounds_total: usize,
    pub messages: usize,
    /// Depth of the BFS tree from node 0.
    pub depth: usize,
    /// Largest `δ` any phase's shortcut construction settled on.
    pub delta_max: usize,
    pub per_phase: Vec<PhaseStats>,
}

struct Phase {
    stats: PhaseStats,
    /// Per fragment, the minimum aggregated key.
    chosen: Vec<Option<i64>>,
}

/// One Boruvka phase: shortcut for the fragments, then a min-aggregation of
/// each node's best outgoing key.
fn run_phase(
    g: &Graph,
    fragments: &Partition,
    keys: Vec<Option<i64>>,
    phase: usize,
    msg_bits: u32,
    sim: &SimConfig,
    engine: &EngineConfig,
) -> Result<Phase, AppError> {
    let (shortcut, delta, report) = if g.is_connected() {
        let t = bfs_tree(g, 0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
        rng.set_stream(phase as u64);
        let built = construct_full(g, &t, fragments, engine, &mut rng)?;
        let report = audit(g, &t, fragments, &built.shortcut).ok();
        (built.shortcut, built.delta_final, report)
    } else {
        (Shortcut::empty(fragments.k()), 1, None)
    };
    let cfg = SimConfig {
        msg_bits: sim.msg_bits.max(msg_bits),
        seed: sim.seed.wrapping_add(phase as u64),
        ..*sim
    };
    let task = AggregationTask {
        values: keys,
        op: AggOp::Min,
    };
    let out = partwise_aggregate(g, fragments, &shortcut, &task, &cfg)?;
    Ok(Phase {
        stats: PhaseStats {
            fragments: fragments.k(),
            delta,
            congestion: report.as_ref().map_or(0, |r| r.congestion),
            quality: report.and_then(|r| r.quality),
            rounds: out.trace.rounds_used,
            messages: out.trace.messages_sent,
        },
        chosen: out.per_part,
    })
}

fn fragments_of(uf: &UnionFind<usize>, n: usize) -> Partition {
    Partition::from_labels(&uf.clone().into_labeling()[..n])
}

/// Boruvka with shortcut-based min-outgoing-edge selection, keyed by
/// `(weight, edge id)`.
pub fn boruvka_mst(g: &Graph, sim: &SimConfig, engine: &EngineConfig) -> Result<MstResult, AppError> {
    g.check_distinct_weights()?;
    if !g.is_connected() {
        return Err(unreachable_node(g).into());
    }
    let n = g.n();
    let depth = bfs_tree(g, 0)?.height();
    let eid_bits = ceil_log2(g.m()).max(1) as u32;
    let key_bits = 2 + id_bits(n) + 1 + 31 + eid_bits;
    let mask = (1i64 << eid_bits) - 1;

    let mut uf = UnionFind::<usize>::new(n);
    let mut result = MstResult {
        tree_edges: Vec::new(),
        total_weight: 0,
        phases: 0,
        rounds_total: 0,
        messages: 0,
        depth,
        delta_max: 0,
        per_phase: Vec::new(),
    };
    loop {
        let fragments = fragments_of(&uf, n);
        if fragments.k() <= 1 {
            break;
        }
        let keys = (0..n)
            .map(|v| {
                g.neighbors(v)
                    .iter()
                    .filter(|&&(u, _)| !uf.equiv(u, v))
                    .map(|&(_, e)| (i64::from(g.weight(e).unwrap_or(0)) << eid_bits) | e as i64)
                    .min()
            })
            .collect();
        let phase = run_phase(g, &fragments, keys, result.phases, key_bits, sim, engine)?;
        result.phases += 1;
        for (i, key) in phase.chosen.iter().enumerate() {
            let key = key.ok_or(AppError::Stuck {
                phase: result.phases,
                fragment: i,
            })?;
            let e = (key & mask) as EdgeId;
            let edge = g.edge(e);
            if uf.union(edge.u, edge.v) {
                result.tree_edges.push(e);
                result.total_weight += u64::from(g.weight(e).unwrap_or(0));
            }
        }
        result.rounds_total += phase.stats.rounds;
        result.messages += phase.stats.messages;
        result.delta_max = result.delta_max.max(phase.stats.delta);
        result.per_phase.push(phase.stats);
    }
    result.tree_edges.sort_unstable();
    Ok(result)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labeling {
    /// Smallest node of each node's component.
    pub labels: Vec<NodeId>,
    pub phases: usize,
    pub rounds_total: usize,
    pub messages: usize,
}

/// Components of the spanning subgraph with edge set `subgraph`, found by
/// unweighted Boruvka: each fragment merges along its smallest-id outgoing
/// subgraph edge. Edge ids outside the graph are ignored.
pub fn label_components(
    g: &Graph,
    subgraph: &[EdgeId],
    sim: &SimConfig,
    engine: &EngineConfig,
) -> Result<Labeling, AppError> {
    let n = g.n();
    let mut in_h = vec![false; g.m()];
    for &e in subgraph {
        if let Some(slot) = in_h.get_mut(e) {
            *slot = true;
        }
    }
    let key_bits = 2 + id_bits(n) + 1 + ceil_log2(g.m()).max(1) as u32;
    let mut uf = UnionFind::<usize>::new(n);
    let mut phases = 0;
    let mut rounds_total = 0;
    let mut messages = 0;
    loop {
        let keys: Vec<Option<i64>> = (0..n)
            .map(|v| {
                g.neighbors(v)
                    .iter()
                    .filter(|&&(u, e)| in_h[e] && !uf.equiv(u, v))
                    .map(|&(_, e)| e as i64)
                    .min()
            })
            .collect();
        if keys.iter().all(Option::is_none) {
            break;
        }
        let fragments = fragments_of(&uf, n);
        let phase = run_phase(g, &fragments, keys, phases, key_bits, sim, engine)?;
        phases += 1;
        rounds_total += phase.stats.rounds;
        messages += phase.stats.messages;
        for e in phase.chosen.into_iter().flatten() {
            let edge = g.edge(e as EdgeId);
            uf.union(edge.u, edge.v);
        }
    }
    let mut labels = vec![usize::MAX; n];
    let reps = uf.into_labeling();
    let mut min_of = vec![usize::MAX; n];
    for v in 0..n {
        min_of[reps[v]] = min_of[reps[v]].min(v);
    }
    for v in 0..n {
        labels[v] = min_of[reps[v]];
    }
    Ok(Labeling {
        labels,
        phases,
        rounds_total,
        messages,
    })
}
