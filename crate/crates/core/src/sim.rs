//! Synchronous message passing with per-edge bandwidth limits.
//!
//! Round 0 runs every program's `init`; each later round first delivers the
//! messages sent in the previous round and then steps every node that has not
//! halted. A node may send at most one message per incident edge per round,
//! and no message may exceed `msg_bits`. The run ends once every node has
//! halted; `rounds_used` is the last round executed.
//!
//! [`partwise_aggregate`] splits its work into an uncharged control plane
//! (part trees and start delays, computed here) and a charged data plane
//! (convergecast and broadcast messages through [`run`]).

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audit::{ceil_log2, measure_congestion};
use crate::engine::Shortcut;
use crate::graph::{EdgeId, Graph, NodeId, Partition};

pub const DEFAULT_MAX_ROUNDS: usize = 1_000_000;

/// Bits needed to name one of `n` nodes: `⌈log₂(n + 1)⌉`.
pub fn id_bits(n: usize) -> u32 {
    ceil_log2(n + 1).max(1) as u32
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    pub msg_bits: u32,
    pub max_rounds: usize,
    pub seed: u64,
    /// Keep the per-message log in the trace.
    pub record_log: bool,
}

impl SimConfig {
    /// `4 ⌈log₂(n + 1)⌉`-bit messages.
    pub fn new(n: usize, seed: u64) -> Self {
        SimConfig {
            msg_bits: 4 * id_bits(n),
            max_rounds: DEFAULT_MAX_ROUNDS,
            seed,
            record_log: true,
        }
    }
}

pub trait Payload {
    fn bits(&self) -> u32;
    fn tag(&self) -> &'static str;
}

/// What a node sees and can do during one round.
pub struct Context<'a, M> {
    node: NodeId,
    round: usize,
    neighbors: &'a [(NodeId, EdgeId)],
    outbox: &'a mut Vec<(NodeId, M)>,
    halted: &'a mut bool,
    rng: &'a mut ChaCha8Rng,
}

impl<M> Context<'_, M> {
    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn neighbors(&self) -> &[(NodeId, EdgeId)] {
        self.neighbors
    }

    pub fn send(&mut self, to: NodeId, msg: M) {
        self.outbox.push((to, msg));
    }

    pub fn halt(&mut self) {
        *self.halted = true;
    }

    /// Per-node stream derived from the run seed and the node id.
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        self.rng
    }
}

/// A node's state machine. Programs talk only through delivered messages.
pub trait NodeProgram {
    type Msg: Payload;

    fn init(&mut self, ctx: &mut Context<'_, Self::Msg>);

    /// `inbox` holds `(sender, message)` pairs sorted by sender.
    fn step(&mut self, ctx: &mut Context<'_, Self::Msg>, inbox: &[(NodeId, Self::Msg)]);

    fn output(&self) -> Option<i64> {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MessageRecord {
    pub round: usize,
    pub src: NodeId,
    pub dst: NodeId,
    pub bits: u32,
    pub tag: &'static str,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RoundTrace {
    pub rounds_used: usize,
    pub messages_sent: usize,
    pub bits_sent: u64,
    pub config: SimConfig,
    pub log: Vec<MessageRecord>,
    pub outputs: Vec<Option<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("msg_bits = {msg_bits} cannot hold a node id ({needed} bits)")]
    InvalidConfig { msg_bits: u32, needed: u32 },
    #[error("expected {expected} node programs, got {got}")]
    ProgramCount { expected: usize, got: usize },
    #[error("node {node} sent a {bits}-bit message in round {round}, limit is {limit}")]
    Oversize {
        node: NodeId,
        round: usize,
        bits: u32,
        limit: u32,
    },
    #[error("node {node} sent to non-neighbor {to} in round {round}")]
    NotNeighbor { node: NodeId, round: usize, to: NodeId },
    #[error("node {node} sent twice to {to} in round {round}")]
    DuplicateSend { node: NodeId, round: usize, to: NodeId },
    #[error("no termination within {max_rounds} rounds")]
    Timeout {
        max_rounds: usize,
        trace: Box<RoundTrace>,
    },
    #[error("part {part}: shortcut references edge {edge}, which is not in the graph")]
    UnknownEdge { part: usize, edge: EdgeId },
    #[error("merged subgraph of part {part} is disconnected")]
    DisconnectedPart { part: usize },
    #[error("shortcut has {shortcut} parts, partition has {partition}")]
    PartCount { shortcut: usize, partition: usize },
    #[error("expected {expected} values, got {got}")]
    ValueCount { expected: usize, got: usize },
    #[error("aggregate of part {part} does not fit in 64 bits")]
    ValueOverflow { part: usize },
}

/// Runs one program per node until all halt.
pub fn run<P: NodeProgram>(
    g: &Graph,
    mut programs: Vec<P>,
    cfg: &SimConfig,
) -> Result<(RoundTrace, Vec<P>), SimError> {
    let n = g.n();
    let needed = id_bits(n);
    if cfg.msg_bits < needed {
        return Err(SimError::InvalidConfig {
            msg_bits: cfg.msg_bits,
            needed,
        });
    }
    if programs.len() != n {
        return Err(SimError::ProgramCount {
            expected: n,
            got: programs.len(),
        });
    }
    let mut rngs: Vec<ChaCha8Rng> = (0..n)
        .map(|v| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(v as u64);
            rng
        })
        .collect();
    let mut halted = vec![false; n];
    let mut inboxes: Vec<Vec<(NodeId, P::Msg)>> = (0..n).map(|_| Vec::new()).collect();
    let mut pending: Vec<(NodeId, NodeId, P::Msg)> = Vec::new();
    let mut outbox = Vec::new();
    let mut trace = RoundTrace {
        rounds_used: 0,
        messages_sent: 0,
        bits_sent: 0,
        config: *cfg,
        log: Vec::new(),
        outputs: Vec::new(),
    };

    let mut round = 0;
    loop {
        if round > 0 {
            if round > cfg.max_rounds {
                trace.outputs = programs.iter().map(NodeProgram::output).collect();
                return Err(SimError::Timeout {
                    max_rounds: cfg.max_rounds,
                    trace: Box::new(trace),
                });
            }
            for (src, dst, msg) in pending.drain(..) {
                if !halted[dst] {
                    inboxes[dst].push((src, msg));
                }
            }
        }
        for v in 0..n {
            if halted[v] {
                continue;
            }
            let inbox = core::mem::take(&mut inboxes[v]);
            let mut ctx = Context {
                node: v,
                round,
                neighbors: g.neighbors(v),
                outbox: &mut outbox,
                halted: &mut halted[v],
                rng: &mut rngs[v],
            };
            if round == 0 {
                programs[v].init(&mut ctx);
            } else {
                programs[v].step(&mut ctx, &inbox);
            }
            let mut targets: Vec<NodeId> = Vec::with_capacity(outbox.len());
            for (to, msg) in outbox.drain(..) {
                if g.edge_between(v, to).is_none() {
                    return Err(SimError::NotNeighbor { node: v, round, to });
                }
                if targets.contains(&to) {
                    return Err(SimError::DuplicateSend { node: v, round, to });
                }
                targets.push(to);
                let bits = msg.bits();
                if bits > cfg.msg_bits {
                    return Err(SimError::Oversize {
                        node: v,
                        round,
                        bits,
                        limit: cfg.msg_bits,
                    });
                }
                trace.messages_sent += 1;
                trace.bits_sent += u64::from(bits);
                if cfg.record_log {
                    trace.log.push(MessageRecord {
                        round,
                        src: v,
                        dst: to,
                        bits,
                        tag: msg.tag(),
                    });
                }
                pending.push((v, to, msg));
            }
        }
        if halted.iter().all(|&h| h) {
            trace.rounds_used = round;
            break;
        }
        round += 1;
    }
    trace.outputs = programs.iter().map(NodeProgram::output).collect();
    Ok((trace, programs))
}

/// Associative and commutative aggregate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum AggOp {
    Min,
    Max,
    Sum,
}

impl AggOp {
    fn combine(self, a: Option<i128>, b: Option<i128>) -> Option<i128> {
        match (a, b) {
            (Some(x), Some(y)) => Some(match self {
                AggOp::Min => x.min(y),
                AggOp::Max => x.max(y),
                AggOp::Sum => x + y,
            }),
            (x, None) => x,
            (None, y) => y,
        }
    }
}

/// Per-node input values; `None` marks a node without a value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AggregationTask {
    pub values: Vec<Option<i64>>,
    pub op: AggOp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Direction {
    Up,
    Down,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AggMsg {
    part: usize,
    direction: Direction,
    value: Option<i128>,
    header_bits: u32,
}

impl Payload for AggMsg {
    /// Direction flag, presence flag, part id, then a sign bit and the
    /// magnitude of the value.
    fn bits(&self) -> u32 {
        let value_bits = self
            .value
            .map_or(0, |x| 1 + (128 - x.unsigned_abs().leading_zeros()));
        self.header_bits + value_bits
    }

    fn tag(&self) -> &'static str {
        match self.direction {
            Direction::Up => "up",
            Direction::Down => "down",
        }
    }
}

#[derive(Clone, Debug)]
struct Membership {
    part: usize,
    delay: usize,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    waiting: usize,
    acc: Option<i128>,
    result: Option<i128>,
    reported: bool,
    done: bool,
}

type QueueKey = Reverse<(usize, usize, u8)>;

/// One node of the convergecast/broadcast protocol.
#[derive(Clone, Debug)]
pub struct AggregationNode {
    op: AggOp,
    own_part: Option<usize>,
    header_bits: u32,
    memberships: Vec<Membership>,
    queues: BTreeMap<NodeId, BinaryHeap<(QueueKey, Option<i128>)>>,
}

impl AggregationNode {
    fn enqueue(&mut self, to: NodeId, m: usize, direction: Direction, value: Option<i128>) {
        let ms = &self.memberships[m];
        let dir = match direction {
            Direction::Up => 0,
            Direction::Down => 1,
        };
        self.queues
            .entry(to)
            .or_default()
            .push((Reverse((ms.delay, ms.part, dir)), value));
    }

    fn membership(&self, part: usize) -> Option<usize> {
        self.memberships.binary_search_by_key(&part, |m| m.part).ok()
    }

    fn advance(&mut self, ctx: &mut Context<'_, AggMsg>) {
        for m in 0..self.memberships.len() {
            let ms = &self.memberships[m];
            if ms.reported || ms.waiting > 0 || ctx.round() < ms.delay {
                continue;
            }
            let acc = ms.acc;
            match ms.parent {
                Some(parent) => self.enqueue(parent, m, Direction::Up, acc),
                None => {
                    let children = ms.children.clone();
                    for c in children {
                        self.enqueue(c, m, Direction::Down, acc);
                    }
                    self.memberships[m].result = acc;
                    self.memberships[m].done = true;
                }
            }
            self.memberships[m].reported = true;
        }
        let header_bits = self.header_bits;
        for (&to, queue) in self.queues.iter_mut() {
            if let Some((Reverse((_, part, dir)), value)) = queue.pop() {
                let direction = if dir == 0 { Direction::Up } else { Direction::Down };
                ctx.send(
                    to,
                    AggMsg {
                        part,
                        direction,
                        value,
                        header_bits,
                    },
                );
            }
        }
        self.queues.retain(|_, q| !q.is_empty());
        if self.queues.is_empty() && self.memberships.iter().all(|m| m.done) {
            ctx.halt();
        }
    }

    fn result_for(&self, part: usize) -> Option<i128> {
        self.membership(part).and_then(|m| self.memberships[m].result)
    }
}

impl NodeProgram for AggregationNode {
    type Msg = AggMsg;

    fn init(&mut self, ctx: &mut Context<'_, AggMsg>) {
        self.advance(ctx);
    }

    fn step(&mut self, ctx: &mut Context<'_, AggMsg>, inbox: &[(NodeId, AggMsg)]) {
        for (_, msg) in inbox {
            let Some(m) = self.membership(msg.part) else {
                continue;
            };
            match msg.direction {
                Direction::Up => {
                    let ms = &mut self.memberships[m];
                    ms.acc = self.op.combine(ms.acc, msg.value);
                    ms.waiting -= 1;
                }
                Direction::Down => {
                    let children = self.memberships[m].children.clone();
                    for c in children {
                        self.enqueue(c, m, Direction::Down, msg.value);
                    }
                    let ms = &mut self.memberships[m];
                    ms.result = msg.value;
                    ms.done = true;
                }
            }
        }
        self.advance(ctx);
    }

    fn output(&self) -> Option<i64> {
        self.own_part
            .and_then(|p| self.result_for(p))
            .and_then(|x| i64::try_from(x).ok())
    }
}

/// Control-plane decisions for one aggregation run.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Schedule {
    /// Start delays are drawn from `0..delay_range`.
    pub delay_range: usize,
    pub delays: Vec<usize>,
    /// Root (smallest node) and depth of each part tree.
    pub roots: Vec<NodeId>,
    pub depths: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AggregationOutcome {
    /// Aggregate of each node's own part; `None` for unassigned nodes and
    /// parts without values.
    pub results: Vec<Option<i64>>,
    pub per_part: Vec<Option<i64>>,
    pub schedule: Schedule,
    pub trace: RoundTrace,
}

struct PartTree {
    root: NodeId,
    depth: usize,
    /// `(node, parent, children)` for every node of the merged subgraph.
    nodes: Vec<(NodeId, Option<NodeId>, Vec<NodeId>)>,
}

/// BFS tree of `G[P_i] + H_i` rooted at the smallest node of the part.
fn part_tree(g: &Graph, part: &[NodeId], h: &[EdgeId]) -> Option<PartTree> {
    let mut adj: BTreeMap<NodeId, Vec<NodeId>> = part.iter().map(|&v| (v, Vec::new())).collect();
    for &u in part {
        for &(v, _) in g.neighbors(u) {
            if part.binary_search(&v).is_ok() {
                adj.entry(u).or_default().push(v);
            }
        }
    }
    for &e in h {
        let edge = g.edge(e);
        adj.entry(edge.u).or_default().push(edge.v);
        adj.entry(edge.v).or_default().push(edge.u);
    }
    for list in adj.values_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let root = *part.first()?;
    let mut parent: BTreeMap<NodeId, Option<NodeId>> = BTreeMap::from([(root, None)]);
    let mut depth = BTreeMap::from([(root, 0usize)]);
    let mut queue = VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[&x] {
            if !parent.contains_key(&y) {
                parent.insert(y, Some(x));
                depth.insert(y, depth[&x] + 1);
                queue.push_back(y);
            }
        }
    }
    if parent.len() != adj.len() {
        return None;
    }
    let mut children: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for (&v, &p) in &parent {
        if let Some(p) = p {
            children.entry(p).or_default().push(v);
        }
    }
    Some(PartTree {
        root,
        depth: depth.values().copied().max().unwrap_or(0),
        nodes: parent
            .into_iter()
            .map(|(v, p)| (v, p, children.remove(&v).unwrap_or_default()))
            .collect(),
    })
}

/// Every node of every part learns the aggregate of its part's values.
///
/// Part `i` starts after a delay drawn uniformly from `0..C`, where `C` is
/// the shortcut's congestion (at least 1), then convergecasts up a BFS tree
/// of `G[P_i] + H_i` and broadcasts the result back down. A node with several
/// messages for the same neighbor sends the one with the smallest
/// `(delay, part)` first and queues the rest.
pub fn partwise_aggregate(
    g: &Graph,
    p: &Partition,
    shortcut: &Shortcut,
    task: &AggregationTask,
    cfg: &SimConfig,
) -> Result<AggregationOutcome, SimError> {
    if shortcut.k() != p.k() {
        return Err(SimError::PartCount {
            shortcut: shortcut.k(),
            partition: p.k(),
        });
    }
    if task.values.len() != g.n() {
        return Err(SimError::ValueCount {
            expected: g.n(),
            got: task.values.len(),
        });
    }
    let congestion = measure_congestion(g, shortcut).map_err(|e| match e {
        crate::audit::AuditError::UnknownEdge { part, edge } => SimError::UnknownEdge { part, edge },
        _ => SimError::PartCount {
            shortcut: shortcut.k(),
            partition: p.k(),
        },
    })?;
    let delay_range = congestion.max(1);
    let mut control = ChaCha8Rng::seed_from_u64(cfg.seed);
    control.set_stream(u64::MAX);

    let header_bits = 2 + id_bits(g.n());
    let mut nodes: Vec<AggregationNode> = (0..g.n())
        .map(|v| AggregationNode {
            op: task.op,
            own_part: p.part_of(v),
            header_bits,
            memberships: Vec::new(),
            queues: BTreeMap::new(),
        })
        .collect();
    let mut schedule = Schedule {
        delay_range,
        delays: Vec::with_capacity(p.k()),
        roots: Vec::with_capacity(p.k()),
        depths: Vec::with_capacity(p.k()),
    };
    for (i, part) in p.parts().iter().enumerate() {
        let tree = part_tree(g, part, shortcut.part_edges(i))
            .ok_or(SimError::DisconnectedPart { part: i })?;
        let delay = control.gen_range(0..delay_range);
        schedule.delays.push(delay);
        schedule.roots.push(tree.root);
        schedule.depths.push(tree.depth);
        for (v, parent, children) in tree.nodes {
            let own = if p.part_of(v) == Some(i) {
                task.values[v].map(i128::from)
            } else {
                None
            };
            nodes[v].memberships.push(Membership {
                part: i,
                delay,
                parent,
                waiting: children.len(),
                children,
                acc: own,
                result: None,
                reported: false,
                done: false,
            });
        }
    }

    let (trace, nodes) = run(g, nodes, cfg)?;
    let mut per_part = Vec::with_capacity(p.k());
    for i in 0..p.k() {
        let value = nodes[schedule.roots[i]].result_for(i);
        per_part.push(match value {
            Some(x) => Some(i64::try_from(x).map_err(|_| SimError::ValueOverflow { part: i })?),
            None => None,
        });
    }
    let results = (0..g.n())
        .map(|v| p.part_of(v).and_then(|i| per_part[i]))
        .collect();
    Ok(AggregationOutcome {
        results,
        per_part,
        schedule,
        trace,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeaderCount {
    /// Smallest node id of each part.
    pub leaders: Vec<NodeId>,
    pub sizes: Vec<usize>,
    pub rounds_used: usize,
    pub messages_sent: usize,
    pub traces: [RoundTrace; 2],
}

/// Leader election (min id) followed by part-size counting (sum of ones).
pub fn leader_and_count(
    g: &Graph,
    p: &Partition,
    shortcut: &Shortcut,
    cfg: &SimConfig,
) -> Result<LeaderCount, SimError> {
    let ids = AggregationTask {
        values: (0..g.n())
            .map(|v| p.part_of(v).map(|_| v as i64))
            .collect(),
        op: AggOp::Min,
    };
    let ones = AggregationTask {
        values: (0..g.n()).map(|v| p.part_of(v).map(|_| 1)).collect(),
        op: AggOp::Sum,
    };
    let lead = partwise_aggregate(g, p, shortcut, &ids, cfg)?;
    let count = partwise_aggregate(g, p, shortcut, &ones, cfg)?;
    Ok(LeaderCount {
        leaders: lead.per_part.iter().map(|x| x.unwrap_or(0) as NodeId).collect(),
        sizes: count.per_part.iter().map(|x| x.unwrap_or(0) as usize).collect(),
        rounds_used: lead.trace.rounds_used + count.trace.rounds_used,
        messages_sent: lead.trace.messages_sent + count.trace.messages_sent,
        traces: [lead.trace, count.trace],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_grid, gen_parts_random, gen_wheel};
    use crate::graph::bfs_tree;

    #[derive(Clone, Copy, Debug)]
    struct Token;

    impl Payload for Token {
        fn bits(&self) -> u32 {
            1
        }
        fn tag(&self) -> &'static str {
            "token"
        }
    }

    /// Node 0 starts a flood; everyone forwards once and halts.
    #[derive(Debug)]
    struct Flood;

    impl NodeProgram for Flood {
        type Msg = Token;

        fn init(&mut self, ctx: &mut Context<'_, Token>) {
            if ctx.node() == 0 {
                let nbrs: Vec<_> = ctx.neighbors().iter().map(|&(v, _)| v).collect();
                for v in nbrs {
                    ctx.send(v, Token);
                }
                ctx.halt();
            }
        }

        fn step(&mut self, ctx: &mut Context<'_, Token>, inbox: &[(NodeId, Token)]) {
            if let Some(&(from, _)) = inbox.first() {
                let nbrs: Vec<_> = ctx.neighbors().iter().map(|&(v, _)| v).collect();
                for v in nbrs.into_iter().filter(|&v| v != from) {
                    ctx.send(v, Token);
                }
                ctx.halt();
            }
        }
    }

    #[derive(Debug)]
    struct Idle;

    impl NodeProgram for Idle {
        type Msg = Token;
        fn init(&mut self, ctx: &mut Context<'_, Token>) {
            ctx.halt();
        }
        fn step(&mut self, _: &mut Context<'_, Token>, _: &[(NodeId, Token)]) {}
    }

    #[derive(Debug)]
    struct Chatty;

    impl NodeProgram for Chatty {
        type Msg = Token;
        fn init(&mut self, ctx: &mut Context<'_, Token>) {
            if ctx.node() == 0 {
                ctx.send(1, Token);
                ctx.send(1, Token);
            }
        }
        fn step(&mut self, _: &mut Context<'_, Token>, _: &[(NodeId, Token)]) {}
    }

    fn path(n: usize) -> Graph {
        Graph::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn single_node_halting_in_init() {
        let g = Graph::new(1, []).unwrap();
        let (trace, _) = run(&g, vec![Idle], &SimConfig::new(1, 0)).unwrap();
        assert_eq!(trace.rounds_used, 0);
    }

    #[test]
    fn flood_on_path_takes_distance_rounds() {
        let g = path(5);
        let (trace, _) = run(&g, (0..5).map(|_| Flood).collect(), &SimConfig::new(5, 0)).unwrap();
        assert_eq!(trace.rounds_used, 4);
        assert_eq!(trace.messages_sent, 4);
    }

    #[test]
    fn flood_on_wheel_from_hub() {
        let g = gen_wheel(10).unwrap();
        let (trace, _) = run(&g, (0..10).map(|_| Flood).collect(), &SimConfig::new(10, 0)).unwrap();
        assert_eq!(trace.rounds_used, 1);
    }

    #[test]
    fn rejects_double_send_and_timeout() {
        let g = path(2);
        assert_eq!(
            run(&g, vec![Chatty, Chatty], &SimConfig::new(2, 0)).unwrap_err(),
            SimError::DuplicateSend { node: 0, round: 0, to: 1 }
        );
        let cfg = SimConfig { max_rounds: 3, ..SimConfig::new(2, 0) };
        #[derive(Debug)]
        struct Never;
        impl NodeProgram for Never {
            type Msg = Token;
            fn init(&mut self, _: &mut Context<'_, Token>) {}
            fn step(&mut self, _: &mut Context<'_, Token>, _: &[(NodeId, Token)]) {}
        }
        match run(&g, vec![Never, Never], &cfg) {
            Err(SimError::Timeout { max_rounds: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let tiny = SimConfig { msg_bits: 1, ..SimConfig::new(2, 0) };
        assert!(matches!(run(&g, vec![Idle, Idle], &tiny), Err(SimError::InvalidConfig { .. })));
    }

    #[test]
    fn global_min_over_bfs_tree() {
        let g = gen_grid(6, 5).unwrap();
        let t = bfs_tree(&g, 0).unwrap();
        let p = Partition::whole(g.n());
        let s = Shortcut::from_sets(vec![t.tree_edges().collect()]);
        let task = AggregationTask {
            values: (0..g.n()).map(|v| Some(1000 - 7 * v as i64)).collect(),
            op: AggOp::Min,
        };
        let out = partwise_aggregate(&g, &p, &s, &task, &SimConfig::new(g.n(), 4)).unwrap();
        let expect = 1000 - 7 * (g.n() as i64 - 1);
        assert!(out.results.iter().all(|&r| r == Some(expect)));
        assert!(out.trace.rounds_used <= 2 * t.height() + 1);
    }

    #[test]
    fn singleton_parts_send_nothing() {
        let g = gen_grid(4, 4).unwrap();
        let p = Partition::singletons(16);
        let task = AggregationTask {
            values: (0..16).map(|v| Some(v as i64 * 3)).collect(),
            op: AggOp::Sum,
        };
        let out =
            partwise_aggregate(&g, &p, &Shortcut::empty(16), &task, &SimConfig::new(16, 1)).unwrap();
        assert_eq!(out.trace.messages_sent, 0);
        assert_eq!(out.trace.rounds_used, 0);
        assert!((0..16).all(|v| out.results[v] == Some(3 * v as i64)));
    }

    #[test]
    fn oversize_values_error() {
        let g = path(3);
        let p = Partition::whole(3);
        let task = AggregationTask {
            values: vec![Some(1 << 40); 3],
            op: AggOp::Sum,
        };
        let err = partwise_aggregate(&g, &p, &Shortcut::empty(1), &task, &SimConfig::new(3, 0));
        assert!(matches!(err, Err(SimError::Oversize { .. })));
    }

    #[test]
    fn disconnected_merged_part_errors() {
        let g = path(3);
        let p = Partition::new(3, vec![vec![0, 2]]);
        let task = AggregationTask { values: vec![Some(1); 3], op: AggOp::Sum };
        assert_eq!(
            partwise_aggregate(&g, &p, &Shortcut::empty(1), &task, &SimConfig::new(3, 0)),
            Err(SimError::DisconnectedPart { part: 0 })
        );
    }

    #[test]
    fn leaders_and_sizes() {
        let g = gen_wheel(10).unwrap();
        let whole = leader_and_count(&g, &Partition::whole(10), &Shortcut::empty(1), &SimConfig::new(10, 0))
            .unwrap();
        assert_eq!((whole.leaders[0], whole.sizes[0]), (0, 10));

        let single = leader_and_count(&g, &Partition::singletons(10), &Shortcut::empty(10), &SimConfig::new(10, 0))
            .unwrap();
        assert_eq!(single.leaders, (0..10).collect::<Vec<_>>());

        let g = gen_grid(8, 8).unwrap();
        let p = gen_parts_random(&g, 6, 2).unwrap();
        let out = leader_and_count(&g, &p, &Shortcut::empty(6), &SimConfig::new(64, 2)).unwrap();
        for (i, part) in p.parts().iter().enumerate() {
            assert_eq!(out.leaders[i], part[0]);
            assert_eq!(out.sizes[i], part.len());
        }
    }
}
