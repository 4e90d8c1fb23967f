//! Subcommand bodies. Each returns the files it would write plus a short
//! summary for the terminal, so reruns can be compared byte for byte.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use shortcut_core::apps::{boruvka_mst, kruskal_oracle, MstResult};
use shortcut_core::audit::{audit, QualityReport};
use shortcut_core::engine::{construct_full, Construction, ConstructionStats, EngineConfig, Shortcut};
use shortcut_core::generators::{
    assign_weights, gen_grid, gen_ktree, gen_lower_bound, gen_parts_random, gen_wheel, GenError,
};
use shortcut_core::graph::{bfs_tree, validate_partition};
use shortcut_core::sim::{partwise_aggregate, AggOp, AggregationTask, SimConfig};
use shortcut_core::{Graph, Partition, RootedTree};

use crate::io::{self, FormatError, InstanceMeta, LowerBoundRecord, TraceSummary};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Lowerbound,
    Grid,
    Wheel,
    Ktree,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Lowerbound => "lowerbound",
            Family::Grid => "grid",
            Family::Wheel => "wheel",
            Family::Ktree => "ktree",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Named file contents plus a terminal summary.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Artifacts {
    pub files: Vec<(String, String)>,
    pub summary: String,
}

impl Artifacts {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_str())
    }
}

pub struct Instance {
    pub graph: Graph,
    pub parts: Partition,
    pub meta: InstanceMeta,
}

/// `params`: lowerbound `δ' D'`, grid `w h`, wheel `n`, ktree `n k`.
/// Lower-bound instances come with their row parts; other families get
/// `parts` random connected parts, or a single part covering everything.
pub fn build_instance(
    family: Family,
    params: &[usize],
    seed: u64,
    parts: Option<usize>,
    weighted: bool,
) -> Result<Instance, CliError> {
    let arity = match family {
        Family::Wheel => 1,
        _ => 2,
    };
    if params.len() != arity {
        return Err(CliError::Usage(format!(
            "{} takes {arity} parameter(s), got {}",
            family.name(),
            params.len()
        )));
    }
    let usage = |e: GenError| CliError::Usage(e.to_string());
    let (graph, partition, lower_bound) = match family {
        Family::Lowerbound => {
            if parts.is_some() {
                return Err(CliError::Usage("lowerbound instances have fixed row parts".into()));
            }
            let inst = gen_lower_bound(params[0], params[1]).map_err(usage)?;
            let record = LowerBoundRecord::from(&inst.meta);
            (inst.graph, Some(inst.parts), Some(record))
        }
        Family::Grid => (gen_grid(params[0], params[1]).map_err(usage)?, None, None),
        Family::Wheel => (gen_wheel(params[0]).map_err(usage)?, None, None),
        Family::Ktree => (gen_ktree(params[0], params[1], seed).map_err(usage)?, None, None),
    };
    let partition = match (partition, parts) {
        (Some(p), _) => p,
        (None, Some(k)) => gen_parts_random(&graph, k, seed).map_err(usage)?,
        (None, None) => Partition::whole(graph.n()),
    };
    let graph = if weighted {
        assign_weights(&graph, seed).map_err(runtime)?
    } else {
        graph
    };
    let depth = bfs_tree(&graph, 0).map_err(runtime)?.height();
    let meta = InstanceMeta {
        family: family.name().into(),
        params: params.to_vec(),
        seed,
        n: graph.n(),
        m: graph.m(),
        k: partition.k(),
        depth,
        weighted,
        lower_bound,
    };
    Ok(Instance {
        graph,
        parts: partition,
        meta,
    })
}

pub fn cmd_gen(
    family: Family,
    params: &[usize],
    seed: u64,
    parts: Option<usize>,
    weighted: bool,
) -> Result<Artifacts, CliError> {
    let inst = build_instance(family, params, seed, parts, weighted)?;
    let m = &inst.meta;
    let mut summary = format!("n={} m={} k={} D={}", m.n, m.m, m.k, m.depth);
    if let Some(lb) = &m.lower_bound {
        let _ = write!(summary, " quality_floor={}", lb.quality_floor);
    }
    Ok(Artifacts {
        files: vec![
            ("graph.txt".into(), io::write_graph(&inst.graph)),
            ("parts.txt".into(), io::write_partition(&inst.parts)),
            ("meta.json".into(), io::to_json(&inst.meta)),
        ],
        summary,
    })
}

/// Parses and validates a graph plus partition.
pub fn load_instance(graph_text: &str, parts_text: &str) -> Result<(Graph, Partition, RootedTree), CliError> {
    let g = io::parse_graph(graph_text)?;
    let p = io::parse_partition(parts_text, g.n())?;
    validate_partition(&g, &p).map_err(|e| CliError::Validation(e.to_string()))?;
    let t = bfs_tree(&g, 0).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok((g, p, t))
}

pub fn engine_config(max_delta: Option<usize>) -> EngineConfig {
    EngineConfig { max_delta }
}

pub fn build_shortcut(
    g: &Graph,
    t: &RootedTree,
    p: &Partition,
    seed: u64,
    max_delta: Option<usize>,
) -> Result<Construction, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    construct_full(g, t, p, &engine_config(max_delta), &mut rng).map_err(runtime)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionRecord {
    pub seed: u64,
    pub k: usize,
    #[serde(rename = "D")]
    pub depth: usize,
    pub delta_final: usize,
    pub certificates: usize,
    pub stats: ConstructionStats,
}

fn quality_line(delta: Option<usize>, r: &QualityReport) -> String {
    let opt = |x: Option<usize>| x.map_or("-".to_string(), |v| v.to_string());
    format!(
        "delta_final={} congestion={} dilation={} blocks={} quality={}",
        opt(delta),
        r.congestion,
        opt(r.dilation),
        opt(r.blocks),
        opt(r.quality)
    )
}

fn audit_file(
    format: Format,
    instance: &str,
    p: &Partition,
    t: &RootedTree,
    delta: Option<usize>,
    report: &QualityReport,
) -> (String, String) {
    match format {
        Format::Json => ("audit.json".into(), io::to_json(report)),
        Format::Csv => (
            "audit.csv".into(),
            format!(
                "{}\n{}\n",
                io::QUALITY_CSV_HEADER,
                io::quality_csv_row(instance, p.k(), t.height(), delta, report)
            ),
        ),
    }
}

pub fn cmd_shortcut(
    graph_text: &str,
    parts_text: &str,
    seed: u64,
    max_delta: Option<usize>,
    format: Format,
) -> Result<Artifacts, CliError> {
    let (g, p, t) = load_instance(graph_text, parts_text)?;
    let c = build_shortcut(&g, &t, &p, seed, max_delta)?;
    let report = audit(&g, &t, &p, &c.shortcut).map_err(runtime)?;
    let record = ConstructionRecord {
        seed,
        k: p.k(),
        depth: t.height(),
        delta_final: c.delta_final,
        certificates: c.certificates.len(),
        stats: c.stats.clone(),
    };
    Ok(Artifacts {
        files: vec![
            ("shortcut.txt".into(), io::write_shortcut(&c.shortcut)),
            ("certificates.json".into(), io::write_certificates(&c.certificates)),
            ("construction.json".into(), io::to_json(&record)),
            audit_file(format, "shortcut", &p, &t, Some(c.delta_final), &report),
        ],
        summary: quality_line(Some(c.delta_final), &report),
    })
}

pub fn cmd_audit(
    graph_text: &str,
    parts_text: &str,
    shortcut_text: &str,
    format: Format,
) -> Result<Artifacts, CliError> {
    let (g, p, t) = load_instance(graph_text, parts_text)?;
    let s = io::parse_shortcut(shortcut_text)?;
    let report = audit(&g, &t, &p, &s).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(Artifacts {
        files: vec![audit_file(format, "audit", &p, &t, None, &report)],
        summary: quality_line(None, &report),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateRecord {
    pub op: String,
    pub trace: TraceSummary,
    pub delay_range: usize,
    pub per_part: Vec<Option<i64>>,
}

/// Each assigned node contributes its own id, so `min` elects leaders and
/// `sum` of ids is checkable centrally. Without a shortcut file one is
/// constructed first.
pub fn cmd_aggregate(
    graph_text: &str,
    parts_text: &str,
    shortcut_text: Option<&str>,
    op: AggOp,
    seed: u64,
    max_delta: Option<usize>,
    max_rounds: Option<usize>,
    format: Format,
) -> Result<Artifacts, CliError> {
    let (g, p, t) = load_instance(graph_text, parts_text)?;
    let shortcut: Shortcut = match shortcut_text {
        Some(text) => io::parse_shortcut(text)?,
        None => build_shortcut(&g, &t, &p, seed, max_delta)?.shortcut,
    };
    let mut cfg = SimConfig::new(g.n(), seed);
    if let Some(r) = max_rounds {
        cfg.max_rounds = r;
    }
    cfg.record_log = format == Format::Csv;
    let task = AggregationTask {
        values: (0..g.n()).map(|v| p.part_of(v).map(|_| v as i64)).collect(),
        op,
    };
    let out = partwise_aggregate(&g, &p, &shortcut, &task, &cfg).map_err(runtime)?;
    let record = AggregateRecord {
        op: op_name(op).into(),
        trace: TraceSummary::from(&out.trace),
        delay_range: out.schedule.delay_range,
        per_part: out.per_part,
    };
    let mut files = vec![("aggregate.json".into(), io::to_json(&record))];
    if format == Format::Csv {
        files.push(("trace.csv".into(), io::write_trace_csv(&out.trace)));
    }
    Ok(Artifacts {
        files,
        summary: format!(
            "rounds_used={} messages_sent={} bits_sent={}",
            out.trace.rounds_used, out.trace.messages_sent, out.trace.bits_sent
        ),
    })
}

pub fn op_name(op: AggOp) -> &'static str {
    match op {
        AggOp::Min => "min",
        AggOp::Max => "max",
        AggOp::Sum => "sum",
    }
}

pub fn run_mst(g: &Graph, seed: u64, max_delta: Option<usize>, max_rounds: Option<usize>) -> Result<MstResult, CliError> {
    let (expect, _) = kruskal_oracle(g).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut cfg = SimConfig::new(g.n(), seed);
    cfg.record_log = false;
    if let Some(r) = max_rounds {
        cfg.max_rounds = r;
    }
    let mst = boruvka_mst(g, &cfg, &engine_config(max_delta)).map_err(runtime)?;
    if mst.tree_edges != expect {
        return Err(CliError::Runtime("MST differs from the Kruskal oracle".into()));
    }
    Ok(mst)
}

pub fn cmd_mst(
    graph_text: &str,
    seed: u64,
    max_delta: Option<usize>,
    max_rounds: Option<usize>,
    format: Format,
) -> Result<Artifacts, CliError> {
    let g = io::parse_graph(graph_text)?;
    let mst = run_mst(&g, seed, max_delta, max_rounds)?;
    let mut table = String::from("phase,fragments,delta,congestion,quality,rounds,messages\n");
    for (i, ph) in mst.per_phase.iter().enumerate() {
        let _ = writeln!(
            table,
            "{},{},{},{},{},{},{}",
            i + 1,
            ph.fragments,
            ph.delta,
            ph.congestion,
            ph.quality.map_or(String::new(), |q| q.to_string()),
            ph.rounds,
            ph.messages
        );
    }
    let file = match format {
        Format::Json => ("mst.json".into(), io::to_json(&mst)),
        Format::Csv => ("mst.csv".into(), table.clone()),
    };
    let mut summary = format!(
        "total_weight={} phases={} rounds_total={} messages={}\n",
        mst.total_weight, mst.phases, mst.rounds_total, mst.messages
    );
    summary.push_str(table.trim_end());
    Ok(Artifacts {
        files: vec![file],
        summary,
    })
}
