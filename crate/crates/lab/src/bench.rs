//! Sweeps over (family, parameters, part count, seed) read from a TOML spec.
//! Points run in parallel; rows come out in spec order.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use shortcut_core::audit::audit;
use shortcut_core::graph::bfs_tree;
use shortcut_core::sim::{partwise_aggregate, AggOp, AggregationTask, SimConfig};

use crate::commands::{build_instance, build_shortcut, run_mst, CliError, Family};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default)]
    pub max_delta: Option<usize>,
    #[serde(default)]
    pub max_rounds: Option<usize>,
    /// Also run a min-id partwise aggregation on the constructed shortcut.
    #[serde(default = "yes")]
    pub aggregate: bool,
    /// Also run Boruvka on a weighted copy of the instance.
    #[serde(default)]
    pub mst: bool,
    #[serde(rename = "sweep")]
    pub sweeps: Vec<Sweep>,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub family: Family,
    pub params: Vec<Vec<usize>>,
    /// Random part counts; empty means the family default.
    #[serde(default)]
    pub parts: Vec<usize>,
    pub seeds: Vec<u64>,
}

pub fn parse_spec(text: &str) -> Result<ExperimentSpec, CliError> {
    toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Point {
    pub family: Family,
    pub params: Vec<usize>,
    pub parts: Option<usize>,
    pub seed: u64,
}

impl Point {
    pub fn instance_name(&self) -> String {
        let mut s = self.family.name().to_string();
        for p in &self.params {
            let _ = write!(s, "-{p}");
        }
        if let Some(k) = self.parts {
            let _ = write!(s, "-k{k}");
        }
        let _ = write!(s, "-s{}", self.seed);
        s
    }
}

pub fn expand(spec: &ExperimentSpec) -> Vec<Point> {
    let mut points = Vec::new();
    for sw in &spec.sweeps {
        let parts: Vec<Option<usize>> = if sw.parts.is_empty() {
            vec![None]
        } else {
            sw.parts.iter().copied().map(Some).collect()
        };
        for params in &sw.params {
            for &k in &parts {
                for &seed in &sw.seeds {
                    points.push(Point {
                        family: sw.family,
                        params: params.clone(),
                        parts: k,
                        seed,
                    });
                }
            }
        }
    }
    points
}

pub const BENCH_HEADER: &str = "instance,family,seed,n,m,k,D,delta_final,congestion,dilation,blocks,quality,quality_floor,certificates,agg_rounds,agg_messages,mst_phases,mst_rounds,status";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Row {
    pub instance: String,
    pub family: String,
    pub seed: u64,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub depth: Option<usize>,
    pub delta_final: Option<usize>,
    pub congestion: Option<usize>,
    pub dilation: Option<usize>,
    pub blocks: Option<usize>,
    pub quality: Option<usize>,
    pub quality_floor: Option<String>,
    pub certificates: Option<usize>,
    pub agg_rounds: Option<usize>,
    pub agg_messages: Option<usize>,
    pub mst_phases: Option<usize>,
    pub mst_rounds: Option<usize>,
    pub status: String,
}

impl Row {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn to_csv(&self) -> String {
        let o = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.instance,
            self.family,
            self.seed,
            o(self.n),
            o(self.m),
            o(self.k),
            o(self.depth),
            o(self.delta_final),
            o(self.congestion),
            o(self.dilation),
            o(self.blocks),
            o(self.quality),
            self.quality_floor.clone().unwrap_or_default(),
            o(self.certificates),
            o(self.agg_rounds),
            o(self.agg_messages),
            o(self.mst_phases),
            o(self.mst_rounds),
            self.status
        )
    }
}

fn run_point(spec: &ExperimentSpec, point: &Point) -> Row {
    let mut row = Row {
        instance: point.instance_name(),
        family: point.family.name().into(),
        seed: point.seed,
        ..Row::default()
    };
    if let Err(e) = fill_row(spec, point, &mut row) {
        let msg: String = e
            .to_string()
            .chars()
            .map(|c| if c == ',' || c == '\n' { ';' } else { c })
            .collect();
        row.status = format!("error: {msg}");
    } else {
        row.status = "ok".into();
    }
    row
}

fn fill_row(spec: &ExperimentSpec, point: &Point, row: &mut Row) -> Result<(), CliError> {
    let inst = build_instance(point.family, &point.params, point.seed, point.parts, spec.mst)?;
    let (g, p) = (&inst.graph, &inst.parts);
    row.n = Some(g.n());
    row.m = Some(g.m());
    row.k = Some(p.k());
    row.quality_floor = inst.meta.lower_bound.as_ref().map(|lb| lb.quality_floor.clone());
    let t = bfs_tree(g, 0).map_err(|e| CliError::Validation(e.to_string()))?;
    row.depth = Some(t.height());
    let c = build_shortcut(g, &t, p, point.seed, spec.max_delta)?;
    row.delta_final = Some(c.delta_final);
    row.certificates = Some(c.certificates.len());
    let report = audit(g, &t, p, &c.shortcut).map_err(|e| CliError::Runtime(e.to_string()))?;
    row.congestion = Some(report.congestion);
    row.dilation = report.dilation;
    row.blocks = report.blocks;
    row.quality = report.quality;
    if spec.aggregate {
        let mut cfg = SimConfig::new(g.n(), point.seed);
        cfg.record_log = false;
        if let Some(r) = spec.max_rounds {
            cfg.max_rounds = r;
        }
        let task = AggregationTask {
            values: (0..g.n()).map(|v| p.part_of(v).map(|_| v as i64)).collect(),
            op: AggOp::Min,
        };
        let out = partwise_aggregate(g, p, &c.shortcut, &task, &cfg)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        row.agg_rounds = Some(out.trace.rounds_used);
        row.agg_messages = Some(out.trace.messages_sent);
    }
    if spec.mst {
        let mst = run_mst(g, point.seed, spec.max_delta, spec.max_rounds)?;
        row.mst_phases = Some(mst.phases);
        row.mst_rounds = Some(mst.rounds_total);
    }
    Ok(())
}

pub fn run_bench(spec: &ExperimentSpec) -> Vec<Row> {
    expand(spec).par_iter().map(|pt| run_point(spec, pt)).collect()
}

pub fn write_bench_csv(rows: &[Row]) -> String {
    let mut out = String::from("# schema=1\n");
    out.push_str(BENCH_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

/// Splits a bench CSV into field rows, skipping the schema comment and the
/// header.
pub fn parse_bench_csv(text: &str) -> Result<Vec<Vec<String>>, CliError> {
    let mut lines = text.lines();
    if lines.next() != Some("# schema=1") {
        return Err(CliError::Validation("missing \"# schema=1\" line".into()));
    }
    if lines.next() != Some(BENCH_HEADER) {
        return Err(CliError::Validation("unexpected bench CSV header".into()));
    }
    Ok(lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect())
}
