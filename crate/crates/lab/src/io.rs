//! Text and JSON file formats. Every writer's output parses back to the same
//! value, and writing that value again reproduces the bytes.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use shortcut_core::audit::QualityReport;
use shortcut_core::engine::{MinorCertificate, MinorEdge, MinorNode, Shortcut};
use shortcut_core::generators::LowerBoundMeta;
use shortcut_core::graph::{Edge, GraphError};
use shortcut_core::sim::{RoundTrace, SimConfig};
use shortcut_core::{Fraction, Graph, Partition};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn numbers<T: FromStr>(line: usize, text: &str) -> Result<Vec<T>, FormatError> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse()
                .map_err(|_| syntax(line, format!("expected a non-negative integer, found {tok:?}")))
        })
        .collect()
}

/// `n m [weighted]`, then one `u v [w]` line per edge.
pub fn write_graph(g: &Graph) -> String {
    let mut out = String::new();
    let _ = write!(out, "{} {}", g.n(), g.m());
    if g.is_weighted() {
        out.push_str(" weighted");
    }
    out.push('\n');
    for e in g.edges() {
        let _ = match e.weight {
            Some(w) => writeln!(out, "{} {} {}", e.u, e.v, w),
            None => writeln!(out, "{} {}", e.u, e.v),
        };
    }
    out
}

pub fn parse_graph(text: &str) -> Result<Graph, FormatError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines.next().ok_or_else(|| syntax(1, "empty graph file"))?;
    let mut fields: Vec<&str> = header.split_whitespace().collect();
    let weighted = fields.last() == Some(&"weighted");
    if weighted {
        fields.pop();
    }
    let head: Vec<usize> = numbers(1, &fields.join(" "))?;
    let [n, m] = head[..] else {
        return Err(syntax(1, "header must be \"n m\" or \"n m weighted\""));
    };
    let mut edges = Vec::with_capacity(m);
    for (line, text) in lines {
        if text.is_empty() {
            continue;
        }
        let nums: Vec<usize> = numbers(line, text)?;
        let edge = match (weighted, &nums[..]) {
            (false, &[u, v]) => Edge { u, v, weight: None },
            (true, &[u, v, w]) => Edge {
                u,
                v,
                weight: Some(u32::try_from(w).map_err(|_| syntax(line, "weight out of range"))?),
            },
            _ => {
                let want = if weighted { "u v w" } else { "u v" };
                return Err(syntax(line, format!("expected \"{want}\"")));
            }
        };
        edges.push(edge);
    }
    if edges.len() != m {
        return Err(syntax(1, format!("header announces {m} edges, file has {}", edges.len())));
    }
    Ok(Graph::from_edges(n, edges)?)
}

/// One part per line, node ids ascending.
pub fn write_partition(p: &Partition) -> String {
    let mut out = String::new();
    for part in p.parts() {
        out.push_str(&join(part));
        out.push('\n');
    }
    out
}

/// Parts of an `n`-node graph. Nodes listed nowhere stay unassigned.
pub fn parse_partition(text: &str, n: usize) -> Result<Partition, FormatError> {
    let parts = text
        .lines()
        .enumerate()
        .map(|(i, l)| numbers(i + 1, l))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Partition::new(n, parts))
}

fn join(ids: &[usize]) -> String {
    ids.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

/// `i : e1 e2 ...` per part.
pub fn write_shortcut(s: &Shortcut) -> String {
    let mut out = String::new();
    for (i, set) in s.sets().iter().enumerate() {
        let _ = if set.is_empty() {
            writeln!(out, "{i} :")
        } else {
            writeln!(out, "{i} : {}", join(set))
        };
    }
    out
}

pub fn parse_shortcut(text: &str) -> Result<Shortcut, FormatError> {
    let mut sets = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (head, rest) = line
            .split_once(':')
            .ok_or_else(|| syntax(line_no, "expected \"i : e1 e2 ...\""))?;
        let idx: usize = head
            .trim()
            .parse()
            .map_err(|_| syntax(line_no, "bad part index"))?;
        if idx != sets.len() {
            return Err(syntax(line_no, format!("expected part {}, found {idx}", sets.len())));
        }
        sets.push(numbers(line_no, rest)?);
    }
    Ok(Shortcut::from_sets(sets))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub delta: usize,
    /// Exact `p/q`.
    pub density: String,
    pub nodes: Vec<MinorNode>,
    pub edges: Vec<MinorEdge>,
}

impl From<&MinorCertificate> for CertificateRecord {
    fn from(c: &MinorCertificate) -> Self {
        CertificateRecord {
            delta: c.delta,
            density: c.density.to_string(),
            nodes: c.nodes.clone(),
            edges: c.edges.clone(),
        }
    }
}

impl CertificateRecord {
    /// Rebuilds the certificate; the stored density must match the
    /// recomputed one.
    pub fn to_certificate(&self) -> Result<MinorCertificate, FormatError> {
        let cert = MinorCertificate::new(self.delta, self.nodes.clone(), self.edges.clone());
        let stored: Fraction = self
            .density
            .parse()
            .map_err(|e: shortcut_core::ratio::ParseFractionError| syntax(0, e.to_string()))?;
        if stored != cert.density {
            return Err(syntax(
                0,
                format!("density {} does not match the minor ({})", self.density, cert.density),
            ));
        }
        Ok(cert)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn write_certificates(certs: &[MinorCertificate]) -> String {
    to_json(&certs.iter().map(CertificateRecord::from).collect::<Vec<_>>())
}

pub fn parse_certificates(text: &str) -> Result<Vec<MinorCertificate>, FormatError> {
    let records: Vec<CertificateRecord> = serde_json::from_str(text)?;
    records.iter().map(CertificateRecord::to_certificate).collect()
}

pub const QUALITY_CSV_HEADER: &str = "instance,k,D,delta_final,congestion,dilation,blocks,quality";

fn opt(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn quality_csv_row(
    instance: &str,
    k: usize,
    depth: usize,
    delta_final: Option<usize>,
    report: &QualityReport,
) -> String {
    format!(
        "{instance},{k},{depth},{},{},{},{},{}",
        opt(delta_final),
        report.congestion,
        opt(report.dilation),
        opt(report.blocks),
        opt(report.quality)
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub rounds_used: usize,
    pub messages_sent: usize,
    pub bits_sent: u64,
    pub config: SimConfig,
}

impl From<&RoundTrace> for TraceSummary {
    fn from(t: &RoundTrace) -> Self {
        TraceSummary {
            rounds_used: t.rounds_used,
            messages_sent: t.messages_sent,
            bits_sent: t.bits_sent,
            config: t.config,
        }
    }
}

pub const TRACE_CSV_HEADER: &str = "round,src,dst,bits,tag";

pub fn write_trace_csv(t: &RoundTrace) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for r in &t.log {
        let _ = writeln!(out, "{},{},{},{},{}", r.round, r.src, r.dst, r.bits, r.tag);
    }
    out
}

/// Rows of a trace CSV as `(round, src, dst, bits, tag)`.
pub fn parse_trace_csv(text: &str) -> Result<Vec<(usize, usize, usize, u32, String)>, FormatError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, TRACE_CSV_HEADER)) => {}
        _ => return Err(syntax(1, format!("expected header {TRACE_CSV_HEADER:?}"))),
    }
    lines
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || syntax(i + 1, "expected round,src,dst,bits,tag");
            if f.len() != 5 {
                return Err(bad());
            }
            Ok((
                f[0].parse().map_err(|_| bad())?,
                f[1].parse().map_err(|_| bad())?,
                f[2].parse().map_err(|_| bad())?,
                f[3].parse().map_err(|_| bad())?,
                f[4].to_string(),
            ))
        })
        .collect()
}

/// Instance metadata written next to generated graphs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub family: String,
    pub params: Vec<usize>,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    /// Height of the BFS tree from node 0.
    pub depth: usize,
    pub weighted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<LowerBoundRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerBoundRecord {
    pub delta_prime: usize,
    pub d_prime: usize,
    pub delta: usize,
    pub k: usize,
    pub depth: usize,
    pub top_nodes: usize,
    pub side: usize,
    pub node_count: usize,
    pub edge_count: usize,
    /// Exact `p/q`.
    pub quality_floor: String,
}

impl From<&LowerBoundMeta> for LowerBoundRecord {
    fn from(m: &LowerBoundMeta) -> Self {
        LowerBoundRecord {
            delta_prime: m.delta_prime,
            d_prime: m.d_prime,
            delta: m.delta,
            k: m.k,
            depth: m.depth,
            top_nodes: m.top_nodes,
            side: m.side,
            node_count: m.node_count,
            edge_count: m.edge_count,
            quality_floor: m.quality_floor.to_string(),
        }
    }
}
