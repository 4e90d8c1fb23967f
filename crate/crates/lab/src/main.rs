use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shortcut_core::sim::AggOp;
use shortcut_lab::bench::{parse_spec, run_bench, write_bench_csv};
use shortcut_lab::commands::{cmd_aggregate, cmd_audit, cmd_gen, cmd_mst, cmd_shortcut, Format};
use shortcut_lab::{Artifacts, CliError, Family};

#[derive(Parser)]
#[command(name = "shortcut-lab", version, about = "Low-congestion shortcut experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory (a file for `bench`); without it results go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Largest density guess before giving up.
    #[arg(long)]
    max_delta: Option<usize>,
    #[arg(long)]
    max_rounds: Option<usize>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Op {
    Min,
    Max,
    Sum,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph, a partition and metadata.
    Gen {
        #[arg(value_enum)]
        family: Family,
        /// lowerbound: δ' D'; grid: W H; wheel: N; ktree: N K
        params: Vec<usize>,
        #[arg(long)]
        seed: u64,
        /// Number of random connected parts.
        #[arg(long)]
        parts: Option<usize>,
        /// Attach distinct random weights.
        #[arg(long)]
        weighted: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Construct a shortcut, collect certificates and audit the result.
    Shortcut {
        graph: PathBuf,
        parts: PathBuf,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Audit an existing shortcut file.
    Audit {
        graph: PathBuf,
        parts: PathBuf,
        shortcut: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run partwise aggregation of node ids in the simulator.
    Aggregate {
        graph: PathBuf,
        parts: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Shortcut file; constructed when absent.
        #[arg(long)]
        shortcut: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Op::Min)]
        op: Op,
        #[command(flatten)]
        common: Common,
    },
    /// Boruvka MST checked against Kruskal.
    Mst {
        graph: PathBuf,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Run a TOML sweep and write a CSV (`--format` is ignored).
    Bench {
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn emit(art: &Artifacts, out: Option<&Path>) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::Runtime(e.to_string());
    let mut text = format!("{}\n", art.summary);
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io_err)?;
            for (name, contents) in &art.files {
                fs::write(dir.join(name), contents).map_err(io_err)?;
            }
        }
        None => {
            for (name, contents) in &art.files {
                text.push_str(&format!("== {name}\n{contents}"));
            }
        }
    }
    stdout(&text)
}

/// Writes to stdout; a closed pipe is not an error.
fn stdout(text: &str) -> Result<(), CliError> {
    let mut lock = io::stdout().lock();
    match lock.write_all(text.as_bytes()).and_then(|_| lock.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Runtime(e.to_string())),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen {
            family,
            params,
            seed,
            parts,
            weighted,
            common,
        } => emit(&cmd_gen(family, &params, seed, parts, weighted)?, common.out.as_deref()),
        Command::Shortcut {
            graph,
            parts,
            seed,
            common,
        } => {
            let art = cmd_shortcut(&read(&graph)?, &read(&parts)?, seed, common.max_delta, common.format)?;
            emit(&art, common.out.as_deref())
        }
        Command::Audit {
            graph,
            parts,
            shortcut,
            common,
            ..
        } => {
            let art = cmd_audit(&read(&graph)?, &read(&parts)?, &read(&shortcut)?, common.format)?;
            emit(&art, common.out.as_deref())
        }
        Command::Aggregate {
            graph,
            parts,
            seed,
            shortcut,
            op,
            common,
        } => {
            let shortcut = shortcut.as_deref().map(read).transpose()?;
            let op = match op {
                Op::Min => AggOp::Min,
                Op::Max => AggOp::Max,
                Op::Sum => AggOp::Sum,
            };
            let art = cmd_aggregate(
                &read(&graph)?,
                &read(&parts)?,
                shortcut.as_deref(),
                op,
                seed,
                common.max_delta,
                common.max_rounds,
                common.format,
            )?;
            emit(&art, common.out.as_deref())
        }
        Command::Mst { graph, seed, common } => {
            let art = cmd_mst(&read(&graph)?, seed, common.max_delta, common.max_rounds, common.format)?;
            emit(&art, common.out.as_deref())
        }
        Command::Bench { spec, common } => {
            let mut spec = parse_spec(&read(&spec)?)?;
            spec.max_delta = common.max_delta.or(spec.max_delta);
            spec.max_rounds = common.max_rounds.or(spec.max_rounds);
            let rows = run_bench(&spec);
            let csv = write_bench_csv(&rows);
            match &common.out {
                Some(path) => fs::write(path, &csv).map_err(|e| CliError::Runtime(e.to_string()))?,
                None => stdout(&csv)?,
            }
            let failed = rows.iter().filter(|r| !r.ok()).count();
            if failed > 0 {
                return Err(CliError::Runtime(format!("{failed} of {} runs failed", rows.len())));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
