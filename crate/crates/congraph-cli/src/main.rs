use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use congraph::history::{History, Op};
use congraph::lincheck::check_linearizable;
use congraph::oracle::Semantics;
use congraph::snapshot::GraphSnapshot;
use congraph_cli::criteria;
use congraph_cli::workload::{
    emit_csv, run_benchmark, BenchConfig, BenchResult, Variant, WorkloadMix,
};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "congraph",
    version,
    about = "Concurrent graph benchmarks, acceptance suites and history checking"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a workload benchmark and print per-op throughput.
    Bench(BenchArgs),
    /// Run an acceptance suite; exits 1 if any criterion fails.
    Accept(AcceptArgs),
    /// Check a recorded JSONL history for linearizability.
    CheckHistory(CheckHistoryArgs),
    /// Compare two quiescent snapshot files.
    SnapshotDiff(SnapshotDiffArgs),
}

#[derive(Args)]
struct BenchArgs {
    /// One of: seq, coarse, fine, fine-die, scc, scc-die,
    /// acyclic-serialized, acyclic-optimistic
    #[arg(long, default_value = "fine")]
    variant: String,
    /// Named mix (see --workload help), e.g. update-dominated
    #[arg(long, default_value = "update-dominated")]
    workload: String,
    /// Worker threads; omit to sweep 1,2,4,... up to the hardware count
    #[arg(long)]
    threads: Option<usize>,
    /// Seconds per run
    #[arg(long, default_value_t = 20.0)]
    duration: f64,
    /// Inclusive key range MIN:MAX
    #[arg(long, default_value = "1:1000000000")]
    key_range: String,
    /// Vertices seeded before the clock starts
    #[arg(long, default_value_t = 1024)]
    initial_vertices: usize,
    /// Random edges attempted among the seeded vertices
    #[arg(long, default_value_t = 4096)]
    initial_edges: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write results as CSV to this path
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct AcceptArgs {
    /// Suite name; `all` runs every criterion
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct CheckHistoryArgs {
    /// JSONL history file as written by the recorder
    path: PathBuf,
    /// graph | scc; inferred from the ops when omitted
    #[arg(long)]
    semantics: Option<String>,
}

#[derive(Args)]
struct SnapshotDiffArgs {
    a: PathBuf,
    b: PathBuf,
}

fn parse_key_range(text: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| format!("key range `{text}` is not MIN:MAX"))?;
    let lo: i64 = lo.trim().parse().map_err(|_| format!("bad key `{lo}`"))?;
    let hi: i64 = hi.trim().parse().map_err(|_| format!("bad key `{hi}`"))?;
    Ok((lo, hi))
}

fn thread_sweep() -> Vec<usize> {
    let hw = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let mut sweep = Vec::new();
    let mut t = 1;
    while t < hw {
        sweep.push(t);
        t *= 2;
    }
    sweep.push(hw);
    sweep
}

fn print_result(r: &BenchResult) {
    println!(
        "{} / {} : {} threads, {:.1}s, seed {} -> {} ops ({:.0} ops/s)",
        r.variant, r.workload, r.threads, r.duration_s, r.seed, r.total_ops, r.ops_per_sec
    );
    for (kind, count) in congraph_cli::workload::OpKind::ALL.iter().zip(r.per_op) {
        if count > 0 {
            println!("    {:<16} {count}", kind.name());
        }
    }
}

fn cmd_bench(args: BenchArgs) -> ExitCode {
    let variant = match Variant::parse(&args.variant) {
        Some(v) => v,
        None => {
            eprintln!(
                "unknown variant `{}`; expected one of: {}",
                args.variant,
                Variant::ALL.map(|v| v.name()).join(", ")
            );
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let mix = match WorkloadMix::preset(&args.workload) {
        Some(m) => m,
        None => {
            eprintln!(
                "unknown workload `{}`; expected one of: {}",
                args.workload,
                WorkloadMix::PRESETS.join(", ")
            );
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let (key_min, key_max) = match parse_key_range(&args.key_range) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if !args.duration.is_finite() || args.duration <= 0.0 {
        eprintln!("duration must be a positive number of seconds");
        return ExitCode::from(EXIT_USAGE);
    }
    let threads_list = match args.threads {
        Some(0) => {
            eprintln!("threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        Some(t) => vec![t],
        None => thread_sweep(),
    };
    let mut results = Vec::new();
    for threads in threads_list {
        let cfg = BenchConfig {
            variant,
            workload: args.workload.clone(),
            threads,
            duration: std::time::Duration::from_secs_f64(args.duration),
            key_min,
            key_max,
            initial_vertices: args.initial_vertices,
            initial_edges: args.initial_edges,
            seed: args.seed,
        };
        match run_benchmark(&cfg, &mix) {
            Ok(r) => {
                print_result(&r);
                results.push(r);
            }
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(EXIT_USAGE);
            }
        }
    }
    if let Some(path) = args.csv {
        let mut buf = Vec::new();
        if let Err(e) = emit_csv(&results, &mut buf) {
            eprintln!("csv export failed: {e}");
            return ExitCode::from(EXIT_FAIL);
        }
        if let Err(e) = fs::write(&path, buf) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_FAIL);
        }
        println!("wrote {}", path.display());
    }
    ExitCode::SUCCESS
}

fn cmd_accept(args: AcceptArgs) -> ExitCode {
    let reports = match criteria::run_suite(&args.suite, args.seed, |r| println!("{}", r.line())) {
        Some(reports) => reports,
        None => {
            eprintln!(
                "unknown suite `{}`; expected one of: {}",
                args.suite,
                criteria::SUITES.join(", ")
            );
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let failed: Vec<&str> = reports.iter().filter(|r| !r.ok()).map(|r| r.name).collect();
    if failed.is_empty() {
        println!("suite {}: all {} criteria passed", args.suite, reports.len());
        ExitCode::SUCCESS
    } else {
        println!("suite {}: FAILED ({})", args.suite, failed.join(", "));
        ExitCode::from(EXIT_FAIL)
    }
}

fn cmd_check_history(args: CheckHistoryArgs) -> ExitCode {
    let text = match fs::read_to_string(&args.path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.path.display());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let history = match History::parse(&text) {
        Ok(h) => h,
        Err(e) => {
            eprintln!("malformed history: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let semantics = match args.semantics.as_deref() {
        Some("graph") => Semantics::Graph,
        Some("scc") => Semantics::Scc,
        Some(other) => {
            eprintln!("unknown semantics `{other}`; expected graph or scc");
            return ExitCode::from(EXIT_USAGE);
        }
        None => {
            let scc = history
                .events
                .iter()
                .any(|e| matches!(e.op, Op::CheckScc(..) | Op::BelongsTo(..)));
            if scc {
                Semantics::Scc
            } else {
                Semantics::Graph
            }
        }
    };
    match check_linearizable(&history, semantics) {
        Ok(outcome) if outcome.linearizable => {
            println!(
                "linearizable: {} completed ops, {} states explored",
                outcome.completed, outcome.states_explored
            );
            ExitCode::SUCCESS
        }
        Ok(outcome) => {
            println!(
                "NOT linearizable: {} completed ops, {} states explored",
                outcome.completed, outcome.states_explored
            );
            ExitCode::from(EXIT_FAIL)
        }
        Err(e) => {
            eprintln!("cannot check history: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn cmd_snapshot_diff(args: SnapshotDiffArgs) -> ExitCode {
    let load = |path: &PathBuf| -> Result<GraphSnapshot, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        GraphSnapshot::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    };
    let a = match load(&args.a) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let b = match load(&args.b) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if a == b {
        println!("snapshots identical");
        ExitCode::SUCCESS
    } else {
        print!("{}", a.diff(&b));
        ExitCode::from(EXIT_FAIL)
    }
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Accept(args) => cmd_accept(args),
        Cmd::CheckHistory(args) => cmd_check_history(args),
        Cmd::SnapshotDiff(args) => cmd_snapshot_diff(args),
    }
}
