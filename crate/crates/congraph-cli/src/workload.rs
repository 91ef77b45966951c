//! Workload mixes, bench configuration and the multithreaded runner.
//!
//! A benchmark run seeds one structure variant, spawns workers that draw
//! operations from a percentage mix with per-thread seeded RNGs, and
//! aggregates counts after the wall-clock duration. Op kinds per seed are
//! deterministic; key choices follow per-thread shadow sets of live keys
//! (reconciled lazily when an op observes a key gone), and fresh vertex
//! keys come from disjoint per-thread arithmetic progressions, so a removed
//! key is never re-added.

use std::io;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use congraph::acyclic::{AcyclicGraph, AcyclicMode};
use congraph::graph::Graph;
use congraph::history::{Op, Ret};
use congraph::oracle::{GraphModel, Semantics};
use congraph::scc::SccGraph;
use congraph::snapshot::GraphSnapshot;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const THREAD_SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    AddVertex,
    RemoveVertex,
    AddEdge,
    RemoveEdge,
    ContainsVertex,
    ContainsEdge,
    CheckScc,
    BelongsTo,
    AcyclicAddEdge,
}

impl OpKind {
    pub const ALL: [OpKind; 9] = [
        OpKind::AddVertex,
        OpKind::RemoveVertex,
        OpKind::AddEdge,
        OpKind::RemoveEdge,
        OpKind::ContainsVertex,
        OpKind::ContainsEdge,
        OpKind::CheckScc,
        OpKind::BelongsTo,
        OpKind::AcyclicAddEdge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::AddVertex => "addVertex",
            OpKind::RemoveVertex => "removeVertex",
            OpKind::AddEdge => "addEdge",
            OpKind::RemoveEdge => "removeEdge",
            OpKind::ContainsVertex => "containsVertex",
            OpKind::ContainsEdge => "containsEdge",
            OpKind::CheckScc => "checkScc",
            OpKind::BelongsTo => "belongsTo",
            OpKind::AcyclicAddEdge => "acyclicAddEdge",
        }
    }

    pub fn csv_column(self) -> &'static str {
        match self {
            OpKind::AddVertex => "add_vertex",
            OpKind::RemoveVertex => "remove_vertex",
            OpKind::AddEdge => "add_edge",
            OpKind::RemoveEdge => "remove_edge",
            OpKind::ContainsVertex => "contains_vertex",
            OpKind::ContainsEdge => "contains_edge",
            OpKind::CheckScc => "check_scc",
            OpKind::BelongsTo => "belongs_to",
            OpKind::AcyclicAddEdge => "acyclic_add_edge",
        }
    }

    fn index(self) -> usize {
        OpKind::ALL.iter().position(|&k| k == self).unwrap()
    }
}

/// Percentage per operation; total 100.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkloadMix {
    pub percent: [u32; 9],
}

impl WorkloadMix {
    pub fn new(percent: [u32; 9]) -> Result<WorkloadMix, String> {
        let total: u32 = percent.iter().sum();
        if total != 100 {
            return Err(format!("workload percentages sum to {total}, expected 100"));
        }
        Ok(WorkloadMix { percent })
    }

    pub fn of(self, kind: OpKind) -> u32 {
        self.percent[kind.index()]
    }

    pub const PRESETS: [&'static str; 10] = [
        "update-dominated",
        "contains-dominated",
        "edge-churn",
        "scc-5050",
        "scc-9010",
        "scc-1090",
        "incremental",
        "decremental",
        "community",
        "acyclic",
    ];

    /// Named mixes. Order within: addVertex, removeVertex, addEdge,
    /// removeEdge, containsVertex, containsEdge, checkScc, belongsTo,
    /// acyclicAddEdge.
    pub fn preset(name: &str) -> Option<WorkloadMix> {
        let percent = match name {
            "update-dominated" => [25, 10, 25, 10, 15, 15, 0, 0, 0],
            "contains-dominated" => [7, 3, 7, 3, 40, 40, 0, 0, 0],
            "edge-churn" => [0, 0, 50, 50, 0, 0, 0, 0, 0],
            "scc-5050" => [25, 25, 25, 25, 0, 0, 0, 0, 0],
            "scc-9010" => [45, 5, 45, 5, 0, 0, 0, 0, 0],
            "scc-1090" => [5, 45, 5, 45, 0, 0, 0, 0, 0],
            "incremental" => [50, 0, 50, 0, 0, 0, 0, 0, 0],
            "decremental" => [0, 50, 0, 50, 0, 0, 0, 0, 0],
            "community" => [5, 5, 5, 5, 0, 0, 40, 40, 0],
            "acyclic" => [25, 10, 0, 10, 15, 15, 0, 0, 25],
            _ => return None,
        };
        Some(WorkloadMix::new(percent).expect("presets sum to 100"))
    }

    fn kind_for_roll(self, roll: u32) -> OpKind {
        let mut acc = 0;
        for kind in OpKind::ALL {
            acc += self.of(kind);
            if roll < acc {
                return kind;
            }
        }
        unreachable!("roll {roll} beyond 100")
    }

    fn uses_scc_queries(self) -> bool {
        self.of(OpKind::CheckScc) > 0 || self.of(OpKind::BelongsTo) > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Fine,
    FineDie,
    Coarse,
    Seq,
    Scc,
    SccDie,
    AcyclicSerialized,
    AcyclicOptimistic,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::Fine,
        Variant::FineDie,
        Variant::Coarse,
        Variant::Seq,
        Variant::Scc,
        Variant::SccDie,
        Variant::AcyclicSerialized,
        Variant::AcyclicOptimistic,
    ];

    pub fn parse(name: &str) -> Option<Variant> {
        Variant::ALL.iter().copied().find(|v| v.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Fine => "fine",
            Variant::FineDie => "fine-die",
            Variant::Coarse => "coarse",
            Variant::Seq => "seq",
            Variant::Scc => "scc",
            Variant::SccDie => "scc-die",
            Variant::AcyclicSerialized => "acyclic-serialized",
            Variant::AcyclicOptimistic => "acyclic-optimistic",
        }
    }

    /// Which op kinds the variant can execute. Seq and coarse run against
    /// the full sequential model and support everything.
    pub fn supports(self, kind: OpKind) -> bool {
        match self {
            Variant::Seq | Variant::Coarse => true,
            Variant::Fine | Variant::FineDie => matches!(
                kind,
                OpKind::AddVertex
                    | OpKind::RemoveVertex
                    | OpKind::AddEdge
                    | OpKind::RemoveEdge
                    | OpKind::ContainsVertex
                    | OpKind::ContainsEdge
            ),
            Variant::Scc | Variant::SccDie => matches!(
                kind,
                OpKind::AddVertex
                    | OpKind::RemoveVertex
                    | OpKind::AddEdge
                    | OpKind::RemoveEdge
                    | OpKind::ContainsVertex
                    | OpKind::CheckScc
                    | OpKind::BelongsTo
            ),
            Variant::AcyclicSerialized | Variant::AcyclicOptimistic => matches!(
                kind,
                OpKind::AddVertex
                    | OpKind::RemoveVertex
                    | OpKind::RemoveEdge
                    | OpKind::ContainsVertex
                    | OpKind::ContainsEdge
                    | OpKind::AcyclicAddEdge
            ),
        }
    }

}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub variant: Variant,
    pub workload: String,
    pub threads: usize,
    pub duration: Duration,
    pub key_min: i64,
    pub key_max: i64,
    pub initial_vertices: usize,
    pub initial_edges: usize,
    pub seed: u64,
}

impl BenchConfig {
    /// The seq variant runs unsynchronized and is forced to one thread.
    pub fn normalized(mut self) -> BenchConfig {
        if self.variant == Variant::Seq {
            self.threads = 1;
        }
        self
    }

    fn validate(&self, mix: &WorkloadMix) -> Result<(), String> {
        if self.threads == 0 {
            return Err("threads must be at least 1".into());
        }
        if self.key_min >= self.key_max {
            return Err("key range must contain at least two keys".into());
        }
        if self.key_min < 1 {
            return Err("key range must start at 1 or above".into());
        }
        let span = (self.key_max - self.key_min + 1) as usize;
        if self.initial_vertices > span {
            return Err("initial vertices exceed the key range".into());
        }
        for kind in OpKind::ALL {
            if mix.of(kind) > 0 && !self.variant.supports(kind) {
                return Err(format!(
                    "variant {} does not support {}",
                    self.variant.name(),
                    kind.name()
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BenchResult {
    pub variant: &'static str,
    pub workload: String,
    pub threads: usize,
    pub duration_s: f64,
    pub seed: u64,
    pub initial_vertices: usize,
    pub initial_edges: usize,
    pub total_ops: u64,
    pub ops_per_sec: f64,
    pub per_op: [u64; 9],
    pub per_thread: Vec<u64>,
}

enum Target {
    Fine(Graph),
    Coarse(std::sync::Mutex<GraphModel>),
    Scc(SccGraph),
    Acyclic(AcyclicGraph),
}

impl Target {
    fn perform(&self, op: Op) -> Ret {
        match self {
            Target::Fine(g) => {
                let b = match op {
                    Op::AddVertex(u) => g.add_vertex(u),
                    Op::RemoveVertex(u) => g.remove_vertex(u),
                    Op::AddEdge(u, v) => g.add_edge(u, v),
                    Op::RemoveEdge(u, v) => g.remove_edge(u, v),
                    Op::ContainsVertex(u) => Ok(g.contains_vertex(u)),
                    Op::ContainsEdge(u, v) => Ok(g.contains_edge(u, v)),
                    _ => unreachable!("validated op mix"),
                };
                Ret::Bool(b.expect("workload keys are always in range"))
            }
            Target::Coarse(m) => m.lock().unwrap().apply(op),
            Target::Scc(g) => match op {
                Op::AddVertex(u) => Ret::Bool(g.add_vertex(u).unwrap()),
                Op::RemoveVertex(u) => Ret::Bool(g.remove_vertex(u).unwrap()),
                Op::AddEdge(u, v) => Ret::Bool(g.add_edge(u, v).unwrap()),
                Op::RemoveEdge(u, v) => Ret::Bool(g.remove_edge(u, v).unwrap()),
                Op::ContainsVertex(u) => Ret::Bool(g.contains_vertex(u)),
                Op::CheckScc(u, v) => Ret::Bool(g.check_scc(u, v)),
                Op::BelongsTo(u) => match g.belongs_to(u) {
                    Some(ccno) => Ret::Id(ccno),
                    None => Ret::Absent,
                },
                _ => unreachable!("validated op mix"),
            },
            Target::Acyclic(g) => {
                let b = match op {
                    Op::AddVertex(u) => g.add_vertex(u),
                    Op::RemoveVertex(u) => g.remove_vertex(u),
                    Op::RemoveEdge(u, v) => g.remove_edge(u, v),
                    Op::ContainsVertex(u) => Ok(g.contains_vertex(u)),
                    Op::ContainsEdge(u, v) => Ok(g.contains_edge(u, v)),
                    Op::AcyclicAddEdge(u, v) => g.acyclic_add_edge(u, v),
                    _ => unreachable!("validated op mix"),
                };
                Ret::Bool(b.expect("workload keys are always in range"))
            }
        }
    }

    fn quiescent_snapshot(&self) -> GraphSnapshot {
        match self {
            Target::Fine(g) => g.quiescent_snapshot(),
            Target::Coarse(m) => m.lock().unwrap().snapshot(),
            Target::Scc(g) => g.snapshot(),
            Target::Acyclic(g) => g.quiescent_snapshot(),
        }
    }
}

fn build_target(cfg: &BenchConfig, mix: &WorkloadMix) -> Target {
    let semantics = if mix.uses_scc_queries() {
        Semantics::Scc
    } else {
        Semantics::Graph
    };
    match cfg.variant {
        Variant::Fine => Target::Fine(Graph::new(false)),
        Variant::FineDie => Target::Fine(Graph::new(true)),
        Variant::Seq | Variant::Coarse => {
            Target::Coarse(std::sync::Mutex::new(GraphModel::new(semantics)))
        }
        Variant::Scc => Target::Scc(SccGraph::new(false)),
        Variant::SccDie => Target::Scc(SccGraph::new(true)),
        Variant::AcyclicSerialized => {
            Target::Acyclic(AcyclicGraph::new(AcyclicMode::SerializedCheck, false))
        }
        Variant::AcyclicOptimistic => {
            Target::Acyclic(AcyclicGraph::new(AcyclicMode::Optimistic, false))
        }
    }
}

fn seed_target(target: &Target, cfg: &BenchConfig) {
    let last = cfg.key_min + cfg.initial_vertices as i64 - 1;
    match target {
        Target::Acyclic(g) => {
            // Initial complete acyclic graph: every edge low -> high.
            for u in cfg.key_min..=last {
                g.add_vertex(u).unwrap();
            }
            for u in cfg.key_min..=last {
                if u < last {
                    g.inner().seed_out_edges(u, u + 1..=last);
                }
            }
        }
        _ => {
            for u in cfg.key_min..=last {
                target.perform(Op::AddVertex(u));
            }
            if cfg.initial_vertices >= 2 {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                for _ in 0..cfg.initial_edges {
                    let u = rng.random_range(cfg.key_min..=last);
                    let v = rng.random_range(cfg.key_min..=last);
                    if u != v {
                        target.perform(Op::AddEdge(u, v));
                    }
                }
            }
        }
    }
}

struct Worker<'a> {
    rng: ChaCha8Rng,
    mix: WorkloadMix,
    key_min: i64,
    key_max: i64,
    seeded_last: i64,
    // Fresh keys per thread form the progression base + i * stride.
    fresh_next: i64,
    fresh_stride: i64,
    shadow: Vec<i64>,
    counts: [u64; 9],
    target: &'a Target,
}

impl Worker<'_> {
    fn sample_present_key(&mut self) -> i64 {
        if !self.shadow.is_empty() && self.rng.random_range(0..100u32) < 30 {
            self.shadow[self.rng.random_range(0..self.shadow.len())]
        } else if self.seeded_last >= self.key_min {
            self.rng.random_range(self.key_min..=self.seeded_last)
        } else if !self.shadow.is_empty() {
            self.shadow[self.rng.random_range(0..self.shadow.len())]
        } else {
            self.rng.random_range(self.key_min..=self.key_max)
        }
    }

    fn sample_distinct_pair(&mut self) -> (i64, i64) {
        let u = self.sample_present_key();
        for _ in 0..8 {
            let v = self.sample_present_key();
            if v != u {
                return (u, v);
            }
        }
        let v = if u < self.key_max { u + 1 } else { u - 1 };
        (u, v)
    }

    fn run_one(&mut self) {
        let mut kind = self.mix.kind_for_roll(self.rng.random_range(0..100u32));
        let op = loop {
            break match kind {
                OpKind::AddVertex => {
                    if self.fresh_next > self.key_max {
                        // Fresh keys exhausted; fall back to a read so a
                        // removed key is never re-added.
                        kind = OpKind::ContainsVertex;
                        continue;
                    }
                    let k = self.fresh_next;
                    self.fresh_next += self.fresh_stride;
                    self.shadow.push(k);
                    Op::AddVertex(k)
                }
                OpKind::RemoveVertex => {
                    if self.shadow.is_empty() {
                        let k = self.sample_present_key();
                        Op::RemoveVertex(k)
                    } else {
                        let i = self.rng.random_range(0..self.shadow.len());
                        Op::RemoveVertex(self.shadow.swap_remove(i))
                    }
                }
                OpKind::AddEdge => {
                    let (u, v) = self.sample_distinct_pair();
                    Op::AddEdge(u, v)
                }
                OpKind::RemoveEdge => {
                    let (u, v) = self.sample_distinct_pair();
                    Op::RemoveEdge(u, v)
                }
                OpKind::ContainsVertex => Op::ContainsVertex(self.sample_present_key()),
                OpKind::ContainsEdge => {
                    let (u, v) = self.sample_distinct_pair();
                    Op::ContainsEdge(u, v)
                }
                OpKind::CheckScc => {
                    let (u, v) = self.sample_distinct_pair();
                    Op::CheckScc(u, v)
                }
                OpKind::BelongsTo => Op::BelongsTo(self.sample_present_key()),
                OpKind::AcyclicAddEdge => {
                    let (u, v) = self.sample_distinct_pair();
                    Op::AcyclicAddEdge(u, v)
                }
            };
        };
        let ret = self.target.perform(op);
        // Lazy shadow reconciliation: a read that misses a shadow key means
        // another thread removed it.
        if let (Op::ContainsVertex(k), Ret::Bool(false)) = (op, ret) {
            self.shadow.retain(|&s| s != k);
        }
        self.counts[kind.index()] += 1;
    }
}

/// Seeds the variant, runs the mix on `cfg.threads` workers for the
/// configured duration, and aggregates counts.
pub fn run_benchmark(cfg: &BenchConfig, mix: &WorkloadMix) -> Result<BenchResult, String> {
    let cfg = cfg.clone().normalized();
    cfg.validate(mix)?;
    let target = build_target(&cfg, mix);
    seed_target(&target, &cfg);

    let stop = AtomicBool::new(false);
    let seeded_last = cfg.key_min + cfg.initial_vertices as i64 - 1;
    let fresh_base = seeded_last.max(cfg.key_min - 1) + 1;
    let mut per_thread_counts: Vec<[u64; 9]> = Vec::new();

    std::thread::scope(|s| {
        let mut handles = Vec::new();
        for t in 0..cfg.threads {
            let target = &target;
            let stop = &stop;
            let cfg = &cfg;
            let mix = *mix;
            handles.push(s.spawn(move || {
                let mut w = Worker {
                    rng: ChaCha8Rng::seed_from_u64(
                        cfg.seed ^ (t as u64).wrapping_mul(THREAD_SEED_STRIDE),
                    ),
                    mix,
                    key_min: cfg.key_min,
                    key_max: cfg.key_max,
                    seeded_last,
                    fresh_next: fresh_base + t as i64,
                    fresh_stride: cfg.threads as i64,
                    shadow: (cfg.key_min..=seeded_last)
                        .filter(|&k| (k - cfg.key_min) as usize % cfg.threads == t)
                        .collect(),
                    counts: [0; 9],
                    target,
                };
                let started = Instant::now();
                loop {
                    for _ in 0..32 {
                        w.run_one();
                    }
                    if started.elapsed() >= cfg.duration || stop.load(Ordering::Relaxed) {
                        break;
                    }
                }
                stop.store(true, Ordering::Relaxed);
                w.counts
            }));
        }
        for h in handles {
            per_thread_counts.push(h.join().expect("bench worker panicked"));
        }
    });

    let per_thread: Vec<u64> = per_thread_counts
        .iter()
        .map(|c| c.iter().sum::<u64>())
        .collect();
    let mut per_op = [0u64; 9];
    for c in &per_thread_counts {
        for (i, n) in c.iter().enumerate() {
            per_op[i] += n;
        }
    }
    let total_ops: u64 = per_op.iter().sum();
    assert_eq!(total_ops, per_thread.iter().sum::<u64>());
    let duration_s = cfg.duration.as_secs_f64();
    Ok(BenchResult {
        variant: cfg.variant.name(),
        workload: cfg.workload.clone(),
        threads: cfg.threads,
        duration_s,
        seed: cfg.seed,
        initial_vertices: cfg.initial_vertices,
        initial_edges: cfg.initial_edges,
        total_ops,
        ops_per_sec: total_ops as f64 / duration_s,
        per_op,
        per_thread,
    })
}

/// Like `run_benchmark` but also returns the final quiescent snapshot, for
/// determinism checks.
pub fn run_benchmark_with_snapshot(
    cfg: &BenchConfig,
    mix: &WorkloadMix,
) -> Result<(BenchResult, GraphSnapshot), String> {
    let cfg2 = cfg.clone().normalized();
    cfg2.validate(mix)?;
    let target = build_target(&cfg2, mix);
    seed_target(&target, &cfg2);
    // Single-threaded deterministic path: a fixed op count per second so
    // identical seeds give identical streams.
    if cfg2.threads != 1 {
        return Err("snapshot runs are defined for single-threaded configs".into());
    }
    let mut w = Worker {
        rng: ChaCha8Rng::seed_from_u64(cfg2.seed),
        mix: *mix,
        key_min: cfg2.key_min,
        key_max: cfg2.key_max,
        seeded_last: cfg2.key_min + cfg2.initial_vertices as i64 - 1,
        fresh_next: (cfg2.key_min + cfg2.initial_vertices as i64 - 1).max(cfg2.key_min - 1) + 1,
        fresh_stride: 1,
        shadow: (0..cfg2.initial_vertices)
            .map(|i| cfg2.key_min + i as i64)
            .collect(),
        counts: [0; 9],
        target: &target,
    };
    let ops = (cfg2.duration.as_secs_f64() * 200_000.0) as u64;
    for _ in 0..ops.max(1) {
        w.run_one();
    }
    let counts = w.counts;
    let total_ops: u64 = counts.iter().sum();
    let duration_s = cfg2.duration.as_secs_f64();
    Ok((
        BenchResult {
            variant: cfg2.variant.name(),
            workload: cfg2.workload.clone(),
            threads: 1,
            duration_s,
            seed: cfg2.seed,
            initial_vertices: cfg2.initial_vertices,
            initial_edges: cfg2.initial_edges,
            total_ops,
            ops_per_sec: total_ops as f64 / duration_s,
            per_op: counts,
            per_thread: vec![total_ops],
        },
        target.quiescent_snapshot(),
    ))
}

const FIXED_COLUMNS: [&str; 9] = [
    "variant",
    "workload",
    "threads",
    "duration_s",
    "seed",
    "initial_vertices",
    "initial_edges",
    "total_ops",
    "ops_per_sec",
];

/// Header plus one row per result; 9 fixed columns then one per op type.
pub fn emit_csv(results: &[BenchResult], dest: &mut dyn io::Write) -> Result<(), String> {
    if results.is_empty() {
        return Err("no results to emit".into());
    }
    let mut w = csv::Writer::from_writer(dest);
    let mut header: Vec<&str> = FIXED_COLUMNS.to_vec();
    header.extend(OpKind::ALL.iter().map(|k| k.csv_column()));
    w.write_record(&header).map_err(|e| e.to_string())?;
    for r in results {
        let mut row = vec![
            r.variant.to_string(),
            r.workload.clone(),
            r.threads.to_string(),
            format!("{}", r.duration_s),
            r.seed.to_string(),
            r.initial_vertices.to_string(),
            r.initial_edges.to_string(),
            r.total_ops.to_string(),
            format!("{:.3}", r.ops_per_sec),
        ];
        row.extend(r.per_op.iter().map(|n| n.to_string()));
        w.write_record(&row).map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}

/// Totals per row of an emitted CSV, for round-trip checks.
pub fn parse_csv_totals(text: &str) -> Result<Vec<u64>, String> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    let total_idx = headers
        .iter()
        .position(|h| h == "total_ops")
        .ok_or("missing total_ops column")?;
    let op_indices: Vec<usize> = OpKind::ALL
        .iter()
        .map(|k| {
            headers
                .iter()
                .position(|h| h == k.csv_column())
                .ok_or_else(|| format!("missing column {}", k.csv_column()))
        })
        .collect::<Result<_, _>>()?;
    let mut totals = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| e.to_string())?;
        let total: u64 = record[total_idx].parse().map_err(|_| "bad total")?;
        let sum: u64 = op_indices
            .iter()
            .map(|&i| record[i].parse::<u64>().unwrap_or(0))
            .sum();
        if total != sum {
            return Err(format!("row total {total} disagrees with op sum {sum}"));
        }
        totals.push(total);
    }
    Ok(totals)
}
