//! Acceptance criteria drivers, shared by the `accept` subcommand and the
//! acceptance integration test. Each criterion runs at its stated scale and
//! reports one line; soft criteria report warnings instead of failing.

use std::collections::BTreeSet;
use std::sync::mpsc;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use congraph::acyclic::{AcyclicGraph, AcyclicMode};
use congraph::graph::Graph;
use congraph::history::{Op, Recorder, Ret};
use congraph::lincheck::check_linearizable;
use congraph::lock_order_violations;
use congraph::oracle::{offline_scc, path_exists, GraphModel, SccAlgo, Semantics};
use congraph::scc::SccGraph;
use congraph::snapshot::GraphSnapshot;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::workload::{run_benchmark, BenchConfig, Variant, WorkloadMix, THREAD_SEED_STRIDE};

const TRIAL_SEED_STRIDE: u64 = 0xD1B5_4A32_D192_ED03;

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub skipped: bool,
    pub details: String,
    pub elapsed: Duration,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        let verdict = if self.skipped {
            "SKIP"
        } else if self.passed {
            "PASS"
        } else {
            "FAIL"
        };
        format!(
            "criterion {:02} {verdict} {}: {} [{:.1}s]",
            self.id,
            self.name,
            self.details,
            self.elapsed.as_secs_f64()
        )
    }

    /// Skips count as acceptable outcomes; only hard failures do not.
    pub fn ok(&self) -> bool {
        self.passed || self.skipped
    }
}

fn finish(
    id: usize,
    name: &'static str,
    passed: bool,
    details: String,
    t0: Instant,
) -> CriterionReport {
    CriterionReport {
        id,
        name,
        passed,
        skipped: false,
        details,
        elapsed: t0.elapsed(),
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ trial.wrapping_mul(TRIAL_SEED_STRIDE))
}

fn random_graph_op(rng: &mut ChaCha8Rng, key_max: i64) -> Op {
    let u = rng.random_range(1..=key_max);
    let mut v = rng.random_range(1..=key_max);
    if v == u {
        v = if u < key_max { u + 1 } else { 1 };
    }
    match rng.random_range(0..6u32) {
        0 => Op::AddVertex(u),
        1 => Op::RemoveVertex(u),
        2 => Op::AddEdge(u, v),
        3 => Op::RemoveEdge(u, v),
        4 => Op::ContainsVertex(u),
        _ => Op::ContainsEdge(u, v),
    }
}

fn perform_graph(g: &Graph, op: Op) -> bool {
    match op {
        Op::AddVertex(u) => g.add_vertex(u),
        Op::RemoveVertex(u) => g.remove_vertex(u),
        Op::AddEdge(u, v) => g.add_edge(u, v),
        Op::RemoveEdge(u, v) => g.remove_edge(u, v),
        Op::ContainsVertex(u) => Ok(g.contains_vertex(u)),
        Op::ContainsEdge(u, v) => Ok(g.contains_edge(u, v)),
        _ => unreachable!("graph histories use graph ops only"),
    }
    .expect("criterion keys are in range")
}

/// Criterion 1: 1000 recorded multithreaded histories, all linearizable.
pub fn criterion_lin_histories(seed: u64) -> CriterionReport {
    let t0 = Instant::now();
    let mut linearizable = 0usize;
    let mut states_total = 0u64;
    let mut first_failure = String::new();
    for i in 0..1000u64 {
        let threads = 3 + (i % 2);
        let ops_per_thread = if threads == 3 { 5 } else { 4 };
        let recorder = Recorder::new();
        let g = Graph::new(true);
        std::thread::scope(|s| {
            for t in 0..threads {
                let recorder = &recorder;
                let g = &g;
                s.spawn(move || {
                    let mut rng = trial_rng(seed ^ t.wrapping_mul(THREAD_SEED_STRIDE), i);
                    for _ in 0..ops_per_thread {
                        let op = random_graph_op(&mut rng, 5);
                        recorder.invoke(t, op).unwrap();
                        if rng.random_bool(0.5) {
                            std::thread::yield_now();
                        }
                        let ret = perform_graph(g, op);
                        recorder.response(t, Ret::Bool(ret)).unwrap();
                        if rng.random_bool(0.25) {
                            std::thread::yield_now();
                        }
                    }
                });
            }
        });
        let history = recorder.finish();
        match check_linearizable(&history, Semantics::Graph) {
            Ok(outcome) if outcome.linearizable => {
                linearizable += 1;
                states_total += outcome.states_explored;
            }
            Ok(_) => {
                if first_failure.is_empty() {
                    first_failure = format!("; first non-linearizable history:\n{}", history.to_jsonl());
                }
            }
            Err(e) => {
                if first_failure.is_empty() {
                    first_failure = format!("; checker error: {e}");
                }
            }
        }
    }
    finish(
        1,
        "lin-histories",
        linearizable == 1000,
        format!("{linearizable}/1000 histories linearizable ({states_total} states explored){first_failure}"),
        t0,
    )
}

/// Criterion 2: 100000 sequential op sequences conform to the model.
pub fn criterion_seq_conformance(seed: u64) -> CriterionReport {
    let t0 = Instant::now();
    let total = 100_000u64;
    let mut conforming = 0u64;
    let mut first_mismatch = String::new();
    for s in 0..total {
        let mut rng = trial_rng(seed, s);
        let len = rng.random_range(8..=24);
        let g = Graph::new(true);
        let mut model = GraphModel::new(Semantics::Graph);
        let mut ok = true;
        for _ in 0..len {
            let op = random_graph_op(&mut rng, 6);
            let got = Ret::Bool(perform_graph(&g, op));
            let want = model.apply(op);
            if got != want {
                ok = false;
                if first_mismatch.is_empty() {
                    first_mismatch = format!(
                        "; first mismatch: {} {:?} returned {:?}, model says {:?}",
                        op.name(),
                        op.args(),
                        got,
                        want
                    );
                }
                break;
            }
        }
        if ok && g.quiescent_snapshot() != model.snapshot() {
            ok = false;
            if first_mismatch.is_empty() {
                first_mismatch = "; final snapshot diverged from the model".to_string();
            }
        }
        if ok {
            conforming += 1;
        }
    }
    finish(
        2,
        "sequential-conformance",
        conforming == total,
        format!("{conforming}/{total} sequences conform{first_mismatch}"),
        t0,
    )
}

struct SccWorkerSetup<'a> {
    graph: &'a SccGraph,
    n: i64,
    threads: usize,
    duration: Duration,
    seed: u64,
}

fn run_scc_workload(setup: SccWorkerSetup<'_>) {
    let SccWorkerSetup {
        graph,
        n,
        threads,
        duration,
        seed,
    } = setup;
    std::thread::scope(|s| {
        for t in 0..threads {
            s.spawn(move || {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(seed ^ (t as u64).wrapping_mul(THREAD_SEED_STRIDE));
                // Own slice of the seeded keys plus own fresh keys; removed
                // keys are never re-added.
                let mut shadow: Vec<i64> =
                    (1..=n).filter(|&k| (k - 1) as usize % threads == t).collect();
                let mut fresh = n + 1 + t as i64;
                let started = Instant::now();
                let sample = |rng: &mut ChaCha8Rng, shadow: &Vec<i64>| -> i64 {
                    if !shadow.is_empty() && rng.random_range(0..100u32) < 20 {
                        shadow[rng.random_range(0..shadow.len())]
                    } else {
                        rng.random_range(1..=n)
                    }
                };
                loop {
                    for _ in 0..16 {
                        let roll = rng.random_range(0..100u32);
                        if roll < 10 {
                            graph.add_vertex(fresh).unwrap();
                            shadow.push(fresh);
                            fresh += threads as i64;
                        } else if roll < 35 {
                            let u = sample(&mut rng, &shadow);
                            let v = sample(&mut rng, &shadow);
                            if u != v {
                                graph.add_edge(u, v).unwrap();
                            }
                        } else if roll < 45 {
                            let u = if shadow.is_empty() {
                                sample(&mut rng, &shadow)
                            } else {
                                let i = rng.random_range(0..shadow.len());
                                shadow.swap_remove(i)
                            };
                            graph.remove_vertex(u).unwrap();
                        } else if roll < 70 {
                            let u = sample(&mut rng, &shadow);
                            let v = sample(&mut rng, &shadow);
                            if u != v {
                                graph.remove_edge(u, v).unwrap();
                            }
                        } else if roll < 85 {
                            let u = sample(&mut rng, &shadow);
                            let v = sample(&mut rng, &shadow);
                            graph.check_scc(u, v);
                        } else {
                            let u = sample(&mut rng, &shadow);
                            graph.belongs_to(u);
                        }
                    }
                    if started.elapsed() >= duration {
                        break;
                    }
                }
            });
        }
    });
}

/// Criteria 3 and 10: 200 two-second 4-thread SCC trials; quiescent
/// partition equals offline Tarjan, and the component counters stay
/// consistent.
pub fn criterion_scc_oracle_and_counters(seed: u64) -> (CriterionReport, CriterionReport) {
    let t0 = Instant::now();
    let trials = 200u64;
    let mut partition_ok = 0u64;
    let mut symmetry_ok = 0u64;
    let mut counters_ok = 0u64;
    let mut first_diff = String::new();
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let n = rng.random_range(20..=100i64);
        let p = [2u32, 5, 10][rng.random_range(0..3usize)];
        let g = SccGraph::new(trial % 2 == 1);
        for k in 1..=n {
            g.add_vertex(k).unwrap();
        }
        for u in 1..=n {
            for v in 1..=n {
                if u != v && rng.random_range(0..100u32) < p {
                    g.add_edge(u, v).unwrap();
                }
            }
        }
        run_scc_workload(SccWorkerSetup {
            graph: &g,
            n,
            threads: 4,
            duration: Duration::from_secs(2),
            seed: seed ^ trial.wrapping_mul(TRIAL_SEED_STRIDE),
        });
        g.compact_empty_components();
        let partition = g.partition();
        let oracle = offline_scc(&g.snapshot(), SccAlgo::Tarjan);
        if partition == oracle {
            partition_ok += 1;
        } else if first_diff.is_empty() {
            first_diff = format!("; trial {trial}: partition diverged from offline Tarjan");
        }
        if g.edge_symmetry_holds() {
            symmetry_ok += 1;
        }
        let live = g.live_ccnos();
        let unique: BTreeSet<i64> = live.iter().copied().collect();
        if g.cc_count() == live.len() as i64 && unique.len() == live.len() {
            counters_ok += 1;
        }
    }
    let c3 = finish(
        3,
        "scc-quiescent-oracle",
        partition_ok == trials && symmetry_ok == trials,
        format!(
            "{partition_ok}/{trials} partitions match offline Tarjan, {symmetry_ok}/{trials} edge-symmetric{first_diff}"
        ),
        t0,
    );
    let c10 = CriterionReport {
        id: 10,
        name: "counter-consistency",
        passed: counters_ok == trials,
        skipped: false,
        details: format!(
            "{counters_ok}/{trials} trials: ccCount equals live unmarked components, ccnos unique (reissue also guarded by a debug assertion)"
        ),
        elapsed: t0.elapsed(),
    };
    (c3, c10)
}

/// Criterion 4: every single-edge delta on random base graphs keeps the
/// partition equal to a recomputed offline Tarjan.
pub fn criterion_scc_exhaustive(seed: u64) -> CriterionReport {
    let t0 = Instant::now();
    let n = 30i64;
    let bases = 20u64;
    let mut checks = 0u64;
    let mut mismatches = 0u64;
    for base in 0..bases {
        let mut rng = trial_rng(seed.wrapping_add(101), base);
        let p = [5u32, 8, 12][base as usize % 3];
        let g = SccGraph::new(false);
        for k in 1..=n {
            g.add_vertex(k).unwrap();
        }
        let mut present: BTreeSet<(i64, i64)> = BTreeSet::new();
        for u in 1..=n {
            for v in 1..=n {
                if u != v && rng.random_range(0..100u32) < p {
                    g.add_edge(u, v).unwrap();
                    present.insert((u, v));
                }
            }
        }
        let mut check = |g: &SccGraph| {
            checks += 1;
            if g.partition() != offline_scc(&g.snapshot(), SccAlgo::Tarjan) {
                mismatches += 1;
            }
        };
        check(&g);
        for u in 1..=n {
            for v in 1..=n {
                if u == v {
                    continue;
                }
                if present.contains(&(u, v)) {
                    g.remove_edge(u, v).unwrap();
                    check(&g);
                    g.add_edge(u, v).unwrap();
                    check(&g);
                } else {
                    g.add_edge(u, v).unwrap();
                    check(&g);
                    g.remove_edge(u, v).unwrap();
                    check(&g);
                }
            }
        }
    }
    finish(
        4,
        "scc-delta-exactness",
        mismatches == 0,
        format!("{bases} base graphs, {checks} single-delta checks, {mismatches} mismatches"),
        t0,
    )
}

fn random_snapshot(rng: &mut ChaCha8Rng, n: i64, p: u32) -> GraphSnapshot {
    let vertices: Vec<i64> = (1..=n).collect();
    let mut edges = Vec::new();
    for u in 1..=n {
        for v in 1..=n {
            if u != v && rng.random_range(0..1000u32) < p {
                edges.push((u, v));
            }
        }
    }
    GraphSnapshot::new(vertices, edges)
}

/// Criterion 5: the three offline SCC algorithms agree.
pub fn criterion_offline_agreement(seed: u64) -> CriterionReport {
    let t0 = Instant::now();
    let trials = 200u64;
    let mut agreeing = 0u64;
    for trial in 0..trials {
        let mut rng = trial_rng(seed.wrapping_add(505), trial);
        let n = rng.random_range(2..=60i64);
        let p = [20u32, 50, 100][rng.random_range(0..3usize)];
        let snap = random_snapshot(&mut rng, n, p);
        let tarjan = offline_scc(&snap, SccAlgo::Tarjan);
        let kosaraju = offline_scc(&snap, SccAlgo::Kosaraju);
        let fwbw = offline_scc(&snap, SccAlgo::FwBw);
        if tarjan == kosaraju && kosaraju == fwbw {
            agreeing += 1;
        }
    }
    finish(
        5,
        "offline-algorithm-agreement",
        agreeing == trials,
        format!("{agreeing}/{trials} graphs: tarjan = kosaraju = fwbw"),
        t0,
    )
}

/// Criterion 6: 50 eight-thread serialized-check trials stay acyclic and
/// every rejection is cycle-closing on the quiescent state.
pub fn criterion_acyclicity(seed: u64) -> CriterionReport {
    let t0 = Instant::now();
    let trials = 50u64;
    let n = 60i64;
    let mut verified = 0u64;
    let mut rejections_total = 0u64;
    let mut confirmed = 0u64;
    for trial in 0..trials {
        let mut rng = trial_rng(seed.wrapping_add(606), trial);
        let g = AcyclicGraph::new(AcyclicMode::SerializedCheck, false);
        for k in 1..=n {
            g.add_vertex(k).unwrap();
        }
        for u in 1..=n {
            for v in (u + 1)..=n {
                if rng.random_range(0..100u32) < 12 {
                    assert_eq!(g.acyclic_add_edge(u, v), Ok(true), "DAG seeding edge");
                }
            }
        }
        let rejections: Mutex<Vec<(i64, i64)>> = Mutex::new(Vec::new());
        std::thread::scope(|s| {
            for t in 0..8usize {
                let g = &g;
                let rejections = &rejections;
                s.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(
                        seed ^ trial.wrapping_mul(TRIAL_SEED_STRIDE)
                            ^ (t as u64).wrapping_mul(THREAD_SEED_STRIDE),
                    );
                    // Monotone workload: no removals, so a rejection's
                    // cycle-closing path persists to quiescence.
                    let mut added: Vec<i64> = Vec::new();
                    let mut fresh = n + 1 + t as i64;
                    let started = Instant::now();
                    loop {
                        for _ in 0..16 {
                            let sample = |rng: &mut ChaCha8Rng, added: &Vec<i64>| -> i64 {
                                if !added.is_empty() && rng.random_range(0..100u32) < 15 {
                                    added[rng.random_range(0..added.len())]
                                } else {
                                    rng.random_range(1..=n)
                                }
                            };
                            let roll = rng.random_range(0..100u32);
                            if roll < 40 {
                                let u = sample(&mut rng, &added);
                                let mut v = sample(&mut rng, &added);
                                if v == u {
                                    v = if u < n { u + 1 } else { 1 };
                                }
                                if !g.acyclic_add_edge(u, v).unwrap() {
                                    rejections.lock().unwrap().push((u, v));
                                }
                            } else if roll < 60 {
                                g.add_vertex(fresh).unwrap();
                                added.push(fresh);
                                fresh += 8;
                            } else if roll < 80 {
                                let u = sample(&mut rng, &added);
                                g.contains_vertex(u);
                            } else {
                                let u = sample(&mut rng, &added);
                                let v = sample(&mut rng, &added);
                                if u != v {
                                    g.contains_edge(u, v);
                                }
                            }
                        }
                        if started.elapsed() >= Duration::from_secs(2) {
                            break;
                        }
                    }
                });
            }
        });
        if g.verify_acyclic() {
            verified += 1;
        }
        let snap = g.quiescent_snapshot();
        for (u, v) in rejections.into_inner().unwrap() {
            rejections_total += 1;
            if path_exists(&snap, v, u) {
                confirmed += 1;
            }
        }
    }
    finish(
        6,
        "acyclicity",
        verified == trials && confirmed == rejections_total,
        format!(
            "verifyAcyclic {verified}/{trials}; {confirmed}/{rejections_total} rejections confirmed cycle-closing"
        ),
        t0,
    )
}

/// Criterion 7: update-dominated stress at 2x hardware threads completes
/// under a watchdog with zero lock-order violations, 10 repetitions.
pub fn criterion_deadlock_stress(seed: u64) -> CriterionReport {
    let t0 = Instant::now();
    let hw = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let threads = 2 * hw;
    let reps = 10u64;
    let mut completed = 0u64;
    let mut violations = 0usize;
    let mut note = String::new();
    for rep in 0..reps {
        let variant = if rep % 2 == 0 {
            Variant::Fine
        } else {
            Variant::FineDie
        };
        let cfg = BenchConfig {
            variant,
            workload: "update-dominated".to_string(),
            threads,
            duration: Duration::from_secs(10),
            key_min: 1,
            key_max: 1_000_000_000,
            initial_vertices: 500,
            initial_edges: 1000,
            seed: seed.wrapping_add(rep),
        };
        let mix = WorkloadMix::preset("update-dominated").unwrap();
        let before = lock_order_violations();
        let (tx, rx) = mpsc::channel();
        // Detached runner so a deadlock trips the watchdog instead of
        // hanging the criterion.
        std::thread::spawn(move || {
            let _ = tx.send(run_benchmark(&cfg, &mix));
        });
        match rx.recv_timeout(Duration::from_secs(60)) {
            Ok(Ok(_result)) => {
                completed += 1;
                violations += lock_order_violations() - before;
            }
            Ok(Err(e)) => {
                if note.is_empty() {
                    note = format!("; rep {rep} config error: {e}");
                }
            }
            Err(_) => {
                if note.is_empty() {
                    note = format!("; rep {rep} tripped the 60s watchdog");
                }
            }
        }
    }
    finish(
        7,
        "deadlock-progress",
        completed == reps && violations == 0,
        format!(
            "{completed}/{reps} stress runs ({threads} threads, 10s each) completed, {violations} lock-order violations{note}"
        ),
        t0,
    )
}

/// Criterion 8: instrumented containsVertex visits at most n + 2 cells.
pub fn criterion_waitfree_bound() -> CriterionReport {
    let t0 = Instant::now();
    let mut passed = true;
    let mut detail_parts = Vec::new();
    for &n in &[0usize, 1, 10, 1_000, 100_000] {
        let g = Graph::new(false);
        g.seed_vertices(1..=n as i64);
        let mut probes: Vec<i64> = vec![n as i64 + 1];
        if n > 0 {
            probes.extend([1, (n as i64 + 1) / 2, n as i64]);
            let mut rng = ChaCha8Rng::seed_from_u64(88);
            for _ in 0..50 {
                probes.push(rng.random_range(1..=n as i64));
            }
        }
        let mut max_visits = 0usize;
        for &k in &probes {
            let (_, visits) = g.contains_vertex_visits(k);
            max_visits = max_visits.max(visits);
            if visits > n + 2 {
                passed = false;
            }
        }
        detail_parts.push(format!("n={n}: max {max_visits} (bound {})", n + 2));
    }
    finish(
        8,
        "waitfree-read-bound",
        passed,
        detail_parts.join(", "),
        t0,
    )
}

/// Criterion 9 (soft): throughput comparison on at least 8 hardware
/// threads; reported and warned, never failed, below threshold.
pub fn criterion_throughput_soft(seed: u64) -> CriterionReport {
    let t0 = Instant::now();
    let hw = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    if hw < 8 {
        return CriterionReport {
            id: 9,
            name: "throughput-scaling",
            passed: true,
            skipped: true,
            details: format!(
                "requires at least 8 hardware threads, found {hw}; comparison not run"
            ),
            elapsed: t0.elapsed(),
        };
    }
    let mix = WorkloadMix::preset("contains-dominated").unwrap();
    let cfg = |variant: Variant, threads: usize| BenchConfig {
        variant,
        workload: "contains-dominated".to_string(),
        threads,
        duration: Duration::from_secs(2),
        key_min: 1,
        key_max: 1_000_000_000,
        initial_vertices: 1024,
        initial_edges: 4096,
        seed,
    };
    let run = |variant, threads| run_benchmark(&cfg(variant, threads), &mix).map(|r| r.ops_per_sec);
    let (fine_max, fine_one, coarse_max) = match (
        run(Variant::Fine, hw),
        run(Variant::Fine, 1),
        run(Variant::Coarse, hw),
    ) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        _ => {
            return finish(
                9,
                "throughput-scaling",
                false,
                "benchmark runs failed".to_string(),
                t0,
            )
        }
    };
    let ratio = fine_max / coarse_max;
    let scaling = fine_max / fine_one;
    let mut details = format!(
        "fine/coarse at {hw} threads = {ratio:.2}x (soft threshold 1.5x), fine {hw}-thread vs 1-thread = {scaling:.2}x"
    );
    if ratio < 1.5 || scaling < 1.0 {
        details.push_str(" WARNING: below soft threshold (reported, not failed)");
    }
    finish(9, "throughput-scaling", true, details, t0)
}

/// All criteria in order, invoking `on_report` as each one finishes.
pub fn run_all(seed: u64, mut on_report: impl FnMut(&CriterionReport)) -> Vec<CriterionReport> {
    let mut reports = Vec::new();
    let mut push = |r: CriterionReport, on_report: &mut dyn FnMut(&CriterionReport)| {
        on_report(&r);
        reports.push(r);
    };
    push(criterion_lin_histories(seed), &mut on_report);
    push(criterion_seq_conformance(seed), &mut on_report);
    let (c3, c10) = criterion_scc_oracle_and_counters(seed);
    push(c3, &mut on_report);
    push(criterion_scc_exhaustive(seed), &mut on_report);
    push(criterion_offline_agreement(seed), &mut on_report);
    push(criterion_acyclicity(seed), &mut on_report);
    push(criterion_deadlock_stress(seed), &mut on_report);
    push(criterion_waitfree_bound(), &mut on_report);
    push(criterion_throughput_soft(seed), &mut on_report);
    push(c10, &mut on_report);
    reports
}

/// Named acceptance suites for the CLI. The six paper-facing suites plus
/// helpers covering the remaining criteria and `all`.
pub const SUITES: [&str; 10] = [
    "lin-histories",
    "scc-oracle",
    "scc-sequential-exhaustive",
    "acyclicity",
    "deadlock-stress",
    "waitfree-bound",
    "seq-conformance",
    "offline-agreement",
    "throughput",
    "all",
];

pub fn run_suite(
    suite: &str,
    seed: u64,
    on_report: impl FnMut(&CriterionReport),
) -> Option<Vec<CriterionReport>> {
    let mut on_report = on_report;
    let single = |r: CriterionReport, f: &mut dyn FnMut(&CriterionReport)| {
        f(&r);
        vec![r]
    };
    let reports = match suite {
        "lin-histories" => single(criterion_lin_histories(seed), &mut on_report),
        "scc-oracle" => {
            let (c3, c10) = criterion_scc_oracle_and_counters(seed);
            on_report(&c3);
            on_report(&c10);
            vec![c3, c10]
        }
        "scc-sequential-exhaustive" => single(criterion_scc_exhaustive(seed), &mut on_report),
        "acyclicity" => single(criterion_acyclicity(seed), &mut on_report),
        "deadlock-stress" => single(criterion_deadlock_stress(seed), &mut on_report),
        "waitfree-bound" => single(criterion_waitfree_bound(), &mut on_report),
        "seq-conformance" => single(criterion_seq_conformance(seed), &mut on_report),
        "offline-agreement" => single(criterion_offline_agreement(seed), &mut on_report),
        "throughput" => single(criterion_throughput_soft(seed), &mut on_report),
        "all" => run_all(seed, on_report),
        _ => return None,
    };
    Some(reports)
}
