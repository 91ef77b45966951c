//! Concurrent directed graph: a lazy list of vertices, each carrying a lazy
//! list of outgoing edge keys.
//!
//! Both layers reuse the same cell machinery, so every mutation is a locked
//! two-cell window edit and every query is a lock-free traversal. Edge
//! operations never lock the endpoint vertex cells, only an edge-list
//! window inside the source vertex; after taking that window they re-read
//! both endpoint marks and give up if either vertex has been logically
//! removed in the meantime.
//!
//! `die` (delete-incoming-edges) controls what `remove_vertex` does with
//! edges pointing at the removed key: when enabled, the remover walks every
//! surviving vertex's edge list after releasing its own locks and removes
//! the stale cells. Without it the cells stay behind; the abstract graph
//! (and hence `quiescent_snapshot`) hides them because an edge only exists
//! when both endpoints do.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::list::{user_key_in_range, Cell, KeyRangeError, LazyList, LockLevel};
use crate::snapshot::GraphSnapshot;

pub type EdgeList = LazyList<()>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphError {
    SelfLoop(i64),
    KeyRange(i64),
}

impl std::fmt::Display for GraphError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GraphError::SelfLoop(u) => write!(f, "self-loop ({u},{u}) is not supported"),
            GraphError::KeyRange(k) => write!(f, "key {k} outside the user key range"),
        }
    }
}

impl std::error::Error for GraphError {}

impl From<KeyRangeError> for GraphError {
    fn from(e: KeyRangeError) -> Self {
        GraphError::KeyRange(e.0)
    }
}

pub(crate) fn check_key(u: i64) -> Result<(), GraphError> {
    if user_key_in_range(u) {
        Ok(())
    } else {
        Err(GraphError::KeyRange(u))
    }
}

pub(crate) fn check_edge_keys(u: i64, v: i64) -> Result<(), GraphError> {
    check_key(u)?;
    check_key(v)?;
    if u == v {
        return Err(GraphError::SelfLoop(u));
    }
    Ok(())
}

pub struct Graph {
    vertices: LazyList<EdgeList>,
    die: bool,
    in_flight: AtomicUsize,
}

/// Scope marker for the debug quiescence check.
struct OpGuard<'a>(&'a AtomicUsize);

impl<'a> OpGuard<'a> {
    fn enter(counter: &'a AtomicUsize) -> Self {
        if cfg!(debug_assertions) {
            counter.fetch_add(1, Ordering::Relaxed);
        }
        OpGuard(counter)
    }
}

impl Drop for OpGuard<'_> {
    fn drop(&mut self) {
        if cfg!(debug_assertions) {
            self.0.fetch_sub(1, Ordering::Relaxed);
        }
    }
}

impl Graph {
    pub fn new(die: bool) -> Self {
        Graph {
            vertices: LazyList::new(LockLevel::Vertex),
            die,
            in_flight: AtomicUsize::new(0),
        }
    }

    pub fn die_enabled(&self) -> bool {
        self.die
    }

    /// Bulk-seeds ascending vertex keys, all above the current maximum.
    /// Quiescent only.
    pub fn seed_vertices(&self, keys: impl IntoIterator<Item = i64>) {
        self.vertices
            .extend_from_sorted(keys.into_iter().map(|k| (k, EdgeList::default())));
    }

    /// Bulk-seeds ascending out-edges of a present vertex, all above its
    /// current maximum edge key. Quiescent only; targets are not checked
    /// for presence.
    pub fn seed_out_edges(&self, u: i64, targets: impl IntoIterator<Item = i64>) {
        let cell = self
            .vertices
            .find_cell(u)
            .expect("seed_out_edges requires a present source vertex");
        cell.payload()
            .extend_from_sorted(targets.into_iter().map(|v| (v, ())));
    }

    /// Always true for an in-range key: a second add of the same key is an
    /// idempotent no-op.
    pub fn add_vertex(&self, u: i64) -> Result<bool, GraphError> {
        check_key(u)?;
        let _g = OpGuard::enter(&self.in_flight);
        if !self.vertices.contains(u) {
            let _ = self.vertices.insert(u, EdgeList::default())?;
        }
        Ok(true)
    }

    pub fn remove_vertex(&self, u: i64) -> Result<bool, GraphError> {
        check_key(u)?;
        let _g = OpGuard::enter(&self.in_flight);
        let removed = self.vertices.remove(u)?;
        if removed && self.die {
            // The vertex window locks are already released; stale edges are
            // purged per list, each under that list's own window.
            self.vertices.for_each_unmarked(|w, edges| {
                if w != u {
                    let _ = edges.remove(u);
                }
            });
        }
        Ok(removed)
    }

    /// Finds both endpoint cells with one traversal resuming from the
    /// smaller key.
    fn help_search_edge(&self, u: i64, v: i64) -> Option<(&Cell<EdgeList>, &Cell<EdgeList>)> {
        let (lo, hi) = (u.min(v), u.max(v));
        let lo_cell = self.vertices.find_cell(lo)?;
        let hi_cell = if lo == hi {
            lo_cell
        } else {
            self.vertices.find_cell_from(lo_cell, hi)?
        };
        Some(if u <= v {
            (lo_cell, hi_cell)
        } else {
            (hi_cell, lo_cell)
        })
    }

    pub fn add_edge(&self, u: i64, v: i64) -> Result<bool, GraphError> {
        check_edge_keys(u, v)?;
        let _g = OpGuard::enter(&self.in_flight);
        let Some((uc, vc)) = self.help_search_edge(u, v) else {
            return Ok(false);
        };
        let w = uc.payload().locate(v);
        if uc.is_marked() || vc.is_marked() {
            return Ok(false);
        }
        if !w.found(v) {
            w.insert(v, ());
        }
        Ok(true)
    }

    pub fn remove_edge(&self, u: i64, v: i64) -> Result<bool, GraphError> {
        check_edge_keys(u, v)?;
        let _g = OpGuard::enter(&self.in_flight);
        let Some((uc, vc)) = self.help_search_edge(u, v) else {
            return Ok(false);
        };
        let w = uc.payload().locate(v);
        if uc.is_marked() || vc.is_marked() {
            return Ok(false);
        }
        if w.found(v) {
            w.mark_and_unlink();
        }
        Ok(true)
    }

    pub fn contains_vertex(&self, u: i64) -> bool {
        self.vertices.contains(u)
    }

    /// Membership plus the number of vertex cells the traversal visited.
    pub fn contains_vertex_visits(&self, u: i64) -> (bool, usize) {
        self.vertices.contains_visits(u)
    }

    pub fn contains_edge(&self, u: i64, v: i64) -> bool {
        if !user_key_in_range(u) || !user_key_in_range(v) {
            return false;
        }
        let Some((uc, _vc)) = self.help_search_edge(u, v) else {
            return false;
        };
        uc.payload().contains(v)
    }

    /// Best-effort lock-free reachability over unmarked vertices and edges.
    /// Exact at quiescence; under concurrency the answer is a valid view of
    /// some interleaving of the traversed cells.
    pub fn path_exists_live(&self, from: i64, to: i64) -> bool {
        if !user_key_in_range(from) || !user_key_in_range(to) {
            return false;
        }
        if self.vertices.find_cell(from).is_none() || self.vertices.find_cell(to).is_none() {
            return false;
        }
        if from == to {
            return true;
        }
        let mut seen = HashSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            let Some(cell) = self.vertices.find_cell(x) else {
                continue;
            };
            let mut out = Vec::new();
            cell.payload().for_each_unmarked(|y, _| out.push(y));
            for y in out {
                if y == to {
                    return true;
                }
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        false
    }

    /// The abstract graph: unmarked vertices, and unmarked edge cells whose
    /// destination is itself a present vertex.
    pub fn quiescent_snapshot(&self) -> GraphSnapshot {
        debug_assert_eq!(
            self.in_flight.load(Ordering::Relaxed),
            0,
            "snapshot requires quiescence"
        );
        let mut vertices = BTreeSet::new();
        let mut raw = Vec::new();
        self.vertices.for_each_unmarked(|u, edges| {
            vertices.insert(u);
            edges.for_each_unmarked(|v, _| raw.push((u, v)));
        });
        let edges = raw
            .into_iter()
            .filter(|(_, v)| vertices.contains(v))
            .collect();
        GraphSnapshot { vertices, edges }
    }

    /// Every unmarked edge cell, dangling ones included. Used to verify the
    /// delete-incoming-edges invariant, which is about cells rather than
    /// the abstract graph.
    pub fn quiescent_edge_cells(&self) -> Vec<(i64, i64)> {
        let mut raw = Vec::new();
        self.vertices.for_each_unmarked(|u, edges| {
            edges.for_each_unmarked(|v, _| raw.push((u, v)));
        });
        raw
    }
}

/// Single-mutex baseline with identical semantics, for benchmarking.
pub struct CoarseGraph {
    inner: parking_lot::Mutex<crate::oracle::GraphModel>,
}

impl Default for CoarseGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl CoarseGraph {
    pub fn new() -> Self {
        CoarseGraph {
            inner: parking_lot::Mutex::new(crate::oracle::GraphModel::new(
                crate::oracle::Semantics::Graph,
            )),
        }
    }

    pub fn add_vertex(&self, u: i64) -> Result<bool, GraphError> {
        check_key(u)?;
        self.inner.lock().vertices.insert(u);
        Ok(true)
    }

    pub fn remove_vertex(&self, u: i64) -> Result<bool, GraphError> {
        check_key(u)?;
        let mut g = self.inner.lock();
        let present = g.vertices.remove(&u);
        if present {
            g.edges.retain(|&(a, b)| a != u && b != u);
        }
        Ok(present)
    }

    pub fn add_edge(&self, u: i64, v: i64) -> Result<bool, GraphError> {
        check_edge_keys(u, v)?;
        let mut g = self.inner.lock();
        if !g.vertices.contains(&u) || !g.vertices.contains(&v) {
            return Ok(false);
        }
        g.edges.insert((u, v));
        Ok(true)
    }

    pub fn remove_edge(&self, u: i64, v: i64) -> Result<bool, GraphError> {
        check_edge_keys(u, v)?;
        let mut g = self.inner.lock();
        if !g.vertices.contains(&u) || !g.vertices.contains(&v) {
            return Ok(false);
        }
        g.edges.remove(&(u, v));
        Ok(true)
    }

    pub fn contains_vertex(&self, u: i64) -> bool {
        self.inner.lock().vertices.contains(&u)
    }

    pub fn contains_edge(&self, u: i64, v: i64) -> bool {
        self.inner.lock().edges.contains(&(u, v))
    }

    pub fn quiescent_snapshot(&self) -> GraphSnapshot {
        self.inner.lock().snapshot()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::{Op, Recorder, Ret};
    use crate::lincheck::check_linearizable;
    use crate::oracle::{GraphModel, Semantics};
    use proptest::prelude::*;

    #[test]
    fn vertex_basics() {
        let g = Graph::new(false);
        assert_eq!(g.add_vertex(5), Ok(true));
        assert!(g.contains_vertex(5));
        assert_eq!(g.add_vertex(5), Ok(true));
        assert_eq!(g.quiescent_snapshot().vertices.len(), 1);
        assert_eq!(g.remove_vertex(5), Ok(true));
        assert!(!g.contains_vertex(5));
        assert_eq!(g.remove_vertex(5), Ok(false));
        assert!(g.add_vertex(i64::MAX).is_err());
    }

    #[test]
    fn edge_basics() {
        let g = Graph::new(false);
        g.add_vertex(5).unwrap();
        g.add_vertex(7).unwrap();
        assert_eq!(g.add_edge(5, 7), Ok(true));
        assert!(g.contains_edge(5, 7));
        assert!(!g.contains_edge(7, 5));
        assert_eq!(g.add_edge(5, 7), Ok(true));
        assert_eq!(g.add_edge(5, 9), Ok(false));
        assert_eq!(g.add_edge(9, 5), Ok(false));
        assert_eq!(g.add_edge(5, 5), Err(GraphError::SelfLoop(5)));
        assert_eq!(g.remove_edge(5, 7), Ok(true));
        assert!(!g.contains_edge(5, 7));
        assert_eq!(g.remove_edge(5, 7), Ok(true));
        assert_eq!(g.remove_edge(5, 9), Ok(false));
        assert!(!g.contains_edge(5, 9));
        assert!(!g.contains_edge(3, 3));
    }

    #[test]
    fn die_purges_incoming_cells() {
        let g = Graph::new(true);
        for k in [1, 2, 5] {
            g.add_vertex(k).unwrap();
        }
        g.add_edge(1, 5).unwrap();
        g.add_edge(2, 5).unwrap();
        g.add_edge(1, 2).unwrap();
        assert_eq!(g.remove_vertex(5), Ok(true));
        assert_eq!(g.quiescent_edge_cells(), vec![(1, 2)]);
        assert!(!g.contains_edge(1, 5));
    }

    #[test]
    fn no_die_leaves_cells_but_hides_them() {
        let g = Graph::new(false);
        for k in [1, 2, 5] {
            g.add_vertex(k).unwrap();
        }
        g.add_edge(1, 5).unwrap();
        g.add_edge(2, 5).unwrap();
        g.remove_vertex(5).unwrap();
        assert_eq!(g.quiescent_edge_cells(), vec![(1, 5), (2, 5)]);
        let snap = g.quiescent_snapshot();
        assert!(snap.edges.is_empty());
        assert!(!g.contains_edge(1, 5));
        assert!(!g.contains_edge(5, 1));
    }

    #[test]
    fn snapshot_example() {
        let g = Graph::new(true);
        g.add_vertex(1).unwrap();
        g.add_vertex(2).unwrap();
        g.add_edge(1, 2).unwrap();
        let snap = g.quiescent_snapshot();
        assert_eq!(snap.to_text(), "V 1\nV 2\nE 1 2\n");
        let empty = Graph::new(true);
        assert_eq!(empty.quiescent_snapshot().to_text(), "");
    }

    #[test]
    fn reachability_live() {
        let g = Graph::new(true);
        for k in 1..=4 {
            g.add_vertex(k).unwrap();
        }
        g.add_edge(1, 2).unwrap();
        g.add_edge(2, 3).unwrap();
        assert!(g.path_exists_live(1, 3));
        assert!(!g.path_exists_live(3, 1));
        assert!(g.path_exists_live(4, 4));
        assert!(!g.path_exists_live(1, 9));
        g.remove_edge(2, 3).unwrap();
        assert!(!g.path_exists_live(1, 3));
    }

    #[test]
    fn reads_take_no_locks() {
        let g = Graph::new(true);
        for k in 1..=8 {
            g.add_vertex(k).unwrap();
        }
        g.add_edge(2, 6).unwrap();
        let before = crate::thread_lock_acquisitions();
        for k in 1..=9 {
            g.contains_vertex(k);
            g.contains_edge(2, k);
            g.contains_edge(k, 6);
        }
        assert_eq!(crate::thread_lock_acquisitions(), before);
    }

    fn perform(g: &Graph, op: Op) -> Ret {
        match op {
            Op::AddVertex(u) => Ret::Bool(g.add_vertex(u).unwrap()),
            Op::RemoveVertex(u) => Ret::Bool(g.remove_vertex(u).unwrap()),
            Op::AddEdge(u, v) => Ret::Bool(g.add_edge(u, v).unwrap()),
            Op::RemoveEdge(u, v) => Ret::Bool(g.remove_edge(u, v).unwrap()),
            Op::ContainsVertex(u) => Ret::Bool(g.contains_vertex(u)),
            Op::ContainsEdge(u, v) => Ret::Bool(g.contains_edge(u, v)),
            _ => unreachable!("plain graph test ops only"),
        }
    }

    fn arb_op(max_key: i64) -> impl Strategy<Value = Op> {
        (0u8..6, 1..=max_key, 1..=max_key).prop_filter_map("self loop", |(code, a, b)| {
            Some(match code {
                0 => Op::AddVertex(a),
                1 => Op::RemoveVertex(a),
                2 if a != b => Op::AddEdge(a, b),
                3 if a != b => Op::RemoveEdge(a, b),
                4 => Op::ContainsVertex(a),
                5 => Op::ContainsEdge(a, b),
                _ => return None,
            })
        })
    }

    proptest! {
        #[test]
        fn sequential_conformance_die(ops in proptest::collection::vec(arb_op(6), 0..200)) {
            let g = Graph::new(true);
            let mut model = GraphModel::new(Semantics::Graph);
            for op in ops {
                prop_assert_eq!(perform(&g, op), model.apply(op), "{:?}", op);
            }
            prop_assert_eq!(g.quiescent_snapshot(), model.snapshot());
        }

        #[test]
        fn coarse_matches_model(ops in proptest::collection::vec(arb_op(6), 0..200)) {
            let g = CoarseGraph::new();
            let mut model = GraphModel::new(Semantics::Graph);
            for op in ops {
                let got = match op {
                    Op::AddVertex(u) => g.add_vertex(u).unwrap(),
                    Op::RemoveVertex(u) => g.remove_vertex(u).unwrap(),
                    Op::AddEdge(u, v) => g.add_edge(u, v).unwrap(),
                    Op::RemoveEdge(u, v) => g.remove_edge(u, v).unwrap(),
                    Op::ContainsVertex(u) => g.contains_vertex(u),
                    Op::ContainsEdge(u, v) => g.contains_edge(u, v),
                    _ => unreachable!(),
                };
                prop_assert_eq!(Ret::Bool(got), model.apply(op));
            }
            prop_assert_eq!(g.quiescent_snapshot(), model.snapshot());
        }
    }

    #[test]
    fn concurrent_histories_linearizable() {
        let mix = [
            |k: i64, _: i64| Op::AddVertex(k),
            |k: i64, _: i64| Op::RemoveVertex(k),
            |k: i64, j: i64| Op::AddEdge(k, j),
            |k: i64, j: i64| Op::RemoveEdge(k, j),
            |k: i64, _: i64| Op::ContainsVertex(k),
            |k: i64, j: i64| Op::ContainsEdge(k, j),
        ];
        for round in 0..40u64 {
            let g = Graph::new(true);
            let rec = Recorder::new();
            std::thread::scope(|s| {
                for tid in 0..4u64 {
                    let (g, rec, mix) = (&g, &rec, &mix);
                    s.spawn(move || {
                        for i in 0..4u64 {
                            let x = round
                                .wrapping_mul(0x9E3779B97F4A7C15)
                                .wrapping_add(tid * 31 + i * 7);
                            let k = 1 + (x % 5) as i64;
                            let j = 1 + ((x / 5) % 5) as i64;
                            let op = mix[(x % 6) as usize](k, if j == k { 1 + (j % 5) } else { j });
                            let op = match op {
                                Op::AddEdge(a, b) if a == b => Op::ContainsVertex(a),
                                Op::RemoveEdge(a, b) if a == b => Op::ContainsEdge(a, b),
                                other => other,
                            };
                            rec.invoke(tid, op).unwrap();
                            std::thread::yield_now();
                            let ret = perform(g, op);
                            rec.response(tid, ret).unwrap();
                        }
                    });
                }
            });
            let history = rec.finish();
            let out = check_linearizable(&history, Semantics::Graph).unwrap();
            assert!(
                out.linearizable,
                "round {round} not linearizable:\n{}",
                history.to_jsonl()
            );
        }
        assert_eq!(crate::lock_order_violations(), 0);
    }

    #[test]
    fn concurrent_die_containment() {
        let g = Graph::new(true);
        std::thread::scope(|s| {
            for t in 0..4i64 {
                let g = &g;
                s.spawn(move || {
                    for i in 0..300i64 {
                        let k = 1 + (t * 300 + i) % 24;
                        match (t + i) % 4 {
                            0 => {
                                g.add_vertex(k).unwrap();
                            }
                            1 => {
                                let j = 1 + (k + 5) % 24;
                                if j != k {
                                    g.add_edge(k, j).unwrap();
                                }
                            }
                            2 => {
                                g.remove_vertex(k).unwrap();
                            }
                            _ => {
                                let j = 1 + (k + 11) % 24;
                                if j != k {
                                    g.remove_edge(k, j).unwrap();
                                }
                            }
                        }
                    }
                });
            }
        });
        let snap = g.quiescent_snapshot();
        for (u, v) in g.quiescent_edge_cells() {
            assert!(
                snap.vertices.contains(&u) && snap.vertices.contains(&v),
                "dangling edge cell ({u},{v}) after DIE workload"
            );
        }
        assert_eq!(crate::lock_order_violations(), 0);
    }

    #[test]
    fn contains_edge_self_key_is_false() {
        let g = Graph::new(true);
        g.add_vertex(3).unwrap();
        assert!(!g.contains_edge(3, 3));
    }

    #[test]
    fn bulk_seeding_matches_incremental_build() {
        let a = Graph::new(false);
        a.seed_vertices(1..=200);
        a.seed_out_edges(7, [8, 9, 50]);
        let b = Graph::new(false);
        for k in 1..=200 {
            b.add_vertex(k).unwrap();
        }
        for v in [8, 9, 50] {
            b.add_edge(7, v).unwrap();
        }
        assert_eq!(a.quiescent_snapshot(), b.quiescent_snapshot());
        let (found, visits) = a.contains_vertex_visits(200);
        assert!(found);
        assert!(visits <= 202);
        let (found, visits) = a.contains_vertex_visits(201);
        assert!(!found);
        assert!(visits <= 202);
    }
}
