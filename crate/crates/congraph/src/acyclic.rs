//! Cycle-rejecting wrapper: the graph stays acyclic at every quiescent
//! point.
//!
//! Edge insertion goes through `acyclic_add_edge`, which refuses any edge
//! that would close a directed cycle. Deletions cannot create cycles, so
//! everything else passes through to the inner graph unchanged.
//!
//! Two modes:
//!
//! * serialized-check (default): one mutex serializes the reachability
//!   check with the insertion it guards, making the mode safe under any
//!   concurrency.
//! * optimistic: insert first, check afterwards, roll the edge back on
//!   cycle detection. Safe sequentially; under concurrency two in-flight
//!   insertions can miss each other, so it exists for benchmarking the
//!   uncoordinated configuration.

use parking_lot::Mutex;

use crate::graph::{check_edge_keys, Graph, GraphError};
use crate::snapshot::GraphSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcyclicMode {
    SerializedCheck,
    Optimistic,
}

pub struct AcyclicGraph {
    inner: Graph,
    mode: AcyclicMode,
    check_lock: Mutex<()>,
}

impl AcyclicGraph {
    pub fn new(mode: AcyclicMode, die: bool) -> Self {
        AcyclicGraph {
            inner: Graph::new(die),
            mode,
            check_lock: Mutex::new(()),
        }
    }

    pub fn mode(&self) -> AcyclicMode {
        self.mode
    }

    /// Raw inner handle; mutations through it bypass the cycle check.
    pub fn inner(&self) -> &Graph {
        &self.inner
    }

    /// False when a vertex is absent (as addEdge) or when inserting u→v
    /// would close a cycle; true with the edge present otherwise.
    pub fn acyclic_add_edge(&self, u: i64, v: i64) -> Result<bool, GraphError> {
        check_edge_keys(u, v)?;
        match self.mode {
            AcyclicMode::SerializedCheck => {
                let _guard = self.check_lock.lock();
                if self.inner.path_exists_live(v, u) {
                    return Ok(false);
                }
                self.inner.add_edge(u, v)
            }
            AcyclicMode::Optimistic => {
                if !self.inner.add_edge(u, v)? {
                    return Ok(false);
                }
                if self.inner.path_exists_live(v, u) {
                    let _ = self.inner.remove_edge(u, v)?;
                    return Ok(false);
                }
                Ok(true)
            }
        }
    }

    pub fn add_vertex(&self, u: i64) -> Result<bool, GraphError> {
        self.inner.add_vertex(u)
    }

    pub fn remove_vertex(&self, u: i64) -> Result<bool, GraphError> {
        self.inner.remove_vertex(u)
    }

    pub fn remove_edge(&self, u: i64, v: i64) -> Result<bool, GraphError> {
        self.inner.remove_edge(u, v)
    }

    pub fn contains_vertex(&self, u: i64) -> bool {
        self.inner.contains_vertex(u)
    }

    pub fn contains_edge(&self, u: i64, v: i64) -> bool {
        self.inner.contains_edge(u, v)
    }

    pub fn quiescent_snapshot(&self) -> GraphSnapshot {
        self.inner.quiescent_snapshot()
    }

    /// Quiescent acyclicity oracle.
    pub fn verify_acyclic(&self) -> bool {
        snapshot_is_acyclic(&self.quiescent_snapshot())
    }
}

/// Kahn-style check: true iff peeling zero-indegree vertices consumes the
/// whole snapshot.
pub fn snapshot_is_acyclic(snap: &GraphSnapshot) -> bool {
    use std::collections::{BTreeMap, VecDeque};
    let mut indegree: BTreeMap<i64, usize> = snap.vertices.iter().map(|&v| (v, 0)).collect();
    let mut succ: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for &(a, b) in &snap.edges {
        *indegree.get_mut(&b).expect("snapshot edges are endpoint-closed") += 1;
        succ.entry(a).or_default().push(b);
    }
    let mut queue: VecDeque<i64> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&v, _)| v)
        .collect();
    let mut consumed = 0usize;
    while let Some(v) = queue.pop_front() {
        consumed += 1;
        for &w in succ.get(&v).into_iter().flatten() {
            let d = indegree.get_mut(&w).unwrap();
            *d -= 1;
            if *d == 0 {
                queue.push_back(w);
            }
        }
    }
    consumed == snap.vertices.len()
}
