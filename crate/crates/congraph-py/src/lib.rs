//! Python bindings over the congraph structures.
//!
//! Build with `cargo build -p congraph-py`; `python/smoke_test.py` loads the
//! produced cdylib directly, no wheel packaging involved. All wrapped types
//! are safe to share across Python threads.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use congraph::acyclic::{AcyclicGraph as CoreAcyclic, AcyclicMode};
use congraph::graph::{Graph as CoreGraph, GraphError};
use congraph::history::{History, Op};
use congraph::lincheck::check_linearizable;
use congraph::oracle::{
    offline_scc as core_offline_scc, path_exists as core_path_exists, Partition, SccAlgo,
    Semantics,
};
use congraph::scc::SccGraph as CoreScc;
use congraph::snapshot::GraphSnapshot;

fn to_py_err(e: GraphError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn blocks(p: &Partition) -> Vec<Vec<i64>> {
    p.blocks
        .iter()
        .map(|b| b.iter().copied().collect())
        .collect()
}

fn parse_snapshot(text: &str) -> PyResult<GraphSnapshot> {
    GraphSnapshot::parse(text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Concurrent directed graph with lazy-list vertex and edge sets.
#[pyclass(frozen)]
struct Graph {
    inner: CoreGraph,
}

#[pymethods]
impl Graph {
    /// `die` enables eager removal of edges incident to a removed vertex.
    #[new]
    #[pyo3(signature = (die = false))]
    fn new(die: bool) -> Graph {
        Graph {
            inner: CoreGraph::new(die),
        }
    }

    fn add_vertex(&self, u: i64) -> PyResult<bool> {
        self.inner.add_vertex(u).map_err(to_py_err)
    }

    fn remove_vertex(&self, u: i64) -> PyResult<bool> {
        self.inner.remove_vertex(u).map_err(to_py_err)
    }

    fn add_edge(&self, u: i64, v: i64) -> PyResult<bool> {
        self.inner.add_edge(u, v).map_err(to_py_err)
    }

    fn remove_edge(&self, u: i64, v: i64) -> PyResult<bool> {
        self.inner.remove_edge(u, v).map_err(to_py_err)
    }

    fn contains_vertex(&self, u: i64) -> bool {
        self.inner.contains_vertex(u)
    }

    fn contains_edge(&self, u: i64, v: i64) -> bool {
        self.inner.contains_edge(u, v)
    }

    /// Text snapshot (`V k` / `E u v` lines); call only while quiescent.
    fn snapshot(&self) -> String {
        self.inner.quiescent_snapshot().to_text()
    }
}

/// Directed graph that maintains its strongly connected components.
#[pyclass(frozen)]
struct SccGraph {
    inner: CoreScc,
}

#[pymethods]
impl SccGraph {
    #[new]
    #[pyo3(signature = (die = false))]
    fn new(die: bool) -> SccGraph {
        SccGraph {
            inner: CoreScc::new(die),
        }
    }

    fn add_vertex(&self, u: i64) -> PyResult<bool> {
        self.inner.add_vertex(u).map_err(to_py_err)
    }

    fn remove_vertex(&self, u: i64) -> PyResult<bool> {
        self.inner.remove_vertex(u).map_err(to_py_err)
    }

    fn add_edge(&self, u: i64, v: i64) -> PyResult<bool> {
        self.inner.add_edge(u, v).map_err(to_py_err)
    }

    fn remove_edge(&self, u: i64, v: i64) -> PyResult<bool> {
        self.inner.remove_edge(u, v).map_err(to_py_err)
    }

    fn contains_vertex(&self, u: i64) -> bool {
        self.inner.contains_vertex(u)
    }

    /// True when `u` and `v` currently sit in the same component.
    fn check_scc(&self, u: i64, v: i64) -> bool {
        self.inner.check_scc(u, v)
    }

    /// Component id of `u`, or None when absent.
    fn belongs_to(&self, u: i64) -> Option<i64> {
        self.inner.belongs_to(u)
    }

    fn cc_count(&self) -> i64 {
        self.inner.cc_count()
    }

    /// Unlinks empty components; returns how many were reaped.
    fn compact_empty_components(&self) -> usize {
        self.inner.compact_empty_components()
    }

    /// Sorted component blocks; call only while quiescent.
    fn partition(&self) -> Vec<Vec<i64>> {
        blocks(&self.inner.partition())
    }

    /// `C <ccno>: members...` lines; call only while quiescent.
    fn export_partition(&self) -> String {
        self.inner.export_partition()
    }

    fn snapshot(&self) -> String {
        self.inner.snapshot().to_text()
    }
}

/// Directed graph whose edge additions reject cycle-closing edges.
#[pyclass(frozen)]
struct AcyclicGraph {
    inner: CoreAcyclic,
}

#[pymethods]
impl AcyclicGraph {
    /// `mode` is `serialized` (exact, one cycle check at a time) or
    /// `optimistic` (concurrent checks, stronger progress).
    #[new]
    #[pyo3(signature = (mode = "serialized", die = false))]
    fn new(mode: &str, die: bool) -> PyResult<AcyclicGraph> {
        let mode = match mode {
            "serialized" => AcyclicMode::SerializedCheck,
            "optimistic" => AcyclicMode::Optimistic,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown mode `{other}`; expected serialized or optimistic"
                )))
            }
        };
        Ok(AcyclicGraph {
            inner: CoreAcyclic::new(mode, die),
        })
    }

    /// Adds the edge unless it would close a cycle; False means rejected.
    fn acyclic_add_edge(&self, u: i64, v: i64) -> PyResult<bool> {
        self.inner.acyclic_add_edge(u, v).map_err(to_py_err)
    }

    fn add_vertex(&self, u: i64) -> PyResult<bool> {
        self.inner.add_vertex(u).map_err(to_py_err)
    }

    fn remove_vertex(&self, u: i64) -> PyResult<bool> {
        self.inner.remove_vertex(u).map_err(to_py_err)
    }

    fn remove_edge(&self, u: i64, v: i64) -> PyResult<bool> {
        self.inner.remove_edge(u, v).map_err(to_py_err)
    }

    fn contains_vertex(&self, u: i64) -> bool {
        self.inner.contains_vertex(u)
    }

    fn contains_edge(&self, u: i64, v: i64) -> bool {
        self.inner.contains_edge(u, v)
    }

    /// Offline acyclicity check of the quiescent state.
    fn verify_acyclic(&self) -> bool {
        self.inner.verify_acyclic()
    }

    fn snapshot(&self) -> String {
        self.inner.quiescent_snapshot().to_text()
    }
}

/// Strongly connected components of a snapshot text, as sorted blocks.
#[pyfunction]
#[pyo3(signature = (snapshot_text, algo = "tarjan"))]
fn offline_scc(snapshot_text: &str, algo: &str) -> PyResult<Vec<Vec<i64>>> {
    let snap = parse_snapshot(snapshot_text)?;
    let algo = SccAlgo::parse(algo).ok_or_else(|| {
        PyValueError::new_err(format!(
            "unknown algorithm `{algo}`; expected tarjan, kosaraju or fwbw"
        ))
    })?;
    Ok(blocks(&core_offline_scc(&snap, algo)))
}

/// Whether the snapshot has a directed path from `u` to `v`.
#[pyfunction]
fn path_exists(snapshot_text: &str, u: i64, v: i64) -> PyResult<bool> {
    Ok(core_path_exists(&parse_snapshot(snapshot_text)?, u, v))
}

/// Linearizability check of a JSONL history. Returns a dict with
/// `linearizable`, `completed`, `pending` and `states_explored`; semantics
/// is inferred from the ops unless given as `graph` or `scc`.
#[pyfunction]
#[pyo3(signature = (jsonl, semantics = None))]
fn check_history<'py>(
    py: Python<'py>,
    jsonl: &str,
    semantics: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let history = History::parse(jsonl).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let semantics = match semantics {
        Some("graph") => Semantics::Graph,
        Some("scc") => Semantics::Scc,
        Some(other) => {
            return Err(PyValueError::new_err(format!(
                "unknown semantics `{other}`; expected graph or scc"
            )))
        }
        None => {
            if history
                .events
                .iter()
                .any(|e| matches!(e.op, Op::CheckScc(..) | Op::BelongsTo(..)))
            {
                Semantics::Scc
            } else {
                Semantics::Graph
            }
        }
    };
    let outcome =
        check_linearizable(&history, semantics).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let d = PyDict::new(py);
    d.set_item("linearizable", outcome.linearizable)?;
    d.set_item("completed", outcome.completed)?;
    d.set_item("pending", outcome.pending)?;
    d.set_item("states_explored", outcome.states_explored)?;
    Ok(d)
}

#[pymodule]
fn congraph_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_class::<SccGraph>()?;
    m.add_class::<AcyclicGraph>()?;
    m.add_function(wrap_pyfunction!(offline_scc, m)?)?;
    m.add_function(wrap_pyfunction!(path_exists, m)?)?;
    m.add_function(wrap_pyfunction!(check_history, m)?)?;
    Ok(())
}
