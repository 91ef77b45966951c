//! Concurrent directed graph structures built on lazy sorted linked lists,
//! with dynamic strongly-connected-component maintenance, an
//! acyclicity-preserving wrapper, a sequential reference model, offline SCC
//! algorithms and a brute-force linearizability checker for recorded
//! histories.
//!
//! Layout:
//!
//! ```text
//! list      lazy-list ordered set (per-cell locks, logical deletion)
//! graph     concurrent directed graph (vertex list of edge lists)
//! scc       SCC-graph (component list / vertex lists / signed edge lists)
//! acyclic   cycle-rejecting wrapper over graph
//! snapshot  quiescent vertex/edge sets and their text format
//! oracle    sequential model, offline Tarjan/Kosaraju/FW-BW, path oracle
//! history   invoke/response events, recorder, JSON-lines codec
//! lincheck  brute-force linearizability checker
//! ```

pub mod acyclic;
pub mod graph;
pub mod history;
pub mod lincheck;
pub mod list;
mod lockorder;
pub mod oracle;
pub mod scc;
pub mod snapshot;

pub use lockorder::{lock_order_violation_samples, lock_order_violations, thread_lock_acquisitions};
