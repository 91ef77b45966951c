//! Sequential reference model and offline graph oracles.
//!
//! `GraphModel` is the sequential specification every concurrent variant is
//! judged against: a plain vertex set plus an endpoint-closed edge set, with
//! the exact return-value table of the concurrent API. `offline_scc` computes
//! the strongly-connected-component partition of a quiescent snapshot by
//! three independent algorithms (Tarjan, Kosaraju, forward-backward) so the
//! oracles can cross-check each other before they are trusted to judge the
//! concurrent structure.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::history::{Op, Ret};
use crate::snapshot::GraphSnapshot;

/// Return-value dialect: plain graphs report addVertex as always true
/// (idempotent), the SCC registry reports a duplicate add as false.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Semantics {
    Graph,
    Scc,
}

/// The abstract graph: vertex set and endpoint-closed edge set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GraphModel {
    pub semantics: Semantics,
    pub vertices: BTreeSet<i64>,
    pub edges: BTreeSet<(i64, i64)>,
}

impl GraphModel {
    pub fn new(semantics: Semantics) -> Self {
        GraphModel {
            semantics,
            vertices: BTreeSet::new(),
            edges: BTreeSet::new(),
        }
    }

    pub fn from_snapshot(semantics: Semantics, snap: &GraphSnapshot) -> Self {
        GraphModel {
            semantics,
            vertices: snap.vertices.clone(),
            edges: snap.edges.clone(),
        }
    }

    pub fn snapshot(&self) -> GraphSnapshot {
        GraphSnapshot {
            vertices: self.vertices.clone(),
            edges: self.edges.clone(),
        }
    }

    fn has(&self, u: i64) -> bool {
        self.vertices.contains(&u)
    }

    /// Applies one operation and returns its specified value.
    pub fn apply(&mut self, op: Op) -> Ret {
        match op {
            Op::AddVertex(u) => {
                let inserted = self.vertices.insert(u);
                Ret::Bool(match self.semantics {
                    Semantics::Graph => true,
                    Semantics::Scc => inserted,
                })
            }
            Op::RemoveVertex(u) => {
                let present = self.vertices.remove(&u);
                if present {
                    self.edges.retain(|&(a, b)| a != u && b != u);
                }
                Ret::Bool(present)
            }
            Op::AddEdge(u, v) => {
                if !self.has(u) || !self.has(v) {
                    Ret::Bool(false)
                } else {
                    self.edges.insert((u, v));
                    Ret::Bool(true)
                }
            }
            Op::RemoveEdge(u, v) => {
                if !self.has(u) || !self.has(v) {
                    Ret::Bool(false)
                } else {
                    self.edges.remove(&(u, v));
                    Ret::Bool(true)
                }
            }
            Op::ContainsVertex(u) => Ret::Bool(self.has(u)),
            Op::ContainsEdge(u, v) => Ret::Bool(self.edges.contains(&(u, v))),
            Op::CheckScc(u, v) => {
                if !self.has(u) || !self.has(v) {
                    return Ret::Bool(false);
                }
                let parts = offline_scc(&self.snapshot(), SccAlgo::Tarjan);
                Ret::Bool(parts.same_block(u, v))
            }
            Op::BelongsTo(u) => {
                if !self.has(u) {
                    return Ret::Absent;
                }
                let parts = offline_scc(&self.snapshot(), SccAlgo::Tarjan);
                Ret::Id(parts.block_of(u).and_then(|b| b.first().copied()).unwrap_or(u))
            }
            Op::AcyclicAddEdge(u, v) => {
                if !self.has(u) || !self.has(v) {
                    return Ret::Bool(false);
                }
                if path_exists(&self.snapshot(), v, u) {
                    return Ret::Bool(false);
                }
                self.edges.insert((u, v));
                Ret::Bool(true)
            }
        }
    }
}

/// A partition of the vertex set into SCCs, in canonical (sorted) form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Partition {
    pub blocks: BTreeSet<BTreeSet<i64>>,
}

impl Partition {
    pub fn from_groups(groups: impl IntoIterator<Item = Vec<i64>>) -> Self {
        Partition {
            blocks: groups
                .into_iter()
                .map(|g| g.into_iter().collect())
                .collect(),
        }
    }

    pub fn block_of(&self, u: i64) -> Option<&BTreeSet<i64>> {
        self.blocks.iter().find(|b| b.contains(&u))
    }

    pub fn same_block(&self, u: i64, v: i64) -> bool {
        self.block_of(u).is_some_and(|b| b.contains(&v))
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for block in &self.blocks {
            let members: Vec<String> = block.iter().map(|k| k.to_string()).collect();
            writeln!(f, "{{{}}}", members.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SccAlgo {
    Tarjan,
    Kosaraju,
    FwBw,
}

impl SccAlgo {
    pub const ALL: [SccAlgo; 3] = [SccAlgo::Tarjan, SccAlgo::Kosaraju, SccAlgo::FwBw];

    pub fn parse(name: &str) -> Option<SccAlgo> {
        match name {
            "tarjan" => Some(SccAlgo::Tarjan),
            "kosaraju" => Some(SccAlgo::Kosaraju),
            "fwbw" => Some(SccAlgo::FwBw),
            _ => None,
        }
    }
}

struct Adjacency {
    ids: Vec<i64>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

fn adjacency(snap: &GraphSnapshot) -> Adjacency {
    let ids: Vec<i64> = snap.vertices.iter().copied().collect();
    let index: HashMap<i64, usize> = ids.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let mut succ = vec![Vec::new(); ids.len()];
    let mut pred = vec![Vec::new(); ids.len()];
    for &(a, b) in &snap.edges {
        let (ia, ib) = (index[&a], index[&b]);
        succ[ia].push(ib);
        pred[ib].push(ia);
    }
    Adjacency { ids, succ, pred }
}

pub fn offline_scc(snap: &GraphSnapshot, algorithm: SccAlgo) -> Partition {
    let adj = adjacency(snap);
    let groups = match algorithm {
        SccAlgo::Tarjan => tarjan(&adj),
        SccAlgo::Kosaraju => kosaraju(&adj),
        SccAlgo::FwBw => fwbw(&adj),
    };
    Partition::from_groups(
        groups
            .into_iter()
            .map(|g| g.into_iter().map(|i| adj.ids[i]).collect()),
    )
}

fn tarjan(adj: &Adjacency) -> Vec<Vec<usize>> {
    let n = adj.ids.len();
    const UNSET: u32 = u32::MAX;
    let mut index = vec![UNSET; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0u32;
    let mut out = Vec::new();

    struct Frame {
        v: usize,
        edge: usize,
    }

    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        let mut frames = vec![Frame { v: root, edge: 0 }];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(frame) = frames.last_mut() {
            let v = frame.v;
            if frame.edge < adj.succ[v].len() {
                let w = adj.succ[v][frame.edge];
                frame.edge += 1;
                if index[w] == UNSET {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push(Frame { v: w, edge: 0 });
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                if low[v] == index[v] {
                    let mut group = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        group.push(w);
                        if w == v {
                            break;
                        }
                    }
                    out.push(group);
                }
                frames.pop();
                if let Some(parent) = frames.last() {
                    low[parent.v] = low[parent.v].min(low[v]);
                }
            }
        }
    }
    out
}

fn kosaraju(adj: &Adjacency) -> Vec<Vec<usize>> {
    let n = adj.ids.len();
    let mut finished = Vec::with_capacity(n);
    let mut visited = vec![false; n];

    for root in 0..n {
        if visited[root] {
            continue;
        }
        let mut frames = vec![(root, 0usize)];
        visited[root] = true;
        while let Some(&mut (v, ref mut edge)) = frames.last_mut() {
            if *edge < adj.succ[v].len() {
                let w = adj.succ[v][*edge];
                *edge += 1;
                if !visited[w] {
                    visited[w] = true;
                    frames.push((w, 0));
                }
            } else {
                finished.push(v);
                frames.pop();
            }
        }
    }

    let mut assigned = vec![false; n];
    let mut out = Vec::new();
    for &root in finished.iter().rev() {
        if assigned[root] {
            continue;
        }
        let mut group = vec![root];
        assigned[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj.pred[v] {
                if !assigned[w] {
                    assigned[w] = true;
                    group.push(w);
                    queue.push_back(w);
                }
            }
        }
        out.push(group);
    }
    out
}

fn fwbw(adj: &Adjacency) -> Vec<Vec<usize>> {
    fn reach(start: usize, within: &BTreeSet<usize>, next: &[Vec<usize>]) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &next[v] {
                if within.contains(&w) && seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    let mut out = Vec::new();
    let mut work: Vec<BTreeSet<usize>> = vec![(0..adj.ids.len()).collect()];
    while let Some(set) = work.pop() {
        let Some(&pivot) = set.first() else { continue };
        let fwd = reach(pivot, &set, &adj.succ);
        let bwd = reach(pivot, &set, &adj.pred);
        let scc: BTreeSet<usize> = fwd.intersection(&bwd).copied().collect();
        work.push(fwd.difference(&scc).copied().collect());
        work.push(bwd.difference(&scc).copied().collect());
        work.push(
            set.iter()
                .copied()
                .filter(|v| !fwd.contains(v) && !bwd.contains(v))
                .collect(),
        );
        out.push(scc.into_iter().collect());
    }
    out
}

/// True iff a directed path u ⇝ v exists in the snapshot. The empty path
/// makes `path_exists(u, u)` true for any present u; an absent endpoint
/// yields false.
pub fn path_exists(snap: &GraphSnapshot, u: i64, v: i64) -> bool {
    if !snap.vertices.contains(&u) || !snap.vertices.contains(&v) {
        return false;
    }
    if u == v {
        return true;
    }
    let mut succ: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for &(a, b) in &snap.edges {
        succ.entry(a).or_default().push(b);
    }
    let mut seen = BTreeSet::from([u]);
    let mut queue = VecDeque::from([u]);
    while let Some(x) = queue.pop_front() {
        for &y in succ.get(&x).into_iter().flatten() {
            if y == v {
                return true;
            }
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    false
}
