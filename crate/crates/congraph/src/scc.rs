//! Dynamic strongly-connected-component maintenance over a three-level
//! structure:
//!
//! ```text
//! CCHead -> [component ccno=7] -> [component ccno=3] -> ... -> CCTail
//!              |                     |
//!              sorted vertex list    sorted vertex list
//!                 |                     |
//!                 signed edge list per vertex
//! ```
//!
//! The component list is unordered (new components link at the head); each
//! component owns a sorted vertex list; each vertex carries one sorted edge
//! list of signed keys, `+d` for an outgoing edge to `d` and `-s` for an
//! incoming edge from `s`. Vertex keys are therefore restricted to be
//! strictly positive. The edge list is shared by reference when a vertex
//! relocates between components, so relocation never copies edges.
//!
//! Partition maintenance is incremental: an edge insertion that closes a
//! cycle across components runs a limited Tarjan pass and fuses the
//! affected components into a fresh one; an edge or vertex removal inside a
//! component re-derives that component's SCCs with per-pivot forward and
//! backward sweeps and relocates the fragments. Queries (`check_scc`,
//! `belongs_to`, `is_reachable`, `contains_*`) stay lock-free.
//!
//! A single registry-wide restructuring mutex serializes the mutating
//! operations end to end: each one re-resolves its vertices, edits the edge
//! cells and decides merge/split while holding it. The mutex is the
//! conservative answer to racing restructurings; lock-free readers are
//! untouched by it.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::atomic::{AtomicBool, AtomicI64, AtomicPtr, AtomicUsize, Ordering};
use std::sync::Arc;

use parking_lot::lock_api::RawMutex as _;
use parking_lot::{Mutex, RawMutex};

use crate::graph::GraphError;
use crate::list::{Cell, LazyList, LockLevel, MAX_SENTINEL, MIN_SENTINEL};
use crate::lockorder::{self, new_list_id};
use crate::oracle::Partition;
use crate::snapshot::GraphSnapshot;

pub type SccEdgeList = LazyList<()>;
type VertexList = LazyList<Arc<SccEdgeList>>;

fn scc_check_key(u: i64) -> Result<(), GraphError> {
    if u >= 1 && u < MAX_SENTINEL {
        Ok(())
    } else {
        Err(GraphError::KeyRange(u))
    }
}

fn scc_check_edge_keys(u: i64, v: i64) -> Result<(), GraphError> {
    scc_check_key(u)?;
    scc_check_key(v)?;
    if u == v {
        return Err(GraphError::SelfLoop(u));
    }
    Ok(())
}

struct Component {
    ccno: i64,
    marked: AtomicBool,
    next: AtomicPtr<Component>,
    lock: RawMutex,
    vertices: VertexList,
}

impl Component {
    fn new(ccno: i64, next: *mut Component) -> *mut Component {
        Box::into_raw(Box::new(Component {
            ccno,
            marked: AtomicBool::new(false),
            next: AtomicPtr::new(next),
            lock: RawMutex::INIT,
            vertices: VertexList::new(LockLevel::Vertex),
        }))
    }

    fn is_marked(&self) -> bool {
        self.marked.load(Ordering::Acquire)
    }

    fn next_ptr(&self) -> *mut Component {
        self.next.load(Ordering::Acquire)
    }

    fn acquire(&self, list: usize) {
        self.lock.lock();
        lockorder::on_acquire(list, LockLevel::Component, self.ccno);
    }

    fn release(&self, list: usize) {
        lockorder::on_release(list, self.ccno);
        unsafe { self.lock.unlock() };
    }

    fn member_keys(&self) -> Vec<i64> {
        self.vertices.quiescent_keys()
    }
}

pub struct SccGraph {
    cc_head: *mut Component,
    cc_tail: *mut Component,
    comp_arena: Mutex<Vec<*mut Component>>,
    comp_list_id: usize,
    ccid: AtomicI64,
    cc_count: AtomicI64,
    restructure: Mutex<()>,
    die: bool,
    in_flight: AtomicUsize,
    #[cfg(debug_assertions)]
    issued: Mutex<HashSet<i64>>,
}

unsafe impl Send for SccGraph {}
unsafe impl Sync for SccGraph {}

impl Drop for SccGraph {
    fn drop(&mut self) {
        let comps = std::mem::take(&mut *self.comp_arena.lock());
        for c in comps {
            drop(unsafe { Box::from_raw(c) });
        }
    }
}

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

struct ComponentIter<'a> {
    curr: *mut Component,
    tail: *mut Component,
    _graph: &'a SccGraph,
}

impl<'a> Iterator for ComponentIter<'a> {
    type Item = &'a Component;

    fn next(&mut self) -> Option<&'a Component> {
        if self.curr == self.tail {
            return None;
        }
        let comp = unsafe { &*self.curr };
        self.curr = comp.next_ptr();
        Some(comp)
    }
}

impl Default for SccGraph {
    fn default() -> Self {
        Self::new(false)
    }
}

impl SccGraph {
    /// `die` extends removeVertex's edge purge from the removed vertex's own
    /// component to every component.
    pub fn new(die: bool) -> Self {
        let tail = Component::new(MAX_SENTINEL, std::ptr::null_mut());
        let head = Component::new(MIN_SENTINEL, tail);
        SccGraph {
            cc_head: head,
            cc_tail: tail,
            comp_arena: Mutex::new(vec![head, tail]),
            comp_list_id: new_list_id(),
            ccid: AtomicI64::new(1),
            cc_count: AtomicI64::new(0),
            restructure: Mutex::new(()),
            die,
            in_flight: AtomicUsize::new(0),
            #[cfg(debug_assertions)]
            issued: Mutex::new(HashSet::new()),
        }
    }

    fn components(&self) -> ComponentIter<'_> {
        ComponentIter {
            curr: unsafe { (*self.cc_head).next_ptr() },
            tail: self.cc_tail,
            _graph: self,
        }
    }

    fn fresh_ccno(&self) -> i64 {
        let id = self.ccid.fetch_add(1, Ordering::Relaxed);
        #[cfg(debug_assertions)]
        {
            assert!(self.issued.lock().insert(id), "component id {id} reissued");
        }
        id
    }

    /// Lock-free: first unmarked component containing an unmarked cell for
    /// `key`, scanning from the head.
    fn locate_scc(&self, key: i64) -> Option<(&Component, &Cell<Arc<SccEdgeList>>)> {
        for comp in self.components() {
            if comp.is_marked() {
                continue;
            }
            if let Some(cell) = comp.vertices.find_cell(key) {
                return Some((comp, cell));
            }
        }
        None
    }

    fn alloc_component(&self, ccno: i64) -> *mut Component {
        let comp = Component::new(ccno, std::ptr::null_mut());
        self.comp_arena.lock().push(comp);
        comp
    }

    /// Links an already-populated component at the list head.
    fn link_component(&self, comp: *mut Component) {
        unsafe {
            let head = &*self.cc_head;
            head.acquire(self.comp_list_id);
            (*comp).next.store(head.next_ptr(), Ordering::Relaxed);
            head.next.store(comp, Ordering::Release);
            head.release(self.comp_list_id);
        }
        self.cc_count.fetch_add(1, Ordering::Relaxed);
    }

    /// False when the key is already present; otherwise links a fresh
    /// singleton component at the head.
    pub fn add_vertex(&self, u: i64) -> Result<bool, GraphError> {
        scc_check_key(u)?;
        let _g = OpGuard::enter(&self.in_flight);
        if self.locate_scc(u).is_some() {
            return Ok(false);
        }
        let head = unsafe { &*self.cc_head };
        head.acquire(self.comp_list_id);
        if self.locate_scc(u).is_some() {
            head.release(self.comp_list_id);
            return Ok(false);
        }
        let comp = self.alloc_component(self.fresh_ccno());
        unsafe {
            (*comp)
                .vertices
                .insert(u, Arc::default())
                .expect("key already validated");
            (*comp).next.store(head.next_ptr(), Ordering::Relaxed);
            head.next.store(comp, Ordering::Release);
        }
        head.release(self.comp_list_id);
        self.cc_count.fetch_add(1, Ordering::Relaxed);
        Ok(true)
    }

    pub fn contains_vertex(&self, u: i64) -> bool {
        self.locate_scc(u).is_some()
    }

    /// Lock-free co-membership test: both present and sharing a ccno.
    pub fn check_scc(&self, u: i64, v: i64) -> bool {
        let Some((cu, _)) = self.locate_scc(u) else {
            return false;
        };
        let Some((cv, _)) = self.locate_scc(v) else {
            return false;
        };
        cu.ccno == cv.ccno
    }

    /// Lock-free: enclosing component id, or None when absent.
    pub fn belongs_to(&self, u: i64) -> Option<i64> {
        self.locate_scc(u).map(|(c, _)| c.ccno)
    }

    /// Lock-free best-effort reachability from u's component to v's
    /// component over outgoing edges. Exact at quiescence (and under the
    /// restructuring lock, where mutators call it).
    pub fn is_reachable(&self, u: i64, v: i64) -> bool {
        let Some((cu, _)) = self.locate_scc(u) else {
            return false;
        };
        let Some((cv, _)) = self.locate_scc(v) else {
            return false;
        };
        self.reachable_comps(cu, cv)
    }

    fn reachable_comps(&self, from: &Component, to: &Component) -> bool {
        if std::ptr::eq(from, to) {
            return true;
        }
        let mut seen: HashSet<i64> = HashSet::new();
        let mut stack: Vec<i64> = from.member_keys();
        seen.extend(stack.iter().copied());
        while let Some(k) = stack.pop() {
            let Some((comp, cell)) = self.locate_scc(k) else {
                continue;
            };
            if std::ptr::eq(comp, to) {
                return true;
            }
            let mut out = Vec::new();
            cell.payload().for_each_unmarked(|e, _| {
                if e > 0 {
                    out.push(e);
                }
            });
            for d in out {
                if seen.insert(d) {
                    stack.push(d);
                }
            }
        }
        false
    }

    pub fn add_edge(&self, u: i64, v: i64) -> Result<bool, GraphError> {
        scc_check_edge_keys(u, v)?;
        let _g = OpGuard::enter(&self.in_flight);
        if self.locate_scc(u).is_none() || self.locate_scc(v).is_none() {
            return Ok(false);
        }
        let _r = self.restructure.lock();
        let Some((cu, cell_u)) = self.locate_scc(u) else {
            return Ok(false);
        };
        let Some((cv, cell_v)) = self.locate_scc(v) else {
            return Ok(false);
        };
        let _ = cell_u.payload().insert(v, ()).expect("validated key");
        let _ = cell_v.payload().insert(-u, ()).expect("validated key");
        if cu.ccno == cv.ccno {
            return Ok(true);
        }
        if !self.reachable_comps(cv, cu) {
            return Ok(true);
        }
        self.merge_affected(cv);
        Ok(true)
    }

    pub fn remove_edge(&self, u: i64, v: i64) -> Result<bool, GraphError> {
        scc_check_edge_keys(u, v)?;
        let _g = OpGuard::enter(&self.in_flight);
        if self.locate_scc(u).is_none() || self.locate_scc(v).is_none() {
            return Ok(false);
        }
        let _r = self.restructure.lock();
        let Some((cu, cell_u)) = self.locate_scc(u) else {
            return Ok(false);
        };
        let Some((cv, cell_v)) = self.locate_scc(v) else {
            return Ok(false);
        };
        let removed_out = cell_u.payload().remove(v).expect("validated key");
        let removed_in = cell_v.payload().remove(-u).expect("validated key");
        if cu.ccno != cv.ccno {
            return Ok(true);
        }
        if !removed_out && !removed_in {
            return Ok(true);
        }
        self.split_affected(cu);
        Ok(true)
    }

    pub fn remove_vertex(&self, u: i64) -> Result<bool, GraphError> {
        scc_check_key(u)?;
        let _g = OpGuard::enter(&self.in_flight);
        if self.locate_scc(u).is_none() {
            return Ok(false);
        }
        let _r = self.restructure.lock();
        let Some((comp, _)) = self.locate_scc(u) else {
            return Ok(false);
        };
        {
            let w = comp.vertices.locate(u);
            if !w.found(u) {
                return Ok(false);
            }
            w.mark_and_unlink();
        }
        if self.die {
            for c in self.components() {
                if !c.is_marked() {
                    Self::purge_edge_cells(c, u);
                }
            }
        } else {
            Self::purge_edge_cells(comp, u);
        }
        self.split_affected(comp);
        Ok(true)
    }

    /// Removes every edge cell naming `u` from the component's surviving
    /// vertices.
    fn purge_edge_cells(comp: &Component, u: i64) {
        comp.vertices.for_each_unmarked(|k, edges| {
            if k != u {
                let _ = edges.remove(u);
                let _ = edges.remove(-u);
            }
        });
    }

    /// Limited Tarjan from `start`'s first vertex over outgoing edges; every
    /// strongly connected group found is relocated unless it already exactly
    /// occupies its component. Caller holds the restructuring lock.
    fn merge_affected(&self, start: &Component) -> bool {
        let Some(&root) = start.member_keys().first() else {
            return true;
        };
        for group in self.limited_tarjan(root) {
            self.relocate_group(&group);
        }
        true
    }

    fn out_neighbors(&self, k: i64) -> Vec<i64> {
        let Some((_, cell)) = self.locate_scc(k) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        cell.payload().for_each_unmarked(|e, _| {
            if e > 0 {
                out.push(e);
            }
        });
        out.retain(|&d| self.locate_scc(d).is_some());
        out
    }

    /// Iterative Tarjan exploring only what `root` reaches, component
    /// boundaries transparent, logically removed vertices absent.
    fn limited_tarjan(&self, root: i64) -> Vec<BTreeSet<i64>> {
        const UNSET: u32 = u32::MAX;
        let mut index: HashMap<i64, u32> = HashMap::new();
        let mut low: HashMap<i64, u32> = HashMap::new();
        let mut on_stack: HashSet<i64> = HashSet::new();
        let mut stack: Vec<i64> = Vec::new();
        let mut next_index = 1u32;
        let mut groups = Vec::new();

        struct Frame {
            v: i64,
            neighbors: Vec<i64>,
            edge: usize,
        }

        let mut frames = vec![Frame {
            v: root,
            neighbors: self.out_neighbors(root),
            edge: 0,
        }];
        index.insert(root, 0);
        low.insert(root, 0);
        stack.push(root);
        on_stack.insert(root);

        while let Some(frame) = frames.last_mut() {
            let v = frame.v;
            if frame.edge < frame.neighbors.len() {
                let w = frame.neighbors[frame.edge];
                frame.edge += 1;
                match index.get(&w).copied().unwrap_or(UNSET) {
                    UNSET => {
                        index.insert(w, next_index);
                        low.insert(w, next_index);
                        next_index += 1;
                        stack.push(w);
                        on_stack.insert(w);
                        frames.push(Frame {
                            v: w,
                            neighbors: self.out_neighbors(w),
                            edge: 0,
                        });
                    }
                    w_index => {
                        if on_stack.contains(&w) {
                            let lv = low[&v].min(w_index);
                            low.insert(v, lv);
                        }
                    }
                }
            } else {
                if low[&v] == index[&v] {
                    let mut group = BTreeSet::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack.remove(&w);
                        group.insert(w);
                        if w == v {
                            break;
                        }
                    }
                    groups.push(group);
                }
                let lv = low[&v];
                frames.pop();
                if let Some(parent) = frames.last() {
                    let lp = low[&parent.v].min(lv);
                    low.insert(parent.v, lp);
                }
            }
        }
        groups
    }

    /// Per-pivot forward/backward sweep within the component's current
    /// members; each intersection is one surviving SCC. Caller holds the
    /// restructuring lock.
    fn split_affected(&self, comp: &Component) -> bool {
        let members: BTreeSet<i64> = comp.member_keys().into_iter().collect();
        let mut groups: Vec<BTreeSet<i64>> = Vec::new();
        let mut done: HashSet<i64> = HashSet::new();
        for &pivot in &members {
            if done.contains(&pivot) {
                continue;
            }
            let fwd = self.gated_reach(pivot, &members, true);
            let bwd = self.gated_reach(pivot, &members, false);
            let scc: BTreeSet<i64> = fwd.intersection(&bwd).copied().collect();
            done.extend(scc.iter().copied());
            groups.push(scc);
        }
        if groups.len() <= 1 {
            return true;
        }
        for group in &groups {
            self.relocate_group(group);
        }
        true
    }

    /// Reachability restricted to `members`, forward over `+d` keys or
    /// backward over `-s` keys.
    fn gated_reach(&self, pivot: i64, members: &BTreeSet<i64>, forward: bool) -> BTreeSet<i64> {
        let mut seen = BTreeSet::from([pivot]);
        let mut stack = vec![pivot];
        while let Some(k) = stack.pop() {
            let Some((_, cell)) = self.locate_scc(k) else {
                continue;
            };
            let mut nbrs = Vec::new();
            cell.payload().for_each_unmarked(|e, _| {
                if forward && e > 0 {
                    nbrs.push(e);
                } else if !forward && e < 0 {
                    nbrs.push(-e);
                }
            });
            for n in nbrs {
                if members.contains(&n) && !seen.contains(&n) && self.locate_scc(n).is_some() {
                    seen.insert(n);
                    stack.push(n);
                }
            }
        }
        seen
    }

    /// Moves a strongly connected group into a fresh component at the list
    /// head, unless the group already exactly occupies one component. Each
    /// vertex is cloned into the new sorted list (sharing its edge list)
    /// and then marked and unlinked in the old one, so it never disappears
    /// from lock-free view. Caller holds the restructuring lock.
    fn relocate_group(&self, group: &BTreeSet<i64>) {
        if group.is_empty() {
            return;
        }
        let olds: Vec<(&Component, Arc<SccEdgeList>)> = group
            .iter()
            .map(|&k| {
                let (comp, cell) = self
                    .locate_scc(k)
                    .expect("group member present under the restructuring lock");
                (comp, Arc::clone(cell.payload()))
            })
            .collect();
        let first_comp = olds[0].0;
        if olds.iter().all(|(c, _)| std::ptr::eq(*c, first_comp)) {
            let current: BTreeSet<i64> = first_comp.member_keys().into_iter().collect();
            if &current == group {
                return;
            }
        }
        let comp_ptr = self.alloc_component(self.fresh_ccno());
        let comp = unsafe { &*comp_ptr };
        let keys: Vec<i64> = group.iter().copied().collect();
        comp.vertices
            .insert(keys[0], Arc::clone(&olds[0].1))
            .expect("validated key");
        self.link_component(comp_ptr);
        for (i, &k) in keys.iter().enumerate() {
            if i > 0 {
                comp.vertices
                    .insert(k, Arc::clone(&olds[i].1))
                    .expect("validated key");
            }
            let w = olds[i].0.vertices.locate(k);
            debug_assert!(w.found(k), "relocation source vanished");
            if w.found(k) {
                w.mark_and_unlink();
            }
        }
    }

    /// Marks and unlinks every unmarked component whose vertex list is
    /// physically empty; returns the reap count.
    pub fn compact_empty_components(&self) -> usize {
        let mut reaped = 0usize;
        unsafe {
            let mut pred = self.cc_head;
            (*pred).acquire(self.comp_list_id);
            loop {
                let curr = (*pred).next_ptr();
                if curr == self.cc_tail {
                    (*pred).release(self.comp_list_id);
                    break;
                }
                (*curr).acquire(self.comp_list_id);
                if !(*curr).is_marked() && (*curr).vertices.is_physically_empty() {
                    (*curr).marked.store(true, Ordering::Release);
                    (*pred).next.store((*curr).next_ptr(), Ordering::Release);
                    self.cc_count.fetch_sub(1, Ordering::Relaxed);
                    reaped += 1;
                    (*curr).release(self.comp_list_id);
                } else {
                    (*pred).release(self.comp_list_id);
                    pred = curr;
                }
            }
        }
        reaped
    }

    /// Live component count (including not-yet-reaped empty components).
    pub fn cc_count(&self) -> i64 {
        self.cc_count.load(Ordering::Relaxed)
    }

    /// ccnos of all linked unmarked components. Exact only at quiescence.
    pub fn live_ccnos(&self) -> Vec<i64> {
        self.components()
            .filter(|c| !c.is_marked())
            .map(|c| c.ccno)
            .collect()
    }

    /// The vertex partition: one block per unmarked component with members,
    /// ccnos dropped. Quiescent only.
    pub fn partition(&self) -> Partition {
        self.assert_quiescent();
        let mut blocks = BTreeSet::new();
        for comp in self.components() {
            if comp.is_marked() {
                continue;
            }
            let members: BTreeSet<i64> = comp.member_keys().into_iter().collect();
            if !members.is_empty() {
                blocks.insert(members);
            }
        }
        Partition { blocks }
    }

    /// One `C <ccno>: k1 k2 ...` line per nonempty component, components
    /// ordered by smallest member, members ascending. Quiescent only.
    pub fn export_partition(&self) -> String {
        self.assert_quiescent();
        let mut rows: Vec<(i64, i64, Vec<i64>)> = Vec::new();
        for comp in self.components() {
            if comp.is_marked() {
                continue;
            }
            let members = comp.member_keys();
            if let Some(&min) = members.first() {
                rows.push((min, comp.ccno, members));
            }
        }
        rows.sort();
        let mut out = String::new();
        for (_, ccno, members) in rows {
            let keys: Vec<String> = members.iter().map(|k| k.to_string()).collect();
            out.push_str(&format!("C {ccno}: {}\n", keys.join(" ")));
        }
        out
    }

    /// The positive-edge graph restricted to present vertices. Quiescent
    /// only.
    pub fn snapshot(&self) -> GraphSnapshot {
        self.assert_quiescent();
        let mut vertices = BTreeSet::new();
        let mut raw = Vec::new();
        for comp in self.components() {
            if comp.is_marked() {
                continue;
            }
            comp.vertices.for_each_unmarked(|u, edges| {
                vertices.insert(u);
                edges.for_each_unmarked(|e, _| {
                    if e > 0 {
                        raw.push((u, e));
                    }
                });
            });
        }
        let edges = raw
            .into_iter()
            .filter(|(_, d)| vertices.contains(d))
            .collect();
        GraphSnapshot { vertices, edges }
    }

    /// Quiescent invariant check: `+v` in u's list iff `-u` in v's list,
    /// over present vertices.
    pub fn edge_symmetry_holds(&self) -> bool {
        self.assert_quiescent();
        let mut outs: HashMap<i64, BTreeSet<i64>> = HashMap::new();
        let mut ins: HashMap<i64, BTreeSet<i64>> = HashMap::new();
        for comp in self.components() {
            if comp.is_marked() {
                continue;
            }
            comp.vertices.for_each_unmarked(|u, edges| {
                let (mut o, mut i) = (BTreeSet::new(), BTreeSet::new());
                edges.for_each_unmarked(|e, _| {
                    if e > 0 {
                        o.insert(e);
                    } else {
                        i.insert(-e);
                    }
                });
                outs.insert(u, o);
                ins.insert(u, i);
            });
        }
        let live: BTreeSet<i64> = outs.keys().copied().collect();
        for (&u, o) in &outs {
            for &d in o {
                if live.contains(&d) && !ins[&d].contains(&u) {
                    return false;
                }
            }
        }
        for (&v, i) in &ins {
            for &s in i {
                if live.contains(&s) && !outs[&s].contains(&v) {
                    return false;
                }
            }
        }
        true
    }

    fn assert_quiescent(&self) {
        debug_assert_eq!(
            self.in_flight.load(Ordering::Relaxed),
            0,
            "quiescent accessor called with operations in flight"
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{offline_scc, SccAlgo};
    use proptest::prelude::*;

    fn oracle_partition(g: &SccGraph) -> Partition {
        offline_scc(&g.snapshot(), SccAlgo::Tarjan)
    }

    fn build(vertices: &[i64], edges: &[(i64, i64)]) -> SccGraph {
        let g = SccGraph::new(false);
        for &u in vertices {
            assert_eq!(g.add_vertex(u), Ok(true));
        }
        for &(u, v) in edges {
            assert_eq!(g.add_edge(u, v), Ok(true));
        }
        g
    }

    #[test]
    fn add_vertex_basics() {
        let g = SccGraph::new(false);
        assert_eq!(g.add_vertex(4), Ok(true));
        assert!(g.belongs_to(4).is_some());
        assert_eq!(g.cc_count(), 1);
        assert_eq!(g.add_vertex(4), Ok(false));
        assert_eq!(g.cc_count(), 1);
        assert!(g.add_vertex(0).is_err());
        assert!(g.add_vertex(-3).is_err());
        for k in [1, 2, 3, 5, 9] {
            g.add_vertex(k).unwrap();
        }
        assert_eq!(g.cc_count(), 6);
        assert_eq!(g.partition(), oracle_partition(&g));
        assert_eq!(g.partition().block_count(), 6);
    }

    #[test]
    fn add_edge_rules() {
        let g = build(&[1, 2], &[]);
        assert_eq!(g.add_edge(1, 9), Ok(false));
        assert_eq!(g.add_edge(9, 1), Ok(false));
        assert!(g.add_edge(1, 1).is_err());
        assert_eq!(g.add_edge(1, 2), Ok(true));
        assert!(!g.check_scc(1, 2));
        assert_eq!(g.add_edge(1, 2), Ok(true));
        assert_eq!(g.partition(), oracle_partition(&g));
    }

    #[test]
    fn cycle_merges() {
        let g = build(&[1, 2, 3], &[(1, 2), (2, 3)]);
        assert!(!g.check_scc(1, 3));
        assert_eq!(g.add_edge(3, 1), Ok(true));
        assert!(g.check_scc(1, 3));
        assert_eq!(g.belongs_to(1), g.belongs_to(2));
        assert_eq!(g.belongs_to(2), g.belongs_to(3));
        assert_eq!(g.partition(), oracle_partition(&g));
        assert!(g.edge_symmetry_holds());
        g.compact_empty_components();
        assert_eq!(g.cc_count(), 1);
    }

    #[test]
    fn bridge_edge_does_not_merge() {
        let g = build(&[1, 2, 3, 4], &[(1, 2), (2, 1), (3, 4), (4, 3)]);
        assert_eq!(g.partition().block_count(), 2);
        assert_eq!(g.add_edge(2, 3), Ok(true));
        assert_eq!(g.partition().block_count(), 2);
        assert_eq!(g.partition(), oracle_partition(&g));
    }

    #[test]
    fn three_component_merge() {
        let g = build(
            &[1, 2, 3, 4, 5, 6, 7, 8],
            &[
                (1, 2),
                (2, 3),
                (3, 1),
                (4, 5),
                (5, 6),
                (6, 4),
                (7, 8),
                (8, 7),
                (3, 4),
                (6, 7),
            ],
        );
        assert_eq!(g.partition().block_count(), 3);
        assert_eq!(g.add_edge(8, 3), Ok(true));
        assert_eq!(g.partition().block_count(), 1);
        assert_eq!(g.partition(), oracle_partition(&g));
        assert!(g.edge_symmetry_holds());
    }

    #[test]
    fn remove_edge_splits() {
        let g = build(&[1, 2, 3], &[(1, 2), (2, 3), (3, 1)]);
        assert_eq!(g.remove_edge(3, 1), Ok(true));
        assert_eq!(g.partition().block_count(), 3);
        assert_eq!(g.partition(), oracle_partition(&g));
        // Removing an absent edge between present vertices is still true.
        assert_eq!(g.remove_edge(3, 1), Ok(true));
        assert_eq!(g.remove_edge(1, 9), Ok(false));
        assert_eq!(g.partition(), oracle_partition(&g));
    }

    #[test]
    fn cross_component_remove_keeps_partition() {
        let g = build(&[1, 2, 3, 4], &[(1, 2), (2, 1), (3, 4), (4, 3), (2, 3)]);
        let before = g.partition();
        assert_eq!(g.remove_edge(2, 3), Ok(true));
        assert_eq!(g.partition(), before);
        assert_eq!(g.partition(), oracle_partition(&g));
    }

    #[test]
    fn split_into_two() {
        // 1 <-> 2 <-> 3 <-> 4 all one SCC via two local cycles plus the
        // bridge pair; removing one bridge direction splits it in two.
        let g = build(
            &[1, 2, 3, 4],
            &[(1, 2), (2, 1), (3, 4), (4, 3), (2, 3), (3, 2)],
        );
        assert_eq!(g.partition().block_count(), 1);
        assert_eq!(g.remove_edge(3, 2), Ok(true));
        assert_eq!(g.partition().block_count(), 2);
        assert_eq!(g.partition(), oracle_partition(&g));
        assert!(g.check_scc(1, 2));
        assert!(g.check_scc(3, 4));
        assert!(!g.check_scc(2, 3));
    }

    #[test]
    fn remove_vertex_variants() {
        // Isolated vertex.
        let g = build(&[5], &[]);
        assert_eq!(g.remove_vertex(5), Ok(true));
        assert_eq!(g.remove_vertex(5), Ok(false));
        assert_eq!(g.compact_empty_components(), 1);
        assert_eq!(g.cc_count(), 0);

        // Middle of a path.
        let g = build(&[1, 2, 3], &[(1, 2), (2, 3)]);
        assert_eq!(g.remove_vertex(2), Ok(true));
        assert_eq!(g.partition(), oracle_partition(&g));
        assert_eq!(g.partition().block_count(), 2);
        assert!(!g.contains_vertex(2));

        // Member of a 3-cycle.
        let g = build(&[1, 2, 3], &[(1, 2), (2, 3), (3, 1)]);
        assert_eq!(g.remove_vertex(2), Ok(true));
        g.compact_empty_components();
        assert_eq!(g.partition().block_count(), 2);
        assert_eq!(g.partition(), oracle_partition(&g));
        assert!(g.edge_symmetry_holds());
    }

    #[test]
    fn die_purges_other_components() {
        for die in [false, true] {
            let g = SccGraph::new(die);
            for k in 1..=3 {
                g.add_vertex(k).unwrap();
            }
            g.add_edge(1, 2).unwrap();
            g.add_edge(3, 2).unwrap();
            g.remove_vertex(2).unwrap();
            // Either way the snapshot hides edges naming 2.
            assert!(g.snapshot().edges.is_empty());
            assert_eq!(g.partition(), oracle_partition(&g));
            assert!(g.edge_symmetry_holds());
        }
    }

    #[test]
    fn reachability() {
        let g = build(&[1, 2, 3, 4, 5], &[(1, 2), (2, 3), (4, 5)]);
        assert!(g.is_reachable(1, 3));
        assert!(!g.is_reachable(3, 1));
        assert!(g.is_reachable(1, 1));
        assert!(g.is_reachable(1, 2));
        assert!(!g.is_reachable(1, 4));
        assert!(!g.is_reachable(9, 1));
        assert!(!g.is_reachable(1, 9));
        // Same component counts as reachable both ways.
        g.add_edge(3, 1).unwrap();
        assert!(g.is_reachable(3, 1));
        assert!(g.is_reachable(1, 3));
    }

    #[test]
    fn compact_counts() {
        let g = build(&[1, 2], &[]);
        assert_eq!(g.compact_empty_components(), 0);
        g.add_edge(1, 2).unwrap();
        g.add_edge(2, 1).unwrap();
        assert_eq!(g.partition().block_count(), 1);
        // Merging two singletons leaves both source components empty.
        assert_eq!(g.compact_empty_components(), 2);
        assert_eq!(g.cc_count(), 1);
        assert_eq!(g.live_ccnos().len(), 1);
    }

    #[test]
    fn export_format() {
        let g = build(&[5, 1, 9], &[]);
        let text = g.export_partition();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].ends_with(": 1"));
        assert!(lines[1].ends_with(": 5"));
        assert!(lines[2].ends_with(": 9"));
        for line in &lines {
            assert!(line.starts_with("C "));
        }
        g.add_edge(5, 9).unwrap();
        g.add_edge(9, 5).unwrap();
        let text = g.export_partition();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].ends_with(": 1"));
        assert!(lines[1].ends_with(": 5 9"));
    }

    #[test]
    fn ccnos_never_reissued() {
        let g = build(&[1, 2, 3], &[]);
        let mut retired: HashSet<i64> = HashSet::new();
        let mut previous: HashSet<i64> = g.live_ccnos().into_iter().collect();
        let script: Vec<(bool, i64, i64)> = vec![
            (true, 1, 2),
            (true, 2, 1),
            (true, 2, 3),
            (true, 3, 2),
            (false, 2, 1),
            (false, 1, 2),
            (true, 1, 3),
            (true, 3, 1),
        ];
        for (add, u, v) in script {
            if add {
                g.add_edge(u, v).unwrap();
            } else {
                g.remove_edge(u, v).unwrap();
            }
            g.compact_empty_components();
            let live: HashSet<i64> = g.live_ccnos().into_iter().collect();
            for gone in previous.difference(&live) {
                retired.insert(*gone);
            }
            for ccno in &live {
                assert!(!retired.contains(ccno), "ccno {ccno} came back");
            }
            previous = live;
        }
    }

    fn apply_random_ops(g: &SccGraph, model_edges: bool, seed: u64, steps: usize) {
        // Deterministic mixed sequence without key reuse.
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(seed);
        let mut live: Vec<i64> = Vec::new();
        let mut next_key = 1i64;
        for _ in 0..steps {
            match rng.random_range(0..10u32) {
                0..=2 => {
                    g.add_vertex(next_key).unwrap();
                    live.push(next_key);
                    next_key += 1;
                }
                3 if model_edges && live.len() >= 2 => {
                    let u = live[rng.random_range(0..live.len())];
                    let v = live[rng.random_range(0..live.len())];
                    if u != v {
                        g.remove_edge(u, v).unwrap();
                    }
                }
                4 if !live.is_empty() => {
                    let i = rng.random_range(0..live.len());
                    let u = live.swap_remove(i);
                    g.remove_vertex(u).unwrap();
                }
                _ if live.len() >= 2 => {
                    let u = live[rng.random_range(0..live.len())];
                    let v = live[rng.random_range(0..live.len())];
                    if u != v {
                        g.add_edge(u, v).unwrap();
                    }
                }
                _ => {}
            }
        }
    }

    #[test]
    fn random_sequences_match_oracle() {
        for seed in 0..30u64 {
            for die in [false, true] {
                let g = SccGraph::new(die);
                apply_random_ops(&g, true, seed, 120);
                assert_eq!(
                    g.partition(),
                    oracle_partition(&g),
                    "seed {seed} die {die}"
                );
                assert!(g.edge_symmetry_holds(), "seed {seed} die {die}");
                g.compact_empty_components();
                assert_eq!(g.cc_count() as usize, g.live_ccnos().len());
                assert_eq!(g.cc_count() as usize, g.partition().block_count());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn equivalence_relation_small_graphs(
            edges in proptest::collection::vec(((1i64..=8), (1i64..=8)), 0..24)
        ) {
            let g = SccGraph::new(false);
            for k in 1..=8 {
                g.add_vertex(k).unwrap();
            }
            for (u, v) in edges {
                if u != v {
                    g.add_edge(u, v).unwrap();
                }
            }
            let oracle = oracle_partition(&g);
            prop_assert_eq!(&g.partition(), &oracle);
            for u in 1..=8i64 {
                prop_assert!(g.check_scc(u, u));
                prop_assert!(!g.check_scc(u, 9));
                prop_assert!(!g.check_scc(9, u));
                for v in 1..=8i64 {
                    prop_assert_eq!(g.check_scc(u, v), g.check_scc(v, u));
                    prop_assert_eq!(g.check_scc(u, v), oracle.same_block(u, v));
                    for w in 1..=8i64 {
                        if g.check_scc(u, v) && g.check_scc(v, w) {
                            prop_assert!(g.check_scc(u, w));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn concurrent_workload_matches_oracle() {
        for trial in 0..3u64 {
            let g = SccGraph::new(trial % 2 == 0);
            for k in 1..=30 {
                g.add_vertex(k).unwrap();
            }
            std::thread::scope(|s| {
                for t in 0..4u64 {
                    let g = &g;
                    s.spawn(move || {
                        let mut x = trial * 977 + t * 131 + 7;
                        for _ in 0..250 {
                            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                            let u = 1 + (x >> 16) as i64 % 30;
                            let v = 1 + (x >> 40) as i64 % 30;
                            if u == v {
                                continue;
                            }
                            match x % 5 {
                                0 => {
                                    let _ = g.remove_edge(u, v).unwrap();
                                }
                                1 => {
                                    g.check_scc(u, v);
                                }
                                2 => {
                                    g.belongs_to(u);
                                }
                                _ => {
                                    let _ = g.add_edge(u, v).unwrap();
                                }
                            }
                        }
                    });
                }
            });
            g.compact_empty_components();
            assert_eq!(g.partition(), oracle_partition(&g), "trial {trial}");
            assert!(g.edge_symmetry_holds());
            assert_eq!(g.cc_count() as usize, g.live_ccnos().len());
            assert_eq!(crate::lock_order_violations(), 0);
        }
    }

    #[test]
    fn queries_take_no_locks() {
        let g = build(&[1, 2, 3], &[(1, 2), (2, 3), (3, 1)]);
        let before = crate::thread_lock_acquisitions();
        g.check_scc(1, 3);
        g.belongs_to(2);
        g.is_reachable(1, 3);
        g.contains_vertex(9);
        assert_eq!(crate::thread_lock_acquisitions(), before);
    }
}
