//! Runtime recorder for the global lock-acquisition discipline.
//!
//! Deadlock freedom rests on two rules: within one sorted list a thread only
//! ever acquires cell locks in strictly ascending key order, and a thread
//! never acquires a vertex-list lock while holding an edge-list lock.
//! Component lists are unordered (new components go to the head), so the
//! key-order rule does not apply to them; their traversals are hand-over-hand
//! in position order instead.
//!
//! Violations are counted, never panicked on, so stress runs complete and can
//! report the tally.

use parking_lot::Mutex;
use std::cell::RefCell;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Which layer of the structure a lock belongs to, for the discipline check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LockLevel {
    Vertex,
    Edge,
    Component,
}

#[derive(Debug, Clone, Copy)]
struct Held {
    list: usize,
    level: LockLevel,
    key: i64,
}

thread_local! {
    static HELD: RefCell<Vec<Held>> = const { RefCell::new(Vec::new()) };
    static ACQUIRED: std::cell::Cell<u64> = const { std::cell::Cell::new(0) };
}

static VIOLATIONS: AtomicUsize = AtomicUsize::new(0);
static SAMPLES: Mutex<Vec<String>> = Mutex::new(Vec::new());

static NEXT_LIST_ID: AtomicUsize = AtomicUsize::new(1);

pub(crate) fn new_list_id() -> usize {
    NEXT_LIST_ID.fetch_add(1, Ordering::Relaxed)
}

fn record_violation(msg: String) {
    VIOLATIONS.fetch_add(1, Ordering::Relaxed);
    let mut samples = SAMPLES.lock();
    if samples.len() < 8 {
        samples.push(msg);
    }
}

pub(crate) fn on_acquire(list: usize, level: LockLevel, key: i64) {
    ACQUIRED.with(|c| c.set(c.get() + 1));
    HELD.with(|held| {
        let mut held = held.borrow_mut();
        for h in held.iter() {
            if h.list == list && level != LockLevel::Component && h.key >= key {
                record_violation(format!(
                    "non-ascending acquisition in list {list}: hold {} then {key}",
                    h.key
                ));
            }
            if level == LockLevel::Vertex && h.level == LockLevel::Edge {
                record_violation(format!(
                    "vertex lock (list {list}, key {key}) acquired while holding an edge lock"
                ));
            }
        }
        held.push(Held { list, level, key });
    });
}

pub(crate) fn on_release(list: usize, key: i64) {
    HELD.with(|held| {
        let mut held = held.borrow_mut();
        if let Some(pos) = held.iter().rposition(|h| h.list == list && h.key == key) {
            held.remove(pos);
        }
    });
}

/// Total lock-order violations observed since process start.
pub fn lock_order_violations() -> usize {
    VIOLATIONS.load(Ordering::Relaxed)
}

/// First few violation descriptions, for triage.
pub fn lock_order_violation_samples() -> Vec<String> {
    SAMPLES.lock().clone()
}

/// Number of cell locks this thread has acquired so far. Wait-free reads are
/// asserted by taking this counter before and after a traversal.
pub fn thread_lock_acquisitions() -> u64 {
    ACQUIRED.with(|c| c.get())
}
