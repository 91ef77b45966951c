//! Lazy-list ordered set with fine-grained per-cell locking.
//!
//! A sorted singly-linked list bounded by head/tail sentinels at the extreme
//! key values. Deletion is two-phase: a cell is first marked (logical
//! removal, the linearization point) and then its predecessor's `next` is
//! redirected past it (physical removal). Readers traverse without locks and
//! decide membership from the mark bit alone; updaters lock the window
//! `(pred, curr)` around the target key and re-validate it before mutating.
//!
//! ```text
//!   head(-inf) -> 3 -> 5 -> 7 -> tail(+inf)
//!                 ^    ^
//!                pred curr        locate(5) window, both locked
//! ```
//!
//! Cells are never reclaimed while the list is alive; every allocation is
//! registered in an arena and freed when the list is dropped at quiescence.
//! That keeps lock-free traversal safe without a reclamation scheme: an
//! unlinked cell's `next` still leads back into the list, and keys strictly
//! increase along any `next` chain, so every traversal terminates at the
//! tail sentinel.
//!
//! The same structure backs vertex lists, edge lists and (with position
//! ordering instead of key ordering) the SCC component list.

use std::sync::atomic::{AtomicBool, AtomicPtr, Ordering};

use parking_lot::lock_api::RawMutex as _;
use parking_lot::{Mutex, RawMutex};

pub use crate::lockorder::LockLevel;
use crate::lockorder::{self, new_list_id};

pub const MIN_SENTINEL: i64 = i64::MIN;
pub const MAX_SENTINEL: i64 = i64::MAX;

/// True iff `key` is a legal user key (sentinels are reserved).
pub fn user_key_in_range(key: i64) -> bool {
    key > MIN_SENTINEL && key < MAX_SENTINEL
}

/// Key outside the open sentinel interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyRangeError(pub i64);

impl std::fmt::Display for KeyRangeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "key {} outside the user key range", self.0)
    }
}

impl std::error::Error for KeyRangeError {}

pub(crate) struct Cell<P> {
    key: i64,
    marked: AtomicBool,
    next: AtomicPtr<Cell<P>>,
    lock: RawMutex,
    payload: P,
}

impl<P> Cell<P> {
    fn new(key: i64, next: *mut Cell<P>, payload: P) -> *mut Cell<P> {
        Box::into_raw(Box::new(Cell {
            key,
            marked: AtomicBool::new(false),
            next: AtomicPtr::new(next),
            lock: RawMutex::INIT,
            payload,
        }))
    }

    pub(crate) fn key(&self) -> i64 {
        self.key
    }

    pub(crate) fn is_marked(&self) -> bool {
        self.marked.load(Ordering::Acquire)
    }

    pub(crate) fn payload(&self) -> &P {
        &self.payload
    }

    fn next_ptr(&self) -> *mut Cell<P> {
        self.next.load(Ordering::Acquire)
    }

    fn set_marked(&self) {
        let was = self.marked.swap(true, Ordering::AcqRel);
        debug_assert!(!was, "mark must transition false -> true exactly once");
    }

    fn acquire(&self, list: usize, level: LockLevel) {
        self.lock.lock();
        lockorder::on_acquire(list, level, self.key);
    }

    fn release(&self, list: usize) {
        lockorder::on_release(list, self.key);
        unsafe { self.lock.unlock() };
    }
}

/// Sorted concurrent set of `i64` keys, each cell carrying an opaque payload.
pub struct LazyList<P> {
    head: *mut Cell<P>,
    tail: *mut Cell<P>,
    arena: Mutex<Vec<*mut Cell<P>>>,
    id: usize,
    level: LockLevel,
    backoff: bool,
}

unsafe impl<P: Send + Sync> Send for LazyList<P> {}
unsafe impl<P: Send + Sync> Sync for LazyList<P> {}

impl Default for LazyList<()> {
    fn default() -> Self {
        LazyList::new(LockLevel::Edge)
    }
}

impl<P> LazyList<P> {
    pub fn new(level: LockLevel) -> Self
    where
        P: Default,
    {
        Self::with_backoff(level, false)
    }

    /// `backoff` enables an exponential pause after failed window
    /// validations, for the benchmark's contention knob.
    pub fn with_backoff(level: LockLevel, backoff: bool) -> Self
    where
        P: Default,
    {
        let tail = Cell::new(MAX_SENTINEL, std::ptr::null_mut(), P::default());
        let head = Cell::new(MIN_SENTINEL, tail, P::default());
        LazyList {
            head,
            tail,
            arena: Mutex::new(vec![head, tail]),
            id: new_list_id(),
            level,
            backoff,
        }
    }

    fn head(&self) -> &Cell<P> {
        unsafe { &*self.head }
    }

    fn pause(&self, failures: &mut u32) {
        if !self.backoff {
            std::hint::spin_loop();
            return;
        }
        let n = (*failures).min(10);
        *failures += 1;
        if n < 6 {
            for _ in 0..(1u32 << n) {
                std::hint::spin_loop();
            }
        } else {
            std::thread::yield_now();
        }
    }

    /// Returns a locked, validated window `(pred, curr)` with
    /// `pred.key < key <= curr.key`. Retries from the head whenever
    /// validation fails.
    pub(crate) fn locate(&self, key: i64) -> Window<'_, P> {
        debug_assert!(user_key_in_range(key));
        let mut failures = 0u32;
        loop {
            let mut pred = self.head;
            let mut curr = unsafe { (*pred).next_ptr() };
            unsafe {
                while (*curr).key < key {
                    pred = curr;
                    curr = (*curr).next_ptr();
                }
                (*pred).acquire(self.id, self.level);
                (*curr).acquire(self.id, self.level);
                if validate(&*pred, &*curr) {
                    return Window {
                        list: self,
                        pred,
                        curr,
                    };
                }
                (*curr).release(self.id);
                (*pred).release(self.id);
            }
            self.pause(&mut failures);
        }
    }

    /// Inserts `key` if no unmarked cell carries it. Returns false (list
    /// unchanged) when the key is already present.
    pub fn insert(&self, key: i64, payload: P) -> Result<bool, KeyRangeError> {
        if !user_key_in_range(key) {
            return Err(KeyRangeError(key));
        }
        let w = self.locate(key);
        if w.found(key) {
            return Ok(false);
        }
        w.insert(key, payload);
        Ok(true)
    }

    /// Marks and unlinks `key`. Returns false when no unmarked cell carries
    /// it.
    pub fn remove(&self, key: i64) -> Result<bool, KeyRangeError> {
        if !user_key_in_range(key) {
            return Err(KeyRangeError(key));
        }
        let w = self.locate(key);
        if !w.found(key) {
            return Ok(false);
        }
        w.mark_and_unlink();
        Ok(true)
    }

    /// Lock-free membership test.
    pub fn contains(&self, key: i64) -> bool {
        self.find_cell(key).is_some()
    }

    /// Lock-free membership test that also reports how many cells the
    /// traversal touched (head sentinel included). On a quiescent list of
    /// `n` keys this is at most `n + 2`.
    pub fn contains_visits(&self, key: i64) -> (bool, usize) {
        if !user_key_in_range(key) {
            return (false, 0);
        }
        let mut visits = 1usize;
        let mut curr = self.head();
        while curr.key() < key {
            curr = unsafe { &*curr.next_ptr() };
            visits += 1;
        }
        (curr.key() == key && !curr.is_marked(), visits)
    }

    /// First unmarked cell with exactly this key, if any.
    pub(crate) fn find_cell(&self, key: i64) -> Option<&Cell<P>> {
        if !user_key_in_range(key) {
            return None;
        }
        self.find_cell_from(self.head(), key)
    }

    /// As `find_cell`, but resumes the scan from an already-located cell
    /// with a smaller key (the edge-search optimization).
    pub(crate) fn find_cell_from<'a>(&'a self, start: &'a Cell<P>, key: i64) -> Option<&'a Cell<P>> {
        let mut curr = start;
        while curr.key() < key {
            curr = unsafe { &*curr.next_ptr() };
        }
        (curr.key() == key && !curr.is_marked()).then_some(curr)
    }

    /// Applies `f` to every unmarked cell, in key order, without locking.
    /// Exact only at quiescence.
    pub fn for_each_unmarked(&self, mut f: impl FnMut(i64, &P)) {
        let mut curr = unsafe { &*self.head().next_ptr() };
        while curr.key() < MAX_SENTINEL {
            if !curr.is_marked() {
                f(curr.key(), curr.payload());
            }
            curr = unsafe { &*curr.next_ptr() };
        }
    }

    /// Unmarked keys in ascending order. Exact only at quiescence.
    pub fn quiescent_keys(&self) -> Vec<i64> {
        let mut keys = Vec::new();
        self.for_each_unmarked(|k, _| keys.push(k));
        keys
    }

    /// True when only the sentinels remain linked.
    pub(crate) fn is_physically_empty(&self) -> bool {
        self.head().next_ptr() == self.tail
    }

    /// Bulk append of ascending keys, all strictly above the current
    /// maximum. Quiescent only: links cells directly without windows, so it
    /// must never race with other operations on the list.
    pub fn extend_from_sorted(&self, items: impl IntoIterator<Item = (i64, P)>) {
        unsafe {
            let mut pred = self.head;
            loop {
                let next = (*pred).next_ptr();
                if next == self.tail {
                    break;
                }
                pred = next;
            }
            let mut arena = self.arena.lock();
            for (key, payload) in items {
                assert!(
                    user_key_in_range(key) && key > (*pred).key(),
                    "bulk keys must be ascending and in range"
                );
                let cell = Cell::new(key, self.tail, payload);
                arena.push(cell);
                (*pred).next.store(cell, Ordering::Release);
                pred = cell;
            }
        }
    }
}

impl<P> Drop for LazyList<P> {
    fn drop(&mut self) {
        let cells = std::mem::take(&mut *self.arena.lock());
        for cell in cells {
            drop(unsafe { Box::from_raw(cell) });
        }
    }
}

/// The lazy-list validation condition: both window cells unmarked and still
/// adjacent. Callers must hold both locks.
fn validate<P>(pred: &Cell<P>, curr: &Cell<P>) -> bool {
    !pred.is_marked() && !curr.is_marked() && std::ptr::eq(pred.next_ptr(), curr)
}

/// Locked window around a key; unlocks on drop.
pub(crate) struct Window<'a, P> {
    list: &'a LazyList<P>,
    pred: *mut Cell<P>,
    curr: *mut Cell<P>,
}

impl<'a, P> Window<'a, P> {
    pub(crate) fn curr_key(&self) -> i64 {
        unsafe { (*self.curr).key }
    }

    pub(crate) fn found(&self, key: i64) -> bool {
        self.curr_key() == key
    }

    /// Links a fresh unmarked cell between `pred` and `curr`. The new cell's
    /// successor is set before the predecessor redirect publishes it.
    pub(crate) fn insert(&self, key: i64, payload: P) {
        unsafe {
            debug_assert!((*self.pred).key < key && key < (*self.curr).key);
            let cell = Cell::new(key, self.curr, payload);
            self.list.arena.lock().push(cell);
            (*self.pred).next.store(cell, Ordering::Release);
        }
    }

    /// Logically then physically removes `curr`.
    pub(crate) fn mark_and_unlink(&self) {
        unsafe {
            debug_assert!(user_key_in_range((*self.curr).key), "sentinels are never removed");
            (*self.curr).set_marked();
            let succ = (*self.curr).next_ptr();
            (*self.pred).next.store(succ, Ordering::Release);
        }
    }
}

impl<'a, P> Drop for Window<'a, P> {
    fn drop(&mut self) {
        unsafe {
            (*self.curr).release(self.list.id);
            (*self.pred).release(self.list.id);
        }
    }
}
