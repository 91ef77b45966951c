//! Brute-force linearizability checking of recorded histories.
//!
//! The checker searches over linearization orders: an operation may be
//! scheduled once every operation that finished before it started (by
//! global sequence number) has been scheduled. Completed operations must
//! reproduce their recorded return value through the sequential model;
//! pending operations (invoke without response) may take effect with
//! whatever value the model produces, or never take effect at all.
//!
//! The search memoizes `(scheduled-set, model-state)` pairs, which prunes
//! the factorial tree to the number of distinct abstract states reachable
//! per subset. Any witness found is re-verified by replay before it is
//! returned.

use std::collections::HashSet;

use crate::history::{EventKind, History, HistoryError, Op, Ret};
use crate::oracle::{GraphModel, Semantics};

pub const DEFAULT_MAX_COMPLETED: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessStep {
    pub op: Op,
    pub ret: Ret,
    pub invoke_seq: u64,
    pub pending: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinOutcome {
    pub linearizable: bool,
    pub witness: Option<Vec<WitnessStep>>,
    pub completed: usize,
    pub pending: usize,
    pub states_explored: u64,
}

#[derive(Debug, Clone)]
struct OpRec {
    op: Op,
    ret: Option<Ret>,
    invoke_seq: u64,
    response_seq: Option<u64>,
}

fn build_recs(history: &History) -> Result<Vec<OpRec>, HistoryError> {
    let mut recs: Vec<OpRec> = Vec::new();
    let mut pending_by_tid: std::collections::HashMap<u64, usize> = std::collections::HashMap::new();
    let mut last_seq: Option<u64> = None;
    for e in &history.events {
        if let Some(prev) = last_seq {
            if e.seq <= prev {
                return Err(HistoryError::new("events are not in sequence order"));
            }
        }
        last_seq = Some(e.seq);
        match e.kind {
            EventKind::Invoke => {
                if pending_by_tid.contains_key(&e.tid) {
                    return Err(HistoryError::new(format!(
                        "thread {} invoked twice without a response",
                        e.tid
                    )));
                }
                pending_by_tid.insert(e.tid, recs.len());
                recs.push(OpRec {
                    op: e.op,
                    ret: None,
                    invoke_seq: e.seq,
                    response_seq: None,
                });
            }
            EventKind::Response => {
                let idx = pending_by_tid.remove(&e.tid).ok_or_else(|| {
                    HistoryError::new(format!(
                        "thread {} responded without a pending invoke",
                        e.tid
                    ))
                })?;
                if recs[idx].op != e.op {
                    return Err(HistoryError::new(format!(
                        "thread {} response does not match its pending invoke",
                        e.tid
                    )));
                }
                let ret = e
                    .ret
                    .ok_or_else(|| HistoryError::new("response event without a return value"))?;
                recs[idx].ret = Some(ret);
                recs[idx].response_seq = Some(e.seq);
            }
        }
    }
    Ok(recs)
}

/// belongsTo ids are implementation-chosen, so only presence is compared;
/// every other operation must reproduce its value exactly.
fn ret_matches(op: Op, recorded: Ret, model: Ret) -> bool {
    match op {
        Op::BelongsTo(_) => matches!(
            (recorded, model),
            (Ret::Absent, Ret::Absent) | (Ret::Id(_), Ret::Id(_))
        ),
        _ => recorded == model,
    }
}

struct Search<'a> {
    recs: &'a [OpRec],
    completed_mask: u64,
    memo: HashSet<(u64, GraphModel)>,
    states: u64,
}

impl<'a> Search<'a> {
    fn schedulable(&self, i: usize, mask: u64) -> bool {
        let me = &self.recs[i];
        self.recs.iter().enumerate().all(|(j, other)| {
            mask & (1 << j) != 0
                || j == i
                || !matches!(other.response_seq, Some(r) if r < me.invoke_seq)
        })
    }

    fn dfs(&mut self, state: &GraphModel, mask: u64, path: &mut Vec<usize>) -> bool {
        if mask & self.completed_mask == self.completed_mask {
            return true;
        }
        if !self.memo.insert((mask, state.clone())) {
            return false;
        }
        self.states += 1;
        for i in 0..self.recs.len() {
            if mask & (1 << i) != 0 || !self.schedulable(i, mask) {
                continue;
            }
            let rec = &self.recs[i];
            let mut next = state.clone();
            let got = next.apply(rec.op);
            if let Some(recorded) = rec.ret {
                if !ret_matches(rec.op, recorded, got) {
                    continue;
                }
            }
            path.push(i);
            if self.dfs(&next, mask | (1 << i), path) {
                return true;
            }
            path.pop();
        }
        false
    }
}

/// Replays a candidate order and confirms both the real-time constraint and
/// the recorded return values.
fn verify_witness(recs: &[OpRec], order: &[usize], semantics: Semantics) -> bool {
    for (p, &i) in order.iter().enumerate() {
        for &j in &order[p + 1..] {
            if matches!(recs[j].response_seq, Some(r) if r < recs[i].invoke_seq) {
                return false;
            }
        }
    }
    let completed_scheduled = order
        .iter()
        .filter(|&&i| recs[i].response_seq.is_some())
        .count();
    if completed_scheduled != recs.iter().filter(|r| r.response_seq.is_some()).count() {
        return false;
    }
    let mut model = GraphModel::new(semantics);
    for &i in order {
        let got = model.apply(recs[i].op);
        if let Some(recorded) = recs[i].ret {
            if !ret_matches(recs[i].op, recorded, got) {
                return false;
            }
        }
    }
    true
}

pub fn check_linearizable(
    history: &History,
    semantics: Semantics,
) -> Result<LinOutcome, HistoryError> {
    check_linearizable_bounded(history, semantics, DEFAULT_MAX_COMPLETED)
}

pub fn check_linearizable_bounded(
    history: &History,
    semantics: Semantics,
    max_completed: usize,
) -> Result<LinOutcome, HistoryError> {
    let recs = build_recs(history)?;
    if recs.len() > 64 {
        return Err(HistoryError::new("history has more than 64 operations"));
    }
    let completed = recs.iter().filter(|r| r.response_seq.is_some()).count();
    if completed > max_completed {
        return Err(HistoryError::new(format!(
            "history has {completed} completed operations, limit is {max_completed}"
        )));
    }
    let pending = recs.len() - completed;

    let completed_mask = recs
        .iter()
        .enumerate()
        .filter(|(_, r)| r.response_seq.is_some())
        .fold(0u64, |m, (i, _)| m | (1 << i));

    let mut search = Search {
        recs: &recs,
        completed_mask,
        memo: HashSet::new(),
        states: 0,
    };
    let mut path = Vec::new();
    let found = search.dfs(&GraphModel::new(semantics), 0, &mut path);
    let states_explored = search.states;

    if !found {
        return Ok(LinOutcome {
            linearizable: false,
            witness: None,
            completed,
            pending,
            states_explored,
        });
    }

    if !verify_witness(&recs, &path, semantics) {
        return Err(HistoryError::new(
            "internal error: witness failed re-verification",
        ));
    }
    let mut model = GraphModel::new(semantics);
    let witness = path
        .iter()
        .map(|&i| {
            let got = model.apply(recs[i].op);
            WitnessStep {
                op: recs[i].op,
                ret: recs[i].ret.unwrap_or(got),
                invoke_seq: recs[i].invoke_seq,
                pending: recs[i].response_seq.is_none(),
            }
        })
        .collect();
    Ok(LinOutcome {
        linearizable: true,
        witness: Some(witness),
        completed,
        pending,
        states_explored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::Event;
    use proptest::prelude::*;

    fn ev(seq: u64, tid: u64, op: Op, kind: EventKind, ret: Option<Ret>) -> Event {
        Event {
            seq,
            tid,
            op,
            kind,
            ret,
            t: seq * 10,
        }
    }

    fn hist(events: Vec<Event>) -> History {
        History { events }
    }

    #[test]
    fn empty_history_linearizable() {
        let out = check_linearizable(&hist(vec![]), Semantics::Graph).unwrap();
        assert!(out.linearizable);
        assert_eq!(out.completed, 0);
    }

    #[test]
    fn sequential_valid_history() {
        let events = vec![
            ev(0, 1, Op::AddVertex(5), EventKind::Invoke, None),
            ev(1, 1, Op::AddVertex(5), EventKind::Response, Some(Ret::Bool(true))),
            ev(2, 1, Op::ContainsVertex(5), EventKind::Invoke, None),
            ev(3, 1, Op::ContainsVertex(5), EventKind::Response, Some(Ret::Bool(true))),
        ];
        let out = check_linearizable(&hist(events), Semantics::Graph).unwrap();
        assert!(out.linearizable);
        assert_eq!(out.witness.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn real_time_violation_detected() {
        // containsVertex(1) = false strictly after addVertex(1) = true.
        let events = vec![
            ev(0, 1, Op::AddVertex(1), EventKind::Invoke, None),
            ev(1, 1, Op::AddVertex(1), EventKind::Response, Some(Ret::Bool(true))),
            ev(2, 2, Op::ContainsVertex(1), EventKind::Invoke, None),
            ev(3, 2, Op::ContainsVertex(1), EventKind::Response, Some(Ret::Bool(false))),
        ];
        let out = check_linearizable(&hist(events), Semantics::Graph).unwrap();
        assert!(!out.linearizable);
    }

    #[test]
    fn overlap_makes_it_linearizable() {
        // Same values as above, but the contains overlaps the add.
        let events = vec![
            ev(0, 1, Op::AddVertex(1), EventKind::Invoke, None),
            ev(1, 2, Op::ContainsVertex(1), EventKind::Invoke, None),
            ev(2, 1, Op::AddVertex(1), EventKind::Response, Some(Ret::Bool(true))),
            ev(3, 2, Op::ContainsVertex(1), EventKind::Response, Some(Ret::Bool(false))),
        ];
        let out = check_linearizable(&hist(events), Semantics::Graph).unwrap();
        assert!(out.linearizable);
    }

    #[test]
    fn double_remove_true_rejected() {
        let events = vec![
            ev(0, 1, Op::AddVertex(5), EventKind::Invoke, None),
            ev(1, 1, Op::AddVertex(5), EventKind::Response, Some(Ret::Bool(true))),
            ev(2, 1, Op::RemoveVertex(5), EventKind::Invoke, None),
            ev(3, 1, Op::RemoveVertex(5), EventKind::Response, Some(Ret::Bool(true))),
            ev(4, 1, Op::RemoveVertex(5), EventKind::Invoke, None),
            ev(5, 1, Op::RemoveVertex(5), EventKind::Response, Some(Ret::Bool(true))),
        ];
        let out = check_linearizable(&hist(events), Semantics::Graph).unwrap();
        assert!(!out.linearizable);
    }

    #[test]
    fn pending_op_can_explain_effect() {
        // removeVertex never responds, yet a later contains sees it gone.
        let events = vec![
            ev(0, 1, Op::AddVertex(3), EventKind::Invoke, None),
            ev(1, 1, Op::AddVertex(3), EventKind::Response, Some(Ret::Bool(true))),
            ev(2, 2, Op::RemoveVertex(3), EventKind::Invoke, None),
            ev(3, 1, Op::ContainsVertex(3), EventKind::Invoke, None),
            ev(4, 1, Op::ContainsVertex(3), EventKind::Response, Some(Ret::Bool(false))),
        ];
        let out = check_linearizable(&hist(events), Semantics::Graph).unwrap();
        assert!(out.linearizable);
        let witness = out.witness.unwrap();
        assert!(witness.iter().any(|w| w.pending));
    }

    #[test]
    fn pending_op_can_be_dropped() {
        let events = vec![
            ev(0, 1, Op::AddVertex(3), EventKind::Invoke, None),
            ev(1, 1, Op::AddVertex(3), EventKind::Response, Some(Ret::Bool(true))),
            ev(2, 2, Op::RemoveVertex(3), EventKind::Invoke, None),
            ev(3, 1, Op::ContainsVertex(3), EventKind::Invoke, None),
            ev(4, 1, Op::ContainsVertex(3), EventKind::Response, Some(Ret::Bool(true))),
        ];
        let out = check_linearizable(&hist(events), Semantics::Graph).unwrap();
        assert!(out.linearizable);
    }

    #[test]
    fn scc_semantics_respected() {
        let events = vec![
            ev(0, 1, Op::AddVertex(4), EventKind::Invoke, None),
            ev(1, 1, Op::AddVertex(4), EventKind::Response, Some(Ret::Bool(true))),
            ev(2, 1, Op::AddVertex(4), EventKind::Invoke, None),
            ev(3, 1, Op::AddVertex(4), EventKind::Response, Some(Ret::Bool(true))),
        ];
        assert!(
            check_linearizable(&hist(events.clone()), Semantics::Graph)
                .unwrap()
                .linearizable
        );
        assert!(
            !check_linearizable(&hist(events), Semantics::Scc)
                .unwrap()
                .linearizable
        );
    }

    #[test]
    fn belongs_to_presence_only() {
        let events = vec![
            ev(0, 1, Op::AddVertex(4), EventKind::Invoke, None),
            ev(1, 1, Op::AddVertex(4), EventKind::Response, Some(Ret::Bool(true))),
            ev(2, 1, Op::BelongsTo(4), EventKind::Invoke, None),
            ev(3, 1, Op::BelongsTo(4), EventKind::Response, Some(Ret::Id(777))),
            ev(4, 1, Op::BelongsTo(9), EventKind::Invoke, None),
            ev(5, 1, Op::BelongsTo(9), EventKind::Response, Some(Ret::Absent)),
        ];
        let out = check_linearizable(&hist(events), Semantics::Scc).unwrap();
        assert!(out.linearizable);
        let bad = vec![
            ev(0, 1, Op::BelongsTo(9), EventKind::Invoke, None),
            ev(1, 1, Op::BelongsTo(9), EventKind::Response, Some(Ret::Id(1))),
        ];
        assert!(
            !check_linearizable(&hist(bad), Semantics::Scc)
                .unwrap()
                .linearizable
        );
    }

    #[test]
    fn completed_bound_enforced() {
        let mut events = Vec::new();
        for i in 0..21u64 {
            events.push(ev(2 * i, 1, Op::ContainsVertex(1), EventKind::Invoke, None));
            events.push(ev(
                2 * i + 1,
                1,
                Op::ContainsVertex(1),
                EventKind::Response,
                Some(Ret::Bool(false)),
            ));
        }
        assert!(check_linearizable(&hist(events), Semantics::Graph).is_err());
    }

    #[test]
    fn malformed_histories_rejected() {
        let double_invoke = vec![
            ev(0, 1, Op::AddVertex(1), EventKind::Invoke, None),
            ev(1, 1, Op::AddVertex(2), EventKind::Invoke, None),
        ];
        assert!(check_linearizable(&hist(double_invoke), Semantics::Graph).is_err());
        let orphan_response = vec![ev(
            0,
            1,
            Op::AddVertex(1),
            EventKind::Response,
            Some(Ret::Bool(true)),
        )];
        assert!(check_linearizable(&hist(orphan_response), Semantics::Graph).is_err());
        let mismatched = vec![
            ev(0, 1, Op::AddVertex(1), EventKind::Invoke, None),
            ev(1, 1, Op::AddVertex(2), EventKind::Response, Some(Ret::Bool(true))),
        ];
        assert!(check_linearizable(&hist(mismatched), Semantics::Graph).is_err());
    }

    /// Simulates a scheduler over a live sequential model: every generated
    /// history is linearizable by construction and has genuine overlaps.
    fn generated_history(
        ops_per_thread: Vec<Vec<Op>>,
        mut choose: impl FnMut(usize) -> usize,
    ) -> History {
        #[derive(Clone)]
        enum ThreadState {
            Idle(usize),
            Invoked(usize),
            Applied(usize, Ret),
        }
        let mut model = GraphModel::new(Semantics::Graph);
        let mut states: Vec<ThreadState> = vec![ThreadState::Idle(0); ops_per_thread.len()];
        let mut events = Vec::new();
        let mut seq = 0u64;
        loop {
            let live: Vec<usize> = (0..states.len())
                .filter(|&t| match states[t] {
                    ThreadState::Idle(i) => i < ops_per_thread[t].len(),
                    _ => true,
                })
                .collect();
            if live.is_empty() {
                break;
            }
            let t = live[choose(live.len())];
            match states[t].clone() {
                ThreadState::Idle(i) => {
                    let op = ops_per_thread[t][i];
                    events.push(ev(seq, t as u64, op, EventKind::Invoke, None));
                    seq += 1;
                    states[t] = ThreadState::Invoked(i);
                }
                ThreadState::Invoked(i) => {
                    let ret = model.apply(ops_per_thread[t][i]);
                    states[t] = ThreadState::Applied(i, ret);
                }
                ThreadState::Applied(i, ret) => {
                    let op = ops_per_thread[t][i];
                    events.push(ev(seq, t as u64, op, EventKind::Response, Some(ret)));
                    seq += 1;
                    states[t] = ThreadState::Idle(i + 1);
                }
            }
        }
        hist(events)
    }

    fn arb_op() -> impl Strategy<Value = Op> {
        (0u8..6, 1i64..=4, 1i64..=4).prop_filter_map("self loop", |(code, a, b)| {
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
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn complete_on_generated_histories(
            per_thread in proptest::collection::vec(proptest::collection::vec(arb_op(), 1..4), 2..4),
            choices in proptest::collection::vec(0usize..16, 64),
        ) {
            let mut i = 0;
            let history = generated_history(per_thread, |n| {
                let c = choices[i % choices.len()] % n;
                i += 1;
                c
            });
            let out = check_linearizable(&history, Semantics::Graph).unwrap();
            prop_assert!(out.linearizable, "generated history must verify:\n{}", history.to_jsonl());
        }
    }
}
