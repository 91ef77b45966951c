//! Invoke/response histories, a thread-safe recorder and the JSON-lines
//! file format.
//!
//! One event per line:
//!
//! ```text
//! {"seq":0,"tid":1,"op":"addVertex","args":[5],"kind":"invoke","t":120}
//! {"seq":1,"tid":1,"op":"addVertex","args":[5],"kind":"response","ret":true,"t":340}
//! ```
//!
//! `seq` is a global monotone index assigned at recording time and is the
//! authority on event order; `t` is a monotonic nanosecond timestamp kept
//! for human consumption. `ret` appears on responses only and is a boolean,
//! a component id, or null (query on an absent key).

use std::collections::HashMap;
use std::fmt;
use std::time::Instant;

use parking_lot::Mutex;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    AddVertex(i64),
    RemoveVertex(i64),
    AddEdge(i64, i64),
    RemoveEdge(i64, i64),
    ContainsVertex(i64),
    ContainsEdge(i64, i64),
    CheckScc(i64, i64),
    BelongsTo(i64),
    AcyclicAddEdge(i64, i64),
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::AddVertex(_) => "addVertex",
            Op::RemoveVertex(_) => "removeVertex",
            Op::AddEdge(..) => "addEdge",
            Op::RemoveEdge(..) => "removeEdge",
            Op::ContainsVertex(_) => "containsVertex",
            Op::ContainsEdge(..) => "containsEdge",
            Op::CheckScc(..) => "checkScc",
            Op::BelongsTo(_) => "belongsTo",
            Op::AcyclicAddEdge(..) => "acyclicAddEdge",
        }
    }

    pub fn args(&self) -> Vec<i64> {
        match *self {
            Op::AddVertex(u)
            | Op::RemoveVertex(u)
            | Op::ContainsVertex(u)
            | Op::BelongsTo(u) => vec![u],
            Op::AddEdge(u, v)
            | Op::RemoveEdge(u, v)
            | Op::ContainsEdge(u, v)
            | Op::CheckScc(u, v)
            | Op::AcyclicAddEdge(u, v) => vec![u, v],
        }
    }

    pub fn from_parts(name: &str, args: &[i64]) -> Result<Op, HistoryError> {
        let one = || -> Result<i64, HistoryError> {
            if args.len() == 1 {
                Ok(args[0])
            } else {
                Err(HistoryError::new(format!("{name} takes 1 argument")))
            }
        };
        let two = || -> Result<(i64, i64), HistoryError> {
            if args.len() == 2 {
                Ok((args[0], args[1]))
            } else {
                Err(HistoryError::new(format!("{name} takes 2 arguments")))
            }
        };
        Ok(match name {
            "addVertex" => Op::AddVertex(one()?),
            "removeVertex" => Op::RemoveVertex(one()?),
            "containsVertex" => Op::ContainsVertex(one()?),
            "belongsTo" => Op::BelongsTo(one()?),
            "addEdge" => {
                let (u, v) = two()?;
                Op::AddEdge(u, v)
            }
            "removeEdge" => {
                let (u, v) = two()?;
                Op::RemoveEdge(u, v)
            }
            "containsEdge" => {
                let (u, v) = two()?;
                Op::ContainsEdge(u, v)
            }
            "checkScc" => {
                let (u, v) = two()?;
                Op::CheckScc(u, v)
            }
            "acyclicAddEdge" => {
                let (u, v) = two()?;
                Op::AcyclicAddEdge(u, v)
            }
            _ => return Err(HistoryError::new(format!("unknown op `{name}`"))),
        })
    }
}

/// A response value: boolean, component id, or null (absent).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ret {
    Bool(bool),
    Id(i64),
    Absent,
}

impl Ret {
    fn to_json(self) -> String {
        match self {
            Ret::Bool(b) => b.to_string(),
            Ret::Id(i) => i.to_string(),
            Ret::Absent => "null".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Invoke,
    Response,
}

impl EventKind {
    fn as_str(self) -> &'static str {
        match self {
            EventKind::Invoke => "invoke",
            EventKind::Response => "response",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub seq: u64,
    pub tid: u64,
    pub op: Op,
    pub kind: EventKind,
    pub ret: Option<Ret>,
    pub t: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct History {
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryError {
    pub message: String,
}

impl HistoryError {
    pub fn new(message: impl Into<String>) -> Self {
        HistoryError {
            message: message.into(),
        }
    }
}

impl fmt::Display for HistoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for HistoryError {}

fn event_to_json(e: &Event) -> String {
    let args = e
        .op
        .args()
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let mut line = format!(
        "{{\"seq\":{},\"tid\":{},\"op\":\"{}\",\"args\":[{}],\"kind\":\"{}\"",
        e.seq,
        e.tid,
        e.op.name(),
        args,
        e.kind.as_str()
    );
    if let Some(ret) = e.ret {
        line.push_str(&format!(",\"ret\":{}", ret.to_json()));
    }
    line.push_str(&format!(",\"t\":{}}}", e.t));
    line
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, name: &str) -> Result<&'a Value, HistoryError> {
    obj.get(name)
        .ok_or_else(|| HistoryError::new(format!("missing field `{name}`")))
}

fn as_u64(v: &Value, name: &str) -> Result<u64, HistoryError> {
    v.as_u64()
        .ok_or_else(|| HistoryError::new(format!("field `{name}` is not an unsigned integer")))
}

fn event_from_json(line: &str) -> Result<Event, HistoryError> {
    let value: Value = serde_json::from_str(line)
        .map_err(|e| HistoryError::new(format!("invalid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| HistoryError::new("event is not a JSON object"))?;
    let seq = as_u64(field(obj, "seq")?, "seq")?;
    let tid = as_u64(field(obj, "tid")?, "tid")?;
    let t = as_u64(field(obj, "t")?, "t")?;
    let name = field(obj, "op")?
        .as_str()
        .ok_or_else(|| HistoryError::new("field `op` is not a string"))?;
    let args: Vec<i64> = field(obj, "args")?
        .as_array()
        .ok_or_else(|| HistoryError::new("field `args` is not an array"))?
        .iter()
        .map(|a| {
            a.as_i64()
                .ok_or_else(|| HistoryError::new("argument is not an integer"))
        })
        .collect::<Result<_, _>>()?;
    let op = Op::from_parts(name, &args)?;
    let kind = match field(obj, "kind")?.as_str() {
        Some("invoke") => EventKind::Invoke,
        Some("response") => EventKind::Response,
        _ => return Err(HistoryError::new("field `kind` must be invoke or response")),
    };
    let ret = match (kind, obj.get("ret")) {
        (EventKind::Invoke, None) => None,
        (EventKind::Invoke, Some(_)) => {
            return Err(HistoryError::new("invoke events must not carry `ret`"))
        }
        (EventKind::Response, None) => {
            return Err(HistoryError::new("response events must carry `ret`"))
        }
        (EventKind::Response, Some(Value::Null)) => Some(Ret::Absent),
        (EventKind::Response, Some(Value::Bool(b))) => Some(Ret::Bool(*b)),
        (EventKind::Response, Some(v)) => Some(Ret::Id(v.as_i64().ok_or_else(|| {
            HistoryError::new("field `ret` must be a boolean, an integer or null")
        })?)),
    };
    Ok(Event {
        seq,
        tid,
        op,
        kind,
        ret,
        t,
    })
}

impl History {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&event_to_json(e));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<History, HistoryError> {
        let mut events = Vec::new();
        let mut last_seq: Option<u64> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let event = event_from_json(line)
                .map_err(|e| HistoryError::new(format!("line {}: {}", i + 1, e.message)))?;
            if let Some(prev) = last_seq {
                if event.seq <= prev {
                    return Err(HistoryError::new(format!(
                        "line {}: seq {} is not increasing",
                        i + 1,
                        event.seq
                    )));
                }
            }
            last_seq = Some(event.seq);
            events.push(event);
        }
        Ok(History { events })
    }
}

/// Collects events from concurrently running threads into one history.
///
/// Each thread must alternate `invoke` and `response`; the recorder assigns
/// the global sequence number under its lock, so an operation's recorded
/// interval always contains its linearization point.
pub struct Recorder {
    epoch: Instant,
    inner: Mutex<RecorderInner>,
}

struct RecorderInner {
    events: Vec<Event>,
    pending: HashMap<u64, Op>,
}

impl Default for Recorder {
    fn default() -> Self {
        Self::new()
    }
}

impl Recorder {
    pub fn new() -> Self {
        Recorder {
            epoch: Instant::now(),
            inner: Mutex::new(RecorderInner {
                events: Vec::new(),
                pending: HashMap::new(),
            }),
        }
    }

    fn push(inner: &mut RecorderInner, epoch: Instant, tid: u64, op: Op, kind: EventKind, ret: Option<Ret>) {
        let t = epoch.elapsed().as_nanos() as u64;
        let seq = inner.events.len() as u64;
        inner.events.push(Event {
            seq,
            tid,
            op,
            kind,
            ret,
            t,
        });
    }

    pub fn invoke(&self, tid: u64, op: Op) -> Result<(), HistoryError> {
        let mut inner = self.inner.lock();
        if inner.pending.insert(tid, op).is_some() {
            return Err(HistoryError::new(format!(
                "thread {tid} invoked while an operation was pending"
            )));
        }
        Self::push(&mut inner, self.epoch, tid, op, EventKind::Invoke, None);
        Ok(())
    }

    pub fn response(&self, tid: u64, ret: Ret) -> Result<(), HistoryError> {
        let mut inner = self.inner.lock();
        let op = inner.pending.remove(&tid).ok_or_else(|| {
            HistoryError::new(format!("thread {tid} responded without a pending invoke"))
        })?;
        Self::push(&mut inner, self.epoch, tid, op, EventKind::Response, Some(ret));
        Ok(())
    }

    pub fn finish(self) -> History {
        History {
            events: self.inner.into_inner().events,
        }
    }
}
