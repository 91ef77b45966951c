//! Quiescent graph snapshots and their text format.
//!
//! A snapshot is the abstract graph at a moment with no operation in flight:
//! the set of unmarked vertex keys and the edges whose endpoints are both in
//! that set. The text form is deterministic so two snapshots can be compared
//! byte for byte:
//!
//! ```text
//! V 1
//! V 2
//! E 1 2
//! ```
//!
//! Vertex lines come first, ascending; edge lines follow, ascending by
//! source then destination.

use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphSnapshot {
    pub vertices: BTreeSet<i64>,
    pub edges: BTreeSet<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for SnapshotParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for SnapshotParseError {}

impl GraphSnapshot {
    pub fn new(
        vertices: impl IntoIterator<Item = i64>,
        edges: impl IntoIterator<Item = (i64, i64)>,
    ) -> Self {
        GraphSnapshot {
            vertices: vertices.into_iter().collect(),
            edges: edges.into_iter().collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&format!("V {v}\n"));
        }
        for (src, dst) in &self.edges {
            out.push_str(&format!("E {src} {dst}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, SnapshotParseError> {
        let err = |line: usize, message: &str| SnapshotParseError {
            line,
            message: message.to_string(),
        };
        let mut snap = GraphSnapshot::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            match fields[0] {
                "V" => {
                    if fields.len() != 2 {
                        return Err(err(line, "expected `V <key>`"));
                    }
                    let key: i64 = fields[1]
                        .parse()
                        .map_err(|_| err(line, "vertex key is not an integer"))?;
                    if !snap.vertices.insert(key) {
                        return Err(err(line, "duplicate vertex"));
                    }
                }
                "E" => {
                    if fields.len() != 3 {
                        return Err(err(line, "expected `E <src> <dst>`"));
                    }
                    let src: i64 = fields[1]
                        .parse()
                        .map_err(|_| err(line, "edge source is not an integer"))?;
                    let dst: i64 = fields[2]
                        .parse()
                        .map_err(|_| err(line, "edge destination is not an integer"))?;
                    if !snap.vertices.contains(&src) || !snap.vertices.contains(&dst) {
                        return Err(err(line, "edge endpoint is not a declared vertex"));
                    }
                    if !snap.edges.insert((src, dst)) {
                        return Err(err(line, "duplicate edge"));
                    }
                }
                _ => return Err(err(line, "expected a `V` or `E` line")),
            }
        }
        Ok(snap)
    }

    /// Human-readable difference report, empty string when equal.
    pub fn diff(&self, other: &GraphSnapshot) -> String {
        let mut out = String::new();
        let mut section = |label: &str, items: Vec<String>| {
            if !items.is_empty() {
                out.push_str(&format!("{label}: {}\n", items.join(" ")));
            }
        };
        section(
            "vertices only in left",
            self.vertices.difference(&other.vertices).map(|v| v.to_string()).collect(),
        );
        section(
            "vertices only in right",
            other.vertices.difference(&self.vertices).map(|v| v.to_string()).collect(),
        );
        section(
            "edges only in left",
            self.edges
                .difference(&other.edges)
                .map(|(a, b)| format!("{a}->{b}"))
                .collect(),
        );
        section(
            "edges only in right",
            other
                .edges
                .difference(&self.edges)
                .map(|(a, b)| format!("{a}->{b}"))
                .collect(),
        );
        out
    }
}

impl fmt::Display for GraphSnapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let snap = GraphSnapshot::new([2, 1, 5], [(1, 5), (2, 5), (1, 2)]);
        let text = snap.to_text();
        assert_eq!(text, "V 1\nV 2\nV 5\nE 1 2\nE 1 5\nE 2 5\n");
        assert_eq!(GraphSnapshot::parse(&text).unwrap(), snap);
    }

    #[test]
    fn parse_rejects_malformed() {
        assert!(GraphSnapshot::parse("V x\n").is_err());
        assert!(GraphSnapshot::parse("E 1 2\n").is_err());
        assert!(GraphSnapshot::parse("V 1\nV 1\n").is_err());
        assert!(GraphSnapshot::parse("V 1\nE 1\n").is_err());
        assert!(GraphSnapshot::parse("W 1\n").is_err());
        assert!(GraphSnapshot::parse("V 1\nV 2\nE 1 2\nE 1 2\n").is_err());
    }

    #[test]
    fn diff_reports_both_sides() {
        let a = GraphSnapshot::new([1, 2], [(1, 2)]);
        let b = GraphSnapshot::new([1, 3], []);
        let d = a.diff(&b);
        assert!(d.contains("vertices only in left: 2"));
        assert!(d.contains("vertices only in right: 3"));
        assert!(d.contains("edges only in left: 1->2"));
        assert!(a.diff(&a).is_empty());
    }
}
