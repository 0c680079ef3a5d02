//! Line-oriented trace format: one row per line, `key=value` pairs
//! separated by single spaces, UTF-8, LF. Golden files must diff
//! cleanly, so rows are append-only with strictly increasing sequence
//! numbers and every writer is deterministic.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    pub seq: u64,
    pub stage: u64,
    pub kind: String,
    pub fields: Vec<(String, String)>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("line {0}: malformed pair `{1}`")]
    Malformed(usize, String),
    #[error("line {0}: missing required key `{1}`")]
    Missing(usize, &'static str),
    #[error("line {0}: sequence numbers must strictly increase")]
    Sequence(usize),
    #[error("key or value contains a reserved character: `{0}`")]
    Reserved(String),
}

impl TraceRow {
    pub fn new(seq: u64, stage: u64, kind: impl Into<String>) -> Self {
        TraceRow { seq, stage, kind: kind.into(), fields: Vec::new() }
    }

    pub fn field(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.fields.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_u64(&self, key: &str) -> Option<u64> {
        self.get(key)?.parse().ok()
    }

    pub fn render(&self) -> Result<String, TraceError> {
        let mut line = String::new();
        write!(line, "seq={} stage={} kind={}", self.seq, self.stage, self.kind).unwrap();
        check_token(&self.kind)?;
        for (k, v) in &self.fields {
            check_token(k)?;
            check_token(v)?;
            write!(line, " {k}={v}").unwrap();
        }
        Ok(line)
    }
}

fn check_token(tok: &str) -> Result<(), TraceError> {
    if tok.is_empty() || tok.contains(' ') || tok.contains('=') || tok.contains('\n') {
        return Err(TraceError::Reserved(tok.to_string()));
    }
    Ok(())
}

/// Compact list rendering shared by traces: `1;2;3` (empty list `-`).
pub fn render_list<T: ToString>(xs: &[T]) -> String {
    if xs.is_empty() {
        return "-".to_string();
    }
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

pub fn parse_list(s: &str) -> Option<Vec<u64>> {
    if s == "-" {
        return Some(Vec::new());
    }
    s.split(';').map(|t| t.parse().ok()).collect()
}

/// `y:a` pairs joined by `;`.
pub fn render_pairs(xs: &[(u64, u8)]) -> String {
    if xs.is_empty() {
        return "-".to_string();
    }
    xs.iter().map(|(y, a)| format!("{y}:{a}")).collect::<Vec<_>>().join(";")
}

pub fn parse_pairs(s: &str) -> Option<Vec<(u64, u8)>> {
    if s == "-" {
        return Some(Vec::new());
    }
    s.split(';')
        .map(|t| {
            let (y, a) = t.split_once(':')?;
            Some((y.parse().ok()?, a.parse().ok()?))
        })
        .collect()
}

/// `y:a:b` triples joined by `;`.
pub fn render_side_pairs(xs: &[(u64, (u8, u8))]) -> String {
    if xs.is_empty() {
        return "-".to_string();
    }
    xs.iter().map(|(y, (a, b))| format!("{y}:{a}:{b}")).collect::<Vec<_>>().join(";")
}

pub fn parse_side_pairs(s: &str) -> Option<Vec<(u64, (u8, u8))>> {
    if s == "-" {
        return Some(Vec::new());
    }
    s.split(';')
        .map(|t| {
            let mut it = t.split(':');
            let y = it.next()?.parse().ok()?;
            let a = it.next()?.parse().ok()?;
            let b = it.next()?.parse().ok()?;
            it.next().is_none().then_some((y, (a, b)))
        })
        .collect()
}

pub fn render_trace(rows: &[TraceRow]) -> Result<String, TraceError> {
    let mut out = String::new();
    for row in rows {
        out.push_str(&row.render()?);
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceRow>, TraceError> {
    let mut rows = Vec::new();
    let mut last_seq: Option<u64> = None;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let mut seq = None;
        let mut stage = None;
        let mut kind = None;
        let mut fields = Vec::new();
        for tok in line.split(' ') {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| TraceError::Malformed(lineno, tok.to_string()))?;
            match k {
                "seq" => {
                    seq = Some(
                        v.parse().map_err(|_| TraceError::Malformed(lineno, tok.to_string()))?,
                    )
                }
                "stage" => {
                    stage = Some(
                        v.parse().map_err(|_| TraceError::Malformed(lineno, tok.to_string()))?,
                    )
                }
                "kind" => kind = Some(v.to_string()),
                _ => fields.push((k.to_string(), v.to_string())),
            }
        }
        let seq = seq.ok_or(TraceError::Missing(lineno, "seq"))?;
        let stage = stage.ok_or(TraceError::Missing(lineno, "stage"))?;
        let kind = kind.ok_or(TraceError::Missing(lineno, "kind"))?;
        if let Some(prev) = last_seq {
            if seq <= prev {
                return Err(TraceError::Sequence(lineno));
            }
        }
        last_seq = Some(seq);
        rows.push(TraceRow { seq, stage, kind, fields });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let rows = vec![
            TraceRow::new(0, 0, "meta").field("construction", "markers").field("stages", 7),
            TraceRow::new(1, 2, "counter").field("q", 0).field("ct", 1),
            TraceRow::new(2, 6, "move")
                .field("i", 3)
                .field("r", render_list(&[0u64, 1]))
                .field("sides", render_pairs(&[(0, 1)])),
        ];
        let text = render_trace(&rows).unwrap();
        assert_eq!(parse_trace(&text).unwrap(), rows);
    }

    #[test]
    fn sequence_must_increase() {
        let text = "seq=1 stage=0 kind=a\nseq=1 stage=0 kind=b\n";
        assert_eq!(parse_trace(text), Err(TraceError::Sequence(2)));
    }

    #[test]
    fn reserved_characters_rejected() {
        let row = TraceRow::new(0, 0, "x").field("k", "a b");
        assert!(row.render().is_err());
    }

    #[test]
    fn lists_and_pairs() {
        assert_eq!(render_list::<u64>(&[]), "-");
        assert_eq!(parse_list("-"), Some(vec![]));
        assert_eq!(parse_list("3;4;5"), Some(vec![3, 4, 5]));
        assert_eq!(parse_pairs("0:1;2:0"), Some(vec![(0, 1), (2, 0)]));
        assert_eq!(
            parse_side_pairs("0:1:0;2:0:1"),
            Some(vec![(0, (1, 0)), (2, (0, 1))])
        );
    }
}
