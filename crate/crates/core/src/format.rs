//! Text formats.
//!
//! `.dhg` holds one hypergraph:
//!
//! ```text
//! dhg 1 <n>
//! <|T|> <t_1> ... <|H|> <h_1> ... <weight>
//! ```
//!
//! Edge ids are implicit (`0, 1, 2, ...` in line order). `.dhu` holds an
//! update stream of `add ...` / `del <id>` lines; `batch <count>` groups the
//! next `count` updates. In both formats lines starting with `#` and blank
//! lines are ignored.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::hypergraph::{EdgeId, EdgeSpec, Hyperedge, Hypergraph, VertexId};

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| perr(line, format!("invalid {what} `{tok}`")))
}

/// Parses `<|T|> t... <|H|> h... <weight>` from the remaining tokens.
fn parse_edge_fields<'a>(
    toks: &mut impl Iterator<Item = &'a str>,
    line: usize,
) -> Result<EdgeSpec> {
    let mut set = |what: &str| -> Result<Vec<VertexId>> {
        let k: usize = parse_num(toks.next(), line, &format!("{what} size"))?;
        (0..k)
            .map(|_| parse_num(toks.next(), line, "vertex").map(VertexId))
            .collect()
    };
    let tail = set("tail")?;
    let head = set("head")?;
    let weight: f64 = parse_num(toks.next(), line, "weight")?;
    if let Some(extra) = toks.next() {
        return Err(perr(line, format!("unexpected token `{extra}`")));
    }
    Ok(EdgeSpec { tail, head, weight })
}

fn write_edge_fields(out: &mut String, e: &Hyperedge) {
    let _ = write!(out, "{}", e.tail().len());
    for v in e.tail() {
        let _ = write!(out, " {v}");
    }
    let _ = write!(out, " {}", e.head().len());
    for v in e.head() {
        let _ = write!(out, " {v}");
    }
    let _ = writeln!(out, " {}", e.weight());
}

/// Serializes `h` in id order. Ids are not stored, so a hypergraph whose
/// ids are not `0..m` comes back renumbered.
pub fn write_dhg(h: &Hypergraph) -> String {
    let mut out = format!("dhg 1 {}\n", h.n());
    for e in h.edges() {
        write_edge_fields(&mut out, e);
    }
    out
}

pub fn parse_dhg(text: &str) -> Result<Hypergraph> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| perr(1, "missing header"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("dhg") {
        return Err(perr(hl, "expected `dhg 1 <n>` header"));
    }
    let version: u32 = parse_num(toks.next(), hl, "version")?;
    if version != 1 {
        return Err(perr(hl, format!("unsupported version {version}")));
    }
    let n: usize = parse_num(toks.next(), hl, "vertex count")?;
    let mut h = Hypergraph::empty(n).map_err(|e| perr(hl, e.to_string()))?;
    for (id, (ln, l)) in lines.enumerate() {
        let spec = parse_edge_fields(&mut l.split_whitespace(), ln)?;
        let e = Hyperedge::new(EdgeId(id as u64), spec, n).map_err(|e| perr(ln, e.to_string()))?;
        h.insert(e).map_err(|e| perr(ln, e.to_string()))?;
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Update {
    Add(EdgeSpec),
    Del(EdgeId),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StreamItem {
    Single(Update),
    Batch(Vec<Update>),
}

/// One parsed `.dhu` item with the line it started on.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamEntry {
    pub line: usize,
    pub item: StreamItem,
}

fn parse_update(l: &str, line: usize) -> Result<Update> {
    let mut toks = l.split_whitespace();
    match toks.next() {
        Some("add") => parse_edge_fields(&mut toks, line).map(Update::Add),
        Some("del") => {
            let id: u64 = parse_num(toks.next(), line, "edge id")?;
            if let Some(extra) = toks.next() {
                return Err(perr(line, format!("unexpected token `{extra}`")));
            }
            Ok(Update::Del(EdgeId(id)))
        }
        Some(other) => Err(perr(line, format!("unknown command `{other}`"))),
        None => Err(perr(line, "empty line")),
    }
}

pub fn parse_dhu(text: &str) -> Result<Vec<StreamEntry>> {
    let mut out = Vec::new();
    let mut lines = content_lines(text);
    while let Some((ln, l)) = lines.next() {
        if let Some(rest) = l.strip_prefix("batch") {
            let mut toks = rest.split_whitespace();
            let count: usize = parse_num(toks.next(), ln, "batch count")?;
            let mut batch = Vec::with_capacity(count);
            for _ in 0..count {
                let (bl, b) = lines
                    .next()
                    .ok_or_else(|| perr(ln, format!("batch of {count} truncated")))?;
                if b.starts_with("batch") {
                    return Err(perr(bl, "nested batch"));
                }
                batch.push(parse_update(b, bl)?);
            }
            out.push(StreamEntry {
                line: ln,
                item: StreamItem::Batch(batch),
            });
        } else {
            out.push(StreamEntry {
                line: ln,
                item: StreamItem::Single(parse_update(l, ln)?),
            });
        }
    }
    Ok(out)
}

fn write_update(out: &mut String, u: &Update) {
    match u {
        Update::Add(spec) => {
            let _ = write!(out, "add {}", spec.tail.len());
            for v in &spec.tail {
                let _ = write!(out, " {v}");
            }
            let _ = write!(out, " {}", spec.head.len());
            for v in &spec.head {
                let _ = write!(out, " {v}");
            }
            let _ = writeln!(out, " {}", spec.weight);
        }
        Update::Del(id) => {
            let _ = writeln!(out, "del {id}");
        }
    }
}

pub fn write_dhu(items: &[StreamItem]) -> String {
    let mut out = String::new();
    for item in items {
        match item {
            StreamItem::Single(u) => write_update(&mut out, u),
            StreamItem::Batch(us) => {
                let _ = writeln!(out, "batch {}", us.len());
                for u in us {
                    write_update(&mut out, u);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dhg_parses_with_comments() {
        let text = "# a comment\ndhg 1 4\n2 0 1 1 2 2.5\n\n# trailing\n1 3 2 0 1 1\n";
        let h = parse_dhg(text).unwrap();
        assert_eq!(h.n(), 4);
        assert_eq!(h.m(), 2);
        let e = h.edge(EdgeId(1)).unwrap();
        assert_eq!(e.tail(), &[VertexId(3)]);
        assert_eq!(e.weight(), 1.0);
        assert_eq!(
            write_dhg(&h),
            "dhg 1 4\n2 0 1 1 2 2.5\n1 3 2 0 1 1\n"
        );
    }

    #[test]
    fn dhg_errors_carry_line_numbers() {
        let err = parse_dhg("dhg 1 3\n1 0 1 1 1.0\n1 0 1 7 1.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = parse_dhg("dhg 1 3\n1 0 0 1.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err = parse_dhg("graph 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_dhg("dhg 1 3\n1 0 1 1 1.0 9\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn dhu_batches() {
        let text = "add 1 0 1 1 2\nbatch 2\ndel 0\nadd 2 0 1 1 2 0.5\ndel 1\n";
        let items = parse_dhu(text).unwrap();
        assert_eq!(items.len(), 3);
        assert_eq!(items[1].line, 2);
        match &items[1].item {
            StreamItem::Batch(b) => {
                assert_eq!(b.len(), 2);
                assert_eq!(b[0], Update::Del(EdgeId(0)));
            }
            other => panic!("unexpected {other:?}"),
        }
        let plain: Vec<_> = items.into_iter().map(|e| e.item).collect();
        assert_eq!(write_dhu(&plain), text);
    }

    #[test]
    fn dhu_errors() {
        assert!(matches!(
            parse_dhu("add 1 0 1 1 2.0\nbatch 3\ndel 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_dhu("frob 3\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_dhu("batch 1\nbatch 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
