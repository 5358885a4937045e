//! Plain-text edge lists.
//!
//! One statement per line; `#` starts a comment.
//!
//! ```text
//! A B C D      # vertex declarations, in id order
//! A -> B
//! B <-> C
//! C -- D
//! ```
//!
//! Vertices get ids in order of first appearance, so writing a declaration
//! line first makes the format round-trip exactly.

use std::collections::HashMap;

use super::{MixedGraph, UndirectedGraph};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Directed,
    Bidirected,
    Undirected,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeList {
    pub names: Vec<String>,
    /// `(line, from, to, kind)`
    pub edges: Vec<(usize, usize, usize, EdgeKind)>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn arrow(tok: &str) -> Option<(EdgeKind, bool)> {
    match tok {
        "->" => Some((EdgeKind::Directed, false)),
        "<-" => Some((EdgeKind::Directed, true)),
        "<->" => Some((EdgeKind::Bidirected, false)),
        "--" => Some((EdgeKind::Undirected, false)),
        _ => None,
    }
}

pub fn parse(text: &str) -> Result<EdgeList> {
    let mut out = EdgeList::default();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut id = |name: &str, out: &mut EdgeList| -> usize {
        *ids.entry(name.to_string()).or_insert_with(|| {
            out.names.push(name.to_string());
            out.names.len() - 1
        })
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        match toks.iter().position(|t| arrow(t).is_some()) {
            None => {
                if let Some(bad) = toks.iter().find(|t| !valid_name(t)) {
                    return Err(parse_err(line, format!("`{bad}` is not a vertex name")));
                }
                for t in toks {
                    id(t, &mut out);
                }
            }
            Some(1) if toks.len() == 3 => {
                let (kind, flip) = arrow(toks[1]).unwrap();
                if let Some(bad) = [toks[0], toks[2]].into_iter().find(|t| !valid_name(t)) {
                    return Err(parse_err(line, format!("`{bad}` is not a vertex name")));
                }
                if toks[0] == toks[2] {
                    return Err(parse_err(line, format!("self-loop on {}", toks[0])));
                }
                let (a, b) = (id(toks[0], &mut out), id(toks[2], &mut out));
                let (a, b) = if flip { (b, a) } else { (a, b) };
                out.edges.push((line, a, b, kind));
            }
            _ => return Err(parse_err(line, format!("cannot parse `{}`", body.trim()))),
        }
    }
    Ok(out)
}

impl EdgeList {
    pub fn into_mixed(self) -> Result<(Vec<String>, MixedGraph)> {
        let mut g = MixedGraph::new(self.names.len());
        for (line, a, b, kind) in self.edges {
            let r = match kind {
                EdgeKind::Directed => g.add_directed(a, b),
                EdgeKind::Bidirected => g.add_bidirected(a, b),
                EdgeKind::Undirected => {
                    return Err(parse_err(line, "undirected edge in a mixed graph"))
                }
            };
            r.map_err(|e| parse_err(line, e.to_string()))?;
        }
        Ok((self.names, g))
    }

    pub fn into_undirected(self) -> Result<(Vec<String>, UndirectedGraph)> {
        let mut g = UndirectedGraph::new(self.names.len());
        for (line, a, b, kind) in self.edges {
            if kind != EdgeKind::Undirected {
                return Err(parse_err(line, "directed edge in an undirected graph"));
            }
            if g.adjacent(a, b) {
                return Err(parse_err(line, "duplicate edge"));
            }
            g.add_edge(a, b);
        }
        Ok((self.names, g))
    }
}

pub fn parse_mixed(text: &str) -> Result<(Vec<String>, MixedGraph)> {
    parse(text)?.into_mixed()
}

/// Default vertex names `X0, X1, ..`.
pub fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("X{i}")).collect()
}

/// Names may not contain arrow characters, `#` or whitespace.
fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '#' | '<' | '>' | '-' | '='))
}

pub(crate) fn check_names(names: &[String], n: usize) -> Result<()> {
    if names.len() != n {
        return Err(Error::arg(format!(
            "{} names for {n} vertices",
            names.len()
        )));
    }
    for name in names {
        if !valid_name(name) {
            return Err(Error::arg(format!(
                "vertex name `{name}` cannot be written"
            )));
        }
    }
    Ok(())
}

pub(crate) fn declaration_line(names: &[String]) -> String {
    let mut s = names.join(" ");
    s.push('\n');
    s
}

pub fn write_mixed(names: &[String], g: &MixedGraph) -> Result<String> {
    check_names(names, g.n())?;
    let mut s = if names.is_empty() {
        String::new()
    } else {
        declaration_line(names)
    };
    for (a, b) in g.directed_edges() {
        s += &format!("{} -> {}\n", names[a], names[b]);
    }
    for (a, b) in g.bidirected_edges() {
        s += &format!("{} <-> {}\n", names[a], names[b]);
    }
    Ok(s)
}

pub fn write_undirected(names: &[String], g: &UndirectedGraph) -> Result<String> {
    check_names(names, g.n())?;
    let mut s = if names.is_empty() {
        String::new()
    } else {
        declaration_line(names)
    };
    for (a, b) in g.edges() {
        s += &format!("{} -- {}\n", names[a], names[b]);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_mags;

    #[test]
    fn parses_all_edge_kinds() {
        let t = "# header\nA -> B\nC <- B  # reversed\nA <-> D\n\nE\n";
        let (names, g) = parse_mixed(t).unwrap();
        assert_eq!(names, vec!["A", "B", "C", "D", "E"]);
        assert!(g.has_directed(0, 1));
        assert!(g.has_directed(1, 2));
        assert!(g.has_bidirected(0, 3));
        assert!(g.is_isolated(4));
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_mixed("A -> B\nA => B\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_mixed("A -> B\nB -> A\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_mixed("A -- B\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn round_trip() {
        for g in random_mags(7, 30, 2) {
            let names = default_names(7);
            let text = write_mixed(&names, &g).unwrap();
            let (n2, g2) = parse_mixed(&text).unwrap();
            assert_eq!(n2, names);
            assert_eq!(g2, g);
        }
        let u = UndirectedGraph::from_edges(3, &[(0, 2)]).unwrap();
        let names = default_names(3);
        let (n2, u2) = parse(&write_undirected(&names, &u).unwrap())
            .unwrap()
            .into_undirected()
            .unwrap();
        assert_eq!((n2, u2), (names, u));
    }
}
