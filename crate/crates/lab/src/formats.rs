//! Text formats: edge lists, BP field dumps and trajectory records.
//!
//! Edge list: one `u v` pair per line, 0-based, whitespace separated.
//! `#` starts a comment. A `# vertices N` line fixes the vertex count, so
//! isolated trailing vertices survive a round trip; without it the count is
//! one more than the largest index.

use std::collections::HashSet;
use std::fmt::Write as _;

use hardcore_core::bp::{DirectedMessageField, VertexField};
use hardcore_core::Graph;

use crate::error::{LabError, Result};

const VERTICES_HEADER: &str = "vertices";

fn parse_error(source: &str, line: usize, message: impl Into<String>) -> LabError {
    LabError::Parse {
        path: source.to_string(),
        line,
        message: message.into(),
    }
}

/// Parses an edge list. `source` names the input in error messages.
pub fn load_edge_list(text: &str, source: &str) -> Result<Graph> {
    let mut declared: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let (body, comment) = match raw.split_once('#') {
            Some((b, c)) => (b, Some(c)),
            None => (raw, None),
        };
        if let Some(comment) = comment {
            let mut words = comment.split_whitespace();
            if words.next() == Some(VERTICES_HEADER) {
                let n = words
                    .next()
                    .and_then(|w| w.parse::<usize>().ok())
                    .ok_or_else(|| parse_error(source, line, "expected `# vertices N`"))?;
                if declared.is_some() {
                    return Err(parse_error(source, line, "vertex count declared twice"));
                }
                declared = Some((n, line));
            }
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 2 {
            return Err(parse_error(
                source,
                line,
                format!("expected two vertex indices, found {} fields", fields.len()),
            ));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_error(source, line, format!("`{s}` is not a vertex index")))
        };
        let (u, v) = (parse(fields[0])?, parse(fields[1])?);
        if u == v {
            return Err(parse_error(source, line, format!("self-loop at vertex {u}")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(parse_error(source, line, format!("duplicate edge {u} {v}")));
        }
        edges.push((u, v, line));
    }
    let largest = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
    let n = match declared {
        Some((n, _)) => {
            if let Some(&(u, v, line)) = edges.iter().find(|&&(u, v, _)| u.max(v) >= n) {
                return Err(parse_error(
                    source,
                    line,
                    format!("edge {u} {v} exceeds the declared {n} vertices"),
                ));
            }
            n
        }
        None => largest,
    };
    Ok(Graph::from_edges(n, edges.into_iter().map(|(u, v, _)| (u, v)))?)
}

pub fn save_edge_list(g: &Graph) -> String {
    let mut out = format!("# {VERTICES_HEADER} {}\n", g.vertex_count());
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

/// One `vertex value` line per vertex. Values use the shortest text that
/// reads back to the same `f64`.
pub fn dump_vertex_values(values: &[f64]) -> String {
    let mut out = String::new();
    for (v, x) in values.iter().enumerate() {
        writeln!(out, "{v} {x:?}").unwrap();
    }
    out
}

pub fn dump_vertex_field(field: &VertexField) -> String {
    dump_vertex_values(field.values())
}

/// One `tail head value` line per arc, in arc order.
pub fn dump_arc_values(g: &Graph, values: &[f64]) -> String {
    let mut out = String::new();
    for (arc, x) in values.iter().enumerate() {
        writeln!(out, "{} {} {x:?}", g.arc_tail(arc), g.arc_head(arc)).unwrap();
    }
    out
}

pub fn dump_message_field(g: &Graph, field: &DirectedMessageField) -> String {
    dump_arc_values(g, field.values())
}

fn parse_value(source: &str, line: usize, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| parse_error(source, line, format!("`{s}` is not a number")))
}

fn parse_index(source: &str, line: usize, s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| parse_error(source, line, format!("`{s}` is not a vertex index")))
}

pub fn load_vertex_values(text: &str, n: usize, source: &str) -> Result<Vec<f64>> {
    let mut values = vec![None; n];
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 2 {
            return Err(parse_error(source, line, "expected `vertex value`"));
        }
        let v = parse_index(source, line, fields[0])?;
        if v >= n {
            return Err(parse_error(source, line, format!("vertex {v} out of range")));
        }
        values[v] = Some(parse_value(source, line, fields[1])?);
    }
    values
        .into_iter()
        .enumerate()
        .map(|(v, x)| x.ok_or_else(|| parse_error(source, 0, format!("no value for vertex {v}"))))
        .collect()
}

pub fn load_arc_values(text: &str, g: &Graph, source: &str) -> Result<Vec<f64>> {
    let mut values = vec![None; g.arc_count()];
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 3 {
            return Err(parse_error(source, line, "expected `tail head value`"));
        }
        let tail = parse_index(source, line, fields[0])?;
        let head = parse_index(source, line, fields[1])?;
        let arc = (tail < g.vertex_count())
            .then(|| g.arc_index(tail, head))
            .flatten()
            .ok_or_else(|| parse_error(source, line, format!("{tail} {head} is not an edge")))?;
        values[arc] = Some(parse_value(source, line, fields[2])?);
    }
    values
        .into_iter()
        .enumerate()
        .map(|(a, x)| {
            x.ok_or_else(|| {
                parse_error(
                    source,
                    0,
                    format!("no value for arc {} {}", g.arc_tail(a), g.arc_head(a)),
                )
            })
        })
        .collect()
}

/// A trajectory record: the step index followed by the occupied vertices.
pub fn trajectory_record(step: u64, occupied: &[bool]) -> String {
    let mut out = step.to_string();
    for (v, _) in occupied.iter().enumerate().filter(|(_, &o)| o) {
        write!(out, " {v}").unwrap();
    }
    out.push('\n');
    out
}

pub fn parse_trajectory(text: &str, source: &str) -> Result<Vec<(u64, Vec<usize>)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(index, raw)| {
            let line = index + 1;
            let mut fields = raw.split_whitespace();
            let step = fields
                .next()
                .unwrap()
                .parse::<u64>()
                .map_err(|_| parse_error(source, line, "expected a step index"))?;
            let vertices = fields
                .map(|f| parse_index(source, line, f))
                .collect::<Result<Vec<_>>>()?;
            Ok((step, vertices))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_keeps_isolated_vertices() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2)]).unwrap();
        let text = save_edge_list(&g);
        assert!(text.starts_with("# vertices 5\n"));
        assert_eq!(load_edge_list(&text, "t").unwrap(), g);
        assert_eq!(load_edge_list("0 1\n1 2\n", "t").unwrap().vertex_count(), 3);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = load_edge_list("0 1\n\n1 x\n", "g.edges").unwrap_err();
        assert_eq!(err.to_string(), "g.edges:3: `x` is not a vertex index");
        let err = load_edge_list("0 1\n1 0\n", "g").unwrap_err();
        assert!(err.to_string().starts_with("g:2: duplicate edge"));
        let err = load_edge_list("# vertices 2\n0 1\n1 2\n", "g").unwrap_err();
        assert!(err.to_string().starts_with("g:3:"));
        let err = load_edge_list("3 3\n", "g").unwrap_err();
        assert!(err.to_string().contains("self-loop"));
        let err = load_edge_list("0 1 2\n", "g").unwrap_err();
        assert!(err.to_string().contains("two vertex indices"));
    }

    #[test]
    fn comments_are_ignored() {
        let g = load_edge_list("# a path\n0 1 # first\n1 2\n", "g").unwrap();
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn trajectory_round_trip() {
        let text = trajectory_record(0, &[false; 3]) + &trajectory_record(10, &[true, false, true]);
        assert_eq!(text, "0\n10 0 2\n");
        assert_eq!(
            parse_trajectory(&text, "t").unwrap(),
            vec![(0, vec![]), (10, vec![0, 2])]
        );
    }

    #[test]
    fn field_dumps_round_trip_exactly() {
        let g = Graph::petersen();
        let values: Vec<f64> = (0..10).map(|i| 1.0 / (i as f64 + 3.0)).collect();
        let back = load_vertex_values(&dump_vertex_values(&values), 10, "f").unwrap();
        assert_eq!(back, values);
        let arcs: Vec<f64> = (0..g.arc_count()).map(|a| (a as f64).sqrt() / 7.0).collect();
        let back = load_arc_values(&dump_arc_values(&g, &arcs), &g, "f").unwrap();
        assert_eq!(back, arcs);
    }
}
