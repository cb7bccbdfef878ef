//! Plain-text graph, measure and point-cloud files.
//!
//! Graph: `nodes N edges M dim D`, then `N` lines of `D` coordinates (empty
//! lines when `D = 0`), then `M` lines `u v w`. Measure: `measure K`, then
//! `K` lines `node_id mass`. Reals are written with 17 significant digits.

use std::io::{BufRead, Write};

use super::{Graph, GraphError, Measure};

fn parse_err(line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_real(tok: &str, line: usize) -> Result<f64, GraphError> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("expected a real number, got `{tok}`")))
}

fn parse_count(tok: Option<&str>, line: usize, what: &str) -> Result<usize, GraphError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("expected a non-negative integer {what}, got `{tok}`")))
}

fn expect_keyword(tok: Option<&str>, keyword: &str, line: usize) -> Result<(), GraphError> {
    match tok {
        Some(t) if t == keyword => Ok(()),
        other => Err(parse_err(
            line,
            format!("expected `{keyword}`, got `{}`", other.unwrap_or("")),
        )),
    }
}

fn read_lines<R: BufRead>(reader: R) -> Result<Vec<String>, GraphError> {
    reader
        .lines()
        .collect::<Result<_, _>>()
        .map_err(|e| parse_err(0, e.to_string()))
}

pub fn read_graph<R: BufRead>(reader: R) -> Result<Graph, GraphError> {
    let lines = read_lines(reader)?;
    let mut it = lines.iter().enumerate().map(|(i, l)| (i + 1, l.as_str()));
    let (ln, header) = it.next().ok_or_else(|| parse_err(1, "empty graph file"))?;
    let mut h = header.split_whitespace();
    expect_keyword(h.next(), "nodes", ln)?;
    let n = parse_count(h.next(), ln, "node count")?;
    expect_keyword(h.next(), "edges", ln)?;
    let m = parse_count(h.next(), ln, "edge count")?;
    expect_keyword(h.next(), "dim", ln)?;
    let dim = parse_count(h.next(), ln, "dimension")?;

    let mut coords = Vec::with_capacity(n);
    for row in 0..n {
        let (ln, line) = it
            .next()
            .ok_or_else(|| parse_err(ln + row + 1, "missing coordinate line"))?;
        let vals = line
            .split_whitespace()
            .map(|t| parse_real(t, ln))
            .collect::<Result<Vec<_>, _>>()?;
        if vals.len() != dim {
            return Err(GraphError::CoordinateDimension {
                row,
                got: vals.len(),
                expected: dim,
            });
        }
        coords.push(vals);
    }

    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, line) = it
            .next()
            .ok_or_else(|| parse_err(lines.len() + 1, "missing edge line"))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(parse_err(ln, "edge line must be `u v w`"));
        }
        let u = parse_count(Some(toks[0]), ln, "node id")?;
        let v = parse_count(Some(toks[1]), ln, "node id")?;
        edges.push((u, v, parse_real(toks[2], ln)?));
    }
    if let Some((ln, extra)) = it.find(|(_, l)| !l.trim().is_empty()) {
        return Err(parse_err(ln, format!("trailing content `{extra}`")));
    }
    let coords = if dim == 0 { None } else { Some(coords) };
    Graph::new(n, coords, edges)
}

pub fn write_graph<W: Write>(g: &Graph, mut out: W) -> std::io::Result<()> {
    let dim = g.coords().map_or(0, |c| c.first().map_or(0, Vec::len));
    writeln!(out, "nodes {} edges {} dim {}", g.node_count(), g.edge_count(), dim)?;
    for v in 0..g.node_count() {
        if let Some(c) = g.coords() {
            let row: Vec<String> = c[v].iter().map(|x| format!("{x:.16e}")).collect();
            writeln!(out, "{}", row.join(" "))?;
        } else {
            writeln!(out)?;
        }
    }
    for e in g.edges() {
        writeln!(out, "{} {} {:.16e}", e.u, e.v, e.weight)?;
    }
    Ok(())
}

pub fn read_measure<R: BufRead>(reader: R) -> Result<Measure, GraphError> {
    let lines = read_lines(reader)?;
    let mut it = lines
        .iter()
        .enumerate()
        .map(|(i, l)| (i + 1, l.as_str()))
        .filter(|(_, l)| !l.trim().is_empty());
    let (ln, header) = it.next().ok_or_else(|| parse_err(1, "empty measure file"))?;
    let mut h = header.split_whitespace();
    expect_keyword(h.next(), "measure", ln)?;
    let k = parse_count(h.next(), ln, "support size")?;
    let mut support = Vec::with_capacity(k);
    for _ in 0..k {
        let (ln, line) = it
            .next()
            .ok_or_else(|| parse_err(lines.len() + 1, "missing support line"))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(parse_err(ln, "support line must be `node_id mass`"));
        }
        let node = toks[0].parse::<usize>().map_err(|_| {
            parse_err(
                ln,
                format!(
                    "support `{}` is not a node id; measures on edge interiors are not supported",
                    toks[0]
                ),
            )
        })?;
        support.push((node, parse_real(toks[1], ln)?));
    }
    if let Some((ln, extra)) = it.next() {
        return Err(parse_err(ln, format!("trailing content `{extra}`")));
    }
    Measure::new(support)
}

pub fn write_measure<W: Write>(m: &Measure, mut out: W) -> std::io::Result<()> {
    writeln!(out, "measure {}", m.support().len())?;
    for &(v, mass) in m.support() {
        writeln!(out, "{v} {mass:.16e}")?;
    }
    Ok(())
}

/// One point per line as whitespace-separated reals; blank lines and `#`
/// comments are skipped. All points must share a dimension.
pub fn read_points<R: BufRead>(reader: R) -> Result<Vec<Vec<f64>>, GraphError> {
    let lines = read_lines(reader)?;
    let mut points: Vec<Vec<f64>> = Vec::new();
    for (i, raw) in lines.iter().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let p = body
            .split_whitespace()
            .map(|t| parse_real(t, i + 1))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = points.first() {
            if first.len() != p.len() {
                return Err(GraphError::CoordinateDimension {
                    row: points.len(),
                    got: p.len(),
                    expected: first.len(),
                });
            }
        }
        points.push(p);
    }
    if points.is_empty() {
        return Err(GraphError::EmptyInput);
    }
    Ok(points)
}
