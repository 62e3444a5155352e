//! Text formats: the `mrf` instance file, labeling files (one 1-based state
//! per line), and binary PGM export.
//!
//! Instance files:
//!
//! ```text
//! # comment
//! mrf <num_nodes> <num_edges> <num_states>
//! unary <node-id> <E(1)> ... <E(N)>
//! edge <i> <j> <E(1,1)> <E(1,2)> ... <E(N,N)>
//! ```
//!
//! Node ids are 0-based with `i < j`; energies are decimal literals in
//! row-major order. Blank lines and `#` lines are skipped anywhere.

use std::fmt;

use mrfmoves::{Edge, Instance, Labeling, PairwiseTable};

#[derive(Debug)]
pub enum FormatError {
    /// A malformed line, with its 1-based line number.
    Line { line: usize, msg: String },
    /// A whole-file problem: missing or inconsistent counts, or an instance
    /// that fails validation after parsing.
    Structure(String),
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatError::Line { line, msg } => write!(f, "line {line}: {msg}"),
            FormatError::Structure(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for FormatError {}

fn line_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Line { line, msg: msg.into() }
}

fn parse_count(tok: Option<&str>, line: usize, what: &str) -> Result<usize, FormatError> {
    tok.ok_or_else(|| line_err(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| line_err(line, format!("{what} is not a nonnegative integer")))
}

fn parse_energies(
    tokens: std::str::SplitWhitespace<'_>,
    expected: usize,
    line: usize,
) -> Result<Vec<f64>, FormatError> {
    let values: Vec<f64> = tokens
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| line_err(line, format!("'{t}' is not a decimal energy")))
        })
        .collect::<Result<_, _>>()?;
    if values.len() != expected {
        return Err(line_err(
            line,
            format!("expected {expected} energies, found {}", values.len()),
        ));
    }
    Ok(values)
}

pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let mut header: Option<(usize, usize, usize)> = None; // nodes, edges, states
    let mut unaries: Vec<Option<Vec<f64>>> = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let mut tok = content.split_whitespace();
        let record = tok.next().unwrap();
        match record {
            "mrf" => {
                if header.is_some() {
                    return Err(line_err(line, "duplicate header"));
                }
                let n = parse_count(tok.next(), line, "node count")?;
                let m = parse_count(tok.next(), line, "edge count")?;
                let ns = parse_count(tok.next(), line, "state count")?;
                if tok.next().is_some() {
                    return Err(line_err(line, "trailing tokens after header"));
                }
                unaries = vec![None; n];
                header = Some((n, m, ns));
            }
            "unary" => {
                let (n, _, ns) =
                    header.ok_or_else(|| line_err(line, "record before the mrf header"))?;
                let id = parse_count(tok.next(), line, "node id")?;
                if id >= n {
                    return Err(line_err(line, format!("node id {id} out of range 0..{n}")));
                }
                if unaries[id].is_some() {
                    return Err(line_err(line, format!("duplicate unary for node {id}")));
                }
                unaries[id] = Some(parse_energies(tok, ns, line)?);
            }
            "edge" => {
                let (n, _, ns) =
                    header.ok_or_else(|| line_err(line, "record before the mrf header"))?;
                let i = parse_count(tok.next(), line, "first endpoint")?;
                let j = parse_count(tok.next(), line, "second endpoint")?;
                if i >= n || j >= n {
                    return Err(line_err(line, format!("endpoint out of range 0..{n}")));
                }
                let values = parse_energies(tok, ns * ns, line)?;
                let table = PairwiseTable::new(ns, values)
                    .map_err(|e| line_err(line, e.to_string()))?;
                edges.push(Edge::new(i, j, table));
            }
            other => {
                return Err(line_err(
                    line,
                    format!("unknown record '{other}' (expected mrf, unary, or edge)"),
                ));
            }
        }
    }

    let (n, m, ns) = header.ok_or_else(|| FormatError::Structure("missing mrf header".into()))?;
    let missing = unaries.iter().filter(|u| u.is_none()).count();
    if missing > 0 {
        return Err(FormatError::Structure(format!(
            "{missing} of {n} unary records missing at end of file"
        )));
    }
    if edges.len() != m {
        return Err(FormatError::Structure(format!(
            "header announces {m} edges, file has {} at end of file",
            edges.len()
        )));
    }
    Instance::new(ns, unaries.into_iter().map(Option::unwrap).collect(), edges)
        .map_err(|e| FormatError::Structure(e.to_string()))
}

/// Canonical form: header, unaries in id order, edges in instance order,
/// single spaces, shortest exact decimal per energy.
pub fn serialize_instance(inst: &Instance) -> String {
    let n = inst.num_nodes();
    let mut out = format!("mrf {} {} {}\n", n, inst.edges().len(), inst.num_states());
    for id in 0..n {
        out.push_str(&format!("unary {id}"));
        for v in inst.unaries(id) {
            out.push_str(&format!(" {v}"));
        }
        out.push('\n');
    }
    for e in inst.edges() {
        out.push_str(&format!("edge {} {}", e.i, e.j));
        for v in e.table.values() {
            out.push_str(&format!(" {v}"));
        }
        out.push('\n');
    }
    out
}

/// One 1-based state per line; blank and `#` lines are skipped.
pub fn parse_labeling(text: &str) -> Result<Labeling, FormatError> {
    let mut states = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let state: usize = content
            .parse()
            .map_err(|_| line_err(line, format!("'{content}' is not a state number")))?;
        if state == 0 {
            return Err(line_err(line, "states are 1-based"));
        }
        states.push(state - 1);
    }
    Ok(Labeling(states))
}

pub fn serialize_labeling(labeling: &Labeling) -> String {
    let mut out = String::new();
    for &state in labeling.as_slice() {
        out.push_str(&format!("{}\n", state + 1));
    }
    out
}

/// Binary (P5) PGM: state k of N maps to gray round(k * 255 / (N - 1)) with
/// k 0-based; a single-state image is black.
pub fn pgm_bytes(
    labeling: &Labeling,
    rows: usize,
    cols: usize,
    num_states: usize,
) -> Result<Vec<u8>, FormatError> {
    if labeling.len() != rows * cols {
        return Err(FormatError::Structure(format!(
            "{} labels for a {rows}x{cols} image",
            labeling.len()
        )));
    }
    let mut bytes = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    for &state in labeling.as_slice() {
        if state >= num_states {
            return Err(FormatError::Structure(format!(
                "state {} out of range for {num_states} states",
                state + 1
            )));
        }
        let gray = if num_states <= 1 {
            0.0
        } else {
            (state as f64 * 255.0 / (num_states - 1) as f64).round()
        };
        bytes.push(gray as u8);
    }
    Ok(bytes)
}
