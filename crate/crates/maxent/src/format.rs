//! Line-oriented Hamiltonian text format. Spins are named by their Chimera
//! label `8 (row L + col) + 4 side + offset`, so files stay valid when
//! exclusions change the dense spin numbering.
//!
//! ```text
//! chimera L=1 K=4
//! exclude 3 7
//! alpha 1
//! h 0 1
//! J 0 4 -1
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use maxent_core::chimera::CELL_WIDTH;
use maxent_core::{ChimeraGraph, Hamiltonian};

use crate::error::{CliError, Result};

pub fn read_hamiltonian(path: &Path) -> Result<Hamiltonian> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_hamiltonian(&text, &path.display().to_string())
}

pub fn parse_hamiltonian(text: &str, origin: &str) -> Result<Hamiltonian> {
    let err = |line: usize, message: String| CliError::Format { path: origin.to_string(), line, message };
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("chimera") {
        return Err(err(line, format!("expected `chimera L=<int> K=4`, got `{header}`")));
    }
    let mut grid = None;
    for p in parts {
        match p.split_once('=') {
            Some(("L", v)) => grid = Some(v.parse::<usize>().map_err(|e| err(line, format!("bad L `{v}`: {e}")))?),
            Some(("K", v)) => {
                if v != CELL_WIDTH.to_string() {
                    return Err(err(line, format!("only K={CELL_WIDTH} is supported, got K={v}")));
                }
            }
            _ => return Err(err(line, format!("unexpected header field `{p}`"))),
        }
    }
    let grid = grid.ok_or_else(|| err(line, "missing L=<int>".into()))?;

    let mut excluded: Option<Vec<usize>> = None;
    let mut alpha: Option<f64> = None;
    let mut graph: Option<Arc<ChimeraGraph>> = None;
    let mut fields: BTreeMap<usize, f64> = BTreeMap::new();
    let mut couplers: BTreeMap<usize, f64> = BTreeMap::new();
    let real = |line: usize, s: &str| -> Result<f64> {
        let v: f64 = s.parse().map_err(|e| err(line, format!("bad number `{s}`: {e}")))?;
        if !v.is_finite() {
            return Err(err(line, format!("non-finite value `{s}`")));
        }
        Ok(v)
    };
    let label = |line: usize, s: &str| -> Result<usize> { s.parse().map_err(|e| err(line, format!("bad label `{s}`: {e}"))) };

    for (line, content) in lines {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens[0] {
            "exclude" => {
                if excluded.is_some() || graph.is_some() {
                    return Err(err(line, "`exclude` must appear once, before any h or J line".into()));
                }
                excluded = Some(tokens[1..].iter().map(|t| label(line, t)).collect::<Result<_>>()?);
            }
            "alpha" => {
                if alpha.is_some() {
                    return Err(err(line, "duplicate alpha".into()));
                }
                if tokens.len() != 2 {
                    return Err(err(line, "expected `alpha <real>`".into()));
                }
                alpha = Some(real(line, tokens[1])?);
            }
            "h" | "J" => {
                if graph.is_none() {
                    let g = ChimeraGraph::new(grid, excluded.as_deref().unwrap_or(&[])).map_err(|e| err(line, e.to_string()))?;
                    graph = Some(Arc::new(g));
                }
                let g = graph.as_ref().expect("built above");
                let active = |l: usize| -> Result<usize> {
                    g.spin_of_label(l).ok_or_else(|| err(line, format!("label {l} is not an active spin")))
                };
                if tokens[0] == "h" {
                    if tokens.len() != 3 {
                        return Err(err(line, "expected `h <label> <real>`".into()));
                    }
                    let i = active(label(line, tokens[1])?)?;
                    if fields.insert(i, real(line, tokens[2])?).is_some() {
                        return Err(err(line, format!("duplicate field for label {}", tokens[1])));
                    }
                } else {
                    if tokens.len() != 4 {
                        return Err(err(line, "expected `J <label> <label> <real>`".into()));
                    }
                    let (a, b) = (label(line, tokens[1])?, label(line, tokens[2])?);
                    if a >= b {
                        return Err(err(line, format!("coupler labels must be increasing, got {a} {b}")));
                    }
                    let (i, j) = (active(a)?, active(b)?);
                    let e = g.edge_index(i, j).ok_or_else(|| err(line, format!("{a}-{b} is not a Chimera edge")))?;
                    if couplers.insert(e, real(line, tokens[3])?).is_some() {
                        return Err(err(line, format!("duplicate coupler {a} {b}")));
                    }
                }
            }
            other => return Err(err(line, format!("unknown directive `{other}`"))),
        }
    }

    let end = text.lines().count();
    let alpha = alpha.ok_or_else(|| err(end, "missing alpha".into()))?;
    let graph = match graph {
        Some(g) => g,
        None => Arc::new(ChimeraGraph::new(grid, excluded.as_deref().unwrap_or(&[])).map_err(|e| err(end, e.to_string()))?),
    };
    if let Some(i) = (0..graph.spin_count()).find(|i| !fields.contains_key(i)) {
        return Err(err(end, format!("missing field for label {}", graph.label(i))));
    }
    if let Some(e) = (0..graph.edge_count()).find(|e| !couplers.contains_key(e)) {
        let (a, b) = graph.label_edges()[e];
        return Err(err(end, format!("missing coupler {a} {b}")));
    }
    let h = fields.into_values().collect();
    let j = couplers.into_values().collect();
    Hamiltonian::new(graph, h, j, alpha).map_err(|e| err(end, e.to_string()))
}

pub fn format_hamiltonian(h: &Hamiltonian) -> String {
    let g = h.graph();
    let mut out = format!("chimera L={} K={}\n", g.grid_size(), g.cell_width());
    if !g.excluded().is_empty() {
        let labels: Vec<String> = g.excluded().iter().map(ToString::to_string).collect();
        writeln!(out, "exclude {}", labels.join(" ")).expect("string write");
    }
    writeln!(out, "alpha {}", h.alpha()).expect("string write");
    for (i, v) in h.fields().iter().enumerate() {
        writeln!(out, "h {} {}", g.label(i), v).expect("string write");
    }
    for (&(a, b), v) in g.label_edges().iter().zip(h.couplers()) {
        writeln!(out, "J {a} {b} {v}").expect("string write");
    }
    out
}

pub fn write_hamiltonian(path: &Path, h: &Hamiltonian) -> Result<()> {
    std::fs::write(path, format_hamiltonian(h)).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CELL: &str = "chimera L=1 K=4\nexclude 2 3 6 7\nalpha 0.5\nh 0 1\nh 1 -1\nh 4 1\nh 5 1\nJ 0 4 1\nJ 0 5 -1\nJ 1 4 1\nJ 1 5 1\n";

    #[test]
    fn parses_and_round_trips() {
        let h = parse_hamiltonian(CELL, "cell").unwrap();
        assert_eq!((h.spin_count(), h.couplers().len(), h.alpha()), (4, 4, 0.5));
        assert_eq!(h.fields()[1], -1.0);
        assert_eq!(format_hamiltonian(&h), CELL);
    }

    fn fails_on(text: &str, line: usize) {
        match parse_hamiltonian(text, "x") {
            Err(CliError::Format { line: l, .. }) => assert_eq!(l, line, "{text}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_files() {
        fails_on("", 1);
        fails_on("pegasus L=1", 1);
        fails_on("chimera L=1 K=6", 1);
        fails_on(&CELL.replace("J 1 5 1\n", "J 1 5 1\nJ 1 5 1\n"), 12);
        fails_on(&CELL.replace("J 1 5 1\n", ""), 10);
        fails_on(&CELL.replace("h 5 1\n", ""), 10);
        fails_on(&CELL.replace("J 0 4 1", "J 0 1 1"), 8);
        fails_on(&CELL.replace("J 0 4 1", "J 4 0 1"), 8);
        fails_on(&CELL.replace("h 0 1", "h 2 1"), 4);
        fails_on(&CELL.replace("alpha 0.5\n", ""), 10);
        fails_on(&CELL.replace("h 0 1", "h 0 nan"), 4);
        fails_on(&format!("{CELL}exclude 1\n"), 12);
    }
}
