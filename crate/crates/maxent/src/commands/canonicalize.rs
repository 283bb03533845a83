//! `canonicalize`: the canonical class of one unit-cell Hamiltonian, or the
//! whole class table.

use std::path::PathBuf;

use maxent_core::symmetry::{canonical_classes, canonicalize_cell, orbit_size_histogram};

use super::Run;
use crate::config::Config;
use crate::error::Result;
use crate::format::read_hamiltonian;

#[derive(Debug, Clone)]
pub struct CanonicalizeParams {
    pub hamiltonian: Option<PathBuf>,
}

impl CanonicalizeParams {
    pub fn from_config(c: &Config) -> Result<Self> {
        Ok(Self { hamiltonian: c.path_value("graph.hamiltonian")? })
    }
}

pub fn run(p: &CanonicalizeParams, run: &mut Run) -> Result<()> {
    let classes = canonical_classes();
    if let Some(path) = &p.hamiltonian {
        run.out.input(path)?;
        let h = read_hamiltonian(path)?;
        let c = canonicalize_cell(&h)?;
        let orbit = classes.iter().find(|k| k.word == c.word).map_or(0, |k| k.orbit_size);
        let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        let flip = join(&mut c.gauge_flip.iter().map(|&i| h.graph().label(i)));
        let perm = join(&mut c.permutation.0.iter().map(|&x| x as usize));
        run.out.csv(
            "canonical.csv",
            &["class_word", "orbit_size", "gauge_flip", "permutation"],
            [[format!("{:04x}", c.word), orbit.to_string(), flip, perm]],
        )?;
        run.out.note("class_word", format!("{:04x}", c.word))?;
        return Ok(());
    }
    run.out.csv("classes.csv", &["class_word", "orbit_size"], classes.iter().map(|c| [format!("{:04x}", c.word), c.orbit_size.to_string()]))?;
    let hist = orbit_size_histogram(&classes);
    run.out.csv("histogram.csv", &["orbit_size", "classes"], hist.iter().map(|(s, n)| [s.to_string(), n.to_string()]))?;
    run.out.note("classes", classes.len())?;
    run.out.note("gauge_fixed_words", classes.iter().map(|c| c.orbit_size).sum::<usize>())?;
    Ok(())
}
