//! Heuristic diminution builders for the three oracle modes.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::generators::{man_name, man_rank, offset_name, woman_name, woman_rank, COLORS};
use super::{Family, HeuristicMode, HeuristicSpec, Instance};
use crate::ast::Symbol;
use crate::error::{Error, Result};

fn syms(names: impl IntoIterator<Item = String>) -> BTreeSet<Symbol> {
    names.into_iter().map(|n| Symbol::new(&n)).collect()
}

fn incompatible(h: &HeuristicSpec, f: Family) -> Error {
    Error::IncompatibleHeuristic {
        mode: h.mode.as_str().to_string(),
        family: f.as_str().to_string(),
    }
}

/// Constants kept by `h` on `inst`; always a subset of `HU(P)`.
pub fn build_diminution(inst: &Instance, h: &HeuristicSpec) -> Result<BTreeSet<Symbol>> {
    let d = match inst.spec.family {
        Family::Coloring => coloring(inst, h)?,
        Family::Hamiltonian => hamiltonian(inst, h)?,
        Family::StableMarriage => marriage(inst, h)?,
    };
    let hu = inst.program.herbrand_universe();
    Ok(d.intersection(&hu).cloned().collect())
}

/// f1 keeps a seeded fraction `param` of the vertices with all colors; f2
/// keeps every vertex and the first `param` colors.
fn coloring(inst: &Instance, h: &HeuristicSpec) -> Result<BTreeSet<Symbol>> {
    let n = inst.spec.n as u32;
    match h.mode {
        HeuristicMode::F1Partial => {
            let mut vs: Vec<u32> = (1..=n).collect();
            vs.shuffle(&mut ChaCha8Rng::seed_from_u64(inst.spec.seed));
            let keep = ((h.param * n as f64).round() as usize).min(vs.len());
            let mut d = syms(vs[..keep].iter().map(|v| v.to_string()));
            d.extend(syms(COLORS.iter().map(|c| c.to_string())));
            Ok(d)
        }
        HeuristicMode::F2ValueSubset => {
            let k = (h.param.max(0.0) as usize).min(COLORS.len());
            let mut d = syms((1..=n).map(|v| v.to_string()));
            d.extend(syms(COLORS[..k].iter().map(|c| c.to_string())));
            Ok(d)
        }
        HeuristicMode::F3Neighborhood => Err(incompatible(h, Family::Coloring)),
    }
}

/// Ring distance between offsets on `Z_n`.
fn ring_distance(a: u32, b: u32, n: u32) -> u32 {
    let d = a.abs_diff(b) % n;
    d.min(n - d)
}

/// f2 keeps the offsets `1..=param`; f3 keeps every offset within ring
/// distance `param` of the guessed successor offset 1. Both keep all nodes.
fn hamiltonian(inst: &Instance, h: &HeuristicSpec) -> Result<BTreeSet<Symbol>> {
    let n = inst.spec.n as u32;
    let k = h.param.max(0.0) as u32;
    let offsets: Vec<u32> = match h.mode {
        HeuristicMode::F2ValueSubset => (1..n).filter(|&o| o <= k.max(1)).collect(),
        HeuristicMode::F3Neighborhood => (1..n).filter(|&o| ring_distance(o, 1, n) <= k).collect(),
        HeuristicMode::F1Partial => return Err(incompatible(h, Family::Hamiltonian)),
    };
    let mut d = syms((0..n).map(|v| v.to_string()));
    d.extend(syms(offsets.into_iter().map(offset_name)));
    Ok(d)
}

/// f2 keeps the men's ranks `1..=param`; f3 keeps ranks up to the deepest
/// man-optimal partner rank plus `param`. All people and women's ranks stay.
fn marriage(inst: &Instance, h: &HeuristicSpec) -> Result<BTreeSet<Symbol>> {
    let prefs = inst
        .preferences
        .as_ref()
        .expect("marriage instances carry preferences");
    let n = prefs.len();
    let top = match h.mode {
        HeuristicMode::F2ValueSubset => h.param.max(1.0) as usize,
        HeuristicMode::F3Neighborhood => prefs.man_optimal_depth() + h.param.max(0.0) as usize,
        HeuristicMode::F1Partial => return Err(incompatible(h, Family::StableMarriage)),
    };
    let mut d = syms((0..n).map(|i| man_name(i, n)));
    d.extend(syms((0..n).map(|i| woman_name(i, n))));
    d.extend(syms((0..n).map(|r| woman_rank(r, n))));
    d.extend(syms((0..top.min(n)).map(|r| man_rank(r, n))));
    Ok(d)
}
