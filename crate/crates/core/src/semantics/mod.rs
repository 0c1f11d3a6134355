//! Stable-model semantics for ground programs: reducts, minimal models,
//! answer sets, positive dependency graphs and loops.

mod loops;
pub(crate) use loops::elementary_in;
pub(crate) mod solver;

use std::collections::BTreeSet;
use std::time::Instant;

pub use loops::{
    elementary_loops, external_supports, is_elementary_loop, loops, satisfies_loop_formula,
    unfounded_loop_within, unfounded_within, Loop, LoopFormula, PositiveDependencyGraph,
};
use solver::{Instance, Mode, Outcome, Search};

use crate::ast::{format_atom_set, Atom, Rule};
use crate::error::{Error, Result};
use crate::grounder::GroundProgram;

pub type Interpretation = BTreeSet<Atom>;

/// Default limit for operations that enumerate atom subsets.
pub const DEFAULT_SUBSET_LIMIT: usize = 22;
/// Default limit on the atom count handed to the search engine.
pub const DEFAULT_SEARCH_LIMIT: usize = 20_000;

#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub max_atoms: usize,
    /// Stop after this many answer sets.
    pub max_models: Option<usize>,
    pub deadline: Option<Instant>,
    pub node_budget: Option<u64>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_atoms: DEFAULT_SEARCH_LIMIT,
            max_models: None,
            deadline: None,
            node_budget: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOutcome {
    pub answer_sets: Vec<Interpretation>,
    /// False when the search was cut short by a budget or deadline.
    pub complete: bool,
}

/// `P^S`: drops rules whose negative body meets `S`, strips the rest.
pub fn gl_reduct(g: &GroundProgram, s: &Interpretation) -> GroundProgram {
    let rules = g
        .rules
        .iter()
        .filter(|r| r.body_neg.iter().all(|a| !s.contains(a)))
        .map(|r| Rule::new(r.head.clone(), r.body_pos.clone(), vec![], vec![]))
        .collect();
    let mut out = GroundProgram::from_rules(rules);
    out.atom_universe = g.atom_universe.clone();
    out
}

pub fn is_model(g: &GroundProgram, i: &Interpretation) -> bool {
    g.rules.iter().all(|r| {
        let body =
            r.body_pos.iter().all(|a| i.contains(a)) && r.body_neg.iter().all(|a| !i.contains(a));
        !body || r.head.iter().any(|a| i.contains(a))
    })
}

fn require_positive(g: &GroundProgram) -> Result<()> {
    match g.rules.iter().find(|r| !r.body_neg.is_empty()) {
        Some(r) => Err(Error::NotPositive(r.to_string())),
        None => Ok(()),
    }
}

/// Least model of a positive normal program by fixpoint iteration.
pub fn least_model(g: &GroundProgram) -> Result<Interpretation> {
    require_positive(g)?;
    if let Some(r) = g.rules.iter().find(|r| r.head.len() > 1) {
        return Err(Error::NonNormal(r.to_string()));
    }
    let mut m = Interpretation::new();
    loop {
        let before = m.len();
        for r in &g.rules {
            if r.body_pos.iter().all(|a| m.contains(a)) {
                if r.head.is_empty() {
                    continue;
                }
                m.insert(r.head[0].clone());
            }
        }
        if m.len() == before {
            return Ok(m);
        }
    }
}

fn head_atoms(g: &GroundProgram) -> Vec<Atom> {
    let set: BTreeSet<&Atom> = g.rules.iter().flat_map(|r| r.head.iter()).collect();
    set.into_iter().cloned().collect()
}

fn guard(what: &'static str, size: usize, limit: usize) -> Result<()> {
    if size > limit {
        Err(Error::SizeGuard { what, size, limit })
    } else {
        Ok(())
    }
}

/// All ⊆-minimal models of a positive program by subset enumeration.
/// Only head atoms can occur in a minimal model, so the guard applies to
/// them.
pub fn minimal_models(g: &GroundProgram, limit: usize) -> Result<Vec<Interpretation>> {
    require_positive(g)?;
    let cands = head_atoms(g);
    guard("minimal-model candidate set", cands.len(), limit)?;
    let n = cands.len();
    let mut masks: Vec<u32> = (0..(1u32 << n)).collect();
    masks.sort_by_key(|m| m.count_ones());
    let mut minimal: Vec<u32> = Vec::new();
    for m in masks {
        if minimal.iter().any(|&k| k & !m == 0) {
            continue;
        }
        let i: Interpretation = (0..n)
            .filter(|b| m >> b & 1 == 1)
            .map(|b| cands[b].clone())
            .collect();
        if is_model(g, &i) {
            minimal.push(m);
        }
    }
    let mut out: Vec<Interpretation> = minimal
        .into_iter()
        .map(|m| {
            (0..n)
                .filter(|b| m >> b & 1 == 1)
                .map(|b| cands[b].clone())
                .collect()
        })
        .collect();
    canonical_order(&mut out);
    Ok(out)
}

/// Reference enumeration straight from the definition: every subset `S` of
/// head atoms with `S ∈ Γ(P^S)`. Exponential; guarded by `limit`.
pub fn answer_sets_by_subsets(g: &GroundProgram, limit: usize) -> Result<Vec<Interpretation>> {
    let cands = head_atoms(g);
    guard("answer-set candidate set", cands.len(), limit)?;
    let n = cands.len();
    let mut out = Vec::new();
    for m in 0..(1u64 << n) {
        let s: Interpretation = (0..n)
            .filter(|b| m >> b & 1 == 1)
            .map(|b| cands[b].clone())
            .collect();
        if !is_model(g, &s) {
            continue;
        }
        let reduct = gl_reduct(g, &s);
        // S is a model of P^S; it is minimal iff no proper subset is one.
        let smaller = s.iter().any(|a| {
            let mut t = s.clone();
            t.remove(a);
            subset_has_model(&reduct, &t)
        });
        if !smaller {
            out.push(s);
        }
    }
    canonical_order(&mut out);
    Ok(out)
}

/// Whether some subset of `within` is a model of the positive program.
fn subset_has_model(reduct: &GroundProgram, within: &Interpretation) -> bool {
    let atoms: Vec<&Atom> = within.iter().collect();
    let n = atoms.len();
    (0..(1u64 << n)).any(|m| {
        let t: Interpretation = (0..n)
            .filter(|b| m >> b & 1 == 1)
            .map(|b| atoms[b].clone())
            .collect();
        is_model(reduct, &t)
    })
}

/// All answer sets, in canonical order.
pub fn answer_sets(g: &GroundProgram) -> Result<Vec<Interpretation>> {
    Ok(answer_sets_with(g, &SolveConfig::default())?.answer_sets)
}

pub fn answer_sets_with(g: &GroundProgram, cfg: &SolveConfig) -> Result<SolveOutcome> {
    solve_assuming(g, &Interpretation::new(), cfg)
}

/// Answer sets of `g ∪ {a. | a ∈ assumed}`.
pub(crate) fn solve_assuming(
    g: &GroundProgram,
    assumed: &Interpretation,
    cfg: &SolveConfig,
) -> Result<SolveOutcome> {
    let inst = Instance::new(&g.rules, assumed.iter());
    guard("ground program", inst.len(), cfg.max_atoms)?;
    let mut search = Search::new(&inst, Mode::Stable);
    search.deadline = cfg.deadline;
    search.node_budget = cfg.node_budget;
    for a in assumed {
        search.assume(inst.index[a], true);
    }
    let mut sets = Vec::new();
    let outcome = search.run(&mut |val| {
        sets.push(
            val.iter()
                .enumerate()
                .filter(|(_, &v)| v)
                .map(|(i, _)| inst.atoms[i].clone())
                .collect(),
        );
        cfg.max_models.is_none_or(|k| sets.len() < k)
    });
    canonical_order(&mut sets);
    Ok(SolveOutcome {
        answer_sets: sets,
        complete: outcome == Outcome::Exhausted
            || (outcome == Outcome::Stopped && cfg.max_models.is_some()),
    })
}

/// Sorts interpretations by their canonical printing.
pub fn canonical_order(sets: &mut [Interpretation]) {
    sets.sort_by_cached_key(canonical_key);
}

fn canonical_key(i: &Interpretation) -> Vec<String> {
    let mut v: Vec<String> = i.iter().map(|a| a.to_string()).collect();
    v.sort();
    v
}

/// `{a, b, ...}` with atoms in canonical printing order.
pub fn format_interpretation(i: &Interpretation) -> String {
    let mut atoms: Vec<&Atom> = i.iter().collect();
    atoms.sort_by_cached_key(|a| a.to_string());
    format_atom_set(atoms)
}
