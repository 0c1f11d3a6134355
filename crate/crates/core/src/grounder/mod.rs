//! Bottom-up dependency-driven grounding, its diminution-restricted variant,
//! and naive full instantiation.

mod graph;
mod matching;

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::time::Instant;

pub use graph::{Node, PredicateRuleGraph};
pub use matching::{apply_atom, good_matches, good_matches_within, Substitution};

pub(crate) use graph::tarjan;
use matching::{for_each_match, AtomStore, CompiledRule};

use crate::ast::{Atom, Program, Rule, Symbol};
use crate::error::{Error, Result};

/// A ground program together with the atom sets Algorithm-style grounding
/// maintains: `true_atoms` (A⊤) and `possible_atoms` (A¬⊥).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundProgram {
    pub rules: Vec<Rule>,
    pub atom_universe: BTreeSet<Atom>,
    pub true_atoms: BTreeSet<Atom>,
    pub possible_atoms: BTreeSet<Atom>,
    /// False when grounding stopped at a deadline.
    pub complete: bool,
}

impl GroundProgram {
    /// Wraps already-ground rules; `true_atoms` are the fact heads and
    /// `possible_atoms` every head atom.
    pub fn from_rules(rules: Vec<Rule>) -> Self {
        let mut g = GroundProgram {
            rules,
            complete: true,
            ..Default::default()
        };
        for r in &g.rules {
            if r.is_fact() {
                g.true_atoms.insert(r.head[0].clone());
            }
            g.possible_atoms.extend(r.head.iter().cloned());
            g.atom_universe.extend(r.atoms().cloned());
        }
        g
    }

    pub fn as_program(&self) -> Program {
        Program::new(self.rules.clone())
    }

    pub fn is_normal(&self) -> bool {
        self.rules.iter().all(|r| r.head.len() <= 1)
    }

    /// Sorted canonical rule lines, without the stats trailer.
    pub fn canonical_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self.rules.iter().map(|r| r.to_string()).collect();
        lines.sort();
        lines
    }

    /// Byte length of the canonical rule text.
    pub fn byte_size(&self) -> usize {
        self.canonical_lines().iter().map(|l| l.len() + 1).sum()
    }

    /// Canonical text: sorted rules, then `% stats: rules=.. atoms=.. bytes=..`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for l in self.canonical_lines() {
            out.push_str(&l);
            out.push('\n');
        }
        let bytes = out.len();
        let _ = writeln!(
            out,
            "% stats: rules={} atoms={} bytes={}",
            self.rules.len(),
            self.atom_universe.len(),
            bytes
        );
        out
    }
}

#[derive(Clone, Debug, Default)]
pub struct GroundOptions {
    pub deadline: Option<Instant>,
}

/// Grounds `P` over its whole Herbrand universe.
pub fn ground(program: &Program) -> GroundProgram {
    ground_with(program, None, &GroundOptions::default())
}

/// Grounds `P` with substitutions ranging only over `D ⊆ HU(P)`.
pub fn restrict_ground(program: &Program, domain: &BTreeSet<Symbol>) -> Result<GroundProgram> {
    restrict_ground_with(program, domain, &GroundOptions::default())
}

pub fn restrict_ground_with(
    program: &Program,
    domain: &BTreeSet<Symbol>,
    opts: &GroundOptions,
) -> Result<GroundProgram> {
    check_subset(program, domain)?;
    Ok(ground_with(program, Some(domain), opts))
}

pub(crate) fn check_subset(program: &Program, domain: &BTreeSet<Symbol>) -> Result<()> {
    let hu = program.herbrand_universe();
    match domain.iter().find(|c| !hu.contains(*c)) {
        Some(c) => Err(Error::NotInUniverse(c.to_string())),
        None => Ok(()),
    }
}

/// Core of the bottom-up grounder. Each component of the predicate-rule
/// graph is instantiated to a fixpoint against A¬⊥, then its instances are
/// simplified once A¬⊥ is final for every atom they can mention negatively.
pub fn ground_with(
    program: &Program,
    domain: Option<&BTreeSet<Symbol>>,
    opts: &GroundOptions,
) -> GroundProgram {
    let graph = PredicateRuleGraph::build(program);
    let compiled: Vec<CompiledRule> = program.rules.iter().map(CompiledRule::compile).collect();
    let domain: Option<HashSet<Symbol>> = domain.map(|d| d.iter().cloned().collect());
    let mut possible = AtomStore::default();
    let mut top: HashSet<Atom> = HashSet::new();
    let mut out = GroundProgram {
        complete: true,
        ..Default::default()
    };
    let timed_out = || opts.deadline.is_some_and(|d| Instant::now() >= d);

    'components: for component in graph.scc_topological_order() {
        let rules: Vec<usize> = component
            .iter()
            .filter_map(|n| match n {
                Node::Rule(i) => Some(*i),
                Node::Pred(_) => None,
            })
            .collect();
        if rules.is_empty() {
            continue;
        }
        let mut seen: HashSet<(usize, Vec<Option<Symbol>>)> = HashSet::new();
        let mut produced: Vec<Rule> = Vec::new();
        loop {
            let mut grew = false;
            for &ri in &rules {
                let cr = &compiled[ri];
                let mut fresh: Vec<Rule> = Vec::new();
                let mut steps = 0usize;
                let mut stopped = false;
                for_each_match(cr, &possible, domain.as_ref(), &mut |b| {
                    steps += 1;
                    if steps.is_multiple_of(4096) && timed_out() {
                        stopped = true;
                        return false;
                    }
                    if seen.insert((ri, b.to_vec())) {
                        fresh.push(cr.instantiate(b));
                    }
                    true
                });
                for g in fresh {
                    if g.body_neg.iter().any(|a| top.contains(a))
                        || (g.head.len() == 1 && top.contains(&g.head[0]))
                    {
                        continue;
                    }
                    for h in &g.head {
                        grew |= possible.insert(h.clone());
                    }
                    produced.push(g);
                }
                if stopped {
                    out.complete = false;
                    out.rules.extend(std::mem::take(&mut produced));
                    break 'components;
                }
            }
            if !grew {
                break;
            }
        }
        // Simplify in production order; repeat while new facts appear.
        let mut pending = produced;
        loop {
            let mut derived = false;
            let mut rest = Vec::with_capacity(pending.len());
            for mut g in pending {
                if g.body_neg.iter().any(|a| top.contains(a))
                    || (g.head.len() == 1 && top.contains(&g.head[0]))
                {
                    continue;
                }
                g.body_pos.retain(|a| !top.contains(a));
                g.body_neg.retain(|a| possible.contains(a));
                if g.head.len() == 1 && !g.has_body() {
                    top.insert(g.head[0].clone());
                    out.rules.push(g);
                    derived = true;
                } else {
                    rest.push(g);
                }
            }
            pending = rest;
            if !derived {
                break;
            }
        }
        out.rules.extend(pending);
    }

    out.true_atoms = top.into_iter().collect();
    out.possible_atoms = possible.iter().cloned().collect();
    for r in &out.rules {
        out.atom_universe.extend(r.atoms().cloned());
    }
    out
}

/// `P|_D`: every rule under every total assignment `V(r) → D`. False
/// comparisons drop the instance, true ones are removed; nothing else is
/// simplified.
pub fn full_instantiation(program: &Program, domain: &BTreeSet<Symbol>) -> GroundProgram {
    let values: Vec<Symbol> = domain.iter().cloned().collect();
    let mut rules = Vec::new();
    for rule in &program.rules {
        let cr = CompiledRule::compile(rule);
        let n = cr.vars.len();
        if n > 0 && values.is_empty() {
            continue;
        }
        let mut idx = vec![0usize; n];
        'odometer: loop {
            let binding: Vec<Option<Symbol>> =
                idx.iter().map(|&i| Some(values[i].clone())).collect();
            if cr.comparisons_ok(&binding) {
                rules.push(cr.instantiate(&binding));
            }
            let mut k = n;
            loop {
                if k == 0 {
                    break 'odometer;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < values.len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
    GroundProgram::from_rules(rules)
}
