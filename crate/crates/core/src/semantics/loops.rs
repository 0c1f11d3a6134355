//! Positive dependency graphs, loops, elementary loops, external supports
//! and loop formulas.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{guard, Interpretation};
use crate::ast::{Atom, Rule};
use crate::error::Result;
use crate::grounder::{tarjan, GroundProgram};

/// `G+_P`: an edge `p -> q` whenever some rule has `p` in its head and `q`
/// in its positive body.
#[derive(Clone, Debug)]
pub struct PositiveDependencyGraph {
    pub atoms: Vec<Atom>,
    index: BTreeMap<Atom, usize>,
    pub succ: Vec<BTreeSet<usize>>,
}

impl PositiveDependencyGraph {
    pub fn build(g: &GroundProgram) -> Self {
        let mut all: BTreeSet<Atom> = g.atom_universe.clone();
        all.extend(g.rules.iter().flat_map(|r| r.atoms().cloned()));
        let atoms: Vec<Atom> = all.into_iter().collect();
        let index: BTreeMap<Atom, usize> = atoms
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, a)| (a, i))
            .collect();
        let mut succ = vec![BTreeSet::new(); atoms.len()];
        for r in &g.rules {
            for h in &r.head {
                for b in &r.body_pos {
                    succ[index[h]].insert(index[b]);
                }
            }
        }
        PositiveDependencyGraph { atoms, index, succ }
    }

    pub fn has_edge(&self, from: &Atom, to: &Atom) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&a), Some(&b)) => self.succ[a].contains(&b),
            _ => false,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(BTreeSet::len).sum()
    }

    /// Strongly connected components as atom-index lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let edges: Vec<Vec<usize>> = self
            .succ
            .iter()
            .map(|s| s.iter().copied().collect())
            .collect();
        let comp = tarjan(&edges);
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (v, c) in comp.into_iter().enumerate() {
            groups.entry(c).or_default().push(v);
        }
        groups.into_values().collect()
    }

    fn ids(&self, set: &BTreeSet<Atom>) -> Option<Vec<usize>> {
        set.iter().map(|a| self.index.get(a).copied()).collect()
    }

    /// Whether the induced subgraph on `members` is strongly connected.
    fn strongly_connected(&self, members: &[usize]) -> bool {
        let Some(&start) = members.first() else {
            return false;
        };
        if members.len() == 1 {
            return true;
        }
        let inside: BTreeSet<usize> = members.iter().copied().collect();
        let reach = |forward: bool| -> usize {
            let mut seen = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &inside {
                    let edge = if forward {
                        self.succ[v].contains(&w)
                    } else {
                        self.succ[w].contains(&v)
                    };
                    if edge && seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
            seen.len()
        };
        reach(true) == inside.len() && reach(false) == inside.len()
    }

    pub fn is_loop(&self, set: &BTreeSet<Atom>) -> bool {
        self.ids(set)
            .is_some_and(|ids| self.strongly_connected(&ids))
    }

    fn to_atoms(&self, ids: &[usize]) -> BTreeSet<Atom> {
        ids.iter().map(|&i| self.atoms[i].clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    pub atoms: BTreeSet<Atom>,
    /// Filled in by the elementary-loop operations.
    pub is_elementary: Option<bool>,
}

/// `LF(L, P)` as the loop plus its external supports `R−(L, P)`.
#[derive(Clone, Debug)]
pub struct LoopFormula {
    pub loop_atoms: BTreeSet<Atom>,
    pub supports: Vec<Rule>,
}

impl LoopFormula {
    pub fn new(l: &BTreeSet<Atom>, g: &GroundProgram) -> Self {
        LoopFormula {
            loop_atoms: l.clone(),
            supports: external_supports(l, g).0,
        }
    }

    pub fn holds(&self, i: &Interpretation) -> bool {
        !self.loop_atoms.is_subset(i) || self.supports.iter().any(|r| body_true(r, i))
    }
}

fn body_true(r: &Rule, i: &Interpretation) -> bool {
    r.body_pos.iter().all(|a| i.contains(a)) && r.body_neg.iter().all(|a| !i.contains(a))
}

fn sort_loops(loops: &mut [Loop]) {
    loops.sort_by_cached_key(|l| {
        let mut names: Vec<String> = l.atoms.iter().map(|a| a.to_string()).collect();
        names.sort();
        (names.len(), names)
    });
}

/// Every atom set inducing a strongly connected subgraph of `G+`,
/// singletons included. Subsets are enumerated per component, so the
/// guard applies to the largest component.
pub fn loops(g: &GroundProgram, limit: usize) -> Result<Vec<Loop>> {
    let graph = PositiveDependencyGraph::build(g);
    let comps = graph.components();
    let largest = comps.iter().map(Vec::len).max().unwrap_or(0);
    guard("positive dependency component", largest, limit)?;
    let mut out = Vec::new();
    for comp in comps {
        let n = comp.len();
        for mask in 1u64..(1u64 << n) {
            let ids: Vec<usize> = (0..n)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| comp[b])
                .collect();
            if graph.strongly_connected(&ids) {
                out.push(Loop {
                    atoms: graph.to_atoms(&ids),
                    is_elementary: None,
                });
            }
        }
    }
    sort_loops(&mut out);
    Ok(out)
}

fn support_indices(l: &BTreeSet<Atom>, g: &GroundProgram) -> (Vec<usize>, Vec<usize>) {
    let mut minus = Vec::new();
    let mut plus = Vec::new();
    for (i, r) in g.rules.iter().enumerate() {
        if r.head.iter().any(|a| l.contains(a)) {
            if r.body_pos.iter().any(|a| l.contains(a)) {
                plus.push(i);
            } else {
                minus.push(i);
            }
        }
    }
    (minus, plus)
}

/// `(R−(L, P), R+(L, P))`: head-intersecting rules whose positive body
/// avoids `L`, and the remaining head-intersecting rules.
pub fn external_supports(l: &BTreeSet<Atom>, g: &GroundProgram) -> (Vec<Rule>, Vec<Rule>) {
    let (minus, plus) = support_indices(l, g);
    let pick = |ix: Vec<usize>| ix.into_iter().map(|i| g.rules[i].clone()).collect();
    (pick(minus), pick(plus))
}

pub fn satisfies_loop_formula(i: &Interpretation, l: &BTreeSet<Atom>, g: &GroundProgram) -> bool {
    LoopFormula::new(l, g).holds(i)
}

/// `L` is elementary iff every strict sub-loop has an external support
/// that lies in `R+(L)`.
pub fn is_elementary_loop(l: &BTreeSet<Atom>, g: &GroundProgram, limit: usize) -> Result<bool> {
    guard("loop", l.len(), limit)?;
    let graph = PositiveDependencyGraph::build(g);
    Ok(elementary_in(&graph, l, g))
}

pub(crate) fn elementary_in(
    graph: &PositiveDependencyGraph,
    l: &BTreeSet<Atom>,
    g: &GroundProgram,
) -> bool {
    let plus: BTreeSet<usize> = support_indices(l, g).1.into_iter().collect();
    let Some(ids) = graph.ids(l) else {
        return false;
    };
    let n = ids.len();
    let full = (1u64 << n) - 1;
    (1u64..full).all(|mask| {
        let sub: Vec<usize> = (0..n)
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| ids[b])
            .collect();
        if !graph.strongly_connected(&sub) {
            return true;
        }
        let sub_atoms = graph.to_atoms(&sub);
        support_indices(&sub_atoms, g)
            .0
            .iter()
            .any(|r| plus.contains(r))
    })
}

pub fn elementary_loops(g: &GroundProgram, limit: usize) -> Result<Vec<Loop>> {
    let graph = PositiveDependencyGraph::build(g);
    let mut out: Vec<Loop> = loops(g, limit)?
        .into_iter()
        .filter(|l| elementary_in(&graph, &l.atoms, g))
        .map(|mut l| {
            l.is_elementary = Some(true);
            l
        })
        .collect();
    sort_loops(&mut out);
    Ok(out)
}

/// The greatest subset of `within ∩ M` that is unfounded w.r.t. `M`: atoms
/// not reachable by rules with a true body in `M` whose positive body inside
/// `within ∩ M` is already founded.
pub fn unfounded_within(
    g: &GroundProgram,
    m: &Interpretation,
    within: &BTreeSet<Atom>,
) -> BTreeSet<Atom> {
    let cand: BTreeSet<&Atom> = within.iter().filter(|a| m.contains(*a)).collect();
    let live: Vec<&Rule> = g.rules.iter().filter(|r| body_true(r, m)).collect();
    let mut founded: BTreeSet<&Atom> = BTreeSet::new();
    loop {
        let mut grew = false;
        for r in &live {
            if r.body_pos
                .iter()
                .all(|b| !cand.contains(b) || founded.contains(b))
            {
                for h in &r.head {
                    if cand.contains(h) && founded.insert(h) {
                        grew = true;
                    }
                }
            }
        }
        if !grew {
            break;
        }
    }
    cand.into_iter()
        .filter(|a| !founded.contains(a))
        .cloned()
        .collect()
}

/// A loop `L ⊆ within ∩ M` whose loop formula `M` violates, if any.
///
/// Every violated loop lies inside the greatest unfounded set; a sink
/// component of `G+` restricted to that set is itself a violated loop.
pub fn unfounded_loop_within(
    g: &GroundProgram,
    m: &Interpretation,
    within: &BTreeSet<Atom>,
) -> Option<BTreeSet<Atom>> {
    let rest = unfounded_within(g, m, within);
    if rest.is_empty() {
        return None;
    }
    let rest: Vec<&Atom> = rest.iter().collect();
    let live: Vec<&Rule> = g.rules.iter().filter(|r| body_true(r, m)).collect();
    let pos: BTreeMap<&Atom, usize> = rest.iter().enumerate().map(|(i, a)| (*a, i)).collect();
    let mut edges = vec![Vec::new(); rest.len()];
    for r in &live {
        for h in r.head.iter().filter_map(|h| pos.get(h)) {
            for b in r.body_pos.iter().filter_map(|b| pos.get(b)) {
                edges[*h].push(*b);
            }
        }
    }
    let comp = tarjan(&edges);
    // Tarjan numbers sink components first.
    let sink = comp.iter().copied().min().expect("non-empty");
    Some(
        rest.iter()
            .enumerate()
            .filter(|(i, _)| comp[*i] == sink)
            .map(|(_, a)| (*a).clone())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_atom, parse_program};

    fn gp(src: &str) -> GroundProgram {
        GroundProgram::from_rules(parse_program(src).unwrap().rules)
    }

    fn set(atoms: &[&str]) -> BTreeSet<Atom> {
        atoms.iter().map(|s| parse_atom(s).unwrap()).collect()
    }

    #[test]
    fn two_cycle_loops() {
        let got: Vec<BTreeSet<Atom>> = loops(&gp("p :- q. q :- p."), 22)
            .unwrap()
            .into_iter()
            .map(|l| l.atoms)
            .collect();
        assert_eq!(got, vec![set(&["p"]), set(&["q"]), set(&["p", "q"])]);
    }

    #[test]
    fn three_cycle_has_no_pair_loops() {
        let got = loops(&gp("p :- q. q :- r. r :- p."), 22).unwrap();
        assert_eq!(got.len(), 4);
        assert_eq!(got[3].atoms.len(), 3);
    }

    #[test]
    fn acyclic_graph_gives_singletons() {
        let g = gp("a. b :- a. c :- b, not a.");
        assert!(loops(&g, 22).unwrap().iter().all(|l| l.atoms.len() == 1));
        assert_eq!(PositiveDependencyGraph::build(&gp("a. b.")).edge_count(), 0);
    }

    #[test]
    fn external_support_examples() {
        let g = gp("p :- q. q :- p. p :- a.");
        let (minus, plus) = external_supports(&set(&["p", "q"]), &g);
        assert_eq!(minus, gp("p :- a.").rules);
        assert_eq!(plus.len(), 2);
        let (minus, _) = external_supports(&set(&["a"]), &gp("a."));
        assert_eq!(minus.len(), 1);
        assert!(external_supports(&set(&["p", "q"]), &gp("p :- q. q :- p."))
            .0
            .is_empty());
    }

    #[test]
    fn loop_formula_examples() {
        let g = gp("p :- q. q :- p.");
        assert!(satisfies_loop_formula(&set(&["p"]), &set(&["p", "q"]), &g));
        assert!(!satisfies_loop_formula(
            &set(&["p", "q"]),
            &set(&["p", "q"]),
            &g
        ));
    }

    #[test]
    fn singletons_are_elementary() {
        let g = gp("p :- q. q :- p. p :- a. a.");
        for l in loops(&g, 22).unwrap() {
            if l.atoms.len() == 1 {
                assert!(is_elementary_loop(&l.atoms, &g, 22).unwrap());
            }
        }
    }

    #[test]
    fn non_elementary_loop() {
        // {a,b} is only supported through rules that also need a or b.
        let g = gp("a :- b. b :- a. c :- a. a :- c, b.");
        assert!(!is_elementary_loop(&set(&["a", "b", "c"]), &g, 22).unwrap());
        assert!(is_elementary_loop(&set(&["a", "b"]), &g, 22).unwrap());
        assert!(is_elementary_loop(&set(&["p", "q"]), &gp("p :- q. q :- p."), 22).unwrap());
    }

    #[test]
    fn unfounded_witness() {
        let g = gp("p :- q. q :- p. r :- not s.");
        let m = set(&["p", "q", "r"]);
        assert_eq!(unfounded_loop_within(&g, &m, &m), Some(set(&["p", "q"])));
        assert_eq!(unfounded_loop_within(&g, &set(&["r"]), &m), None);
    }
}
