//! Exact classification of a constant subset `D ⊆ HU(P)`: admissible, safe,
//! preserved, splitting-safe, loop-admissible and elementary-loop-admissible.

use std::collections::BTreeSet;
use std::fmt;

use crate::ast::{Atom, Program, Rule, Signature, Symbol};
use crate::error::Result;
use crate::grounder::{check_subset, full_instantiation, tarjan, GroundProgram};
use crate::semantics::solver::{Instance, Mode, Outcome, Search};
use crate::semantics::{
    answer_sets_with, elementary_in, elementary_loops, external_supports, format_interpretation,
    loops, unfounded_loop_within, unfounded_within, Interpretation, PositiveDependencyGraph,
    SolveConfig, DEFAULT_SUBSET_LIMIT,
};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Diminution {
    pub constants: BTreeSet<Symbol>,
    pub preserved: BTreeSet<Signature>,
}

impl Diminution {
    pub fn new(constants: impl IntoIterator<Item = Symbol>) -> Self {
        Diminution {
            constants: constants.into_iter().collect(),
            preserved: BTreeSet::new(),
        }
    }

    pub fn of(names: &[&str]) -> Self {
        Self::new(names.iter().map(|n| Symbol::new(n)))
    }

    pub fn preserving(mut self, sigs: impl IntoIterator<Item = Signature>) -> Self {
        self.preserved.extend(sigs);
        self
    }
}

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub solve: SolveConfig,
    /// Largest loop component or unfounded set enumerated by subsets.
    pub loop_limit: usize,
    /// Search nodes per extension search in the loop-based checks.
    pub node_budget: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            solve: SolveConfig::default(),
            loop_limit: DEFAULT_SUBSET_LIMIT,
            node_budget: 2_000_000,
        }
    }
}

/// A decision with a counterexample when it is false.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<Interpretation>,
}

impl Verdict {
    fn yes() -> Self {
        Verdict {
            holds: true,
            witness: None,
        }
    }

    fn no(w: Interpretation) -> Self {
        Verdict {
            holds: false,
            witness: Some(w),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriState {
    True,
    False,
    Unknown,
}

impl TriState {
    pub fn as_str(self) -> &'static str {
        match self {
            TriState::True => "true",
            TriState::False => "false",
            TriState::Unknown => "unknown",
        }
    }
}

impl fmt::Display for TriState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopVerdict {
    pub status: TriState,
    pub evidence: Vec<String>,
    pub witness: Option<Interpretation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SplittingVerdict {
    /// The atoms of `P|_D` split `P|_HU(P)`.
    Holds,
    /// A rule of `P|_HU(P)` touches the atoms of `P|_D` with its head but
    /// not with all of its atoms.
    Fails { rule: Rule },
    /// `P` has no answer set, so the notion does not apply.
    NoAnswerSet,
}

impl SplittingVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            SplittingVerdict::Holds => "true",
            SplittingVerdict::Fails { .. } => "false",
            SplittingVerdict::NoAnswerSet => "precondition_failed",
        }
    }

    pub fn holds(&self) -> Option<bool> {
        match self {
            SplittingVerdict::Holds => Some(true),
            SplittingVerdict::Fails { .. } => Some(false),
            SplittingVerdict::NoAnswerSet => None,
        }
    }
}

/// `P|_D` and `P|_HU(P)` with their answer sets.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub full: GroundProgram,
    pub reduced: GroundProgram,
    pub full_sets: Vec<Interpretation>,
    pub reduced_sets: Vec<Interpretation>,
}

impl Analysis {
    pub fn new(program: &Program, d: &Diminution, cfg: &CheckConfig) -> Result<Self> {
        check_subset(program, &d.constants)?;
        let full = full_instantiation(program, &program.herbrand_universe());
        let reduced = full_instantiation(program, &d.constants);
        let full_sets = answer_sets_with(&full, &cfg.solve)?.answer_sets;
        let reduced_sets = answer_sets_with(&reduced, &cfg.solve)?.answer_sets;
        Ok(Analysis {
            full,
            reduced,
            full_sets,
            reduced_sets,
        })
    }
}

pub fn admissible_in(a: &Analysis) -> Verdict {
    match a
        .reduced_sets
        .iter()
        .find(|id| !a.full_sets.iter().any(|i| id.is_subset(i)))
    {
        Some(w) => Verdict::no(w.clone()),
        None => Verdict::yes(),
    }
}

pub fn safe_in(a: &Analysis) -> Verdict {
    let adm = admissible_in(a);
    if !adm.holds {
        return adm;
    }
    match a
        .full_sets
        .iter()
        .find(|i| !a.reduced_sets.iter().any(|id| id.is_subset(i)))
    {
        Some(w) => Verdict::no(w.clone()),
        None => Verdict::yes(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreservedMode {
    Admissible,
    Safe,
}

fn project(i: &Interpretation, preds: &BTreeSet<Signature>) -> Interpretation {
    i.iter()
        .filter(|a| preds.contains(&a.signature()))
        .cloned()
        .collect()
}

pub fn preserved_in(a: &Analysis, preserved: &BTreeSet<Signature>, mode: PreservedMode) -> Verdict {
    let base = match mode {
        PreservedMode::Admissible => admissible_in(a),
        PreservedMode::Safe => safe_in(a),
    };
    if !base.holds {
        return base;
    }
    let full: Vec<Interpretation> = a.full_sets.iter().map(|i| project(i, preserved)).collect();
    match a
        .reduced_sets
        .iter()
        .find(|id| !full.contains(&project(id, preserved)))
    {
        Some(w) => Verdict::no(w.clone()),
        None => Verdict::yes(),
    }
}

/// Linear scan: every rule of `P|_HU(P)` whose head meets `U = atoms(P|_D)`
/// has all its atoms in `U`.
pub fn splitting_in(a: &Analysis) -> SplittingVerdict {
    if a.full_sets.is_empty() {
        return SplittingVerdict::NoAnswerSet;
    }
    let u = &a.reduced.atom_universe;
    match a
        .full
        .rules
        .iter()
        .find(|r| r.head.iter().any(|h| u.contains(h)) && !r.atoms().all(|x| u.contains(x)))
    {
        Some(r) => SplittingVerdict::Fails { rule: r.clone() },
        None => SplittingVerdict::Holds,
    }
}

fn atoms_of(inst: &Instance, val: &[bool]) -> Interpretation {
    val.iter()
        .enumerate()
        .filter(|(_, &v)| v)
        .map(|(i, _)| inst.atoms[i].clone())
        .collect()
}

/// Condition 2 (or its elementary mirror): a loop of `P|_HU(P)` that is not
/// a loop of `P|_D` but contains one with an external support in `P|_D`.
fn loop_condition(
    a: &Analysis,
    elementary: bool,
    limit: usize,
) -> Result<Option<(Interpretation, Interpretation)>> {
    let full_loops = if elementary {
        elementary_loops(&a.full, limit)?
    } else {
        loops(&a.full, limit)?
    };
    let graph = PositiveDependencyGraph::build(&a.reduced);
    let atoms = &a.reduced.atom_universe;
    let is_reduced_loop = |l: &Interpretation| {
        l.is_subset(atoms)
            && graph.is_loop(l)
            && (!elementary || elementary_in(&graph, l, &a.reduced))
    };
    for l in full_loops {
        if l.atoms.len() < 2 || is_reduced_loop(&l.atoms) {
            continue;
        }
        let items: Vec<&Atom> = l.atoms.iter().collect();
        let n = items.len();
        for mask in 1u64..((1u64 << n) - 1) {
            let sub: Interpretation = (0..n)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| items[b].clone())
                .collect();
            if is_reduced_loop(&sub) && !external_supports(&sub, &a.reduced).0.is_empty() {
                return Ok(Some((l.atoms, sub)));
            }
        }
    }
    Ok(None)
}

/// Elementary loops inside `rest` (subsets of one strongly connected part)
/// whose loop formula `m` violates. `None` when a part exceeds `limit`.
fn violated_elementary_loop(
    full: &GroundProgram,
    graph: &PositiveDependencyGraph,
    m: &Interpretation,
    rest: &Interpretation,
    limit: usize,
) -> Option<Option<Interpretation>> {
    let items: Vec<&Atom> = rest.iter().collect();
    let edges: Vec<Vec<usize>> = items
        .iter()
        .map(|x| {
            (0..items.len())
                .filter(|&j| graph.has_edge(x, items[j]))
                .collect()
        })
        .collect();
    let comp = tarjan(&edges);
    let count = comp.iter().copied().max().map_or(0, |c| c + 1);
    for c in 0..count {
        let part: Vec<&Atom> = (0..items.len())
            .filter(|&i| comp[i] == c)
            .map(|i| items[i])
            .collect();
        if part.len() > limit {
            return None;
        }
        for mask in 1u64..(1u64 << part.len()) {
            let l: Interpretation = (0..part.len())
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| part[b].clone())
                .collect();
            if graph.is_loop(&l)
                && elementary_in(graph, &l, full)
                && !crate::semantics::satisfies_loop_formula(m, &l, full)
            {
                return Some(Some(l));
            }
        }
    }
    Some(None)
}

/// Loop-admissibility (`elementary = false`) or its elementary variant.
pub fn loop_admissible_in(a: &Analysis, elementary: bool, cfg: &CheckConfig) -> LoopVerdict {
    let mut evidence = Vec::new();
    let unknown = |evidence: Vec<String>| LoopVerdict {
        status: TriState::Unknown,
        evidence,
        witness: None,
    };
    match loop_condition(a, elementary, cfg.loop_limit) {
        Err(e) => {
            evidence.push(format!("loop enumeration stopped: {e}"));
            return unknown(evidence);
        }
        Ok(Some((l, sub))) => {
            evidence.push(format!(
                "loop {} of the full program contains {} with an external support in the reduced program",
                format_interpretation(&l),
                format_interpretation(&sub)
            ));
            return LoopVerdict {
                status: TriState::False,
                evidence,
                witness: Some(l),
            };
        }
        Ok(None) => {}
    }
    let inst = Instance::new(&a.full.rules, a.full.atom_universe.iter());
    let graph = PositiveDependencyGraph::build(&a.full);
    let mut undecided = false;
    for id in &a.reduced_sets {
        let mut search = Search::new(
            &inst,
            if elementary {
                Mode::Supported
            } else {
                Mode::LoopFormulas
            },
        );
        search.node_budget = Some(cfg.node_budget);
        search.deadline = cfg.solve.deadline;
        for x in id {
            search.assume(inst.index[x], true);
        }
        let mut found: Option<Interpretation> = None;
        let mut guard_tripped = false;
        let outcome = search.run(&mut |val| {
            let m = atoms_of(&inst, val);
            let extra: Interpretation = m.difference(id).cloned().collect();
            if elementary {
                let rest = unfounded_within(&a.full, &m, &extra);
                match violated_elementary_loop(&a.full, &graph, &m, &rest, cfg.loop_limit) {
                    None => {
                        guard_tripped = true;
                        return true;
                    }
                    Some(Some(_)) => return true,
                    Some(None) => {}
                }
            }
            found = Some(m);
            false
        });
        match (found, outcome) {
            (Some(m), _) => {
                if let Some(l) = unfounded_loop_within(&a.full, &m, &m) {
                    evidence.push(format!(
                        "extension of {} leaves loop {} without external support",
                        format_interpretation(id),
                        format_interpretation(&l)
                    ));
                }
            }
            (None, Outcome::Exhausted) if !guard_tripped => {
                evidence.push(format!(
                    "no extension exists for {}",
                    format_interpretation(id)
                ));
                return LoopVerdict {
                    status: TriState::False,
                    evidence,
                    witness: Some(id.clone()),
                };
            }
            _ => undecided = true,
        }
    }
    if undecided {
        evidence.push("extension search exceeded its budget".to_string());
        return unknown(evidence);
    }
    LoopVerdict {
        status: TriState::True,
        evidence,
        witness: None,
    }
}

pub fn check_admissible(p: &Program, d: &Diminution, cfg: &CheckConfig) -> Result<Verdict> {
    Ok(admissible_in(&Analysis::new(p, d, cfg)?))
}

pub fn check_safe(p: &Program, d: &Diminution, cfg: &CheckConfig) -> Result<Verdict> {
    Ok(safe_in(&Analysis::new(p, d, cfg)?))
}

pub fn check_preserved(
    p: &Program,
    d: &Diminution,
    mode: PreservedMode,
    cfg: &CheckConfig,
) -> Result<Verdict> {
    Ok(preserved_in(&Analysis::new(p, d, cfg)?, &d.preserved, mode))
}

pub fn check_splitting_safe(
    p: &Program,
    d: &Diminution,
    cfg: &CheckConfig,
) -> Result<SplittingVerdict> {
    Ok(splitting_in(&Analysis::new(p, d, cfg)?))
}

/// Errors while computing answer sets fold into `Unknown`.
pub fn check_loop_admissible(p: &Program, d: &Diminution, cfg: &CheckConfig) -> LoopVerdict {
    loop_checked(p, d, cfg, false)
}

pub fn check_elementary_loop_admissible(
    p: &Program,
    d: &Diminution,
    cfg: &CheckConfig,
) -> LoopVerdict {
    loop_checked(p, d, cfg, true)
}

fn loop_checked(p: &Program, d: &Diminution, cfg: &CheckConfig, elementary: bool) -> LoopVerdict {
    match Analysis::new(p, d, cfg) {
        Ok(a) => loop_admissible_in(&a, elementary, cfg),
        Err(e) => LoopVerdict {
            status: TriState::Unknown,
            evidence: vec![e.to_string()],
            witness: None,
        },
    }
}

#[derive(Clone, Debug)]
pub struct DiminutionReport {
    pub admissible: Verdict,
    pub safe: Verdict,
    pub preserved_admissible: Option<Verdict>,
    pub preserved_safe: Option<Verdict>,
    pub splitting_safe: SplittingVerdict,
    pub loop_admissible: LoopVerdict,
    pub elementary_loop_admissible: LoopVerdict,
    pub reduced_answer_sets: usize,
    pub full_answer_sets: usize,
    /// Implications between the properties that fail on this instance.
    pub lattice_violations: Vec<String>,
}

impl DiminutionReport {
    /// `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let b = |v: bool| if v { "true" } else { "false" };
        let opt = |v: &Option<Verdict>| v.as_ref().map_or("n/a", |v| b(v.holds));
        let mut lines = vec![
            format!("admissible={}", b(self.admissible.holds)),
            format!("safe={}", b(self.safe.holds)),
            format!("preserved_admissible={}", opt(&self.preserved_admissible)),
            format!("preserved_safe={}", opt(&self.preserved_safe)),
            format!("splitting_safe={}", self.splitting_safe.as_str()),
            format!("loop_admissible={}", self.loop_admissible.status),
            format!(
                "elementary_loop_admissible={}",
                self.elementary_loop_admissible.status
            ),
            format!("answer_sets_reduced={}", self.reduced_answer_sets),
            format!("answer_sets_full={}", self.full_answer_sets),
        ];
        if let Some(w) = self.first_witness() {
            lines.push(format!("witness={}", format_interpretation(&w)));
        }
        for v in &self.lattice_violations {
            lines.push(format!("lattice_violation={v}"));
        }
        lines.join("\n") + "\n"
    }

    pub fn first_witness(&self) -> Option<Interpretation> {
        [&self.admissible, &self.safe]
            .into_iter()
            .chain(self.preserved_admissible.iter())
            .chain(self.preserved_safe.iter())
            .find_map(|v| v.witness.clone())
    }
}

/// Runs every checker on one `(P, D)` pair.
pub fn classify(p: &Program, d: &Diminution, cfg: &CheckConfig) -> Result<DiminutionReport> {
    let a = Analysis::new(p, d, cfg)?;
    Ok(classify_in(&a, d, cfg))
}

pub fn classify_in(a: &Analysis, d: &Diminution, cfg: &CheckConfig) -> DiminutionReport {
    let preserved = |mode| (!d.preserved.is_empty()).then(|| preserved_in(a, &d.preserved, mode));
    let mut report = DiminutionReport {
        admissible: admissible_in(a),
        safe: safe_in(a),
        preserved_admissible: preserved(PreservedMode::Admissible),
        preserved_safe: preserved(PreservedMode::Safe),
        splitting_safe: splitting_in(a),
        loop_admissible: loop_admissible_in(a, false, cfg),
        elementary_loop_admissible: loop_admissible_in(a, true, cfg),
        reduced_answer_sets: a.reduced_sets.len(),
        full_answer_sets: a.full_sets.len(),
        lattice_violations: Vec::new(),
    };
    report.lattice_violations = lattice_violations(&report);
    report
}

pub fn lattice_violations(r: &DiminutionReport) -> Vec<String> {
    let mut out = Vec::new();
    let adm = r.admissible.holds;
    if r.splitting_safe.holds() == Some(true) && !r.safe.holds {
        out.push("splitting_safe=>safe".to_string());
    }
    if r.safe.holds && !adm {
        out.push("safe=>admissible".to_string());
    }
    if r.loop_admissible.status == TriState::True && !adm {
        out.push("loop_admissible=>admissible".to_string());
    }
    if r.elementary_loop_admissible.status == TriState::True && !adm {
        out.push("elementary_loop_admissible=>admissible".to_string());
    }
    if r.loop_admissible.status == TriState::True
        && r.elementary_loop_admissible.status == TriState::False
    {
        out.push("loop_admissible=>elementary_loop_admissible".to_string());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn cfg() -> CheckConfig {
        CheckConfig::default()
    }

    #[test]
    fn full_universe_is_safe_and_loop_admissible() {
        let p =
            parse_program("a(1). a(2). b(X) :- a(X), not c(X). c(X) :- a(X), not b(X).").unwrap();
        let d = Diminution::new(p.herbrand_universe());
        let r = classify(&p, &d, &cfg()).unwrap();
        assert!(r.safe.holds);
        assert_eq!(r.splitting_safe, SplittingVerdict::Holds);
        assert_eq!(r.loop_admissible.status, TriState::True);
        assert_eq!(r.elementary_loop_admissible.status, TriState::True);
    }

    #[test]
    fn empty_reduced_answer_sets_are_admissible() {
        let p = parse_program("d(a). d(b). :- d(X), not e(X). e(b).").unwrap();
        let r = classify(&p, &Diminution::of(&["a"]), &cfg()).unwrap();
        assert_eq!(r.reduced_answer_sets, 0);
        assert!(r.admissible.holds);
    }

    #[test]
    fn loop_admissible_but_not_admissible() {
        let p = parse_program(
            "r(c1). r(c2). y. a :- not x. a :- b. b :- a, not y. b :- a, r(X), X != c1. x :- r(X), X != c1.",
        )
        .unwrap();
        let r = classify(&p, &Diminution::of(&["c1"]), &cfg()).unwrap();
        assert!(!r.admissible.holds);
        assert_eq!(r.loop_admissible.status, TriState::True);
        assert!(r
            .lattice_violations
            .contains(&"loop_admissible=>admissible".to_string()));
    }

    #[test]
    fn unsafe_when_full_has_unreachable_answer_set() {
        let p =
            parse_program("d(a). d(b). p(X) :- d(X), not q(X). q(X) :- d(X), not p(X).").unwrap();
        let r = classify(&p, &Diminution::of(&["a"]), &cfg()).unwrap();
        assert!(r.admissible.holds);
        assert!(r.safe.holds);
        assert_eq!(r.reduced_answer_sets, 2);
        assert_eq!(r.full_answer_sets, 4);
    }

    #[test]
    fn splitting_precondition_is_distinct() {
        let p = parse_program("a :- not a.").unwrap();
        let v = check_splitting_safe(&p, &Diminution::default(), &cfg()).unwrap();
        assert_eq!(v, SplittingVerdict::NoAnswerSet);
    }

    #[test]
    fn positive_two_loop_violates_condition_two() {
        // In the full program p(b) and q(b) form a loop; p(a) is supported
        // in the reduced program and sits inside the larger loop.
        let p = parse_program("e(a,b). e(b,a). p(a). p(X) :- q(X). q(Y) :- p(X), e(X,Y).").unwrap();
        let v = check_loop_admissible(&p, &Diminution::of(&["a"]), &cfg());
        assert_eq!(v.status, TriState::False);
    }
}
