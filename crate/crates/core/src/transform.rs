//! Program rewritings: DomLift, term-preservation, and D-guarded programs.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{Atom, Comparison, Program, Rule, Signature, Symbol, Term};
use crate::error::{Error, Result};
use crate::grounder::{check_subset, GroundProgram, Node, PredicateRuleGraph};

#[derive(Clone, Debug)]
pub struct LiftResult {
    pub lifted: Program,
    /// Constant → (fresh variable, fresh domain predicate).
    pub introduced: BTreeMap<Symbol, (Symbol, Symbol)>,
}

fn fresh(base: String, taken: &BTreeSet<String>) -> Symbol {
    if !taken.contains(&base) {
        return Symbol::new(&base);
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !taken.contains(n))
        .map(|n| Symbol::new(&n))
        .expect("unbounded suffixes")
}

fn rename_term(t: &Term, map: &BTreeMap<Symbol, (Symbol, Symbol)>) -> Term {
    match t {
        Term::Const(c) => match map.get(c) {
            Some((v, _)) => Term::Var(v.clone()),
            None => t.clone(),
        },
        Term::Var(_) => t.clone(),
    }
}

fn rename_atom(a: &Atom, map: &BTreeMap<Symbol, (Symbol, Symbol)>) -> Atom {
    Atom {
        predicate: a.predicate.clone(),
        args: a.args.iter().map(|t| rename_term(t, map)).collect(),
    }
}

/// Replaces every constant `c` by a fresh variable `v_c` guarded by a fresh
/// unary predicate `p_c(v_c)`, and adds the fact `p_c(c)`.
pub fn dom_lift(program: &Program) -> LiftResult {
    let consts = program.consts();
    if consts.is_empty() {
        return LiftResult {
            lifted: program.clone(),
            introduced: BTreeMap::new(),
        };
    }
    let mut taken: BTreeSet<String> = program
        .signatures()
        .iter()
        .map(|s| s.name.to_string())
        .collect();
    taken.extend(program.vars().iter().map(|v| v.to_string()));
    let mut introduced = BTreeMap::new();
    for c in &consts {
        let var = fresh(format!("V__{c}"), &taken);
        taken.insert(var.to_string());
        let pred = fresh(format!("__dom_{c}"), &taken);
        taken.insert(pred.to_string());
        introduced.insert(c.clone(), (var, pred));
    }
    let mut rules: Vec<Rule> = introduced
        .iter()
        .map(|(c, (_, p))| Rule::fact(Atom::new(p.as_str(), vec![Term::Const(c.clone())])))
        .collect();
    for r in &program.rules {
        let used = r.consts();
        let mut pos: Vec<Atom> = r
            .body_pos
            .iter()
            .map(|a| rename_atom(a, &introduced))
            .collect();
        for c in &used {
            let (v, p) = &introduced[c];
            pos.push(Atom::new(p.as_str(), vec![Term::Var(v.clone())]));
        }
        rules.push(Rule::new(
            r.head.iter().map(|a| rename_atom(a, &introduced)).collect(),
            pos,
            r.body_neg
                .iter()
                .map(|a| rename_atom(a, &introduced))
                .collect(),
            r.comparisons
                .iter()
                .map(|c| {
                    Comparison::new(
                        rename_term(&c.left, &introduced),
                        c.op,
                        rename_term(&c.right, &introduced),
                    )
                })
                .collect(),
        ));
    }
    LiftResult {
        lifted: Program::new(rules),
        introduced,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermPreservation {
    pub per_rule: Vec<bool>,
    pub overall: bool,
}

fn body_terms(r: &Rule) -> (BTreeSet<Symbol>, BTreeSet<Symbol>) {
    let body = Rule::new(
        vec![],
        r.body_pos.clone(),
        r.body_neg.clone(),
        r.comparisons.clone(),
    );
    (body.consts(), body.vars())
}

/// A normal rule is term-preserved iff the constants and variables of its
/// body all occur in its head.
pub fn is_term_preserved(program: &Program) -> Result<TermPreservation> {
    if let Some(r) = program.rules.iter().find(|r| r.head.len() > 1) {
        return Err(Error::NonNormal(r.to_string()));
    }
    let per_rule: Vec<bool> = program
        .rules
        .iter()
        .map(|r| {
            let head = Rule::new(r.head.clone(), vec![], vec![], vec![]);
            let (bc, bv) = body_terms(r);
            bc.is_subset(&head.consts()) && bv.is_subset(&head.vars())
        })
        .collect();
    Ok(TermPreservation {
        overall: per_rule.iter().all(|&b| b),
        per_rule,
    })
}

/// Which variables of which rules receive `dom(X)` guards.
#[derive(Clone, Debug, Default)]
pub enum GuardPlacement {
    /// Every variable of every non-fact rule.
    #[default]
    AllVariables,
    /// Rule index → variables to guard; unlisted rules stay unguarded.
    Custom(BTreeMap<usize, BTreeSet<Symbol>>),
}

#[derive(Clone, Debug)]
pub struct GuardedProgram {
    pub program: Program,
    pub dom_predicate: Symbol,
    pub dom_constants: BTreeSet<Symbol>,
    pub dom_facts: Vec<Rule>,
}

impl GuardedProgram {
    pub fn dom_fact_atoms(&self) -> BTreeSet<Atom> {
        self.dom_facts.iter().map(|r| r.head[0].clone()).collect()
    }
}

/// `dom`, renamed with a numeric suffix if the program already uses it.
pub fn dom_predicate_for(program: &Program) -> Symbol {
    let taken: BTreeSet<String> = program
        .signatures()
        .iter()
        .map(|s| s.name.to_string())
        .collect();
    fresh("dom".to_string(), &taken)
}

/// Builds `P^[D]`: guards per `placement` plus `dom(c).` for every `c ∈ D`.
/// The result is validated; a violated condition is reported as an error.
pub fn guard(
    program: &Program,
    domain: &BTreeSet<Symbol>,
    placement: &GuardPlacement,
) -> Result<GuardedProgram> {
    check_subset(program, domain)?;
    let dom = dom_predicate_for(program);
    let dom_atom = |v: &Symbol| Atom::new(dom.as_str(), vec![Term::Var(v.clone())]);
    let dom_facts: Vec<Rule> = domain
        .iter()
        .map(|c| Rule::fact(Atom::new(dom.as_str(), vec![Term::Const(c.clone())])))
        .collect();
    let mut rules = dom_facts.clone();
    for (i, r) in program.rules.iter().enumerate() {
        let vars: BTreeSet<Symbol> = match placement {
            GuardPlacement::AllVariables if !r.is_fact() => r.vars(),
            GuardPlacement::AllVariables => BTreeSet::new(),
            GuardPlacement::Custom(map) => map.get(&i).cloned().unwrap_or_default(),
        };
        let mut g = r.clone();
        for v in &vars {
            g.body_pos.push(dom_atom(v));
        }
        rules.push(Rule::new(g.head, g.body_pos, g.body_neg, g.comparisons));
    }
    let guarded = GuardedProgram {
        program: Program::new(rules),
        dom_predicate: dom,
        dom_constants: domain.clone(),
        dom_facts,
    };
    if let Some(v) = validate_guarded(&guarded).violations.into_iter().next() {
        return Err(Error::InvalidGuard {
            condition: v.condition,
            detail: v.detail,
        });
    }
    Ok(guarded)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuardViolation {
    pub condition: u8,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GuardReport {
    pub violations: Vec<GuardViolation>,
}

impl GuardReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the three conditions on `D`-guarded programs.
///
/// 1. No component of the predicate-rule graph holds `dom/1` together with
///    another predicate.
/// 2. In every topological order of the components, no non-ground rule with
///    a non-`dom` head precedes `dom/1`: each such rule must be reachable
///    from `dom/1`.
/// 3. Read conservatively: every non-ground rule with a non-`dom` head
///    guards each variable of its other atoms and comparisons with
///    `dom(X)` in its positive body.
pub fn validate_guarded(g: &GuardedProgram) -> GuardReport {
    let dom_sig = Signature::new(g.dom_predicate.as_str(), 1);
    let program = &g.program;
    let graph = PredicateRuleGraph::build(program);
    let mut report = GuardReport::default();
    let comps = graph.scc_topological_order();
    if let Some(c) = comps
        .iter()
        .find(|c| c.contains(&Node::Pred(dom_sig.clone())))
    {
        if let Some(Node::Pred(other)) = c
            .iter()
            .find(|n| matches!(n, Node::Pred(s) if *s != dom_sig))
        {
            report.violations.push(GuardViolation {
                condition: 1,
                detail: format!("{dom_sig} shares a component with {other}"),
            });
        }
    }
    let reachable = reachable_from(&graph, &Node::Pred(dom_sig.clone()));
    for (i, r) in program.rules.iter().enumerate() {
        if r.is_ground() || r.head.iter().any(|a| a.predicate == g.dom_predicate) {
            continue;
        }
        let node = graph.index_of(&Node::Rule(i)).expect("rule node");
        if !reachable.get(node).copied().unwrap_or(false) {
            report.violations.push(GuardViolation {
                condition: 2,
                detail: format!("rule #{i} `{r}` can be ordered before {dom_sig}"),
            });
        }
        let guarded: BTreeSet<&Symbol> = r
            .body_pos
            .iter()
            .filter(|a| a.predicate == g.dom_predicate && a.arity() == 1)
            .filter_map(|a| match &a.args[0] {
                Term::Var(v) => Some(v),
                Term::Const(_) => None,
            })
            .collect();
        if let Some(v) = r.vars().iter().find(|v| !guarded.contains(v)) {
            report.violations.push(GuardViolation {
                condition: 3,
                detail: format!("rule #{i} `{r}` leaves {v} unguarded"),
            });
        }
    }
    report
}

fn reachable_from(graph: &PredicateRuleGraph, start: &Node) -> Vec<bool> {
    let mut seen = vec![false; graph.nodes.len()];
    let Some(s) = graph.index_of(start) else {
        return seen;
    };
    let mut stack = vec![s];
    seen[s] = true;
    while let Some(v) = stack.pop() {
        for &w in &graph.edges[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// Removes `dom` facts and any residual `dom` literals.
pub fn strip_dom(
    g: &GroundProgram,
    dom_facts: &BTreeSet<Atom>,
    dom_predicate: &Symbol,
) -> GroundProgram {
    let rules: Vec<Rule> = g
        .rules
        .iter()
        .filter(|r| !(r.is_fact() && dom_facts.contains(&r.head[0])))
        .filter(|r| !r.body_neg.iter().any(|a| dom_facts.contains(a)))
        .filter(|r| {
            r.body_pos
                .iter()
                .all(|a| a.predicate != *dom_predicate || dom_facts.contains(a))
        })
        .map(|r| {
            let keep = |a: &&Atom| a.predicate != *dom_predicate;
            Rule::new(
                r.head.clone(),
                r.body_pos.iter().filter(keep).cloned().collect(),
                r.body_neg.iter().filter(keep).cloned().collect(),
                r.comparisons.clone(),
            )
        })
        .collect();
    let mut out = GroundProgram::from_rules(rules);
    out.true_atoms = g
        .true_atoms
        .iter()
        .filter(|a| !dom_facts.contains(*a))
        .cloned()
        .collect();
    out.possible_atoms = g
        .possible_atoms
        .iter()
        .filter(|a| !dom_facts.contains(*a))
        .cloned()
        .collect();
    out.complete = g.complete;
    out
}

/// Reads a diminution: one constant per line, `#` starts a comment.
pub fn parse_diminution(text: &str) -> Result<BTreeSet<Symbol>> {
    let mut out = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let token = line.split('#').next().unwrap_or("").trim();
        if token.is_empty() {
            continue;
        }
        if !token.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            || !token.starts_with(|c: char| c.is_ascii_lowercase() || c.is_ascii_digit())
        {
            return Err(Error::Syntax {
                line: i + 1,
                column: 1,
                message: format!("{token:?} is not a constant"),
            });
        }
        out.insert(Symbol::new(token));
    }
    Ok(out)
}
