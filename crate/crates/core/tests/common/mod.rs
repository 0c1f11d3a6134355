#![allow(dead_code)]

//! Seeded random programs and brute-force oracles shared by the property
//! and acceptance suites. Nothing here calls into the semantics module.

use std::collections::BTreeSet;

use aspdim::grounder::GroundProgram;
use aspdim::{parse_program, Atom, Program, Rule, Symbol};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub rules: usize,
    pub facts: usize,
    pub negation: bool,
    pub disjunction: bool,
    pub constraints: bool,
    pub comparisons: bool,
    /// Body terms must occur in the head.
    pub term_preserved: bool,
}

impl Shape {
    pub fn general() -> Self {
        Shape {
            rules: 4,
            facts: 4,
            negation: true,
            disjunction: true,
            constraints: true,
            comparisons: true,
            term_preserved: false,
        }
    }

    pub fn normal() -> Self {
        Shape {
            disjunction: false,
            ..Self::general()
        }
    }

    pub fn positive() -> Self {
        Shape {
            negation: false,
            disjunction: false,
            constraints: false,
            ..Self::general()
        }
    }

    pub fn term_preserved() -> Self {
        Shape {
            disjunction: false,
            constraints: false,
            comparisons: false,
            term_preserved: true,
            ..Self::general()
        }
    }
}

const PREDS: [(&str, usize); 5] = [("p", 1), ("q", 1), ("r", 2), ("s", 1), ("t", 0)];
const CONSTS: [&str; 3] = ["a", "b", "c"];
const VARS: [&str; 2] = ["X", "Y"];

fn atom_text(pred: &str, args: &[String]) -> String {
    if args.is_empty() {
        pred.to_string()
    } else {
        format!("{pred}({})", args.join(","))
    }
}

fn pick_pred(r: &mut ChaCha8Rng) -> (&'static str, usize) {
    *PREDS.choose(r).unwrap()
}

fn term(r: &mut ChaCha8Rng, vars: &[String], const_bias: f64) -> String {
    if vars.is_empty() || r.gen_bool(const_bias) {
        CONSTS.choose(r).unwrap().to_string()
    } else {
        vars.choose(r).unwrap().clone()
    }
}

fn random_atom(r: &mut ChaCha8Rng, vars: &[String], const_bias: f64) -> String {
    let (p, k) = pick_pred(r);
    let args: Vec<String> = (0..k).map(|_| term(r, vars, const_bias)).collect();
    atom_text(p, &args)
}

fn vars_in(atom: &str) -> Vec<String> {
    VARS.iter()
        .filter(|v| atom.contains(*v))
        .map(|v| v.to_string())
        .collect()
}

/// One safe rule. Positive body atoms introduce the variables; every other
/// position only reuses them.
fn random_rule(r: &mut ChaCha8Rng, shape: &Shape) -> String {
    if shape.term_preserved {
        return term_preserved_rule(r, shape);
    }
    let all: Vec<String> = VARS.iter().map(|v| v.to_string()).collect();
    let npos = r.gen_range(1..=2);
    let pos: Vec<String> = (0..npos).map(|_| random_atom(r, &all, 0.3)).collect();
    let bound: Vec<String> = {
        let s: BTreeSet<String> = pos.iter().flat_map(|a| vars_in(a)).collect();
        s.into_iter().collect()
    };
    let mut body = pos.clone();
    if shape.negation && r.gen_bool(0.5) {
        body.push(format!("not {}", random_atom(r, &bound, 0.3)));
    }
    if shape.comparisons && !bound.is_empty() && r.gen_bool(0.3) {
        let op = ["!=", "=", "<"].choose(r).unwrap();
        body.push(format!(
            "{} {op} {}",
            term(r, &bound, 0.0),
            term(r, &bound, 0.5)
        ));
    }
    let head: Vec<String> = if shape.constraints && r.gen_bool(0.15) {
        vec![]
    } else {
        let k = if shape.disjunction && r.gen_bool(0.25) {
            2
        } else {
            1
        };
        (0..k).map(|_| random_atom(r, &bound, 0.2)).collect()
    };
    format!("{} :- {}.", head.join(" | "), body.join(", "))
}

fn term_preserved_rule(r: &mut ChaCha8Rng, shape: &Shape) -> String {
    let all: Vec<String> = VARS.iter().map(|v| v.to_string()).collect();
    let head = random_atom(r, &all, 0.3);
    let head_terms: Vec<String> = {
        let inner = head
            .split_once('(')
            .map(|(_, rest)| rest.trim_end_matches(')'))
            .unwrap_or("");
        inner
            .split(',')
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()
    };
    let body_atom = |r: &mut ChaCha8Rng| {
        if head_terms.is_empty() {
            return "t".to_string();
        }
        let (p, k) = pick_pred(r);
        let args: Vec<String> = (0..k)
            .map(|_| head_terms.choose(r).unwrap().clone())
            .collect();
        atom_text(p, &args)
    };
    let npos = r.gen_range(1..=2);
    let mut body: Vec<String> = (0..npos).map(|_| body_atom(r)).collect();
    let head_vars = vars_in(&head);
    let pos_vars: BTreeSet<String> = body.iter().flat_map(|a| vars_in(a)).collect();
    // Safety: every head variable has to occur positively.
    for v in head_vars.iter().filter(|v| !pos_vars.contains(*v)) {
        body.push(format!("p({v})"));
    }
    if shape.negation && r.gen_bool(0.5) {
        body.push(format!("not {}", body_atom(r)));
    }
    format!("{head} :- {}.", body.join(", "))
}

fn random_fact(r: &mut ChaCha8Rng) -> String {
    random_atom(r, &[], 1.0) + "."
}

pub fn random_program(seed: u64, shape: &Shape) -> Program {
    let mut r = rng(seed);
    let mut lines: Vec<String> = (0..shape.facts).map(|_| random_fact(&mut r)).collect();
    lines.extend((0..shape.rules).map(|_| random_rule(&mut r, shape)));
    let text = lines.join("\n");
    parse_program(&text).unwrap_or_else(|e| panic!("generated program does not parse: {e}\n{text}"))
}

/// Every subset of `items`, smallest first.
pub fn subsets<T: Clone + Ord>(items: &BTreeSet<T>) -> Vec<BTreeSet<T>> {
    let v: Vec<&T> = items.iter().collect();
    (0..(1u64 << v.len()))
        .map(|m| {
            (0..v.len())
                .filter(|b| m >> b & 1 == 1)
                .map(|b| v[b].clone())
                .collect()
        })
        .collect()
}

pub fn random_subset<T: Clone + Ord>(r: &mut ChaCha8Rng, items: &BTreeSet<T>) -> BTreeSet<T> {
    items.iter().filter(|_| r.gen_bool(0.6)).cloned().collect()
}

pub fn symbols(names: &[&str]) -> BTreeSet<Symbol> {
    names.iter().map(|n| Symbol::new(n)).collect()
}

/// Propositional normal program over atoms `0..n`.
#[derive(Clone, Debug)]
pub struct Prop {
    pub n: usize,
    pub rules: Vec<(Option<usize>, Vec<usize>, Vec<usize>)>,
}

impl Prop {
    pub fn random(seed: u64, n: usize) -> Self {
        let mut r = rng(seed);
        let count = r.gen_range(1..=2 * n);
        let rules = (0..count)
            .map(|_| {
                let head = if r.gen_bool(0.1) {
                    None
                } else {
                    Some(r.gen_range(0..n))
                };
                let mut pos: Vec<usize> =
                    (0..r.gen_range(0..=2)).map(|_| r.gen_range(0..n)).collect();
                let neg: Vec<usize> = (0..r.gen_range(0..=1)).map(|_| r.gen_range(0..n)).collect();
                if head.is_none() && pos.is_empty() && neg.is_empty() {
                    pos.push(r.gen_range(0..n));
                }
                (head, pos, neg)
            })
            .collect();
        Prop { n, rules }
    }

    pub fn text(&self) -> String {
        let name = |i: &usize| format!("x{i}");
        let mut out = String::new();
        for (h, pos, neg) in &self.rules {
            let mut body: Vec<String> = pos.iter().map(name).collect();
            body.extend(neg.iter().map(|a| format!("not {}", name(a))));
            let head = h.as_ref().map(name).unwrap_or_default();
            if body.is_empty() {
                out.push_str(&format!("{head}.\n"));
            } else {
                out.push_str(&format!("{head} :- {}.\n", body.join(", ")));
            }
        }
        out
    }

    fn body_true(&self, i: usize, m: u32) -> bool {
        let (_, pos, neg) = &self.rules[i];
        pos.iter().all(|a| m >> a & 1 == 1) && neg.iter().all(|a| m >> a & 1 == 0)
    }

    pub fn is_model(&self, m: u32) -> bool {
        (0..self.rules.len())
            .all(|i| !self.body_true(i, m) || self.rules[i].0.is_some_and(|h| m >> h & 1 == 1))
    }

    /// Least model of the reduct, straight from the definition.
    pub fn reduct_least_model(&self, s: u32) -> Option<u32> {
        let mut m = 0u32;
        loop {
            let before = m;
            for (h, pos, neg) in &self.rules {
                if neg.iter().any(|a| s >> a & 1 == 1) || !pos.iter().all(|a| m >> a & 1 == 1) {
                    continue;
                }
                m |= 1 << (*h)?;
            }
            if m == before {
                return Some(m);
            }
        }
    }

    pub fn answer_sets(&self) -> Vec<u32> {
        (0..(1u32 << self.n))
            .filter(|&s| self.reduct_least_model(s) == Some(s))
            .collect()
    }

    fn edge(&self, a: usize, b: usize) -> bool {
        self.rules
            .iter()
            .any(|(h, pos, _)| *h == Some(a) && pos.contains(&b))
    }

    /// Nonempty `l` whose induced positive dependency graph is strongly
    /// connected. Singletons always qualify.
    pub fn is_loop(&self, l: u32) -> bool {
        if l == 0 {
            return false;
        }
        let first = l.trailing_zeros() as usize;
        let reach = |forward: bool| {
            let mut seen = 1u32 << first;
            let mut stack = vec![first];
            while let Some(x) = stack.pop() {
                for y in 0..self.n {
                    let inside = l >> y & 1 == 1 && seen >> y & 1 == 0;
                    let e = if forward {
                        self.edge(x, y)
                    } else {
                        self.edge(y, x)
                    };
                    if inside && e {
                        seen |= 1 << y;
                        stack.push(y);
                    }
                }
            }
            seen
        };
        l.count_ones() == 1 || (reach(true) == l && reach(false) == l)
    }

    /// Rules with a head in `l` and no positive body atom in `l`.
    fn external(&self, l: u32) -> impl Iterator<Item = usize> + '_ {
        (0..self.rules.len()).filter(move |&i| {
            let (h, pos, _) = &self.rules[i];
            h.is_some_and(|h| l >> h & 1 == 1) && pos.iter().all(|a| l >> a & 1 == 0)
        })
    }

    /// A loop is elementary when every nonempty proper subset `k` has an
    /// external rule whose positive body meets the loop.
    pub fn is_elementary(&self, l: u32) -> bool {
        let mut k = (l - 1) & l;
        while k != 0 {
            let ok = self
                .external(k)
                .any(|i| self.rules[i].1.iter().any(|a| l >> a & 1 == 1));
            if !ok {
                return false;
            }
            k = (k - 1) & l;
        }
        true
    }

    pub fn loop_formula_holds(&self, l: u32, m: u32) -> bool {
        l & m != l || self.external(l).any(|i| self.body_true(i, m))
    }

    pub fn loops(&self) -> Vec<u32> {
        (1..(1u32 << self.n)).filter(|&l| self.is_loop(l)).collect()
    }

    pub fn decode(&self, m: u32) -> BTreeSet<Atom> {
        (0..self.n)
            .filter(|b| m >> b & 1 == 1)
            .map(|b| Atom::ground(&format!("x{b}"), &[]))
            .collect()
    }
}

/// Answer sets by definition over a ground program: every subset `S` of head
/// atoms with `S` a minimal model of `P^S`. Exponential, test sizes only.
pub fn brute_answer_sets(g: &GroundProgram) -> Vec<BTreeSet<Atom>> {
    let heads: BTreeSet<Atom> = g
        .rules
        .iter()
        .flat_map(|r| r.head.iter().cloned())
        .collect();
    assert!(heads.len() <= 16, "brute force over {} atoms", heads.len());
    let holds = |r: &Rule, i: &BTreeSet<Atom>, s: &BTreeSet<Atom>| {
        let body =
            r.body_pos.iter().all(|a| i.contains(a)) && r.body_neg.iter().all(|a| !s.contains(a));
        !body || r.head.iter().any(|a| i.contains(a))
    };
    let mut out: Vec<BTreeSet<Atom>> = subsets(&heads)
        .into_iter()
        .filter(|s| {
            g.rules.iter().all(|r| holds(r, s, s))
                && subsets(s)
                    .into_iter()
                    .filter(|t| t.len() < s.len())
                    .all(|t| !g.rules.iter().all(|r| holds(r, &t, s)))
        })
        .collect();
    out.sort();
    out
}

pub fn sorted(mut v: Vec<BTreeSet<Atom>>) -> Vec<BTreeSet<Atom>> {
    v.sort();
    v.dedup();
    v
}
