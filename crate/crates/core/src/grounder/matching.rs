//! Substitutions and good matches of body atoms against ground atom sets.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::ast::{Atom, CmpOp, Comparison, Rule, Signature, Symbol, Term};

/// A total assignment from variables to constants.
pub type Substitution = BTreeMap<Symbol, Symbol>;

pub fn apply_atom(atom: &Atom, sigma: &Substitution) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        args: atom
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => match sigma.get(v) {
                    Some(c) => Term::Const(c.clone()),
                    None => t.clone(),
                },
                Term::Const(_) => t.clone(),
            })
            .collect(),
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Slot {
    Const(Symbol),
    Var(usize),
}

#[derive(Clone, Debug)]
pub(crate) struct Pattern {
    pub sig: Signature,
    pub args: Vec<Slot>,
}

impl Pattern {
    fn instantiate(&self, binding: &[Option<Symbol>]) -> Atom {
        Atom {
            predicate: self.sig.name.clone(),
            args: self
                .args
                .iter()
                .map(|s| match s {
                    Slot::Const(c) => Term::Const(c.clone()),
                    Slot::Var(v) => Term::Const(binding[*v].clone().expect("bound variable")),
                })
                .collect(),
        }
    }
}

/// A rule with variables replaced by dense indices.
#[derive(Clone, Debug)]
pub(crate) struct CompiledRule {
    pub vars: Vec<Symbol>,
    pub head: Vec<Pattern>,
    pub pos: Vec<Pattern>,
    pub neg: Vec<Pattern>,
    pub cmps: Vec<(Slot, CmpOp, Slot)>,
}

impl CompiledRule {
    pub fn compile(rule: &Rule) -> Self {
        let vars: Vec<Symbol> = rule.vars().into_iter().collect();
        let slot = |t: &Term| match t {
            Term::Const(c) => Slot::Const(c.clone()),
            Term::Var(v) => Slot::Var(vars.binary_search(v).expect("collected variable")),
        };
        let pat = |a: &Atom| Pattern {
            sig: a.signature(),
            args: a.args.iter().map(slot).collect(),
        };
        CompiledRule {
            head: rule.head.iter().map(pat).collect(),
            pos: rule.body_pos.iter().map(pat).collect(),
            neg: rule.body_neg.iter().map(pat).collect(),
            cmps: rule
                .comparisons
                .iter()
                .map(|c: &Comparison| (slot(&c.left), c.op, slot(&c.right)))
                .collect(),
            vars,
        }
    }

    /// Ground instance under a complete binding; comparisons are dropped.
    pub fn instantiate(&self, binding: &[Option<Symbol>]) -> Rule {
        Rule::new(
            self.head.iter().map(|p| p.instantiate(binding)).collect(),
            self.pos.iter().map(|p| p.instantiate(binding)).collect(),
            self.neg.iter().map(|p| p.instantiate(binding)).collect(),
            vec![],
        )
    }

    /// False as soon as a comparison with both sides bound fails.
    pub fn comparisons_ok(&self, binding: &[Option<Symbol>]) -> bool {
        let value = |s: &Slot| -> Option<Symbol> {
            match s {
                Slot::Const(c) => Some(c.clone()),
                Slot::Var(v) => binding[*v].clone(),
            }
        };
        self.cmps
            .iter()
            .all(|(l, op, r)| match (value(l), value(r)) {
                (Some(a), Some(b)) => op.holds(crate::ast::compare_constants(&a, &b)),
                _ => true,
            })
    }
}

#[derive(Default, Debug, Clone)]
struct PredStore {
    atoms: Vec<Atom>,
    set: HashSet<Atom>,
    index: HashMap<(usize, Symbol), Vec<usize>>,
}

/// Ground atoms grouped by predicate with per-argument indices.
#[derive(Default, Debug, Clone)]
pub(crate) struct AtomStore {
    preds: HashMap<Signature, PredStore>,
}

impl AtomStore {
    pub fn insert(&mut self, atom: Atom) -> bool {
        let store = self.preds.entry(atom.signature()).or_default();
        if store.set.contains(&atom) {
            return false;
        }
        let id = store.atoms.len();
        for (i, t) in atom.args.iter().enumerate() {
            store
                .index
                .entry((i, t.name().clone()))
                .or_default()
                .push(id);
        }
        store.set.insert(atom.clone());
        store.atoms.push(atom);
        true
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.preds
            .get(&atom.signature())
            .is_some_and(|s| s.set.contains(atom))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.preds.values().flat_map(|s| s.atoms.iter())
    }

    /// Candidate atom ids for a pattern under a partial binding, using the
    /// most selective bound argument.
    fn candidates(
        &self,
        pat: &Pattern,
        binding: &[Option<Symbol>],
    ) -> Option<(&PredStore, Option<&[usize]>)> {
        let store = self.preds.get(&pat.sig)?;
        let mut best: Option<&[usize]> = None;
        for (i, s) in pat.args.iter().enumerate() {
            let key = match s {
                Slot::Const(c) => c.clone(),
                Slot::Var(v) => match &binding[*v] {
                    Some(c) => c.clone(),
                    None => continue,
                },
            };
            let list: &[usize] = store.index.get(&(i, key)).map_or(&[], |v| v.as_slice());
            if best.is_none_or(|b| list.len() < b.len()) {
                best = Some(list);
            }
        }
        Some((store, best))
    }

    fn estimate(&self, pat: &Pattern, binding: &[Option<Symbol>]) -> usize {
        match self.candidates(pat, binding) {
            None => 0,
            Some((store, None)) => store.atoms.len(),
            Some((_, Some(list))) => list.len(),
        }
    }
}

/// Optional restriction of variable values to a constant set.
pub(crate) type Domain<'a> = Option<&'a HashSet<Symbol>>;

/// Enumerates every binding of the positive body against `store`, pruning
/// by comparisons and the optional domain. `f` returns `false` to stop.
pub(crate) fn for_each_match(
    rule: &CompiledRule,
    store: &AtomStore,
    domain: Domain<'_>,
    f: &mut dyn FnMut(&[Option<Symbol>]) -> bool,
) {
    let mut binding = vec![None; rule.vars.len()];
    let mut used = vec![false; rule.pos.len()];
    if !rule.comparisons_ok(&binding) {
        return;
    }
    search(
        rule,
        store,
        domain,
        &mut binding,
        &mut used,
        rule.pos.len(),
        f,
    );
}

fn search(
    rule: &CompiledRule,
    store: &AtomStore,
    domain: Domain<'_>,
    binding: &mut Vec<Option<Symbol>>,
    used: &mut Vec<bool>,
    remaining: usize,
    f: &mut dyn FnMut(&[Option<Symbol>]) -> bool,
) -> bool {
    if remaining == 0 {
        return f(binding);
    }
    let next = (0..rule.pos.len())
        .filter(|&i| !used[i])
        .min_by_key(|&i| store.estimate(&rule.pos[i], binding))
        .expect("remaining pattern");
    let pat = &rule.pos[next];
    let Some((pstore, list)) = store.candidates(pat, binding) else {
        return true;
    };
    used[next] = true;
    let ids: Box<dyn Iterator<Item = usize>> = match list {
        Some(l) => Box::new(l.iter().copied()),
        None => Box::new(0..pstore.atoms.len()),
    };
    let mut newly: Vec<usize> = Vec::with_capacity(pat.args.len());
    for id in ids {
        let atom = &pstore.atoms[id];
        newly.clear();
        let mut ok = true;
        for (slot, term) in pat.args.iter().zip(&atom.args) {
            let c = term.name();
            match slot {
                Slot::Const(k) => {
                    if k != c {
                        ok = false;
                        break;
                    }
                }
                Slot::Var(v) => match &binding[*v] {
                    Some(b) => {
                        if b != c {
                            ok = false;
                            break;
                        }
                    }
                    None => {
                        if domain.is_some_and(|d| !d.contains(c)) {
                            ok = false;
                            break;
                        }
                        binding[*v] = Some(c.clone());
                        newly.push(*v);
                    }
                },
            }
        }
        if ok && rule.comparisons_ok(binding) {
            let snapshot = newly.clone();
            let go_on = search(rule, store, domain, binding, used, remaining - 1, f);
            for v in snapshot {
                binding[v] = None;
            }
            if !go_on {
                used[next] = false;
                return false;
            }
        } else {
            for &v in &newly {
                binding[v] = None;
            }
        }
    }
    used[next] = false;
    true
}

/// Θ(B, D): all substitutions over `V(B)` with `Bσ ⊆ D`.
pub fn good_matches(body: &[Atom], atoms: &BTreeSet<Atom>) -> Vec<Substitution> {
    good_matches_within(body, atoms, None)
}

/// Θ(B, D, C): good matches whose values are drawn from `constants`.
pub fn good_matches_within(
    body: &[Atom],
    atoms: &BTreeSet<Atom>,
    constants: Option<&BTreeSet<Symbol>>,
) -> Vec<Substitution> {
    let rule = Rule::new(vec![], body.to_vec(), vec![], vec![]);
    let compiled = CompiledRule::compile(&rule);
    let mut store = AtomStore::default();
    for a in atoms {
        store.insert(a.clone());
    }
    let domain: Option<HashSet<Symbol>> = constants.map(|c| c.iter().cloned().collect());
    let mut out = BTreeSet::new();
    for_each_match(&compiled, &store, domain.as_ref(), &mut |b| {
        let sigma: Substitution = compiled
            .vars
            .iter()
            .cloned()
            .zip(b.iter().map(|c| c.clone().expect("complete binding")))
            .collect();
        out.insert(sigma);
        true
    });
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_atom, parse_program};

    fn atoms(src: &[&str]) -> BTreeSet<Atom> {
        src.iter().map(|s| parse_atom(s).unwrap()).collect()
    }

    fn sub(pairs: &[(&str, &str)]) -> Substitution {
        pairs
            .iter()
            .map(|(v, c)| (Symbol::new(v), Symbol::new(c)))
            .collect()
    }

    #[test]
    fn single_atom_matches() {
        let b = vec![parse_atom("edge(X,Y)").unwrap()];
        let got = good_matches(&b, &atoms(&["edge(a,b)", "edge(b,c)"]));
        assert_eq!(
            got,
            vec![
                sub(&[("X", "a"), ("Y", "b")]),
                sub(&[("X", "b"), ("Y", "c")])
            ]
        );
    }

    #[test]
    fn symmetric_pattern_has_no_match() {
        let b = vec![
            parse_atom("edge(X,Y)").unwrap(),
            parse_atom("edge(Y,X)").unwrap(),
        ];
        assert!(good_matches(&b, &atoms(&["edge(a,b)"])).is_empty());
    }

    #[test]
    fn empty_body_yields_empty_substitution() {
        let got = good_matches(&[], &atoms(&["p(a)"]));
        assert_eq!(got, vec![Substitution::new()]);
    }

    #[test]
    fn triangle_rotations_agree_with_brute_force() {
        let rule = &parse_program("tri(X,Y,Z) :- edge(X,Y), edge(Y,Z), edge(Z,X).")
            .unwrap()
            .rules[0];
        let d = atoms(&["edge(a,b)", "edge(b,c)", "edge(c,a)"]);
        let got = good_matches(&rule.body_pos, &d);
        // Brute force over all 3^3 assignments.
        let consts = ["a", "b", "c"];
        let mut expected = Vec::new();
        for x in consts {
            for y in consts {
                for z in consts {
                    let s = sub(&[("X", x), ("Y", y), ("Z", z)]);
                    if rule.body_pos.iter().all(|a| d.contains(&apply_atom(a, &s))) {
                        expected.push(s);
                    }
                }
            }
        }
        assert_eq!(expected.len(), 3);
        assert_eq!(got, expected);
    }

    #[test]
    fn restricted_matches_respect_domain() {
        let b = vec![parse_atom("edge(X,Y)").unwrap()];
        let dom: BTreeSet<Symbol> = [Symbol::new("a"), Symbol::new("b")].into();
        let got = good_matches_within(&b, &atoms(&["edge(a,b)", "edge(b,c)"]), Some(&dom));
        assert_eq!(got, vec![sub(&[("X", "a"), ("Y", "b")])]);
    }
}
