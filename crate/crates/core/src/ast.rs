//! Syntax tree for function-free disjunctive logic programs.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// An interned-ish name. Cheap to clone, ordered by its text.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// Orders constants the way comparison builtins see them: integers
/// numerically and before every symbolic constant, symbols lexicographically.
pub fn compare_constants(a: &Symbol, b: &Symbol) -> Ordering {
    match (a.as_str().parse::<i64>(), b.as_str().parse::<i64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.as_str().cmp(b.as_str()),
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Const(Symbol),
    Var(Symbol),
}

impl Term {
    pub fn constant(name: &str) -> Self {
        Term::Const(Symbol::new(name))
    }

    pub fn var(name: &str) -> Self {
        Term::Var(Symbol::new(name))
    }

    /// Classifies a source token by its first character.
    pub fn from_token(token: &str) -> Self {
        match token.chars().next() {
            Some(c) if c.is_ascii_uppercase() || c == '_' => Term::var(token),
            _ => Term::constant(token),
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn name(&self) -> &Symbol {
        match self {
            Term::Const(s) | Term::Var(s) => s,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Predicate name plus arity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Signature {
    pub name: Symbol,
    pub arity: usize,
}

impl Signature {
    pub fn new(name: &str, arity: usize) -> Self {
        Signature {
            name: Symbol::new(name),
            arity,
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Atom {
    pub predicate: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        Atom {
            predicate: Symbol::new(predicate),
            args,
        }
    }

    /// Builds a ground atom from constant names.
    pub fn ground(predicate: &str, args: &[&str]) -> Self {
        Atom::new(predicate, args.iter().map(|a| Term::constant(a)).collect())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn signature(&self) -> Signature {
        Signature {
            name: self.predicate.clone(),
            arity: self.args.len(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn vars(&self) -> impl Iterator<Item = &Symbol> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        })
    }

    pub fn consts(&self) -> impl Iterator<Item = &Symbol> {
        self.args.iter().filter_map(|t| match t {
            Term::Const(c) => Some(c),
            Term::Var(_) => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ne => ord != Ordering::Equal,
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Ge => ord != Ordering::Less,
        }
    }
}

/// A comparison builtin. Never an atom: it only filters substitutions.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Comparison {
    pub left: Term,
    pub op: CmpOp,
    pub right: Term,
}

impl Comparison {
    pub fn new(left: Term, op: CmpOp, right: Term) -> Self {
        Comparison { left, op, right }
    }

    /// `None` while either side is still a variable.
    pub fn evaluate(&self) -> Option<bool> {
        match (&self.left, &self.right) {
            (Term::Const(a), Term::Const(b)) => Some(self.op.holds(compare_constants(a, b))),
            _ => None,
        }
    }

    pub fn terms(&self) -> [&Term; 2] {
        [&self.left, &self.right]
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.left, self.op.as_str(), self.right)
    }
}

/// `h1 | ... | hk :- b1, ..., not n1, ..., comparisons.`
///
/// An empty head is a constraint. Atom lists keep first-occurrence order and
/// carry no duplicates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Rule {
    pub head: Vec<Atom>,
    pub body_pos: Vec<Atom>,
    pub body_neg: Vec<Atom>,
    pub comparisons: Vec<Comparison>,
}

fn push_unique<T: PartialEq>(list: &mut Vec<T>, item: T) {
    if !list.contains(&item) {
        list.push(item);
    }
}

impl Rule {
    /// Builds a rule, merging duplicate atoms inside each part.
    pub fn new(
        head: Vec<Atom>,
        body_pos: Vec<Atom>,
        body_neg: Vec<Atom>,
        comparisons: Vec<Comparison>,
    ) -> Self {
        let mut rule = Rule::default();
        for a in head {
            push_unique(&mut rule.head, a);
        }
        for a in body_pos {
            push_unique(&mut rule.body_pos, a);
        }
        for a in body_neg {
            push_unique(&mut rule.body_neg, a);
        }
        for c in comparisons {
            push_unique(&mut rule.comparisons, c);
        }
        rule
    }

    pub fn fact(atom: Atom) -> Self {
        Rule::new(vec![atom], vec![], vec![], vec![])
    }

    pub fn is_fact(&self) -> bool {
        self.head.len() == 1
            && self.body_pos.is_empty()
            && self.body_neg.is_empty()
            && self.comparisons.is_empty()
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_empty()
    }

    pub fn is_normal(&self) -> bool {
        self.head.len() == 1
    }

    pub fn has_body(&self) -> bool {
        !(self.body_pos.is_empty() && self.body_neg.is_empty() && self.comparisons.is_empty())
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.head
            .iter()
            .chain(self.body_pos.iter())
            .chain(self.body_neg.iter())
    }

    pub fn body_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.body_pos.iter().chain(self.body_neg.iter())
    }

    pub fn vars(&self) -> BTreeSet<Symbol> {
        let mut out: BTreeSet<Symbol> = self.atoms().flat_map(|a| a.vars().cloned()).collect();
        for c in &self.comparisons {
            for t in c.terms() {
                if let Term::Var(v) = t {
                    out.insert(v.clone());
                }
            }
        }
        out
    }

    pub fn consts(&self) -> BTreeSet<Symbol> {
        let mut out: BTreeSet<Symbol> = self.atoms().flat_map(|a| a.consts().cloned()).collect();
        for c in &self.comparisons {
            for t in c.terms() {
                if let Term::Const(k) = t {
                    out.insert(k.clone());
                }
            }
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        self.vars().is_empty()
    }

    /// First variable violating `V(head ∪ body⁻ ∪ comparisons) ⊆ V(body⁺)`.
    pub fn unsafe_variable(&self) -> Option<Symbol> {
        let bound: BTreeSet<&Symbol> = self.body_pos.iter().flat_map(|a| a.vars()).collect();
        let mut rest = self
            .head
            .iter()
            .chain(self.body_neg.iter())
            .flat_map(|a| a.vars());
        if let Some(v) = rest.find(|v| !bound.contains(v)) {
            return Some(v.clone());
        }
        self.comparisons
            .iter()
            .flat_map(|c| c.terms())
            .filter_map(|t| match t {
                Term::Var(v) if !bound.contains(v) => Some(v.clone()),
                _ => None,
            })
            .next()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.head.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{a}")?;
        }
        if self.has_body() {
            if self.head.is_empty() {
                f.write_str(":- ")?;
            } else {
                f.write_str(" :- ")?;
            }
            let mut first = true;
            let mut sep = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
                if !first {
                    f.write_str(", ")?;
                }
                first = false;
                Ok(())
            };
            for a in &self.body_pos {
                sep(f)?;
                write!(f, "{a}")?;
            }
            for a in &self.body_neg {
                sep(f)?;
                write!(f, "not {a}")?;
            }
            for c in &self.comparisons {
                sep(f)?;
                write!(f, "{c}")?;
            }
        } else if self.head.is_empty() {
            f.write_str(":-")?;
        }
        f.write_str(".")
    }
}

/// An ordered rule multiset. Duplicate rules are kept.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Program {
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Self {
        Program { rules }
    }

    pub fn signatures(&self) -> BTreeSet<Signature> {
        self.rules
            .iter()
            .flat_map(|r| r.atoms().map(Atom::signature))
            .collect()
    }

    pub fn vars(&self) -> BTreeSet<Symbol> {
        self.rules.iter().flat_map(|r| r.vars()).collect()
    }

    pub fn consts(&self) -> BTreeSet<Symbol> {
        self.rules.iter().flat_map(|r| r.consts()).collect()
    }

    pub fn facts(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(|r| r.is_fact())
    }

    pub fn is_ground(&self) -> bool {
        self.rules.iter().all(Rule::is_ground)
    }

    pub fn is_normal(&self) -> bool {
        self.rules.iter().all(|r| r.head.len() <= 1)
    }

    /// `HU(P)`: the constants of the program, or one fresh constant when
    /// none occur.
    pub fn herbrand_universe(&self) -> BTreeSet<Symbol> {
        let mut hu = self.consts();
        if hu.is_empty() {
            hu.insert(Symbol::new(FRESH_CONSTANT));
        }
        hu
    }

    /// Checks every rule for safety.
    pub fn validate(&self) -> Result<(), crate::Error> {
        for (i, r) in self.rules.iter().enumerate() {
            if let Some(var) = r.unsafe_variable() {
                return Err(crate::Error::Unsafe {
                    location: format!("rule #{i}"),
                    var: var.to_string(),
                });
            }
        }
        let mut arities: std::collections::BTreeMap<&Symbol, usize> = Default::default();
        for a in self.rules.iter().flat_map(|r| r.atoms()) {
            let seen = *arities.entry(&a.predicate).or_insert(a.arity());
            if seen != a.arity() {
                return Err(crate::Error::ArityClash {
                    predicate: a.predicate.to_string(),
                    first: seen,
                    second: a.arity(),
                });
            }
        }
        Ok(())
    }
}

/// Constant used for `HU(P)` of a constant-free program.
pub const FRESH_CONSTANT: &str = "c0";

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Formats a set of atoms as `{a, b, ...}` in the given order.
pub fn format_atom_set<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> String {
    let items: Vec<String> = atoms.into_iter().map(|a| a.to_string()).collect();
    format!("{{{}}}", items.join(", "))
}
