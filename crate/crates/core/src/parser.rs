//! Parser for the `.lp` dialect: facts, normal and disjunctive rules,
//! constraints, `not`, and comparison builtins.

use std::collections::BTreeMap;

use crate::ast::{Atom, CmpOp, Comparison, Program, Rule, Symbol, Term};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Pipe,
    If,
    Op(CmpOp),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| Error::Syntax {
        line,
        column,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut adv = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '|' => Some(Tok::Pipe),
            ':' if chars.get(i + 1) == Some(&'-') => {
                adv = 2;
                Some(Tok::If)
            }
            '!' if chars.get(i + 1) == Some(&'=') => {
                adv = 2;
                Some(Tok::Op(CmpOp::Ne))
            }
            '<' | '>' => {
                let eq = chars.get(i + 1) == Some(&'=');
                if eq {
                    adv = 2;
                }
                Some(Tok::Op(match (c, eq) {
                    ('<', false) => CmpOp::Lt,
                    ('<', true) => CmpOp::Le,
                    ('>', false) => CmpOp::Gt,
                    _ => CmpOp::Ge,
                }))
            }
            '=' => Some(Tok::Op(CmpOp::Eq)),
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                adv = j - start;
                let word: String = chars[start..j].iter().collect();
                if c.is_ascii_uppercase() || c == '_' {
                    Some(Tok::Var(word))
                } else {
                    Some(Tok::Ident(word))
                }
            }
            other => return Err(err(l0, c0, format!("unexpected character {other:?}"))),
        };
        if let Some(tok) = tok {
            out.push(Spanned {
                tok,
                line: l0,
                column: c0,
            });
        }
        i += adv;
        col += adv;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.column))
            .unwrap_or(self.end)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, column) = self.here();
        Err(Error::Syntax {
            line,
            column,
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn term(&mut self) -> Result<Term> {
        match self.peek().cloned() {
            Some(Tok::Ident(w)) => {
                self.pos += 1;
                Ok(Term::Const(Symbol::new(&w)))
            }
            Some(Tok::Var(w)) => {
                self.pos += 1;
                Ok(Term::Var(Symbol::new(&w)))
            }
            _ => self.fail("expected a term"),
        }
    }

    fn atom(&mut self) -> Result<Atom> {
        let name = match self.peek().cloned() {
            Some(Tok::Ident(w)) if w != "not" && !w.starts_with(|c: char| c.is_ascii_digit()) => w,
            // `__dom_c(...)` style names are only predicates when applied.
            Some(Tok::Var(w)) if w.starts_with('_') && self.peek_at(1) == Some(&Tok::LParen) => w,
            _ => return self.fail("expected an atom"),
        };
        self.pos += 1;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            loop {
                args.push(self.term()?);
                match self.peek() {
                    Some(Tok::Comma) => self.pos += 1,
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        break;
                    }
                    _ => return self.fail("expected ',' or ')'"),
                }
            }
        }
        Ok(Atom::new(&name, args))
    }

    fn is_comparison_start(&self) -> bool {
        match (self.peek(), self.peek_at(1)) {
            (Some(Tok::Var(_)), Some(Tok::LParen)) => false,
            (Some(Tok::Var(_)), _) => true,
            (Some(Tok::Ident(_)), Some(Tok::Op(_))) => true,
            (Some(Tok::Ident(w)), _) => w.starts_with(|c: char| c.is_ascii_digit()),
            _ => false,
        }
    }

    fn rule(&mut self) -> Result<Rule> {
        let mut head = Vec::new();
        if self.peek() != Some(&Tok::If) {
            head.push(self.atom()?);
            while self.peek() == Some(&Tok::Pipe) {
                self.pos += 1;
                head.push(self.atom()?);
            }
        }
        let (mut pos, mut neg, mut cmps) = (Vec::new(), Vec::new(), Vec::new());
        if self.peek() == Some(&Tok::If) {
            self.pos += 1;
            loop {
                if self.peek() == Some(&Tok::Ident("not".into())) {
                    self.pos += 1;
                    neg.push(self.atom()?);
                } else if self.is_comparison_start() {
                    let left = self.term()?;
                    let op = match self.peek() {
                        Some(Tok::Op(op)) => *op,
                        _ => return self.fail("expected a comparison operator"),
                    };
                    self.pos += 1;
                    let right = self.term()?;
                    cmps.push(Comparison::new(left, op, right));
                } else {
                    pos.push(self.atom()?);
                }
                match self.peek() {
                    Some(Tok::Comma) => self.pos += 1,
                    Some(Tok::Dot) => break,
                    _ => return self.fail("expected ',' or '.'"),
                }
            }
        }
        self.expect(Tok::Dot, "'.'")?;
        Ok(Rule::new(head, pos, neg, cmps))
    }
}

/// Parses program text and checks safety and arity consistency.
pub fn parse_program(text: &str) -> Result<Program> {
    let toks = lex(text)?;
    let end = (text.lines().count().max(1), 1);
    let mut p = Parser { toks, pos: 0, end };
    let mut rules = Vec::new();
    let mut arities: BTreeMap<Symbol, usize> = BTreeMap::new();
    while p.peek().is_some() {
        let (line, _) = p.here();
        let rule = p.rule()?;
        if let Some(var) = rule.unsafe_variable() {
            return Err(Error::Unsafe {
                location: format!("rule at line {line}"),
                var: var.to_string(),
            });
        }
        for a in rule.atoms() {
            let seen = *arities.entry(a.predicate.clone()).or_insert(a.arity());
            if seen != a.arity() {
                return Err(Error::ArityClash {
                    predicate: a.predicate.to_string(),
                    first: seen,
                    second: a.arity(),
                });
            }
        }
        rules.push(rule);
    }
    Ok(Program::new(rules))
}

/// Parses a single atom such as `p(a,X)`.
pub fn parse_atom(text: &str) -> Result<Atom> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: (1, 1),
    };
    let atom = p.atom()?;
    if p.peek().is_some() {
        return p.fail("trailing input after atom");
    }
    Ok(atom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_disjunction_and_constraints() {
        let p = parse_program("a | b.\n:- a, b.\nc :- not a.").unwrap();
        assert_eq!(p.rules.len(), 3);
        assert_eq!(p.rules[0].head.len(), 2);
        assert!(p.rules[1].is_constraint());
        assert_eq!(p.rules[2].body_neg.len(), 1);
    }

    #[test]
    fn comparison_is_accepted_when_bound() {
        let p = parse_program("p(X) :- q(X,Y), Y != X.").unwrap();
        assert_eq!(p.rules[0].comparisons.len(), 1);
        assert_eq!(p.rules[0].comparisons[0].op, CmpOp::Ne);
    }

    #[test]
    fn negated_variable_is_unsafe() {
        match parse_program("p(X) :- not q(X).") {
            Err(Error::Unsafe { var, .. }) => assert_eq!(var, "X"),
            other => panic!("expected safety error, got {other:?}"),
        }
    }

    #[test]
    fn comparison_variable_must_be_bound() {
        assert!(matches!(
            parse_program("p(X) :- q(X), X < Y."),
            Err(Error::Unsafe { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_program("p(a).\nq(b :- p(a).") {
            Err(Error::Syntax { line, column, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(column, 5);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn arity_clash_names_predicate() {
        match parse_program("p(a). p(a,b).") {
            Err(Error::ArityClash { predicate, .. }) => assert_eq!(predicate, "p"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_and_integer_comparisons() {
        let p = parse_program("% header\nn(1). n(2). % trailing\nlt(X,Y) :- n(X), n(Y), X < Y.")
            .unwrap();
        assert_eq!(p.rules.len(), 3);
    }

    #[test]
    fn underscore_predicates_need_arguments() {
        let p = parse_program("__dom_a(a). e(V__a) :- __dom_a(V__a).").unwrap();
        assert_eq!(p.rules[1].body_pos[0].predicate.as_str(), "__dom_a");
    }

    #[test]
    fn duplicate_atoms_merge_but_rules_stay() {
        let p = parse_program("a :- b, b. a :- b.").unwrap();
        assert_eq!(p.rules[0].body_pos.len(), 1);
        assert_eq!(p.rules.len(), 2);
    }
}
