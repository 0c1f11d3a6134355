//! Backtracking search over ground programs with clause, support and
//! unfounded-set propagation. Leaves are verified exactly.

use std::collections::{BTreeMap, VecDeque};
use std::time::Instant;

use crate::ast::{Atom, Rule};

#[derive(Clone, Debug)]
pub(crate) struct IRule {
    pub head: Vec<u32>,
    pub pos: Vec<u32>,
    pub neg: Vec<u32>,
}

/// A ground program over dense atom indices. Atom order follows the
/// canonical atom order, so results are deterministic.
#[derive(Clone, Debug)]
pub(crate) struct Instance {
    pub atoms: Vec<Atom>,
    pub index: BTreeMap<Atom, u32>,
    pub rules: Vec<IRule>,
    occ: Vec<Vec<u32>>,
    heads_of: Vec<Vec<u32>>,
    pub normal: bool,
    n: usize,
}

impl Instance {
    pub fn new<'a>(
        rules: impl IntoIterator<Item = &'a Rule>,
        extra_atoms: impl IntoIterator<Item = &'a Atom>,
    ) -> Self {
        let rules: Vec<&Rule> = rules.into_iter().collect();
        let mut index: BTreeMap<Atom, u32> = BTreeMap::new();
        for a in rules.iter().flat_map(|r| r.atoms()).chain(extra_atoms) {
            index.entry(a.clone()).or_insert(0);
        }
        let atoms: Vec<Atom> = index.keys().cloned().collect();
        for (i, v) in index.values_mut().enumerate() {
            *v = i as u32;
        }
        let id = |a: &Atom| index[a];
        let irules: Vec<IRule> = rules
            .iter()
            .map(|r| IRule {
                head: r.head.iter().map(id).collect(),
                pos: r.body_pos.iter().map(id).collect(),
                neg: r.body_neg.iter().map(id).collect(),
            })
            .collect();
        let mut occ = vec![Vec::new(); atoms.len()];
        let mut heads_of = vec![Vec::new(); atoms.len()];
        for (ri, r) in irules.iter().enumerate() {
            for &a in r.head.iter().chain(&r.pos).chain(&r.neg) {
                if occ[a as usize].last() != Some(&(ri as u32)) {
                    occ[a as usize].push(ri as u32);
                }
            }
            for &h in &r.head {
                heads_of[h as usize].push(ri as u32);
            }
        }
        let normal = irules.iter().all(|r| r.head.len() <= 1);
        Instance {
            n: atoms.len(),
            atoms,
            index,
            rules: irules,
            occ,
            heads_of,
            normal,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_model(&self, val: &[bool]) -> bool {
        self.rules.iter().all(|r| {
            !(r.pos.iter().all(|&p| val[p as usize]) && r.neg.iter().all(|&n| !val[n as usize]))
                || r.head.iter().any(|&h| val[h as usize])
        })
    }

    /// Least model of the reduct w.r.t. `val` (normal programs only).
    pub fn reduct_least_model(&self, val: &[bool]) -> Vec<bool> {
        let mut lm = vec![false; self.len()];
        let active: Vec<&IRule> = self
            .rules
            .iter()
            .filter(|r| r.head.len() == 1 && r.neg.iter().all(|&n| !val[n as usize]))
            .collect();
        let mut missing: Vec<usize> = active.iter().map(|r| r.pos.len()).collect();
        let mut watch: Vec<Vec<usize>> = vec![Vec::new(); self.len()];
        let mut queue = VecDeque::new();
        for (i, r) in active.iter().enumerate() {
            for &p in &r.pos {
                watch[p as usize].push(i);
            }
            if r.pos.is_empty() {
                queue.push_back(r.head[0]);
            }
        }
        while let Some(a) = queue.pop_front() {
            if lm[a as usize] {
                continue;
            }
            lm[a as usize] = true;
            for &i in &watch[a as usize] {
                missing[i] -= 1;
                if missing[i] == 0 {
                    queue.push_back(active[i].head[0]);
                }
            }
        }
        lm
    }

    /// Whether `val` is a ⊆-minimal model of its own reduct.
    pub fn is_stable(&self, val: &[bool]) -> bool {
        if !self.is_model(val) {
            return false;
        }
        if self.normal {
            return self.reduct_least_model(val) == val;
        }
        // Look for a strictly smaller model of the reduct inside `val`.
        let mut rules: Vec<IRule> = self
            .rules
            .iter()
            .filter(|r| {
                r.neg.iter().all(|&n| !val[n as usize]) && r.pos.iter().all(|&p| val[p as usize])
            })
            .map(|r| IRule {
                head: r
                    .head
                    .iter()
                    .copied()
                    .filter(|&h| val[h as usize])
                    .collect(),
                pos: r.pos.clone(),
                neg: vec![],
            })
            .collect();
        let inside: Vec<u32> = (0..self.len() as u32)
            .filter(|&a| val[a as usize])
            .collect();
        rules.push(IRule {
            head: vec![],
            pos: inside,
            neg: vec![],
        });
        let sub = Instance::from_irules(self.len(), rules);
        let mut search = Search::new(&sub, Mode::Models);
        for (a, _) in val.iter().enumerate().filter(|(_, &v)| !v) {
            search.assume(a as u32, false);
        }
        let mut found = false;
        search.run(&mut |_| {
            found = true;
            false
        });
        !found
    }

    fn from_irules(n: usize, rules: Vec<IRule>) -> Self {
        let mut occ = vec![Vec::new(); n];
        let mut heads_of = vec![Vec::new(); n];
        for (ri, r) in rules.iter().enumerate() {
            for &a in r.head.iter().chain(&r.pos).chain(&r.neg) {
                if occ[a as usize].last() != Some(&(ri as u32)) {
                    occ[a as usize].push(ri as u32);
                }
            }
            for &h in &r.head {
                heads_of[h as usize].push(ri as u32);
            }
        }
        Instance {
            n,
            atoms: Vec::new(),
            index: BTreeMap::new(),
            normal: rules.iter().all(|r| r.head.len() <= 1),
            rules,
            occ,
            heads_of,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Mode {
    /// Answer sets: support and unfounded-set propagation plus a stability
    /// check at every leaf.
    Stable,
    /// Models satisfying every loop formula of loops among non-assumed
    /// atoms: loose support and unfounded-set propagation.
    LoopFormulas,
    /// Models where every non-assumed true atom heads a rule with a true
    /// body that does not use the atom positively.
    Supported,
    /// Classical models only.
    Models,
}

impl Mode {
    fn support(self) -> bool {
        !matches!(self, Mode::Models)
    }

    /// Whether a support must leave the other head atoms false.
    fn strict(self) -> bool {
        self == Mode::Stable
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Exhausted,
    Stopped,
    OutOfBudget,
}

const UNSET: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

pub(crate) struct Search<'a> {
    inst: &'a Instance,
    mode: Mode,
    val: Vec<i8>,
    trail: Vec<u32>,
    queue: VecDeque<u32>,
    /// Atoms exempt from support requirements (assumed true from outside).
    exempt: Vec<bool>,
    pub node_budget: Option<u64>,
    pub deadline: Option<Instant>,
    pub nodes: u64,
    root_conflict: bool,
}

impl<'a> Search<'a> {
    pub fn new(inst: &'a Instance, mode: Mode) -> Self {
        Search {
            inst,
            mode,
            val: vec![UNSET; inst.len()],
            trail: Vec::new(),
            queue: VecDeque::new(),
            exempt: vec![false; inst.len()],
            node_budget: None,
            deadline: None,
            nodes: 0,
            root_conflict: false,
        }
    }

    /// Fixes an atom before the search starts. True assumptions need no
    /// support.
    pub fn assume(&mut self, atom: u32, value: bool) {
        if value {
            self.exempt[atom as usize] = true;
        }
        if !self.assign(atom, value) {
            self.root_conflict = true;
        }
    }

    fn assign(&mut self, atom: u32, value: bool) -> bool {
        let v = if value { TRUE } else { FALSE };
        match self.val[atom as usize] {
            UNSET => {
                self.val[atom as usize] = v;
                self.trail.push(atom);
                self.queue.push_back(atom);
                true
            }
            cur => cur == v,
        }
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let a = self.trail.pop().expect("trail entry");
            self.val[a as usize] = UNSET;
        }
        self.queue.clear();
    }

    /// Clause view of a rule: `¬pos ∨ neg ∨ head`.
    fn check_rule(&mut self, ri: u32) -> bool {
        let r = &self.inst.rules[ri as usize];
        let mut open: Option<(u32, bool)> = None;
        let mut open_count = 0;
        for &p in &r.pos {
            match self.val[p as usize] {
                FALSE => return true,
                UNSET => {
                    open_count += 1;
                    open = Some((p, false));
                }
                _ => {}
            }
        }
        for &n in &r.neg {
            match self.val[n as usize] {
                TRUE => return true,
                UNSET => {
                    open_count += 1;
                    open = Some((n, true));
                }
                _ => {}
            }
        }
        for &h in &r.head {
            match self.val[h as usize] {
                TRUE => return true,
                UNSET => {
                    open_count += 1;
                    open = Some((h, true));
                }
                _ => {}
            }
        }
        match (open_count, open) {
            (0, _) => false,
            (1, Some((a, v))) => self.assign(a, v),
            _ => true,
        }
    }

    fn body_possible(&self, r: &IRule) -> bool {
        r.pos.iter().all(|&p| self.val[p as usize] != FALSE)
            && r.neg.iter().all(|&n| self.val[n as usize] != TRUE)
    }

    fn check_support(&mut self, atom: u32) -> bool {
        let a = atom as usize;
        if self.val[a] == FALSE || self.exempt[a] {
            return true;
        }
        let mut count = 0;
        let mut last = 0u32;
        for &ri in &self.inst.heads_of[a] {
            let r = &self.inst.rules[ri as usize];
            if self.body_possible(r)
                && !r.pos.contains(&atom)
                && (!self.mode.strict()
                    || r.head
                        .iter()
                        .all(|&h| h == atom || self.val[h as usize] != TRUE))
            {
                count += 1;
                last = ri;
                if count > 1 {
                    return true;
                }
            }
        }
        match count {
            0 => self.assign(atom, false),
            _ if self.val[a] == TRUE => {
                let r = &self.inst.rules[last as usize];
                let (pos, neg, head) = (r.pos.clone(), r.neg.clone(), r.head.clone());
                let strict = self.mode.strict();
                pos.iter().all(|&p| self.assign(p, true))
                    && neg.iter().all(|&n| self.assign(n, false))
                    && (!strict || head.iter().all(|&h| h == atom || self.assign(h, false)))
            }
            _ => true,
        }
    }

    /// Sets every atom outside the founded fixpoint to false.
    fn unfounded(&mut self) -> bool {
        let inst = self.inst;
        let n = inst.len();
        let mut founded = vec![false; n];
        let mut missing: Vec<usize> = vec![usize::MAX; inst.rules.len()];
        let mut queue: VecDeque<u32> = VecDeque::new();
        for a in 0..n {
            if self.exempt[a] {
                queue.push_back(a as u32);
            }
        }
        for (ri, r) in inst.rules.iter().enumerate() {
            if !r.head.is_empty() && self.body_possible(r) {
                missing[ri] = r.pos.len();
                if r.pos.is_empty() {
                    queue.extend(r.head.iter().copied());
                }
            }
        }
        while let Some(a) = queue.pop_front() {
            if founded[a as usize] || self.val[a as usize] == FALSE {
                continue;
            }
            founded[a as usize] = true;
            for &ri in &inst.occ[a as usize] {
                let r = &inst.rules[ri as usize];
                if missing[ri as usize] != usize::MAX && r.pos.contains(&a) {
                    missing[ri as usize] -= 1;
                    if missing[ri as usize] == 0 {
                        queue.extend(r.head.iter().copied());
                    }
                }
            }
        }
        (0..n).all(|a| founded[a] || self.val[a] == FALSE || self.assign(a as u32, false))
    }

    fn propagate(&mut self) -> bool {
        loop {
            while let Some(a) = self.queue.pop_front() {
                let inst = self.inst;
                for &ri in &inst.occ[a as usize] {
                    if !self.check_rule(ri) {
                        return false;
                    }
                }
                if self.mode.support() {
                    if !self.check_support(a) {
                        return false;
                    }
                    for &ri in &inst.occ[a as usize] {
                        for &h in &inst.rules[ri as usize].head {
                            if !self.check_support(h) {
                                return false;
                            }
                        }
                    }
                }
            }
            let unfounded = match self.mode {
                Mode::Stable => self.inst.normal,
                Mode::LoopFormulas => true,
                Mode::Supported | Mode::Models => false,
            };
            if unfounded {
                if !self.unfounded() {
                    return false;
                }
                if !self.queue.is_empty() {
                    continue;
                }
            }
            return true;
        }
    }

    fn initial(&mut self) -> bool {
        if self.root_conflict {
            return false;
        }
        for ri in 0..self.inst.rules.len() as u32 {
            if !self.check_rule(ri) {
                return false;
            }
        }
        if self.mode.support() {
            for a in 0..self.inst.len() as u32 {
                if !self.check_support(a) {
                    return false;
                }
            }
        }
        true
    }

    fn out_of_budget(&self) -> bool {
        self.node_budget.is_some_and(|b| self.nodes > b)
            || (self.nodes.is_multiple_of(256)
                && self.deadline.is_some_and(|d| Instant::now() >= d))
    }

    /// Enumerates leaves; `leaf` gets the full assignment and returns
    /// `false` to stop.
    pub fn run(&mut self, leaf: &mut dyn FnMut(&[bool]) -> bool) -> Outcome {
        if !self.initial() {
            return Outcome::Exhausted;
        }
        let mut stack: Vec<(u32, usize, bool)> = Vec::new();
        let mut cursor = 0usize;
        loop {
            self.nodes += 1;
            if self.out_of_budget() {
                return Outcome::OutOfBudget;
            }
            if self.propagate() {
                while cursor < self.val.len() && self.val[cursor] != UNSET {
                    cursor += 1;
                }
                if cursor < self.val.len() {
                    let x = cursor as u32;
                    stack.push((x, self.trail.len(), false));
                    self.assign(x, true);
                    continue;
                }
                let full: Vec<bool> = self.val.iter().map(|&v| v == TRUE).collect();
                let accept = match self.mode {
                    Mode::Stable => self.stable_with_exempt(&full),
                    _ => self.inst.is_model(&full),
                };
                if accept && !leaf(&full) {
                    return Outcome::Stopped;
                }
            }
            loop {
                let Some((x, mark, second)) = stack.pop() else {
                    return Outcome::Exhausted;
                };
                self.undo(mark);
                cursor = cursor.min(x as usize);
                if !second {
                    stack.push((x, mark, true));
                    self.assign(x, false);
                    break;
                }
            }
        }
    }

    fn stable_with_exempt(&self, full: &[bool]) -> bool {
        if !self.exempt.iter().any(|&e| e) {
            return self.inst.is_stable(full);
        }
        // Exempt atoms behave as facts.
        let mut rules = self.inst.rules.clone();
        for (a, &e) in self.exempt.iter().enumerate() {
            if e {
                rules.push(IRule {
                    head: vec![a as u32],
                    pos: vec![],
                    neg: vec![],
                });
            }
        }
        Instance::from_irules(self.inst.len(), rules).is_stable(full)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn count(src: &str, mode: Mode) -> usize {
        let p = parse_program(src).unwrap();
        let inst = Instance::new(&p.rules, []);
        let mut n = 0;
        Search::new(&inst, mode).run(&mut |_| {
            n += 1;
            true
        });
        n
    }

    #[test]
    fn even_loop_has_two_answer_sets() {
        assert_eq!(count("a :- not b. b :- not a.", Mode::Stable), 2);
    }

    #[test]
    fn positive_loop_is_unfounded() {
        assert_eq!(count("p :- q. q :- p.", Mode::Stable), 1);
        assert_eq!(count("p :- q. q :- p.", Mode::Models), 2);
    }

    #[test]
    fn odd_loop_has_none() {
        assert_eq!(count("a :- not a.", Mode::Stable), 0);
    }

    #[test]
    fn disjunction_is_minimal() {
        assert_eq!(count("a | b.", Mode::Stable), 2);
        assert_eq!(count("a | b. a :- b. b :- a.", Mode::Stable), 1);
    }
}
