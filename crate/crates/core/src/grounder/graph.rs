//! Predicate-rule graph and its strongly connected components in a
//! deterministic topological order.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use crate::ast::{Program, Signature};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Node {
    Pred(Signature),
    Rule(usize),
}

/// Bipartite graph: `p/n -> r` for every body occurrence (positive or
/// negative), `r -> p/n` for every head occurrence. Comparisons add nothing.
#[derive(Clone, Debug)]
pub struct PredicateRuleGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Vec<usize>>,
    index: BTreeMap<Node, usize>,
    fact_rules: Vec<bool>,
}

impl PredicateRuleGraph {
    pub fn build(program: &Program) -> Self {
        let mut g = PredicateRuleGraph {
            nodes: Vec::new(),
            edges: Vec::new(),
            index: BTreeMap::new(),
            fact_rules: program.rules.iter().map(|r| r.is_fact()).collect(),
        };
        for (i, rule) in program.rules.iter().enumerate() {
            let r = g.node(Node::Rule(i));
            for a in rule.body_atoms() {
                let p = g.node(Node::Pred(a.signature()));
                g.add_edge(p, r);
            }
            for a in &rule.head {
                let p = g.node(Node::Pred(a.signature()));
                g.add_edge(r, p);
            }
        }
        g
    }

    fn node(&mut self, n: Node) -> usize {
        if let Some(&i) = self.index.get(&n) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(n.clone());
        self.edges.push(Vec::new());
        self.index.insert(n, i);
        i
    }

    fn add_edge(&mut self, from: usize, to: usize) {
        if !self.edges[from].contains(&to) {
            self.edges[from].push(to);
        }
    }

    pub fn index_of(&self, node: &Node) -> Option<usize> {
        self.index.get(node).copied()
    }

    pub fn has_edge(&self, from: &Node, to: &Node) -> bool {
        match (self.index_of(from), self.index_of(to)) {
            (Some(a), Some(b)) => self.edges[a].contains(&b),
            _ => false,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Components `C1 ≺ ... ≺ Cn`: every edge runs from an earlier or equal
    /// component to a later or equal one. Among unconstrained components,
    /// fact components come first, then ascending smallest rule index;
    /// predicate-only components follow by first appearance.
    pub fn scc_topological_order(&self) -> Vec<Vec<Node>> {
        let comp_of = tarjan(&self.edges);
        let count = comp_of.iter().copied().max().map_or(0, |m| m + 1);
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
        for (v, &c) in comp_of.iter().enumerate() {
            members[c].push(v);
        }
        let mut indegree = vec![0usize; count];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); count];
        for (v, outs) in self.edges.iter().enumerate() {
            for &w in outs {
                let (a, b) = (comp_of[v], comp_of[w]);
                if a != b && !succ[a].contains(&b) {
                    succ[a].push(b);
                    indegree[b] += 1;
                }
            }
        }
        let key = |c: usize| -> (u8, usize, usize) {
            let rules: Vec<usize> = members[c]
                .iter()
                .filter_map(|&v| match self.nodes[v] {
                    Node::Rule(r) => Some(r),
                    Node::Pred(_) => None,
                })
                .collect();
            let first_node = members[c].iter().copied().min().unwrap_or(0);
            match rules.iter().min() {
                Some(&r) if rules.len() == 1 && self.fact_rules[r] && members[c].len() == 1 => {
                    (0, r, first_node)
                }
                Some(&r) => (1, r, first_node),
                None => (2, usize::MAX, first_node),
            }
        };
        type Keyed = Reverse<((u8, usize, usize), usize)>;
        let mut heap: BinaryHeap<Keyed> = (0..count)
            .filter(|&c| indegree[c] == 0)
            .map(|c| Reverse((key(c), c)))
            .collect();
        let mut order = Vec::with_capacity(count);
        while let Some(Reverse((_, c))) = heap.pop() {
            let mut nodes: Vec<Node> = members[c].iter().map(|&v| self.nodes[v].clone()).collect();
            nodes.sort();
            order.push(nodes);
            for &d in &succ[c] {
                indegree[d] -= 1;
                if indegree[d] == 0 {
                    heap.push(Reverse((key(d), d)));
                }
            }
        }
        order
    }
}

/// Iterative Tarjan; returns the component id of every vertex.
pub(crate) fn tarjan(edges: &[Vec<usize>]) -> Vec<usize> {
    let n = edges.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut child)) = call.last_mut() {
            if *child < edges[v].len() {
                let w = edges[v][*child];
                *child += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}
