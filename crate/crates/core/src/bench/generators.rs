//! Seeded instance generators. Every generator emits program text first and
//! parses it, so the text is the canonical artifact.

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::Program;
use crate::parser::parse_program;

pub const COLORING_RULES: &str = "\
color(V,C) :- vertex(V), col(C), not othercolor(V,C).
othercolor(V,C) :- vertex(V), col(C), col(C1), C != C1, color(V,C1).
:- arc(V1,V2), col(C), color(V1,C), color(V2,C).
";

pub const COLORS: [&str; 3] = ["r", "b", "g"];

/// Edges of the nine-vertex example graph.
pub const EXAMPLE_GRAPH: [(u32, u32); 12] = [
    (1, 2),
    (1, 3),
    (2, 3),
    (1, 4),
    (1, 5),
    (4, 5),
    (2, 6),
    (2, 7),
    (6, 7),
    (3, 8),
    (3, 9),
    (8, 9),
];

pub fn coloring_text(n: u32, arcs: &[(u32, u32)]) -> String {
    let mut s = String::new();
    for v in 1..=n {
        write!(s, "vertex({v}). ").unwrap();
    }
    s.push('\n');
    for (a, b) in arcs {
        write!(s, "arc({a},{b}). ").unwrap();
    }
    s.push('\n');
    for c in COLORS {
        write!(s, "col({c}). ").unwrap();
    }
    s.push('\n');
    s + COLORING_RULES
}

/// The three-coloring program on the nine-vertex example graph.
pub fn example_coloring() -> Program {
    parse_program(&coloring_text(9, &EXAMPLE_GRAPH)).expect("example program parses")
}

/// Random graph on vertices `1..=n`, planted 3-colorable: a hidden color is
/// drawn per vertex and arcs only join vertices with different hidden colors.
pub fn gen_coloring(n: u32, p: f64, seed: u64) -> Program {
    let (arcs, _) = coloring_graph(n, p, seed);
    parse_program(&coloring_text(n, &arcs)).expect("generated program parses")
}

/// Arcs and the planted coloring (index into [`COLORS`] per vertex `1..=n`).
pub fn coloring_graph(n: u32, p: f64, seed: u64) -> (Vec<(u32, u32)>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
    let mut arcs = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            if hidden[(a - 1) as usize] != hidden[(b - 1) as usize]
                && rng.gen_bool(p.clamp(0.0, 1.0))
            {
                arcs.push((a, b));
            }
        }
    }
    (arcs, hidden)
}

pub const HAMILTONIAN_RULES: &str = "\
cand(X,Y) :- link(X,Y,O).
hc(X,Y) :- cand(X,Y), not nhc(X,Y).
nhc(X,Y) :- cand(X,Y), not hc(X,Y).
:- hc(X,Y), hc(X,Z), Y != Z.
:- hc(X,Y), hc(Z,Y), X != Z.
in(Y) :- hc(X,Y).
:- node(Y), not in(Y).
reach(0).
reach(Y) :- reach(X), hc(X,Y).
:- node(X), not reach(X).
";

/// Chord probability per ordered pair for the generated graphs.
pub const CHORD_DENSITY: f64 = 0.05;

pub fn offset_name(o: u32) -> String {
    format!("d{o}")
}

/// Arcs `(x, y)` on nodes `0..n`: the ring `i -> i+1 mod n` plus seeded chords.
pub fn hamiltonian_graph(n: u32, density: f64, seed: u64) -> Vec<(u32, u32)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            if (x + 1) % n == y || rng.gen_bool(density.clamp(0.0, 1.0)) {
                arcs.push((x, y));
            }
        }
    }
    arcs
}

/// Hamiltonian-cycle instance. Arcs are `link(X,Y,dK)` where `K` is the ring
/// offset `(Y - X) mod n`, so the heuristics can restrict offsets.
pub fn gen_hamiltonian(n: u32, seed: u64) -> Program {
    gen_hamiltonian_with(n, CHORD_DENSITY, seed)
}

pub fn gen_hamiltonian_with(n: u32, density: f64, seed: u64) -> Program {
    parse_program(&hamiltonian_text(n, &hamiltonian_graph(n, density, seed)))
        .expect("generated program parses")
}

pub fn hamiltonian_text(n: u32, arcs: &[(u32, u32)]) -> String {
    let mut s = String::new();
    for v in 0..n {
        write!(s, "node({v}). ").unwrap();
    }
    s.push('\n');
    for (x, y) in arcs {
        writeln!(s, "link({x},{y},{}).", offset_name((y + n - x) % n)).unwrap();
    }
    s + HAMILTONIAN_RULES
}

pub const MARRIAGE_RULES: &str = "\
acc(M,W) :- mpref(M,W,R).
match(M,W) :- acc(M,W), not nomatch(M,W).
nomatch(M,W) :- acc(M,W), not match(M,W).
:- match(M,W1), match(M,W2), W1 != W2.
:- match(M1,W), match(M2,W), M1 != M2.
matched(M) :- match(M,W).
:- man(M), not matched(M).
mbetter(M,W) :- match(M,W1), mpref(M,W,R), mpref(M,W1,R1), R < R1.
wbetter(W,M) :- match(M1,W), wpref(W,M,R), wpref(W,M1,R1), R < R1.
:- acc(M,W), mbetter(M,W), wbetter(W,M).
";

/// Preference lists: `men[m]` lists women best first, `women[w]` lists men.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Preferences {
    pub men: Vec<Vec<usize>>,
    pub women: Vec<Vec<usize>>,
}

impl Preferences {
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let perm = |rng: &mut ChaCha8Rng| {
            let mut v: Vec<usize> = (0..n).collect();
            v.shuffle(rng);
            v
        };
        let men = (0..n).map(|_| perm(&mut rng)).collect();
        let women = (0..n).map(|_| perm(&mut rng)).collect();
        Preferences { men, women }
    }

    pub fn identity(n: usize) -> Self {
        let id: Vec<usize> = (0..n).collect();
        Preferences {
            men: vec![id.clone(); n],
            women: vec![id; n],
        }
    }

    pub fn len(&self) -> usize {
        self.men.len()
    }

    pub fn is_empty(&self) -> bool {
        self.men.is_empty()
    }

    /// Man-optimal stable matching: `result[m]` is the woman matched to `m`.
    pub fn gale_shapley(&self) -> Vec<usize> {
        let n = self.len();
        let mut rank = vec![vec![0; n]; n];
        for (w, list) in self.women.iter().enumerate() {
            for (r, &m) in list.iter().enumerate() {
                rank[w][m] = r;
            }
        }
        let mut next = vec![0; n];
        let mut wife: Vec<Option<usize>> = vec![None; n];
        let mut husband: Vec<Option<usize>> = vec![None; n];
        let mut free: Vec<usize> = (0..n).rev().collect();
        while let Some(m) = free.pop() {
            let w = self.men[m][next[m]];
            next[m] += 1;
            match husband[w] {
                None => {
                    husband[w] = Some(m);
                    wife[m] = Some(w);
                }
                Some(h) if rank[w][m] < rank[w][h] => {
                    husband[w] = Some(m);
                    wife[m] = Some(w);
                    wife[h] = None;
                    free.push(h);
                }
                Some(_) => free.push(m),
            }
        }
        wife.into_iter()
            .map(|w| w.expect("complete lists match everyone"))
            .collect()
    }

    /// Worst rank (1-based) any man receives in the man-optimal matching.
    pub fn man_optimal_depth(&self) -> usize {
        self.gale_shapley()
            .iter()
            .enumerate()
            .map(|(m, &w)| self.men[m].iter().position(|&x| x == w).unwrap() + 1)
            .max()
            .unwrap_or(0)
    }

    /// Whether no man and woman both prefer each other to their partners.
    pub fn is_stable(&self, wife: &[usize]) -> bool {
        let n = self.len();
        let mut husband = vec![0; n];
        for (m, &w) in wife.iter().enumerate() {
            husband[w] = m;
        }
        let pos = |list: &Vec<usize>, x: usize| list.iter().position(|&y| y == x).unwrap();
        (0..n).all(|m| {
            (0..n).all(|w| {
                !(pos(&self.men[m], w) < pos(&self.men[m], wife[m])
                    && pos(&self.women[w], m) < pos(&self.women[w], husband[w]))
            })
        })
    }
}

fn width(n: usize) -> usize {
    n.max(1).to_string().len()
}

pub fn man_name(m: usize, n: usize) -> String {
    format!("m{:0w$}", m + 1, w = width(n))
}

pub fn woman_name(w: usize, n: usize) -> String {
    format!("w{:0w$}", w + 1, w = width(n))
}

/// Rank constants are zero-padded so symbol order is numeric order.
pub fn man_rank(r: usize, n: usize) -> String {
    format!("mr{:0w$}", r + 1, w = width(n))
}

pub fn woman_rank(r: usize, n: usize) -> String {
    format!("wr{:0w$}", r + 1, w = width(n))
}

pub fn marriage_text(prefs: &Preferences) -> String {
    let n = prefs.len();
    let mut s = String::new();
    for m in 0..n {
        write!(s, "man({}). ", man_name(m, n)).unwrap();
    }
    s.push('\n');
    for (m, list) in prefs.men.iter().enumerate() {
        for (r, &w) in list.iter().enumerate() {
            writeln!(
                s,
                "mpref({},{},{}).",
                man_name(m, n),
                woman_name(w, n),
                man_rank(r, n)
            )
            .unwrap();
        }
    }
    for (w, list) in prefs.women.iter().enumerate() {
        for (r, &m) in list.iter().enumerate() {
            writeln!(
                s,
                "wpref({},{},{}).",
                woman_name(w, n),
                man_name(m, n),
                woman_rank(r, n)
            )
            .unwrap();
        }
    }
    s + MARRIAGE_RULES
}

/// Draws preferences until the man-optimal matching gives every man one of
/// his `depth` best choices, trying at most `attempts` seeds derived from
/// `seed`. Falls back to the last draw.
pub fn marriage_preferences(n: usize, depth: usize, seed: u64) -> Preferences {
    const ATTEMPTS: u64 = 10_000;
    let mut prefs = Preferences::random(n, seed);
    for k in 1..ATTEMPTS {
        if prefs.man_optimal_depth() <= depth {
            break;
        }
        prefs = Preferences::random(n, seed.wrapping_add(k.wrapping_mul(0x9e37_79b9_7f4a_7c15)));
    }
    prefs
}

pub fn gen_stable_marriage(n: usize, seed: u64) -> Program {
    parse_program(&marriage_text(&Preferences::random(n, seed))).expect("generated program parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(
            gen_coloring(6, 0.5, 3).to_string(),
            gen_coloring(6, 0.5, 3).to_string()
        );
        assert_eq!(
            gen_hamiltonian(12, 9).to_string(),
            gen_hamiltonian(12, 9).to_string()
        );
        assert_eq!(
            gen_stable_marriage(5, 1).to_string(),
            gen_stable_marriage(5, 1).to_string()
        );
    }

    #[test]
    fn ring_is_always_present() {
        for seed in 0..20 {
            let arcs = hamiltonian_graph(9, 0.2, seed);
            assert!((0..9).all(|i| arcs.contains(&(i, (i + 1) % 9))));
        }
    }

    #[test]
    fn planted_coloring_is_proper() {
        let (arcs, hidden) = coloring_graph(30, 0.4, 5);
        assert!(arcs
            .iter()
            .all(|&(a, b)| hidden[(a - 1) as usize] != hidden[(b - 1) as usize]));
        assert!(coloring_graph(10, 0.0, 1).0.is_empty());
    }

    #[test]
    fn gale_shapley_is_stable() {
        for seed in 0..30 {
            let p = Preferences::random(7, seed);
            assert!(p.is_stable(&p.gale_shapley()));
        }
        let id = Preferences::identity(4);
        assert_eq!(id.gale_shapley(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn depth_certified_preferences() {
        let p = marriage_preferences(20, 6, 11);
        assert!(p.man_optimal_depth() <= 6);
    }

    #[test]
    fn ranks_sort_numerically() {
        assert!(man_rank(1, 60) < man_rank(9, 60));
        assert!(man_rank(8, 60) < man_rank(10, 60));
    }
}
