mod common;

use std::collections::BTreeSet;

use aspdim::bench::{
    build_diminution, generators, run_pair, BenchConfig, Family, HeuristicMode, HeuristicSpec,
    Instance, InstanceSpec,
};
use aspdim::diminution::{check_admissible, check_safe, CheckConfig, Diminution};
use aspdim::grounder::{full_instantiation, ground, restrict_ground, GroundProgram};
use aspdim::semantics::{
    answer_sets, answer_sets_by_subsets, gl_reduct, is_model, least_model, minimal_models,
    Interpretation,
};
use aspdim::transform::{dom_lift, guard, is_term_preserved, strip_dom, GuardPlacement};
use aspdim::{parse_program, Error, Program, Rule, Symbol};
use common::*;
use proptest::prelude::*;

fn full(p: &Program) -> GroundProgram {
    full_instantiation(p, &p.herbrand_universe())
}

fn multiset(rules: &[Rule]) -> Vec<String> {
    let mut v: Vec<String> = rules.iter().map(|r| r.to_string()).collect();
    v.sort();
    v
}

fn sub_multiset(small: &[String], big: &[String]) -> bool {
    let mut j = 0;
    for s in small {
        while j < big.len() && big[j] < *s {
            j += 1;
        }
        if j == big.len() || big[j] != *s {
            return false;
        }
        j += 1;
    }
    true
}

fn domain(p: &Program, seed: u64) -> BTreeSet<Symbol> {
    random_subset(&mut rng(seed ^ 0xd1d1), &p.herbrand_universe())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn printing_round_trips(seed in any::<u64>()) {
        let p = random_program(seed, &Shape::general());
        prop_assert_eq!(parse_program(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn universe_is_union_of_rule_constants(seed in any::<u64>()) {
        let p = random_program(seed, &Shape::general());
        let union: BTreeSet<Symbol> = p.rules.iter().flat_map(|r| r.consts()).collect();
        let hu = p.herbrand_universe();
        prop_assert!(p.rules.iter().all(|r| r.consts().is_subset(&hu)));
        if !union.is_empty() {
            prop_assert_eq!(hu, union);
        }
    }

    #[test]
    fn restriction_is_monotone(seed in any::<u64>()) {
        let p = random_program(seed, &Shape::general());
        let big = domain(&p, seed);
        let small = random_subset(&mut rng(seed ^ 7), &big);
        let a = multiset(&full_instantiation(&p, &small).rules);
        let b = multiset(&full_instantiation(&p, &big).rules);
        prop_assert!(sub_multiset(&a, &b));
    }

    #[test]
    fn restricted_grounding_matches_instantiation(seed in any::<u64>()) {
        let p = random_program(seed, &Shape::general());
        let d = domain(&p, seed);
        let fi = full_instantiation(&p, &d);
        let rg = restrict_ground(&p, &d).unwrap();
        prop_assert_eq!(answer_sets(&rg).unwrap(), answer_sets(&fi).unwrap());
    }

    #[test]
    fn grounding_is_no_larger_than_instantiation(seed in any::<u64>()) {
        let p = random_program(seed, &Shape::general());
        prop_assert!(ground(&p).rules.len() <= full(&p).rules.len());
    }

    #[test]
    fn guarded_pipeline_matches_restriction(seed in any::<u64>()) {
        let p = random_program(seed, &Shape::general());
        let d = domain(&p, seed);
        let g = guard(&p, &d, &GuardPlacement::AllVariables).unwrap();
        let grounded = strip_dom(&ground(&g.program), &g.dom_fact_atoms(), &g.dom_predicate);
        prop_assert_eq!(answer_sets(&grounded).unwrap(), answer_sets(&restrict_ground(&p, &d).unwrap()).unwrap());
    }

    #[test]
    fn lifting_keeps_the_universe(seed in any::<u64>()) {
        let p = random_program(seed, &Shape::general());
        prop_assert_eq!(dom_lift(&p).lifted.herbrand_universe(), p.herbrand_universe());
    }

    #[test]
    fn search_agrees_with_definition(seed in any::<u64>()) {
        let p = random_program(seed, &Shape { rules: 3, facts: 2, ..Shape::general() });
        let g = full_instantiation(&p, &domain(&p, seed));
        let heads: BTreeSet<_> = g.rules.iter().flat_map(|r| r.head.iter()).collect();
        prop_assume!(heads.len() <= 12);
        let expected = brute_answer_sets(&g);
        prop_assert_eq!(sorted(answer_sets(&g).unwrap()), expected.clone());
        prop_assert_eq!(sorted(answer_sets_by_subsets(&g, 22).unwrap()), expected);
    }

    #[test]
    fn answer_sets_are_models(seed in any::<u64>()) {
        let p = random_program(seed, &Shape::general());
        let g = full(&p);
        for s in answer_sets(&g).unwrap() {
            prop_assert!(is_model(&g, &s));
        }
    }

    #[test]
    fn positive_minimal_model_is_least(seed in any::<u64>()) {
        let p = random_program(seed, &Shape { rules: 3, facts: 2, ..Shape::positive() });
        let g = full_instantiation(&p, &domain(&p, seed));
        let heads: BTreeSet<_> = g.rules.iter().flat_map(|r| r.head.iter()).collect();
        prop_assume!(heads.len() <= 22);
        prop_assert_eq!(minimal_models(&g, 22).unwrap(), vec![least_model(&g).unwrap()]);
    }

    #[test]
    fn reduct_shrinks_as_the_guess_grows(seed in any::<u64>()) {
        let p = random_program(seed, &Shape::normal());
        let g = full(&p);
        let atoms: Interpretation = g.atom_universe.clone();
        let big = random_subset(&mut rng(seed), &atoms);
        let small = random_subset(&mut rng(seed ^ 3), &big);
        let a = multiset(&gl_reduct(&g, &big).rules);
        let b = multiset(&gl_reduct(&g, &small).rules);
        prop_assert!(sub_multiset(&a, &b));
    }

    #[test]
    fn loop_formulas_characterize_answer_sets(seed in any::<u64>(), n in 1usize..8) {
        let prop = Prop::random(seed, n);
        let loops = prop.loops();
        let lf: Vec<u32> = (0..(1u32 << n))
            .filter(|&m| prop.is_model(m) && loops.iter().all(|&l| prop.loop_formula_holds(l, m)))
            .collect();
        let elf: Vec<u32> = (0..(1u32 << n))
            .filter(|&m| {
                prop.is_model(m)
                    && loops.iter().filter(|&&l| prop.is_elementary(l)).all(|&l| prop.loop_formula_holds(l, m))
            })
            .collect();
        let as_ = prop.answer_sets();
        prop_assert_eq!(&lf, &as_);
        prop_assert_eq!(&elf, &as_);
        let g = GroundProgram::from_rules(parse_program(&prop.text()).unwrap().rules);
        let lib: Vec<Interpretation> = sorted(answer_sets(&g).unwrap());
        prop_assert_eq!(lib, sorted(as_.iter().map(|&m| prop.decode(m)).collect()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn positive_programs_are_always_safe(seed in any::<u64>()) {
        let p = random_program(seed, &Shape { rules: 3, facts: 3, ..Shape::positive() });
        let cfg = CheckConfig::default();
        for d in subsets(&p.herbrand_universe()) {
            prop_assert!(check_safe(&p, &Diminution::new(d), &cfg).unwrap().holds);
        }
    }

    #[test]
    fn term_preserved_programs_are_always_safe(seed in any::<u64>()) {
        let p = random_program(seed, &Shape { rules: 3, facts: 3, ..Shape::term_preserved() });
        prop_assert!(is_term_preserved(&p).unwrap().overall);
        prop_assume!(!answer_sets(&full(&p)).unwrap().is_empty());
        let cfg = CheckConfig::default();
        for d in subsets(&p.herbrand_universe()) {
            let v = check_safe(&p, &Diminution::new(d.clone()), &cfg).unwrap();
            prop_assert!(v.holds, "D = {:?}\n{}", d, p);
        }
    }

    #[test]
    fn unique_answer_set_makes_admissible_safe(seed in any::<u64>()) {
        let p = random_program(seed, &Shape::normal());
        prop_assume!(answer_sets(&full(&p)).unwrap().len() == 1);
        let cfg = CheckConfig::default();
        for d in subsets(&p.herbrand_universe()) {
            let d = Diminution::new(d);
            if check_admissible(&p, &d, &cfg).unwrap().holds {
                prop_assert!(check_safe(&p, &d, &cfg).unwrap().holds);
            }
        }
    }

    #[test]
    fn bench_generation_is_deterministic(seed in any::<u64>(), n in 3usize..12) {
        for (family, mode) in [
            (Family::Hamiltonian, HeuristicMode::F3Neighborhood),
            (Family::StableMarriage, HeuristicMode::F2ValueSubset),
            (Family::Coloring, HeuristicMode::F1Partial),
        ] {
            let h = HeuristicSpec::new(mode, 2.0);
            let a = Instance::generate(InstanceSpec::new(family, n, seed), &h).unwrap();
            let b = Instance::generate(InstanceSpec::new(family, n, seed), &h).unwrap();
            prop_assert_eq!(a.program.to_string(), b.program.to_string());
            let d = build_diminution(&a, &h).unwrap();
            prop_assert_eq!(&d, &build_diminution(&b, &h).unwrap());
            prop_assert!(d.is_subset(&a.program.herbrand_universe()));
        }
    }

    #[test]
    fn diminished_grounding_is_smaller(seed in any::<u64>(), n in 3usize..10, k in 0u32..4) {
        let cfg = BenchConfig { budget: None, solve: false };
        for (family, mode) in [(Family::Hamiltonian, HeuristicMode::F3Neighborhood), (Family::StableMarriage, HeuristicMode::F2ValueSubset)] {
            let rows = run_pair(InstanceSpec::new(family, n, seed), HeuristicSpec::new(mode, k as f64 + 1.0), &cfg).unwrap();
            prop_assert!(rows[0].ground_rules <= rows[1].ground_rules);
        }
    }
}

#[test]
fn subset_enumeration_refuses_large_universes() {
    let text: String = (0..23).map(|i| format!("a{i} | b{i}.\n")).collect();
    let g = full(&parse_program(&text).unwrap());
    assert!(matches!(
        answer_sets_by_subsets(&g, 22),
        Err(Error::SizeGuard {
            size: 46,
            limit: 22,
            ..
        })
    ));
    assert!(matches!(
        minimal_models(&g, 22),
        Err(Error::SizeGuard { .. })
    ));
}

#[test]
fn desk_scale_instances_keep_a_solution() {
    let cfg = BenchConfig::default();
    for n in 3..=10 {
        for seed in 0..3 {
            let rows = run_pair(
                InstanceSpec::new(Family::Hamiltonian, n, seed),
                HeuristicSpec::new(HeuristicMode::F3Neighborhood, 1.0),
                &cfg,
            )
            .unwrap();
            assert_eq!(rows[0].found, Some(true), "hc n={n} seed={seed}");
        }
    }
    for n in 1..=8 {
        let rows = run_pair(
            InstanceSpec::new(Family::StableMarriage, n, 5),
            HeuristicSpec::new(HeuristicMode::F2ValueSubset, 3.0),
            &cfg,
        )
        .unwrap();
        assert_eq!(rows[0].found, Some(true), "sm n={n}");
    }
}

#[test]
fn identity_preferences_match_everyone_to_their_top_choice() {
    let prefs = generators::Preferences::identity(3);
    let g = ground(&parse_program(&generators::marriage_text(&prefs)).unwrap());
    let sets = answer_sets(&g).unwrap();
    assert_eq!(sets.len(), 1);
    let matches: Vec<String> = sets[0]
        .iter()
        .filter(|a| a.predicate.as_str() == "match")
        .map(|a| a.to_string())
        .collect();
    assert_eq!(
        matches,
        vec!["match(m1,w1)", "match(m2,w2)", "match(m3,w3)"]
    );
}
