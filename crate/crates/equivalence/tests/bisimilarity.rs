use std::collections::{BTreeMap, BTreeSet};

use cqp_lang::{parse, Program};
use equivalence::{check_pbb, check_pbb_with_partition, mu, Side};
use loqc_models::{build, environment_for, mutant, InputStateSpec, ModelId, Mutant};
use proptest::prelude::*;
use quantum_state::Complex64;
use semantics::{explore, EnvironmentSchedule, Label, Limits, LtsGraph};

fn lts(p: &Program, env: &EnvironmentSchedule) -> LtsGraph {
    explore(p, env, Limits::default()).unwrap()
}

fn closed() -> EnvironmentSchedule {
    EnvironmentSchedule { reads: ["c", "d"].into_iter().map(String::from).collect(), ..EnvironmentSchedule::closed() }
}

fn small(src: &str) -> LtsGraph {
    lts(&parse(src).unwrap(), &closed())
}

#[test]
fn mu_follows_its_three_cases() {
    let g = small("Main = (qbit x) {x *= H}.c![measure x].0");
    let prob = (0..g.len()).find(|&n| g.is_prob(n)).unwrap();
    let branches: Vec<_> = g.outgoing(prob).collect();
    assert_eq!(branches.len(), 2);
    for e in &branches {
        assert!((mu(&g, prob, e.dst) - 0.5).abs() < 1e-12);
    }
    let terminal = branches[0].dst;
    assert!(g.is_terminal(terminal));
    assert_eq!(mu(&g, terminal, terminal), 1.0);
    assert_eq!(mu(&g, g.initial, terminal), 0.0);
    assert_eq!(mu(&g, terminal, g.initial), 0.0);
}

#[test]
fn stuttering_is_invisible_and_values_are_not() {
    let a = small("Main = (new u:^[Int]) (u![1].0 | u?[x:Int].c![x].0)");
    let b = small("Main = c![1].0");
    let c = small("Main = c![2].0");
    assert!(check_pbb(&a, &b, 1e-6).equivalent);
    let v = check_pbb(&a, &c, 1e-6);
    assert!(!v.equivalent);
    let trace = v.counterexample.unwrap();
    assert!(trace.iter().any(|s| s.label.contains("c![{(1)}]")), "{trace:?}");
}

#[test]
fn probabilities_and_branch_structure_matter() {
    let fair = small("Main = (qbit x) {x *= H}.c![measure x].0");
    let fair2 = small("Main = (qbit y) (qbit z) {y *= H}.c![measure y].0");
    let biased = small("Main = (qbit x) {x *= U19}.c![measure x].0");
    assert!(check_pbb(&fair, &fair2, 1e-6).equivalent);
    let v = check_pbb(&fair, &biased, 1e-6);
    assert!(!v.equivalent);
    assert!(v.counterexample.unwrap().last().unwrap().label.contains("cannot match"));
    // an early choice is not the same as a late one
    let early = small("Main = (c![1].d![1].0 + c![1].d![2].0)");
    let late = small("Main = c![1].(d![1].0 + d![2].0)");
    assert!(!check_pbb(&early, &late, 1e-6).equivalent);
}

#[test]
fn transmitted_qubits_are_compared_by_density_matrix() {
    let plus = small("Main = (qbit x) {x *= H}.c![x].0");
    let plus_later = small("Main = (qbit y) {y *= H}.d![1].c![y].0");
    let zero = small("Main = (qbit x) c![x].0");
    let swapped = small("Main = (qbit x) (qbit y) {y *= H}.c![y].0");
    assert!(check_pbb(&plus, &swapped, 1e-6).equivalent);
    assert!(!check_pbb(&plus, &zero, 1e-6).equivalent);
    assert!(!check_pbb(&plus, &plus_later, 1e-6).equivalent);
}

#[test]
fn verdict_json_has_the_documented_fields() {
    let v = check_pbb(&small("Main = c![1].0"), &small("Main = c![2].0"), 1e-6);
    let j = serde_json::to_value(&v).unwrap();
    for k in ["equivalent", "counterexample", "classes", "iterations", "tolerance"] {
        assert!(j.get(k).is_some(), "{k}");
    }
    assert!(j["counterexample"].as_array().unwrap().iter().all(|s| s["side"] == "A" || s["side"] == "B"));
    let same = check_pbb(&small("Main = c![1].0"), &small("Main = c![1].0"), 1e-6);
    assert!(serde_json::to_value(&same).unwrap()["counterexample"].is_null());
}

#[test]
fn corpus_checks_are_reflexive_and_symmetric() {
    let env = environment_for(&InputStateSpec::from_reals([0.6, 0.0, 0.0, 0.8]).unwrap());
    let models = [
        build(ModelId::Model1),
        build(ModelId::Specification1),
        build(ModelId::Model2),
        build(ModelId::Specification2),
        mutant(Mutant::CounterInverted),
    ];
    let graphs: Vec<LtsGraph> = models.iter().map(|m| lts(m, &env)).collect();
    for (i, g) in graphs.iter().enumerate() {
        assert!(check_pbb(g, g, 1e-6).equivalent, "model {i}");
    }
    for (i, j) in [(0, 1), (2, 3), (0, 4), (1, 4), (0, 2)] {
        let (ab, ba) = (check_pbb(&graphs[i], &graphs[j], 1e-6), check_pbb(&graphs[j], &graphs[i], 1e-6));
        assert_eq!(ab.equivalent, ba.equivalent, "{i} {j}");
        assert_eq!(ab.classes, ba.classes);
    }
}

#[test]
fn verdicts_ignore_global_phase() {
    let s = InputStateSpec::random(11);
    let env = environment_for(&s);
    let mut shifted = env.clone();
    shifted.state = env.state.scaled(Complex64::from_polar(1.0, 0.7));
    for (a, b) in [
        (build(ModelId::Model1), build(ModelId::Specification1)),
        (mutant(Mutant::Bs5SignDropped), build(ModelId::Specification1)),
    ] {
        let plain = check_pbb(&lts(&a, &env), &lts(&b, &env), 1e-6);
        let phased = check_pbb(&lts(&a, &shifted), &lts(&b, &env), 1e-6);
        assert_eq!(plain.equivalent, phased.equivalent);
    }
}

/// Multiset of visible channels on the way to each node; unique per node.
fn observed_prefix(g: &LtsGraph) -> Vec<BTreeSet<Vec<String>>> {
    let mut seen: Vec<BTreeSet<Vec<String>>> = vec![BTreeSet::new(); g.len()];
    seen[g.initial].insert(Vec::new());
    // edges only go forward in exploration order except for dedup hits, so iterate to a fixpoint
    loop {
        let mut changed = false;
        for e in &g.edges {
            let add = match &e.label {
                Label::Input { chan, .. } | Label::Output { chan, .. } => Some(chan.clone()),
                Label::Tau | Label::ProbStep { .. } => None,
            };
            for pre in seen[e.src].clone() {
                let mut p = pre.clone();
                if let Some(c) = &add {
                    p.push(c.clone());
                    p.sort();
                }
                changed |= seen[e.dst].insert(p);
            }
        }
        if !changed {
            return seen;
        }
    }
}

#[test]
fn final_classes_respect_observation_stages() {
    for s in [InputStateSpec::basis(2), InputStateSpec::random(3)] {
        let env = environment_for(&s);
        let (a, b) = (lts(&build(ModelId::Model1), &env), lts(&build(ModelId::Specification1), &env));
        let (v, part) = check_pbb_with_partition(&a, &b, 1e-6);
        assert!(v.equivalent);
        let (pa, pb) = (observed_prefix(&a), observed_prefix(&b));
        let mut stage_of_class: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for (side, pre, n) in pa
            .iter()
            .enumerate()
            .map(|(n, p)| (Side::A, p, n))
            .chain(pb.iter().enumerate().map(|(n, p)| (Side::B, p, n)))
        {
            assert_eq!(pre.len(), 1, "{side:?} node {n} reached by several observation sequences");
            let stage = pre.iter().next().unwrap().clone();
            let class = if side == Side::A { part.class_a(n) } else { part.class_b(n) };
            let prev = stage_of_class.entry(class).or_insert_with(|| stage.clone());
            assert_eq!(prev, &stage, "class {class} mixes stages");
        }
        // before inputs, after a or b, after both, then out1, out2 and cnt in turn
        let stages: BTreeSet<_> = stage_of_class.values().map(Vec::len).collect();
        assert_eq!(stages, (0..=5).collect());
    }
}

fn amplitude() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn model2_matches_its_specification_on_random_inputs(a in amplitude(), b in amplitude(), c in amplitude(), d in amplitude()) {
        let n = (a.norm_sqr() + b.norm_sqr() + c.norm_sqr() + d.norm_sqr()).sqrt();
        prop_assume!(n > 1e-3);
        let s = InputStateSpec::new(a / n, b / n, c / n, d / n).unwrap();
        let env = environment_for(&s);
        let (ga, gb) = (lts(&build(ModelId::Model2), &env), lts(&build(ModelId::Specification2), &env));
        let (v, part) = check_pbb_with_partition(&ga, &gb, 1e-6);
        prop_assert!(v.equivalent);
        // classes partition the union
        let covered: usize = part.classes().values().map(Vec::len).sum();
        prop_assert_eq!(covered, ga.len() + gb.len());
        prop_assert_eq!(part.len(), v.classes);
        prop_assert!(v.iterations <= ga.len() + gb.len());
        // branch probabilities out of every probabilistic node sum to one
        for g in [&ga, &gb] {
            for t in (0..g.len()).filter(|&t| g.is_prob(t)) {
                let total: f64 = (0..g.len()).map(|u| mu(g, t, u)).sum();
                prop_assert!((total - 1.0).abs() < 1e-9);
            }
        }
    }
}
