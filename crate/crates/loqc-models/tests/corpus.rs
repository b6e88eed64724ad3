use cqp_lang::{check_ownership, parse, pretty_print, Expr, Process, Ratio, Unitary};
use loqc_models::{build, mutant, ModelId, Mutant};

fn calls(p: &Process, out: &mut Vec<(String, Vec<Expr>)>) {
    match p {
        Process::Call(n, args) => out.push((n.clone(), args.clone())),
        Process::Nil => {}
        Process::Par(a, b) | Process::Sum(a, b) => {
            calls(a, out);
            calls(b, out);
        }
        Process::Input { cont, .. }
        | Process::Output { cont, .. }
        | Process::Action(_, cont)
        | Process::QbitDecl(_, cont)
        | Process::NsDecl(_, cont)
        | Process::New(_, _, cont) => calls(cont, out),
    }
}

fn ns_decls(p: &Process) -> usize {
    match p {
        Process::NsDecl(_, c) => 1 + ns_decls(c),
        Process::Nil | Process::Call(..) => 0,
        Process::Par(a, b) | Process::Sum(a, b) => ns_decls(a) + ns_decls(b),
        Process::Input { cont, .. }
        | Process::Output { cont, .. }
        | Process::Action(_, cont)
        | Process::QbitDecl(_, cont)
        | Process::New(_, _, cont) => ns_decls(cont),
    }
}

fn var(x: &str) -> Expr {
    Expr::Var(x.into())
}

#[test]
fn builders_match_the_shipped_files() {
    for &m in ModelId::ALL {
        let path = format!("{}/../../models/{}", env!("CARGO_MANIFEST_DIR"), m.file_name());
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(build(m), parse(&text).unwrap(), "{m}");
    }
}

#[test]
fn corpus_is_well_owned_and_round_trips() {
    for &m in ModelId::ALL {
        let p = build(m);
        assert!(check_ownership(&p).is_empty(), "{m}: {:?}", check_ownership(&p));
        assert_eq!(parse(&pretty_print(&p)).unwrap(), p, "{m}");
    }
    for &m in Mutant::ALL {
        assert!(check_ownership(&mutant(m)).is_empty(), "{}", m.name());
    }
}

#[test]
fn model_names_parse() {
    for &m in ModelId::ALL {
        assert_eq!(m.name().parse::<ModelId>(), Ok(m));
    }
    assert_eq!("specification_1".parse::<ModelId>(), Ok(ModelId::Specification1));
    assert!("Model3".parse::<ModelId>().is_err());
}

#[test]
fn cnot_has_five_splitters_with_crossed_inputs() {
    let p = build(ModelId::CNOT);
    let def = p.definition("CNOT").unwrap();
    let mut cs = Vec::new();
    calls(&def.body, &mut cs);
    let bs: Vec<_> = cs.iter().filter(|(n, _)| n == "BS").collect();
    assert_eq!(bs.len(), 5);
    let half = Unitary::Beam(Ratio { num: 1, den: 2 });
    let third = Unitary::Beam(Ratio { num: 1, den: 3 });
    let etas: Vec<_> = bs.iter().map(|(_, a)| a[4].clone()).collect();
    assert_eq!(
        etas,
        [&half, &third, &third, &third, &half].map(|u| Expr::Unitary(*u)).to_vec()
    );
    // BS2 takes the first control rail, BS3 the second, each crossed with the target arm
    assert_eq!(bs[1].1[0], var("c"));
    assert_eq!(bs[2].1[1], var("d"));
    assert_eq!(bs[2].1[0], bs[0].1[2]);
    assert_eq!(ns_decls(&def.body), 2);
}

#[test]
fn model2_replaces_measurement_by_post_selection() {
    let p = build(ModelId::Model2);
    let mut cs = Vec::new();
    calls(&p.definition("Model2").unwrap().body, &mut cs);
    let names: Vec<_> = cs.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["PolSeCT", "CNOT", "PSM"]);
    let mut cs = Vec::new();
    calls(&build(ModelId::Model1).definition("Model1").unwrap().body, &mut cs);
    assert_eq!(cs.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>(), ["PolSeCT", "CNOT", "MMT"]);
}

#[test]
fn mutants_change_exactly_their_target() {
    let base = pretty_print(&build(ModelId::Model1));
    for &m in Mutant::ALL {
        let text = pretty_print(&mutant(m));
        let diff: Vec<_> = base.lines().zip(text.lines()).filter(|(a, b)| a != b).collect();
        assert_eq!(diff.len(), 1, "{}: {diff:?}", m.name());
    }
    assert!(pretty_print(&mutant(Mutant::Bs5SignDropped)).contains("R[1/2]"));
}
