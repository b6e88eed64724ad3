use cqp_lang::*;
use proptest::prelude::*;

fn name() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["a", "b", "c", "x", "y", "s0", "s1", "q'", "out_1"]).prop_map(String::from)
}

fn ty() -> impl Strategy<Value = TypeExpr> {
    let leaf = prop_oneof![
        Just(TypeExpr::Int),
        Just(TypeExpr::Qbit),
        Just(TypeExpr::NS),
        Just(TypeExpr::Bit),
        (1usize..4).prop_map(TypeExpr::Op),
    ];
    leaf.prop_recursive(2, 6, 3, |inner| prop::collection::vec(inner, 1..3).prop_map(TypeExpr::Chan))
}

fn chan_ty() -> impl Strategy<Value = TypeExpr> {
    prop::collection::vec(ty(), 1..3).prop_map(TypeExpr::Chan)
}

fn unitary() -> impl Strategy<Value = Unitary> {
    let ratio = (1u32..9).prop_flat_map(|den| (0..=den, Just(den))).prop_map(|(num, den)| Ratio { num, den });
    prop_oneof![
        ratio.clone().prop_map(Unitary::Beam),
        ratio.prop_map(Unitary::Rotation),
        Just(Unitary::H),
        Just(Unitary::CZ),
        Just(Unitary::U19),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        name().prop_map(Expr::Var),
        (0i64..100).prop_map(Expr::Lit),
        any::<bool>().prop_map(Expr::Bool),
        unitary().prop_map(Expr::Unitary),
    ];
    leaf.prop_recursive(4, 24, 3, |e| {
        let bx = |s: BoxedStrategy<Expr>| s.prop_map(Box::new);
        let e = e.boxed();
        prop_oneof![
            prop::collection::vec(e.clone(), 1..3).prop_map(Expr::Measure),
            prop::collection::vec(e.clone(), 1..3).prop_map(Expr::PsMeasure),
            (bx(e.clone()), bx(e.clone())).prop_map(|(a, b)| Expr::Plus(a, b)),
            (bx(e.clone()), bx(e.clone())).prop_map(|(a, b)| Expr::Eq(a, b)),
            (bx(e.clone()), bx(e.clone())).prop_map(|(a, b)| Expr::And(a, b)),
            (bx(e.clone()), bx(e.clone())).prop_map(|(a, b)| Expr::Pair(a, b)),
            (bx(e.clone()), bx(e.clone()), bx(e.clone())).prop_map(|(c, a, b)| Expr::If(c, a, b)),
        ]
    })
}

fn action() -> impl Strategy<Value = Expr> {
    prop_oneof![
        expr(),
        (prop::collection::vec(expr(), 1..3), expr()).prop_map(|(ts, u)| Expr::ApplyUnitary(ts, Box::new(u))),
        (name(), name(), expr()).prop_map(|(x, y, q)| Expr::PsApply { x, y, qubit: Box::new(q) }),
    ]
}

fn process() -> impl Strategy<Value = Process> {
    let leaf = prop_oneof![
        3 => Just(Process::Nil),
        1 => (prop::sample::select(vec!["F", "Gate"]), prop::collection::vec(expr(), 0..3))
            .prop_map(|(n, args)| Process::Call(n.to_string(), args)),
    ];
    leaf.prop_recursive(5, 40, 2, |p| {
        let bp = p.clone().prop_map(Box::new);
        prop_oneof![
            (bp.clone(), bp.clone()).prop_map(|(a, b)| Process::Par(a, b)),
            (bp.clone(), bp.clone()).prop_map(|(a, b)| Process::Sum(a, b)),
            (name(), prop::collection::btree_map(name(), ty(), 0..3), bp.clone()).prop_map(|(c, bs, cont)| {
                Process::Input { chan: Expr::Var(c), binders: bs.into_iter().collect(), cont }
            }),
            (name(), prop::collection::vec(expr(), 0..3), bp.clone())
                .prop_map(|(c, payload, cont)| Process::Output { chan: Expr::Var(c), payload, cont }),
            (action(), bp.clone()).prop_map(|(e, cont)| Process::Action(e, cont)),
            (name(), bp.clone()).prop_map(|(x, cont)| Process::QbitDecl(x, cont)),
            (name(), bp.clone()).prop_map(|(x, cont)| Process::NsDecl(x, cont)),
            (name(), chan_ty(), bp).prop_map(|(x, t, cont)| Process::New(x, t, cont)),
        ]
    })
}

fn program() -> impl Strategy<Value = Program> {
    (
        prop::collection::vec((prop::collection::btree_map(name(), ty(), 0..3), process()), 0..3),
        process(),
    )
        .prop_map(|(defs, entry)| Program {
            definitions: defs
                .into_iter()
                .enumerate()
                .map(|(i, (params, body))| Definition {
                    name: format!("D{i}"),
                    params: params.into_iter().collect(),
                    body,
                })
                .collect(),
            entry,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn parse_inverts_pretty_print(prog in program()) {
        let text = pretty_print(&prog);
        let back = parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, prog);
    }

    #[test]
    fn expressions_round_trip(e in action()) {
        let text = expr_to_string(&e);
        let src = format!("Main = {{{text}}}.0");
        let back = parse(&src).map_err(|err| TestCaseError::fail(format!("{err}\n{src}")))?;
        prop_assert_eq!(back.entry, Process::Action(e, Box::new(Process::Nil)));
    }
}

#[test]
fn errors_carry_locations() {
    let e = parse("Main =\n  (qbit x) {x *= }.0").unwrap_err();
    assert_eq!((e.line, e.col), (2, 18));
    assert!(parse("Main = c![1].0\nMain = 0").is_err());
    assert!(parse("Main = B[3/2]").is_err());
}
