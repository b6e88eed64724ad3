use optics::*;
use proptest::prelude::*;
use quantum_state::{BasisVector, Complex64, JointState, Slot, SlotKind, SystemLayout};

/// Random normalized state over a qubit `q` and three modes `a`, `b`, `c`.
fn arb_state() -> impl Strategy<Value = JointState> {
    (1u32..=3).prop_flat_map(|budget| {
        let slots = vec![
            Slot { name: "q".into(), kind: SlotKind::Qubit },
            Slot { name: "a".into(), kind: SlotKind::Mode },
            Slot { name: "b".into(), kind: SlotKind::Mode },
            Slot { name: "c".into(), kind: SlotKind::Mode },
        ];
        let layout = SystemLayout::new(slots, budget).unwrap();
        let n = layout.enumerate_basis().len();
        (Just(layout), prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, any::<bool>()), n))
            .prop_filter_map("zero vector", |(layout, coords)| {
                let amps: Vec<_> = layout
                    .enumerate_basis()
                    .into_iter()
                    .zip(coords)
                    .filter(|(_, (_, _, on))| *on)
                    .map(|(b, (re, im, _))| (b, Complex64::new(re, im)))
                    .collect();
                let st = JointState::from_parts(layout, amps).ok()?;
                (st.norm_sqr() > 1e-3).then(|| st.normalized())
            })
    })
}

/// Random dual-rail two-qubit state over pairs (c0,c1), (t0,t1).
fn arb_dual_rail() -> impl Strategy<Value = JointState> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4).prop_filter_map("zero", |v| {
        let basis = [[1, 0, 1, 0], [1, 0, 0, 1], [0, 1, 1, 0], [0, 1, 0, 1]];
        let slots = ["c0", "c1", "t0", "t1"].iter().map(|n| (n.to_string(), SlotKind::Mode)).collect();
        let norm: f64 = v.iter().map(|(r, i)| r * r + i * i).sum::<f64>().sqrt();
        if norm < 1e-3 {
            return None;
        }
        JointState::from_amplitudes(
            slots,
            basis.iter().zip(&v).map(|(b, (r, i))| (BasisVector(b.to_vec()), Complex64::new(r / norm, i / norm))),
        )
        .ok()
    })
}

fn photon_distribution(st: &JointState) -> std::collections::BTreeMap<u32, f64> {
    let mut d = std::collections::BTreeMap::new();
    for (b, a) in st.amplitudes() {
        *d.entry(b.photons(st.layout())).or_insert(0.0) += a.norm_sqr();
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn splitter_preserves_norm_and_photon_number(st in arb_state(), eta in 0.0f64..=1.0) {
        let out = beam_splitter(&st, "a", "b", eta).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() <= 1e-12);
        let (d0, d1) = (photon_distribution(&st), photon_distribution(&out));
        for (n, p) in &d0 {
            prop_assert!((p - d1.get(n).copied().unwrap_or(0.0)).abs() <= 1e-9);
        }
    }

    #[test]
    fn splitter_inverse_is_identity(st in arb_state(), eta in 0.0f64..=1.0) {
        let budget = st.layout().photon_budget();
        let u = beam_splitter_matrix(eta, budget).unwrap();
        let back = beam_splitter(&st, "b", "c", eta).unwrap()
            .apply_unitary(&["b", "c"], &u.adjoint()).unwrap();
        prop_assert!(back.max_abs_diff(&st).unwrap() <= 1e-9);
    }

    #[test]
    fn mode_measurement_is_complete_and_idempotent(st in arb_state()) {
        let out = measure_modes(&st, &["a", "b"]).unwrap();
        let total: f64 = out.iter().map(|o| o.weight).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
        for o in &out {
            prop_assert!(o.post_state.is_normalized());
            let again = measure_modes(&o.post_state, &["a", "b"]).unwrap();
            prop_assert_eq!(again.len(), 1);
            prop_assert_eq!(&again[0].values, &o.values);
            prop_assert!((again[0].weight - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn qubit_measurement_is_complete(st in arb_state()) {
        let out = measure_qubits(&st, &["q"]).unwrap();
        let total: f64 = out.iter().map(|o| o.weight).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
        for o in &out {
            let again = measure_qubits(&o.post_state, &["q"]).unwrap();
            prop_assert_eq!(again.len(), 1);
        }
    }

    #[test]
    fn post_selection_is_complete(st in arb_state()) {
        match ps_measure_modes(&st, "a", "b") {
            Ok(out) => {
                let total: f64 = out.iter().map(|o| o.weight).sum();
                prop_assert!((total - 1.0).abs() <= 1e-9);
                for o in &out {
                    let again = ps_measure_modes(&o.post_state, "a", "b").unwrap();
                    prop_assert_eq!(again.len(), 1);
                    prop_assert_eq!(&again[0].values, &o.values);
                }
            }
            Err(OpticsError::PostSelectionEmpty) => {
                prop_assert!(st.amplitudes().keys().all(|b| b.0[1] + b.0[2] != 1));
            }
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }

    #[test]
    fn dual_rail_gates_preserve_norm(st in arb_dual_rail()) {
        let h = dual_rail_hadamard(&st, "t0", "t1").unwrap();
        let z = dual_rail_cz(&h, ("c0", "c1"), ("t0", "t1")).unwrap();
        prop_assert!((z.norm_sqr() - 1.0).abs() <= 1e-12);
        let hh = dual_rail_hadamard(&h, "t0", "t1").unwrap();
        prop_assert!(hh.max_abs_diff(&st).unwrap() <= 1e-9);
    }

    #[test]
    fn biased_coin_preserves_norm(st in arb_state()) {
        let out = biased_coin_unitary(&st, "q").unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn hadamard_cz_hadamard_is_cnot() {
    let enc = |bit: u32| if bit == 0 { [1, 0] } else { [0, 1] };
    for c in 0..2u32 {
        for t in 0..2u32 {
            let b: Vec<u32> = enc(c).into_iter().chain(enc(t)).collect();
            let st = JointState::from_amplitudes(
                ["c0", "c1", "t0", "t1"].iter().map(|n| (n.to_string(), SlotKind::Mode)).collect(),
                [(BasisVector(b), Complex64::new(1.0, 0.0))],
            )
            .unwrap();
            let st = dual_rail_hadamard(&st, "t0", "t1").unwrap();
            let st = dual_rail_cz(&st, ("c0", "c1"), ("t0", "t1")).unwrap();
            let st = dual_rail_hadamard(&st, "t0", "t1").unwrap();
            let want: Vec<u32> = enc(c).into_iter().chain(enc(t ^ c)).collect();
            let a = st.amplitude(&BasisVector(want));
            assert!((a.norm() - 1.0).abs() < 1e-12, "c={c} t={t}");
        }
    }
}

#[test]
fn hong_ou_mandel_has_no_coincidence() {
    let st = JointState::from_amplitudes(
        vec![("a".into(), SlotKind::Mode), ("b".into(), SlotKind::Mode)],
        [(BasisVector(vec![1, 1]), Complex64::new(1.0, 0.0))],
    )
    .unwrap();
    let out = beam_splitter(&st, "a", "b", 0.5).unwrap();
    assert!(out.amplitude(&BasisVector(vec![1, 1])).norm_sqr() < 1e-12);
}
