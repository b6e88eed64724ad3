use std::collections::BTreeMap;

use nalgebra::DMatrix;
use quantum_state::{BasisVector, Complex64, JointState, SlotKind};

use crate::{OpticsError, Result};

/// Reflectivity and derived angles of a lossless beam splitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterParams {
    pub eta: f64,
    pub theta: f64,
    pub phi: f64,
}

impl BeamSplitterParams {
    pub fn new(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) || eta.is_nan() {
            return Err(OpticsError::InvalidReflectivity(eta));
        }
        Ok(BeamSplitterParams { eta, theta: eta.sqrt().acos(), phi: 0.0 })
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Two-mode matrix for `a† -> p a† + q b†`, `b† -> r a† + s b†` on the
/// truncated space with per-mode dimension `budget + 1`. Basis states with
/// more than `budget` photons in total are never occupied and map to themselves.
fn two_mode_matrix(budget: u32, p: f64, q: f64, r: f64, s: f64) -> DMatrix<Complex64> {
    let d = budget as usize + 1;
    let mut u = DMatrix::<Complex64>::identity(d * d, d * d);
    for m in 0..=budget {
        for n in 0..=(budget - m) {
            let mut poly: BTreeMap<(u32, u32), f64> = BTreeMap::new();
            poly.insert((0, 0), 1.0);
            let mul = |poly: BTreeMap<(u32, u32), f64>, x: f64, y: f64| {
                let mut out: BTreeMap<(u32, u32), f64> = BTreeMap::new();
                for ((i, j), v) in poly {
                    *out.entry((i + 1, j)).or_default() += v * x;
                    *out.entry((i, j + 1)).or_default() += v * y;
                }
                out
            };
            for _ in 0..m {
                poly = mul(poly, p, q);
            }
            for _ in 0..n {
                poly = mul(poly, r, s);
            }
            let col = m as usize * d + n as usize;
            u[(col, col)] = c(0.0);
            let norm = (factorial(m) * factorial(n)).sqrt();
            for ((i, j), v) in poly {
                let row = i as usize * d + j as usize;
                u[(row, col)] = c(v * (factorial(i) * factorial(j)).sqrt() / norm);
            }
        }
    }
    u
}

/// Beam-splitter unitary on two modes with reflectivity `eta`.
pub fn beam_splitter_matrix(eta: f64, budget: u32) -> Result<DMatrix<Complex64>> {
    let bs = BeamSplitterParams::new(eta)?;
    let (ct, st) = (bs.theta.cos(), bs.theta.sin());
    Ok(two_mode_matrix(budget, ct, st, st, -ct))
}

/// Rotation-convention splitter: `a† -> c a† + s b†`, `b† -> -s a† + c b†`.
/// It has the same splitting ratio as [`beam_splitter_matrix`] but puts the
/// sign on the other port.
pub fn rotation_splitter_matrix(eta: f64, budget: u32) -> Result<DMatrix<Complex64>> {
    let bs = BeamSplitterParams::new(eta)?;
    let (ct, st) = (bs.theta.cos(), bs.theta.sin());
    Ok(two_mode_matrix(budget, ct, st, -st, ct))
}

fn require_mode(state: &JointState, name: &str) -> Result<()> {
    match state.layout().kind_of(name) {
        None => Err(quantum_state::StateError::UnknownName(name.to_string()).into()),
        Some(SlotKind::Mode) => Ok(()),
        Some(SlotKind::Qubit) => Err(OpticsError::NotAMode(name.to_string())),
    }
}

fn require_qubit(state: &JointState, name: &str) -> Result<()> {
    match state.layout().kind_of(name) {
        None => Err(quantum_state::StateError::UnknownName(name.to_string()).into()),
        Some(SlotKind::Qubit) => Ok(()),
        Some(SlotKind::Mode) => Err(OpticsError::NotAQubit(name.to_string())),
    }
}

pub fn beam_splitter(state: &JointState, mode_a: &str, mode_b: &str, eta: f64) -> Result<JointState> {
    require_mode(state, mode_a)?;
    require_mode(state, mode_b)?;
    let u = beam_splitter_matrix(eta, state.layout().photon_budget())?;
    Ok(state.apply_unitary(&[mode_a, mode_b], &u)?)
}

pub fn rotation_splitter(state: &JointState, mode_a: &str, mode_b: &str, eta: f64) -> Result<JointState> {
    require_mode(state, mode_a)?;
    require_mode(state, mode_b)?;
    let u = rotation_splitter_matrix(eta, state.layout().photon_budget())?;
    Ok(state.apply_unitary(&[mode_a, mode_b], &u)?)
}

/// Replaces a polarisation qubit by a dual-rail pair: `|0> -> |10>`, `|1> -> |01>`.
/// The new modes are appended; the photon budget grows by one.
pub fn ps_convert(state: &JointState, qubit: &str, mode_a: &str, mode_b: &str) -> Result<JointState> {
    require_qubit(state, qubit)?;
    let qi = state.layout().require(qubit)?;
    let mut slots: Vec<(String, SlotKind)> = state
        .layout()
        .slots()
        .iter()
        .filter(|s| s.name != qubit)
        .map(|s| (s.name.clone(), s.kind))
        .collect();
    for m in [mode_a, mode_b] {
        if slots.iter().any(|(n, _)| n == m) {
            return Err(quantum_state::StateError::DuplicateName(m.to_string()).into());
        }
        slots.push((m.to_string(), SlotKind::Mode));
    }
    let layout = quantum_state::SystemLayout::new(
        slots
            .into_iter()
            .map(|(name, kind)| quantum_state::Slot { name, kind })
            .collect(),
        state.layout().photon_budget() + 1,
    )?;
    Ok(state.relabel(layout, |b| {
        let mut v = b.0.clone();
        let bit = v.remove(qi);
        v.push(1 - bit);
        v.push(bit);
        BasisVector(v)
    })?)
}

fn pair_occupation(state: &JointState, a: usize, b: usize) -> impl Iterator<Item = u32> + '_ {
    state.amplitudes().keys().map(move |v| v.0[a] + v.0[b])
}

fn require_single_photon(state: &JointState, mode_a: &str, mode_b: &str) -> Result<(usize, usize)> {
    require_mode(state, mode_a)?;
    require_mode(state, mode_b)?;
    let a = state.layout().require(mode_a)?;
    let b = state.layout().require(mode_b)?;
    if pair_occupation(state, a, b).any(|n| n != 1) {
        return Err(OpticsError::DomainError(mode_a.to_string(), mode_b.to_string()));
    }
    Ok((a, b))
}

/// Hadamard on a dual-rail pair, realized as the balanced beam splitter on the
/// single-photon subspace.
pub fn dual_rail_hadamard(state: &JointState, mode_a: &str, mode_b: &str) -> Result<JointState> {
    require_single_photon(state, mode_a, mode_b)?;
    beam_splitter(state, mode_a, mode_b, 0.5)
}

/// Controlled-Z on two dual-rail pairs: negates amplitudes where both pairs are `|01>`.
pub fn dual_rail_cz(
    state: &JointState,
    control: (&str, &str),
    target: (&str, &str),
) -> Result<JointState> {
    let (_, c1) = require_single_photon(state, control.0, control.1)?;
    let (_, t1) = require_single_photon(state, target.0, target.1)?;
    Ok(state.map_phases(|b| if b.0[c1] == 1 && b.0[t1] == 1 { c(-1.0) } else { c(1.0) }))
}

/// Real rotation with `|<1|U|0>|² = 1/9`.
pub fn biased_coin_matrix() -> DMatrix<Complex64> {
    let (a, b) = ((8.0f64 / 9.0).sqrt(), (1.0f64 / 9.0).sqrt());
    DMatrix::from_row_slice(2, 2, &[c(a), c(-b), c(b), c(a)])
}

pub fn biased_coin_unitary(state: &JointState, qubit: &str) -> Result<JointState> {
    require_qubit(state, qubit)?;
    Ok(state.apply_unitary(&[qubit], &biased_coin_matrix())?)
}

pub fn qubit_hadamard_matrix() -> DMatrix<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_row_slice(2, 2, &[c(h), c(h), c(h), c(-h)])
}

pub fn qubit_cz_matrix() -> DMatrix<Complex64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(1.0), c(1.0), c(-1.0)]))
}
