use std::collections::BTreeMap;

use quantum_state::{JointState, SlotKind};

use crate::{OpticsError, Result};

/// One outcome of a projective measurement. `values` are photon counts for
/// mode measurements, bits for qubit measurements, or the single post-selected
/// bit for post-selective measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub values: Vec<u32>,
    pub weight: f64,
    pub post_state: JointState,
}

fn indices(state: &JointState, names: &[&str], kind: SlotKind) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| {
            let i = state.layout().require(n)?;
            if state.layout().slots()[i].kind != kind {
                return Err(match kind {
                    SlotKind::Mode => OpticsError::NotAMode(n.to_string()),
                    SlotKind::Qubit => OpticsError::NotAQubit(n.to_string()),
                });
            }
            Ok(i)
        })
        .collect()
}

/// Projects onto each observed value pattern of the slots at `idx`, sorted by
/// value tuple. Weights are absolute (they sum to the input norm²).
fn split(state: &JointState, idx: &[usize]) -> Vec<MeasurementOutcome> {
    let mut weights: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for (b, a) in state.amplitudes() {
        let key: Vec<u32> = idx.iter().map(|&i| b.0[i]).collect();
        *weights.entry(key).or_default() += a.norm_sqr();
    }
    weights
        .into_iter()
        .filter(|(_, w)| *w > 0.0)
        .map(|(values, weight)| {
            let post = state.filter(|b| idx.iter().zip(&values).all(|(&i, &v)| b.0[i] == v));
            MeasurementOutcome { values, weight, post_state: post.normalized() }
        })
        .collect()
}

/// Photon-number measurement of the given modes. One outcome per occupation
/// tuple in the support.
pub fn measure_modes(state: &JointState, modes: &[&str]) -> Result<Vec<MeasurementOutcome>> {
    let idx = indices(state, modes, SlotKind::Mode)?;
    let total = state.norm_sqr();
    let mut out = split(state, &idx);
    for o in &mut out {
        o.weight /= total;
    }
    Ok(out)
}

/// Computational-basis measurement of qubits; `values` holds one bit per qubit.
pub fn measure_qubits(state: &JointState, qubits: &[&str]) -> Result<Vec<MeasurementOutcome>> {
    let idx = indices(state, qubits, SlotKind::Qubit)?;
    let total = state.norm_sqr();
    let mut out = split(state, &idx);
    for o in &mut out {
        o.weight /= total;
    }
    Ok(out)
}

/// Post-selective outcomes of a mode pair before renormalization: only the
/// occupations `(1,0)` and `(0,1)` are kept, each weighted by its absolute
/// probability. The value reported is the occupation of the second mode.
pub fn ps_measure_unnormalized(
    state: &JointState,
    mode_a: &str,
    mode_b: &str,
) -> Result<Vec<MeasurementOutcome>> {
    let idx = indices(state, &[mode_a, mode_b], SlotKind::Mode)?;
    let total = state.norm_sqr();
    let mut out: Vec<MeasurementOutcome> = split(state, &idx)
        .into_iter()
        .filter(|o| o.values == [1, 0] || o.values == [0, 1])
        .map(|o| MeasurementOutcome { values: vec![o.values[1]], weight: o.weight / total, ..o })
        .collect();
    out.sort_by(|a, b| a.values.cmp(&b.values));
    Ok(out)
}

/// Post-selective measurement with weights renormalized over the retained
/// single-photon subspace.
pub fn ps_measure_modes(state: &JointState, mode_a: &str, mode_b: &str) -> Result<Vec<MeasurementOutcome>> {
    let mut out = ps_measure_unnormalized(state, mode_a, mode_b)?;
    let kept: f64 = out.iter().map(|o| o.weight).sum();
    if kept <= 0.0 {
        return Err(OpticsError::PostSelectionEmpty);
    }
    for o in &mut out {
        o.weight /= kept;
    }
    Ok(out)
}
