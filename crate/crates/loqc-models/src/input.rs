use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use quantum_state::{BasisVector, Complex64, JointState, SlotKind};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use semantics::{EnvironmentSchedule, Value};

use crate::ModelError;

/// Amplitudes of the two-qubit input α|00> + β|01> + γ|10> + δ|11>, control
/// qubit first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputStateSpec {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub delta: Complex64,
}

const NORM_TOL: f64 = 1e-9;

impl InputStateSpec {
    pub fn new(alpha: Complex64, beta: Complex64, gamma: Complex64, delta: Complex64) -> Result<Self, ModelError> {
        let s = InputStateSpec { alpha, beta, gamma, delta };
        let n: f64 = s.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(ModelError::NotNormalized(n));
        }
        Ok(s)
    }

    pub fn from_reals(a: [f64; 4]) -> Result<Self, ModelError> {
        let c = a.map(|x| Complex64::new(x, 0.0));
        Self::new(c[0], c[1], c[2], c[3])
    }

    /// Computational basis state `|k>` for k in 0..4 (control bit is the high bit).
    pub fn basis(k: usize) -> Self {
        let mut a = [0.0; 4];
        a[k] = 1.0;
        Self::from_reals(a).expect("basis state")
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }

    /// A normalized input with complex amplitudes drawn from `seed`.
    pub fn random(seed: u64) -> Self {
        let mut rng = StdRng::seed_from_u64(seed);
        let raw: [Complex64; 4] =
            std::array::from_fn(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let n = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let a = raw.map(|x| x / n);
        Self::new(a[0], a[1], a[2], a[3]).expect("normalized by construction")
    }

    /// Labelled inputs used by default when checking equivalence: the four
    /// basis states, the Bell-type superposition α = δ = 1/√2, and one random
    /// state.
    pub fn default_family() -> Vec<(String, InputStateSpec)> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut v: Vec<(String, InputStateSpec)> =
            (0..4).map(|k| (format!("|{}{}>", k >> 1, k & 1), Self::basis(k))).collect();
        v.push(("bell".into(), Self::from_reals([h, 0.0, 0.0, h]).expect("normalized")));
        v.push(("random".into(), Self::random(20190807)));
        v
    }

    /// The two qubits `q1` (control) and `q2` (target) in this state.
    pub fn joint_state(&self) -> JointState {
        let slots = vec![("q1".to_string(), SlotKind::Qubit), ("q2".to_string(), SlotKind::Qubit)];
        let amps = self
            .amplitudes()
            .into_iter()
            .enumerate()
            .map(|(k, a)| (BasisVector(vec![(k >> 1) as u32, (k & 1) as u32]), a));
        JointState::from_amplitudes(slots, amps).expect("input is normalized")
    }
}

impl fmt::Display for InputStateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .amplitudes()
            .iter()
            .map(|a| if a.im == 0.0 { format!("{}", a.re) } else { format!("{}{:+}i", a.re, a.im) })
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// The environment of the CNOT experiment: `q1` is sent on `a`, `q2` on `b`,
/// and the classical results are read on `out1`, `out2` and `cnt`.
pub fn environment_for(input: &InputStateSpec) -> EnvironmentSchedule {
    EnvironmentSchedule {
        state: input.joint_state(),
        env_names: vec!["q1".into(), "q2".into()],
        injections: BTreeMap::from([
            ("a".to_string(), vec![vec![Value::Name("q1".into())]]),
            ("b".to_string(), vec![vec![Value::Name("q2".into())]]),
        ]),
        reads: ["out1", "out2", "cnt"].into_iter().map(String::from).collect::<BTreeSet<_>>(),
    }
}
