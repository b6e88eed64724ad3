use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::layout::{BasisVector, SystemLayout};
use crate::state::JointState;
use crate::{Result, StateError, NORM_TOL};

/// Dense density matrix over the enumerated basis of a sub-layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: SystemLayout,
    basis: Vec<BasisVector>,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub(crate) fn from_parts(
        layout: SystemLayout,
        basis: Vec<BasisVector>,
        entries: DMatrix<Complex64>,
    ) -> Self {
        DensityMatrix { layout, basis, entries }
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn basis(&self) -> &[BasisVector] {
        &self.basis
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn entry(&self, row: &BasisVector, col: &BasisVector) -> Complex64 {
        let i = self.basis.iter().position(|b| b == row);
        let j = self.basis.iter().position(|b| b == col);
        match (i, j) {
            (Some(i), Some(j)) => self.entries[(i, j)],
            _ => Complex64::default(),
        }
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = &self.entries - self.entries.adjoint();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    /// Entrywise max-abs difference, or `None` when the bases differ in size.
    /// Slot names are not compared: two systems may hold the same subsystem
    /// under different names.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> Option<f64> {
        if self.basis != other.basis {
            return None;
        }
        let d = &self.entries - &other.entries;
        Some(d.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &DensityMatrix, tol: f64) -> bool {
        self.max_abs_diff(other).is_some_and(|d| d <= tol)
    }

    /// Re-expresses the matrix over a larger photon budget so that matrices of
    /// systems with different budgets can be compared.
    pub fn with_budget(&self, budget: u32) -> DensityMatrix {
        if budget <= self.layout.photon_budget() {
            return self.clone();
        }
        let mut layout = self.layout.clone();
        layout.set_budget(budget);
        let basis = layout.enumerate_basis();
        let n = basis.len();
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        let pos: Vec<usize> = self
            .basis
            .iter()
            .map(|b| basis.iter().position(|c| c == b).expect("sub-basis"))
            .collect();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                m[(pos[i], pos[j])] = self.entries[(i, j)];
            }
        }
        DensityMatrix { layout, basis, entries: m }
    }
}

/// Weighted sum of reduced density matrices of pure components.
pub fn mixture_density_matrix(
    components: &[(f64, &JointState)],
    keep: &[&str],
) -> Result<DensityMatrix> {
    let total: f64 = components.iter().map(|(w, _)| *w).sum();
    if components.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > NORM_TOL {
        return Err(StateError::WeightMismatch(total));
    }
    let first = components.first().ok_or(StateError::WeightMismatch(0.0))?.1;
    let mut acc: Option<DensityMatrix> = None;
    for (w, st) in components {
        if st.layout().slots() != first.layout().slots() {
            return Err(StateError::LayoutMismatch);
        }
        let rho = st.reduced_density_matrix(keep)?;
        let scaled = rho.entries * Complex64::new(*w, 0.0);
        acc = Some(match acc {
            None => DensityMatrix { entries: scaled, ..rho },
            Some(mut a) => {
                if a.basis != rho.basis {
                    return Err(StateError::LayoutMismatch);
                }
                a.entries += scaled;
                a
            }
        });
    }
    Ok(acc.expect("non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SlotKind;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn bell_state_marginal_is_maximally_mixed() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = JointState::from_amplitudes(
            vec![("a".into(), SlotKind::Qubit), ("b".into(), SlotKind::Qubit)],
            [(BasisVector(vec![0, 0]), c(h)), (BasisVector(vec![1, 1]), c(h))],
        )
        .unwrap();
        let rho = s.reduced_density_matrix(&["a"]).unwrap();
        let expect = DMatrix::from_diagonal_element(2, 2, c(0.5));
        assert!((rho.entries() - expect).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn product_state_marginal_is_projector() {
        let s = JointState::from_amplitudes(
            vec![
                ("q".into(), SlotKind::Qubit),
                ("a".into(), SlotKind::Mode),
                ("b".into(), SlotKind::Mode),
            ],
            [(BasisVector(vec![1, 1, 0]), c(1.0))],
        )
        .unwrap();
        let rho = s.reduced_density_matrix(&["a", "b"]).unwrap();
        let b10 = BasisVector(vec![1, 0]);
        assert!((rho.entry(&b10, &b10) - c(1.0)).norm() < 1e-12);
        assert!((rho.trace() - c(1.0)).norm() < 1e-12);
        assert_eq!(rho.eigenvalues().iter().filter(|e| e.abs() > 1e-9).count(), 1);
    }

    #[test]
    fn entangled_qubit_marginal_matches_direct_trace() {
        let (al, be) = (0.6, 0.8);
        let s = JointState::from_amplitudes(
            vec![
                ("q".into(), SlotKind::Qubit),
                ("a".into(), SlotKind::Mode),
                ("b".into(), SlotKind::Mode),
            ],
            [(BasisVector(vec![0, 1, 0]), c(al)), (BasisVector(vec![1, 0, 1]), c(be))],
        )
        .unwrap();
        let rho = s.reduced_density_matrix(&["q"]).unwrap();
        // direct oracle: rho[i][j] = sum over mode basis m of psi(i,m) psi(j,m)*
        let mut oracle = [[0.0f64; 2]; 2];
        for i in 0..2u32 {
            for j in 0..2u32 {
                for m in s.layout().select(&["a", "b"]).unwrap().0.enumerate_basis() {
                    let bi = BasisVector(vec![i, m.0[0], m.0[1]]);
                    let bj = BasisVector(vec![j, m.0[0], m.0[1]]);
                    oracle[i as usize][j as usize] +=
                        (s.amplitude(&bi) * s.amplitude(&bj).conj()).re;
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                assert!((rho.entries()[(i, j)].re - oracle[i][j]).abs() < 1e-12);
            }
        }
        assert!((oracle[0][0] - al * al).abs() < 1e-12);
        assert!((oracle[1][1] - be * be).abs() < 1e-12);
    }

    #[test]
    fn mixtures() {
        let q0 = JointState::empty().allocate_qubit("q").unwrap();
        let x = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let q1 = q0.apply_unitary(&["q"], &x).unwrap();
        let rho = mixture_density_matrix(&[(1.0, &q0)], &["q"]).unwrap();
        assert_eq!(rho, q0.reduced_density_matrix(&["q"]).unwrap());
        let coin = mixture_density_matrix(&[(0.5, &q0), (0.5, &q1)], &["q"]).unwrap();
        let half = DMatrix::from_diagonal_element(2, 2, c(0.5));
        assert!((coin.entries() - half).iter().all(|z| z.norm() < 1e-12));

        let modes = vec![("a".to_string(), SlotKind::Mode), ("b".to_string(), SlotKind::Mode)];
        let s10 = JointState::from_amplitudes(modes.clone(), [(BasisVector(vec![1, 0]), c(1.0))]).unwrap();
        let s01 = JointState::from_amplitudes(modes, [(BasisVector(vec![0, 1]), c(1.0))]).unwrap();
        let m = mixture_density_matrix(&[(1.0 / 3.0, &s10), (2.0 / 3.0, &s01)], &["a", "b"]).unwrap();
        let (b10, b01) = (BasisVector(vec![1, 0]), BasisVector(vec![0, 1]));
        assert!((m.entry(&b10, &b10).re - 1.0 / 3.0).abs() < 1e-12);
        assert!((m.entry(&b01, &b01).re - 2.0 / 3.0).abs() < 1e-12);
        assert!(m.entry(&b10, &b01).norm() < 1e-12);

        assert!(matches!(
            mixture_density_matrix(&[(0.5, &q0)], &["q"]),
            Err(StateError::WeightMismatch(_))
        ));
        assert!(matches!(
            mixture_density_matrix(&[(0.5, &q0), (0.5, &s10)], &["q"]),
            Err(StateError::LayoutMismatch)
        ));
    }
}
