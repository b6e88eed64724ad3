use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::layout::{BasisVector, SlotKind, SystemLayout};
use crate::{Result, StateError, NORM_TOL, PRUNE_EPS};

/// A pure state over the slots of its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    layout: SystemLayout,
    amps: BTreeMap<BasisVector, Complex64>,
}

fn prune(amps: &mut BTreeMap<BasisVector, Complex64>) {
    amps.retain(|_, a| a.norm() >= PRUNE_EPS);
}

impl JointState {
    /// The state of zero subsystems: a single empty basis vector with amplitude 1.
    pub fn empty() -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(BasisVector(Vec::new()), Complex64::new(1.0, 0.0));
        JointState { layout: SystemLayout::empty(), amps }
    }

    /// Builds a state from an explicit amplitude map. The photon budget becomes
    /// the largest total occupation in the support.
    pub fn from_amplitudes(
        slots: Vec<(String, SlotKind)>,
        amps: impl IntoIterator<Item = (BasisVector, Complex64)>,
    ) -> Result<Self> {
        let slots = slots
            .into_iter()
            .map(|(name, kind)| crate::Slot { name, kind })
            .collect();
        let mut layout = SystemLayout::new(slots, u32::MAX)?;
        let mut map: BTreeMap<BasisVector, Complex64> = BTreeMap::new();
        for (b, a) in amps {
            layout.check_basis(&b)?;
            *map.entry(b).or_default() += a;
        }
        prune(&mut map);
        let budget = map.keys().map(|b| b.photons(&layout)).max().unwrap_or(0);
        layout.set_budget(budget);
        let st = JointState { layout, amps: map };
        let n = st.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(StateError::NotNormalized(n));
        }
        Ok(st)
    }

    /// Builds a state without the normalization check. Basis vectors are still
    /// validated against the layout.
    pub fn from_parts(
        layout: SystemLayout,
        amps: impl IntoIterator<Item = (BasisVector, Complex64)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<BasisVector, Complex64> = BTreeMap::new();
        for (b, a) in amps {
            layout.check_basis(&b)?;
            *map.entry(b).or_default() += a;
        }
        prune(&mut map);
        Ok(JointState { layout, amps: map })
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &BTreeMap<BasisVector, Complex64> {
        &self.amps
    }

    pub fn amplitude(&self, b: &BasisVector) -> Complex64 {
        self.amps.get(b).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        let mut out = self.clone();
        if n > 0.0 {
            for a in out.amps.values_mut() {
                *a /= n;
            }
        }
        out
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for a in out.amps.values_mut() {
            *a *= c;
        }
        prune(&mut out.amps);
        out
    }

    fn extend(&self, name: &str, kind: SlotKind) -> Result<Self> {
        let mut layout = self.layout.clone();
        layout.push(name, kind)?;
        let amps = self
            .amps
            .iter()
            .map(|(b, a)| {
                let mut v = b.0.clone();
                v.push(0);
                (BasisVector(v), *a)
            })
            .collect();
        Ok(JointState { layout, amps })
    }

    /// Tensors a fresh qubit in |0> onto the state.
    pub fn allocate_qubit(&self, name: &str) -> Result<Self> {
        self.extend(name, SlotKind::Qubit)
    }

    /// Tensors a fresh vacuum mode onto the state.
    pub fn allocate_mode(&self, name: &str) -> Result<Self> {
        self.extend(name, SlotKind::Mode)
    }

    /// Raises the photon budget. Amplitudes are unchanged.
    pub fn with_budget(&self, budget: u32) -> Self {
        let mut out = self.clone();
        out.layout.set_budget(budget.max(self.layout.photon_budget()));
        out
    }

    /// Appends a slot and maps every basis vector through `f`, which receives
    /// the old vector and returns the new one. Used for relabelling maps that
    /// are injective on the support (for example polarisation to dual rail).
    pub fn relabel(
        &self,
        layout: SystemLayout,
        f: impl Fn(&BasisVector) -> BasisVector,
    ) -> Result<Self> {
        let mut amps: BTreeMap<BasisVector, Complex64> = BTreeMap::new();
        for (b, a) in &self.amps {
            let nb = f(b);
            layout.check_basis(&nb)?;
            *amps.entry(nb).or_default() += *a;
        }
        prune(&mut amps);
        Ok(JointState { layout, amps })
    }

    /// Local dimensions and slot indices of `targets`, in the given order.
    pub fn target_indices(&self, targets: &[&str]) -> Result<(Vec<usize>, Vec<usize>)> {
        let mut idx = Vec::new();
        for t in targets {
            let i = self.layout.require(t)?;
            if idx.contains(&i) {
                return Err(StateError::DuplicateName(t.to_string()));
            }
            idx.push(i);
        }
        let dims = idx.iter().map(|&i| self.layout.local_dim(i)).collect();
        Ok((idx, dims))
    }

    /// Applies `matrix` to the subsystem formed by `targets`. The local basis is
    /// enumerated lexicographically with the first target most significant;
    /// modes have dimension `photon_budget + 1`.
    pub fn apply_unitary(&self, targets: &[&str], matrix: &DMatrix<Complex64>) -> Result<Self> {
        let (idx, dims) = self.target_indices(targets)?;
        let dim: usize = dims.iter().product();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(StateError::DimensionMismatch { expected: dim, got: matrix.nrows() });
        }
        let dev = unitarity_deviation(matrix);
        if dev > NORM_TOL {
            return Err(StateError::NotUnitary(dev));
        }
        let mut out: BTreeMap<BasisVector, Complex64> = BTreeMap::new();
        for (b, a) in &self.amps {
            let mut col = 0;
            for (k, &i) in idx.iter().enumerate() {
                col = col * dims[k] + b.0[i] as usize;
            }
            for row in 0..dim {
                let u = matrix[(row, col)];
                if u.norm() < PRUNE_EPS {
                    continue;
                }
                let mut nb = b.0.clone();
                let mut r = row;
                for k in (0..idx.len()).rev() {
                    nb[idx[k]] = (r % dims[k]) as u32;
                    r /= dims[k];
                }
                *out.entry(BasisVector(nb)).or_default() += a * u;
            }
        }
        prune(&mut out);
        for b in out.keys() {
            self.layout.check_basis(b)?;
        }
        Ok(JointState { layout: self.layout.clone(), amps: out })
    }

    /// Multiplies every amplitude by `f(basis)`.
    pub fn map_phases(&self, f: impl Fn(&BasisVector) -> Complex64) -> Self {
        let mut out = self.clone();
        for (b, a) in out.amps.iter_mut() {
            *a *= f(b);
        }
        prune(&mut out.amps);
        out
    }

    /// Keeps only the basis vectors accepted by `keep`, without renormalizing.
    pub fn filter(&self, keep: impl Fn(&BasisVector) -> bool) -> Self {
        let amps = self
            .amps
            .iter()
            .filter(|(b, _)| keep(b))
            .map(|(b, a)| (b.clone(), *a))
            .collect();
        JointState { layout: self.layout.clone(), amps }
    }

    /// Reorders slots so that new slot `k` is old slot `pi[k]`.
    pub fn permute_subsystems(&self, pi: &[usize]) -> Result<Self> {
        let n = self.layout.len();
        let mut seen = vec![false; n];
        if pi.len() != n {
            return Err(StateError::InvalidPermutation);
        }
        for &p in pi {
            if p >= n || seen[p] {
                return Err(StateError::InvalidPermutation);
            }
            seen[p] = true;
        }
        let layout = self.layout.permuted(pi);
        let amps = self
            .amps
            .iter()
            .map(|(b, a)| (BasisVector(pi.iter().map(|&p| b.0[p]).collect()), *a))
            .collect();
        Ok(JointState { layout, amps })
    }

    /// Removes a slot that is in a definite value across the support.
    pub fn discard_slot(&self, name: &str) -> Result<Self> {
        let i = self.layout.require(name)?;
        let mut layout = self.layout.clone();
        layout.remove(i);
        let mut amps: BTreeMap<BasisVector, Complex64> = BTreeMap::new();
        for (b, a) in &self.amps {
            let mut v = b.0.clone();
            v.remove(i);
            *amps.entry(BasisVector(v)).or_default() += *a;
        }
        prune(&mut amps);
        Ok(JointState { layout, amps })
    }

    /// Partial trace onto `keep` (in the given order).
    pub fn reduced_density_matrix(&self, keep: &[&str]) -> Result<DensityMatrix> {
        let (sub, idx) = self.layout.select(keep)?;
        let basis = sub.enumerate_basis();
        let index: BTreeMap<&BasisVector, usize> =
            basis.iter().enumerate().map(|(i, b)| (b, i)).collect();
        let mut groups: BTreeMap<Vec<u32>, Vec<(usize, Complex64)>> = BTreeMap::new();
        for (b, a) in &self.amps {
            let kept = BasisVector(idx.iter().map(|&i| b.0[i]).collect());
            let rest: Vec<u32> = (0..b.0.len())
                .filter(|i| !idx.contains(i))
                .map(|i| b.0[i])
                .collect();
            let k = index[&kept];
            groups.entry(rest).or_default().push((k, *a));
        }
        let n = basis.len();
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for terms in groups.values() {
            for &(i, ai) in terms {
                for &(j, aj) in terms {
                    m[(i, j)] += ai * aj.conj();
                }
            }
        }
        Ok(DensityMatrix::from_parts(sub, basis, m))
    }

    /// Hash key invariant under slot order and global phase, with amplitudes
    /// rounded to 9 decimal digits.
    pub fn canonical_key(&self) -> String {
        let mut order: Vec<usize> = (0..self.layout.len()).collect();
        order.sort_by(|&a, &b| self.layout.slots()[a].name.cmp(&self.layout.slots()[b].name));
        let mut entries: Vec<(Vec<u32>, Complex64)> = self
            .amps
            .iter()
            .map(|(b, a)| (order.iter().map(|&i| b.0[i]).collect(), *a))
            .collect();
        entries.sort_by(|x, y| x.0.cmp(&y.0));
        let phase = entries
            .iter()
            .find(|(_, a)| a.norm() > 1e-9)
            .map(|(_, a)| a.conj() / a.norm())
            .unwrap_or(Complex64::new(1.0, 0.0));
        let mut s = String::new();
        for &i in &order {
            let slot = &self.layout.slots()[i];
            let k = if slot.kind == SlotKind::Qubit { 'q' } else { 'm' };
            let _ = write!(s, "{}:{};", slot.name, k);
        }
        s.push('|');
        for (b, a) in entries {
            let a = a * phase;
            let re = round9(a.re);
            let im = round9(a.im);
            if re == 0.0 && im == 0.0 {
                continue;
            }
            let _ = write!(s, "{:?}={:.9},{:.9};", b, re, im);
        }
        s
    }

    /// Largest amplitude difference after aligning `other` to this layout's slot order.
    pub fn max_abs_diff(&self, other: &JointState) -> Option<f64> {
        if self.layout.len() != other.layout.len() {
            return None;
        }
        let mut pi = Vec::new();
        for s in self.layout.slots() {
            let j = other.layout.index_of(&s.name)?;
            if other.layout.slots()[j].kind != s.kind {
                return None;
            }
            pi.push(j);
        }
        let other = other.permute_subsystems(&pi).ok()?;
        let mut d: f64 = 0.0;
        for (b, a) in &self.amps {
            d = d.max((a - other.amplitude(b)).norm());
        }
        for (b, a) in &other.amps {
            d = d.max((a - self.amplitude(b)).norm());
        }
        Some(d)
    }
}

fn round9(x: f64) -> f64 {
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// max |U^dagger U - I| entrywise.
pub(crate) fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let p = m.adjoint() * m;
    let mut d: f64 = 0.0;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let e = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            d = d.max((p[(i, j)] - e).norm());
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn modes(names: &[&str]) -> Vec<(String, SlotKind)> {
        names.iter().map(|n| (n.to_string(), SlotKind::Mode)).collect()
    }

    #[test]
    fn allocate_qubit_on_empty() {
        let s = JointState::empty().allocate_qubit("q").unwrap();
        assert_eq!(s.amplitudes().len(), 1);
        assert_eq!(s.amplitude(&BasisVector(vec![0])), c(1.0));
    }

    #[test]
    fn allocate_qubit_tensors_zero() {
        let s = JointState::from_amplitudes(
            vec![("q0".into(), SlotKind::Qubit)],
            [(BasisVector(vec![1]), c(1.0))],
        )
        .unwrap();
        let t = s.allocate_qubit("q1").unwrap();
        assert_eq!(t.amplitude(&BasisVector(vec![1, 0])), c(1.0));
        assert_eq!(s.allocate_qubit("q0"), Err(StateError::DuplicateName("q0".into())));
    }

    #[test]
    fn allocate_mode_is_vacuum() {
        let s = JointState::empty().allocate_mode("x1").unwrap();
        assert_eq!(s.amplitude(&BasisVector(vec![0])), c(1.0));
        assert_eq!(s.layout().photon_budget(), 0);
        let ab = JointState::from_amplitudes(modes(&["a", "b"]), [(BasisVector(vec![1, 0]), c(1.0))])
            .unwrap();
        let abx = ab.allocate_mode("x").unwrap();
        assert_eq!(abx.amplitude(&BasisVector(vec![1, 0, 0])), c(1.0));
        assert_eq!(abx.layout().photon_budget(), 1);
        assert!(matches!(abx.allocate_mode("a"), Err(StateError::DuplicateName(_))));
    }

    #[test]
    fn inject_checks_norm_and_budget() {
        let names = modes(&["c1", "c2", "t1", "t2"]);
        let s = JointState::from_amplitudes(names.clone(), [(BasisVector(vec![1, 0, 1, 0]), c(1.0))])
            .unwrap();
        assert_eq!(s.layout().photon_budget(), 2);
        let bad = JointState::from_amplitudes(
            names.clone(),
            [(BasisVector(vec![1, 0, 1, 0]), c(0.5)), (BasisVector(vec![0, 1, 0, 1]), c(0.5))],
        );
        assert!(matches!(bad, Err(StateError::NotNormalized(n)) if (n - 0.5).abs() < 1e-12));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ok = JointState::from_amplitudes(
            names,
            [(BasisVector(vec![1, 0, 1, 0]), c(h)), (BasisVector(vec![0, 1, 0, 1]), c(h))],
        )
        .unwrap();
        assert_eq!(ok.layout().photon_budget(), 2);
    }

    #[test]
    fn apply_identity_swap_and_hadamard() {
        let s = JointState::from_amplitudes(modes(&["a", "b"]), [(BasisVector(vec![1, 0]), c(1.0))])
            .unwrap();
        // budget 1, local dim 2 per mode, 4x4 on the pair
        let id = DMatrix::<Complex64>::identity(4, 4);
        assert_eq!(s.apply_unitary(&["a", "b"], &id).unwrap(), s);
        let mut swap = DMatrix::<Complex64>::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(i, j)] = c(1.0);
        }
        let t = s.apply_unitary(&["a", "b"], &swap).unwrap();
        assert_eq!(t.amplitude(&BasisVector(vec![0, 1])), c(1.0));

        let q = JointState::empty().allocate_qubit("q").unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = DMatrix::from_row_slice(2, 2, &[c(h), c(h), c(h), c(-h)]);
        let r = q.apply_unitary(&["q"], &had).unwrap();
        assert!((r.amplitude(&BasisVector(vec![0])) - c(h)).norm() < 1e-12);
        assert!((r.amplitude(&BasisVector(vec![1])) - c(h)).norm() < 1e-12);
    }

    #[test]
    fn apply_rejects_bad_input() {
        let q = JointState::empty().allocate_qubit("q").unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        assert!(matches!(q.apply_unitary(&["q"], &m), Err(StateError::NotUnitary(_))));
        let id = DMatrix::<Complex64>::identity(2, 2);
        assert!(matches!(q.apply_unitary(&["z"], &id), Err(StateError::UnknownName(_))));
        let id3 = DMatrix::<Complex64>::identity(3, 3);
        assert!(matches!(q.apply_unitary(&["q"], &id3), Err(StateError::DimensionMismatch { .. })));
    }

    #[test]
    fn permutation_roundtrip() {
        let s = JointState::from_amplitudes(modes(&["a", "b"]), [(BasisVector(vec![1, 0]), c(1.0))])
            .unwrap();
        assert_eq!(s.permute_subsystems(&[0, 1]).unwrap(), s);
        let t = s.permute_subsystems(&[1, 0]).unwrap();
        assert_eq!(t.amplitude(&BasisVector(vec![0, 1])), c(1.0));
        assert_eq!(t.layout().slots()[0].name, "b");
        let vac = JointState::empty().allocate_mode("x").unwrap().allocate_mode("y").unwrap();
        assert_eq!(vac.permute_subsystems(&[1, 0]).unwrap().amplitudes(), vac.amplitudes());
        assert_eq!(s.permute_subsystems(&[0, 0]), Err(StateError::InvalidPermutation));
    }

    #[test]
    fn canonical_key_ignores_phase_and_order() {
        let s = JointState::from_amplitudes(modes(&["a", "b"]), [(BasisVector(vec![1, 0]), c(1.0))])
            .unwrap();
        let t = s.scaled(Complex64::from_polar(1.0, 0.7)).permute_subsystems(&[1, 0]).unwrap();
        assert_eq!(s.canonical_key(), t.canonical_key());
    }
}
