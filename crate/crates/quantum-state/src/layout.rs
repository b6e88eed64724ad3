use std::fmt;

use crate::{Result, StateError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlotKind {
    Qubit,
    Mode,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Slot {
    pub name: String,
    pub kind: SlotKind,
}

/// Ordered named subsystems plus the photon budget that bounds mode occupations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SystemLayout {
    slots: Vec<Slot>,
    photon_budget: u32,
}

/// One entry per slot: a bit for qubits, an occupation number for modes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisVector(pub Vec<u32>);

impl SystemLayout {
    pub fn new(slots: Vec<Slot>, photon_budget: u32) -> Result<Self> {
        for (i, s) in slots.iter().enumerate() {
            if slots[..i].iter().any(|t| t.name == s.name) {
                return Err(StateError::DuplicateName(s.name.clone()));
            }
        }
        Ok(SystemLayout { slots, photon_budget })
    }

    pub fn empty() -> Self {
        SystemLayout::default()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn photon_budget(&self) -> u32 {
        self.photon_budget
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.slots.iter().map(|s| s.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.slots.iter().position(|s| s.name == name)
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| StateError::UnknownName(name.to_string()))
    }

    pub fn kind_of(&self, name: &str) -> Option<SlotKind> {
        self.index_of(name).map(|i| self.slots[i].kind)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    /// Local Hilbert-space dimension of a slot under the current budget.
    pub fn local_dim(&self, idx: usize) -> usize {
        match self.slots[idx].kind {
            SlotKind::Qubit => 2,
            SlotKind::Mode => self.photon_budget as usize + 1,
        }
    }

    pub(crate) fn push(&mut self, name: &str, kind: SlotKind) -> Result<()> {
        if self.contains(name) {
            return Err(StateError::DuplicateName(name.to_string()));
        }
        self.slots.push(Slot { name: name.to_string(), kind });
        Ok(())
    }

    pub(crate) fn remove(&mut self, idx: usize) -> Slot {
        self.slots.remove(idx)
    }

    pub(crate) fn set_budget(&mut self, budget: u32) {
        self.photon_budget = budget;
    }

    pub(crate) fn permuted(&self, pi: &[usize]) -> Self {
        let slots = pi.iter().map(|&i| self.slots[i].clone()).collect();
        SystemLayout { slots, photon_budget: self.photon_budget }
    }

    /// Sub-layout keeping the named slots in the given order.
    pub fn select(&self, keep: &[&str]) -> Result<(SystemLayout, Vec<usize>)> {
        let mut idx = Vec::with_capacity(keep.len());
        for k in keep {
            let i = self.require(k)?;
            if idx.contains(&i) {
                return Err(StateError::DuplicateName(k.to_string()));
            }
            idx.push(i);
        }
        let slots = idx.iter().map(|&i| self.slots[i].clone()).collect();
        Ok((SystemLayout { slots, photon_budget: self.photon_budget }, idx))
    }

    /// All basis vectors whose mode occupations sum to at most the budget,
    /// in lexicographic order.
    pub fn enumerate_basis(&self) -> Vec<BasisVector> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; self.slots.len()];
        self.enumerate_rec(0, 0, &mut cur, &mut out);
        out
    }

    fn enumerate_rec(&self, i: usize, used: u32, cur: &mut Vec<u32>, out: &mut Vec<BasisVector>) {
        if i == self.slots.len() {
            out.push(BasisVector(cur.clone()));
            return;
        }
        let max = match self.slots[i].kind {
            SlotKind::Qubit => 1,
            SlotKind::Mode => self.photon_budget - used,
        };
        for v in 0..=max {
            cur[i] = v;
            let used = if self.slots[i].kind == SlotKind::Mode { used + v } else { used };
            self.enumerate_rec(i + 1, used, cur, out);
        }
        cur[i] = 0;
    }

    pub fn check_basis(&self, b: &BasisVector) -> Result<()> {
        if b.0.len() != self.slots.len() {
            return Err(StateError::BadBasis(format!("{b}")));
        }
        let mut photons = 0;
        for (s, &v) in self.slots.iter().zip(&b.0) {
            match s.kind {
                SlotKind::Qubit if v > 1 => return Err(StateError::BadBasis(format!("{b}"))),
                SlotKind::Mode => photons += v,
                _ => {}
            }
        }
        if photons > self.photon_budget {
            return Err(StateError::BadBasis(format!("{b}")));
        }
        Ok(())
    }
}

impl BasisVector {
    pub fn photons(&self, layout: &SystemLayout) -> u32 {
        layout
            .slots()
            .iter()
            .zip(&self.0)
            .filter(|(s, _)| s.kind == SlotKind::Mode)
            .map(|(_, &v)| v)
            .sum()
    }
}

impl fmt::Display for BasisVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for v in &self.0 {
            write!(f, "{v}")?;
        }
        write!(f, ">")
    }
}
