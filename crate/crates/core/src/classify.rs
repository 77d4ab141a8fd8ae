//! Volterra / ℓ-Volterra classification of heredity tensors.
//!
//! Coordinate `k` is a *Volterra coordinate* when `P_{ij,k} = 0` for every pair
//! with `k ∉ {i, j}`: an offspring of type `k` always has a parent of type `k`.
//! An operator is ℓ-Volterra when exactly the first ℓ coordinates have this
//! property and every later coordinate has a witness pair producing it from
//! two other types. Classification is strict about coordinate order; see
//! [`volterra_first_permutation`] for the relabeling helper.

use std::fmt;

use crate::scalar::Real;
use crate::tensor::HeredityTensor;
use crate::tol::tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassKind {
    /// Every coordinate is a Volterra coordinate (ℓ = m).
    Volterra,
    /// Exactly the first ℓ coordinates are Volterra coordinates. ℓ = 0 is allowed.
    EllVolterra(usize),
    NotEllVolterra,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorClass {
    pub kind: ClassKind,
    /// `volterra_flags[k]` is true iff coordinate `k` is a Volterra coordinate.
    pub volterra_flags: Vec<bool>,
    /// For each non-Volterra coordinate, the first pair `(i, j)` (i <= j, both != k)
    /// with `P_{ij,k} > tol_zero`.
    pub witnesses: Vec<Option<(usize, usize)>>,
}

impl OperatorClass {
    /// The ℓ of the class (m for Volterra operators).
    pub fn ell(&self) -> Option<usize> {
        match self.kind {
            ClassKind::Volterra => Some(self.volterra_flags.len()),
            ClassKind::EllVolterra(l) => Some(l),
            ClassKind::NotEllVolterra => None,
        }
    }
}

impl fmt::Display for OperatorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ClassKind::Volterra => write!(f, "Volterra (ℓ={})", self.volterra_flags.len()),
            ClassKind::EllVolterra(l) => write!(f, "EllVolterra (ℓ={l})"),
            ClassKind::NotEllVolterra => write!(f, "NotEllVolterra"),
        }
    }
}

/// First witness pair for coordinate `k`, if any.
pub fn witness_pair<T: Real>(p: &HeredityTensor<T>, k: usize, tol_zero: T) -> Option<(usize, usize)> {
    p.pairs()
        .filter(|&(i, j)| i != k && j != k)
        .find(|&(i, j)| p.get(i, j, k) > tol_zero)
}

pub fn classify<T: Real>(p: &HeredityTensor<T>) -> OperatorClass {
    let m = p.dim();
    let tol_zero = T::tol(tolerances().zero);
    let witnesses: Vec<_> = (0..m).map(|k| witness_pair(p, k, tol_zero)).collect();
    let volterra_flags: Vec<bool> = witnesses.iter().map(Option::is_none).collect();
    let prefix = volterra_flags.iter().take_while(|&&f| f).count();
    let kind = if prefix == m {
        ClassKind::Volterra
    } else if volterra_flags[prefix..].iter().all(|&f| !f) {
        ClassKind::EllVolterra(prefix)
    } else {
        ClassKind::NotEllVolterra
    };
    OperatorClass {
        kind,
        volterra_flags,
        witnesses,
    }
}

/// A relabeling that moves every Volterra coordinate to the front (stable within
/// each group). `None` when the operator is already in prefix order.
///
/// Applying it with [`HeredityTensor::permuted`] always yields an operator that
/// [`classify`] accepts, because the Volterra property of a coordinate is
/// invariant under relabeling.
pub fn volterra_first_permutation(class: &OperatorClass) -> Option<Vec<usize>> {
    if class.kind != ClassKind::NotEllVolterra {
        return None;
    }
    let flags = &class.volterra_flags;
    let mut perm: Vec<usize> = (0..flags.len()).filter(|&k| flags[k]).collect();
    perm.extend((0..flags.len()).filter(|&k| !flags[k]));
    Some(perm)
}
