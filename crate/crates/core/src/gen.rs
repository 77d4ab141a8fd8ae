//! Seeded random ℓ-Volterra operators and the named reference operators.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use thiserror::Error;

use crate::scalar::Real;
use crate::simplex::SimplexPoint;
use crate::tensor::HeredityTensor;
use crate::tol::tolerances;

/// Mass moved onto a missing non-Volterra channel by the repair pass.
pub const REPAIR_MASS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec {
    pub m: usize,
    pub ell: usize,
    pub seed: u64,
    /// Probability of dropping each allowed outcome of a pair row before normalization.
    pub sparsity: f64,
}

impl GenSpec {
    pub fn new(m: usize, ell: usize, seed: u64) -> Self {
        Self {
            m,
            ell,
            seed,
            sparsity: 0.0,
        }
    }

    pub fn with_sparsity(mut self, sparsity: f64) -> Self {
        self.sparsity = sparsity;
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("m = {0} is too small, need m >= 2")]
    TooSmall(usize),
    #[error("ℓ = {ell} exceeds m = {m}")]
    EllOutOfRange { ell: usize, m: usize },
    #[error("sparsity {0} outside [0, 1)")]
    Sparsity(f64),
    #[error("unknown operator name {0:?} (expected identity, W1, T2, T5 or C1)")]
    UnknownName(String),
}

/// Uniform sample from the simplex (normalized exponential draws).
pub fn random_simplex_point<T: Real, R: Rng + ?Sized>(m: usize, rng: &mut R) -> SimplexPoint<T> {
    let draws: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    SimplexPoint::settle(draws.iter().map(|d| T::lit(d / total)).collect())
}

/// Like [`random_simplex_point`] but resampled until every coordinate exceeds `floor`.
pub fn random_interior_point<T: Real, R: Rng + ?Sized>(
    m: usize,
    floor: f64,
    rng: &mut R,
) -> SimplexPoint<T> {
    assert!(floor * (m as f64) < 1.0, "interior floor too large for m = {m}");
    loop {
        let x: SimplexPoint<T> = random_simplex_point(m, rng);
        if x.is_interior(T::lit(floor)) {
            return x;
        }
    }
}

fn allowed(i: usize, j: usize, k: usize, ell: usize) -> bool {
    k == i || k == j || k >= ell
}

/// Random ℓ-Volterra heredity tensor; always valid and classified as requested
/// (`Volterra` when `ell == m`).
pub fn random_operator<T: Real>(spec: &GenSpec) -> Result<HeredityTensor<T>, GenError> {
    let GenSpec { m, ell, seed, sparsity } = *spec;
    if m < 2 {
        return Err(GenError::TooSmall(m));
    }
    if ell > m {
        return Err(GenError::EllOutOfRange { ell, m });
    }
    if !(0.0..1.0).contains(&sparsity) {
        return Err(GenError::Sparsity(sparsity));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = HeredityTensor::<f64>::zeros(m).expect("m >= 2");

    let pairs: Vec<(usize, usize)> = p.pairs().collect();
    for &(i, j) in &pairs {
        let support: Vec<usize> = (0..m).filter(|&k| allowed(i, j, k, ell)).collect();
        let mut draws: Vec<f64> = support
            .iter()
            .map(|_| {
                let keep = sparsity == 0.0 || rng.random::<f64>() >= sparsity;
                let d: f64 = rng.sample(Exp1);
                if keep {
                    d
                } else {
                    0.0
                }
            })
            .collect();
        if draws.iter().all(|&d| d == 0.0) {
            let slot = rng.random_range(0..draws.len());
            draws[slot] = rng.sample::<f64, _>(Exp1).max(f64::MIN_POSITIVE);
        }
        let total: f64 = draws.iter().sum();
        let row = p.row_mut(i, j);
        for (&k, d) in support.iter().zip(&draws) {
            row[k] = d / total;
        }
    }

    // each k >= ell needs a channel from two other types.
    let tol_zero = T::tol(tolerances().zero).as_f64();
    for k in ell..m {
        let has_witness = pairs
            .iter()
            .any(|&(i, j)| i != k && j != k && p.get(i, j, k) > tol_zero);
        if has_witness {
            continue;
        }
        let candidates: Vec<(usize, usize)> = pairs
            .iter()
            .copied()
            .filter(|&(i, j)| i != k && j != k)
            .collect();
        let &(i, j) = candidates.choose(&mut rng).expect("m >= 2 leaves a pair");
        let row = p.row_mut(i, j);
        for v in row.iter_mut() {
            *v *= 1.0 - REPAIR_MASS;
        }
        row[k] += REPAIR_MASS;
    }
    Ok(p.cast())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedOperator {
    /// Zero interaction matrix Volterra operator on three types.
    Identity,
    /// 2-Volterra operator with an interior fixed point at (2/11, 5/11, 4/11).
    W1,
    /// W1 with a dominated first type: strictly negative a_12, a_13.
    T2,
    /// T2 with a uniformly negative first row.
    T5,
    /// 1-Volterra operator swapping e2 and e3.
    C1,
}

impl NamedOperator {
    pub const ALL: [NamedOperator; 5] = [
        NamedOperator::Identity,
        NamedOperator::W1,
        NamedOperator::T2,
        NamedOperator::T5,
        NamedOperator::C1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NamedOperator::Identity => "identity",
            NamedOperator::W1 => "W1",
            NamedOperator::T2 => "T2",
            NamedOperator::T5 => "T5",
            NamedOperator::C1 => "C1",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            NamedOperator::Identity => "identity-like Volterra operator, A = 0",
            NamedOperator::W1 => "2-Volterra operator with interior face fixed point (2/11, 5/11, 4/11)",
            NamedOperator::T2 => "2-Volterra operator with x_1 -> 0 geometrically (r = 1, alpha = 0.4)",
            NamedOperator::T5 => "2-Volterra operator with row 1 <= -0.4 (k0 = 1, delta = 0.4)",
            NamedOperator::C1 => "1-Volterra operator with period-2 vertex cycle e2 <-> e3",
        }
    }
}

impl fmt::Display for NamedOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NamedOperator {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NamedOperator::ALL
            .into_iter()
            .find(|n| n.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| GenError::UnknownName(s.to_string()))
    }
}

/// 1-based `(i, j, k, value)` entries of each named operator, `i <= j`.
pub fn named_entries(name: NamedOperator) -> Vec<(usize, usize, usize, f64)> {
    let w1 = vec![
        (1, 1, 1, 0.8),
        (1, 1, 3, 0.2),
        (1, 2, 1, 0.7),
        (1, 2, 2, 0.3),
        (1, 3, 1, 0.3),
        (1, 3, 3, 0.7),
        (2, 2, 2, 1.0),
        (2, 3, 2, 0.6),
        (2, 3, 3, 0.4),
        (3, 3, 3, 1.0),
    ];
    let replace = |base: Vec<(usize, usize, usize, f64)>, changes: &[(usize, usize, usize, f64)]| {
        base.into_iter()
            .map(|(i, j, k, v)| {
                changes
                    .iter()
                    .find(|c| (c.0, c.1, c.2) == (i, j, k))
                    .map_or((i, j, k, v), |&c| c)
            })
            .collect::<Vec<_>>()
    };
    match name {
        NamedOperator::Identity => vec![
            (1, 1, 1, 1.0),
            (1, 2, 1, 0.5),
            (1, 2, 2, 0.5),
            (1, 3, 1, 0.5),
            (1, 3, 3, 0.5),
            (2, 2, 2, 1.0),
            (2, 3, 2, 0.5),
            (2, 3, 3, 0.5),
            (3, 3, 3, 1.0),
        ],
        NamedOperator::W1 => w1,
        NamedOperator::T2 => replace(w1, &[(1, 2, 1, 0.2), (1, 2, 2, 0.8)]),
        NamedOperator::T5 => replace(
            w1,
            &[(1, 1, 1, 0.5), (1, 1, 3, 0.5), (1, 2, 1, 0.2), (1, 2, 2, 0.8)],
        ),
        NamedOperator::C1 => vec![
            (1, 1, 1, 1.0),
            (1, 2, 1, 0.5),
            (1, 2, 2, 0.5),
            (1, 3, 1, 0.5),
            (1, 3, 3, 0.5),
            (2, 2, 3, 1.0),
            (2, 3, 2, 0.5),
            (2, 3, 3, 0.5),
            (3, 3, 2, 1.0),
        ],
    }
}

pub fn named_operator<T: Real>(name: NamedOperator) -> HeredityTensor<T> {
    let mut p = HeredityTensor::zeros(3).expect("m = 3");
    for (i, j, k, v) in named_entries(name) {
        p.set(i - 1, j - 1, k - 1, T::lit(v)).expect("named entries are in range");
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{classify, ClassKind};
    use crate::canonical::derive_canonical;
    use proptest::prelude::*;

    #[test]
    fn named_round_trip_through_from_str() {
        for n in NamedOperator::ALL {
            assert_eq!(n.name().parse::<NamedOperator>().unwrap(), n);
        }
        assert_eq!(
            "w2".parse::<NamedOperator>(),
            Err(GenError::UnknownName("w2".into()))
        );
    }

    #[test]
    fn volterra_spec_has_no_residuals() {
        let p: HeredityTensor<f64> = random_operator(&GenSpec::new(3, 3, 11)).unwrap();
        assert_eq!(classify(&p).kind, ClassKind::Volterra);
        assert!(!derive_canonical(&p, 3).unwrap().has_residuals());
    }

    #[test]
    fn two_types_one_volterra_gets_repair_witness() {
        for seed in 0..200 {
            let p: HeredityTensor<f64> = random_operator(&GenSpec::new(2, 1, seed)).unwrap();
            assert!(p.get(0, 0, 1) > 0.0, "seed {seed}");
            assert!(p.validate().is_valid());
        }
    }

    #[test]
    fn same_seed_same_bits() {
        let spec = GenSpec::new(7, 3, 42).with_sparsity(0.3);
        let a: HeredityTensor<f64> = random_operator(&spec).unwrap();
        let b: HeredityTensor<f64> = random_operator(&spec).unwrap();
        assert_eq!(a, b);
        let c: HeredityTensor<f64> = random_operator(&GenSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert_eq!(
            random_operator::<f64>(&GenSpec::new(1, 0, 0)),
            Err(GenError::TooSmall(1))
        );
        assert_eq!(
            random_operator::<f64>(&GenSpec::new(3, 4, 0)),
            Err(GenError::EllOutOfRange { ell: 4, m: 3 })
        );
        assert_eq!(
            random_operator::<f64>(&GenSpec::new(3, 1, 0).with_sparsity(1.0)),
            Err(GenError::Sparsity(1.0))
        );
    }

    #[test]
    fn f32_generation_is_valid() {
        let p: HeredityTensor<f32> = random_operator(&GenSpec::new(6, 2, 5)).unwrap();
        assert!(p.validate().is_valid());
        assert_eq!(classify(&p).kind, ClassKind::EllVolterra(2));
    }

    #[test]
    fn classify_round_trip_m3_l2_many_seeds() {
        for seed in 0..1000 {
            let p: HeredityTensor<f64> = random_operator(&GenSpec::new(3, 2, seed)).unwrap();
            assert_eq!(classify(&p).kind, ClassKind::EllVolterra(2), "seed {seed}");
        }
    }

    proptest! {
        #[test]
        fn generator_closure(m in 2usize..9, ell_frac in 0.0f64..=1.0, seed: u64, sparsity in 0.0f64..0.9) {
            let ell = ((m as f64) * ell_frac).round() as usize;
            let p: HeredityTensor<f64> = random_operator(&GenSpec::new(m, ell, seed).with_sparsity(sparsity)).unwrap();
            prop_assert!(p.validate().is_valid());
            let c = classify(&p);
            prop_assert_eq!(c.ell(), Some(ell));
        }
    }
}
