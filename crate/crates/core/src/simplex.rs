//! Points of the probability simplex.

use std::fmt;

use thiserror::Error;

use crate::scalar::{max_abs_diff, Real};
use crate::tol::tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimplexError {
    #[error("empty coordinate vector")]
    Empty,
    #[error("coordinate {index} is {value}, below -tol_simplex")]
    Negative { index: usize, value: f64 },
    #[error("coordinate {index} is not finite")]
    NotFinite { index: usize },
    #[error("coordinates sum to {sum}, expected 1 within tol_simplex")]
    Sum { sum: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// A probability vector: nonnegative coordinates summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint<T> {
    coords: Vec<T>,
}

impl<T: Real> SimplexPoint<T> {
    /// Validates against the global `tol_simplex`, clamping tolerated negatives to 0.
    pub fn new(coords: Vec<T>) -> Result<Self, SimplexError> {
        Self::with_tolerance(coords, T::tol(tolerances().simplex))
    }

    pub fn with_tolerance(mut coords: Vec<T>, tol: T) -> Result<Self, SimplexError> {
        if coords.is_empty() {
            return Err(SimplexError::Empty);
        }
        for (index, c) in coords.iter_mut().enumerate() {
            if !c.is_finite() {
                return Err(SimplexError::NotFinite { index });
            }
            if *c < -tol {
                return Err(SimplexError::Negative {
                    index,
                    value: c.as_f64(),
                });
            }
            if *c < T::zero() {
                *c = T::zero();
            }
        }
        let sum: T = coords.iter().copied().sum();
        if (sum - T::one()).abs() > tol {
            return Err(SimplexError::Sum { sum: sum.as_f64() });
        }
        Ok(Self { coords })
    }

    /// Clamp-then-renormalize: negatives become 0 and the vector is rescaled once its
    /// sum is off by more than `m` ulps. Used after every iteration step so long
    /// orbits stay on the simplex without perturbing exact points.
    pub fn settle(mut coords: Vec<T>) -> Self {
        for c in coords.iter_mut() {
            if *c < T::zero() {
                *c = T::zero();
            }
        }
        let slack = T::epsilon() * T::from_usize(coords.len()).unwrap();
        let sum: T = coords.iter().copied().sum();
        if (sum - T::one()).abs() > slack && sum > T::zero() {
            for c in coords.iter_mut() {
                *c /= sum;
            }
        }
        Self { coords }
    }

    /// Clamps tiny negatives to zero without renormalizing.
    pub(crate) fn clamped(mut coords: Vec<T>) -> Self {
        for c in coords.iter_mut() {
            if *c < T::zero() {
                *c = T::zero();
            }
        }
        Self { coords }
    }

    pub fn uniform(m: usize) -> Self {
        assert!(m > 0, "uniform point needs m >= 1");
        let v = T::one() / T::from_usize(m).unwrap();
        Self { coords: vec![v; m] }
    }

    /// The vertex `e^(i)` (0-based `i`).
    pub fn vertex(m: usize, i: usize) -> Self {
        assert!(i < m, "vertex index {i} out of range for m = {m}");
        let mut coords = vec![T::zero(); m];
        coords[i] = T::one();
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    pub fn sum(&self) -> T {
        self.coords.iter().copied().sum()
    }

    /// True when every coordinate exceeds `tol`.
    pub fn is_interior(&self, tol: T) -> bool {
        self.coords.iter().all(|&c| c > tol)
    }

    /// Index of the vertex this point equals, if any.
    pub fn as_vertex(&self) -> Option<usize> {
        let mut hit = None;
        for (i, &c) in self.coords.iter().enumerate() {
            if c == T::one() {
                hit = Some(i);
            } else if c != T::zero() {
                return None;
            }
        }
        hit
    }

    pub fn distance(&self, other: &Self) -> T {
        max_abs_diff(&self.coords, &other.coords)
    }

    /// `lambda * self + (1 - lambda) * other`.
    pub fn blend(&self, other: &Self, lambda: T) -> Result<Self, SimplexError> {
        if self.dim() != other.dim() {
            return Err(SimplexError::Dimension {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let mu = T::one() - lambda;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| lambda * a + mu * b)
            .collect();
        Ok(Self::clamped(coords))
    }

    pub fn cast<U: Real>(&self) -> SimplexPoint<U> {
        SimplexPoint {
            coords: self.coords.iter().map(|c| U::lit(c.as_f64())).collect(),
        }
    }
}

impl<T: Real> fmt::Display for SimplexPoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            let v = c.as_f64();
            if v != 0.0 && v.abs() < 1e-4 {
                write!(f, "{v:e}")?;
            } else {
                write!(f, "{c}")?;
            }
        }
        write!(f, ")")
    }
}
