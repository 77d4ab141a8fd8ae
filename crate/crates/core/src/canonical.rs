//! Canonical form of an ℓ-Volterra operator.
//!
//! With `a_ki = 2 P_{ik,k} - 1` (i != k) and `a_kk = P_{kk,k} - 1` the operator reads
//!
//! ```text
//! x'_k = x_k (1 + sum_i a_ki x_i)                                  k <= ℓ
//! x'_k = x_k (1 + sum_i a_ki x_i) + sum_{i,j != k} P_{ij,k} x_i x_j  k > ℓ
//! ```
//!
//! on the simplex (the identity `1 = sum_i x_i` is used to absorb the diagonal).

use std::fmt;

use thiserror::Error;

use crate::classify::classify;
use crate::scalar::Real;
use crate::simplex::SimplexPoint;
use crate::tensor::HeredityTensor;

/// Square matrix `A = (a_ki)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix<T> {
    m: usize,
    data: Vec<T>,
}

impl<T: Real> InteractionMatrix<T> {
    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            data: vec![T::zero(); m * m],
        }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let m = rows.len();
        assert!(rows.iter().all(|r| r.len() == m), "interaction matrix must be square");
        Self {
            m,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_fn(m: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(m * m);
        for k in 0..m {
            for i in 0..m {
                data.push(f(k, i));
            }
        }
        Self { m, data }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize) -> T {
        self.data[k * self.m + i]
    }

    pub fn set(&mut self, k: usize, i: usize, v: T) {
        self.data[k * self.m + i] = v;
    }

    pub fn row(&self, k: usize) -> &[T] {
        &self.data[k * self.m..(k + 1) * self.m]
    }

    /// `(A x)_k = sum_i a_ki x_i`.
    pub fn row_dot(&self, k: usize, x: &[T]) -> T {
        self.row(k).iter().zip(x).map(|(&a, &xi)| a * xi).sum()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.m).map(|k| self.row_dot(k, x)).collect()
    }

    /// Interaction matrix of any heredity tensor (no class requirement).
    pub fn from_tensor(p: &HeredityTensor<T>) -> Self {
        let two = T::lit(2.0);
        Self::from_fn(p.dim(), |k, i| {
            if i == k {
                p.get(k, k, k) - T::one()
            } else {
                two * p.get(i, k, k) - T::one()
            }
        })
    }

    /// Entries breaking `a_kk ∈ [-1, 0]`, `|a_ki| <= 1`, `a_ki + a_ik <= 0`
    /// beyond `slack`. Empty for every matrix derived from a valid tensor.
    pub fn bound_violations(&self, slack: T) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for k in 0..self.m {
            for i in 0..self.m {
                let a = self.get(k, i);
                let diag_bad = k == i && (a > slack || a < -T::one() - slack);
                let abs_bad = a.abs() > T::one() + slack;
                let skew_bad = a + self.get(i, k) > slack;
                if diag_bad || abs_bad || skew_bad {
                    out.push((k, i));
                }
            }
        }
        out
    }
}

impl<T: Real> fmt::Display for InteractionMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.m {
            let row: Vec<String> = self.row(k).iter().map(|v| v.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// A non-Volterra production channel `P_{ij,k}` with `i, j != k` (stored `i <= j`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualTerm<T> {
    pub i: usize,
    pub j: usize,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm<T> {
    pub m: usize,
    pub ell: usize,
    pub a: InteractionMatrix<T>,
    /// `residual[k - ell]` lists the channels feeding coordinate `k >= ell` (0-based).
    pub residual: Vec<Vec<ResidualTerm<T>>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CanonicalError {
    #[error("ℓ = {ell} exceeds m = {m}")]
    EllOutOfRange { ell: usize, m: usize },
    #[error("coordinate {} breaks the Volterra condition required for k <= ℓ = {ell}", .k + 1)]
    NotVolterraCoordinate { k: usize, ell: usize },
    #[error("coordinate {} has no non-Volterra witness pair required for k > ℓ = {ell}", .k + 1)]
    MissingWitness { k: usize, ell: usize },
    #[error("point has dimension {got}, canonical form has m = {m}")]
    PointDimension { m: usize, got: usize },
}

/// Derives `(A, residual)` after checking that `p` really is ℓ-Volterra for this ℓ.
pub fn derive_canonical<T: Real>(
    p: &HeredityTensor<T>,
    ell: usize,
) -> Result<CanonicalForm<T>, CanonicalError> {
    let m = p.dim();
    if ell > m {
        return Err(CanonicalError::EllOutOfRange { ell, m });
    }
    let class = classify(p);
    for (k, &flag) in class.volterra_flags.iter().enumerate() {
        if k < ell && !flag {
            return Err(CanonicalError::NotVolterraCoordinate { k, ell });
        }
        if k >= ell && flag {
            return Err(CanonicalError::MissingWitness { k, ell });
        }
    }
    let a = InteractionMatrix::from_tensor(p);
    let residual = (ell..m)
        .map(|k| {
            p.pairs()
                .filter(|&(i, j)| i != k && j != k)
                .filter_map(|(i, j)| {
                    let value = p.get(i, j, k);
                    (value > T::zero()).then_some(ResidualTerm { i, j, value })
                })
                .collect()
        })
        .collect();
    Ok(CanonicalForm { m, ell, a, residual })
}

impl<T: Real> CanonicalForm<T> {
    pub fn residual_for(&self, k: usize) -> &[ResidualTerm<T>] {
        if k < self.ell {
            &[]
        } else {
            &self.residual[k - self.ell]
        }
    }

    /// `sum_{i,j != k} P_{ij,k} x_i x_j` over ordered pairs.
    pub fn residual_value(&self, k: usize, x: &[T]) -> T {
        let two = T::lit(2.0);
        self.residual_for(k)
            .iter()
            .map(|t| {
                if t.i == t.j {
                    t.value * x[t.i] * x[t.i]
                } else {
                    two * t.value * x[t.i] * x[t.j]
                }
            })
            .sum()
    }

    pub fn apply_raw(&self, x: &[T]) -> Vec<T> {
        (0..self.m)
            .map(|k| x[k] * (T::one() + self.a.row_dot(k, x)) + self.residual_value(k, x))
            .collect()
    }

    /// Two-branch evaluation of the operator; agrees with [`HeredityTensor::apply`] on the simplex.
    pub fn apply(&self, x: &SimplexPoint<T>) -> Result<SimplexPoint<T>, CanonicalError> {
        if x.dim() != self.m {
            return Err(CanonicalError::PointDimension {
                m: self.m,
                got: x.dim(),
            });
        }
        Ok(SimplexPoint::clamped(self.apply_raw(x.coords())))
    }

    pub fn has_residuals(&self) -> bool {
        self.residual.iter().any(|r| !r.is_empty())
    }
}
