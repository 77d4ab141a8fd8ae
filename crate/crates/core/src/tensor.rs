//! Heredity coefficients `P_{ij,k}` and the quadratic map they define.

use std::fmt;

use thiserror::Error;

use crate::scalar::Real;
use crate::simplex::SimplexPoint;
use crate::tol::tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("dimension m = {0} is too small, need m >= 2")]
    TooSmall(usize),
    #[error("array extent mismatch at {axis}: expected {expected}, found {found}")]
    Extent {
        axis: String,
        expected: usize,
        found: usize,
    },
    #[error("index ({i}, {j}, {k}) out of range for m = {m}")]
    Index { i: usize, j: usize, k: usize, m: usize },
    #[error("point has dimension {got}, operator has m = {m}")]
    PointDimension { m: usize, got: usize },
}

/// Dense heredity tensor with the `(i, j)` symmetry built into the storage:
/// one stochastic row of length `m` per unordered pair `i <= j`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeredityTensor<T> {
    m: usize,
    data: Vec<T>,
}

#[inline]
fn pair_index(m: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    a * m - a * (a + 1) / 2 + b
}

impl<T: Real> HeredityTensor<T> {
    pub fn zeros(m: usize) -> Result<Self, TensorError> {
        if m < 2 {
            return Err(TensorError::TooSmall(m));
        }
        Ok(Self {
            m,
            data: vec![T::zero(); m * (m + 1) / 2 * m],
        })
    }

    /// Builds from a closure evaluated on every `i <= j` pair.
    pub fn from_fn(m: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Result<Self, TensorError> {
        let mut t = Self::zeros(m)?;
        for i in 0..m {
            for j in i..m {
                for k in 0..m {
                    t.data[pair_index(m, i, j) * m + k] = f(i, j, k);
                }
            }
        }
        Ok(t)
    }

    /// Reads a full `m x m x m` array indexed `[i][j][k]`. Asymmetric entries are
    /// reported by [`validate_dense`]; here the `i <= j` half wins.
    pub fn from_dense(p: &[Vec<Vec<T>>]) -> Result<Self, TensorError> {
        check_dense_extents(p)?;
        Self::from_fn(p.len(), |i, j, k| p[i][j][k])
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.data[pair_index(self.m, i, j) * self.m + k]
    }

    /// Sets `P_{ij,k}` (and therefore `P_{ji,k}`).
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: T) -> Result<(), TensorError> {
        let m = self.m;
        if i >= m || j >= m || k >= m {
            return Err(TensorError::Index { i, j, k, m });
        }
        self.data[pair_index(m, i, j) * m + k] = value;
        Ok(())
    }

    /// Outcome distribution of the pair `(i, j)`.
    pub fn row(&self, i: usize, j: usize) -> &[T] {
        let start = pair_index(self.m, i, j) * self.m;
        &self.data[start..start + self.m]
    }

    pub fn row_mut(&mut self, i: usize, j: usize) -> &mut [T] {
        let start = pair_index(self.m, i, j) * self.m;
        let m = self.m;
        &mut self.data[start..start + m]
    }

    /// Unordered pairs `(i, j)` with `i <= j`, in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.m;
        (0..m).flat_map(move |i| (i..m).map(move |j| (i, j)))
    }

    /// Negativity and row-sum checks against the global `tol_row`.
    pub fn validate(&self) -> ValidationReport {
        let tol_row = T::tol(tolerances().row);
        let mut violations = Vec::new();
        for (i, j) in self.pairs() {
            let row = self.row(i, j);
            for (k, &v) in row.iter().enumerate() {
                if !(v >= T::zero()) {
                    violations.push(Violation::Negative {
                        i,
                        j,
                        k,
                        value: v.as_f64(),
                    });
                }
            }
            let sum: T = row.iter().copied().sum();
            if !((sum - T::one()).abs() <= tol_row) {
                violations.push(Violation::RowSum {
                    i,
                    j,
                    sum: sum.as_f64(),
                    deficit: (T::one() - sum).as_f64(),
                });
            }
        }
        ValidationReport { violations }
    }

    /// `V(x)_k = sum_{i,j} P_{ij,k} x_i x_j` without any clamping.
    pub fn apply_raw(&self, x: &[T]) -> Vec<T> {
        let m = self.m;
        debug_assert_eq!(x.len(), m);
        let two = T::lit(2.0);
        let mut out = vec![T::zero(); m];
        for i in 0..m {
            let xi = x[i];
            if xi == T::zero() {
                continue;
            }
            for j in i..m {
                let xj = x[j];
                if xj == T::zero() {
                    continue;
                }
                let w = if i == j { xi * xi } else { two * xi * xj };
                for (o, &p) in out.iter_mut().zip(self.row(i, j)) {
                    *o += p * w;
                }
            }
        }
        out
    }

    /// The operator image `V(x)`; tiny negative rounding is clamped, nothing is renormalized.
    pub fn apply(&self, x: &SimplexPoint<T>) -> Result<SimplexPoint<T>, TensorError> {
        if x.dim() != self.m {
            return Err(TensorError::PointDimension {
                m: self.m,
                got: x.dim(),
            });
        }
        Ok(SimplexPoint::clamped(self.apply_raw(x.coords())))
    }

    /// Max-norm residual `||V(x) - x||`.
    pub fn residual(&self, x: &[T]) -> T {
        crate::scalar::max_abs_diff(&self.apply_raw(x), x)
    }

    /// Relabels coordinates: new index `n` corresponds to old index `perm[n]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, TensorError> {
        if perm.len() != self.m {
            return Err(TensorError::Extent {
                axis: "permutation".into(),
                expected: self.m,
                found: perm.len(),
            });
        }
        Self::from_fn(self.m, |i, j, k| self.get(perm[i], perm[j], perm[k]))
    }

    pub fn cast<U: Real>(&self) -> HeredityTensor<U> {
        HeredityTensor {
            m: self.m,
            data: self.data.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

fn check_dense_extents<T>(p: &[Vec<Vec<T>>]) -> Result<(), TensorError> {
    let m = p.len();
    if m < 2 {
        return Err(TensorError::TooSmall(m));
    }
    for (i, plane) in p.iter().enumerate() {
        if plane.len() != m {
            return Err(TensorError::Extent {
                axis: format!("[{i}]"),
                expected: m,
                found: plane.len(),
            });
        }
        for (j, row) in plane.iter().enumerate() {
            if row.len() != m {
                return Err(TensorError::Extent {
                    axis: format!("[{i}][{j}]"),
                    expected: m,
                    found: row.len(),
                });
            }
        }
    }
    Ok(())
}

/// Full validation of a dense array, including the symmetry `P_{ij,k} = P_{ji,k}`
/// that [`HeredityTensor`] enforces structurally.
pub fn validate_dense<T: Real>(p: &[Vec<Vec<T>>]) -> Result<ValidationReport, TensorError> {
    check_dense_extents(p)?;
    let m = p.len();
    let mut report = HeredityTensor::from_dense(p)?.validate();
    for i in 0..m {
        for j in (i + 1)..m {
            for k in 0..m {
                let (left, right) = (p[i][j][k], p[j][i][k]);
                if left != right {
                    report.violations.push(Violation::Asymmetric {
                        i,
                        j,
                        k,
                        left: left.as_f64(),
                        right: right.as_f64(),
                    });
                }
            }
        }
    }
    Ok(report)
}

/// One broken constraint of a heredity tensor (0-based indices).
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Negative { i: usize, j: usize, k: usize, value: f64 },
    Asymmetric { i: usize, j: usize, k: usize, left: f64, right: f64 },
    RowSum { i: usize, j: usize, sum: f64, deficit: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::Negative { i, j, k, value } => {
                write!(f, "negative P[{},{},{}] = {value}", i + 1, j + 1, k + 1)
            }
            Violation::Asymmetric { i, j, k, left, right } => write!(
                f,
                "asymmetric P[{a},{b},{c}] = {left} vs P[{b},{a},{c}] = {right}",
                a = i + 1,
                b = j + 1,
                c = k + 1
            ),
            Violation::RowSum { i, j, sum, deficit } => write!(
                f,
                "row-sum P[{},{},*] = {sum} (deficit {deficit})",
                i + 1,
                j + 1
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}
