//! Named numerical tolerances.
//!
//! Defaults live in [`Tolerances::DEFAULT`]; a process-wide copy can be replaced with
//! [`set_tolerances`] (the CLI does this from `LVOLTERRA_TOL_*` environment variables).

use std::fmt;
use std::sync::RwLock;

use thiserror::Error;

pub const DEFAULT_TOL_SIMPLEX: f64 = 1e-12;
pub const DEFAULT_TOL_ROW: f64 = 1e-12;
pub const DEFAULT_TOL_ZERO: f64 = 1e-14;
pub const DEFAULT_TOL_FIXED: f64 = 1e-10;
pub const DEFAULT_TOL_CYCLE: f64 = 1e-9;
pub const DEFAULT_TOL_CONV: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed negativity / sum deviation of simplex points.
    pub simplex: f64,
    /// Allowed deviation of a heredity row sum from 1.
    pub row: f64,
    /// Threshold below which a coefficient or coordinate counts as zero.
    pub zero: f64,
    /// Residual bound for certified fixed points.
    pub fixed: f64,
    /// Recurrence distance for cycle detection.
    pub cycle: f64,
    /// Step size below which an orbit is considered stationary.
    pub conv: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        simplex: DEFAULT_TOL_SIMPLEX,
        row: DEFAULT_TOL_ROW,
        zero: DEFAULT_TOL_ZERO,
        fixed: DEFAULT_TOL_FIXED,
        cycle: DEFAULT_TOL_CYCLE,
        conv: DEFAULT_TOL_CONV,
    };

    pub const ENV_VARS: [&'static str; 6] = [
        "LVOLTERRA_TOL_SIMPLEX",
        "LVOLTERRA_TOL_ROW",
        "LVOLTERRA_TOL_ZERO",
        "LVOLTERRA_TOL_FIXED",
        "LVOLTERRA_TOL_CYCLE",
        "LVOLTERRA_TOL_CONV",
    ];

    /// Defaults overridden by any `LVOLTERRA_TOL_*` variable that is set.
    pub fn from_env() -> Result<Self, ToleranceError> {
        Self::from_lookup(|name| std::env::var(name).ok())
    }

    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, ToleranceError> {
        let mut t = Self::DEFAULT;
        let slots: [&mut f64; 6] = [
            &mut t.simplex,
            &mut t.row,
            &mut t.zero,
            &mut t.fixed,
            &mut t.cycle,
            &mut t.conv,
        ];
        for (name, slot) in Self::ENV_VARS.iter().zip(slots) {
            if let Some(raw) = lookup(name) {
                let v: f64 = raw.trim().parse().map_err(|_| ToleranceError {
                    name: (*name).to_string(),
                    value: raw.clone(),
                })?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(ToleranceError {
                        name: (*name).to_string(),
                        value: raw,
                    });
                }
                *slot = v;
            }
        }
        Ok(t)
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for Tolerances {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "tol_simplex={:e} tol_row={:e} tol_zero={:e} tol_fixed={:e} tol_cycle={:e} tol_conv={:e}",
            self.simplex, self.row, self.zero, self.fixed, self.cycle, self.conv
        )
    }
}

#[derive(Debug, Error)]
#[error("invalid tolerance {name}={value:?}: expected a finite non-negative number")]
pub struct ToleranceError {
    pub name: String,
    pub value: String,
}

static GLOBAL: RwLock<Tolerances> = RwLock::new(Tolerances::DEFAULT);

/// Current process-wide tolerances.
pub fn tolerances() -> Tolerances {
    *GLOBAL.read().unwrap_or_else(|e| e.into_inner())
}

pub fn set_tolerances(t: Tolerances) {
    *GLOBAL.write().unwrap_or_else(|e| e.into_inner()) = t;
}
