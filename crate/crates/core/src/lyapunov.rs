//! Lyapunov functions for ℓ-Volterra operators and the hypotheses under which
//! they are monotone along orbits.
//!
//! Four families are provided:
//!
//! * `phi_p(x) = prod_{k<ℓ} x_k^{p_k}` for `p` in `P_δ` (non-increasing when some row
//!   of `A` restricted to `k < ℓ` is non-positive),
//! * `phi(x) = x_1 + ... + x_r` (decays geometrically when `a_ki < 0` for `k <= r < i`),
//! * `psi_p(x) = prod_{k<r} x_k^{p_k}` for any `p` in the `r`-simplex under the same
//!   hypothesis (convergent, not necessarily monotone),
//! * `f_pq(x) = x_p / x_q` when row `p` is dominated by row `q`.
//!
//! `0^0` is taken to be 1 so the product families extend to the boundary.

use std::fmt;

use thiserror::Error;

use crate::canonical::InteractionMatrix;
use crate::operator::LVolterraOperator;
use crate::scalar::Real;
use crate::simplex::SimplexPoint;
use crate::tol::tolerances;

/// Trailing window used for the Cauchy-style limit estimate.
pub const LIMIT_WINDOW: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LyapunovError {
    #[error("δ = {0} must be <= 0")]
    PositiveDelta(f64),
    #[error("hypothesis a[k0][i] <= δ fails at i = {}", .index + 1)]
    HypothesisFailed { index: usize },
    #[error("index {index} out of range (bound {bound})")]
    Index { index: usize, bound: usize },
    #[error("exponent vector has length {got}, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("exponent vector is not a probability vector")]
    NotProbability,
    #[error("x_q = {value} is not positive; f_pq is undefined off the interior")]
    Division { value: f64 },
    #[error("starting point is not in the interior of the simplex")]
    NotInterior,
    #[error("decay hypothesis (a_ki < 0 for k <= r < i) fails for r = {r}")]
    DecayHypothesis { r: usize },
}

/// Exponents `p` on a simplex, used by the product families.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentVector<T>(Vec<T>);

impl<T: Real> ExponentVector<T> {
    pub fn new(p: Vec<T>) -> Result<Self, LyapunovError> {
        let tol = T::tol(tolerances().simplex);
        let sum: T = p.iter().copied().sum();
        if p.is_empty() || p.iter().any(|&v| !(v >= T::zero())) || (sum - T::one()).abs() > tol {
            return Err(LyapunovError::NotProbability);
        }
        Ok(Self(p))
    }

    pub fn vertex(len: usize, k: usize) -> Self {
        let mut p = vec![T::zero(); len];
        p[k] = T::one();
        Self(p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }
}

fn check_index(index: usize, bound: usize) -> Result<(), LyapunovError> {
    if index < bound {
        Ok(())
    } else {
        Err(LyapunovError::Index { index, bound })
    }
}

/// Membership in `P_δ`: `sum_{k<ℓ} a_ki p_k <= δ` for every `i`, up to `tol_zero`.
pub fn p_delta_contains<T: Real>(
    a: &InteractionMatrix<T>,
    ell: usize,
    p: &ExponentVector<T>,
    delta: T,
) -> Result<bool, LyapunovError> {
    if delta > T::zero() {
        return Err(LyapunovError::PositiveDelta(delta.as_f64()));
    }
    if p.len() != ell || ell > a.dim() {
        return Err(LyapunovError::Length {
            expected: ell,
            got: p.len(),
        });
    }
    let tol_zero = T::tol(tolerances().zero);
    Ok((0..a.dim()).all(|i| {
        let s: T = p.0.iter().enumerate().map(|(k, &pk)| a.get(k, i) * pk).sum();
        s <= delta + tol_zero
    }))
}

/// A point of `P_δ` near the vertex `e^(k0)` together with the admissible radius.
#[derive(Debug, Clone, PartialEq)]
pub struct PDeltaWitness<T> {
    pub p: ExponentVector<T>,
    /// Largest max-norm radius around `e^(k0)` guaranteed inside `P_δ`; infinite when
    /// no coordinate constrains it.
    pub epsilon: T,
}

/// Constructs an element of `P_δ` from a row `k0 < ℓ` with `a_{k0,i} <= δ` for all `i`.
///
/// The radius is `min_i (δ - a_{k0,i}) / (max_{k != k0} max(a_ki, 0) - a_{k0,i})`,
/// zero denominators being unconstrained. The returned `p` puts `1 - ε/2` on `k0`
/// and spreads `ε/2` evenly over the other `k < ℓ` (ε capped at 1), which keeps every
/// sum at least `(δ - a_{k0,i}) / 2` below the bound.
pub fn p_delta_witness<T: Real>(
    a: &InteractionMatrix<T>,
    ell: usize,
    k0: usize,
    delta: T,
) -> Result<PDeltaWitness<T>, LyapunovError> {
    if delta > T::zero() {
        return Err(LyapunovError::PositiveDelta(delta.as_f64()));
    }
    check_index(k0, ell)?;
    check_index(ell - 1, a.dim())?;
    let tol_zero = T::tol(tolerances().zero);
    let m = a.dim();
    if let Some(index) = (0..m).find(|&i| a.get(k0, i) > delta + tol_zero) {
        return Err(LyapunovError::HypothesisFailed { index });
    }
    let mut epsilon = T::infinity();
    if ell > 1 {
        for i in 0..m {
            let a0 = a.get(k0, i);
            let others = (0..ell)
                .filter(|&k| k != k0)
                .map(|k| a.get(k, i).max(T::zero()))
                .fold(T::neg_infinity(), T::max);
            let den = others - a0;
            if den > T::zero() {
                let num = (delta - a0).max(T::zero());
                epsilon = epsilon.min(num / den);
            }
        }
    }
    let p = if epsilon.is_infinite() || ell == 1 {
        ExponentVector::vertex(ell, k0)
    } else {
        let half = epsilon.min(T::one()) / T::lit(2.0);
        let share = half / T::from_usize(ell - 1).unwrap();
        ExponentVector(
            (0..ell)
                .map(|k| if k == k0 { T::one() - half } else { share })
                .collect(),
        )
    };
    Ok(PDeltaWitness { p, epsilon })
}

/// Smallest `k0 < ℓ` whose row of `A` is non-positive (up to `tol_zero`).
pub fn check_thm1<T: Real>(a: &InteractionMatrix<T>, ell: usize) -> Option<usize> {
    let tol_zero = T::tol(tolerances().zero);
    (0..ell.min(a.dim())).find(|&k| a.row(k).iter().all(|&v| v <= tol_zero))
}

/// `prod_k x_k^{p_k}` over the first `p.len()` coordinates, with `0^0 = 1`.
pub fn eval_phi<T: Real>(p: &ExponentVector<T>, x: &SimplexPoint<T>) -> T {
    p.0.iter()
        .zip(x.coords())
        .map(|(&pk, &xk)| if pk == T::zero() { T::one() } else { xk.powf(pk) })
        .fold(T::one(), |acc, f| acc * f)
}

/// Parameters of a geometric-decay certificate for `x_1 + ... + x_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayWitness<T> {
    pub r: usize,
    /// `min_{k < r <= i} (-a_ki)`.
    pub alpha: T,
}

/// `α` for a given `r` if `a_ki < -tol_zero` for all `k < r <= i`.
pub fn thm2_alpha<T: Real>(a: &InteractionMatrix<T>, ell: usize, r: usize) -> Option<T> {
    let m = a.dim();
    if r == 0 || r > ell || r >= m {
        return None;
    }
    let tol_zero = T::tol(tolerances().zero);
    let mut alpha = T::infinity();
    for k in 0..r {
        for i in r..m {
            let v = a.get(k, i);
            if !(v < -tol_zero) {
                return None;
            }
            alpha = alpha.min(-v);
        }
    }
    Some(alpha)
}

/// Largest `r <= ℓ` satisfying the strict-negativity hypothesis.
pub fn check_thm2<T: Real>(a: &InteractionMatrix<T>, ell: usize) -> Option<DecayWitness<T>> {
    (1..=ell.min(a.dim()))
        .rev()
        .find_map(|r| thm2_alpha(a, ell, r).map(|alpha| DecayWitness { r, alpha }))
}

pub fn eval_linear_phi<T: Real>(r: usize, x: &SimplexPoint<T>) -> T {
    x.coords().iter().take(r).copied().sum()
}

/// `prod_{k<r} x_k^{p_k}` with `r = p.len()`.
pub fn eval_psi<T: Real>(p: &ExponentVector<T>, x: &SimplexPoint<T>) -> T {
    eval_phi(p, x)
}

pub fn eval_ratio<T: Real>(p: usize, q: usize, x: &SimplexPoint<T>) -> Result<T, LyapunovError> {
    check_index(p, x.dim())?;
    check_index(q, x.dim())?;
    let xq = x.coords()[q];
    if xq <= T::tol(tolerances().zero) {
        return Err(LyapunovError::Division { value: xq.as_f64() });
    }
    Ok(x.coords()[p] / xq)
}

/// Pair `(p, q)` with row `p` of `A` dominated by row `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RatioPair {
    pub p: usize,
    pub q: usize,
    /// Every inequality `a_pi < a_qi` is strict.
    pub strict: bool,
}

/// All pairs `p < ℓ`, `q != p` with `a_pi - a_qi <= tol_zero` for every `i`.
pub fn check_thm4<T: Real>(a: &InteractionMatrix<T>, ell: usize) -> Vec<RatioPair> {
    let tol_zero = T::tol(tolerances().zero);
    let m = a.dim();
    let mut out = Vec::new();
    for p in 0..ell.min(m) {
        for q in (0..m).filter(|&q| q != p) {
            let diffs = (0..m).map(|i| a.get(p, i) - a.get(q, i));
            let mut qualifies = true;
            let mut strict = true;
            for d in diffs {
                qualifies &= d <= tol_zero;
                strict &= d < -tol_zero;
            }
            if qualifies {
                out.push(RatioPair { p, q, strict });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum LyapunovFamily<T> {
    Phi(ExponentVector<T>),
    Linear { r: usize },
    Psi(ExponentVector<T>),
    Ratio { p: usize, q: usize },
}

impl<T: Real> LyapunovFamily<T> {
    pub fn id(&self) -> &'static str {
        match self {
            LyapunovFamily::Phi(_) => "phi_p",
            LyapunovFamily::Linear { .. } => "linear_r",
            LyapunovFamily::Psi(_) => "psi_p",
            LyapunovFamily::Ratio { .. } => "ratio_pq",
        }
    }

    pub fn eval(&self, x: &SimplexPoint<T>) -> Result<T, LyapunovError> {
        match self {
            LyapunovFamily::Phi(p) => Ok(eval_phi(p, x)),
            LyapunovFamily::Linear { r } => Ok(eval_linear_phi(*r, x)),
            LyapunovFamily::Psi(p) => Ok(eval_psi(p, x)),
            LyapunovFamily::Ratio { p, q } => eval_ratio(*p, *q, x),
        }
    }

    fn check_dim(&self, m: usize) -> Result<(), LyapunovError> {
        match self {
            LyapunovFamily::Phi(p) | LyapunovFamily::Psi(p) => {
                if p.len() > m {
                    return Err(LyapunovError::Length {
                        expected: m,
                        got: p.len(),
                    });
                }
                Ok(())
            }
            LyapunovFamily::Linear { r } => check_index(r.saturating_sub(1), m),
            LyapunovFamily::Ratio { p, q } => {
                check_index(*p, m)?;
                check_index(*q, m)
            }
        }
    }
}

impl<T: Real> fmt::Display for LyapunovFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |p: &ExponentVector<T>| {
            p.as_slice()
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            LyapunovFamily::Phi(p) => write!(f, "phi_p p=({})", list(p)),
            LyapunovFamily::Linear { r } => write!(f, "linear_r r={r}"),
            LyapunovFamily::Psi(p) => write!(f, "psi_p p=({})", list(p)),
            LyapunovFamily::Ratio { p, q } => write!(f, "ratio_pq p={} q={}", p + 1, q + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitEstimate<T> {
    /// Trailing-window mean; the window spread was below the tolerance.
    Converged(T),
    NotConverged { spread: T },
    /// Values became non-finite or exceeded 1e12.
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    pub step: usize,
    pub coordinate: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovReport<T> {
    pub family: LyapunovFamily<T>,
    /// No increase beyond the tolerance was observed.
    pub monotone: bool,
    pub violation_count: usize,
    pub worst_violation: T,
    pub limit: LimitEstimate<T>,
    pub first: T,
    pub last: T,
    pub samples: usize,
    /// Set when the orbit reached the boundary before `n_steps`.
    pub truncated: Option<Truncation>,
}

/// Simulates `n_steps` from an interior `x0` and audits the function along the orbit.
///
/// An increase `f(x_{n+1}) - f(x_n) > tol * max(1, |f(x_n)|)` counts as a violation.
pub fn empirical_lyapunov_check<T: Real>(
    op: &LVolterraOperator<T>,
    family: &LyapunovFamily<T>,
    x0: &SimplexPoint<T>,
    n_steps: usize,
    tol: T,
) -> Result<LyapunovReport<T>, LyapunovError> {
    family.check_dim(op.dim())?;
    let tol_zero = T::tol(tolerances().zero);
    if x0.dim() != op.dim() || !x0.is_interior(tol_zero) {
        return Err(LyapunovError::NotInterior);
    }
    let mut values = vec![family.eval(x0)?];
    let mut x = x0.clone();
    let mut violation_count = 0;
    let mut worst_violation = T::zero();
    let mut truncated = None;
    for step in 1..=n_steps {
        x = op.step(&x);
        if let Some(coordinate) = x.coords().iter().position(|&c| c <= tol_zero) {
            truncated = Some(Truncation { step, coordinate });
            break;
        }
        let v = family.eval(&x)?;
        let prev = *values.last().unwrap();
        let excess = v - prev;
        if excess > tol * prev.abs().max(T::one()) {
            violation_count += 1;
            worst_violation = worst_violation.max(excess);
        }
        values.push(v);
    }
    let last = *values.last().unwrap();
    let window = &values[values.len().saturating_sub(LIMIT_WINDOW)..];
    let limit = if window.iter().any(|v| !v.is_finite() || v.abs() > T::lit(1e12)) {
        LimitEstimate::Diverged
    } else {
        let hi = window.iter().copied().fold(T::neg_infinity(), T::max);
        let lo = window.iter().copied().fold(T::infinity(), T::min);
        if hi - lo < tol {
            let n = T::from_usize(window.len()).unwrap();
            LimitEstimate::Converged(window.iter().copied().sum::<T>() / n)
        } else {
            LimitEstimate::NotConverged { spread: hi - lo }
        }
    };
    Ok(LyapunovReport {
        family: family.clone(),
        monotone: violation_count == 0,
        violation_count,
        worst_violation,
        limit,
        first: values[0],
        last,
        samples: values.len(),
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{named_operator, random_simplex_point, NamedOperator};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn op(name: NamedOperator) -> LVolterraOperator<f64> {
        LVolterraOperator::new(named_operator(name)).unwrap()
    }

    fn ev(p: &[f64]) -> ExponentVector<f64> {
        ExponentVector::new(p.to_vec()).unwrap()
    }

    #[test]
    fn zero_matrix_contains_everything_at_delta_zero() {
        let a = InteractionMatrix::<f64>::zeros(4);
        assert!(p_delta_contains(&a, 2, &ev(&[0.3, 0.7]), 0.0).unwrap());
        assert_eq!(
            p_delta_contains(&a, 2, &ev(&[0.3, 0.7]), 0.1),
            Err(LyapunovError::PositiveDelta(0.1))
        );
    }

    #[test]
    fn w1_vertex_one_is_not_in_p0() {
        let w1 = op(NamedOperator::W1);
        assert!(!p_delta_contains(w1.matrix(), 2, &ev(&[1.0, 0.0]), 0.0).unwrap());
    }

    #[test]
    fn witness_zero_matrix_is_vertex_with_infinite_radius() {
        let a = InteractionMatrix::<f64>::zeros(3);
        let w = p_delta_witness(&a, 3, 1, 0.0).unwrap();
        assert!(w.epsilon.is_infinite());
        assert_eq!(w.p.as_slice(), &[0.0, 1.0, 0.0]);
        assert!(p_delta_contains(&a, 3, &w.p, 0.0).unwrap());
    }

    #[test]
    fn witness_with_single_volterra_coordinate_is_the_vertex() {
        let a = InteractionMatrix::from_rows(&[vec![-0.3, -0.1], vec![0.1, 0.0]]);
        let w = p_delta_witness(&a, 1, 0, -0.1).unwrap();
        assert_eq!(w.p.as_slice(), &[1.0]);
    }

    #[test]
    fn witness_radius_for_opposed_rows() {
        // rows: -0.5 everywhere / +0.5 everywhere; eps = (−0.25 + 0.5) / (0.5 + 0.5)
        let a = InteractionMatrix::from_rows(&[
            vec![-0.5, -0.5, -0.5],
            vec![0.5, 0.5, 0.5],
            vec![0.0, 0.0, 0.0],
        ]);
        let w = p_delta_witness(&a, 2, 0, -0.25).unwrap();
        assert!((w.epsilon - 0.25f64).abs() < 1e-15);
        assert!(w.p.as_slice()[0] >= 0.875);
        assert!(p_delta_contains(&a, 2, &w.p, -0.25).unwrap());
        assert_eq!(
            p_delta_witness(&a, 2, 1, -0.25),
            Err(LyapunovError::HypothesisFailed { index: 0 })
        );
    }

    #[test]
    fn thm1_scan() {
        assert_eq!(check_thm1(&InteractionMatrix::<f64>::zeros(3), 3), Some(0));
        assert_eq!(check_thm1(op(NamedOperator::W1).matrix(), 2), None);
        let a = InteractionMatrix::from_rows(&[
            vec![-0.1, 0.2, 0.0],
            vec![-0.2, -0.1, 0.0],
            vec![0.0, 0.0, 0.0],
        ]);
        assert_eq!(check_thm1(&a, 2), Some(1));
    }

    #[test]
    fn phi_values() {
        let x = SimplexPoint::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(eval_phi(&ev(&[1.0, 0.0]), &x), 0.2);
        let u = SimplexPoint::<f64>::uniform(4);
        assert!((eval_phi(&ev(&[0.1, 0.2, 0.3, 0.4]), &u) - 0.25).abs() < 1e-15);
        let b = SimplexPoint::new(vec![0.0, 0.4, 0.6]).unwrap();
        assert_eq!(eval_phi(&ev(&[0.0, 1.0]), &b), 0.4);
    }

    #[test]
    fn thm2_scan() {
        let t2 = op(NamedOperator::T2);
        let w = check_thm2(t2.matrix(), 2).unwrap();
        assert_eq!(w.r, 1);
        assert!((w.alpha - 0.4).abs() < 1e-15);
        assert_eq!(check_thm2(&InteractionMatrix::<f64>::zeros(3), 3), None);
        let extreme = InteractionMatrix::from_fn(4, |k, i| if k < 2 && i >= 2 { -1.0 } else { 0.0 });
        assert_eq!(check_thm2(&extreme, 2), Some(DecayWitness { r: 2, alpha: 1.0 }));
    }

    #[test]
    fn simple_evaluations() {
        let x = SimplexPoint::<f64>::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert!((eval_linear_phi(3, &x) - 1.0).abs() < 1e-15);
        assert_eq!(eval_psi(&ev(&[1.0]), &x), 0.2);
        assert_eq!(eval_ratio(1, 2, &SimplexPoint::<f64>::uniform(3)).unwrap(), 1.0);
        assert!(matches!(
            eval_ratio(0, 2, &SimplexPoint::new(vec![0.5, 0.5, 0.0]).unwrap()),
            Err(LyapunovError::Division { .. })
        ));
    }

    #[test]
    fn thm4_pairs() {
        let all = check_thm4(&InteractionMatrix::<f64>::zeros(3), 3);
        assert_eq!(all.len(), 6);
        assert!(all.iter().all(|p| !p.strict));

        let a = InteractionMatrix::from_rows(&[
            vec![-0.3, -0.1, 0.0],
            vec![-0.2, 0.0, 0.1],
            vec![0.3, -0.1, -0.5],
        ]);
        assert!(check_thm4(&a, 1).contains(&RatioPair { p: 0, q: 1, strict: true }));

        let w1 = op(NamedOperator::W1);
        assert!(!check_thm4(w1.matrix(), 2).iter().any(|r| (r.p, r.q) == (1, 0)));
    }

    #[test]
    fn identity_report_is_constant() {
        let id = op(NamedOperator::Identity);
        let x0 = SimplexPoint::new(vec![0.2, 0.3, 0.5]).unwrap();
        let r = empirical_lyapunov_check(&id, &LyapunovFamily::Linear { r: 2 }, &x0, 100, 1e-12).unwrap();
        assert!(r.monotone);
        match r.limit {
            LimitEstimate::Converged(v) => assert!((v - 0.5).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn t2_linear_phi_decays_to_zero() {
        let t2 = op(NamedOperator::T2);
        let r = empirical_lyapunov_check(
            &t2,
            &LyapunovFamily::Linear { r: 1 },
            &SimplexPoint::uniform(3),
            400,
            1e-12,
        )
        .unwrap();
        assert!(r.monotone);
        // x_1 reaches the zero threshold, which ends the interior orbit
        assert_eq!(r.truncated.map(|t| t.coordinate), Some(0));
        assert!(r.last < 1e-13);
        assert!(r.samples > 10);
    }

    #[test]
    fn boundary_start_is_rejected() {
        let t2 = op(NamedOperator::T2);
        let x0 = SimplexPoint::new(vec![0.0, 0.5, 0.5]).unwrap();
        assert_eq!(
            empirical_lyapunov_check(&t2, &LyapunovFamily::Linear { r: 1 }, &x0, 10, 1e-12),
            Err(LyapunovError::NotInterior)
        );
    }

    #[test]
    fn phi_one_step_on_random_points() {
        let t5 = op(NamedOperator::T5);
        let k0 = check_thm1(t5.matrix(), 2).unwrap();
        let w = p_delta_witness(t5.matrix(), 2, k0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let x: SimplexPoint<f64> = random_simplex_point(3, &mut rng);
            let y = t5.apply(&x).unwrap();
            assert!(eval_phi(&w.p, &y) <= eval_phi(&w.p, &x) + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn weighted_am_gm(b in prop::collection::vec(1e-3f64..10.0, 1..8), raw in prop::collection::vec(1e-3f64..1.0, 8)) {
            let raw = &raw[..b.len()];
            let total: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let geo: f64 = b.iter().zip(&p).map(|(bi, pi)| bi.powf(*pi)).product();
            let arith: f64 = b.iter().zip(&p).map(|(bi, pi)| bi * pi).sum();
            prop_assert!(geo <= arith * (1.0 + 1e-12));
        }

        #[test]
        fn lemma1_witness_always_contained(
            ell in 1usize..6,
            extra in 0usize..4,
            k0_frac in 0.0f64..1.0,
            delta in -0.5f64..=0.0,
            seeds in prop::collection::vec(-1.0f64..1.0, 100),
        ) {
            let m = ell + extra;
            let k0 = ((ell as f64) * k0_frac) as usize;
            let a = InteractionMatrix::from_fn(m, |k, i| {
                let s = seeds[(k * m + i) % seeds.len()];
                if k == k0 { -1.0 + (1.0 + delta) * (s + 1.0) / 2.0 } else { s }
            });
            let w = p_delta_witness(&a, ell, k0, delta).unwrap();
            prop_assert!(p_delta_contains(&a, ell, &w.p, delta).unwrap());
        }
    }
}
