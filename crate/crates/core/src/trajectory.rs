//! Orbit simulation, convergence and cycle detection, and certified upper
//! bounds for ω-limit sets.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::lyapunov::{check_thm2, check_thm4, eval_linear_phi, eval_phi, p_delta_witness, thm2_alpha, ExponentVector};
use crate::operator::LVolterraOperator;
use crate::scalar::Real;
use crate::simplex::SimplexPoint;
use crate::tol::tolerances;

/// Consecutive small steps required before an orbit counts as converged.
pub const CONVERGENCE_RUN: usize = 10;
pub const DEFAULT_MAX_PERIOD: usize = 64;
/// Additive slack on the geometric envelopes checked by [`verify_omega_bound`].
pub const DECAY_ENVELOPE_SLACK: f64 = 1e-10;
pub const PRODUCT_ENVELOPE_SLACK: f64 = 1e-12;
/// Additive slack on the partial-sum envelope of [`partial_sum_check`].
pub const PARTIAL_SUM_SLACK: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("point has dimension {got}, operator has m = {m}")]
    Dimension { m: usize, got: usize },
    #[error("starting point must lie in the interior of the simplex")]
    NotInterior,
    #[error("starting point is a fixed point (residual {residual})")]
    FixedStart { residual: f64 },
    #[error("decay hypothesis (a_ki < 0 for k <= r < i) fails for r = {r}")]
    DecayHypothesis { r: usize },
    #[error("partial sum {sum} exceeds the geometric envelope {envelope}")]
    EnvelopeExceeded { sum: f64, envelope: f64 },
    #[error("trajectory has no points")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopReason<T> {
    MaxSteps,
    /// `at_step` is where the run of sub-tolerance steps began; `limit` satisfies
    /// `||V(limit) - limit|| <= tol`.
    Converged {
        limit: SimplexPoint<T>,
        tol: T,
        at_step: usize,
    },
    CycleDetected {
        period: usize,
        phase: usize,
    },
    BoundaryHit {
        coordinate: usize,
        step: usize,
    },
}

impl<T: Real> fmt::Display for StopReason<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopReason::MaxSteps => write!(f, "max-steps"),
            StopReason::Converged { limit, at_step, .. } => {
                write!(f, "converged step={at_step} limit={limit}")
            }
            StopReason::CycleDetected { period, phase } => {
                write!(f, "cycle period={period} phase={phase}")
            }
            StopReason::BoundaryHit { coordinate, step } => {
                write!(f, "boundary coordinate={} step={step}", coordinate + 1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub points: Vec<SimplexPoint<T>>,
    /// Iteration index of each recorded point.
    pub steps: Vec<usize>,
    pub stride: usize,
    /// Iterations performed.
    pub step_count: usize,
    pub stop: StopReason<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    pub n_max: usize,
    pub stride: usize,
    pub tol_conv: f64,
    pub detect_cycles: bool,
    pub tol_cycle: f64,
    pub max_period: usize,
    /// Iterate the canonical form instead of the heredity tensor.
    pub use_canonical: bool,
    pub stop_on_boundary: bool,
}

impl SimulationOptions {
    pub fn new(n_max: usize) -> Self {
        let t = tolerances();
        Self {
            n_max,
            stride: 1,
            tol_conv: t.conv,
            detect_cycles: true,
            tol_cycle: t.cycle,
            max_period: DEFAULT_MAX_PERIOD,
            use_canonical: false,
            stop_on_boundary: false,
        }
    }
}

/// Result of scanning an orbit tail for periodicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleScan {
    Cycle { period: usize, phase: usize },
    /// The tail is stationary (period 1), i.e. convergence rather than a cycle.
    Stationary,
    NoCycle,
    /// Fewer than `3T` points for every admissible `T`.
    InsufficientData,
}

impl CycleScan {
    pub fn cycle(self) -> Option<(usize, usize)> {
        match self {
            CycleScan::Cycle { period, phase } => Some((period, phase)),
            _ => None,
        }
    }
}

fn tail_is_periodic<T: Real>(pts: &[SimplexPoint<T>], period: usize, tol: T) -> bool {
    let len = pts.len();
    if len < 3 * period {
        return false;
    }
    (len - 3 * period..len - period).all(|n| pts[n].distance(&pts[n + period]) <= tol)
}

/// Smallest `T <= max_period` such that the trailing `3T` points repeat with period `T`.
/// `offset` is the iteration index of `points[0]`; the phase is the earliest index
/// from which the recorded tail stays periodic, reduced mod `T`.
fn scan_cycle<T: Real>(points: &[SimplexPoint<T>], offset: usize, tol: T, max_period: usize) -> CycleScan {
    let len = points.len();
    if len < 3 {
        return CycleScan::InsufficientData;
    }
    if tail_is_periodic(points, 1, tol) {
        return CycleScan::Stationary;
    }
    let mut enough = false;
    for period in 2..=max_period {
        if len < 3 * period {
            break;
        }
        enough = true;
        if tail_is_periodic(points, period, tol) {
            let mut start = len - 3 * period;
            while start > 0 && points[start - 1].distance(&points[start - 1 + period]) <= tol {
                start -= 1;
            }
            return CycleScan::Cycle {
                period,
                phase: (offset + start) % period,
            };
        }
    }
    if enough {
        CycleScan::NoCycle
    } else {
        CycleScan::InsufficientData
    }
}

/// Periodicity test on a stride-1 orbit.
pub fn detect_cycle<T: Real>(points: &[SimplexPoint<T>], tol_cycle: T, max_period: usize) -> CycleScan {
    scan_cycle(points, 0, tol_cycle, max_period)
}

pub fn simulate<T: Real>(
    op: &LVolterraOperator<T>,
    x0: &SimplexPoint<T>,
    opts: &SimulationOptions,
) -> Result<Trajectory<T>, TrajectoryError> {
    if x0.dim() != op.dim() {
        return Err(TrajectoryError::Dimension {
            m: op.dim(),
            got: x0.dim(),
        });
    }
    let stride = opts.stride.max(1);
    let tol_conv = T::lit(opts.tol_conv);
    let tol_cycle = T::lit(opts.tol_cycle);
    let tol_zero = T::tol(tolerances().zero);
    let watch_boundary = opts.stop_on_boundary && x0.is_interior(tol_zero);
    let window_cap = 3 * opts.max_period + 1;

    let mut points = vec![x0.clone()];
    let mut steps = vec![0];
    let mut window: VecDeque<SimplexPoint<T>> = VecDeque::with_capacity(window_cap + 1);
    window.push_back(x0.clone());
    let mut window_start = 0usize;

    let mut x = x0.clone();
    let mut run = 0usize;
    let mut stop = StopReason::MaxSteps;
    let mut n = 0usize;
    while n < opts.n_max {
        let next = if opts.use_canonical {
            op.step_canonical(&x)
        } else {
            op.step(&x)
        };
        let d = next.distance(&x);
        if d < tol_conv {
            run += 1;
            if run >= CONVERGENCE_RUN {
                // `x` is the current point and `next = V(x)` is within tol_conv of it.
                stop = StopReason::Converged {
                    limit: x.clone(),
                    tol: tol_conv,
                    at_step: n + 1 - run,
                };
                break;
            }
        } else {
            run = 0;
        }
        n += 1;
        x = next;
        if n.is_multiple_of(stride) {
            points.push(x.clone());
            steps.push(n);
        }
        if watch_boundary {
            if let Some(coordinate) = x.coords().iter().position(|&c| c <= tol_zero) {
                stop = StopReason::BoundaryHit { coordinate, step: n };
                break;
            }
        }
        if opts.detect_cycles && d > tol_cycle {
            window.push_back(x.clone());
            if window.len() > window_cap {
                window.pop_front();
                window_start += 1;
            }
            let len = window.len();
            let candidate = (2..=opts.max_period)
                .take_while(|&p| len >= 3 * p)
                .any(|p| window[len - 1].distance(&window[len - 1 - p]) <= tol_cycle);
            if candidate {
                if let CycleScan::Cycle { period, phase } =
                    scan_cycle(window.make_contiguous(), window_start, tol_cycle, opts.max_period)
                {
                    stop = StopReason::CycleDetected { period, phase };
                    break;
                }
            }
        } else if opts.detect_cycles {
            window.clear();
            window.push_back(x.clone());
            window_start = n;
        }
    }
    if *steps.last().unwrap() != n {
        points.push(x);
        steps.push(n);
    }
    Ok(Trajectory {
        points,
        steps,
        stride,
        step_count: n,
        stop,
    })
}

/// Independent orbits over a shared operator, in input order.
pub fn simulate_ensemble<T: Real>(
    op: &LVolterraOperator<T>,
    starts: &[SimplexPoint<T>],
    opts: &SimulationOptions,
) -> Result<Vec<Trajectory<T>>, TrajectoryError> {
    starts.par_iter().map(|x0| simulate(op, x0, opts)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Justification<T> {
    /// Row `k0` of `A` is bounded by `-delta < 0`: the product `prod_{i<ℓ} x_i` vanishes.
    NegativeRow { k0: usize, delta: T },
    /// `x_1 + ... + x_r` decays geometrically with rate parameter `alpha`.
    GeometricDecay { r: usize, alpha: T },
    /// Strictly dominated ratio `x_p / x_q` tends to zero.
    StrictRatio { p: usize, q: usize },
}

impl<T: Real> fmt::Display for Justification<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::NegativeRow { k0, delta } => {
                write!(f, "negative-row k0={} delta={delta}", k0 + 1)
            }
            Justification::GeometricDecay { r, alpha } => write!(f, "geometric-decay r={r} alpha={alpha}"),
            Justification::StrictRatio { p, q } => write!(f, "strict-ratio p={} q={}", p + 1, q + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductBound<T> {
    pub k0: usize,
    pub delta: T,
}

/// A closed set guaranteed to contain ω(x⁰) for every interior non-fixed start.
///
/// Faces are reported, never their relative boundaries: for ℓ < m the sharper
/// boundary estimate known for Volterra operators does not hold in general.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaEstimate<T> {
    /// Coordinates that vanish on ω(x⁰) (0-based).
    pub zero_coordinates: BTreeSet<usize>,
    /// ω(x⁰) ⊆ {x : prod_{i<ℓ} x_i = 0}.
    pub product_zero: Option<ProductBound<T>>,
    pub justification: Vec<Justification<T>>,
}

impl<T> OmegaEstimate<T> {
    pub fn is_empty(&self) -> bool {
        self.zero_coordinates.is_empty() && self.product_zero.is_none()
    }
}

/// Operator-global ω-limit bound assembled from every criterion whose hypothesis holds.
pub fn omega_upper_bound<T: Real>(op: &LVolterraOperator<T>) -> OmegaEstimate<T> {
    let a = op.matrix();
    let ell = op.ell();
    let m = op.dim();
    let tol_zero = T::tol(tolerances().zero);
    let mut est = OmegaEstimate {
        zero_coordinates: BTreeSet::new(),
        product_zero: None,
        justification: Vec::new(),
    };

    let best_row = (0..ell)
        .map(|k| {
            let delta = a.row(k).iter().fold(T::infinity(), |acc, &v| acc.min(-v));
            (k, delta)
        })
        .filter(|&(_, delta)| delta > tol_zero)
        .fold(None, |best: Option<(usize, T)>, cur| match best {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        });
    if let Some((k0, delta)) = best_row {
        est.product_zero = Some(ProductBound { k0, delta });
        est.justification.push(Justification::NegativeRow { k0, delta });
    }

    if let Some(w) = check_thm2(a, ell) {
        est.zero_coordinates.extend(0..w.r);
        est.justification.push(Justification::GeometricDecay {
            r: w.r,
            alpha: w.alpha,
        });
    }

    for pair in check_thm4(a, ell).into_iter().filter(|p| p.strict) {
        est.zero_coordinates.insert(pair.p);
        est.justification.push(Justification::StrictRatio { p: pair.p, q: pair.q });
    }
    debug_assert!(est.zero_coordinates.iter().all(|&c| c < m));
    est
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit<T> {
    /// `1 - α + α φ(x⁰)`.
    pub rho: T,
    /// `max_n x_c^(n) / rho^n` over the simulated steps.
    pub fitted_c: T,
    /// `φ(x⁰)`, the constant the bound guarantees.
    pub bound_c: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateCheck<T> {
    pub coordinate: usize,
    pub final_value: T,
    pub vanished: bool,
    pub decay: Option<DecayFit<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductCheck<T> {
    pub k0: usize,
    pub delta: T,
    /// Exponents of the certified function `prod x_k^{p_k}`, an element of `P_{-δ}`.
    pub exponents: Vec<T>,
    pub certified_max_excess: T,
    /// Diagnostics for the plain product `prod_{i<ℓ} x_i` against `(1-δ)^n` times its start value.
    pub plain_product_exceedances: usize,
    pub plain_product_max_excess: T,
    pub plain_product_final: T,
    /// First step at which the plain product dropped to `tol` or below.
    pub plain_product_below_tol_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FailureKind {
    /// A zero coordinate had not dropped below the tolerance by the last step.
    NotVanished,
    /// A geometric-decay envelope was exceeded.
    DecayEnvelope,
    /// The certified `P_{-δ}` product envelope was exceeded.
    ProductEnvelope,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundFailure<T> {
    pub step: usize,
    pub coordinate: Option<usize>,
    pub kind: FailureKind,
    pub value: T,
    pub bound: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaVerification<T> {
    pub steps: usize,
    pub final_point: SimplexPoint<T>,
    pub coordinates: Vec<CoordinateCheck<T>>,
    pub product: Option<ProductCheck<T>>,
    pub failures: Vec<BoundFailure<T>>,
}

impl<T> OmegaVerification<T> {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Simulates from `x0` and audits the estimate along the orbit.
///
/// Checks: every zero coordinate is at most `tol` at the last step; coordinates
/// covered by a geometric-decay justification satisfy
/// `x_c^(n) <= φ(x⁰) ρ^n + 1e-10` with `ρ = 1 - α + α φ(x⁰)`; when the product bound
/// fired, `prod_k x_k^{p_k}` with `p` the [`p_delta_witness`] element of `P_{-δ}` obeys
/// `<= (1-δ)^n` times its start value `+ 1e-12`. The plain product `prod_{i<ℓ} x_i` is
/// tracked as a diagnostic and never produces a failure.
pub fn verify_omega_bound<T: Real>(
    op: &LVolterraOperator<T>,
    estimate: &OmegaEstimate<T>,
    x0: &SimplexPoint<T>,
    n_steps: usize,
    tol: T,
) -> Result<OmegaVerification<T>, TrajectoryError> {
    let m = op.dim();
    if x0.dim() != m {
        return Err(TrajectoryError::Dimension { m, got: x0.dim() });
    }
    if !x0.is_interior(T::zero()) {
        return Err(TrajectoryError::NotInterior);
    }
    let residual = op.residual(x0);
    if residual <= T::tol(tolerances().fixed) {
        return Err(TrajectoryError::FixedStart {
            residual: residual.as_f64(),
        });
    }
    let ell = op.ell();
    let mut orbit = Vec::with_capacity(n_steps + 1);
    orbit.push(x0.clone());
    for n in 0..n_steps {
        let next = op.step(&orbit[n]);
        orbit.push(next);
    }
    let last = orbit.last().unwrap().clone();
    let mut failures = Vec::new();

    let decay = estimate.justification.iter().find_map(|j| match *j {
        Justification::GeometricDecay { r, alpha } => Some((r, alpha)),
        _ => None,
    });
    let decay_slack = T::lit(DECAY_ENVELOPE_SLACK);
    let mut coordinates = Vec::new();
    for &c in &estimate.zero_coordinates {
        let final_value = last.coords()[c];
        let vanished = final_value <= tol;
        if !vanished {
            failures.push(BoundFailure {
                step: n_steps,
                coordinate: Some(c),
                kind: FailureKind::NotVanished,
                value: final_value,
                bound: tol,
            });
        }
        let fit = decay.filter(|&(r, _)| c < r).map(|(r, alpha)| {
            let phi0 = eval_linear_phi(r, x0);
            let rho = T::one() - alpha + alpha * phi0;
            let mut fitted_c = T::zero();
            let mut rho_n = T::one();
            for (n, x) in orbit.iter().enumerate() {
                let v = x.coords()[c];
                let bound = phi0 * rho_n + decay_slack;
                if v > bound {
                    failures.push(BoundFailure {
                        step: n,
                        coordinate: Some(c),
                        kind: FailureKind::DecayEnvelope,
                        value: v,
                        bound,
                    });
                }
                if rho_n > T::min_positive_value() {
                    fitted_c = fitted_c.max(v / rho_n);
                }
                rho_n *= rho;
            }
            DecayFit {
                rho,
                fitted_c,
                bound_c: phi0,
            }
        });
        coordinates.push(CoordinateCheck {
            coordinate: c,
            final_value,
            vanished,
            decay: fit,
        });
    }

    let product = estimate.product_zero.map(|ProductBound { k0, delta }| {
        let witness = p_delta_witness(op.matrix(), ell, k0, -delta)
            .map(|w| w.p)
            .unwrap_or_else(|_| ExponentVector::vertex(ell, k0));
        let slack = T::lit(PRODUCT_ENVELOPE_SLACK);
        let plain = |x: &SimplexPoint<T>| x.coords()[..ell].iter().fold(T::one(), |acc, &v| acc * v);
        let cert0 = eval_phi(&witness, x0);
        let plain0 = plain(x0);
        let factor = T::one() - delta;
        let mut factor_n = T::one();
        let mut check = ProductCheck {
            k0,
            delta,
            exponents: witness.as_slice().to_vec(),
            certified_max_excess: T::neg_infinity(),
            plain_product_exceedances: 0,
            plain_product_max_excess: T::neg_infinity(),
            plain_product_final: plain(&last),
            plain_product_below_tol_at: None,
        };
        for (n, x) in orbit.iter().enumerate() {
            let cert = eval_phi(&witness, x);
            let cert_bound = factor_n * cert0 + slack;
            check.certified_max_excess = check.certified_max_excess.max(cert - factor_n * cert0);
            if cert > cert_bound {
                failures.push(BoundFailure {
                    step: n,
                    coordinate: None,
                    kind: FailureKind::ProductEnvelope,
                    value: cert,
                    bound: cert_bound,
                });
            }
            let pl = plain(x);
            let excess = pl - factor_n * plain0;
            check.plain_product_max_excess = check.plain_product_max_excess.max(excess);
            if excess > slack {
                check.plain_product_exceedances += 1;
            }
            if check.plain_product_below_tol_at.is_none() && pl <= tol {
                check.plain_product_below_tol_at = Some(n);
            }
            factor_n *= factor;
        }
        check
    });

    Ok(OmegaVerification {
        steps: n_steps,
        final_point: last,
        coordinates,
        product,
        failures,
    })
}

/// `sum_n (x_1 + ... + x_r)` over the recorded orbit, checked against the
/// geometric-series envelope `φ(x⁰) / (α (1 - φ(x⁰))) + 1e-6`.
pub fn partial_sum_check<T: Real>(
    op: &LVolterraOperator<T>,
    traj: &Trajectory<T>,
    r: usize,
) -> Result<T, TrajectoryError> {
    let alpha = thm2_alpha(op.matrix(), op.ell(), r).ok_or(TrajectoryError::DecayHypothesis { r })?;
    let first = traj.points.first().ok_or(TrajectoryError::Empty)?;
    let phi0 = eval_linear_phi(r, first);
    let sum: T = traj.points.iter().map(|x| eval_linear_phi(r, x)).sum();
    let envelope = if phi0 < T::one() {
        phi0 / (alpha * (T::one() - phi0)) + T::lit(PARTIAL_SUM_SLACK)
    } else {
        T::infinity()
    };
    if sum > envelope {
        return Err(TrajectoryError::EnvelopeExceeded {
            sum: sum.as_f64(),
            envelope: envelope.as_f64(),
        });
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{named_operator, NamedOperator};

    fn op(name: NamedOperator) -> LVolterraOperator<f64> {
        LVolterraOperator::new(named_operator(name)).unwrap()
    }

    #[test]
    fn identity_converges_at_step_zero() {
        let id = op(NamedOperator::Identity);
        let x0 = SimplexPoint::new(vec![0.1, 0.2, 0.7]).unwrap();
        let t = simulate(&id, &x0, &SimulationOptions::new(1000)).unwrap();
        match &t.stop {
            StopReason::Converged { limit, at_step, .. } => {
                assert_eq!(*at_step, 0);
                assert_eq!(limit, &x0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn c1_vertex_swap_is_a_two_cycle() {
        let c1 = op(NamedOperator::C1);
        let t = simulate(&c1, &SimplexPoint::vertex(3, 1), &SimulationOptions::new(1000)).unwrap();
        assert_eq!(t.stop, StopReason::CycleDetected { period: 2, phase: 0 });
        assert_eq!(t.points[1], SimplexPoint::vertex(3, 2));
    }

    #[test]
    fn detect_cycle_cases() {
        let c1 = op(NamedOperator::C1);
        let mut opts = SimulationOptions::new(20);
        opts.detect_cycles = false;
        let t = simulate(&c1, &SimplexPoint::vertex(3, 1), &opts).unwrap();
        assert_eq!(detect_cycle(&t.points, 1e-9, 64).cycle(), Some((2, 0)));

        let still = vec![SimplexPoint::<f64>::uniform(3); 10];
        assert_eq!(detect_cycle(&still, 1e-9, 64), CycleScan::Stationary);
        assert_eq!(detect_cycle(&still[..2], 1e-9, 64), CycleScan::InsufficientData);

        let short = t.points[..5].to_vec();
        assert_eq!(detect_cycle(&short, 1e-9, 64), CycleScan::InsufficientData);
    }

    #[test]
    fn cycle_phase_tracks_entry_step() {
        // one transient point in front of the vertex cycle
        let c1 = op(NamedOperator::C1);
        let mut pts = vec![SimplexPoint::new(vec![0.2, 0.4, 0.4]).unwrap()];
        let mut x = SimplexPoint::vertex(3, 1);
        for _ in 0..9 {
            pts.push(x.clone());
            x = c1.step(&x);
        }
        assert_eq!(detect_cycle(&pts, 1e-9, 8).cycle(), Some((2, 1)));
    }

    #[test]
    fn stride_records_every_kth_point_and_the_last() {
        let w1 = op(NamedOperator::W1);
        let mut opts = SimulationOptions::new(25);
        opts.stride = 10;
        let t = simulate(&w1, &SimplexPoint::uniform(3), &opts).unwrap();
        assert_eq!(t.steps, vec![0, 10, 20, 25]);
        assert_eq!(t.stop, StopReason::MaxSteps);
    }

    #[test]
    fn consecutive_points_are_related_by_the_operator() {
        let w1 = op(NamedOperator::W1);
        let t = simulate(&w1, &SimplexPoint::uniform(3), &SimulationOptions::new(500)).unwrap();
        for pair in t.points.windows(2) {
            assert!(w1.apply(&pair[0]).unwrap().distance(&pair[1]) <= 1e-10);
        }
    }

    #[test]
    fn canonical_and_direct_orbits_agree() {
        let w1 = op(NamedOperator::W1);
        let mut opts = SimulationOptions::new(200);
        let a = simulate(&w1, &SimplexPoint::uniform(3), &opts).unwrap();
        opts.use_canonical = true;
        let b = simulate(&w1, &SimplexPoint::uniform(3), &opts).unwrap();
        for (x, y) in a.points.iter().zip(&b.points) {
            assert!(x.distance(y) < 1e-12);
        }
    }

    #[test]
    fn boundary_stop() {
        let t2 = op(NamedOperator::T2);
        let mut opts = SimulationOptions::new(10_000);
        opts.stop_on_boundary = true;
        let t = simulate(&t2, &SimplexPoint::uniform(3), &opts).unwrap();
        assert!(matches!(t.stop, StopReason::BoundaryHit { coordinate: 0, .. }));
    }

    #[test]
    fn omega_estimates_for_named_operators() {
        let t5 = omega_upper_bound(&op(NamedOperator::T5));
        let pb = t5.product_zero.unwrap();
        assert_eq!(pb.k0, 0);
        assert!((pb.delta - 0.4).abs() < 1e-15);

        let t2 = omega_upper_bound(&op(NamedOperator::T2));
        assert!(t2.zero_coordinates.contains(&0));
        assert!(t2.justification.iter().any(
            |j| matches!(j, Justification::GeometricDecay { r: 1, alpha } if (alpha - 0.4).abs() < 1e-15)
        ));

        assert!(omega_upper_bound(&op(NamedOperator::Identity)).is_empty());
    }

    #[test]
    fn t2_envelope_and_partial_sum() {
        let t2 = op(NamedOperator::T2);
        let est = omega_upper_bound(&t2);
        let v = verify_omega_bound(&t2, &est, &SimplexPoint::uniform(3), 200, 1e-8).unwrap();
        assert!(v.passed(), "{:?}", v.failures);
        let fit = v.coordinates[0].decay.as_ref().unwrap();
        assert!(fit.fitted_c <= fit.bound_c + 1e-12);

        let mut opts = SimulationOptions::new(200);
        opts.detect_cycles = false;
        let traj = simulate(&t2, &SimplexPoint::uniform(3), &opts).unwrap();
        let s = partial_sum_check(&t2, &traj, 1).unwrap();
        assert!(s <= 1.25 + 1e-6);
    }

    #[test]
    fn partial_sum_edge_cases() {
        let t2 = op(NamedOperator::T2);
        let mut opts = SimulationOptions::new(50);
        opts.detect_cycles = false;
        let x0 = SimplexPoint::new(vec![0.0, 0.5, 0.5]).unwrap();
        let traj = simulate(&t2, &x0, &opts).unwrap();
        assert_eq!(partial_sum_check(&t2, &traj, 1).unwrap(), 0.0);

        let id = op(NamedOperator::Identity);
        let traj = simulate(&id, &SimplexPoint::uniform(3), &opts).unwrap();
        assert_eq!(
            partial_sum_check(&id, &traj, 1),
            Err(TrajectoryError::DecayHypothesis { r: 1 })
        );
    }

    #[test]
    fn t5_certified_product_envelope() {
        let t5 = op(NamedOperator::T5);
        let est = omega_upper_bound(&t5);
        let v = verify_omega_bound(&t5, &est, &SimplexPoint::uniform(3), 100, 1e-8).unwrap();
        let pc = v.product.as_ref().unwrap();
        assert!(pc.certified_max_excess <= 1e-12);
        assert!(pc.plain_product_below_tol_at.unwrap() <= 100);
        assert!(v.passed(), "{:?}", v.failures);
    }

    #[test]
    fn identity_verification_is_vacuous() {
        let id = op(NamedOperator::Identity);
        let est = omega_upper_bound(&id);
        let x0 = SimplexPoint::new(vec![0.2, 0.3, 0.5]).unwrap();
        // every point is fixed under the identity
        assert!(matches!(
            verify_omega_bound(&id, &est, &x0, 10, 1e-8),
            Err(TrajectoryError::FixedStart { .. })
        ));
    }

    #[test]
    fn ensemble_preserves_order() {
        let w1 = op(NamedOperator::W1);
        let starts: Vec<_> = (0..3).map(|i| SimplexPoint::vertex(3, i)).collect();
        let trajs = simulate_ensemble(&w1, &starts, &SimulationOptions::new(50)).unwrap();
        for (t, s) in trajs.iter().zip(&starts) {
            assert_eq!(&t.points[0], s);
        }
    }
}
