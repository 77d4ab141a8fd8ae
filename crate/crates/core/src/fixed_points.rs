//! Fixed points: vertices, interior points of 2-faces, the partial fixed-point
//! sets `X_j`, and damped numeric search.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::canonical::InteractionMatrix;
use crate::operator::LVolterraOperator;
use crate::scalar::Real;
use crate::simplex::SimplexPoint;
use crate::tensor::HeredityTensor;
use crate::tol::tolerances;

pub const DEFAULT_DAMPING: f64 = 0.5;
/// Numeric fixed points closer than this (max norm) are merged.
pub const DEDUP_RADIUS: f64 = 1e-8;
/// Up to this dimension every face barycenter seeds the numeric search; above it
/// only vertices, edge midpoints and the simplex barycenter do.
pub const ALL_FACES_MAX_M: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FixedPointError {
    #[error("indices ({p}, {q}, {r}) must be distinct and below m = {m}")]
    Indices { p: usize, q: usize, r: usize, m: usize },
    #[error(
        "face ({}, {}, {}) passed all conditions but x* has residual {residual}",
        p + 1, q + 1, r + 1
    )]
    Inconsistent { p: usize, q: usize, r: usize, residual: f64 },
    #[error("point has dimension {got}, operator has m = {m}")]
    Dimension { m: usize, got: usize },
    #[error("lambda = {0} is outside [0, 1]")]
    Lambda(f64),
    #[error("{0} is not in X_ℓ")]
    NotInXEll(&'static str),
    #[error("supp_ℓ x = {x:?} differs from supp_ℓ y = {y:?}")]
    SupportMismatch { x: Vec<usize>, y: Vec<usize> },
    #[error("convex combination left X_ℓ (residual {residual})")]
    BlendLeftXEll { residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FixedPointKind {
    Vertex(usize),
    FaceInterior(usize, usize, usize),
    Numeric,
}

impl fmt::Display for FixedPointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FixedPointKind::Vertex(i) => write!(f, "vertex e({})", i + 1),
            FixedPointKind::FaceInterior(p, q, r) => {
                write!(f, "face-interior ({}, {}, {})", p + 1, q + 1, r + 1)
            }
            FixedPointKind::Numeric => write!(f, "numeric"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceCertificate<T> {
    pub delta: T,
    pub delta1: T,
    pub delta2: T,
    /// `Δ - Δ₁ - Δ₂`.
    pub delta3: T,
    pub signs_agree: bool,
}

impl<T: Real> FaceCertificate<T> {
    fn compute(a: &InteractionMatrix<T>, p: usize, q: usize, r: usize) -> Self {
        let g = |k, i| a.get(k, i);
        let delta = (g(p, r) - g(p, p)) * (g(q, r) - g(q, q)) - (g(p, r) - g(p, q)) * (g(q, r) - g(q, p));
        let delta1 = g(q, r) * g(p, q) - g(p, r) * g(q, q);
        let delta2 = g(p, r) * g(q, p) - g(q, r) * g(p, p);
        let delta3 = delta - delta1 - delta2;
        let eps = T::tol(tolerances().zero);
        let sign = |v: T| {
            if v > eps {
                1
            } else if v < -eps {
                -1
            } else {
                0
            }
        };
        let s = sign(delta);
        let signs_agree = s != 0 && sign(delta1) == s && sign(delta2) == s && sign(delta3) == s;
        Self {
            delta,
            delta1,
            delta2,
            delta3,
            signs_agree,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointRecord<T> {
    pub point: SimplexPoint<T>,
    pub kind: FixedPointKind,
    /// `||V(x) - x||_inf` by direct evaluation.
    pub residual: T,
    pub certificate: Option<FaceCertificate<T>>,
}

impl<T: Real> FixedPointRecord<T> {
    fn certify(tensor: &HeredityTensor<T>, point: SimplexPoint<T>, kind: FixedPointKind) -> Self {
        let residual = tensor.residual(point.coords());
        Self {
            point,
            kind,
            residual,
            certificate: None,
        }
    }
}

impl<T: Real> fmt::Display for FixedPointRecord<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} residual={:e}", self.kind, self.point, self.residual.as_f64())?;
        if let Some(c) = &self.certificate {
            write!(
                f,
                " Δ={} Δ1={} Δ2={} Δ-Δ1-Δ2={}",
                c.delta, c.delta1, c.delta2, c.delta3
            )?;
        }
        Ok(())
    }
}

/// Deterministic output order: by kind, then lexicographically by coordinates.
pub fn sort_records<T: Real>(records: &mut [FixedPointRecord<T>]) {
    records.sort_by(|a, b| {
        a.kind.cmp(&b.kind).then_with(|| {
            a.point
                .coords()
                .iter()
                .zip(b.point.coords())
                .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    });
}

/// Vertex `e^(i)` is fixed exactly when `P_{ii,i} = 1`.
pub fn vertex_fixed_points<T: Real>(p: &HeredityTensor<T>) -> Vec<FixedPointRecord<T>> {
    let tol_zero = T::tol(tolerances().zero);
    let m = p.dim();
    (0..m)
        .filter(|&i| (p.get(i, i, i) - T::one()).abs() <= tol_zero)
        .map(|i| FixedPointRecord::certify(p, SimplexPoint::vertex(m, i), FixedPointKind::Vertex(i)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum FaceRejection<T> {
    /// More than one of the three indices lies above ℓ.
    ConditionA { above_ell: usize },
    /// Some `P_{ij,k} != 0` with `i, j` in the face and `k > ℓ` outside it.
    ConditionB { i: usize, j: usize, k: usize, value: T },
    ConditionC(FaceCertificate<T>),
}

impl<T: Real> fmt::Display for FaceRejection<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaceRejection::ConditionA { above_ell } => {
                write!(f, "condition (a): {above_ell} indices above ℓ")
            }
            FaceRejection::ConditionB { i, j, k, value } => write!(
                f,
                "condition (b): P[{},{},{}] = {value} leaks mass off the face",
                i + 1,
                j + 1,
                k + 1
            ),
            FaceRejection::ConditionC(c) => write!(
                f,
                "condition (c): Δ={} Δ1={} Δ2={} Δ-Δ1-Δ2={}",
                c.delta, c.delta1, c.delta2, c.delta3
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FaceOutcome<T> {
    Found(FixedPointRecord<T>),
    Rejected(FaceRejection<T>),
}

impl<T> FaceOutcome<T> {
    pub fn found(self) -> Option<FixedPointRecord<T>> {
        match self {
            FaceOutcome::Found(r) => Some(r),
            FaceOutcome::Rejected(_) => None,
        }
    }
}

/// The unique interior fixed point of the face spanned by `e^(p), e^(q), e^(r)`.
///
/// If exactly one index exceeds ℓ it is moved into the `r` slot. The returned
/// record's kind carries the labelling actually used.
pub fn face_interior_fixed_point<T: Real>(
    op: &LVolterraOperator<T>,
    p: usize,
    q: usize,
    r: usize,
) -> Result<FaceOutcome<T>, FixedPointError> {
    let m = op.dim();
    let ell = op.ell();
    if p == q || q == r || p == r || p >= m || q >= m || r >= m {
        return Err(FixedPointError::Indices { p, q, r, m });
    }
    let mut face = [p, q, r];
    let above = face.iter().filter(|&&i| i >= ell).count();
    if above > 1 {
        return Ok(FaceOutcome::Rejected(FaceRejection::ConditionA { above_ell: above }));
    }
    if above == 1 {
        let pos = face.iter().position(|&i| i >= ell).unwrap();
        face.swap(pos, 2);
    }
    let [p, q, r] = face;

    let tensor = op.tensor();
    let tol_zero = T::tol(tolerances().zero);
    for k in (ell..m).filter(|k| !face.contains(k)) {
        for (a, &i) in face.iter().enumerate() {
            for &j in &face[a..] {
                let value = tensor.get(i, j, k);
                if value.abs() > tol_zero {
                    return Ok(FaceOutcome::Rejected(FaceRejection::ConditionB { i, j, k, value }));
                }
            }
        }
    }

    let cert = FaceCertificate::compute(op.matrix(), p, q, r);
    if !cert.signs_agree {
        return Ok(FaceOutcome::Rejected(FaceRejection::ConditionC(cert)));
    }
    let mut coords = vec![T::zero(); m];
    coords[p] = cert.delta1 / cert.delta;
    coords[q] = cert.delta2 / cert.delta;
    coords[r] = cert.delta3 / cert.delta;
    let point = SimplexPoint::settle(coords);
    let residual = tensor.residual(point.coords());
    if residual > T::tol(tolerances().fixed) {
        return Err(FixedPointError::Inconsistent {
            p,
            q,
            r,
            residual: residual.as_f64(),
        });
    }
    Ok(FaceOutcome::Found(FixedPointRecord {
        point,
        kind: FixedPointKind::FaceInterior(p, q, r),
        residual,
        certificate: Some(cert),
    }))
}

/// Every admissible triple: at most one index above ℓ (labelled `r`), otherwise
/// `r` is the largest index of the triple.
pub fn enumerate_face_fixed_points<T: Real>(
    op: &LVolterraOperator<T>,
) -> Result<Vec<FixedPointRecord<T>>, FixedPointError> {
    let m = op.dim();
    let ell = op.ell();
    let mut triples = Vec::new();
    for p in 0..m {
        for q in p + 1..m {
            for r in q + 1..m {
                if [p, q, r].iter().filter(|&&i| i >= ell).count() <= 1 {
                    triples.push((p, q, r));
                }
            }
        }
    }
    let outcomes: Result<Vec<_>, _> = triples
        .par_iter()
        .map(|&(p, q, r)| face_interior_fixed_point(op, p, q, r))
        .collect();
    let mut records: Vec<_> = outcomes?.into_iter().filter_map(FaceOutcome::found).collect();
    sort_records(&mut records);
    Ok(records)
}

/// Direct membership in `X_j = {x : V(x)_k = x_k for k < j}` (`j` counts coordinates).
pub fn in_x_j<T: Real>(op: &LVolterraOperator<T>, x: &SimplexPoint<T>, j: usize, tol: T) -> bool {
    let image = op.tensor().apply_raw(x.coords());
    image
        .iter()
        .zip(x.coords())
        .take(j)
        .all(|(&v, &c)| (v - c).abs() <= tol)
}

/// Product test `|x_k (Ax)_k| <= tol` for `k < min(j, ℓ)`; matches [`in_x_j`] for `j <= ℓ`.
pub fn in_x_j_product_test<T: Real>(op: &LVolterraOperator<T>, x: &SimplexPoint<T>, j: usize, tol: T) -> bool {
    let a = op.matrix();
    (0..j.min(op.ell())).all(|k| (x.coords()[k] * a.row_dot(k, x.coords())).abs() <= tol)
}

/// `supp_ℓ x = {i < ℓ : x_i > tol_zero}`.
pub fn supp_ell<T: Real>(x: &[T], ell: usize) -> BTreeSet<usize> {
    let tol_zero = T::tol(tolerances().zero);
    x.iter()
        .take(ell)
        .enumerate()
        .filter(|(_, v)| v.abs() > tol_zero)
        .map(|(i, _)| i)
        .collect()
}

/// Whether `supp_ℓ x` and `supp_ℓ (Ax)` are disjoint.
pub fn supp_condition<T: Real>(a: &InteractionMatrix<T>, ell: usize, x: &SimplexPoint<T>) -> bool {
    let ax = a.mul_vec(x.coords());
    supp_ell(x.coords(), ell).is_disjoint(&supp_ell(&ax, ell))
}

/// `λx + (1-λ)y` for `x, y` in `X_ℓ` with equal ℓ-support, checked to stay in `X_ℓ`.
pub fn blend_in_x_ell<T: Real>(
    op: &LVolterraOperator<T>,
    x: &SimplexPoint<T>,
    y: &SimplexPoint<T>,
    lambda: T,
) -> Result<SimplexPoint<T>, FixedPointError> {
    let m = op.dim();
    for pt in [x, y] {
        if pt.dim() != m {
            return Err(FixedPointError::Dimension { m, got: pt.dim() });
        }
    }
    if !(lambda >= T::zero() && lambda <= T::one()) {
        return Err(FixedPointError::Lambda(lambda.as_f64()));
    }
    let ell = op.ell();
    let tol = T::tol(tolerances().fixed);
    if !in_x_j(op, x, ell, tol) {
        return Err(FixedPointError::NotInXEll("x"));
    }
    if !in_x_j(op, y, ell, tol) {
        return Err(FixedPointError::NotInXEll("y"));
    }
    let (sx, sy) = (supp_ell(x.coords(), ell), supp_ell(y.coords(), ell));
    if sx != sy {
        return Err(FixedPointError::SupportMismatch {
            x: sx.into_iter().collect(),
            y: sy.into_iter().collect(),
        });
    }
    let z = x.blend(y, lambda).expect("dimensions checked");
    if !in_x_j(op, &z, ell, tol) {
        let image = op.tensor().apply_raw(z.coords());
        let residual = image
            .iter()
            .zip(z.coords())
            .take(ell)
            .fold(T::zero(), |acc, (&v, &c)| acc.max((v - c).abs()));
        return Err(FixedPointError::BlendLeftXEll {
            residual: residual.as_f64(),
        });
    }
    Ok(z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericOptions {
    pub seed_count: usize,
    pub tol_fixed: f64,
    pub max_iter: usize,
    /// Damping `β` in `x <- (1-β)x + βV(x)`.
    pub damping: f64,
}

impl NumericOptions {
    pub fn new(seed_count: usize) -> Self {
        Self {
            seed_count,
            tol_fixed: tolerances().fixed,
            max_iter: 10_000,
            damping: DEFAULT_DAMPING,
        }
    }
}

/// Additive-recurrence (Kronecker) points mapped to the open simplex through
/// normalized `-ln u`.
pub fn quasi_random_interior<T: Real>(m: usize, count: usize) -> Vec<SimplexPoint<T>> {
    // phi_m: the positive root of t^(m+1) = t + 1
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (m as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=m).map(|i| phi.powi(-(i as i32)).fract()).collect();
    (1..=count)
        .map(|n| {
            let w: Vec<f64> = alpha
                .iter()
                .map(|a| {
                    let u = (0.5 + a * n as f64).fract().clamp(1e-9, 1.0 - 1e-9);
                    -u.ln()
                })
                .collect();
            let s: f64 = w.iter().sum();
            SimplexPoint::settle(w.iter().map(|v| T::lit(v / s)).collect())
        })
        .collect()
}

/// Barycenters of the faces used as deterministic seeds.
pub fn face_barycenters<T: Real>(m: usize) -> Vec<SimplexPoint<T>> {
    let bary = |support: &[usize]| {
        let w = T::one() / T::from_usize(support.len()).unwrap();
        let mut c = vec![T::zero(); m];
        for &i in support {
            c[i] = w;
        }
        SimplexPoint::settle(c)
    };
    if m <= ALL_FACES_MAX_M {
        (1u32..(1 << m))
            .map(|mask| {
                let support: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
                bary(&support)
            })
            .collect()
    } else {
        let mut seeds: Vec<_> = (0..m).map(|i| bary(&[i])).collect();
        for i in 0..m {
            for j in i + 1..m {
                seeds.push(bary(&[i, j]));
            }
        }
        seeds.push(bary(&(0..m).collect::<Vec<_>>()));
        seeds
    }
}

fn damped_search<T: Real>(op: &LVolterraOperator<T>, seed: &SimplexPoint<T>, opts: &NumericOptions) -> Option<SimplexPoint<T>> {
    let beta = T::lit(opts.damping);
    let keep = T::one() - beta;
    let tol = T::lit(opts.tol_fixed);
    let tensor = op.tensor();
    let mut x = seed.clone();
    for _ in 0..=opts.max_iter {
        let image = tensor.apply_raw(x.coords());
        if crate::scalar::max_abs_diff(&image, x.coords()) <= tol {
            return Some(x);
        }
        x = SimplexPoint::settle(
            x.coords()
                .iter()
                .zip(&image)
                .map(|(&c, &v)| keep * c + beta * v)
                .collect(),
        );
    }
    None
}

/// Damped iteration from quasi-random interior seeds and face barycenters.
///
/// Degenerate operators with continua of fixed points (the identity, for one)
/// return one record per distinct seed.
pub fn numeric_fixed_points<T: Real>(op: &LVolterraOperator<T>, opts: &NumericOptions) -> Vec<FixedPointRecord<T>> {
    let m = op.dim();
    let mut seeds = face_barycenters::<T>(m);
    seeds.extend(quasi_random_interior::<T>(m, opts.seed_count));
    let found: Vec<Option<SimplexPoint<T>>> = seeds.par_iter().map(|s| damped_search(op, s, opts)).collect();

    let radius = T::lit(DEDUP_RADIUS);
    let tol = T::lit(opts.tol_fixed);
    let mut records: Vec<FixedPointRecord<T>> = Vec::new();
    for point in found.into_iter().flatten() {
        let record = FixedPointRecord::certify(op.tensor(), point, FixedPointKind::Numeric);
        if record.residual > tol {
            continue;
        }
        // duplicates keep the representative with the smaller residual
        match records.iter_mut().find(|r| r.point.distance(&record.point) <= radius) {
            Some(existing) if record.residual < existing.residual => *existing = record,
            Some(_) => {}
            None => records.push(record),
        }
    }
    sort_records(&mut records);
    records
}
