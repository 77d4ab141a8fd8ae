//! ℓ-Volterra quadratic stochastic operators on the simplex.
//!
//! A quadratic stochastic operator maps a probability vector `x` to
//! `x'_k = sum_{i,j} P_{ij,k} x_i x_j`. This crate validates heredity tensors,
//! classifies them as ℓ-Volterra, derives their canonical form, and provides
//! Lyapunov functions, ω-limit upper bounds, fixed-point finders and orbit
//! simulation on top of it.
//!
//! All numerical types are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64` or `f32`. Indices are 0-based in the API and
//! 1-based in files and CLI output.

pub mod canonical;
pub mod classify;
pub mod export;
pub mod fixed_points;
pub mod format;
pub mod gen;
pub mod lyapunov;
pub mod operator;
pub mod scalar;
pub mod simplex;
pub mod tensor;
pub mod tol;
pub mod trajectory;

pub use canonical::{derive_canonical, CanonicalError, CanonicalForm, InteractionMatrix, ResidualTerm};
pub use classify::{classify, volterra_first_permutation, ClassKind, OperatorClass};
pub use export::{export_ternary, export_trajectory, ExportError};
pub use fixed_points::{
    enumerate_face_fixed_points, face_interior_fixed_point, numeric_fixed_points, vertex_fixed_points, FaceOutcome,
    FixedPointError, FixedPointKind, FixedPointRecord, NumericOptions,
};
pub use format::{FormatError, OperatorDocument};
pub use gen::{named_operator, random_operator, GenError, GenSpec, NamedOperator};
pub use operator::{LVolterraOperator, OperatorError};
pub use scalar::Real;
pub use simplex::{SimplexError, SimplexPoint};
pub use tensor::{validate_dense, HeredityTensor, TensorError, ValidationReport, Violation};
pub use tol::{set_tolerances, tolerances, Tolerances};
pub use trajectory::{
    omega_upper_bound, simulate, verify_omega_bound, OmegaEstimate, SimulationOptions, StopReason, Trajectory,
    TrajectoryError,
};

pub type SimplexPoint64 = SimplexPoint<f64>;
pub type SimplexPoint32 = SimplexPoint<f32>;
pub type HeredityTensor64 = HeredityTensor<f64>;
pub type HeredityTensor32 = HeredityTensor<f32>;
pub type CanonicalForm64 = CanonicalForm<f64>;
pub type CanonicalForm32 = CanonicalForm<f32>;
pub type InteractionMatrix64 = InteractionMatrix<f64>;
pub type InteractionMatrix32 = InteractionMatrix<f32>;
pub type Operator64 = LVolterraOperator<f64>;
pub type Operator32 = LVolterraOperator<f32>;
pub type Trajectory64 = Trajectory<f64>;
pub type Trajectory32 = Trajectory<f32>;
pub type FixedPointRecord64 = FixedPointRecord<f64>;
pub type FixedPointRecord32 = FixedPointRecord<f32>;
