use thiserror::Error;

use crate::canonical::{derive_canonical, CanonicalError, CanonicalForm, InteractionMatrix};
use crate::classify::{classify, OperatorClass};
use crate::scalar::Real;
use crate::simplex::SimplexPoint;
use crate::tensor::{HeredityTensor, TensorError, ValidationReport};

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("heredity tensor is invalid ({} violation(s))", .0.violations.len())]
    Invalid(ValidationReport),
    #[error("operator is not ℓ-Volterra for any ℓ (flags {0:?})")]
    NotEllVolterra(Vec<bool>),
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// A validated ℓ-Volterra operator together with its class and canonical form.
#[derive(Debug, Clone)]
pub struct LVolterraOperator<T> {
    tensor: HeredityTensor<T>,
    class: OperatorClass,
    canonical: CanonicalForm<T>,
}

impl<T: Real> LVolterraOperator<T> {
    pub fn new(tensor: HeredityTensor<T>) -> Result<Self, OperatorError> {
        let report = tensor.validate();
        if !report.is_valid() {
            return Err(OperatorError::Invalid(report));
        }
        let class = classify(&tensor);
        let ell = class
            .ell()
            .ok_or_else(|| OperatorError::NotEllVolterra(class.volterra_flags.clone()))?;
        let canonical = derive_canonical(&tensor, ell)?;
        Ok(Self {
            tensor,
            class,
            canonical,
        })
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    pub fn ell(&self) -> usize {
        self.canonical.ell
    }

    pub fn tensor(&self) -> &HeredityTensor<T> {
        &self.tensor
    }

    pub fn class(&self) -> &OperatorClass {
        &self.class
    }

    pub fn canonical(&self) -> &CanonicalForm<T> {
        &self.canonical
    }

    pub fn matrix(&self) -> &InteractionMatrix<T> {
        &self.canonical.a
    }

    /// Direct evaluation `V(x)`.
    pub fn apply(&self, x: &SimplexPoint<T>) -> Result<SimplexPoint<T>, TensorError> {
        self.tensor.apply(x)
    }

    /// One iteration step with the clamp-then-renormalize policy.
    pub fn step(&self, x: &SimplexPoint<T>) -> SimplexPoint<T> {
        SimplexPoint::settle(self.tensor.apply_raw(x.coords()))
    }

    pub fn step_canonical(&self, x: &SimplexPoint<T>) -> SimplexPoint<T> {
        SimplexPoint::settle(self.canonical.apply_raw(x.coords()))
    }

    pub fn residual(&self, x: &SimplexPoint<T>) -> T {
        self.tensor.residual(x.coords())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::ClassKind;
    use crate::gen::{named_operator, NamedOperator};

    #[test]
    fn bundles_w1() {
        let op = LVolterraOperator::new(named_operator::<f64>(NamedOperator::W1)).unwrap();
        assert_eq!(op.ell(), 2);
        assert_eq!(op.class().kind, ClassKind::EllVolterra(2));
        assert!((op.matrix().get(0, 1) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_and_unordered() {
        let mut bad: HeredityTensor<f64> = named_operator(NamedOperator::Identity);
        bad.set(0, 0, 0, 0.6).unwrap();
        assert!(matches!(LVolterraOperator::new(bad), Err(OperatorError::Invalid(_))));

        let mut unordered: HeredityTensor<f64> = named_operator(NamedOperator::Identity);
        unordered.set(0, 0, 0, 0.5).unwrap();
        unordered.set(0, 0, 1, 0.5).unwrap();
        assert!(matches!(
            LVolterraOperator::new(unordered),
            Err(OperatorError::NotEllVolterra(_))
        ));
    }
}
