//! Knowledge-level transitions.
//!
//! * induction turns labeled observations into an interval classifier and,
//!   when it is accurate enough, promotes the attribute into the Ontology;
//! * abduction speculates new Invented rules when an attribute is rejected
//!   or a sample cannot be classified;
//! * verification accepts or refutes hypotheses from activation samples.

pub mod abduction;
pub mod induction;
pub mod promotion;
pub mod stats;
pub mod verification;

use thiserror::Error;

use crate::knowledge::{KnowledgeError, Term};
use crate::scalar::Scalar;

pub use abduction::{abduce, ABDUCTION_DEPTH};
pub use induction::{induce_interval_rules, induce_from_samples, Classification, Interval, IntervalRule};
pub use promotion::{evaluate_promotion, PromotionOutcome};
pub use stats::{distribution_converged, wilson_interval, WilsonInterval};
pub use verification::{apply_verification, record_activation, verify_hypothesis};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LifecycleError {
    #[error("induction needs at least two observations with two distinct labels")]
    InsufficientData,
    #[error("observations mix attributes `{0}` and `{1}`")]
    MixedAttributes(Term, Term),
    #[error("observation of `{0}` is not numeric")]
    NonNumericValues(Term),
    #[error("observation of `{0}` carries no label")]
    Unlabeled(Term),
    #[error("hypothesis {0} is already {1}")]
    StateViolation(String, &'static str),
    #[error("invalid threshold: {0}")]
    InvalidThresholds(String),
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
}

/// Decision parameters for the lifecycle transitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds<T: Scalar = f64> {
    /// Minimum leave-one-out accuracy for promotion.
    pub theta_induction: T,
    /// Success rate a hypothesis must be shown to exceed.
    pub p_min: T,
    /// Normal quantile for the Wilson interval.
    pub z: T,
    /// Activations required before any verdict.
    pub n_min: u32,
    /// Largest coefficient of variation accepted as converged.
    pub cv_max: T,
    /// Samples per convergence window.
    pub window: usize,
}

impl<T: Scalar> Default for Thresholds<T> {
    fn default() -> Self {
        Thresholds {
            theta_induction: T::from_f64_lossy(0.8),
            p_min: T::from_f64_lossy(0.8),
            z: T::from_f64_lossy(1.96),
            n_min: 10,
            cv_max: T::from_f64_lossy(0.25),
            window: 20,
        }
    }
}

impl<T: Scalar> Thresholds<T> {
    pub fn validate(&self) -> Result<(), LifecycleError> {
        let fraction = |name: &str, v: T| {
            if v > T::zero() && v < T::one() {
                Ok(())
            } else {
                Err(LifecycleError::InvalidThresholds(format!(
                    "{name} = {v} is outside (0, 1)"
                )))
            }
        };
        fraction("theta_induction", self.theta_induction)?;
        fraction("p_min", self.p_min)?;
        fraction("cv_max", self.cv_max)?;
        if !(self.z > T::zero()) || !self.z.is_finite() {
            return Err(LifecycleError::InvalidThresholds(format!(
                "z = {} must be positive",
                self.z
            )));
        }
        if self.n_min < 1 {
            return Err(LifecycleError::InvalidThresholds("n_min must be at least 1".into()));
        }
        if self.window < 1 {
            return Err(LifecycleError::InvalidThresholds("window must be at least 1".into()));
        }
        Ok(())
    }

    /// Overrides one threshold by name, as written in scenario files.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), LifecycleError> {
        let bad = || LifecycleError::InvalidThresholds(format!("`{key}` cannot be `{value}`"));
        let scalar = || value.parse::<T>().map_err(|_| bad());
        match key {
            "theta_induction" => self.theta_induction = scalar()?,
            "p_min" => self.p_min = scalar()?,
            "z" => self.z = scalar()?,
            "cv_max" => self.cv_max = scalar()?,
            "n_min" => self.n_min = value.parse().map_err(|_| bad())?,
            "window" => self.window = value.parse().map_err(|_| bad())?,
            _ => {
                return Err(LifecycleError::InvalidThresholds(format!(
                    "unknown threshold `{key}`"
                )))
            }
        }
        Ok(())
    }
}
