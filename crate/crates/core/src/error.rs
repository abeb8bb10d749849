use core::fmt;

use crate::arproc::ManifoldKind;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("input contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: Shape, found: Shape },

    #[error("invalid dimension: {0}")]
    InvalidDimension(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("matrix is not orthonormal (residual {residual:e})")]
    NotOrthonormal { residual: f64 },

    #[error("matrix is not antisymmetric (residual {residual:e})")]
    NotAntisymmetric { residual: f64 },

    #[error("matrix is not in SO(n) (determinant {det})")]
    NotSpecialOrthogonal { det: f64 },

    #[error("rotation angle {angle} is too close to pi for a principal logarithm")]
    BranchAmbiguity { angle: f64 },

    #[error("tangent vector does not satisfy the tangency condition (residual {residual:e})")]
    InvalidTangent { residual: f64 },

    #[error("points are outside a common chart{}", step_suffix(*step))]
    OutOfChart { step: Option<usize>, condition: f64 },

    #[error("expected a {expected} trajectory, found {found}")]
    WrongManifold {
        expected: &'static str,
        found: ManifoldKind,
    },

    #[error("trajectory needs at least two points")]
    TrajectoryTooShort,

    #[error("line search produced a non-finite value at tau = {tau}")]
    LineSearch { tau: f64 },

    #[error("Karcher iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
}

fn step_suffix(step: Option<usize>) -> StepSuffix {
    StepSuffix(step)
}

struct StepSuffix(Option<usize>);

impl fmt::Display for StepSuffix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(j) => write!(f, " at step {j}"),
            None => Ok(()),
        }
    }
}

/// Row/column shape carried by dimension errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape(pub usize, pub usize);

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.0, self.1)
    }
}

impl Error {
    pub(crate) fn shape(expected: (usize, usize), found: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            expected: Shape(expected.0, expected.1),
            found: Shape(found.0, found.1),
        }
    }

    /// Attach a trajectory step index to an out-of-chart error.
    pub(crate) fn at_step(self, j: usize) -> Self {
        match self {
            Error::OutOfChart { condition, .. } => Error::OutOfChart {
                step: Some(j),
                condition,
            },
            other => other,
        }
    }
}
