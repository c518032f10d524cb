//! Crate-wide error type.

use thiserror::Error;

use crate::index::ExtIndex;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum MomentError {
    #[error("missing moment entry s[{m},{n}]")]
    MissingMoment { m: i32, n: i32 },

    #[error("missing extended moment entry at {index:?}")]
    MissingExtMoment { index: ExtIndex },

    #[error("matrix is not Hermitian: residual {residual:e} exceeds tolerance {tol:e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eig:e}")]
    NotPsd { min_eig: f64 },

    #[error("core coordinate family does not span the GNS space (rank {rank} of {dim})")]
    CoreDeficient { rank: usize, dim: usize },

    #[error("operator is not symmetric: residual {residual:e}")]
    NotSymmetric { residual: f64 },

    #[error("operator pair does not commute: residual {residual:e}")]
    NotCommuting { residual: f64 },

    #[error("shifted operator is singular")]
    SingularShift,

    #[error("no basis jointly diagonalizes the operator pair: off-diagonal residual {residual:e}")]
    DiagonalizationFailed { residual: f64 },

    #[error("linear system is inconsistent: residual {residual:e}")]
    Inconsistent { residual: f64 },

    #[error("moment recurrence identities violated: residual {residual:e}")]
    RecurrenceFail { residual: f64 },

    #[error("recovered measure does not reproduce the input moments: residual {residual:e}")]
    ReconstructionFail { residual: f64 },

    #[error("moment table breaks conjugation symmetry: residual {residual:e}")]
    ConjugationFail { residual: f64 },

    #[error("binomial degree {degree} exceeds the exact-arithmetic limit {limit}")]
    DegreeTooLarge { degree: i32, limit: i32 },

    #[error("complex moment table is not consistent with any planar measure: residual {residual:e}")]
    ConsistencyFail { residual: f64 },
}
