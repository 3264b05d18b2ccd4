use alloc::string::String;

use crate::cube::CubeError;
use crate::forms::FormError;
use crate::linalg::LinalgError;

/// Errors of the numerical pipelines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Cube(#[from] CubeError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("integrand has a nonzero coefficient off the top fiber degree (word {0:#b})")]
    Degree(u32),
    #[error("unsupported size: {0}")]
    Scale(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("expression error at {pos}: {msg}")]
    Expr { pos: usize, msg: String },
}

pub type Result<T> = core::result::Result<T, Error>;
