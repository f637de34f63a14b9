use thiserror::Error;

/// Errors raised by the calculus and the solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("one-sided limit {side} does not exist at {t} (domain [{lo}, {hi}])")]
    Side {
        t: f64,
        side: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("degenerate affine map (scale = 0)")]
    DegenerateMap,

    #[error("polynomial degree {degree} exceeds the cap of {cap}")]
    DegreeOverflow { degree: usize, cap: usize },

    #[error("shape is not normalized: integral over J is {mass}")]
    Normalization { mass: f64 },

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("profile at {tau} is not absolutely continuous; the derivative is only defined for smooth profiles")]
    NotDifferentiable { tau: f64 },

    #[error("atom at {tau} carries point weights; no delta-sequence exists for it")]
    LambdaAtom { tau: f64 },

    #[error("non-finite state encountered at t = {t}")]
    Divergence { t: f64 },

    #[error("mollifier window at {tau} is resolved by {substeps} steps, at least {required} needed")]
    Resolution {
        tau: f64,
        substeps: usize,
        required: usize,
    },

    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { pos: usize, name: String },

    #[error("variable index x{index} at {pos} is out of range 1..={dim}")]
    VariableIndex { pos: usize, index: usize, dim: usize },

    #[error("evaluation failed: {0}")]
    Evaluation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
