use alloc::string::String;
use alloc::vec::Vec;

use crate::types::Violation;

pub type Result<T> = core::result::Result<T, FanoError>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FanoError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("model failed validation: {}", join_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("continuum relaxation rate is zero; the continuum population has no steady state")]
    ContinuumRelaxationZero,

    #[error("no steady state: the reduced generator is singular with a nonzero source")]
    NoSteadyState,

    #[error("steady state is not unique: kernel dimension {dimension}")]
    DegenerateSteadyState { dimension: usize },

    #[error("ground-state population is zero; transport rate is undefined")]
    SaturatedGround,

    #[error("denominator has real roots (b1^2 - 4 b0 b2 = {discriminant:e} >= 0)")]
    RealDenominatorRoots { discriminant: f64 },

    #[error("need at least {needed} distinct samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("singular least-squares system (condition number {condition:e})")]
    SingularFit { condition: f64 },

    #[error("generator dimension {dimension} exceeds cap {cap} (needs about {bytes} bytes)")]
    DimensionCap {
        dimension: usize,
        cap: usize,
        bytes: u128,
    },

    #[error("coherent part of the generator is singular (undamped mode); {detail}")]
    SingularCoherentPart { detail: String },

    #[error("linear solve failed: {0}")]
    LinearSolve(&'static str),
}

fn join_violations(v: &[Violation]) -> String {
    let mut out = String::new();
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        out.push_str(&x.message);
    }
    out
}
