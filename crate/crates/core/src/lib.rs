//! Fidelity, participation ratio and Loschmidt echo near quantum phase
//! transitions driven by a single bosonic zero mode.
//!
//! The Dicke and Lipkin-Meshkov-Glick models are treated through their
//! effective quadratic theories, and the Dicke model additionally by exact
//! diagonalization in a truncated Hilbert space.

pub mod dicke;
pub mod echo;
pub mod error;
pub mod linalg;
pub mod lmg;
pub mod squeeze;

pub use dicke::{
    DickeParams, ModeSpectrum, Phase, RotationMode, ScalingPair, SolverOptions, TruncatedDicke,
};
pub use echo::{CollapseReport, EchoMeta, EchoSeries, SemiclassicalParams};
pub use error::{Error, Result};
pub use linalg::{EigenDecomposition, SymmetricMatrix};
pub use lmg::{LmgMode, LmgParams, LmgPhase};
pub use squeeze::{GroundExpansion, SqueezeMap};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
