//! The Dicke model: effective two-mode theory and exact truncated numerics.

pub mod effective;
pub mod exact;

pub use effective::{
    critical_coupling, fidelity_gaussian, fidelity_scaling, mode_energies, near_critical_gap,
    pair_for_eta, scaling_eta, soft_mode_map, DickeParams, ModeSpectrum, Phase, RotationMode,
    ScalingPair,
};
pub use exact::{
    build_hamiltonian, build_hamiltonian_capped, convergence_d, echo_exact, fidelity_exact,
    ground_state_exact, parity_indices, ConvergenceEntry, ConvergenceSeries, CutoffRule,
    GroundState, Parity, SolverOptions, TruncatedDicke,
};
