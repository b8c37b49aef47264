//! Steady states and reservoir-temperature response functions for a
//! driven two-level system coupled to a damped bosonic mode.
//!
//! The physical setting is a two-level atom (decay rate γ, thermal
//! occupation m_th) exchanging excitations with a single field mode
//! (decay rate κ, thermal occupation n_th) through a drive of strength g
//! that creates or destroys k field quanta per atomic flip, k ∈ {0, 1, 2}.
//! The crate builds the Liouvillian of the resulting master equation,
//! solves for its steady state, extracts the subsystem energies and
//! differentiates them against either reservoir temperature. Negative
//! response, energy dropping as a reservoir heats up, is the signature
//! these tools exist to map out.
//!
//! Module layout:
//! - [`sparse`]: complex CSR matrices sized for superoperators.
//! - [`linalg`]: dense least squares and eigenvalue routines.
//! - [`qops`]: Fock/atom operators, density matrices, expectations.
//! - [`model`]: system parameters, Hamiltonian, collapse channels.
//! - [`solver`]: Liouvillian assembly, steady-state solvers, cutoff
//!   adaptation.
//! - [`thermo`]: energies, response functions, carrier closed forms,
//!   sign-change location.

pub mod linalg;
pub mod model;
pub mod qops;
pub mod solver;
pub mod sparse;
pub mod thermo;

pub use model::{default_n_fock, ModelError, SystemParams};
pub use num_complex::Complex64;
pub use qops::{DensityMatrix, Operator, QopsError};
pub use solver::{
    auto_truncate, steady_state_at_cutoff, SolveMethod, SolverConfig, SolverError,
    SteadyStateResult,
};
pub use thermo::{
    response_sample, ReferenceFrequencies, ResponseMode, ResponseObservable, ResponseSample,
    ThermoError, ThermoPoint,
};
