//! Quantum-trajectory simulation of two three-level atoms in a leaky cavity.
//!
//! The crate builds the conditional Hamiltonian and emission channels of the
//! atom–cavity system ([`model`]), unravels the master equation into
//! event-driven Monte Carlo wavefunction trajectories ([`trajectory`],
//! [`propagator`]), integrates the master equation directly ([`lindblad`]),
//! evaluates the adiabatically eliminated model and its closed-form
//! timescales ([`effective`]), and analyses the photon record as a random
//! telegraph signal, including the dark-period entanglement protocol
//! ([`telegraph`]).

pub mod config;
pub mod effective;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod lindblad;
pub mod model;
pub mod propagator;
pub mod telegraph;
pub mod trajectory;
pub mod validate;

pub use error::{Error, Result};
pub use model::ModelParams;
pub use trajectory::{InitialState, Simulator};
