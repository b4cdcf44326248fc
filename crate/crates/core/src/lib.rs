//! Jaynes-Cummings dynamics in its Fock-space lattice form.
//!
//! The qubit-oscillator Hilbert space splits into two uncoupled parity chains,
//! each a semi-infinite tight-binding lattice with hopping `g sqrt(n + 1)`,
//! a linear ramp `n w` and an alternating offset `+-w0/2`. This crate builds
//! those chains, propagates states on them, compares against closed-form
//! results and designs the curved waveguide array that realizes them.

pub mod analysis;
pub mod cli;
pub mod design;
pub mod eigen;
pub mod error;
pub mod io;
pub mod model;
pub mod oracles;
pub mod propagate;

pub use error::{Error, Result};
pub use model::{
    build_chain_hamiltonian, build_product_hamiltonian, chains_to_product, coupling, product_to_chains, Basis,
    ChainHamiltonian, ChainId, JcParams, ProductHamiltonian, Qubit, StateVector,
};
pub use propagate::{
    choose_truncation, extract_observables, spectral_propagate, stepper_propagate, ObservableSeries, TimeGrid,
    Trajectory,
};
