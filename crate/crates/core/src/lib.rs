//! Simulation and analysis toolkit for quantum computing with rare-earth-ion
//! doped crystals.
//!
//! The crate is organised along the physical pipeline:
//!
//! - [`crystal`]: random doped crystals, frequency channels and the
//!   thresholded dipole-coupling graph.
//! - [`registers`]: analytic register yields, Monte Carlo register census for
//!   the clique and bus-ion architectures, and classical hole-burning.
//! - [`qsim`]: an exact state-vector engine over four-level ions
//!   (`|0⟩, |1⟩, |aux⟩, |e⟩`) with dipole-blockade gates and the
//!   single-ion-per-channel distillation protocol.
//! - [`entanglement`]: Schmidt decomposition, von Neumann entropy, the
//!   instantaneous entanglement rate and gate trajectories.
//! - [`readout`]: designated read-out ion budgets, qubit readout, chain
//!   characterization, Stark addressing and frequency collisions.
//!
//! All quantities are strict SI (Hz, s, m, C·m) unless a name says otherwise.
//! Hamiltonians handed to the integrators are in angular units (rad/s) with
//! ħ = 1.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crystal;
pub mod entanglement;
pub mod level;
pub mod qsim;
pub mod readout;
pub mod registers;
pub mod seeding;
pub mod stats;

pub use level::{Level, Species};
