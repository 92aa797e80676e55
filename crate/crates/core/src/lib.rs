//! Teleportation fidelity of a quantum-network node whose memories decohere
//! while qubits queue.
//!
//! A node receives teleportation requests and EPR pairs as two Poisson
//! streams feeding two finite memories where at most one is ever nonempty.
//! The crate computes the resulting average teleportation fidelity three
//! independent ways and cross-validates them:
//!
//! * [`qmath`] — exact density-matrix evolution and the closed-form fidelity
//!   curves it induces (`F(t) = c + a e^{-rt}`).
//! * [`markov`] + [`laplace`] — steady-state occupancy of the double queue,
//!   per-discipline wait-time Laplace transforms (FIFO/LIFO, infinite and
//!   pushout buffers), and the phase-conditioned fidelity mixture.
//! * [`sim`] — a seeded discrete-event simulator of the same system under
//!   pluggable buffer policies.
//!
//! [`sched_opt`] makes the optimality argument for LIFO with pushout
//! executable (weak supermajorization, interchange steps, trace property
//! checks), and [`repeater`] applies the double-queue model to a single
//! entanglement-swapping repeater.

pub mod bessel;
pub mod errata;
pub mod error;
pub mod laplace;
pub mod markov;
pub mod qmath;
pub mod quad;
pub mod repeater;
pub mod sched_opt;
pub mod sim;

pub use error::{Error, Result};
