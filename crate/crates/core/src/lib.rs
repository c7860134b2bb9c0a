//! Exact-diagonalization toolkit for entropy and energy questions about local Hamiltonians.
//!
//! The pieces, bottom up:
//!
//! * [`qstate`]: registers, states, partial traces, entropies, distances, purifications.
//! * [`hamiltonian`]: sparse local Hamiltonians, spectra, Gibbs states, free energies.
//! * [`channel`]: gate-sequence Stinespring dilations, channel application, Choi states.
//! * [`clock`]: the channel-to-Hamiltonian clock construction and its history states.
//! * [`protocol`]: extractors, flattening, and the entropy-verification protocol.
//! * [`problems`]: decision-problem instances, brute-force deciders and reductions.

pub mod channel;
pub mod clock;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod problems;
pub mod protocol;
pub mod qstate;
pub mod random;
pub mod tridiag;

pub use error::{Error, Result};
pub use channel::{ChannelSpec, GateStep};
pub use hamiltonian::{LocalHamiltonian, LocalTerm, SpectralSummary};
pub use qstate::{DensityMatrix, PureState, RegisterLayout};
