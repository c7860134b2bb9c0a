//! Finite-dimensional states on named qubit registers.

mod layout;
pub mod measures;
pub mod schmidt;
mod state;

pub use layout::RegisterLayout;
pub use measures::{
    fannes_bound, fidelity, min_entropy, post_measure, pure_state_distance, shannon_entropy,
    swap_test_circuit_prob, swap_test_prob, trace_norm_distance, vn_entropy,
};
pub use schmidt::{
    align_purification, apply_to_purifier, closest_purification, product_distance_from_reduced, purify,
    purify_minimal, schmidt, top_schmidt_weight, SchmidtTerm,
};
pub use state::{
    cross_reduce, partial_trace_matrix, DensityMatrix, PureState, MAX_DENSE_QUBITS, MAX_PURE_QUBITS,
};
