//! Fixtures shared by the kernel benchmarks in `benches/`.

use hamlab::hamiltonian::{LocalHamiltonian, LocalTerm};
use hamlab::random::{random_hermitian, seeded};
use hamlab::RegisterLayout;

/// Nearest-neighbour chain of random two-qubit Hermitian terms on `n` qubits.
pub fn random_chain(n: usize, seed: u64) -> LocalHamiltonian {
    let mut rng = seeded(seed);
    let terms = (0..n - 1)
        .map(|q| LocalTerm::from_dense(vec![q, q + 1], &random_hermitian(4, &mut rng)).expect("two-qubit term"))
        .collect();
    LocalHamiltonian::new(RegisterLayout::single("Q", n).expect("nonempty register"), terms).expect("valid chain")
}
