//! Small stock circuits used by examples, tests and the CLI.

use super::{ChannelSpec, GateStep};
use crate::error::Result;
use crate::linalg::{cnot, controlled_z, hadamard, swap_gate};

/// Moves A into B unchanged: `Φ(ρ) = ρ`.
pub fn identity_channel(n: usize) -> Result<ChannelSpec> {
    let steps = (0..n).map(|i| GateStep::new(vec![i, n + i], swap_gate())).collect::<Result<Vec<_>>>()?;
    ChannelSpec::new(n, n, steps)
}

/// Random Pauli on every input qubit, selected by two |+⟩ environment qubits each, then moved
/// to B. The twirl is exact, so `Φ(ρ) = Ĩ`.
pub fn fully_depolarizing(n: usize) -> Result<ChannelSpec> {
    let mut steps = Vec::new();
    for i in 0..n {
        let (a, b) = (i, n + i);
        let (ex, ez) = (2 * n + 2 * i, 2 * n + 2 * i + 1);
        steps.push(GateStep::new(vec![ex], hadamard())?);
        steps.push(GateStep::new(vec![ez], hadamard())?);
        steps.push(GateStep::new(vec![ex, a], cnot())?);
        steps.push(GateStep::new(vec![ez, a], controlled_z())?);
        steps.push(GateStep::new(vec![a, b], swap_gate())?);
    }
    ChannelSpec::new(n, n, steps)
}

/// Ignores the input and outputs `|+⟩^{⊗n_b}` on B.
pub fn constant_plus_output(n_a: usize, n_b: usize) -> Result<ChannelSpec> {
    let steps = (0..n_b).map(|i| GateStep::new(vec![n_a + i], hadamard())).collect::<Result<Vec<_>>>()?;
    ChannelSpec::new(n_a, n_b, steps)
}
