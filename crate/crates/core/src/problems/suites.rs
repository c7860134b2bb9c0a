//! Small labelled instance families with known answers, shared by tests, benches and the CLI.
//!
//! PPIO circuits use one input qubit and a two-qubit output: `A = 0`, `B = 1, 2`. With a single
//! output qubit every two-dimensional output subspace contains a product vector, so NO
//! instances need the larger B.

use super::{Decision, MaxOutQeaInstance, PpioInstance};
use crate::channel::library::{fully_depolarizing, identity_channel};
use crate::channel::{ChannelSpec, GateStep};
use crate::error::Result;
use crate::linalg::{cnot, hadamard, identity, swap_gate};
use crate::random::{haar_unitary, seeded};

#[derive(Clone, Debug)]
pub struct PpioCase {
    pub name: String,
    pub instance: PpioInstance,
    pub expected: Decision,
}

#[derive(Clone, Debug)]
pub struct MaxOutQeaCase {
    pub name: String,
    pub instance: MaxOutQeaInstance,
    pub expected: Decision,
}

const OUTPUT_QUBITS: usize = 2;

fn ppio(name: &str, steps: Vec<GateStep>, expected: Decision) -> Result<PpioCase> {
    let circuit = ChannelSpec::new(1, OUTPUT_QUBITS, steps)?;
    Ok(PpioCase { name: name.into(), instance: PpioInstance::new(circuit, 0.0, std::f64::consts::SQRT_2)?, expected })
}

/// Leaves A maximally entangled with B for every input: B starts as a Bell pair, then A is
/// mixed into it by two CNOTs.
fn bell_isometry() -> Result<Vec<GateStep>> {
    Ok(vec![
        GateStep::new(vec![1], hadamard())?,
        GateStep::new(vec![1, 2], cnot())?,
        GateStep::new(vec![0, 2], cnot())?,
        GateStep::new(vec![1, 0], cnot())?,
    ])
}

/// Three YES isometries (some input stays product) and three NO isometries (every input ends
/// maximally entangled). The random local dressings are drawn from `seed`.
pub fn ppio_suite(seed: u64) -> Result<Vec<PpioCase>> {
    let mut rng = seeded(seed);
    let mut dressed_a = bell_isometry()?;
    dressed_a.push(GateStep::new(vec![0], haar_unitary(2, &mut rng))?);
    let mut dressed_b = bell_isometry()?;
    dressed_b.push(GateStep::new(vec![1, 2], haar_unitary(4, &mut rng))?);
    Ok(vec![
        ppio("idle", vec![GateStep::new(vec![0], identity(2))?], Decision::Yes)?,
        ppio("swap-in", vec![GateStep::new(vec![0, 1], swap_gate())?], Decision::Yes)?,
        ppio("cnot", vec![GateStep::new(vec![0, 1], cnot())?], Decision::Yes)?,
        ppio("bell-isometry", bell_isometry()?, Decision::No)?,
        ppio("bell-isometry-local-a", dressed_a, Decision::No)?,
        ppio("bell-isometry-local-b", dressed_b, Decision::No)?,
    ])
}

/// A one-qubit twirl (YES at `τ = 0`: output entropy 1) and the one-qubit identity at `τ = 1`
/// (NO: output entropy never exceeds 1).
pub fn maxoutqea_suite() -> Result<Vec<MaxOutQeaCase>> {
    Ok(vec![
        MaxOutQeaCase { name: "depolarizing".into(), instance: MaxOutQeaInstance::new(fully_depolarizing(1)?, 0.0)?, expected: Decision::Yes },
        MaxOutQeaCase { name: "identity".into(), instance: MaxOutQeaInstance::new(identity_channel(1)?, 1.0)?, expected: Decision::No },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{decide_maxoutqea, decide_ppio, DeciderOptions};

    #[test]
    fn ppio_labels_match_the_decider() {
        let opts = DeciderOptions::default();
        for case in ppio_suite(5).unwrap() {
            let v = decide_ppio(&case.instance, &opts).unwrap();
            assert_eq!(v.decision, case.expected, "{}: value {}", case.name, v.value);
        }
    }

    #[test]
    fn maxoutqea_labels_match_the_decider() {
        let opts = DeciderOptions::default();
        for case in maxoutqea_suite().unwrap() {
            assert_eq!(decide_maxoutqea(&case.instance, &opts).unwrap().decision, case.expected, "{}", case.name);
        }
    }
}
