//! Simulation of the two-proof LEAPS verifier: an energy check on one proof and a SWAP test
//! between that proof and a product of two unentangled ones.

use super::LeapsInstance;
use crate::error::{Error, Result};
use crate::hamiltonian::sampled_energy_estimate;
use crate::qstate::{swap_test_prob, PureState};
use crate::random::{child_seed, seeded};

/// Acceptance probability `½·P[Ẽ < (α+β)/2] + ½·P[SWAP test passes]`. The energy check is
/// repeated `trials` times with `samples` term measurements each; `samples = 0` uses the exact
/// energy. `phi_left` lives on the cut registers and `phi_right` on the rest.
pub fn leaps_qma_verifier(
    inst: &LeapsInstance,
    psi: &PureState,
    phi_left: &PureState,
    phi_right: &PureState,
    samples: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    inst.validate()?;
    let h = inst.hamiltonian.local_hamiltonian()?;
    if psi.layout() != h.layout() {
        return Err(Error::LayoutMismatch("ψ must live on the Hamiltonian's registers".into()));
    }
    let names: Vec<&str> = h.layout().names();
    let product = phi_left.tensor(phi_right)?.reorder(&names)?;
    if product.layout() != psi.layout() {
        return Err(Error::LayoutMismatch("φ_L ⊗ φ_R must cover the same registers as ψ".into()));
    }
    let threshold = (inst.alpha + inst.beta) / 2.0;
    let p_energy = if samples == 0 {
        f64::from(u8::from(sampled_energy_estimate(&h, psi, 0, seed)? < threshold))
    } else {
        let mut rng = seeded(seed);
        let trials = trials.max(1);
        let mut passed = 0usize;
        for _ in 0..trials {
            if sampled_energy_estimate(&h, psi, samples, child_seed(&mut rng))? < threshold {
                passed += 1;
            }
        }
        passed as f64 / trials as f64
    };
    Ok(0.5 * p_energy + 0.5 * swap_test_prob(psi, &product)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{LocalHamiltonian, LocalTerm};
    use crate::linalg::{identity, pauli_z, CVector, C64};
    use crate::problems::HamiltonianSource;
    use crate::qstate::{pure_state_distance, RegisterLayout};
    use crate::random::{haar_vector, seeded};

    fn number_operator() -> LocalHamiltonian {
        let one = (identity(2) - pauli_z()) * C64::from(0.5);
        LocalHamiltonian::new(
            RegisterLayout::new([("A", 1), ("B", 1)]).unwrap(),
            vec![LocalTerm::from_dense(vec![0], &one).unwrap(), LocalTerm::from_dense(vec![1], &one).unwrap()],
        )
        .unwrap()
    }

    fn basis(name: &str, x: usize) -> PureState {
        PureState::basis(RegisterLayout::single(name, 1).unwrap(), x).unwrap()
    }

    #[test]
    fn exact_product_ground_state_is_accepted() {
        let inst = LeapsInstance::new(HamiltonianSource::explicit(number_operator()), &["A"], 0.0, 0.5, 0.0, 0.5).unwrap();
        let psi = basis("A", 0).tensor(&basis("B", 0)).unwrap();
        let p = leaps_qma_verifier(&inst, &psi, &basis("A", 0), &basis("B", 0), 200, 20, 1).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn acceptance_follows_the_swap_formula() {
        let mut rng = seeded(2);
        let inst = LeapsInstance::new(HamiltonianSource::explicit(number_operator()), &["A"], 0.0, 0.5, 0.1, 0.5).unwrap();
        // near |00⟩: low energy, close to a product
        let mut v = CVector::zeros(4);
        v[0] = C64::from(1.0);
        let v = v + haar_vector(4, &mut rng) * C64::from(0.05);
        let psi = PureState::normalized(inst.hamiltonian.layout().unwrap(), v).unwrap();
        let (l, r) = (basis("A", 0), basis("B", 0));
        let p = leaps_qma_verifier(&inst, &psi, &l, &r, 0, 1, 3).unwrap();
        let d = pure_state_distance(&psi, &l.tensor(&r).unwrap()).unwrap();
        assert!((p - (0.5 + 0.5 * (0.5 + 0.5 * (1.0 - d * d)))).abs() < 1e-12, "p = {p}, d = {d}");
        // a high-energy proof fails the energy check
        let high = basis("A", 1).tensor(&basis("B", 1)).unwrap();
        let p = leaps_qma_verifier(&inst, &high, &basis("A", 1), &basis("B", 1), 100, 10, 4).unwrap();
        assert!(p <= 0.5 + 1e-12, "p = {p}");
    }
}
