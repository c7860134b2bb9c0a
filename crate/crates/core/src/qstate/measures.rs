//! Entropies, distances and the elementary inequalities built on them.
//!
//! Entropies are in bits. `‖·‖₁` is the full trace norm, so distances between states lie in
//! `[0, 2]`.

use super::state::{DensityMatrix, PureState};
use crate::error::{Error, Result};
use crate::linalg::{
    apply_on_support, eigvalsh, hadamard, hermitize, sqrt_psd, trace, trace_norm_hermitian,
    CMatrix, CVector, C64, ZERO,
};

/// Eigenvalues at or below this are dropped from `λ log λ`.
pub const EIGEN_CLAMP: f64 = 1e-12;

/// Shannon entropy in bits of a probability vector, with the same clamp as [`vn_entropy`].
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > EIGEN_CLAMP).map(|&x| -x * x.log2()).sum()
}

/// Von Neumann entropy of a Hermitian matrix's spectrum, in bits.
pub fn entropy_of_matrix(m: &CMatrix) -> f64 {
    shannon_entropy(&eigvalsh(m)).max(0.0)
}

/// `S(ρ) = −Tr ρ log₂ ρ`.
pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_matrix(rho.matrix()).min(rho.layout().total_qubits() as f64)
}

/// `H∞(ρ) = −log₂ λ_max(ρ)`.
pub fn min_entropy(rho: &DensityMatrix) -> f64 {
    let top = eigvalsh(rho.matrix()).last().copied().unwrap_or(1.0);
    (-top.min(1.0).log2()).max(0.0)
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, found: b });
    }
    Ok(())
}

/// `‖ρ − σ‖₁`, full trace norm.
pub fn trace_norm_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho.dim(), sigma.dim())?;
    Ok(trace_norm_hermitian(&(rho.matrix() - sigma.matrix())).min(2.0))
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho.dim(), sigma.dim())?;
    Ok(fidelity_of_matrices(rho.matrix(), sigma.matrix()))
}

/// Relative size, against the largest eigenvalue, below which eigenvalues of `√ρ σ √ρ` are
/// treated as round-off. Square roots would otherwise turn `1e-16` noise into `1e-8` of fidelity
/// whenever a state is rank-deficient.
const FIDELITY_ROUNDOFF: f64 = 1e-13;

pub(crate) fn fidelity_of_matrices(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let root = sqrt_psd(rho);
    let inner = hermitize(&(&root * sigma * &root));
    let eig = eigvalsh(&inner);
    let floor = FIDELITY_ROUNDOFF * eig.last().copied().unwrap_or(0.0).max(0.0);
    let s: f64 = eig.iter().filter(|&&x| x > floor).map(|x| x.sqrt()).sum();
    (s * s).clamp(0.0, 1.0)
}

/// `√(1 − |⟨ψ|φ⟩|²)`, the half-norm distance of two pure states. Twice this value is their
/// full trace-norm distance.
pub fn pure_state_distance(psi: &PureState, phi: &PureState) -> Result<f64> {
    let overlap = psi.inner(phi)?.norm_sqr();
    Ok((1.0 - overlap).max(0.0).sqrt())
}

/// Fannes-type continuity bound on `|S(ρ) − S(σ)|` for `‖ρ − σ‖₁ = t` in dimension `dim`:
/// `min(t log d − t log t, t log d + 1/(e ln 2))`, capped at `log d`. The first form peaks at
/// `t = d/e` and is held flat past it, so the bound never decreases as `t` grows.
pub fn fannes_bound(t: f64, dim: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let log_d = dim.log2();
    if t >= 1.0 {
        return log_d;
    }
    let peak = t.min(dim / std::f64::consts::E);
    let sharp = peak * log_d - peak * peak.log2();
    let flat = t * log_d + 1.0 / (std::f64::consts::E * std::f64::consts::LN_2);
    sharp.min(flat).min(log_d)
}

/// Outcome probability `Tr(Mρ)` and the post-measurement state `√M ρ √M / Tr(Mρ)`.
pub fn post_measure(rho: &DensityMatrix, m: &CMatrix) -> Result<(f64, DensityMatrix)> {
    same_dim(rho.dim(), m.nrows())?;
    let spectrum = eigvalsh(m);
    let (lo, hi) = (spectrum[0], spectrum[spectrum.len() - 1]);
    if lo < -1e-9 || hi > 1.0 + 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "measurement operator spectrum [{lo:.3e}, {hi:.3e}] leaves [0, 1]"
        )));
    }
    let prob = trace(&(m * rho.matrix())).re;
    if prob <= 1e-12 {
        return Err(Error::ZeroProbability(prob));
    }
    let root = sqrt_psd(m);
    let post = &root * rho.matrix() * &root;
    Ok((prob, DensityMatrix::from_matrix(rho.layout().clone(), post)?))
}

/// SWAP-test acceptance probability `1/2 + |⟨ψ|φ⟩|²/2`.
pub fn swap_test_prob(psi: &PureState, phi: &PureState) -> Result<f64> {
    Ok(0.5 + 0.5 * psi.inner(phi)?.norm_sqr())
}

/// Acceptance probability of the SWAP-test circuit, simulated gate by gate on `2n + 1` qubits:
/// ancilla `|0⟩`, Hadamard, controlled-SWAP of the two registers, Hadamard, accept on `0`.
pub fn swap_test_circuit_prob(psi: &PureState, phi: &PureState) -> Result<f64> {
    same_dim(psi.dim(), phi.dim())?;
    let n = psi.layout().total_qubits();
    let total = 2 * n + 1;
    if total > super::state::MAX_PURE_QUBITS {
        return Err(Error::BudgetExceeded { what: "swap test qubits", needed: total, limit: 24 });
    }
    let dim = 1usize << total;
    let reg_dim = 1usize << n;
    // ancilla is qubit 0, then ψ, then φ
    let mut state = vec![ZERO; dim];
    for (i, a) in psi.amplitudes().iter().enumerate() {
        for (j, b) in phi.amplitudes().iter().enumerate() {
            state[i * reg_dim + j] = a * b;
        }
    }
    let h = hadamard();
    apply_on_support(&h, &[0], total, &mut state);
    let cswap_pair = crate::linalg::swap_gate();
    for k in 0..n {
        apply_controlled(&cswap_pair, 0, &[1 + k, 1 + n + k], total, &mut state);
    }
    apply_on_support(&h, &[0], total, &mut state);
    let half = dim / 2;
    Ok(state[..half].iter().map(C64::norm_sqr).sum())
}

/// Applies `op` on `targets` only in the branch where `control` reads 1.
fn apply_controlled(op: &CMatrix, control: usize, targets: &[usize], n: usize, state: &mut [C64]) {
    let k = targets.len();
    let dk = 1usize << k;
    let mut controlled = CMatrix::identity(2 * dk, 2 * dk);
    controlled.view_mut((dk, dk), (dk, dk)).copy_from(op);
    let mut support = vec![control];
    support.extend_from_slice(targets);
    apply_on_support(&controlled, &support, n, state);
}

/// Projector `|ψ⟩⟨ψ|`.
pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}
