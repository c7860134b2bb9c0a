//! Flattening `ρ^{⊗q}` by cutting off its heaviest eigenvalues.

use super::copies_layout;
use crate::error::{Error, Result};
use crate::linalg::{eigh, kron, CMatrix, CVector, C64};
use crate::qstate::{vn_entropy, DensityMatrix, MAX_DENSE_QUBITS};

#[derive(Clone, Debug)]
pub struct FlattenResult {
    /// Renormalized projection of `ρ^{⊗q}`, on registers `name1, …, nameq`.
    pub state: DensityMatrix,
    pub removed_mass: f64,
    /// `‖ρ^{⊗q} − σ‖₁`, computed in the shared eigenbasis.
    pub distance: f64,
    pub min_entropy: f64,
    /// `q S(ρ) − (n + log(q/ε)) √(q log(1/ε))`: the flattening guarantee with unit constants.
    pub lemma_bound: f64,
}

/// Removes the largest eigenvalues of `ρ^{⊗q}` while their total weight stays ≤ `ε`, then
/// renormalizes. The cut raises the min-entropy while moving the state by `2 · removed ≤ 2ε`.
pub fn flatten(rho: &DensityMatrix, q: usize, eps: f64) -> Result<FlattenResult> {
    let n = rho.layout().total_qubits();
    if q == 0 {
        return Err(Error::InvalidParameter("flatten needs q ≥ 1".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("ε = {eps} must lie in (0, 1)")));
    }
    if q * n > MAX_DENSE_QUBITS {
        return Err(Error::BudgetExceeded { what: "flattened qubits", needed: q * n, limit: MAX_DENSE_QUBITS });
    }
    let e = eigh(rho.matrix());
    let d = rho.dim();
    let total = d.pow(q as u32);
    // eigenvalue of the product basis vector with digits (i_1, …, i_q)
    let weights: Vec<f64> = (0..total)
        .map(|mut idx| {
            let mut w = 1.0;
            for _ in 0..q {
                w *= e.values[idx % d].max(0.0);
                idx /= d;
            }
            w
        })
        .collect();
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
    let mut removed = 0.0;
    let mut cut = 0;
    while cut < total && removed + weights[order[cut]] <= eps {
        removed += weights[order[cut]];
        cut += 1;
    }
    let kept_mass = 1.0 - removed;
    let mut keep = vec![true; total];
    for &i in &order[..cut] {
        keep[i] = false;
    }
    let distance: f64 = (0..total)
        .map(|i| if keep[i] { (weights[i] / kept_mass - weights[i]).abs() } else { weights[i] })
        .sum();
    let min_entropy = -(weights[order[cut]] / kept_mass).log2();

    // σ = V diag(kept / (1 − removed)) V†, V = ⊗ eigenvectors; digit order matches kron order
    let v = (0..q).fold(CMatrix::identity(1, 1), |acc, _| kron(&acc, &e.vectors));
    let diag = CVector::from_fn(total, |i, _| {
        // kron puts copy 1 in the most significant digit
        let mut idx = i;
        let mut digits = vec![0; q];
        for k in (0..q).rev() {
            digits[k] = idx % d;
            idx /= d;
        }
        let lin = digits.iter().rev().fold(0, |acc, &x| acc * d + x);
        if keep[lin] { C64::from(weights[lin] / kept_mass) } else { C64::from(0.0) }
    });
    let sigma = &v * CMatrix::from_diagonal(&diag) * v.adjoint();
    let state = DensityMatrix::new(copies_layout(rho.layout(), q)?, sigma)?;
    let qf = q as f64;
    let lemma_bound =
        qf * vn_entropy(rho) - (n as f64 + (qf / eps).log2()) * (qf * (1.0 / eps).log2()).sqrt();
    Ok(FlattenResult { state, removed_mass: removed, distance, min_entropy, lemma_bound })
}
