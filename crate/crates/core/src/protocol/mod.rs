//! Quantum extractors, flattening, and the entropy-verification protocol built on them.
//!
//! An extractor here is a uniform mixture of `2^d` unitaries. Its dilation prepares `d`
//! selector qubits in `|+⟩` and applies the selected unitary, so tracing the selectors out
//! gives back the mixture.

mod flatten;
mod verification;

pub use flatten::{flatten, FlattenResult};
pub use verification::{
    certified_entropy_floor, delta_requirement, honest_prover_state, run_fea_protocol, run_protocol,
    EntropyCertificate, FeaTranscript, HonestProver, ProtocolConfig, ProtocolResult, PROMISE_TOL,
};

use crate::error::{Error, Result};
use crate::linalg::{hadamard, identity, kron, pauli_x, pauli_y, pauli_z, trace_norm, CMatrix, C64};
use crate::qstate::{vn_entropy, DensityMatrix, RegisterLayout};
use crate::random::{haar_unitary, seeded};
use rand::Rng;
use serde::Serialize;

/// Desk-scale limits for random extractors.
pub const MAX_EXTRACTOR_QUBITS: usize = 6;
pub const MAX_SELECTOR_QUBITS: usize = 10;

/// Number of battery states used to estimate the extraction error.
pub const DEFAULT_BATTERY: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractorKind {
    PauliTwirl,
    Haar,
}

/// A `2^d`-regular unitary mixture `T(ρ) = 2^{−d} Σ U_i ρ U_i†` on `n` qubits.
#[derive(Clone, Debug)]
pub struct Extractor {
    kind: ExtractorKind,
    qubits: usize,
    selector_qubits: usize,
    unitaries: Vec<CMatrix>,
    /// Min-entropy threshold the error was measured at, in bits.
    min_entropy: f64,
    /// Largest `‖T(ρ) − Ĩ‖₁` seen over the battery.
    epsilon_hat: f64,
}

/// `2^d` Haar-random unitaries on `n` qubits. The extraction error is measured at min-entropy
/// `k = n − 1` over [`DEFAULT_BATTERY`] states.
pub fn make_extractor(n: usize, d: usize, seed: u64) -> Result<Extractor> {
    if n == 0 || n > MAX_EXTRACTOR_QUBITS {
        return Err(Error::BudgetExceeded { what: "extractor qubits", needed: n, limit: MAX_EXTRACTOR_QUBITS });
    }
    if d > MAX_SELECTOR_QUBITS {
        return Err(Error::BudgetExceeded { what: "selector qubits", needed: d, limit: MAX_SELECTOR_QUBITS });
    }
    let mut rng = seeded(seed);
    let unitaries = (0..1usize << d).map(|_| haar_unitary(1 << n, &mut rng)).collect();
    let mut x = Extractor { kind: ExtractorKind::Haar, qubits: n, selector_qubits: d, unitaries, min_entropy: 0.0, epsilon_hat: 0.0 };
    x.measure((n - 1) as f64, DEFAULT_BATTERY, &mut rng)?;
    Ok(x)
}

impl Extractor {
    /// All `4^n` Pauli strings with `d = 2n`. The twirl is exact: `T(ρ) = Ĩ` for every `ρ`.
    pub fn pauli_twirl(n: usize) -> Result<Self> {
        if n == 0 || 2 * n > MAX_SELECTOR_QUBITS {
            return Err(Error::BudgetExceeded { what: "twirl qubits", needed: n, limit: MAX_SELECTOR_QUBITS / 2 });
        }
        let singles = [identity(2), pauli_x(), pauli_y(), pauli_z()];
        let unitaries = (0..1usize << (2 * n))
            .map(|index| {
                (0..n).fold(identity(1), |acc, q| kron(&acc, &singles[(index >> (2 * (n - 1 - q))) & 3]))
            })
            .collect();
        Ok(Self {
            kind: ExtractorKind::PauliTwirl,
            qubits: n,
            selector_qubits: 2 * n,
            unitaries,
            min_entropy: 0.0,
            epsilon_hat: 0.0,
        })
    }

    /// A single unitary, `d = 0`.
    pub fn single(u: CMatrix) -> Result<Self> {
        let qubits = crate::linalg::exact_log2(u.nrows())
            .filter(|_| u.is_square())
            .ok_or(Error::DimensionMismatch { expected: u.ncols(), found: u.nrows() })?;
        let err = crate::linalg::unitarity_error(&u);
        if err > 1e-9 {
            return Err(Error::NotUnitary(err));
        }
        Ok(Self { kind: ExtractorKind::Haar, qubits, selector_qubits: 0, unitaries: vec![u], min_entropy: 0.0, epsilon_hat: f64::NAN })
    }

    pub fn kind(&self) -> ExtractorKind {
        self.kind
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn selector_qubits(&self) -> usize {
        self.selector_qubits
    }

    pub fn unitaries(&self) -> &[CMatrix] {
        &self.unitaries
    }

    pub fn min_entropy(&self) -> f64 {
        self.min_entropy
    }

    pub fn epsilon_hat(&self) -> f64 {
        self.epsilon_hat
    }

    pub fn apply_matrix(&self, rho: &CMatrix) -> CMatrix {
        let w = C64::from(1.0 / self.unitaries.len() as f64);
        self.unitaries.iter().fold(CMatrix::zeros(rho.nrows(), rho.ncols()), |acc, u| acc + u * rho * u.adjoint()) * w
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.layout().total_qubits() != self.qubits {
            return Err(Error::DimensionMismatch { expected: 1 << self.qubits, found: rho.dim() });
        }
        DensityMatrix::new(rho.layout().clone(), self.apply_matrix(rho.matrix()))
    }

    /// Re-measures `ε̂(k) = max ‖T(ρ) − Ĩ‖₁` over random states with `H∞(ρ) ≥ k`. The distance is
    /// convex in `ρ`, so the battery uses the extreme points of that set: flat states on random
    /// subspaces of dimension `⌈2^k⌉`.
    pub fn measure(&mut self, k: f64, battery: usize, rng: &mut impl Rng) -> Result<f64> {
        let dim = 1usize << self.qubits;
        let rank = (2f64.powf(k).ceil() as usize).clamp(1, dim);
        let flat = CMatrix::identity(dim, dim) * C64::from(1.0 / dim as f64);
        let mut worst: f64 = 0.0;
        for _ in 0..battery.max(1) {
            let v = haar_unitary(dim, rng);
            let cols = v.columns(0, rank);
            let rho = cols * cols.adjoint() * C64::from(1.0 / rank as f64);
            worst = worst.max(trace_norm(&(self.apply_matrix(&rho) - &flat)));
        }
        self.min_entropy = k;
        self.epsilon_hat = worst;
        Ok(worst)
    }
}

/// Unitary on `A ⊗ E_sel` (A first) with `Tr_E U (ρ ⊗ |0⟩⟨0|) U† = T(ρ)`.
pub fn extractor_dilation(x: &Extractor) -> Result<CMatrix> {
    let total = x.qubits + x.selector_qubits;
    if total > crate::qstate::MAX_DENSE_QUBITS {
        return Err(Error::BudgetExceeded { what: "dilation qubits", needed: total, limit: crate::qstate::MAX_DENSE_QUBITS });
    }
    let da = 1usize << x.qubits;
    let ds = 1usize << x.selector_qubits;
    // select-U: block-diagonal in the selector value
    let mut select = CMatrix::zeros(da * ds, da * ds);
    for (i, u) in x.unitaries.iter().enumerate() {
        for r in 0..da {
            for c in 0..da {
                select[(r * ds + i, c * ds + i)] = u[(r, c)];
            }
        }
    }
    let h_all = (0..x.selector_qubits).fold(identity(1), |acc, _| kron(&acc, &hadamard()));
    Ok(select * kron(&identity(da), &h_all))
}

/// `S(T(ρ)) − S(ρ)`, which regularity bounds by `d`.
pub fn entropy_increase(x: &Extractor, rho: &DensityMatrix) -> Result<f64> {
    Ok(vn_entropy(&x.apply(rho)?) - vn_entropy(rho))
}

pub(crate) fn copies_layout(layout: &RegisterLayout, q: usize) -> Result<RegisterLayout> {
    let mut regs = Vec::new();
    for i in 1..=q {
        for (name, n) in layout.registers() {
            regs.push((format!("{name}{i}"), *n));
        }
    }
    RegisterLayout::new(regs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{partial_trace_matrix, trace_norm_distance};
    use crate::random::ginibre_density;

    #[test]
    fn pauli_twirl_is_exact() {
        let mut rng = seeded(1);
        for n in 1..=2 {
            let x = Extractor::pauli_twirl(n).unwrap();
            assert_eq!(x.unitaries().len(), 1 << (2 * n));
            let layout = RegisterLayout::single("A", n).unwrap();
            let flat = DensityMatrix::maximally_mixed(layout.clone()).unwrap();
            for _ in 0..5 {
                let rho = DensityMatrix::new(layout.clone(), ginibre_density(1 << n, 1, &mut rng)).unwrap();
                assert!(trace_norm_distance(&x.apply(&rho).unwrap(), &flat).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn mixture_fixes_flat_state() {
        let x = make_extractor(2, 3, 5).unwrap();
        let flat = DensityMatrix::maximally_mixed(RegisterLayout::single("A", 2).unwrap()).unwrap();
        assert!(trace_norm_distance(&x.apply(&flat).unwrap(), &flat).unwrap() < 1e-12);
    }

    #[test]
    fn dilation_reproduces_mixture() {
        let mut rng = seeded(2);
        for x in [make_extractor(2, 2, 3).unwrap(), Extractor::pauli_twirl(1).unwrap()] {
            let u = extractor_dilation(&x).unwrap();
            assert!(crate::linalg::unitarity_error(&u) < 1e-12);
            let n = x.qubits();
            let d = x.selector_qubits();
            let rho = ginibre_density(1 << n, 2, &mut rng);
            let mut zero = CMatrix::zeros(1 << d, 1 << d);
            zero[(0, 0)] = C64::from(1.0);
            let big = &u * kron(&rho, &zero) * u.adjoint();
            let kept: Vec<usize> = (0..n).collect();
            let out = partial_trace_matrix(&big, n + d, &kept);
            assert!((out - x.apply_matrix(&rho)).norm() < 1e-10);
        }
    }

    #[test]
    fn single_unitary_dilation_is_itself() {
        let mut rng = seeded(3);
        let u = haar_unitary(4, &mut rng);
        let x = Extractor::single(u.clone()).unwrap();
        assert!((extractor_dilation(&x).unwrap() - u).norm() < 1e-14);
    }

    #[test]
    fn random_mixture_extracts_high_min_entropy() {
        let x = make_extractor(2, 6, 11).unwrap();
        assert_eq!(x.min_entropy(), 1.0);
        assert!(x.epsilon_hat() <= 0.2, "ε̂ = {}", x.epsilon_hat());
        let mut y = x.clone();
        let mut rng = seeded(12);
        // H∞ = 2 on 2 qubits leaves only Ĩ
        assert!(y.measure(2.0, 20, &mut rng).unwrap() < 1e-12);
    }

    #[test]
    fn entropy_grows_by_at_most_d() {
        let mut rng = seeded(4);
        for d in [1, 2, 3] {
            let x = make_extractor(2, d, 20 + d as u64).unwrap();
            for _ in 0..20 {
                let rank = rng.random_range(1..=4);
                let rho = DensityMatrix::new(RegisterLayout::single("A", 2).unwrap(), ginibre_density(4, rank, &mut rng)).unwrap();
                assert!(entropy_increase(&x, &rho).unwrap() <= d as f64 + 1e-9);
            }
        }
    }
}
