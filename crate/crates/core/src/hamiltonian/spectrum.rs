use super::LocalHamiltonian;
use crate::error::{Error, Result};
use crate::linalg::{eigh, fix_phase, CVector, C64};
use crate::qstate::MAX_DENSE_QUBITS;
use crate::random::{gaussian_complex, seeded};
use crate::tridiag::SymTridiagonal;
use serde::{Deserialize, Serialize};

/// Eigenvalues closer than this count as one level.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Keep the Lanczos basis below this many bytes.
const LANCZOS_MEMORY: usize = 1 << 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMethod {
    Dense,
    Lanczos,
    /// Closed-form block structure (clock Hamiltonians).
    Structured,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralSummary {
    pub ground_energy: f64,
    pub spectral_gap: f64,
    /// Full spectrum on the dense path; converged low Ritz values otherwise.
    pub eigenvalues: Vec<f64>,
    pub cutoff: f64,
    /// Orthonormal eigenvectors with energy ≤ cutoff (dense path only).
    #[serde(skip)]
    pub low_energy_basis: Vec<CVector>,
    pub low_energy_dimension: usize,
    pub method: SpectralMethod,
    /// Largest eigen-residual ‖Hv − λv‖ observed.
    pub residual: f64,
}

/// Difference between the two lowest distinct levels of an ascending list, 0 if there is one level.
pub(crate) fn gap_of(sorted: &[f64]) -> f64 {
    let ground = sorted[0];
    sorted
        .iter()
        .find(|&&x| x > ground + DEGENERACY_TOL)
        .map(|x| x - ground)
        .unwrap_or(0.0)
}

/// Ground energy, gap and the low-energy eigenspace. Dense up to 12 qubits, Lanczos beyond
/// (ground energy and gap only).
pub fn spectrum(h: &LocalHamiltonian, cutoff: f64) -> Result<SpectralSummary> {
    if h.qubits() > MAX_DENSE_QUBITS {
        let l = ground_state_lanczos(h, &LanczosOptions::default())?;
        return Ok(SpectralSummary {
            ground_energy: l.ritz_values[0],
            spectral_gap: gap_of(&l.ritz_values),
            eigenvalues: l.ritz_values,
            cutoff,
            low_energy_basis: Vec::new(),
            low_energy_dimension: 0,
            method: SpectralMethod::Lanczos,
            residual: l.residual,
        });
    }
    let m = h.dense()?;
    let e = eigh(&m);
    let mut basis = Vec::new();
    let mut residual = 0.0f64;
    for (k, &lambda) in e.values.iter().enumerate() {
        if lambda > cutoff {
            break;
        }
        let v = e.vectors.column(k).into_owned();
        residual = residual.max((&m * &v - &v * C64::from(lambda)).norm());
        basis.push(v);
    }
    Ok(SpectralSummary {
        ground_energy: e.values[0],
        spectral_gap: gap_of(&e.values),
        low_energy_dimension: basis.len(),
        eigenvalues: e.values,
        cutoff,
        low_energy_basis: basis,
        method: SpectralMethod::Dense,
        residual,
    })
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    pub max_krylov: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { max_krylov: 400, tolerance: 1e-10, seed: 0x1a2c_2055 }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosResult {
    /// Lowest distinct converged Ritz values, ascending.
    pub ritz_values: Vec<f64>,
    pub ground_vector: CVector,
    pub residual: f64,
    pub iterations: usize,
}

/// Lanczos with full reorthogonalization. Degenerate levels show up once.
pub fn ground_state_lanczos(h: &LocalHamiltonian, opts: &LanczosOptions) -> Result<LanczosResult> {
    let dim = h.dim();
    let apply: Box<dyn Fn(&[C64]) -> Vec<C64>> = match h.assemble() {
        Ok(op) => Box::new(move |x| op.matvec(x)),
        Err(Error::BudgetExceeded { what: "assembled nonzeros", .. }) => Box::new(|x| h.apply(x).expect("checked dimension")),
        Err(e) => return Err(e),
    };
    let memory_cap = (LANCZOS_MEMORY / (16 * dim)).max(8);
    let max_k = opts.max_krylov.min(dim).min(memory_cap);

    let mut rng = seeded(opts.seed);
    let mut v: Vec<C64> = (0..dim).map(|_| gaussian_complex(&mut rng)).collect();
    normalize(&mut v);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut last_low: Option<(f64, f64)> = None;
    let mut residual = f64::INFINITY;

    for k in 0..max_k {
        basis.push(v.clone());
        let mut w = apply(&v);
        let alpha = dot(&v, &w).re;
        alphas.push(alpha);
        // two passes of Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
            }
        }
        let beta = norm(&w);
        let t = SymTridiagonal::new(alphas.clone(), betas.clone());
        let ground = t.eigenvalue(0);
        let y = t.eigenvector(ground);
        residual = beta * y[k].abs();
        let distinct = distinct_levels(&t.eigenvalues_prefix(4));
        let low = (distinct[0], distinct.get(1).copied().unwrap_or(f64::NAN));
        let exhausted = beta < 1e-12 || k + 1 == dim;
        let stable = last_low.is_some_and(|(g, s)| {
            (g - low.0).abs() < opts.tolerance && ((s - low.1).abs() < 1e-8 || (s.is_nan() && low.1.is_nan()))
        });
        if exhausted || (k >= 8 && residual < opts.tolerance.sqrt() * 1e-2 && stable) {
            let mut ground_vector = CVector::zeros(dim);
            for (coef, b) in y.iter().zip(&basis) {
                for (gi, bi) in ground_vector.iter_mut().zip(b) {
                    *gi += bi * *coef;
                }
            }
            let n = ground_vector.norm();
            ground_vector /= C64::from(n);
            fix_phase(&mut ground_vector);
            return Ok(LanczosResult { ritz_values: distinct, ground_vector, residual, iterations: k + 1 });
        }
        last_low = Some(low);
        betas.push(beta);
        v = w.into_iter().map(|x| x / beta).collect();
    }
    Err(Error::NonConvergence { residual })
}

impl SymTridiagonal {
    fn eigenvalues_prefix(&self, count: usize) -> Vec<f64> {
        (0..count.min(self.len())).map(|k| self.eigenvalue(k)).collect()
    }
}

fn distinct_levels(sorted: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &x in sorted {
        if out.last().is_none_or(|&l| x > l + DEGENERACY_TOL) {
            out.push(x);
        }
    }
    out
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [C64]) {
    let n = norm(a);
    a.iter_mut().for_each(|x| *x /= n);
}

/// ‖H‖∞: exact up to 10 qubits, extreme Lanczos eigenvalues of `±H` beyond.
pub fn operator_norm(h: &LocalHamiltonian) -> Result<f64> {
    if h.qubits() <= 10 {
        let values = crate::linalg::eigvalsh(&h.dense()?);
        return Ok(values[0].abs().max(values[values.len() - 1].abs()));
    }
    operator_norm_lanczos(h)
}

pub(crate) fn operator_norm_lanczos(h: &LocalHamiltonian) -> Result<f64> {
    let opts = LanczosOptions { tolerance: 1e-8, ..LanczosOptions::default() };
    let low = ground_state_lanczos(h, &opts)?.ritz_values[0];
    let high = -ground_state_lanczos(&h.scaled(-1.0)?, &opts)?.ritz_values[0];
    Ok(low.abs().max(high.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::LocalTerm;
    use crate::linalg::{kron, pauli_x, pauli_y, pauli_z};
    use crate::qstate::RegisterLayout;
    use crate::random::random_hermitian;

    fn layout(n: usize) -> RegisterLayout {
        RegisterLayout::single("Q", n).unwrap()
    }

    #[test]
    fn zero_hamiltonian_has_full_ground_space() {
        let h = LocalHamiltonian::zero(layout(2)).unwrap();
        let s = spectrum(&h, 0.0).unwrap();
        assert_eq!(s.ground_energy, 0.0);
        assert_eq!(s.spectral_gap, 0.0);
        assert_eq!(s.low_energy_basis.len(), 4);
    }

    #[test]
    fn heisenberg_dimer() {
        let m = kron(&pauli_x(), &pauli_x()) + kron(&pauli_y(), &pauli_y()) + kron(&pauli_z(), &pauli_z());
        let h = LocalHamiltonian::new(layout(2), vec![LocalTerm::from_dense(vec![0, 1], &m).unwrap()]).unwrap();
        let s = spectrum(&h, -2.0).unwrap();
        assert!((s.ground_energy + 3.0).abs() < 1e-12);
        assert!((s.spectral_gap - 4.0).abs() < 1e-12);
        assert_eq!(s.low_energy_basis.len(), 1);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn z_pair_gap() {
        let terms = vec![
            LocalTerm::from_dense(vec![0], &pauli_z()).unwrap(),
            LocalTerm::from_dense(vec![1], &pauli_z()).unwrap(),
        ];
        let s = spectrum(&LocalHamiltonian::new(layout(2), terms).unwrap(), -1.0).unwrap();
        assert_eq!((s.ground_energy, s.spectral_gap), (-2.0, 2.0));
    }

    fn random_chain(n: usize, seed: u64) -> LocalHamiltonian {
        let mut rng = seeded(seed);
        let terms = (0..n - 1)
            .map(|i| LocalTerm::from_dense(vec![i, i + 1], &random_hermitian(4, &mut rng)).unwrap())
            .collect();
        LocalHamiltonian::new(layout(n), terms).unwrap()
    }

    #[test]
    fn lanczos_matches_dense() {
        for seed in 0..4 {
            let h = random_chain(8, seed);
            let dense = spectrum(&h, f64::NEG_INFINITY).unwrap();
            let l = ground_state_lanczos(&h, &LanczosOptions::default()).unwrap();
            assert!((l.ritz_values[0] - dense.ground_energy).abs() < 1e-9);
            assert!((gap_of(&l.ritz_values) - dense.spectral_gap).abs() < 1e-7);
            let energy: f64 = {
                let y = h.apply(l.ground_vector.as_slice()).unwrap();
                l.ground_vector.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
            };
            assert!((energy - dense.ground_energy).abs() < 1e-9);
        }
    }

    #[test]
    fn operator_norm_exact_and_iterative_agree() {
        let h = random_chain(6, 11);
        let exact = operator_norm(&h).unwrap();
        let dense = h.dense().unwrap();
        let values = crate::linalg::eigvalsh(&dense);
        assert!((exact - values[0].abs().max(values[63].abs())).abs() < 1e-12);
        for seed in 12..15 {
            let h = random_chain(7, seed);
            let reference = operator_norm(&h).unwrap();
            let iterative = operator_norm_lanczos(&h).unwrap();
            assert!((iterative - reference).abs() < 1e-6 * reference);
        }
    }
}
