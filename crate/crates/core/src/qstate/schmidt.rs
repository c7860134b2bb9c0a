//! Schmidt decomposition, purification and alignment of purifications.

use super::layout::RegisterLayout;
use super::state::{DensityMatrix, PureState};
use crate::error::{Error, Result};
use crate::linalg::{
    c64, eigh, fix_phase, split_index_table, sqrt_psd, CMatrix, CVector, C64, ZERO,
};

/// Schmidt coefficients below this are dropped.
const SCHMIDT_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SchmidtTerm {
    pub coefficient: f64,
    /// State on the cut registers.
    pub left: PureState,
    /// State on the remaining registers.
    pub right: PureState,
}

/// Amplitude matrix `M[a, r] = ψ[(a, r)]` with rows on `rows` qubits.
fn amplitude_matrix(v: &CVector, n: usize, rows: &[usize]) -> CMatrix {
    let (table, dk, dr) = split_index_table(n, rows);
    CMatrix::from_fn(dk, dr, |a, r| v[table[a * dr + r]])
}

fn from_amplitude_matrix(m: &CMatrix, n: usize, rows: &[usize]) -> CVector {
    let (table, dk, dr) = split_index_table(n, rows);
    let mut v = CVector::zeros(1usize << n);
    for a in 0..dk {
        for r in 0..dr {
            v[table[a * dr + r]] = m[(a, r)];
        }
    }
    v
}

/// `ψ = Σᵢ λᵢ |uᵢ⟩|vᵢ⟩` across `cut | rest`, coefficients descending.
pub fn schmidt<S: AsRef<str>>(psi: &PureState, cut: &[S]) -> Result<Vec<SchmidtTerm>> {
    let layout = psi.layout();
    layout.check_cut(cut)?;
    let rest = layout.complement_names(cut);
    let left_layout = layout.select(cut)?;
    let right_layout = layout.select(&rest)?;
    let rows = layout.qubits_of(cut)?;
    let m = amplitude_matrix(psi.amplitudes(), layout.total_qubits(), &rows);
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut terms = Vec::new();
    for k in order {
        let s = svd.singular_values[k];
        if s <= SCHMIDT_TOL {
            continue;
        }
        let left = u.column(k).into_owned();
        let right = v_t.row(k).transpose();
        terms.push(SchmidtTerm {
            coefficient: s,
            left: PureState::normalized(left_layout.clone(), left)?,
            right: PureState::normalized(right_layout.clone(), right)?,
        });
    }
    Ok(terms)
}

/// Largest eigenvalue of the reduced state, `λ₁²` in Schmidt terms.
pub fn top_schmidt_weight(reduced: &CMatrix) -> f64 {
    crate::linalg::eigvalsh(reduced).last().copied().unwrap_or(0.0).clamp(0.0, 1.0)
}

/// Full-norm distance from a pure state to the nearest product state across a cut,
/// `2√(1 − λ₁²)`, given the reduced state on either side.
pub fn product_distance_from_reduced(reduced: &CMatrix) -> f64 {
    2.0 * (1.0 - top_schmidt_weight(reduced)).max(0.0).sqrt()
}

/// `Σᵢ √pᵢ |eᵢ⟩|i⟩` with eigenvalues descending, so a pure input maps to `ρ ⊗ |0…0⟩`.
/// The purifier has as many qubits as `ρ`.
pub fn purify(rho: &DensityMatrix, purifier_name: &str) -> Result<PureState> {
    purify_with(rho, purifier_name, rho.layout().total_qubits())
}

/// Like [`purify`] but with the smallest purifier that holds the rank of `ρ` (at least one qubit).
pub fn purify_minimal(rho: &DensityMatrix, purifier_name: &str) -> Result<PureState> {
    let rank = rho.eigenvalues().iter().filter(|&&p| p > SCHMIDT_TOL).count().max(1);
    let qubits = (usize::BITS - (rank - 1).leading_zeros()).max(1) as usize;
    purify_with(rho, purifier_name, qubits)
}

fn purify_with(rho: &DensityMatrix, purifier_name: &str, qubits: usize) -> Result<PureState> {
    let purifier = RegisterLayout::single(purifier_name, qubits)?;
    let layout = rho.layout().concat(&purifier)?;
    let e = eigh(rho.matrix());
    let dim = rho.dim();
    let pdim = 1usize << qubits;
    let mut v = CVector::zeros(dim * pdim);
    // descending eigenvalues take purifier basis states 0, 1, …; ties keep eigenvector order
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| e.values[b].total_cmp(&e.values[a]));
    for (slot, k) in order.into_iter().enumerate() {
        let p = e.values[k];
        if p <= SCHMIDT_TOL {
            continue;
        }
        if slot >= pdim {
            return Err(Error::InvalidParameter("purifier smaller than the rank".into()));
        }
        let mut vec = e.vectors.column(k).into_owned();
        fix_phase(&mut vec);
        for i in 0..dim {
            v[i * pdim + slot] += vec[i] * p.sqrt();
        }
    }
    PureState::normalized(layout, v)
}

fn split_purifier<S: AsRef<str>>(state: &PureState, purifier: &[S]) -> Result<(Vec<usize>, Vec<usize>)> {
    let layout = state.layout();
    let p = layout.qubits_of(purifier)?;
    if p.is_empty() || p.len() == layout.total_qubits() {
        return Err(Error::InvalidParameter(
            "purifier must be a nonempty proper subset of the registers".into(),
        ));
    }
    let system = crate::linalg::complement(layout.total_qubits(), &p);
    Ok((system, p))
}

/// Unitary `U` on the purifier maximizing `|⟨ψ|(I ⊗ U)|φ⟩|`; the optimum is the Uhlmann
/// fidelity of the two reduced states.
pub fn align_purification<S: AsRef<str>>(phi: &PureState, psi: &PureState, purifier: &[S]) -> Result<CMatrix> {
    if phi.layout() != psi.layout() {
        return Err(Error::LayoutMismatch("both purifications must share a layout".into()));
    }
    let (system, p) = split_purifier(phi, purifier)?;
    if p.len() > 10 {
        return Err(Error::BudgetExceeded { what: "purifier qubits", needed: p.len(), limit: 10 });
    }
    let n = phi.layout().total_qubits();
    let a_phi = amplitude_matrix(phi.amplitudes(), n, &system);
    let a_psi = amplitude_matrix(psi.amplitudes(), n, &system);
    // ⟨ψ|(I⊗U)|φ⟩ = Tr(U K) with K = Φᵀ Ψ̄
    let k = a_phi.transpose() * a_psi.map(|z| z.conj());
    let svd = k.svd(true, true);
    let w = svd.u.expect("requested");
    let v = svd.v_t.expect("requested").adjoint();
    Ok(v * w.adjoint())
}

/// Applies `u` to the purifier qubits of `state`.
pub fn apply_to_purifier<S: AsRef<str>>(state: &PureState, u: &CMatrix, purifier: &[S]) -> Result<PureState> {
    let p = state.layout().qubits_of(purifier)?;
    let mut amps: Vec<C64> = state.amplitudes().iter().copied().collect();
    crate::linalg::apply_on_support(u, &p, state.layout().total_qubits(), &mut amps);
    PureState::normalized(state.layout().clone(), CVector::from_vec(amps))
}

/// The purification of `target` (a state of the `system` registers of `psi`) with the largest
/// overlap with `psi`. Works through the thin polar decomposition of `√target · Ψ`, so the
/// purifier can be far larger than the system.
pub fn closest_purification<S: AsRef<str>>(target: &DensityMatrix, psi: &PureState, system: &[S]) -> Result<PureState> {
    let layout = psi.layout();
    let sys = layout.qubits_of(system)?;
    let n = layout.total_qubits();
    if sys.is_empty() || sys.len() == n {
        return Err(Error::TrivialCut);
    }
    if target.layout().total_qubits() != sys.len() {
        return Err(Error::LayoutMismatch("target must live on the system registers".into()));
    }
    if 2 * sys.len() > n {
        return Err(Error::InvalidParameter("purifier too small to purify the system".into()));
    }
    let a_psi = amplitude_matrix(psi.amplitudes(), n, &sys);
    let root = sqrt_psd(target.matrix());
    let m = &root * &a_psi;
    let svd = m.svd(true, true);
    let p_mat = svd.u.expect("requested");
    let q_adj = orthonormal_rows(svd.v_t.expect("requested"));
    let w = p_mat * q_adj;
    let a_phi = root * w;
    let v = from_amplitude_matrix(&a_phi, n, &sys);
    PureState::normalized(layout.clone(), v)
}

/// Re-orthonormalizes the rows of a wide matrix (Gram–Schmidt), completing any row that the
/// SVD left degenerate.
fn orthonormal_rows(rows: CMatrix) -> CMatrix {
    let (r, c) = rows.shape();
    let mut out: Vec<CVector> = Vec::with_capacity(r);
    let mut candidates: Vec<CVector> = (0..r).map(|i| rows.row(i).transpose()).collect();
    candidates.extend((0..c).map(|j| {
        let mut e = CVector::zeros(c);
        e[j] = c64(1.0, 0.0);
        e
    }));
    for mut v in candidates {
        if out.len() == r {
            break;
        }
        for u in &out {
            let proj: C64 = u.dotc(&v);
            v -= u * proj;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            out.push(v / c64(norm, 0.0));
        }
    }
    let mut m = CMatrix::from_element(r, c, ZERO);
    for (i, v) in out.iter().enumerate() {
        m.set_row(i, &v.transpose());
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::qstate::measures::{fidelity, trace_norm_distance};
    use crate::random::{ginibre_density, haar_vector, seeded};

    fn ab() -> RegisterLayout {
        RegisterLayout::new([("A", 1), ("B", 1)]).unwrap()
    }

    #[test]
    fn bell_schmidt() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = PureState::new(ab(), CVector::from_vec(vec![c64(h, 0.0), ZERO, ZERO, c64(h, 0.0)])).unwrap();
        let terms = schmidt(&bell, &["A"]).unwrap();
        assert_eq!(terms.len(), 2);
        for t in &terms {
            assert!((t.coefficient - h).abs() < 1e-12);
        }
        let product = PureState::basis(ab(), 0b10).unwrap();
        let terms = schmidt(&product, &["A"]).unwrap();
        assert_eq!(terms.len(), 1);
        assert!((terms[0].coefficient - 1.0).abs() < 1e-12);
        assert!(matches!(schmidt(&product, &["A", "B"]), Err(Error::TrivialCut)));
    }

    #[test]
    fn schmidt_reconstructs_and_matches_reduced_spectrum() {
        let mut rng = seeded(11);
        let layout = RegisterLayout::new([("A", 2), ("B", 2)]).unwrap();
        for _ in 0..10 {
            let psi = PureState::new(layout.clone(), haar_vector(16, &mut rng)).unwrap();
            let terms = schmidt(&psi, &["A"]).unwrap();
            let total: f64 = terms.iter().map(|t| t.coefficient.powi(2)).sum();
            assert!((total - 1.0).abs() < 1e-12);
            let mut rebuilt = CVector::zeros(16);
            for t in &terms {
                rebuilt += crate::linalg::kron_vec(t.left.amplitudes(), t.right.amplitudes()) * c64(t.coefficient, 0.0);
            }
            assert!((rebuilt - psi.amplitudes()).norm() < 1e-9);
            let top = top_schmidt_weight(psi.reduced(&["A"]).unwrap().matrix());
            assert!((top - terms[0].coefficient.powi(2)).abs() < 1e-10);
        }
    }

    #[test]
    fn purify_examples() {
        let a = RegisterLayout::single("A", 1).unwrap();
        let m = CMatrix::from_row_slice(2, 2, &[c64(0.75, 0.0), ZERO, ZERO, c64(0.25, 0.0)]);
        let rho = DensityMatrix::new(a.clone(), m).unwrap();
        let p = purify(&rho, "P").unwrap();
        assert!((p.amplitudes()[0] - c64(0.75f64.sqrt(), 0.0)).norm() < 1e-12);
        assert!((p.amplitudes()[3] - c64(0.5, 0.0)).norm() < 1e-12);
        let back = p.reduced(&["A"]).unwrap();
        assert!((back.matrix() - rho.matrix()).norm() < 1e-12);

        let mixed = DensityMatrix::maximally_mixed(a.clone()).unwrap();
        let bell = purify(&mixed, "P").unwrap();
        assert!((bell.amplitudes()[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((bell.amplitudes()[3].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);

        let one = PureState::basis(a, 1).unwrap();
        let p = purify(&one.to_density().unwrap(), "P").unwrap();
        assert!((p.amplitudes()[0b10] - ONE).norm() < 1e-12);
    }

    #[test]
    fn alignment_reaches_uhlmann_fidelity() {
        let mut rng = seeded(12);
        let a = RegisterLayout::single("A", 2).unwrap();
        for _ in 0..10 {
            let rho = DensityMatrix::new(a.clone(), ginibre_density(4, 4, &mut rng)).unwrap();
            let sigma = DensityMatrix::new(a.clone(), ginibre_density(4, 4, &mut rng)).unwrap();
            let phi = purify(&rho, "P").unwrap();
            let psi = purify(&sigma, "P").unwrap();
            let u = align_purification(&phi, &psi, &["P"]).unwrap();
            let aligned = apply_to_purifier(&phi, &u, &["P"]).unwrap();
            let achieved = psi.inner(&aligned).unwrap().norm_sqr();
            let f = fidelity(&rho, &sigma).unwrap();
            assert!((achieved - f).abs() < 1e-7, "{achieved} vs {f}");
            let eps = trace_norm_distance(&rho, &sigma).unwrap();
            assert!(achieved >= (1.0 - eps).powi(2) - 1e-9);
        }
    }

    #[test]
    fn closest_purification_agrees_with_alignment() {
        let mut rng = seeded(13);
        let a = RegisterLayout::single("A", 1).unwrap();
        let sigma = DensityMatrix::new(a.clone(), ginibre_density(2, 2, &mut rng)).unwrap();
        let psi = purify(&sigma, "P").unwrap();
        let target = DensityMatrix::maximally_mixed(a.clone()).unwrap();
        let best = closest_purification(&target, &psi, &["A"]).unwrap();
        let reduced = best.reduced(&["A"]).unwrap();
        assert!((reduced.matrix() - target.matrix()).norm() < 1e-10);
        let overlap = psi.inner(&best).unwrap().norm_sqr();
        let f = fidelity(&target, &sigma).unwrap();
        assert!((overlap - f).abs() < 1e-8);
    }
}
