//! Spectrum and eigenvectors of the clock Hamiltonian from its block structure.
//!
//! Conjugating the legal subspace by `Σ_t U_t ⊗ |t⟩⟨t|` (with `U_t = V_t ⋯ V_1`) turns
//! `H_prop` into the Laplacian of a path on `N + 1` sites and leaves `H_in` diagonal: a system
//! basis state whose B/E bits have Hamming weight `w` sees the extra potential `w` on site 0.
//! So the legal block is a direct sum of tridiagonal matrices `M_w`. Illegal clock strings
//! cost at least 1, which is far above every level of interest once `N ≥ 2`.

use super::{clock_value, ClockHamiltonian};
use crate::error::{Error, Result};
use crate::hamiltonian::{SpectralMethod, SpectralSummary};
use crate::linalg::{CVector, C64, ZERO};
use crate::qstate::{cross_reduce, DensityMatrix, PureState, MAX_PURE_QUBITS};
use crate::tridiag::SymTridiagonal;
use serde::Serialize;

/// A level of the legal block: eigenvalue `index` of `M_w` for `w = ancilla_weight`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClockLevel {
    pub energy: f64,
    pub ancilla_weight: usize,
    pub index: usize,
    pub multiplicity: usize,
}

/// The eigenvector `Σ_t profile[t] · U_{min(t,T)} |input⟩ ⊗ |t⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClockEigenvector {
    /// Computational basis index on A, B, E.
    pub input: usize,
    pub energy: f64,
    pub ancilla_weight: usize,
    pub index: usize,
    pub profile: Vec<f64>,
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Weights of the slices `t = 0..=T` in `Σ_t a[t] b[t] U_{min(t,T)}`: every time past `T`
/// carries the same slice, so those products are summed into the last entry.
pub(crate) fn folded_weights(a: &[f64], b: &[f64], gates: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..gates).map(|t| a[t] * b[t]).collect();
    w.push(a[gates..].iter().zip(&b[gates..]).map(|(x, y)| x * y).sum());
    w
}

impl ClockHamiltonian {
    fn ancilla_count(&self) -> usize {
        self.channel().n_b() + self.channel().n_e()
    }

    /// `M_w`: path Laplacian on `N + 1` sites plus `w` on site 0.
    pub fn legal_block(&self, ancilla_weight: usize) -> SymTridiagonal {
        let n = self.clock_qubits();
        let mut diag = vec![2.0; n + 1];
        diag[0] = 1.0 + ancilla_weight as f64;
        diag[n] = 1.0;
        SymTridiagonal::new(diag, vec![-1.0; n])
    }

    /// Lower bound on the illegal block, `None` when every clock string is legal (`N = 1`).
    pub fn illegal_floor(&self) -> Option<f64> {
        (self.clock_qubits() >= 2).then_some(1.0)
    }

    pub fn ground_space_dimension(&self) -> usize {
        1 << self.channel().n_a()
    }

    /// Legal levels with energy ≤ `cutoff`, ascending.
    pub fn levels_below(&self, cutoff: f64) -> Vec<ClockLevel> {
        let anc = self.ancilla_count();
        let mut out = Vec::new();
        for w in 0..=anc {
            let m = self.legal_block(w);
            let multiplicity = self.ground_space_dimension() * binomial(anc, w);
            for k in 0..m.len() {
                let energy = m.eigenvalue(k);
                if energy > cutoff {
                    break;
                }
                out.push(ClockLevel { energy, ancilla_weight: w, index: k, multiplicity });
            }
        }
        out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        out
    }

    /// Exact gap above the zero-energy history space: `min(λ₁(M_0), λ₀(M_1), illegal floor)`.
    pub fn spectral_gap(&self) -> f64 {
        let mut gap = self.legal_block(0).eigenvalue(1);
        if self.ancilla_count() > 0 {
            gap = gap.min(self.legal_block(1).eigenvalue(0));
        }
        if let Some(floor) = self.illegal_floor() {
            gap = gap.min(floor);
        }
        gap
    }

    /// Spectral summary without diagonalizing: levels ≤ `cutoff` are listed with multiplicity.
    /// Only levels below the illegal floor are resolved.
    pub fn spectral_summary(&self, cutoff: f64) -> Result<SpectralSummary> {
        self.check_resolved(cutoff)?;
        let levels = self.levels_below(cutoff);
        let eigenvalues: Vec<f64> = levels.iter().flat_map(|l| std::iter::repeat_n(l.energy, l.multiplicity)).collect();
        Ok(SpectralSummary {
            ground_energy: 0.0,
            spectral_gap: self.spectral_gap(),
            low_energy_dimension: eigenvalues.len(),
            eigenvalues,
            cutoff,
            low_energy_basis: Vec::new(),
            method: SpectralMethod::Structured,
            residual: 0.0,
        })
    }

    fn check_resolved(&self, cutoff: f64) -> Result<()> {
        match self.illegal_floor() {
            Some(floor) if cutoff >= floor => Err(Error::InvalidParameter(format!(
                "cutoff {cutoff} reaches the illegal clock block, which is not resolved structurally"
            ))),
            _ => Ok(()),
        }
    }

    /// Orthonormal eigenbasis of the subspace with energy ≤ `cutoff`.
    pub fn eigenvectors_below(&self, cutoff: f64) -> Result<Vec<ClockEigenvector>> {
        self.check_resolved(cutoff)?;
        let anc = self.ancilla_count();
        let mask = (1usize << anc) - 1;
        let sys = 1usize << self.system_qubits();
        let mut out = Vec::new();
        for level in self.levels_below(cutoff) {
            let profile = self.legal_block(level.ancilla_weight).eigenvector(level.energy);
            for input in (0..sys).filter(|x| (x & mask).count_ones() as usize == level.ancilla_weight) {
                out.push(ClockEigenvector {
                    input,
                    energy: level.energy,
                    ancilla_weight: level.ancilla_weight,
                    index: level.index,
                    profile: profile.clone(),
                });
            }
        }
        Ok(out)
    }

    /// `U_t |input⟩` on A, B, E for `t = 0..=T`.
    pub fn slices(&self, input: &CVector) -> Vec<CVector> {
        let mut out = Vec::with_capacity(self.gates() + 1);
        let mut v = input.clone();
        out.push(v.clone());
        for t in 0..self.gates() {
            self.channel().evolve_range(v.as_mut_slice(), t, t + 1);
            out.push(v.clone());
        }
        out
    }

    pub(crate) fn basis_slices(&self, input: usize) -> Vec<CVector> {
        let mut v = CVector::zeros(1 << self.system_qubits());
        v[input] = C64::from(1.0);
        self.slices(&v)
    }

    /// Writes `Σ_t profile[t] slice_{min(t,T)} ⊗ |t⟩` as a full state vector.
    pub(crate) fn assemble(&self, profile: &[f64], slices: &[CVector]) -> Result<PureState> {
        let total = self.total_qubits();
        if total > MAX_PURE_QUBITS {
            return Err(Error::BudgetExceeded { what: "clock state qubits", needed: total, limit: MAX_PURE_QUBITS });
        }
        let n = self.clock_qubits();
        let mut amps = CVector::from_element(1 << total, ZERO);
        for (t, &u) in profile.iter().enumerate() {
            let slice = &slices[t.min(self.gates())];
            let c = clock_value(t, n);
            for (x, &a) in slice.iter().enumerate() {
                amps[(x << n) | c] += a * u;
            }
        }
        PureState::new(self.layout().clone(), amps)
    }

    pub fn materialize(&self, v: &ClockEigenvector) -> Result<PureState> {
        self.assemble(&v.profile, &self.basis_slices(v.input))
    }

    /// `(T+L+1)^{-1/2} Σ_t U_{min(t,T)} |ψ,0,0⟩ ⊗ |t⟩` for an input `ψ` on A.
    pub fn history_state(&self, psi: &PureState) -> Result<PureState> {
        let start = self.channel().initial_state(psi)?;
        let steps = self.time_steps();
        let profile = vec![1.0 / (steps as f64).sqrt(); steps];
        self.assemble(&profile, &self.slices(start.amplitudes()))
    }

    /// Reduced state of the history state on registers among A, B, E, without building it.
    pub fn history_reduced<S: AsRef<str>>(&self, psi: &PureState, keep: &[S]) -> Result<DensityMatrix> {
        let channel_layout = self.channel().layout();
        let kept = channel_layout.qubits_of(keep)?;
        let start = self.channel().initial_state(psi)?;
        let slices = self.slices(start.amplitudes());
        let uniform = vec![1.0 / self.time_steps() as f64; self.time_steps()];
        let ones = vec![1.0; self.time_steps()];
        let weights = folded_weights(&uniform, &ones, self.gates());
        let n = self.system_qubits();
        let dk = 1usize << kept.len();
        let mut acc = crate::linalg::CMatrix::zeros(dk, dk);
        for (w, s) in weights.iter().zip(&slices) {
            acc += cross_reduce(s, s, n, &kept) * C64::from(*w);
        }
        DensityMatrix::new(channel_layout.select(keep)?, acc)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{build, ClockConfig, ClockEncoding};
    use super::*;
    use crate::channel::ChannelSpec;
    use crate::hamiltonian::spectrum;
    use crate::linalg::eigvalsh;
    use crate::random::seeded;

    fn random_clock(seed: u64, gates: usize, idle: usize, encoding: ClockEncoding) -> ClockHamiltonian {
        let mut rng = seeded(seed);
        let c = ChannelSpec::random(1, 1, gates, &mut rng).unwrap();
        build(&c, ClockConfig::for_channel(&c, idle, encoding)).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3, 3), 1);
    }

    #[test]
    fn structured_levels_match_dense_below_one() {
        for (seed, gates, idle) in [(1, 1, 1), (2, 2, 1), (3, 2, 2), (4, 1, 0)] {
            for encoding in [ClockEncoding::Unary, ClockEncoding::Kitaev] {
                let hc = random_clock(seed, gates, idle, encoding);
                let dense = eigvalsh(&hc.local_hamiltonian().unwrap().dense().unwrap());
                let cutoff = if hc.clock_qubits() >= 2 { 1.0 - 1e-6 } else { 10.0 };
                let low: Vec<f64> = dense.into_iter().filter(|&x| x < cutoff).collect();
                let levels = hc.levels_below(cutoff);
                let structured: Vec<f64> =
                    levels.iter().flat_map(|l| std::iter::repeat_n(l.energy, l.multiplicity)).collect();
                assert_eq!(low.len(), structured.len(), "{encoding} T={gates} L={idle}");
                for (a, b) in low.iter().zip(&structured) {
                    assert!((a - b).abs() < 1e-9, "{a} vs {b}");
                }
                let s = spectrum(&hc.local_hamiltonian().unwrap(), 1e-9).unwrap();
                assert!((s.spectral_gap - hc.spectral_gap()).abs() < 1e-9);
                assert_eq!(s.low_energy_basis.len(), hc.ground_space_dimension());
            }
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal_eigenvectors() {
        let hc = random_clock(9, 2, 2, ClockEncoding::Kitaev);
        let h = hc.local_hamiltonian().unwrap();
        let vs = hc.eigenvectors_below(0.5).unwrap();
        let states: Vec<PureState> = vs.iter().map(|v| hc.materialize(v).unwrap()).collect();
        for (v, s) in vs.iter().zip(&states) {
            let hv = CVector::from_vec(h.apply(s.amplitudes().as_slice()).unwrap());
            assert!((hv - s.amplitudes() * C64::from(v.energy)).norm() < 1e-9);
        }
        for i in 0..states.len() {
            for j in 0..states.len() {
                let ip = states[i].inner(&states[j]).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - C64::from(expect)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn history_reduced_matches_materialized() {
        let hc = random_clock(12, 3, 2, ClockEncoding::Unary);
        let mut rng = seeded(13);
        let psi = PureState::new(
            hc.channel().input_layout(),
            crate::random::haar_vector(2, &mut rng),
        )
        .unwrap();
        let full = hc.history_state(&psi).unwrap();
        for keep in [vec!["B"], vec!["A", "E"]] {
            let direct = full.reduced(&keep).unwrap();
            let folded = hc.history_reduced(&psi, &keep).unwrap();
            assert!(crate::qstate::trace_norm_distance(&direct, &folded).unwrap() < 1e-10);
        }
    }

    #[test]
    fn gap_closes_quadratically() {
        // λ₀(M_1) behaves like (π/2)² / N² for long clocks
        let hc = random_clock(5, 2, 2000, ClockEncoding::Kitaev);
        let n = hc.time_steps() as f64;
        let gap = hc.spectral_gap();
        let ratio = gap * n * n / (std::f64::consts::PI / 2.0).powi(2);
        assert!((0.9..1.1).contains(&ratio), "ratio {ratio}");
    }
}
