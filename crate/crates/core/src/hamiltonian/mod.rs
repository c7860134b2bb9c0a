//! Local Hamiltonians `H = Σⱼ Hⱼ`: assembly, spectra, thermodynamics.

mod json;
mod spectrum;
mod term;
mod thermo;

pub use json::HamiltonianFile;
pub use spectrum::{ground_state_lanczos, operator_norm, spectrum, LanczosOptions, SpectralMethod, SpectralSummary, DEGENERACY_TOL};
pub use term::{LocalTerm, SparseMatrix};
pub use thermo::{
    free_energy, free_energy_functional, gibbs_state, log_partition_function, partition_function,
    sampled_energy_estimate, ThermalSpectrum,
};

pub(crate) use term::PlacedTerm;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ZERO};
use crate::qstate::{DensityMatrix, PureState, RegisterLayout, MAX_DENSE_QUBITS, MAX_PURE_QUBITS};
use serde_json::{Map, Value};

/// Pure states with at most one nonzero amplitude in this many take the sparse energy path.
const SPARSE_STATE_RATIO: usize = 64;

/// Upper limit on stored nonzeros of an assembled operator.
pub const MAX_ASSEMBLED_NNZ: usize = 60_000_000;

/// A sum of local Hermitian terms on a register layout.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "HamiltonianFile", into = "HamiltonianFile")]
pub struct LocalHamiltonian {
    layout: RegisterLayout,
    terms: Vec<LocalTerm>,
    locality: usize,
    metadata: Option<Map<String, Value>>,
}

impl LocalHamiltonian {
    /// Locality is the largest support size.
    pub fn new(layout: RegisterLayout, terms: Vec<LocalTerm>) -> Result<Self> {
        let locality = terms.iter().map(|t| t.support().len()).max().unwrap_or(0);
        Self::with_locality(layout, terms, locality)
    }

    pub fn with_locality(layout: RegisterLayout, terms: Vec<LocalTerm>, locality: usize) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter("a Hamiltonian needs at least one term".into()));
        }
        let n = layout.total_qubits();
        for t in &terms {
            if let Some(&q) = t.support().iter().find(|&&q| q >= n) {
                return Err(Error::QubitOutOfRange { index: q, qubits: n });
            }
            if t.support().len() > locality {
                return Err(Error::InvalidParameter(format!(
                    "term on {} qubits exceeds locality {locality}",
                    t.support().len()
                )));
            }
        }
        Ok(Self { layout, terms, locality, metadata: None })
    }

    /// The zero operator, stored as a single vanishing 1-local term.
    pub fn zero(layout: RegisterLayout) -> Result<Self> {
        let term = LocalTerm::new(vec![0], SparseMatrix::zeros(2))?;
        Self::new(layout, vec![term])
    }

    pub fn with_metadata(mut self, metadata: Map<String, Value>) -> Self {
        self.metadata = Some(metadata);
        self
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn locality(&self) -> usize {
        self.locality
    }

    pub fn metadata(&self) -> Option<&Map<String, Value>> {
        self.metadata.as_ref()
    }

    pub fn qubits(&self) -> usize {
        self.layout.total_qubits()
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Every term multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let entries = t.matrix().entries().iter().map(|&(r, c, v)| (r, c, v * factor));
                LocalTerm::new(t.support().to_vec(), SparseMatrix::from_triplets(t.matrix().dim(), entries)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { layout: self.layout.clone(), terms, locality: self.locality, metadata: self.metadata.clone() })
    }

    /// Sum of the individual term norms, an upper bound on ‖H‖∞.
    pub fn norm_upper_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.norm()).sum()
    }

    fn check_budget(&self, limit: usize) -> Result<()> {
        let n = self.qubits();
        if n > limit {
            return Err(Error::BudgetExceeded { what: "qubits", needed: n, limit });
        }
        Ok(())
    }

    pub(crate) fn placed_terms(&self) -> Vec<PlacedTerm> {
        let n = self.qubits();
        self.terms.iter().map(|t| t.placed(n)).collect()
    }

    /// `H x` without assembling, term by term.
    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        self.check_budget(MAX_PURE_QUBITS)?;
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        let mut y = vec![ZERO; x.len()];
        for t in self.placed_terms() {
            t.apply_add(x, &mut y);
        }
        Ok(y)
    }

    /// Compressed-row form of the full operator.
    pub fn assemble(&self) -> Result<SparseOperator> {
        self.check_budget(MAX_PURE_QUBITS)?;
        let placed = self.placed_terms();
        let estimate: usize = placed.iter().map(|p| p.entries.len() << p.rest.len()).sum();
        if estimate > MAX_ASSEMBLED_NNZ {
            return Err(Error::BudgetExceeded { what: "assembled nonzeros", needed: estimate, limit: MAX_ASSEMBLED_NNZ });
        }
        let mut triplets = Vec::with_capacity(estimate);
        for p in &placed {
            for base in p.rest_bases() {
                for &(r, c, v) in &p.entries {
                    triplets.push((base | r, base | c, v));
                }
            }
        }
        Ok(SparseOperator::from_triplets(self.dim(), triplets))
    }

    /// Dense matrix; only for layouts within the dense budget.
    pub fn dense(&self) -> Result<CMatrix> {
        self.check_budget(MAX_DENSE_QUBITS)?;
        Ok(self.assemble()?.to_dense())
    }

    /// `⟨ψ|H|ψ⟩` or `Tr(Hρ)`.
    pub fn energy<'a>(&self, state: impl Into<StateRef<'a>>) -> Result<f64> {
        let state = state.into();
        self.check_layout(state.layout())?;
        match state {
            StateRef::Pure(psi) => {
                let x = psi.amplitudes().as_slice();
                let support: Vec<(usize, C64)> =
                    x.iter().enumerate().filter(|(_, a)| **a != ZERO).map(|(i, &a)| (i, a)).collect();
                if support.len() * SPARSE_STATE_RATIO <= x.len() {
                    return Ok(self.sparse_energy(&support));
                }
                let y = self.apply(x)?;
                let e: C64 = x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
                Ok(e.re)
            }
            StateRef::Mixed(rho) => Ok(self.assemble()?.trace_product(rho.matrix()).re),
        }
    }

    /// `⟨ψ|H|ψ⟩` from the nonzero amplitudes only, listed by ascending index. Each term entry
    /// `(r, c)` maps a nonzero `k` reading `c` on the support to `k` with `r` written there.
    fn sparse_energy(&self, support: &[(usize, C64)]) -> f64 {
        let amplitude = |i: usize| support.binary_search_by_key(&i, |&(k, _)| k).ok().map(|j| support[j].1);
        let mut e = ZERO;
        for t in self.placed_terms() {
            let mask = t.positions.iter().fold(0usize, |m, &p| m | (1 << p));
            for &(k, xk) in support {
                let (base, local) = (k & !mask, k & mask);
                for &(r, c, v) in &t.entries {
                    if c == local {
                        if let Some(xi) = amplitude(base | r) {
                            e += xi.conj() * v * xk;
                        }
                    }
                }
            }
        }
        e.re
    }

    pub(crate) fn check_layout(&self, layout: &RegisterLayout) -> Result<()> {
        if layout != &self.layout {
            return Err(Error::LayoutMismatch(format!(
                "state layout {:?} differs from Hamiltonian layout {:?}",
                layout.registers(),
                self.layout.registers()
            )));
        }
        Ok(())
    }
}

/// A state argument for energy functions.
#[derive(Clone, Copy, Debug)]
pub enum StateRef<'a> {
    Pure(&'a PureState),
    Mixed(&'a DensityMatrix),
}

impl<'a> StateRef<'a> {
    pub fn layout(&self) -> &'a RegisterLayout {
        match self {
            StateRef::Pure(p) => p.layout(),
            StateRef::Mixed(r) => r.layout(),
        }
    }

    /// Entries `Tr_rest(ρ)[a, b]` of the reduced state on a term support, for the listed local indices.
    pub(crate) fn reduced_block(&self, term: &PlacedTerm, local_of: &[usize]) -> CMatrix {
        let k = local_of.len();
        let mut m = CMatrix::zeros(k, k);
        for base in term.rest_bases() {
            for (i, &a) in local_of.iter().enumerate() {
                for (j, &b) in local_of.iter().enumerate() {
                    m[(i, j)] += match self {
                        StateRef::Pure(p) => {
                            let x = p.amplitudes();
                            x[base | a] * x[base | b].conj()
                        }
                        StateRef::Mixed(r) => r.matrix()[(base | a, base | b)],
                    };
                }
            }
        }
        m
    }
}

impl<'a> From<&'a PureState> for StateRef<'a> {
    fn from(p: &'a PureState) -> Self {
        StateRef::Pure(p)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(r: &'a DensityMatrix) -> Self {
        StateRef::Mixed(r)
    }
}

/// Hermitian operator in compressed-row storage.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<C64>,
}

impl SparseOperator {
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_start = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("nonempty") += v;
                continue;
            }
            last = Some((r, c));
            row_start[r + 1] += 1;
            cols.push(c);
            values.push(v);
        }
        for r in 0..dim {
            row_start[r + 1] += row_start[r];
        }
        Self { dim, row_start, cols, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_start[r]..self.row_start[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r).filter(|&(cc, _)| cc == c).map(|(_, v)| v).sum()
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        use rayon::prelude::*;
        (0..self.dim)
            .into_par_iter()
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    /// `Tr(H M)`.
    pub fn trace_product(&self, m: &CMatrix) -> C64 {
        let mut acc = ZERO;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                acc += v * m[(c, r)];
            }
        }
        acc
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r).conj()).norm());
            }
        }
        worst
    }
}
