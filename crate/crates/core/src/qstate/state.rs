use super::layout::RegisterLayout;
use crate::error::{Error, Result};
use crate::linalg::{
    c64, eigvalsh, hermiticity_error, hermitize, kron, kron_vec, permutation_indices,
    split_index_table, trace, CMatrix, CVector, C64, ONE, ZERO,
};

/// Largest density matrix the library will materialize.
pub const MAX_DENSE_QUBITS: usize = 12;
/// Largest state vector the library will materialize.
pub const MAX_PURE_QUBITS: usize = 24;

const STATE_TOL: f64 = 1e-9;

fn check_qubits(what: &'static str, qubits: usize, limit: usize) -> Result<()> {
    if qubits > limit {
        return Err(Error::BudgetExceeded { what, needed: qubits, limit });
    }
    Ok(())
}

/// Normalized state vector on a register layout.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    layout: RegisterLayout,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(layout: RegisterLayout, amplitudes: CVector) -> Result<Self> {
        check_qubits("pure state qubits", layout.total_qubits(), MAX_PURE_QUBITS)?;
        if amplitudes.len() != layout.dim() {
            return Err(Error::DimensionMismatch { expected: layout.dim(), found: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(Self { layout, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm first.
    pub fn normalized(layout: RegisterLayout, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        Self::new(layout, amplitudes / c64(norm, 0.0))
    }

    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        let dim = layout.dim();
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: index });
        }
        let mut v = CVector::zeros(dim);
        v[index] = ONE;
        Self::new(layout, v)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        check_qubits("density matrix qubits", self.layout.total_qubits(), MAX_DENSE_QUBITS)?;
        Ok(DensityMatrix {
            layout: self.layout.clone(),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        })
    }

    /// Reduced state on the kept registers, without forming the full density matrix.
    pub fn reduced<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityMatrix> {
        let kept = self.layout.qubits_of(keep)?;
        let layout = self.layout.select(keep)?;
        check_qubits("density matrix qubits", kept.len(), MAX_DENSE_QUBITS)?;
        let m = cross_reduce(&self.amplitudes, &self.amplitudes, self.layout.total_qubits(), &kept);
        Ok(DensityMatrix { layout, matrix: hermitize(&m) })
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let layout = self.layout.concat(&other.layout)?;
        check_qubits("pure state qubits", layout.total_qubits(), MAX_PURE_QUBITS)?;
        Ok(PureState { layout, amplitudes: kron_vec(&self.amplitudes, &other.amplitudes) })
    }

    /// Reorders registers into the given name order.
    pub fn reorder<S: AsRef<str>>(&self, names: &[S]) -> Result<PureState> {
        let (layout, perm) = reorder_plan(&self.layout, names)?;
        let amplitudes = CVector::from_fn(self.dim(), |i, _| self.amplitudes[perm[i]]);
        Ok(PureState { layout, amplitudes })
    }

    pub fn with_layout(&self, layout: RegisterLayout) -> Result<PureState> {
        if layout.total_qubits() != self.layout.total_qubits() {
            return Err(Error::LayoutMismatch("relabeling must keep the qubit count".into()));
        }
        Ok(PureState { layout, amplitudes: self.amplitudes.clone() })
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix on a register layout.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    layout: RegisterLayout,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity to 1e-9.
    pub fn new(layout: RegisterLayout, matrix: CMatrix) -> Result<Self> {
        check_qubits("density matrix qubits", layout.total_qubits(), MAX_DENSE_QUBITS)?;
        if matrix.nrows() != layout.dim() || matrix.ncols() != layout.dim() {
            return Err(Error::DimensionMismatch { expected: layout.dim(), found: matrix.nrows() });
        }
        let herm = hermiticity_error(&matrix);
        if herm > STATE_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = trace(&matrix);
        if (tr - ONE).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let matrix = hermitize(&matrix);
        let min = eigvalsh(&matrix).first().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { layout, matrix })
    }

    /// Hermitizes and divides by the trace; skips the positivity check. For matrices that are
    /// states by construction.
    pub(crate) fn from_matrix(layout: RegisterLayout, matrix: CMatrix) -> Result<Self> {
        check_qubits("density matrix qubits", layout.total_qubits(), MAX_DENSE_QUBITS)?;
        if matrix.nrows() != layout.dim() {
            return Err(Error::DimensionMismatch { expected: layout.dim(), found: matrix.nrows() });
        }
        let tr = trace(&matrix).re;
        if !(tr > 0.0) {
            return Err(Error::InvalidState("nonpositive trace".into()));
        }
        let matrix = hermitize(&matrix) / c64(tr, 0.0);
        Ok(Self { layout, matrix })
    }

    pub fn from_pure(state: &PureState) -> Result<Self> {
        state.to_density()
    }

    pub fn maximally_mixed(layout: RegisterLayout) -> Result<Self> {
        check_qubits("density matrix qubits", layout.total_qubits(), MAX_DENSE_QUBITS)?;
        let dim = layout.dim();
        Ok(Self { layout, matrix: CMatrix::identity(dim, dim) / c64(dim as f64, 0.0) })
    }

    /// `|0…0⟩⟨0…0|`.
    pub fn zero_state(layout: RegisterLayout) -> Result<Self> {
        check_qubits("density matrix qubits", layout.total_qubits(), MAX_DENSE_QUBITS)?;
        let dim = layout.dim();
        let mut m = CMatrix::zeros(dim, dim);
        m[(0, 0)] = ONE;
        Ok(Self { layout, matrix: m })
    }

    /// Convex combination `Σ pᵢ ρᵢ`; all states must share a layout.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        if weights.len() != states.len() {
            return Err(Error::InvalidParameter("one weight per state".into()));
        }
        let mut m = CMatrix::zeros(first.dim(), first.dim());
        for (w, s) in weights.iter().zip(states) {
            if s.layout != first.layout {
                return Err(Error::LayoutMismatch("mixture components differ".into()));
            }
            m += s.matrix.scale(*w);
        }
        Self::from_matrix(first.layout.clone(), m)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityMatrix> {
        let kept = self.layout.qubits_of(keep)?;
        let layout = self.layout.select(keep)?;
        let m = partial_trace_matrix(&self.matrix, self.layout.total_qubits(), &kept);
        Ok(DensityMatrix { layout, matrix: hermitize(&m) })
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let layout = self.layout.concat(&other.layout)?;
        check_qubits("density matrix qubits", layout.total_qubits(), MAX_DENSE_QUBITS)?;
        Ok(DensityMatrix { layout, matrix: kron(&self.matrix, &other.matrix) })
    }

    pub fn reorder<S: AsRef<str>>(&self, names: &[S]) -> Result<DensityMatrix> {
        let (layout, perm) = reorder_plan(&self.layout, names)?;
        let matrix = CMatrix::from_fn(self.dim(), self.dim(), |i, j| self.matrix[(perm[i], perm[j])]);
        Ok(DensityMatrix { layout, matrix })
    }

    pub fn with_layout(&self, layout: RegisterLayout) -> Result<DensityMatrix> {
        if layout.total_qubits() != self.layout.total_qubits() {
            return Err(Error::LayoutMismatch("relabeling must keep the qubit count".into()));
        }
        Ok(DensityMatrix { layout, matrix: self.matrix.clone() })
    }
}

fn reorder_plan<S: AsRef<str>>(layout: &RegisterLayout, names: &[S]) -> Result<(RegisterLayout, Vec<usize>)> {
    if names.len() != layout.registers().len() {
        return Err(Error::LayoutMismatch("reorder must list every register once".into()));
    }
    let mut regs = Vec::new();
    let mut order = Vec::new();
    for n in names {
        let n = n.as_ref();
        regs.push((n.to_string(), layout.qubit_count(n)?));
        order.extend(layout.range(n)?);
    }
    let new_layout = RegisterLayout::new(regs)?;
    Ok((new_layout, permutation_indices(layout.total_qubits(), &order)))
}

/// `Tr_rest ρ` keeping `kept` qubits (in the given order).
pub fn partial_trace_matrix(m: &CMatrix, n: usize, kept: &[usize]) -> CMatrix {
    let (table, dk, dr) = split_index_table(n, kept);
    let mut out = CMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = ZERO;
            for r in 0..dr {
                acc += m[(table[a * dr + r], table[b * dr + r])];
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// `Tr_rest |u⟩⟨v|` keeping `kept` qubits. With `u = v` this is the reduced state of a pure state.
pub fn cross_reduce(u: &CVector, v: &CVector, n: usize, kept: &[usize]) -> CMatrix {
    let (table, dk, dr) = split_index_table(n, kept);
    let mu = CMatrix::from_fn(dk, dr, |a, r| u[table[a * dr + r]]);
    let mv = if std::ptr::eq(u, v) {
        mu.clone()
    } else {
        CMatrix::from_fn(dk, dr, |a, r| v[table[a * dr + r]])
    };
    &mu * mv.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{ginibre_density, haar_vector, seeded};

    fn bell() -> PureState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let layout = RegisterLayout::new([("A", 1), ("B", 1)]).unwrap();
        PureState::new(layout, CVector::from_vec(vec![c64(h, 0.0), ZERO, ZERO, c64(h, 0.0)])).unwrap()
    }

    #[test]
    fn tensor_of_basis_states() {
        let a = PureState::basis(RegisterLayout::single("A", 1).unwrap(), 0).unwrap();
        let b = PureState::basis(RegisterLayout::single("B", 1).unwrap(), 1).unwrap();
        let ab = a.tensor(&b).unwrap();
        let expect = [ZERO, ONE, ZERO, ZERO];
        for (x, y) in ab.amplitudes().iter().zip(expect) {
            assert_eq!(*x, y);
        }
        assert!(a.tensor(&a).is_err());
    }

    #[test]
    fn maximally_mixed_tensor() {
        let a = DensityMatrix::maximally_mixed(RegisterLayout::single("A", 1).unwrap()).unwrap();
        let b = DensityMatrix::maximally_mixed(RegisterLayout::single("B", 1).unwrap()).unwrap();
        let ab = a.tensor(&b).unwrap();
        for i in 0..4 {
            assert!((ab.matrix()[(i, i)].re - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn tensor_matches_index_loop() {
        let mut rng = seeded(3);
        let ra = ginibre_density(2, 2, &mut rng);
        let rb = ginibre_density(2, 2, &mut rng);
        let a = DensityMatrix::new(RegisterLayout::single("A", 1).unwrap(), ra.clone()).unwrap();
        let b = DensityMatrix::new(RegisterLayout::single("B", 1).unwrap(), rb.clone()).unwrap();
        let ab = a.tensor(&b).unwrap();
        for i1 in 0..2 {
            for i2 in 0..2 {
                for j1 in 0..2 {
                    for j2 in 0..2 {
                        let want = ra[(i1, j1)] * rb[(i2, j2)];
                        assert!((ab.matrix()[(2 * i1 + i2, 2 * j1 + j2)] - want).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let r = bell().reduced(&["A"]).unwrap();
        assert!((r.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!(r.matrix()[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn product_marginal() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let layout = RegisterLayout::new([("A", 1), ("B", 1)]).unwrap();
        // |0>|+>
        let s = PureState::new(layout, CVector::from_vec(vec![c64(h, 0.0), c64(h, 0.0), ZERO, ZERO])).unwrap();
        let r = s.to_density().unwrap().partial_trace(&["A"]).unwrap();
        assert!((r.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(r.matrix()[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn partial_trace_matches_index_sum() {
        let mut rng = seeded(5);
        let layout = RegisterLayout::new([("A", 1), ("B", 1), ("C", 1)]).unwrap();
        let psi = PureState::new(layout, haar_vector(8, &mut rng)).unwrap();
        let rho = psi.to_density().unwrap();
        // keep A and C, trace B
        let red = rho.partial_trace(&["A", "C"]).unwrap();
        let m = rho.matrix();
        for a in 0..2 {
            for c in 0..2 {
                for a2 in 0..2 {
                    for c2 in 0..2 {
                        let mut acc = ZERO;
                        for b in 0..2 {
                            acc += m[(4 * a + 2 * b + c, 4 * a2 + 2 * b + c2)];
                        }
                        assert!((red.matrix()[(2 * a + c, 2 * a2 + c2)] - acc).norm() < 1e-12);
                    }
                }
            }
        }
        let via_vector = psi.reduced(&["A", "C"]).unwrap();
        assert!((via_vector.matrix() - red.matrix()).norm() < 1e-12);
    }

    #[test]
    fn reorder_swaps_registers() {
        let layout = RegisterLayout::new([("A", 1), ("B", 1)]).unwrap();
        let s = PureState::basis(layout, 0b01).unwrap();
        let r = s.reorder(&["B", "A"]).unwrap();
        assert_eq!(r.amplitudes()[0b10], ONE);
        assert_eq!(r.layout().names(), vec!["B", "A"]);
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let l = RegisterLayout::single("A", 1).unwrap();
        let not_unit_trace = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(l.clone(), not_unit_trace).is_err());
        let negative = CMatrix::from_row_slice(2, 2, &[c64(1.5, 0.0), ZERO, ZERO, c64(-0.5, 0.0)]);
        assert!(DensityMatrix::new(l, negative).is_err());
    }
}
