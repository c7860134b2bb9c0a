//! Channels in Stinespring form: a gate sequence on registers A (input), B (output) and
//! E (environment), with B and E starting in |0…0⟩.

pub mod library;

use crate::error::{Error, Result};
use crate::linalg::{apply_on_support, eigh, from_row_major, identity, to_row_major, unitarity_error, CMatrix, CVector, C64, ZERO};
use crate::qstate::{cross_reduce, DensityMatrix, PureState, RegisterLayout, MAX_DENSE_QUBITS, MAX_PURE_QUBITS};
use crate::random::haar_unitary;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// One gate `V_t` on one or two qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct GateStep {
    support: Vec<usize>,
    unitary: CMatrix,
}

impl GateStep {
    pub fn new(support: Vec<usize>, unitary: CMatrix) -> Result<Self> {
        if support.is_empty() || support.len() > 2 {
            return Err(Error::InvalidParameter(format!("gates act on 1 or 2 qubits, got {}", support.len())));
        }
        if support.len() == 2 && support[0] == support[1] {
            return Err(Error::InvalidParameter("gate support repeats a qubit".into()));
        }
        let dim = 1usize << support.len();
        if unitary.nrows() != dim || unitary.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: unitary.nrows() });
        }
        let err = unitarity_error(&unitary);
        if err > 1e-9 {
            return Err(Error::NotUnitary(err));
        }
        Ok(Self { support, unitary })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn adjoint(&self) -> Self {
        Self { support: self.support.clone(), unitary: self.unitary.adjoint() }
    }

    pub(crate) fn shifted(&self, map: impl Fn(usize) -> usize) -> Self {
        Self { support: self.support.iter().map(|&q| map(q)).collect(), unitary: self.unitary.clone() }
    }
}

/// Gate sequence `V_T … V_1` on A, B, E with `|E| = |A| + |B|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitFile", into = "CircuitFile")]
pub struct ChannelSpec {
    layout: RegisterLayout,
    steps: Vec<GateStep>,
}

impl ChannelSpec {
    pub fn new(n_a: usize, n_b: usize, steps: Vec<GateStep>) -> Result<Self> {
        let layout = RegisterLayout::new([("A", n_a), ("B", n_b), ("E", n_a + n_b)])?;
        let n = layout.total_qubits();
        if n > MAX_PURE_QUBITS {
            return Err(Error::BudgetExceeded { what: "channel qubits", needed: n, limit: MAX_PURE_QUBITS });
        }
        for s in &steps {
            if let Some(&q) = s.support.iter().find(|&&q| q >= n) {
                return Err(Error::QubitOutOfRange { index: q, qubits: n });
            }
        }
        Ok(Self { layout, steps })
    }

    /// Haar-random two-qubit gates on uniformly random qubit pairs.
    pub fn random(n_a: usize, n_b: usize, gates: usize, rng: &mut impl Rng) -> Result<Self> {
        let n = 2 * (n_a + n_b);
        let steps = (0..gates)
            .map(|_| {
                let a = rng.random_range(0..n);
                let mut b = rng.random_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                GateStep::new(vec![a, b], haar_unitary(4, rng))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_a, n_b, steps)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn steps(&self) -> &[GateStep] {
        &self.steps
    }

    /// Number of gates `T`.
    pub fn gate_count(&self) -> usize {
        self.steps.len()
    }

    pub fn n_a(&self) -> usize {
        self.layout.registers()[0].1
    }

    pub fn n_b(&self) -> usize {
        self.layout.registers()[1].1
    }

    pub fn n_e(&self) -> usize {
        self.layout.registers()[2].1
    }

    pub fn qubits(&self) -> usize {
        self.layout.total_qubits()
    }

    pub fn input_layout(&self) -> RegisterLayout {
        RegisterLayout::single("A", self.n_a()).expect("n_a > 0")
    }

    /// `|ψ⟩_A ⊗ |0⟩_B ⊗ |0⟩_E`.
    pub fn initial_state(&self, psi: &PureState) -> Result<PureState> {
        if psi.layout().total_qubits() != self.n_a() {
            return Err(Error::LayoutMismatch("input must live on register A".into()));
        }
        let mut v = CVector::zeros(self.layout.dim());
        let shift = self.n_b() + self.n_e();
        for (i, &a) in psi.amplitudes().iter().enumerate() {
            v[i << shift] = a;
        }
        PureState::new(self.layout.clone(), v)
    }

    /// Applies `V_{end} … V_{start+1}` in place.
    pub fn evolve_range(&self, state: &mut [C64], start: usize, end: usize) {
        let n = self.qubits();
        for s in &self.steps[start..end] {
            apply_on_support(&s.unitary, &s.support, n, state);
        }
    }

    pub fn evolve(&self, state: &mut [C64]) {
        self.evolve_range(state, 0, self.steps.len());
    }

    /// `U_Φ = V_T ⋯ V_1` as a dense matrix.
    pub fn dilation_unitary(&self) -> Result<CMatrix> {
        let n = self.qubits();
        if n > MAX_DENSE_QUBITS {
            return Err(Error::BudgetExceeded { what: "dense dilation qubits", needed: n, limit: MAX_DENSE_QUBITS });
        }
        let mut u = identity(1 << n);
        let dim = 1usize << n;
        for col in u.as_mut_slice().chunks_mut(dim) {
            self.evolve(col);
        }
        Ok(u)
    }

    /// Output register(s) left after tracing out `trace_out`, for input `ρ_A`.
    pub fn apply<S: AsRef<str>>(&self, rho_a: &DensityMatrix, trace_out: &[S]) -> Result<DensityMatrix> {
        if rho_a.layout().total_qubits() != self.n_a() {
            return Err(Error::LayoutMismatch("input must live on register A".into()));
        }
        let keep = self.layout.complement_names(trace_out);
        if keep.len() + trace_out.len() != self.layout.registers().len() {
            return Err(Error::LayoutMismatch("trace_out must name registers of A, B, E".into()));
        }
        let kept_layout = self.layout.select(&keep)?;
        if kept_layout.total_qubits() > MAX_DENSE_QUBITS {
            return Err(Error::BudgetExceeded { what: "output qubits", needed: kept_layout.total_qubits(), limit: MAX_DENSE_QUBITS });
        }
        let kept = self.layout.qubits_of(&keep)?;
        let e = eigh(rho_a.matrix());
        let dk = kept_layout.dim();
        let mut out = CMatrix::zeros(dk, dk);
        for (k, &p) in e.values.iter().enumerate() {
            if p <= 1e-15 {
                continue;
            }
            let v = e.vectors.column(k).into_owned();
            let psi = PureState::normalized(self.input_layout(), v)?;
            let mut full = self.initial_state(&psi)?.into_amplitudes();
            self.evolve(full.as_mut_slice());
            out += cross_reduce(&full, &full, self.qubits(), &kept) * C64::from(p);
        }
        DensityMatrix::from_matrix(kept_layout, out)
    }

    /// `Φ(ρ) = Tr_AE U(ρ ⊗ |0⟩⟨0|)U†` on register B.
    pub fn apply_to_b(&self, rho_a: &DensityMatrix) -> Result<DensityMatrix> {
        self.apply(rho_a, &["A", "E"])
    }

    /// Normalized Choi state on `R ⊗ (kept registers)`, R a reference copy of A.
    pub fn choi_state<S: AsRef<str>>(&self, trace_out: &[S]) -> Result<DensityMatrix> {
        let n_a = self.n_a();
        let n = self.qubits();
        if n + n_a > MAX_PURE_QUBITS {
            return Err(Error::BudgetExceeded { what: "Choi purification qubits", needed: n + n_a, limit: MAX_PURE_QUBITS });
        }
        let keep = self.layout.complement_names(trace_out);
        let kept_layout = self.layout.select(&keep)?;
        let out_layout = RegisterLayout::single("R", n_a)?.concat(&kept_layout)?;
        if out_layout.total_qubits() > MAX_DENSE_QUBITS {
            return Err(Error::BudgetExceeded { what: "Choi qubits", needed: out_layout.total_qubits(), limit: MAX_DENSE_QUBITS });
        }
        let kept = self.layout.qubits_of(&keep)?;
        // R ⊗ (ABE): the A-block for reference index i is U|i,0,0⟩ / √d_A
        let dim_sys = self.layout.dim();
        let da = 1usize << n_a;
        let dk = kept_layout.dim();
        let mut columns = Vec::with_capacity(da);
        for i in 0..da {
            let mut v = vec![ZERO; dim_sys];
            v[i << (n - n_a)] = C64::from(1.0 / (da as f64).sqrt());
            self.evolve(&mut v);
            columns.push(CVector::from_vec(v));
        }
        let mut j = CMatrix::zeros(da * dk, da * dk);
        for i in 0..da {
            for k in 0..da {
                let block = cross_reduce(&columns[i], &columns[k], n, &kept);
                j.view_mut((i * dk, k * dk), (dk, dk)).copy_from(&block);
            }
        }
        DensityMatrix::from_matrix(out_layout, j)
    }

    /// The purification trick: A gains a second copy A′ that the circuit never touches, so a
    /// pure input on AA′ reaches the circuit as an arbitrary mixed state on A. E grows by |A|
    /// to keep `|E| = |A| + |B|`.
    pub fn with_traced_input_copy(&self) -> Result<Self> {
        let n_a = self.n_a();
        let steps = self
            .steps
            .iter()
            .map(|s| s.shifted(|q| if q < n_a { q } else { q + n_a }))
            .collect();
        Self::new(2 * n_a, self.n_b(), steps)
    }

    /// Gates on the same registers, appended after this circuit.
    pub fn then(&self, more: &[GateStep]) -> Result<Self> {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(more);
        Self::new(self.n_a(), self.n_b(), steps)
    }
}

/// `Φ(ρ) = d_A · Tr_R[(ρᵀ ⊗ I) J]` from a normalized Choi state on R ⊗ output.
pub fn contract_choi(choi: &DensityMatrix, rho_a: &DensityMatrix) -> Result<DensityMatrix> {
    let regs = choi.layout().registers();
    if regs.is_empty() || regs[0].0 != "R" {
        return Err(Error::LayoutMismatch("Choi state must start with reference register R".into()));
    }
    let da = rho_a.dim();
    if regs[0].1 != rho_a.layout().total_qubits() {
        return Err(Error::DimensionMismatch { expected: 1 << regs[0].1, found: da });
    }
    let out_names: Vec<&str> = choi.layout().names().into_iter().skip(1).collect();
    let out_layout = choi.layout().select(&out_names)?;
    let dk = out_layout.dim();
    let j = choi.matrix();
    let mut out = CMatrix::zeros(dk, dk);
    for i in 0..da {
        for k in 0..da {
            // block J_{ik} = Φ(|i⟩⟨k|)/d_A picks up (ρᵀ)_{ki} = ρ_{ik}
            let w = rho_a.matrix()[(i, k)];
            if w == ZERO {
                continue;
            }
            out += j.view((i * dk, k * dk), (dk, dk)) * w;
        }
    }
    DensityMatrix::from_matrix(out_layout, out * C64::from(da as f64))
}

/// On-disk circuit format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    #[serde(rename = "nA")]
    pub n_a: usize,
    #[serde(rename = "nB")]
    pub n_b: usize,
    pub steps: Vec<StepFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepFile {
    pub support: Vec<usize>,
    pub matrix: Vec<[f64; 2]>,
}

impl From<&ChannelSpec> for CircuitFile {
    fn from(c: &ChannelSpec) -> Self {
        Self {
            n_a: c.n_a(),
            n_b: c.n_b(),
            steps: c
                .steps
                .iter()
                .map(|s| StepFile { support: s.support.clone(), matrix: to_row_major(&s.unitary) })
                .collect(),
        }
    }
}

impl From<ChannelSpec> for CircuitFile {
    fn from(c: ChannelSpec) -> Self {
        Self::from(&c)
    }
}

impl TryFrom<CircuitFile> for ChannelSpec {
    type Error = Error;

    fn try_from(f: CircuitFile) -> Result<Self> {
        let steps = f
            .steps
            .into_iter()
            .map(|s| {
                if s.support.is_empty() || s.support.len() > 2 {
                    return Err(Error::Malformed(format!("gate support of size {}", s.support.len())));
                }
                let dim = 1usize << s.support.len();
                let m = from_row_major(dim, &s.matrix)
                    .ok_or_else(|| Error::Malformed(format!("gate needs {} entries, found {}", dim * dim, s.matrix.len())))?;
                GateStep::new(s.support, m)
            })
            .collect::<Result<Vec<_>>>()?;
        ChannelSpec::new(f.n_a, f.n_b, steps)
    }
}

impl ChannelSpec {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CircuitFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: CircuitFile = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        f.try_into()
    }
}
