//! Channel-to-Hamiltonian clock construction with post-idling.
//!
//! Registers are laid out A, B, E, C. The clock has `N = T + L` qubits and its legal states
//! are `|t⟩ = |1^t 0^{N−t}⟩`, `t = 0..=N`. The Hamiltonian is `H_in + H_prop + H_clock`:
//!
//! * `H_in` puts `|1⟩⟨1|` on each B and E qubit at time 0, forcing the ancillas to start in |0⟩;
//! * `H_prop` is `Σ_t (|t⟩⟨t| + |t+1⟩⟨t+1|) − V_{t+1} ⊗ |t+1⟩⟨t| − h.c.` with `V_t = I` past `T`;
//! * `H_clock` is `Σ_i |01⟩⟨01|` on neighbouring clock qubits.
//!
//! The unary encoding uses rank-one operators on the whole clock register. The Kitaev encoding
//! checks at most three clock qubits per term, so every term is at most 5-local.

mod history;
mod structure;

pub(crate) use structure::folded_weights;

pub use history::{certify_gap, extract_witness, GapCertificate, GapPoint, WitnessExtraction};
pub use structure::{ClockEigenvector, ClockLevel};

use crate::channel::{ChannelSpec, CircuitFile};
use crate::error::{Error, Result};
use crate::hamiltonian::{LocalHamiltonian, LocalTerm, SparseMatrix};
use crate::linalg::{CMatrix, C64, ONE};
use crate::qstate::RegisterLayout;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Largest clock handled by the structured (non-materialized) routines.
pub const MAX_CLOCK_QUBITS: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockEncoding {
    /// Rank-one operators on the full unary clock, exactly as the equations are written.
    #[serde(alias = "as_written_unary")]
    Unary,
    /// Three-clock-qubit transition and projector forms.
    #[serde(alias = "kitaev_3local")]
    Kitaev,
}

impl std::str::FromStr for ClockEncoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unary" | "as_written_unary" => Ok(Self::Unary),
            "kitaev" | "kitaev_3local" => Ok(Self::Kitaev),
            other => Err(Error::InvalidParameter(format!("unknown clock encoding {other:?}"))),
        }
    }
}

impl std::fmt::Display for ClockEncoding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Unary => "unary",
            Self::Kitaev => "kitaev",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockConfig {
    /// Gate count `T`; must match the channel.
    pub gates: usize,
    /// Idle steps `L`.
    pub idle: usize,
    pub encoding: ClockEncoding,
}

impl ClockConfig {
    pub fn for_channel(channel: &ChannelSpec, idle: usize, encoding: ClockEncoding) -> Self {
        Self { gates: channel.gate_count(), idle, encoding }
    }

    /// Clock qubits `N = T + L`.
    pub fn clock_qubits(&self) -> usize {
        self.gates + self.idle
    }

    /// Number of time steps `T + L + 1`.
    pub fn time_steps(&self) -> usize {
        self.clock_qubits() + 1
    }
}

/// `H_Φ` for a channel, kept in factored form; terms are generated on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct ClockHamiltonian {
    channel: ChannelSpec,
    config: ClockConfig,
    layout: RegisterLayout,
}

/// Integer value of the clock register in state `|t⟩` (C₁ most significant).
pub(crate) fn clock_value(t: usize, clock: usize) -> usize {
    ((1usize << t) - 1) << (clock - t)
}

pub fn build(channel: &ChannelSpec, config: ClockConfig) -> Result<ClockHamiltonian> {
    if config.gates != channel.gate_count() {
        return Err(Error::InvalidParameter(format!(
            "config says T = {} but the circuit has {} gates",
            config.gates,
            channel.gate_count()
        )));
    }
    let n = config.clock_qubits();
    if n == 0 {
        return Err(Error::InvalidParameter("the clock needs T + L ≥ 1".into()));
    }
    if n > MAX_CLOCK_QUBITS {
        return Err(Error::BudgetExceeded { what: "clock qubits", needed: n, limit: MAX_CLOCK_QUBITS });
    }
    let layout = channel.layout().concat(&RegisterLayout::single("C", n)?)?;
    Ok(ClockHamiltonian { channel: channel.clone(), config, layout })
}

impl ClockHamiltonian {
    pub fn channel(&self) -> &ChannelSpec {
        &self.channel
    }

    pub fn config(&self) -> &ClockConfig {
        &self.config
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn gates(&self) -> usize {
        self.config.gates
    }

    pub fn clock_qubits(&self) -> usize {
        self.config.clock_qubits()
    }

    pub fn time_steps(&self) -> usize {
        self.config.time_steps()
    }

    pub fn total_qubits(&self) -> usize {
        self.layout.total_qubits()
    }

    /// Qubits of A, B and E.
    pub(crate) fn system_qubits(&self) -> usize {
        self.channel.qubits()
    }

    /// `2T/(T+L+1)`, the history-state output error.
    pub fn idle_bound(&self) -> f64 {
        2.0 * self.gates() as f64 / self.time_steps() as f64
    }

    /// Global index of clock qubit `C_i`, `i` counted from 1.
    fn clock_qubit(&self, i: usize) -> usize {
        self.system_qubits() + i - 1
    }

    fn ancilla_qubits(&self) -> Vec<usize> {
        (self.channel.n_a()..self.system_qubits()).collect()
    }

    /// All local terms, in the order `H_in`, `H_prop`, `H_clock`.
    pub fn terms(&self) -> Result<Vec<LocalTerm>> {
        let mut terms = self.input_terms()?;
        terms.extend(self.propagation_terms()?);
        terms.extend(self.clock_terms()?);
        Ok(terms)
    }

    pub fn input_terms(&self) -> Result<Vec<LocalTerm>> {
        let n = self.clock_qubits();
        self.ancilla_qubits()
            .into_iter()
            .map(|q| match self.config.encoding {
                ClockEncoding::Unary => {
                    let mut support = vec![q];
                    support.extend((1..=n).map(|i| self.clock_qubit(i)));
                    check_term_width(support.len())?;
                    LocalTerm::new(support, SparseMatrix::from_triplets(1 << (n + 1), [(1 << n, 1 << n, ONE)])?)
                }
                ClockEncoding::Kitaev => LocalTerm::new(vec![q, self.clock_qubit(1)], SparseMatrix::from_triplets(4, [(2, 2, ONE)])?),
            })
            .collect()
    }

    /// The gate applied on the step `t → t+1`, `None` for idle steps.
    fn step_gate(&self, t: usize) -> Option<(&[usize], &CMatrix)> {
        self.channel.steps().get(t).map(|s| (s.support(), s.unitary()))
    }

    pub fn propagation_terms(&self) -> Result<Vec<LocalTerm>> {
        (0..self.clock_qubits())
            .map(|t| match self.config.encoding {
                ClockEncoding::Unary => self.unary_propagation(t),
                ClockEncoding::Kitaev => self.kitaev_propagation(t),
            })
            .collect()
    }

    fn unary_propagation(&self, t: usize) -> Result<LocalTerm> {
        let n = self.clock_qubits();
        let identity = CMatrix::identity(1, 1);
        let (gate_support, v) = self.step_gate(t).unwrap_or((&[], &identity));
        let mut support = gate_support.to_vec();
        support.extend((1..=n).map(|i| self.clock_qubit(i)));
        check_term_width(support.len())?;
        let from = clock_value(t, n);
        let to = clock_value(t + 1, n);
        let gd = v.nrows();
        let mut entries = Vec::with_capacity(2 * gd * gd + 2 * gd);
        for g in 0..gd {
            entries.push(((g << n) | from, (g << n) | from, ONE));
            entries.push(((g << n) | to, (g << n) | to, ONE));
            for h in 0..gd {
                entries.push(((g << n) | to, (h << n) | from, -v[(g, h)]));
                entries.push(((h << n) | from, (g << n) | to, -v[(g, h)].conj()));
            }
        }
        LocalTerm::new(support, SparseMatrix::from_triplets(gd << n, entries)?)
    }

    fn kitaev_propagation(&self, t: usize) -> Result<LocalTerm> {
        let n = self.clock_qubits();
        // clock qubits C_t, C_{t+1}, C_{t+2} that exist, by 1-based index
        let window: Vec<usize> = [t, t + 1, t + 2].into_iter().filter(|&i| i >= 1 && i <= n).collect();
        let identity = CMatrix::identity(1, 1);
        let (gate_support, v) = self.step_gate(t).unwrap_or((&[], &identity));
        let k = window.len();
        let bit = |pattern: usize, clock_index: usize| -> Option<usize> {
            window.iter().position(|&i| i == clock_index).map(|j| (pattern >> (k - 1 - j)) & 1)
        };
        // P_s = |1⟩⟨1|_{C_s} (s ≥ 1) ⊗ |0⟩⟨0|_{C_{s+1}} (s+1 ≤ N)
        let on_time = |pattern: usize, s: usize| -> bool {
            (s == 0 || bit(pattern, s) == Some(1)) && (s + 1 > n || bit(pattern, s + 1) == Some(0))
        };
        let gd = v.nrows();
        let cd = 1usize << k;
        let mut m = CMatrix::zeros(gd * cd, gd * cd);
        for g in 0..gd {
            for p in 0..cd {
                let diag = on_time(p, t) as u8 + on_time(p, t + 1) as u8;
                m[(g * cd + p, g * cd + p)] += C64::from(diag as f64);
            }
        }
        // transition flips C_{t+1} from 0 to 1 when C_t = 1 and C_{t+2} = 0
        let pos = window.iter().position(|&i| i == t + 1).expect("C_{t+1} exists");
        let mut src = 0usize;
        if t >= 1 {
            src |= 1 << (k - 1); // C_t is the first window qubit
        }
        let dst = src | (1 << (k - 1 - pos));
        for g in 0..gd {
            for h in 0..gd {
                m[(g * cd + dst, h * cd + src)] -= v[(g, h)];
                m[(h * cd + src, g * cd + dst)] -= v[(g, h)].conj();
            }
        }
        let mut support = gate_support.to_vec();
        support.extend(window.iter().map(|&i| self.clock_qubit(i)));
        LocalTerm::from_dense(support, &m)
    }

    pub fn clock_terms(&self) -> Result<Vec<LocalTerm>> {
        (1..self.clock_qubits())
            .map(|i| {
                LocalTerm::new(
                    vec![self.clock_qubit(i), self.clock_qubit(i + 1)],
                    SparseMatrix::from_triplets(4, [(1, 1, ONE)])?,
                )
            })
            .collect()
    }

    /// Metadata block attached to emitted Hamiltonian files.
    pub fn metadata(&self) -> Map<String, Value> {
        let mut meta = Map::new();
        meta.insert("T".into(), Value::from(self.gates()));
        meta.insert("L".into(), Value::from(self.config.idle));
        meta.insert("encoding".into(), Value::from(self.config.encoding.to_string()));
        meta.insert(
            "circuit".into(),
            serde_json::to_value(CircuitFile::from(&self.channel)).expect("circuit serializes"),
        );
        meta
    }

    /// Materializes the term list. The Hamiltonian carries the construction in its metadata.
    pub fn local_hamiltonian(&self) -> Result<LocalHamiltonian> {
        Ok(LocalHamiltonian::new(self.layout.clone(), self.terms()?)?.with_metadata(self.metadata()))
    }

    /// Rebuilds the construction recorded in a Hamiltonian's metadata and checks that the
    /// terms agree.
    pub fn from_local_hamiltonian(h: &LocalHamiltonian) -> Result<Self> {
        let meta = h
            .metadata()
            .ok_or_else(|| Error::Malformed("Hamiltonian has no clock metadata".into()))?;
        let field = |k: &str| meta.get(k).ok_or_else(|| Error::Malformed(format!("clock metadata lacks {k:?}")));
        let idle = field("L")?.as_u64().ok_or_else(|| Error::Malformed("\"L\" must be an integer".into()))? as usize;
        let encoding: ClockEncoding = serde_json::from_value(field("encoding")?.clone()).map_err(|e| Error::Malformed(e.to_string()))?;
        let circuit: CircuitFile = serde_json::from_value(field("circuit")?.clone()).map_err(|e| Error::Malformed(e.to_string()))?;
        let channel = ChannelSpec::try_from(circuit)?;
        let hc = build(&channel, ClockConfig::for_channel(&channel, idle, encoding))?;
        if hc.layout != *h.layout() || hc.terms()? != h.terms() {
            return Err(Error::Malformed("terms do not match the recorded clock construction".into()));
        }
        Ok(hc)
    }
}

fn check_term_width(width: usize) -> Result<()> {
    if width > 60 {
        return Err(Error::BudgetExceeded { what: "unary clock term width", needed: width, limit: 60 });
    }
    Ok(())
}
