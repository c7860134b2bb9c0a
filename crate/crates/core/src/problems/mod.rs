//! Promise problems about low-energy states, brute-force deciders for them, and the
//! parameter-exact reductions between them.
//!
//! Deciders search the span of eigenvectors below an energy cutoff. Answers inside a promise
//! gap come back as [`Decision::Undecided`]; they are never rounded to YES or NO.

mod deciders;
mod model;
mod reductions;
mod search;
pub mod suites;
mod verifier;

pub use deciders::{
    check_cimm, decide_cimm, decide_fea_exact, decide_heles, decide_leaps, decide_leles, decide_maxoutqea,
    decide_ppio, decide_sepham, DeciderOptions,
};
pub use model::{
    optimize_low_energy, optimize_model, HamiltonianSource, LowEnergyModel, Objective, Optimum, DEFAULT_RESTARTS,
    ENERGY_TOL, MAX_LOW_ENERGY_DIMENSION,
};
pub use reductions::{
    ppio_leaps_parameters, reduce_maxoutqea_to_heles, reduce_ppio_to_leaps, reduce_ppio_to_leaps_with_idle, reduce_ppio_to_leles,
    reduce_sepham_to_leaps, Reduction, ReductionReport, LEAPS_BETA_A6_BOUND, MAX_IDLE,
};
pub use verifier::leaps_qma_verifier;

use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::hamiltonian::LocalHamiltonian;
use crate::linalg::C64;
use crate::qstate::PureState;
use serde::{Deserialize, Serialize};

/// Slack allowed when a witness is checked against a threshold.
pub const THRESHOLD_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Decision {
    Yes,
    No,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerReport {
    /// Which threshold the search was run for, e.g. `"yes"` at cutoff α or `"no"` at β.
    pub phase: String,
    pub objective: Objective,
    pub cutoff: f64,
    pub dimension: usize,
    pub restarts: usize,
    pub iterations: u64,
    pub evaluations: u64,
    pub best_objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    /// Coefficients in the low-energy eigenbasis, `[re, im]`.
    pub coefficients: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    pub objective: f64,
    /// Full amplitudes, when the state fits in memory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
}

impl Witness {
    pub(crate) fn new(coefficients: &[C64], energy: Option<f64>, objective: f64, state: Option<&PureState>) -> Self {
        let pairs = |v: &mut dyn Iterator<Item = C64>| v.map(|z| [z.re, z.im]).collect::<Vec<_>>();
        Self {
            coefficients: pairs(&mut coefficients.iter().copied()),
            energy,
            objective,
            amplitudes: state.map(|s| pairs(&mut s.amplitudes().iter().copied())),
        }
    }

    pub fn coefficient_vector(&self) -> Vec<C64> {
        self.coefficients.iter().map(|p| C64::new(p[0], p[1])).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub problem: String,
    pub decision: Decision,
    /// The quantity compared against the thresholds (entropy, distance or free energy).
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub optimizer_report: Vec<OptimizerReport>,
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(what()))
    }
}

/// HELES and LELES share this shape: energy thresholds `α < β` and entropy thresholds `t < s`
/// in bits, with the entropy taken across `cut`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyInstance {
    pub hamiltonian: HamiltonianSource,
    pub cut: Vec<String>,
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
    pub t: f64,
}

pub type HelesInstance = EntropyInstance;
pub type LelesInstance = EntropyInstance;

impl EntropyInstance {
    pub fn new(hamiltonian: HamiltonianSource, cut: &[&str], alpha: f64, beta: f64, s: f64, t: f64) -> Result<Self> {
        let inst = Self { hamiltonian, cut: cut.iter().map(|c| c.to_string()).collect(), alpha, beta, s, t };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.beta > self.alpha, || format!("need β > α, got α = {}, β = {}", self.alpha, self.beta))?;
        check(self.s > self.t, || format!("need s > t, got s = {}, t = {}", self.s, self.t))
    }
}

/// Distance thresholds `0 ≤ a < b < 2` are full trace norms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeapsInstance {
    pub hamiltonian: HamiltonianSource,
    pub cut: Vec<String>,
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
}

impl LeapsInstance {
    pub fn new(hamiltonian: HamiltonianSource, cut: &[&str], alpha: f64, beta: f64, a: f64, b: f64) -> Result<Self> {
        let inst = Self { hamiltonian, cut: cut.iter().map(|c| c.to_string()).collect(), alpha, beta, a, b };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.beta > self.alpha, || format!("need β > α, got α = {}, β = {}", self.alpha, self.beta))?;
        check(0.0 <= self.a && self.a < self.b && self.b < 2.0, || {
            format!("need 0 ≤ a < b < 2, got a = {}, b = {}", self.a, self.b)
        })
    }
}

/// Free-energy thresholds in nats at inverse temperature `beta_temp`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeaInstance {
    pub hamiltonian: LocalHamiltonian,
    pub beta_temp: f64,
    pub a: f64,
    pub b: f64,
}

impl FeaInstance {
    pub fn new(hamiltonian: LocalHamiltonian, beta_temp: f64, a: f64, b: f64) -> Result<Self> {
        let inst = Self { hamiltonian, beta_temp, a, b };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.beta_temp > 0.0, || format!("β must be positive, got {}", self.beta_temp))?;
        check(self.b > self.a, || format!("need b > a, got a = {}, b = {}", self.a, self.b))
    }
}

/// An isometry `|ψ⟩_A ↦ U(|ψ⟩_A|0⟩_B)` whose gates touch only A and B; distances across A|B
/// are full trace norms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PpioInstance {
    pub circuit: ChannelSpec,
    pub a: f64,
    pub b: f64,
}

impl PpioInstance {
    pub fn new(circuit: ChannelSpec, a: f64, b: f64) -> Result<Self> {
        let inst = Self { circuit, a, b };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        check(0.0 <= self.a && self.a < self.b && self.b <= 2.0, || {
            format!("need 0 ≤ a < b ≤ 2, got a = {}, b = {}", self.a, self.b)
        })?;
        let ab = self.circuit.n_a() + self.circuit.n_b();
        check(self.circuit.steps().iter().all(|s| s.support().iter().all(|&q| q < ab)), || {
            "isometry gates may only act on A and B".into()
        })
    }
}

/// YES if some input reaches output entropy `≥ tau + 1`, NO if every output has entropy `≤ tau`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxOutQeaInstance {
    pub channel: ChannelSpec,
    pub tau: f64,
}

impl MaxOutQeaInstance {
    pub fn new(channel: ChannelSpec, tau: f64) -> Result<Self> {
        let inst = Self { channel, tau };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.tau >= 0.0, || format!("τ must be non-negative, got {}", self.tau))
    }
}

/// YES if some input has `‖Φ(ρ) − Ĩ‖₁ ≤ a`, NO if every input has it `≥ b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CimmInstance {
    pub channel: ChannelSpec,
    pub a: f64,
    pub b: f64,
}

impl CimmInstance {
    pub fn new(channel: ChannelSpec, a: f64, b: f64) -> Result<Self> {
        let inst = Self { channel, a, b };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.a > 0.0 && self.a < 1.0 && self.b > 0.0 && self.b < 1.0, || {
            format!("need a, b in (0, 1), got a = {}, b = {}", self.a, self.b)
        })?;
        check((1.0 - self.a).powi(2) > 1.0 - self.b * self.b, || "need (1 − a)² > 1 − b²".into())
    }
}

/// Reads any instance type from JSON, mapping parse failures to [`Error::Malformed`] and
/// re-checking the invariants.
pub trait InstanceJson: Sized + Serialize + for<'de> Deserialize<'de> {
    fn validate_instance(&self) -> Result<()>;

    fn from_json(text: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        inst.validate_instance()?;
        Ok(inst)
    }

    fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

macro_rules! instance_json {
    ($($t:ty),*) => {
        $(impl InstanceJson for $t {
            fn validate_instance(&self) -> Result<()> {
                self.validate()
            }
        })*
    };
}

instance_json!(EntropyInstance, LeapsInstance, FeaInstance, PpioInstance, MaxOutQeaInstance, CimmInstance);
