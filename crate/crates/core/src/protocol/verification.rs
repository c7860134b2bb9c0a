//! The entropy-verification protocol and the free-energy verifier that uses it.
//!
//! The proof state lives on registers `A` (q copies of the checked register, laid out copy by
//! copy), an optional `B` (the matching copies of the unchecked register, plus any purifier the
//! prover keeps) and `E` (extractor selectors; qubits past the first `d` are identity padding).
//! The verifier undoes the extractor dilation on `A ⊗ E` and accepts iff `E` reads all zeros.

use super::{copies_layout, extractor_dilation, Extractor};
use crate::error::{Error, Result};
use crate::hamiltonian::{sampled_energy_estimate, LocalHamiltonian, StateRef};
use crate::linalg::{apply_on_support, conjugate_on_support, kron_vec, trace_norm, CMatrix, CVector, C64};
use crate::qstate::{
    closest_purification, cross_reduce, fannes_bound, partial_trace_matrix, purify_minimal, vn_entropy,
    DensityMatrix, PureState, RegisterLayout, MAX_DENSE_QUBITS,
};
use serde::Serialize;
use serde_json::{json, Value};

/// How far `χ_A` may be from `Ĩ` before the promise counts as violated.
pub const PROMISE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProtocolConfig {
    /// Entropy target τ, bits per copy.
    pub tau: f64,
    pub q: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub delta_prime: f64,
    /// Completeness threshold.
    pub c: f64,
    /// Soundness threshold.
    pub s: f64,
}

impl ProtocolConfig {
    pub fn new(tau: f64, q: usize, epsilon: f64, delta: f64, delta_prime: f64, c: f64, s: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter("q must be at least 1".into()));
        }
        if !(0.0 < s && s < c && c <= 1.0) {
            return Err(Error::InvalidParameter(format!("need 0 < s < c ≤ 1, got s = {s}, c = {c}")));
        }
        if !(epsilon >= 0.0 && delta > 0.0 && delta_prime > 0.0) {
            return Err(Error::InvalidParameter("ε ≥ 0 and δ, δ′ > 0 required".into()));
        }
        Ok(Self { tau, q, epsilon, delta, delta_prime, c, s })
    }

    /// The deterministic parameter cascade: `s` from `2√(1−s)·n_A ≤ δ′/4`, then `ε` so that
    /// `c − s ≥ (1 − s)/2` and `4(3ε)^{1/4} ≤ δ`, with `c = 1 − 4√(3ε)`, then the smallest `q`
    /// meeting [`delta_requirement`] (unit constants in the asymptotic term).
    pub fn solve(tau: f64, delta: f64, delta_prime: f64, n_a: usize) -> Result<Self> {
        if !(delta > 0.0 && delta_prime > 0.0) || n_a == 0 {
            return Err(Error::InvalidParameter("δ, δ′ > 0 and n_A ≥ 1 required".into()));
        }
        let root = (delta_prime / (8.0 * n_a as f64)).min(0.5);
        let s = 1.0 - root * root;
        let epsilon = (((1.0 - s) / 8.0).powi(2) / 3.0).min((delta / 4.0).powi(4) / 3.0);
        let c = 1.0 - 4.0 * (3.0 * epsilon).sqrt();
        let meets = |q: usize| delta_requirement(s, q, epsilon, n_a) <= delta_prime;
        let limit = 1usize << 50;
        let mut hi = 1usize;
        while !meets(hi) {
            if hi >= limit {
                return Err(Error::InvalidParameter(format!("no q ≤ 2^50 meets the δ′ = {delta_prime} requirement")));
            }
            hi *= 2;
        }
        let mut lo = hi / 2;
        if hi == 1 {
            lo = 0;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if meets(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Self::new(tau, hi, epsilon, delta, delta_prime, c, s)
    }
}

/// Left-hand side of the requirement on `q`:
/// `2√(1−s)(n_A − log(2√(1−s))/q) + (n_A + log(q/ε))·√(log(1/ε)/q)`.
pub fn delta_requirement(s: f64, q: usize, epsilon: f64, n_a: usize) -> f64 {
    let qf = q as f64;
    let g = 2.0 * (1.0 - s).max(0.0).sqrt();
    let first = if g > 0.0 { g * (n_a as f64 - g.log2() / qf) } else { 0.0 };
    first + (n_a as f64 + (qf / epsilon).log2()) * ((1.0 / epsilon).log2() / qf).sqrt()
}

/// Entropy guaranteed for the accepted output when the measurement passes with probability
/// `accept`: gentle measurement puts `T(σ)` within `2√(1 − accept)` of `χ_A` (plus the promise
/// residual), Fannes bounds the entropy loss, and regularity costs at most `d`.
pub fn certified_entropy_floor(accept: f64, register_qubits: usize, selector_qubits: usize, promise_residual: f64) -> f64 {
    let dist = 2.0 * (1.0 - accept).max(0.0).sqrt() + promise_residual;
    register_qubits as f64 - fannes_bound(dist, 2f64.powi(register_qubits as i32)) - selector_qubits as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyCertificate {
    /// `S(σ_A)` of the accepted output.
    #[serde(rename = "S_sigma")]
    pub s_sigma: Option<f64>,
    /// `q(τ − δ′)`.
    pub bound: f64,
    /// Floor implied by the measured acceptance probability.
    pub floor: f64,
    /// Whether acceptance reached `s`, so that the bound is claimed.
    pub applies: bool,
    pub holds: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct ProtocolResult {
    pub accept_probability: f64,
    /// `σ_AB` conditioned on acceptance; `None` when acceptance is numerically impossible.
    pub post_state: Option<DensityMatrix>,
    /// `(1/q) Σ σ_{A_i B_i}` on registers `A` (and `B`).
    pub average_output: Option<DensityMatrix>,
    pub promise_residual: f64,
    pub certificate: EntropyCertificate,
}

impl ProtocolResult {
    pub fn transcript(&self, cfg: &ProtocolConfig) -> Value {
        json!({
            "config": cfg,
            "accept_probability": self.accept_probability,
            "entropy_certificate": self.certificate,
            "promise_residual": self.promise_residual,
        })
    }
}

struct Registers {
    a: Vec<usize>,
    b: Vec<usize>,
    e: Vec<usize>,
    per_copy_a: usize,
    per_copy_b: usize,
}

fn registers(layout: &RegisterLayout, x: &Extractor, q: usize) -> Result<Registers> {
    let a = layout.qubits_of(&["A"])?;
    if a.len() != x.qubits() || a.len() % q != 0 {
        return Err(Error::InvalidParameter(format!(
            "register A has {} qubits; the extractor acts on {} and q = {q}",
            a.len(),
            x.qubits()
        )));
    }
    let e = if layout.contains("E") { layout.qubits_of(&["E"])? } else { Vec::new() };
    if e.len() < x.selector_qubits() {
        return Err(Error::InvalidParameter(format!("E needs at least {} selector qubits", x.selector_qubits())));
    }
    let b = if layout.contains("B") { layout.qubits_of(&["B"])? } else { Vec::new() };
    if b.len() % q != 0 {
        return Err(Error::InvalidParameter("register B must split into q equal copies".into()));
    }
    if a.len() + b.len() + e.len() != layout.total_qubits() {
        return Err(Error::LayoutMismatch("the proof state may only hold registers A, B and E".into()));
    }
    Ok(Registers { per_copy_a: a.len() / q, per_copy_b: b.len() / q, a, b, e })
}

fn post_layout(r: &Registers) -> Result<RegisterLayout> {
    let mut regs = vec![("A", r.a.len())];
    if !r.b.is_empty() {
        regs.push(("B", r.b.len()));
    }
    RegisterLayout::new(regs)
}

fn flat_distance(reduced: &CMatrix) -> f64 {
    let d = reduced.nrows();
    trace_norm(&(reduced - CMatrix::identity(d, d) * C64::from(1.0 / d as f64)))
}

/// Runs the verifier on `χ`: undo the extractor, measure `E`, and report the accepted output.
pub fn run_protocol<'a>(chi: impl Into<StateRef<'a>>, x: &Extractor, cfg: &ProtocolConfig) -> Result<ProtocolResult> {
    let chi = chi.into();
    let layout = chi.layout();
    let r = registers(layout, x, cfg.q)?;
    let n = layout.total_qubits();
    let u_dag = extractor_dilation(x)?.adjoint();
    let mut support = r.a.clone();
    support.extend_from_slice(&r.e[..x.selector_qubits()]);
    let ab: Vec<usize> = r.a.iter().chain(&r.b).copied().collect();
    let n_ab = ab.len();
    if n_ab > MAX_DENSE_QUBITS {
        return Err(Error::BudgetExceeded { what: "protocol output qubits", needed: n_ab, limit: MAX_DENSE_QUBITS });
    }

    // post-measurement block on A, B with E = 0, unnormalized
    let (promise_residual, block) = match chi {
        StateRef::Pure(psi) => {
            let residual = flat_distance(&cross_reduce(psi.amplitudes(), psi.amplitudes(), n, &r.a));
            let mut amps: Vec<C64> = psi.amplitudes().iter().copied().collect();
            apply_on_support(&u_dag, &support, n, &mut amps);
            let v = CVector::from_fn(1 << n_ab, |k, _| amps[scatter_ab(k, &ab, n)]);
            (residual, &v * v.adjoint())
        }
        StateRef::Mixed(rho) => {
            if n > MAX_DENSE_QUBITS {
                return Err(Error::BudgetExceeded { what: "mixed proof qubits", needed: n, limit: MAX_DENSE_QUBITS });
            }
            let residual = flat_distance(&partial_trace_matrix(rho.matrix(), n, &r.a));
            let rotated = conjugate_on_support(rho.matrix(), &u_dag, &support, n);
            let idx: Vec<usize> = (0..1usize << n_ab).map(|k| scatter_ab(k, &ab, n)).collect();
            (residual, CMatrix::from_fn(1 << n_ab, 1 << n_ab, |i, j| rotated[(idx[i], idx[j])]))
        }
    };
    if promise_residual > PROMISE_TOL {
        return Err(Error::PromiseViolation(format!("‖χ_A − Ĩ‖₁ = {promise_residual:.3e}")));
    }
    let accept: f64 = block.diagonal().iter().map(|z| z.re).sum::<f64>().clamp(0.0, 1.0);
    let floor = certified_entropy_floor(accept, r.a.len(), x.selector_qubits(), promise_residual);
    let bound = cfg.q as f64 * (cfg.tau - cfg.delta_prime);
    let applies = accept >= cfg.s;
    if accept < 1e-14 {
        return Ok(ProtocolResult {
            accept_probability: accept,
            post_state: None,
            average_output: None,
            promise_residual,
            certificate: EntropyCertificate { s_sigma: None, bound, floor, applies, holds: None },
        });
    }
    let sigma = DensityMatrix::new(post_layout(&r)?, block / C64::from(accept))?;
    let s_sigma = vn_entropy(&sigma.partial_trace(&["A"])?);
    let average = average_output(&sigma, &r, cfg.q)?;
    Ok(ProtocolResult {
        accept_probability: accept,
        post_state: Some(sigma),
        average_output: Some(average),
        promise_residual,
        certificate: EntropyCertificate {
            s_sigma: Some(s_sigma),
            bound,
            floor,
            applies,
            holds: Some(!applies || s_sigma >= bound - 1e-9),
        },
    })
}

/// Full index of the `k`-th basis state of `A ⊗ B` with `E = 0`.
fn scatter_ab(k: usize, ab: &[usize], n: usize) -> usize {
    let positions: Vec<usize> = ab.iter().map(|&q| n - 1 - q).collect();
    crate::linalg::scatter_bits(k, &positions)
}

fn average_output(sigma: &DensityMatrix, r: &Registers, q: usize) -> Result<DensityMatrix> {
    let n_ab = r.a.len() + r.b.len();
    let mut acc = CMatrix::zeros(1 << (r.per_copy_a + r.per_copy_b), 1 << (r.per_copy_a + r.per_copy_b));
    for i in 0..q {
        let mut kept: Vec<usize> = (i * r.per_copy_a..(i + 1) * r.per_copy_a).collect();
        kept.extend(r.a.len() + i * r.per_copy_b..r.a.len() + (i + 1) * r.per_copy_b);
        acc += partial_trace_matrix(sigma.matrix(), n_ab, &kept);
    }
    let mut regs = vec![("A", r.per_copy_a)];
    if r.per_copy_b > 0 {
        regs.push(("B", r.per_copy_b));
    }
    DensityMatrix::new(RegisterLayout::new(regs)?, acc / C64::from(q as f64))
}

#[derive(Clone, Debug)]
pub struct HonestProver {
    /// Proof state on `A, B, E` with `χ_A = Ĩ`.
    pub state: PureState,
    /// `‖χ_A − Ĩ‖₁` before the purifier is aligned.
    pub residual: f64,
    /// `|⟨χ_aligned|χ⟩|²`.
    pub alignment_fidelity: f64,
}

/// Builds `U_T (ρ^{⊗q} ⊗ |0⟩⟨0|_E) U_T†` from a purification of `ρ`, then swaps in the nearest
/// purification of `Ĩ_A` via the prover-held registers. Everything of `ρ` other than register
/// `A` (and any purifier) becomes the prover's `B`.
pub fn honest_prover_state(rho: &DensityMatrix, x: &Extractor, q: usize) -> Result<HonestProver> {
    let n_a = rho.layout().qubit_count("A")?;
    if q == 0 || x.qubits() != q * n_a {
        return Err(Error::InvalidParameter(format!("extractor acts on {} qubits, need q·n_A = {}", x.qubits(), q * n_a)));
    }
    // one copy as a pure state on A then everything else
    let eig = rho.eigenvalues();
    let pure = eig.iter().filter(|&&p| p > 1e-12).count() <= 1;
    let psi = if pure {
        let e = crate::linalg::eigh(rho.matrix());
        let top = e.vectors.column(e.values.len() - 1).into_owned();
        PureState::normalized(rho.layout().clone(), top)?
    } else {
        purify_minimal(rho, "__purifier")?
    };
    let rest = psi.layout().complement_names(&["A"]);
    let mut order = vec!["A".to_string()];
    order.extend(rest.iter().cloned());
    let psi = psi.reorder(&order)?;
    let n_b = psi.layout().total_qubits() - n_a;
    let mut regs = vec![("A".to_string(), n_a)];
    if n_b > 0 {
        regs.push(("B".to_string(), n_b));
    }
    let one = RegisterLayout::new(regs)?;
    let psi = psi.with_layout(one.clone())?;

    // q copies, regrouped as A_1 … A_q B_1 … B_q
    let amps = (1..q).fold(psi.amplitudes().clone(), |acc, _| kron_vec(&acc, psi.amplitudes()));
    let copies = PureState::new(copies_layout(&one, q)?, amps)?;
    let mut names: Vec<String> = (1..=q).map(|i| format!("A{i}")).collect();
    if n_b > 0 {
        names.extend((1..=q).map(|i| format!("B{i}")));
    }
    let grouped = copies.reorder(&names)?;
    let mut regs = vec![("A".to_string(), q * n_a)];
    if n_b > 0 {
        regs.push(("B".to_string(), q * n_b));
    }
    let mut state = grouped.with_layout(RegisterLayout::new(regs)?)?;
    let d = x.selector_qubits();
    if d > 0 {
        state = state.tensor(&PureState::basis(RegisterLayout::single("E", d)?, 0)?)?;
    }
    let n = state.layout().total_qubits();
    let mut support = state.layout().qubits_of(&["A"])?;
    if d > 0 {
        support.extend(state.layout().qubits_of(&["E"])?);
    }
    let mut amps: Vec<C64> = state.amplitudes().iter().copied().collect();
    apply_on_support(&extractor_dilation(x)?, &support, n, &mut amps);
    let chi = PureState::new(state.layout().clone(), CVector::from_vec(amps))?;
    let a = chi.layout().qubits_of(&["A"])?;
    let residual = flat_distance(&cross_reduce(chi.amplitudes(), chi.amplitudes(), n, &a));
    if residual <= 1e-13 {
        return Ok(HonestProver { state: chi, residual, alignment_fidelity: 1.0 });
    }
    let flat = DensityMatrix::maximally_mixed(chi.layout().select(&["A"])?)?;
    let aligned = closest_purification(&flat, &chi, &["A"])?;
    let alignment_fidelity = aligned.inner(&chi)?.norm_sqr();
    Ok(HonestProver { state: aligned, residual, alignment_fidelity })
}

#[derive(Clone, Debug)]
pub struct FeaTranscript {
    pub protocol: ProtocolResult,
    pub energy_estimate: f64,
    /// `F̃ = Ẽ − S̃ ln 2 / β` in nats.
    pub free_energy_estimate: f64,
    pub threshold: f64,
    /// Whether `F̃ < (a + b)/2`.
    pub energy_check_passed: bool,
    /// Probability that the whole verifier accepts.
    pub accept_probability: f64,
}

/// Free-energy verifier: entropy verification with target `S̃`, then an energy estimate on the
/// average output. `claimed_entropy` is in bits.
#[allow(clippy::too_many_arguments)]
pub fn run_fea_protocol<'a>(
    h: &LocalHamiltonian,
    beta_temp: f64,
    claimed_entropy: f64,
    chi: impl Into<StateRef<'a>>,
    x: &Extractor,
    cfg: &ProtocolConfig,
    thresholds: (f64, f64),
    samples: usize,
    seed: u64,
) -> Result<FeaTranscript> {
    if !(beta_temp > 0.0) {
        return Err(Error::InvalidParameter("β must be positive".into()));
    }
    let (a, b) = thresholds;
    if !(b > a) {
        return Err(Error::InvalidParameter("need b > a".into()));
    }
    let cfg = ProtocolConfig { tau: claimed_entropy, ..*cfg };
    let protocol = run_protocol(chi, x, &cfg)?;
    let threshold = (a + b) / 2.0;
    let Some(avg) = protocol.average_output.as_ref() else {
        return Ok(FeaTranscript {
            protocol,
            energy_estimate: f64::NAN,
            free_energy_estimate: f64::NAN,
            threshold,
            energy_check_passed: false,
            accept_probability: 0.0,
        });
    };
    let sigma_a = avg.partial_trace(&["A"])?;
    if sigma_a.layout().total_qubits() != h.qubits() {
        return Err(Error::LayoutMismatch("the Hamiltonian must act on register A".into()));
    }
    let sigma_a = sigma_a.with_layout(h.layout().clone())?;
    let energy_estimate = sampled_energy_estimate(h, &sigma_a, samples, seed)?;
    let free_energy_estimate = energy_estimate - claimed_entropy * std::f64::consts::LN_2 / beta_temp;
    let passed = free_energy_estimate < threshold;
    Ok(FeaTranscript {
        accept_probability: if passed { protocol.accept_probability } else { 0.0 },
        protocol,
        energy_estimate,
        free_energy_estimate,
        threshold,
        energy_check_passed: passed,
    })
}
