//! Instance maps between the promise problems, with every intermediate constant recorded.
//!
//! The three channel-based maps build `H_Φ` with idle length `L` and energy thresholds `α = 0`,
//! `β = Δ/L`. With that choice `√(β/Δ) = 1/√L`, so the witness-extraction slack
//! `2√(β/Δ) + 2T/(T+L+1)` depends on `L` alone and the smallest workable `L` is found by search.

use super::{EntropyInstance, HamiltonianSource, LeapsInstance, MaxOutQeaInstance, PpioInstance};
use crate::clock::{build, ClockConfig, ClockEncoding, ClockHamiltonian, MAX_CLOCK_QUBITS};
use crate::error::{Error, Result};
use crate::hamiltonian::{operator_norm, LocalHamiltonian};
use crate::qstate::fannes_bound;
use serde::Serialize;
use serde_json::{json, Map, Value};

/// Largest idle length the reductions will emit.
pub const MAX_IDLE: usize = MAX_CLOCK_QUBITS / 2;

/// Calibrated ceiling on `β / a⁶` for the LEAPS map.
pub const LEAPS_BETA_A6_BOUND: f64 = 1.0;

/// Search limit when reporting how large `L` would have to be.
const PROBE_LIMIT: usize = 1 << 40;

#[derive(Clone, Debug, Serialize)]
pub struct ReductionReport {
    pub reduction: String,
    pub gates: Option<usize>,
    pub idle: Option<usize>,
    pub gap: Option<f64>,
    pub constants: Map<String, Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Reduction<I> {
    pub instance: I,
    pub report: ReductionReport,
}

/// `2T/(T+L+1)`.
fn idle_bound(gates: usize, idle: usize) -> f64 {
    2.0 * gates as f64 / (gates + idle + 1) as f64
}

/// `2√(β/Δ) + 2T/(T+L+1)` at `β = Δ/L`.
fn extraction_slack(gates: usize, idle: usize) -> f64 {
    2.0 / (idle as f64).sqrt() + idle_bound(gates, idle)
}

/// Smallest `L ≥ 1` with `ok(L)`, assuming `ok` stays true once it holds.
fn smallest_idle(ok: impl Fn(usize) -> bool) -> Result<usize> {
    let mut hi = 1usize;
    while !ok(hi) {
        if hi >= PROBE_LIMIT {
            return Err(Error::InfeasibleIdle { required: PROBE_LIMIT, limit: MAX_IDLE });
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi > MAX_IDLE {
        return Err(Error::InfeasibleIdle { required: hi, limit: MAX_IDLE });
    }
    Ok(hi)
}

fn clock_with_gap(channel: &crate::channel::ChannelSpec, idle: usize, encoding: ClockEncoding) -> Result<(ClockHamiltonian, f64)> {
    let hc = build(channel, ClockConfig::for_channel(channel, idle, encoding))?;
    let gap = hc.spectral_gap();
    Ok((hc, gap))
}

fn constants(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// MaxOutQEA → HELES on `H_Φ′`, where `Φ′` carries a traced copy of the input so that history
/// states reach mixed inputs. `s = τ + 3/4`, `t = τ + 1/4`, and `L` is the smallest idle length
/// for which both the time-average slack and the witness-extraction slack cost at most 1/4 bit
/// of output entropy.
pub fn reduce_maxoutqea_to_heles(inst: &MaxOutQeaInstance, encoding: ClockEncoding) -> Result<Reduction<EntropyInstance>> {
    inst.validate()?;
    let channel = inst.channel.with_traced_input_copy()?;
    let gates = channel.gate_count();
    let dim_b = 2f64.powi(channel.n_b() as i32);
    let req1 = |l: usize| fannes_bound(idle_bound(gates, l), dim_b);
    let req2 = |l: usize| fannes_bound(extraction_slack(gates, l), dim_b);
    let idle = smallest_idle(|l| req1(l) <= 0.25 && req2(l) <= 0.25)?;
    let (hc, gap) = clock_with_gap(&channel, idle, encoding)?;
    let beta = gap / idle as f64;
    let instance = EntropyInstance::new(HamiltonianSource::clock(&hc), &["B"], 0.0, beta, inst.tau + 0.75, inst.tau + 0.25)?;
    Ok(Reduction {
        instance,
        report: ReductionReport {
            reduction: "maxoutqea-heles".into(),
            gates: Some(gates),
            idle: Some(idle),
            gap: Some(gap),
            constants: constants(&[
                ("time_average_slack", json!(idle_bound(gates, idle))),
                ("extraction_slack", json!(extraction_slack(gates, idle))),
                ("entropy_loss_time_average", json!(req1(idle))),
                ("entropy_loss_extraction", json!(req2(idle))),
            ]),
        },
    })
}

/// `−log₂ √(1 − b²/4)` clamped at `min(n_A, n_B)`: a pure state at least `b` from every
/// product has reduced min-entropy at least this much.
fn entropy_floor(b: f64, n_a: usize, n_b: usize) -> f64 {
    let cap = n_a.min(n_b) as f64;
    let inner = 1.0 - b * b / 4.0;
    if inner <= 0.0 {
        return cap;
    }
    (-inner.sqrt().log2()).min(cap)
}

/// PPIO → LELES on `H_U` with the entropy of register A. `t` covers a YES output `a`-close to a
/// product; `s` is the entropy floor of a NO output minus the extraction slack; `L` is the
/// smallest idle length with `s − t ≥ floor/4`.
pub fn reduce_ppio_to_leles(inst: &PpioInstance, encoding: ClockEncoding) -> Result<Reduction<EntropyInstance>> {
    inst.validate()?;
    let c = &inst.circuit;
    let gates = c.gate_count();
    let dim_a = 2f64.powi(c.n_a() as i32);
    let floor = entropy_floor(inst.b, c.n_a(), c.n_b());
    let t_of = |l: usize| fannes_bound(idle_bound(gates, l) + inst.a, dim_a);
    let s_of = |l: usize| floor - fannes_bound(extraction_slack(gates, l), dim_a);
    let idle = smallest_idle(|l| s_of(l) - t_of(l) >= floor / 4.0)?;
    let (hc, gap) = clock_with_gap(c, idle, encoding)?;
    let beta = gap / idle as f64;
    let (s, t) = (s_of(idle), t_of(idle));
    let instance = EntropyInstance::new(HamiltonianSource::clock(&hc), &["A"], 0.0, beta, s, t)?;
    Ok(Reduction {
        instance,
        report: ReductionReport {
            reduction: "ppio-leles".into(),
            gates: Some(gates),
            idle: Some(idle),
            gap: Some(gap),
            constants: constants(&[
                ("entropy_floor", json!(floor)),
                ("time_average_slack", json!(idle_bound(gates, idle))),
                ("extraction_slack", json!(extraction_slack(gates, idle))),
                ("fannes_yes", json!(t)),
                ("fannes_no", json!(floor - s)),
            ]),
        },
    })
}

/// LEAPS thresholds for the PPIO map at idle length `L`:
/// `a = 2√(2T/(T+L+1) + a′)`, `b = b′²/2 − 2/√L − 2T/(T+L+1)`.
fn leaps_thresholds(inst: &PpioInstance, idle: usize) -> (f64, f64) {
    let gates = inst.circuit.gate_count();
    let a = 2.0 * (idle_bound(gates, idle) + inst.a).sqrt();
    let b = inst.b * inst.b / 2.0 - extraction_slack(gates, idle);
    (a, b)
}

/// PPIO → LEAPS on `H_U` across the cut A,E,C | B, at the smallest `L` with `b − a ≥ b′²/8`.
pub fn reduce_ppio_to_leaps(inst: &PpioInstance, encoding: ClockEncoding) -> Result<Reduction<LeapsInstance>> {
    inst.validate()?;
    let margin = inst.b * inst.b / 8.0;
    let idle = smallest_idle(|l| {
        let (a, b) = leaps_thresholds(inst, l);
        b - a >= margin
    })?;
    reduce_ppio_to_leaps_with_idle(inst, idle, encoding)
}

/// Parameters of the PPIO → LEAPS map at a fixed idle length, for sweeps. Records `a`, `b`,
/// `β`, `κ₁ = a√L`, `κ₂ = βL³` and `κ₃ = β/a⁶`. At small `L` the thresholds can come out with
/// `a ≥ b`; the report is still produced, but no instance exists there.
pub fn ppio_leaps_parameters(inst: &PpioInstance, idle: usize, encoding: ClockEncoding) -> Result<ReductionReport> {
    leaps_map(inst, idle, encoding).map(|(_, report)| report)
}

fn leaps_map(inst: &PpioInstance, idle: usize, encoding: ClockEncoding) -> Result<(ClockHamiltonian, ReductionReport)> {
    inst.validate()?;
    if idle == 0 {
        return Err(Error::InvalidParameter("the LEAPS map needs L ≥ 1".into()));
    }
    let c = &inst.circuit;
    let (a, b) = leaps_thresholds(inst, idle);
    let (hc, gap) = clock_with_gap(c, idle, encoding)?;
    let beta = gap / idle as f64;
    let l = idle as f64;
    let kappa3 = beta / a.powi(6);
    let report = ReductionReport {
        reduction: "ppio-leaps".into(),
        gates: Some(c.gate_count()),
        idle: Some(idle),
        gap: Some(gap),
        constants: constants(&[
            ("a", json!(a)),
            ("b", json!(b)),
            ("beta", json!(beta)),
            ("kappa1", json!(a * l.sqrt())),
            ("kappa2", json!(beta * l.powi(3))),
            ("kappa3", json!(kappa3)),
            ("beta_within_a6", json!(kappa3 <= LEAPS_BETA_A6_BOUND)),
            ("time_average_slack", json!(idle_bound(c.gate_count(), idle))),
            ("extraction_slack", json!(extraction_slack(c.gate_count(), idle))),
        ]),
    };
    Ok((hc, report))
}

/// The PPIO → LEAPS map at a fixed idle length. Fails if the thresholds at that `L` leave no
/// gap.
pub fn reduce_ppio_to_leaps_with_idle(inst: &PpioInstance, idle: usize, encoding: ClockEncoding) -> Result<Reduction<LeapsInstance>> {
    let (hc, report) = leaps_map(inst, idle, encoding)?;
    let (a, b) = leaps_thresholds(inst, idle);
    let beta = hc.spectral_gap() / idle as f64;
    let instance = LeapsInstance::new(HamiltonianSource::clock(&hc), &["A", "E", "C"], 0.0, beta, a, b)?;
    Ok(Reduction { instance, report })
}

/// Separable-ground-energy question `(H, α, β)` → LEAPS `(H, α, β′, 0, b)` with
/// `b = (β − α)/(2‖H‖∞)` (capped at 1) and `β′ = β − ‖H‖∞·b`.
pub fn reduce_sepham_to_leaps(h: &LocalHamiltonian, cut: &[&str], alpha: f64, beta: f64) -> Result<Reduction<LeapsInstance>> {
    if !(beta > alpha) {
        return Err(Error::InvalidParameter(format!("need β > α, got α = {alpha}, β = {beta}")));
    }
    let norm = operator_norm(h)?;
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter("H must be nonzero".into()));
    }
    let b = ((beta - alpha) / (2.0 * norm)).min(1.0);
    let beta_prime = beta - norm * b;
    let instance = LeapsInstance::new(HamiltonianSource::explicit(h.clone()), cut, alpha, beta_prime, 0.0, b)?;
    Ok(Reduction {
        instance,
        report: ReductionReport {
            reduction: "sepham-leaps".into(),
            gates: None,
            idle: None,
            gap: None,
            constants: constants(&[("operator_norm", json!(norm)), ("b", json!(b)), ("beta_prime", json!(beta_prime))]),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::library::{constant_plus_output, fully_depolarizing};
    use crate::hamiltonian::LocalTerm;
    use crate::linalg::pauli_z;
    use crate::qstate::RegisterLayout;

    #[test]
    fn idle_search_finds_the_threshold() {
        assert_eq!(smallest_idle(|l| l >= 37).unwrap(), 37);
        assert_eq!(smallest_idle(|_| true).unwrap(), 1);
        assert!(matches!(smallest_idle(|l| l >= MAX_IDLE + 5), Err(Error::InfeasibleIdle { required, .. }) if required == MAX_IDLE + 5));
    }

    #[test]
    fn idle_bound_decreases_with_l() {
        let values: Vec<f64> = [0, 1, 4, 16, 64].iter().map(|&l| idle_bound(5, l)).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn entropy_floor_examples() {
        assert!((entropy_floor(2f64.sqrt(), 1, 2) - 0.5).abs() < 1e-12);
        assert_eq!(entropy_floor(2.0, 1, 2), 1.0);
        assert!(entropy_floor(1.999_999, 3, 2) <= 2.0);
    }

    #[test]
    fn maxoutqea_parameters() {
        for c in [fully_depolarizing(1).unwrap(), constant_plus_output(1, 1).unwrap()] {
            let r = reduce_maxoutqea_to_heles(&MaxOutQeaInstance::new(c, 0.0).unwrap(), ClockEncoding::Kitaev).unwrap();
            let l = r.report.idle.unwrap();
            let t = r.report.gates.unwrap();
            let slack = extraction_slack(t, l);
            assert!(fannes_bound(slack, 2.0) <= 0.25);
            assert!(fannes_bound(extraction_slack(t, l - 1), 2.0) > 0.25 || fannes_bound(idle_bound(t, l - 1), 2.0) > 0.25);
            let inst = &r.instance;
            assert_eq!((inst.alpha, inst.s, inst.t), (0.0, 0.75, 0.25));
            assert!((inst.beta - r.report.gap.unwrap() / l as f64).abs() < 1e-18);
        }
    }

    #[test]
    fn sepham_parameter_map() {
        let z = LocalHamiltonian::new(
            RegisterLayout::new([("A", 1), ("B", 1)]).unwrap(),
            vec![LocalTerm::from_dense(vec![0], &pauli_z()).unwrap()],
        )
        .unwrap();
        let r = reduce_sepham_to_leaps(&z, &["A"], 0.0, 0.4).unwrap();
        assert!((r.instance.b - 0.2).abs() < 1e-12);
        assert!((r.instance.beta - 0.2).abs() < 1e-12);
        assert!(r.instance.beta - r.instance.alpha >= 0.2 - 1e-12);
        assert!(reduce_sepham_to_leaps(&z, &["A"], 0.3, 0.3).is_err());
    }
}
