//! One function per subcommand. Each reads its inputs through the [`Context`] so they are
//! hashed, draws any randomness from its seed bank, and returns an [`Outcome`].

use crate::inputs::{parse_state, LoadedState, StateSpec};
use crate::report::{CliError, CliResult, Context, Outcome};
use hamlab::clock::{build, certify_gap, ClockConfig, ClockEncoding, ClockHamiltonian};
use hamlab::hamiltonian::{free_energy, free_energy_functional, gibbs_state, log_partition_function, spectrum, HamiltonianFile};
use hamlab::linalg::to_row_major;
use hamlab::problems::*;
use hamlab::protocol::{honest_prover_state, make_extractor, run_protocol, Extractor, ProtocolConfig};
use hamlab::qstate::{trace_norm_distance, vn_entropy, MAX_DENSE_QUBITS};
use hamlab::{ChannelSpec, DensityMatrix, LocalHamiltonian};
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Largest energy a history state may have and still count as a zero-energy state.
pub const HISTORY_ENERGY_TOL: f64 = 1e-9;

/// Gibbs matrices are written out in full only up to this many qubits.
const GIBBS_MATRIX_QUBITS: usize = 6;

fn load_hamiltonian(ctx: &mut Context, path: &Path) -> CliResult<LocalHamiltonian> {
    Ok(LocalHamiltonian::from_json(&ctx.read(path)?)?)
}

fn load_circuit(ctx: &mut Context, path: &Path) -> CliResult<ChannelSpec> {
    Ok(ChannelSpec::from_json(&ctx.read(path)?)?)
}

pub fn build_ch2ham(ctx: &mut Context, circuit: &Path, idle: usize, encoding: ClockEncoding, out: Option<&Path>) -> CliResult<Outcome> {
    let channel = load_circuit(ctx, circuit)?;
    let hc = build(&channel, ClockConfig::for_channel(&channel, idle, encoding))?;
    let h = hc.local_hamiltonian()?;
    let file = HamiltonianFile::from(&h);
    let mut results = json!({
        "gates": hc.gates(),
        "idle": idle,
        "encoding": encoding,
        "clock_qubits": hc.clock_qubits(),
        "total_qubits": hc.total_qubits(),
        "terms": h.terms().len(),
        "locality": h.locality(),
        "spectral_gap": hc.spectral_gap(),
        "idle_bound": hc.idle_bound(),
    });
    match out {
        Some(path) => {
            let text = serde_json::to_string(&file).map_err(hamlab::Error::from)?;
            std::fs::write(path, &text).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
            results["output"] = json!({ "path": path.display().to_string(), "sha256": hex::encode(Sha256::digest(text.as_bytes())) });
        }
        None => results["hamiltonian"] = serde_json::to_value(&file).map_err(hamlab::Error::from)?,
    }
    Ok(Outcome::success(results))
}

pub fn spectrum_cmd(ctx: &mut Context, path: &Path, cutoff: f64) -> CliResult<Outcome> {
    let h = load_hamiltonian(ctx, path)?;
    // clock Hamiltonians too large for the generic solvers go through the structured spectrum
    let summary = match ClockHamiltonian::from_local_hamiltonian(&h) {
        Ok(hc) if h.qubits() > MAX_DENSE_QUBITS => hc.spectral_summary(cutoff)?,
        _ => spectrum(&h, cutoff)?,
    };
    Ok(Outcome::success(serde_json::to_value(&summary).map_err(hamlab::Error::from)?))
}

fn thermal_results(h: &LocalHamiltonian, beta: f64) -> CliResult<(Value, DensityMatrix)> {
    let rho = gibbs_state(h, beta)?;
    let energy = h.energy(&rho)?;
    let log_z = log_partition_function(h, beta)?;
    let mut v = json!({
        "beta": beta,
        "log_partition_function": log_z,
        "energy": energy,
        "entropy_bits": vn_entropy(&rho),
        "purity": rho.purity(),
    });
    if h.qubits() <= GIBBS_MATRIX_QUBITS {
        v["gibbs_state"] = json!(to_row_major(rho.matrix()));
    }
    Ok((v, rho))
}

pub fn gibbs(ctx: &mut Context, path: &Path, beta: f64) -> CliResult<Outcome> {
    let h = load_hamiltonian(ctx, path)?;
    Ok(Outcome::success(thermal_results(&h, beta)?.0))
}

pub fn free_energy_cmd(ctx: &mut Context, path: &Path, beta: f64) -> CliResult<Outcome> {
    let h = load_hamiltonian(ctx, path)?;
    let f = free_energy(&h, beta)?;
    let (mut v, rho) = thermal_results(&h, beta)?;
    let functional = free_energy_functional(&h, &rho, beta)?;
    v["free_energy"] = json!(f);
    v["functional_at_gibbs"] = json!(functional);
    v["identity_residual"] = json!((f - functional).abs());
    Ok(Outcome::success(v))
}

pub fn verify_history(ctx: &mut Context, path: &Path, spec: &StateSpec) -> CliResult<Outcome> {
    let h = load_hamiltonian(ctx, path)?;
    let hc = ClockHamiltonian::from_local_hamiltonian(&h)?;
    let file_text = match spec {
        StateSpec::File(p) => Some(ctx.read(p)?),
        _ => None,
    };
    let seed = match spec {
        StateSpec::Random(_) => ctx.seeds.draw("inputs"),
        _ => 0,
    };
    let layout = hc.channel().input_layout();
    let inputs = spec.inputs(&layout, seed, file_text.as_deref())?;
    let bound = hc.idle_bound();
    let mut checks = Vec::with_capacity(inputs.len());
    let (mut worst_energy, mut worst_ratio) = (0f64, 0f64);
    for psi in &inputs {
        let history = hc.history_state(psi)?;
        let energy = h.energy(&history)?;
        let out_hist = hc.history_reduced(psi, &["B"])?;
        let out_ideal = hc.channel().apply_to_b(&psi.to_density()?)?;
        let distance = trace_norm_distance(&out_hist, &out_ideal)?;
        worst_energy = worst_energy.max(energy.abs());
        worst_ratio = worst_ratio.max(distance / bound);
        checks.push(json!({ "energy": energy, "output_distance": distance }));
    }
    let passed = worst_energy <= HISTORY_ENERGY_TOL && worst_ratio <= 1.0 + 1e-9;
    Ok(Outcome::check(
        json!({
            "inputs": checks,
            "energy_residual": worst_energy,
            "energy_tolerance": HISTORY_ENERGY_TOL,
            "idle_bound": bound,
            "max_distance_over_bound": worst_ratio,
        }),
        passed,
    ))
}

pub fn certify_gap_cmd(ctx: &mut Context, circuit: &Path, sweep: &[usize], encoding: ClockEncoding) -> CliResult<Outcome> {
    let channel = load_circuit(ctx, circuit)?;
    let cert = certify_gap(&channel, encoding, sweep)?;
    let passed = cert.fits_scaling;
    Ok(Outcome::check(serde_json::to_value(&cert).map_err(hamlab::Error::from)?, passed))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ExtractorChoice {
    Haar,
    Pauli,
}

pub struct ProtocolArgs {
    pub input: PathBuf,
    pub proof: Option<PathBuf>,
    pub q: usize,
    pub eps: f64,
    pub extractor: ExtractorChoice,
    pub extractor_seed: Option<u64>,
    pub selector_qubits: Option<usize>,
    pub tau: Option<f64>,
    pub delta: f64,
    pub delta_prime: f64,
}

/// Completeness `c = 1 − 4√(3ε)` and soundness `s = 2c − 1`, so that `c − s = (1 − s)/2`.
fn thresholds(eps: f64) -> CliResult<(f64, f64)> {
    let c = 1.0 - 4.0 * (3.0 * eps).sqrt();
    let s = 2.0 * c - 1.0;
    if !(s > 0.0) {
        return Err(hamlab::Error::InvalidParameter(format!("ε = {eps} leaves no soundness threshold; need ε < 1/192")).into());
    }
    Ok((c, s))
}

pub fn entropy_protocol(ctx: &mut Context, args: &ProtocolArgs) -> CliResult<Outcome> {
    let rho = parse_state(&ctx.read(&args.input)?)?.density()?;
    let n_a = rho.layout().qubit_count("A")?;
    let n = args.q * n_a;
    let x = match args.extractor {
        ExtractorChoice::Pauli => Extractor::pauli_twirl(n)?,
        ExtractorChoice::Haar => {
            let seed = match args.extractor_seed {
                Some(s) => ctx.seeds.record("extractor", s),
                None => ctx.seeds.draw("extractor"),
            };
            make_extractor(n, args.selector_qubits.unwrap_or(n), seed)?
        }
    };
    let (c, s) = thresholds(args.eps)?;
    let tau = args.tau.unwrap_or_else(|| rho.partial_trace(&["A"]).map(|r| vn_entropy(&r)).unwrap_or(0.0));
    let cfg = ProtocolConfig::new(tau, args.q, args.eps, args.delta, args.delta_prime, c, s)?;

    let mut results = json!({
        "extractor": {
            "kind": x.kind(),
            "qubits": x.qubits(),
            "selector_qubits": x.selector_qubits(),
            "epsilon_hat": x.epsilon_hat(),
            "min_entropy": x.min_entropy(),
        },
    });
    let result = match &args.proof {
        Some(path) => match parse_state(&ctx.read(path)?)? {
            LoadedState::Pure(p) => run_protocol(&p, &x, &cfg)?,
            LoadedState::Mixed(r) => run_protocol(&r, &x, &cfg)?,
        },
        None => {
            let prover = honest_prover_state(&rho, &x, args.q)?;
            results["honest_prover"] = json!({ "residual": prover.residual, "alignment_fidelity": prover.alignment_fidelity });
            let result = run_protocol(&prover.state, &x, &cfg)?;
            if let Some(avg) = &result.average_output {
                let mut order = vec!["A".to_string()];
                order.extend(rho.layout().complement_names(&["A"]));
                if let Ok(target) = rho.reorder(&order).and_then(|r| r.with_layout(avg.layout().clone())) {
                    results["average_output_distance"] = json!(trace_norm_distance(avg, &target)?);
                }
            }
            result
        }
    };
    results["transcript"] = result.transcript(&cfg);
    let passed = result.accept_probability >= cfg.s;
    Ok(Outcome::check(results, passed))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Problem {
    Heles,
    Leles,
    Leaps,
    Fea,
    Ppio,
    Maxoutqea,
    Cimm,
}

fn verdict_outcome(v: Verdict) -> CliResult<Outcome> {
    let decision = v.decision;
    Ok(Outcome::decided(serde_json::to_value(&v).map_err(hamlab::Error::from)?, decision))
}

pub fn decide(ctx: &mut Context, problem: Problem, path: &Path, restarts: usize) -> CliResult<Outcome> {
    let text = ctx.read(path)?;
    let opts = DeciderOptions { restarts, seed: ctx.seeds.draw("decider") };
    let v = match problem {
        Problem::Heles => decide_heles(&EntropyInstance::from_json(&text)?, &opts)?,
        Problem::Leles => decide_leles(&EntropyInstance::from_json(&text)?, &opts)?,
        Problem::Leaps => decide_leaps(&LeapsInstance::from_json(&text)?, &opts)?,
        Problem::Fea => decide_fea_exact(&FeaInstance::from_json(&text)?)?,
        Problem::Ppio => decide_ppio(&PpioInstance::from_json(&text)?, &opts)?,
        Problem::Maxoutqea => decide_maxoutqea(&MaxOutQeaInstance::from_json(&text)?, &opts)?,
        Problem::Cimm => decide_cimm(&CimmInstance::from_json(&text)?, &opts)?,
    };
    verdict_outcome(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ReductionChoice {
    MaxoutqeaHeles,
    PpioLeles,
    PpioLeaps,
    SephamLeaps,
}

/// Input of `reduce sepham-leaps`: a Hamiltonian, a cut and energy thresholds `α < β` on the
/// best product-state energy.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SephamFile {
    hamiltonian: LocalHamiltonian,
    cut: Vec<String>,
    alpha: f64,
    beta: f64,
}

fn reduction_value<I: serde::Serialize>(r: &Reduction<I>) -> CliResult<Value> {
    Ok(serde_json::to_value(r).map_err(hamlab::Error::from)?)
}

/// Emits the reduced instance; with `then_decide`, also decides it and exits by that verdict.
pub fn reduce(
    ctx: &mut Context,
    map: ReductionChoice,
    path: &Path,
    encoding: ClockEncoding,
    then_decide: bool,
    restarts: usize,
) -> CliResult<Outcome> {
    let text = ctx.read(path)?;
    let (mut results, verdict) = match map {
        ReductionChoice::MaxoutqeaHeles => {
            let r = reduce_maxoutqea_to_heles(&MaxOutQeaInstance::from_json(&text)?, encoding)?;
            let v = if then_decide {
                Some(decide_heles(&r.instance, &DeciderOptions { restarts, seed: ctx.seeds.draw("decider") })?)
            } else {
                None
            };
            (reduction_value(&r)?, v)
        }
        ReductionChoice::PpioLeles => {
            let r = reduce_ppio_to_leles(&PpioInstance::from_json(&text)?, encoding)?;
            let v = if then_decide {
                Some(decide_leles(&r.instance, &DeciderOptions { restarts, seed: ctx.seeds.draw("decider") })?)
            } else {
                None
            };
            (reduction_value(&r)?, v)
        }
        ReductionChoice::PpioLeaps | ReductionChoice::SephamLeaps => {
            let r = if map == ReductionChoice::PpioLeaps {
                reduce_ppio_to_leaps(&PpioInstance::from_json(&text)?, encoding)?
            } else {
                let f: SephamFile = serde_json::from_str(&text).map_err(|e| hamlab::Error::Malformed(e.to_string()))?;
                let cut: Vec<&str> = f.cut.iter().map(String::as_str).collect();
                reduce_sepham_to_leaps(&f.hamiltonian, &cut, f.alpha, f.beta)?
            };
            let v = if then_decide {
                Some(decide_leaps(&r.instance, &DeciderOptions { restarts, seed: ctx.seeds.draw("decider") })?)
            } else {
                None
            };
            (reduction_value(&r)?, v)
        }
    };
    Ok(match verdict {
        Some(v) => {
            let decision = v.decision;
            results["verdict"] = serde_json::to_value(&v).map_err(hamlab::Error::from)?;
            Outcome::decided(results, decision)
        }
        None => Outcome::success(results),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protocol_thresholds() {
        let (c, s) = thresholds(1e-4).unwrap();
        assert!((c - s - (1.0 - s) / 2.0).abs() < 1e-15);
        assert!(thresholds(0.01).is_err());
    }
}
