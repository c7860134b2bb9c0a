//! Brute-force deciders. Each YES carries a witness; each NO is certified by an optimum on the
//! far side of the NO threshold; anything else is UNDECIDED.

use super::model::{optimize_model, LowEnergyModel, Objective, Optimum, DEFAULT_RESTARTS};
use super::search::minimize_on_sphere;
use super::{
    CimmInstance, Decision, EntropyInstance, FeaInstance, LeapsInstance, MaxOutQeaInstance, OptimizerReport,
    PpioInstance, Verdict, Witness, THRESHOLD_TOL,
};
use crate::channel::{contract_choi, ChannelSpec};
use crate::error::{Error, Result};
use crate::hamiltonian::{free_energy, LocalHamiltonian};
use crate::linalg::{eigvalsh, split_index_table, trace_norm, CMatrix, CVector, C64};
use crate::qstate::{cross_reduce, shannon_entropy, DensityMatrix, PureState};
use crate::random::{child_seed, seeded};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeciderOptions {
    pub restarts: usize,
    pub seed: u64,
}

impl Default for DeciderOptions {
    fn default() -> Self {
        Self { restarts: DEFAULT_RESTARTS, seed: 0 }
    }
}

impl DeciderOptions {
    fn phase_seeds(&self) -> (u64, u64) {
        let mut rng = seeded(self.seed);
        (child_seed(&mut rng), child_seed(&mut rng))
    }
}

/// Optimum over the span below `cutoff`, or `None` when that span is empty.
fn search_phase(
    inst_source: &super::HamiltonianSource,
    cut: &[String],
    cutoff: f64,
    objective: Objective,
    opts: &DeciderOptions,
    seed: u64,
    phase: &str,
) -> Result<Option<(LowEnergyModel, Optimum)>> {
    match LowEnergyModel::new(inst_source, cut, cutoff) {
        Ok(model) => {
            let opt = optimize_model(&model, objective, opts.restarts, seed, phase);
            Ok(Some((model, opt)))
        }
        Err(Error::EmptyLowEnergySpace { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn witness_of(model: &LowEnergyModel, opt: &Optimum) -> Witness {
    let state = model.state(&opt.coefficients).ok();
    Witness::new(&opt.coefficients, Some(opt.energy), opt.value, state.as_ref())
}

struct Thresholds {
    yes_cutoff: f64,
    no_cutoff: f64,
    /// Whether the YES test asks for a large objective (entropy ≥ s) or a small one.
    yes_is_large: bool,
    yes_level: f64,
    no_level: f64,
}

/// Runs the YES search at `α`, then the NO certificate at `β`.
fn decide_by_search(
    problem: &str,
    source: &super::HamiltonianSource,
    cut: &[String],
    objective: Objective,
    th: Thresholds,
    opts: &DeciderOptions,
) -> Result<Verdict> {
    let (yes_seed, no_seed) = opts.phase_seeds();
    let mut reports: Vec<OptimizerReport> = Vec::new();
    let passes_yes = |v: f64| if th.yes_is_large { v >= th.yes_level - THRESHOLD_TOL } else { v <= th.yes_level + THRESHOLD_TOL };
    let passes_no = |v: f64| if th.yes_is_large { v <= th.no_level + THRESHOLD_TOL } else { v >= th.no_level - THRESHOLD_TOL };

    if let Some((model, opt)) = search_phase(source, cut, th.yes_cutoff, objective, opts, yes_seed, "yes")? {
        reports.push(opt.report.clone());
        if passes_yes(opt.value) {
            return Ok(Verdict {
                problem: problem.into(),
                decision: Decision::Yes,
                value: opt.value,
                witness: Some(witness_of(&model, &opt)),
                optimizer_report: reports,
            });
        }
    }
    match search_phase(source, cut, th.no_cutoff, objective, opts, no_seed, "no")? {
        Some((_, opt)) => {
            reports.push(opt.report.clone());
            let decision = if passes_no(opt.value) { Decision::No } else { Decision::Undecided };
            Ok(Verdict { problem: problem.into(), decision, value: opt.value, witness: None, optimizer_report: reports })
        }
        // no state at all has energy ≤ β
        None => Ok(Verdict {
            problem: problem.into(),
            decision: Decision::No,
            value: f64::NAN,
            witness: None,
            optimizer_report: reports,
        }),
    }
}

/// YES iff some state with energy ≤ α has `S(ψ_cut) ≥ s`; NO iff every state with energy ≤ β
/// has `S ≤ t`.
pub fn decide_heles(inst: &EntropyInstance, opts: &DeciderOptions) -> Result<Verdict> {
    inst.validate()?;
    let th = Thresholds { yes_cutoff: inst.alpha, no_cutoff: inst.beta, yes_is_large: true, yes_level: inst.s, no_level: inst.t };
    decide_by_search("heles", &inst.hamiltonian, &inst.cut, Objective::MaxEntropy, th, opts)
}

/// YES iff some state with energy ≤ α has `S(ψ_cut) ≤ t`; NO iff every state with energy ≤ β
/// has `S ≥ s`.
pub fn decide_leles(inst: &EntropyInstance, opts: &DeciderOptions) -> Result<Verdict> {
    inst.validate()?;
    let th = Thresholds { yes_cutoff: inst.alpha, no_cutoff: inst.beta, yes_is_large: false, yes_level: inst.t, no_level: inst.s };
    decide_by_search("leles", &inst.hamiltonian, &inst.cut, Objective::MinEntropy, th, opts)
}

/// YES iff some state with energy ≤ α is within `a` of a product state; NO iff every state
/// with energy ≤ β is at least `b` away. The inner minimum over products is `2√(1 − λ₁²)`.
pub fn decide_leaps(inst: &LeapsInstance, opts: &DeciderOptions) -> Result<Verdict> {
    inst.validate()?;
    let th = Thresholds { yes_cutoff: inst.alpha, no_cutoff: inst.beta, yes_is_large: false, yes_level: inst.a, no_level: inst.b };
    decide_by_search("leaps", &inst.hamiltonian, &inst.cut, Objective::MinProductDistance, th, opts)
}

/// Exact `F = −ln Z / β`: YES iff `F ≤ a`, NO iff `F ≥ b`.
pub fn decide_fea_exact(inst: &FeaInstance) -> Result<Verdict> {
    inst.validate()?;
    let f = free_energy(&inst.hamiltonian, inst.beta_temp)?;
    let decision = if f <= inst.a {
        Decision::Yes
    } else if f >= inst.b {
        Decision::No
    } else {
        Decision::Undecided
    };
    Ok(Verdict { problem: "fea".into(), decision, value: f, witness: None, optimizer_report: Vec::new() })
}

fn report(phase: &str, objective: Objective, dimension: usize, restarts: usize, found: &super::search::SearchResult, value: f64) -> OptimizerReport {
    OptimizerReport {
        phase: phase.into(),
        objective,
        cutoff: f64::INFINITY,
        dimension,
        restarts,
        iterations: found.iterations,
        evaluations: found.evaluations,
        best_objective: value,
    }
}

fn three_way(yes: bool, no: bool) -> Decision {
    if yes {
        Decision::Yes
    } else if no {
        Decision::No
    } else {
        Decision::Undecided
    }
}

/// Minimum over inputs `ψ` of the distance from `U(ψ ⊗ 0)` to the nearest product across A|B.
pub fn decide_ppio(inst: &PpioInstance, opts: &DeciderOptions) -> Result<Verdict> {
    inst.validate()?;
    let c = &inst.circuit;
    let input = c.input_layout();
    let n = c.qubits();
    let kept = c.layout().qubits_of(&["A"])?;
    let outputs: Vec<CVector> = (0..input.dim())
        .map(|x| {
            let mut v = c.initial_state(&PureState::basis(input.clone(), x)?)?.into_amplitudes();
            c.evolve(v.as_mut_slice());
            Ok(v)
        })
        .collect::<Result<_>>()?;
    let distance = |psi: &[C64]| {
        let v = outputs.iter().zip(psi).fold(CVector::zeros(1 << n), |acc, (o, &p)| acc + o * p);
        let rho = cross_reduce(&v, &v, n, &kept);
        let top = eigvalsh(&rho).last().copied().unwrap_or(0.0).clamp(0.0, 1.0);
        2.0 * (1.0 - top).max(0.0).sqrt()
    };
    let found = minimize_on_sphere(input.dim(), opts.restarts, opts.seed, &distance);
    let value = found.cost;
    let decision = three_way(value <= inst.a + THRESHOLD_TOL, value >= inst.b - THRESHOLD_TOL);
    let witness = (decision == Decision::Yes).then(|| Witness::new(&found.point, None, value, None));
    Ok(Verdict {
        problem: "ppio".into(),
        decision,
        value,
        witness,
        optimizer_report: vec![report("search", Objective::MinProductDistance, input.dim(), opts.restarts, &found, value)],
    })
}

/// `Tr_{A′} |v⟩⟨v|` for a purification vector `v` on `A ⊗ A′` with `|A′| = |A|`.
fn input_from_purification(v: &[C64], n_a: usize) -> CMatrix {
    let d = 1usize << n_a;
    let m = CMatrix::from_fn(d, d, |a, r| v[a * d + r]);
    &m * m.adjoint()
}

fn channel_output(choi: &DensityMatrix, c: &ChannelSpec, rho: CMatrix) -> Result<DensityMatrix> {
    contract_choi(choi, &DensityMatrix::new(c.input_layout(), crate::linalg::hermitize(&rho))?)
}

/// Maximum output entropy over mixed inputs: YES iff it reaches `τ + 1`, NO iff it stays ≤ `τ`.
pub fn decide_maxoutqea(inst: &MaxOutQeaInstance, opts: &DeciderOptions) -> Result<Verdict> {
    inst.validate()?;
    let c = &inst.channel;
    let choi = c.choi_state(&["A", "E"])?;
    let neg_entropy = |v: &[C64]| match channel_output(&choi, c, input_from_purification(v, c.n_a())) {
        Ok(out) => -shannon_entropy(&eigvalsh(out.matrix())),
        Err(_) => f64::MAX,
    };
    let dim = 1usize << (2 * c.n_a());
    let found = minimize_on_sphere(dim, opts.restarts, opts.seed, &neg_entropy);
    let value = -found.cost;
    let decision = three_way(value >= inst.tau + 1.0 - THRESHOLD_TOL, value <= inst.tau + THRESHOLD_TOL);
    let witness = (decision == Decision::Yes).then(|| Witness::new(&found.point, None, value, None));
    Ok(Verdict {
        problem: "maxoutqea".into(),
        decision,
        value,
        witness,
        optimizer_report: vec![report("search", Objective::MaxEntropy, dim, opts.restarts, &found, value)],
    })
}

/// `‖Φ(ρ) − Ĩ‖₁` on the output register.
pub fn check_cimm(inst: &CimmInstance, rho: &DensityMatrix) -> Result<f64> {
    let out = inst.channel.apply_to_b(rho)?;
    let d = out.dim();
    Ok(trace_norm(&(out.matrix() - CMatrix::identity(d, d) * C64::from(1.0 / d as f64))))
}

/// Minimum of [`check_cimm`] over mixed inputs: YES iff ≤ `a`, NO iff ≥ `b`.
pub fn decide_cimm(inst: &CimmInstance, opts: &DeciderOptions) -> Result<Verdict> {
    inst.validate()?;
    let c = &inst.channel;
    let choi = c.choi_state(&["A", "E"])?;
    let dist = |v: &[C64]| match channel_output(&choi, c, input_from_purification(v, c.n_a())) {
        Ok(out) => {
            let d = out.dim();
            trace_norm(&(out.matrix() - CMatrix::identity(d, d) * C64::from(1.0 / d as f64)))
        }
        Err(_) => f64::MAX,
    };
    let dim = 1usize << (2 * c.n_a());
    let found = minimize_on_sphere(dim, opts.restarts, opts.seed, &dist);
    let value = found.cost;
    let decision = three_way(value <= inst.a + THRESHOLD_TOL, value >= inst.b - THRESHOLD_TOL);
    let witness = (decision == Decision::Yes).then(|| Witness::new(&found.point, None, value, None));
    Ok(Verdict {
        problem: "cimm".into(),
        decision,
        value,
        witness,
        optimizer_report: vec![report("search", Objective::MinProductDistance, dim, opts.restarts, &found, value)],
    })
}

/// Minimum energy over product states across `cut`: YES iff ≤ α, NO iff ≥ β.
pub fn decide_sepham(h: &LocalHamiltonian, cut: &[&str], alpha: f64, beta: f64, opts: &DeciderOptions) -> Result<Verdict> {
    if !(beta > alpha) {
        return Err(Error::InvalidParameter(format!("need β > α, got α = {alpha}, β = {beta}")));
    }
    let layout = h.layout();
    layout.check_cut(cut)?;
    let kept = layout.qubits_of(cut)?;
    let n = layout.total_qubits();
    let m = h.dense()?;
    let (table, dk, dr) = split_index_table(n, &kept);
    let product = |v: &[C64]| -> Option<CVector> {
        let (l, r) = v.split_at(dk);
        let nl = l.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nr = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nl < 1e-9 || nr < 1e-9 {
            return None;
        }
        let mut out = CVector::zeros(1 << n);
        for a in 0..dk {
            for b in 0..dr {
                out[table[a * dr + b]] = l[a] * r[b] / C64::from(nl * nr);
            }
        }
        Some(out)
    };
    let energy = |v: &[C64]| match product(v) {
        Some(p) => p.dotc(&(&m * &p)).re,
        None => f64::MAX,
    };
    let found = minimize_on_sphere(dk + dr, opts.restarts, opts.seed, &energy);
    let value = found.cost;
    let decision = three_way(value <= alpha + THRESHOLD_TOL, value >= beta - THRESHOLD_TOL);
    let witness = (decision == Decision::Yes).then(|| {
        let state = product(&found.point).and_then(|p| PureState::new(layout.clone(), p).ok());
        Witness::new(&found.point, Some(value), value, state.as_ref())
    });
    Ok(Verdict {
        problem: "sepham".into(),
        decision,
        value,
        witness,
        optimizer_report: vec![report("search", Objective::MinProductDistance, dk + dr, opts.restarts, &found, value)],
    })
}
