//! The low-energy span of a Hamiltonian and the reduced state of every vector in it.

use super::search::minimize_on_sphere;
use super::OptimizerReport;
use crate::clock::{ClockEigenvector, ClockHamiltonian};
use crate::error::{Error, Result};
use crate::hamiltonian::{spectrum, LocalHamiltonian};
use crate::linalg::{eigh, split_index_table, CMatrix, CVector, C64, ZERO};
use crate::qstate::{shannon_entropy, PureState, RegisterLayout};
use serde::{Deserialize, Serialize};

/// Largest low-energy span the brute-force search accepts.
pub const MAX_LOW_ENERGY_DIMENSION: usize = 64;
pub const DEFAULT_RESTARTS: usize = 32;
/// Slack on the energy cutoff when collecting eigenvectors.
pub const ENERGY_TOL: f64 = 1e-10;

/// A Hamiltonian given either term by term or as a clock construction kept in factored form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HamiltonianSource {
    Explicit { hamiltonian: LocalHamiltonian },
    Clock { circuit: crate::channel::ChannelSpec, config: crate::clock::ClockConfig },
}

impl HamiltonianSource {
    pub fn explicit(h: LocalHamiltonian) -> Self {
        Self::Explicit { hamiltonian: h }
    }

    pub fn clock(hc: &ClockHamiltonian) -> Self {
        Self::Clock { circuit: hc.channel().clone(), config: *hc.config() }
    }

    pub fn clock_hamiltonian(&self) -> Result<Option<ClockHamiltonian>> {
        match self {
            Self::Explicit { .. } => Ok(None),
            Self::Clock { circuit, config } => crate::clock::build(circuit, *config).map(Some),
        }
    }

    pub fn layout(&self) -> Result<RegisterLayout> {
        match self {
            Self::Explicit { hamiltonian } => Ok(hamiltonian.layout().clone()),
            Self::Clock { .. } => Ok(self.clock_hamiltonian()?.expect("clock source").layout().clone()),
        }
    }

    pub fn local_hamiltonian(&self) -> Result<LocalHamiltonian> {
        match self {
            Self::Explicit { hamiltonian } => Ok(hamiltonian.clone()),
            Self::Clock { .. } => self.clock_hamiltonian()?.expect("clock source").local_hamiltonian(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    MaxEntropy,
    MinEntropy,
    /// Full-norm distance to the nearest product state across the cut.
    MinProductDistance,
}

impl Objective {
    fn cost(self, value: f64) -> f64 {
        match self {
            Self::MaxEntropy => -value,
            _ => value,
        }
    }
}

/// One time slice: `ρ += Σ_{g,h} weights[g][h] · P_g(c) P_h(c)†` with `P_g(c) = Σ_{i∈g} cᵢ pieces[i]`.
#[derive(Clone, Debug)]
struct Frame {
    weights: Vec<Vec<f64>>,
    pieces: Vec<CMatrix>,
}

#[derive(Clone, Debug)]
enum Span {
    Dense { layout: RegisterLayout, basis: Vec<CVector> },
    Clock { hc: Box<ClockHamiltonian>, vectors: Vec<ClockEigenvector> },
}

/// Orthonormal eigenvectors with energy ≤ cutoff and a fast map from coefficients to the
/// reduced state on the cut.
#[derive(Clone, Debug)]
pub struct LowEnergyModel {
    cutoff: f64,
    cut: Vec<String>,
    energies: Vec<f64>,
    group_of: Vec<usize>,
    frames: Vec<Frame>,
    span: Span,
}

fn reshape(v: &CVector, n: usize, kept: &[usize]) -> CMatrix {
    let (table, dk, dr) = split_index_table(n, kept);
    CMatrix::from_fn(dk, dr, |a, r| v[table[a * dr + r]])
}

fn check_dimension(d: usize, cutoff: f64) -> Result<()> {
    if d == 0 {
        return Err(Error::EmptyLowEnergySpace { cutoff });
    }
    if d > MAX_LOW_ENERGY_DIMENSION {
        return Err(Error::BudgetExceeded { what: "low-energy dimension", needed: d, limit: MAX_LOW_ENERGY_DIMENSION });
    }
    Ok(())
}

impl LowEnergyModel {
    pub fn new<S: AsRef<str>>(source: &HamiltonianSource, cut: &[S], cutoff: f64) -> Result<Self> {
        match source {
            HamiltonianSource::Explicit { hamiltonian } => Self::dense(hamiltonian, cut, cutoff),
            HamiltonianSource::Clock { .. } => Self::from_clock(&source.clock_hamiltonian()?.expect("clock source"), cut, cutoff),
        }
    }

    pub fn dense<S: AsRef<str>>(h: &LocalHamiltonian, cut: &[S], cutoff: f64) -> Result<Self> {
        let layout = h.layout();
        let kept = layout.check_cut(cut).and_then(|_| layout.qubits_of(cut))?;
        let summary = spectrum(h, cutoff + ENERGY_TOL)?;
        if summary.low_energy_basis.is_empty() && summary.low_energy_dimension == 0 && h.qubits() > crate::qstate::MAX_DENSE_QUBITS {
            return Err(Error::BudgetExceeded { what: "dense qubits", needed: h.qubits(), limit: crate::qstate::MAX_DENSE_QUBITS });
        }
        let basis = summary.low_energy_basis;
        check_dimension(basis.len(), cutoff)?;
        let n = h.qubits();
        let pieces = basis.iter().map(|v| reshape(v, n, &kept)).collect();
        Ok(Self {
            cutoff,
            cut: cut.iter().map(|s| s.as_ref().to_string()).collect(),
            energies: summary.eigenvalues[..basis.len()].to_vec(),
            group_of: vec![0; basis.len()],
            frames: vec![Frame { weights: vec![vec![1.0]], pieces }],
            span: Span::Dense { layout: layout.clone(), basis },
        })
    }

    /// The cut may name the clock register; since the whole state is pure, the reduced state on
    /// the complementary registers among A, B, E has the same spectrum and is used instead.
    pub fn from_clock<S: AsRef<str>>(hc: &ClockHamiltonian, cut: &[S], cutoff: f64) -> Result<Self> {
        hc.layout().check_cut(cut)?;
        let names: Vec<&str> = cut.iter().map(|s| s.as_ref()).collect();
        let system = hc.channel().layout();
        let kept_names: Vec<String> = if names.contains(&"C") {
            system.names().into_iter().filter(|r| !names.contains(r)).map(String::from).collect()
        } else {
            names.iter().map(|s| s.to_string()).collect()
        };
        let kept = system.qubits_of(&kept_names)?;
        let vectors = hc.eigenvectors_below(cutoff + ENERGY_TOL)?;
        check_dimension(vectors.len(), cutoff)?;

        // eigenvectors of the same level share a time profile
        let mut levels: Vec<(usize, usize)> = Vec::new();
        let mut group_of = Vec::with_capacity(vectors.len());
        for v in &vectors {
            let key = (v.ancilla_weight, v.index);
            let g = levels.iter().position(|k| *k == key).unwrap_or_else(|| {
                levels.push(key);
                levels.len() - 1
            });
            group_of.push(g);
        }
        let profiles: Vec<&[f64]> = levels
            .iter()
            .map(|key| {
                let i = group_of.iter().position(|&g| levels[g] == *key).expect("every level has a vector");
                vectors[i].profile.as_slice()
            })
            .collect();
        let gates = hc.gates();
        let mut weights = vec![vec![vec![0.0; levels.len()]; levels.len()]; gates + 1];
        for (g, pg) in profiles.iter().enumerate() {
            for (h, ph) in profiles.iter().enumerate() {
                for (t, w) in crate::clock::folded_weights(pg, ph, gates).into_iter().enumerate() {
                    weights[t][g][h] = w;
                }
            }
        }
        let n = system.total_qubits();
        let slices: Vec<Vec<CVector>> = vectors.iter().map(|v| hc.basis_slices(v.input)).collect();
        let frames = weights
            .into_iter()
            .enumerate()
            .map(|(t, weights)| Frame { weights, pieces: slices.iter().map(|s| reshape(&s[t], n, &kept)).collect() })
            .collect();
        Ok(Self {
            cutoff,
            cut: cut.iter().map(|s| s.as_ref().to_string()).collect(),
            energies: vectors.iter().map(|v| v.energy).collect(),
            group_of,
            frames,
            span: Span::Clock { hc: Box::new(hc.clone()), vectors },
        })
    }

    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn cut(&self) -> &[String] {
        &self.cut
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, c: &[C64]) -> f64 {
        c.iter().zip(&self.energies).map(|(z, e)| z.norm_sqr() * e).sum()
    }

    fn group_sums(&self, frame: &Frame, c: &[C64]) -> Vec<CMatrix> {
        let groups = frame.weights.len();
        let (r, k) = frame.pieces[0].shape();
        let mut sums = vec![CMatrix::zeros(r, k); groups];
        for ((piece, &g), &ci) in frame.pieces.iter().zip(&self.group_of).zip(c) {
            if ci != ZERO {
                sums[g] += piece * ci;
            }
        }
        sums
    }

    /// Reduced state on the cut (or its complement for clock cuts through `C`) of `Σ cᵢ|eᵢ⟩`.
    pub fn reduced(&self, c: &[C64]) -> CMatrix {
        let dk = self.frames[0].pieces[0].nrows();
        let mut rho = CMatrix::zeros(dk, dk);
        for frame in &self.frames {
            let sums = self.group_sums(frame, c);
            for (g, row) in frame.weights.iter().enumerate() {
                for (h, &w) in row.iter().enumerate() {
                    if w != 0.0 {
                        rho += &sums[g] * sums[h].adjoint() * C64::from(w);
                    }
                }
            }
        }
        rho
    }

    pub fn objective(&self, objective: Objective, c: &[C64]) -> f64 {
        let values = crate::linalg::eigvalsh(&self.reduced(c));
        match objective {
            Objective::MaxEntropy | Objective::MinEntropy => shannon_entropy(&values).max(0.0),
            Objective::MinProductDistance => {
                let top = values.last().copied().unwrap_or(0.0).clamp(0.0, 1.0);
                2.0 * (1.0 - top).max(0.0).sqrt()
            }
        }
    }

    /// `Q` with `⟨φ|ρ(c)|φ⟩ = d†Qd` for `d = c̄`.
    fn overlap_form(&self, phi: &CVector) -> CMatrix {
        let d = self.dimension();
        let mut q = CMatrix::zeros(d, d);
        for frame in &self.frames {
            let rows: Vec<_> = frame.pieces.iter().map(|p| phi.adjoint() * p).collect();
            for i in 0..d {
                for j in 0..d {
                    let w = frame.weights[self.group_of[i]][self.group_of[j]];
                    if w != 0.0 {
                        q[(i, j)] += rows[j].dotc(&rows[i]) * C64::from(w);
                    }
                }
            }
        }
        q
    }

    /// Alternating maximization of `⟨φ|ρ(c)|φ⟩`: the top eigenvector of `ρ(c)` for fixed `c`,
    /// then the top eigenvector of the quadratic form in `c` for fixed `φ`.
    fn polish_top_weight(&self, mut c: Vec<C64>) -> Vec<C64> {
        let mut last = f64::NEG_INFINITY;
        for _ in 0..200 {
            let e = eigh(&self.reduced(&c));
            let k = e.values.len() - 1;
            if e.values[k] <= last + 1e-15 {
                break;
            }
            last = e.values[k];
            let phi = e.vectors.column(k).into_owned();
            let q = crate::linalg::hermitize(&self.overlap_form(&phi));
            let eq = eigh(&q);
            let top = eq.vectors.column(eq.values.len() - 1);
            c = top.iter().map(|z| z.conj()).collect();
        }
        c
    }

    /// The state `Σ cᵢ|eᵢ⟩`, when it fits in memory.
    pub fn state(&self, c: &[C64]) -> Result<PureState> {
        match &self.span {
            Span::Dense { layout, basis } => {
                let v = basis.iter().zip(c).fold(CVector::zeros(layout.dim()), |acc, (b, &ci)| acc + b * ci);
                PureState::normalized(layout.clone(), v)
            }
            Span::Clock { hc, vectors } => {
                let mut acc: Option<CVector> = None;
                for (v, &ci) in vectors.iter().zip(c) {
                    let s = hc.materialize(v)?.into_amplitudes() * ci;
                    acc = Some(match acc {
                        Some(a) => a + s,
                        None => s,
                    });
                }
                PureState::normalized(hc.layout().clone(), acc.expect("nonempty span"))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Optimum {
    pub coefficients: Vec<C64>,
    pub energy: f64,
    /// Objective value in its natural orientation (entropy or distance).
    pub value: f64,
    pub report: OptimizerReport,
}

/// Optimizes `objective` over unit vectors of the low-energy span.
pub fn optimize_model(model: &LowEnergyModel, objective: Objective, restarts: usize, seed: u64, phase: &str) -> Optimum {
    let cost = |c: &[C64]| objective.cost(model.objective(objective, c));
    let found = minimize_on_sphere(model.dimension(), restarts, seed, &cost);
    let mut best = found.point.clone();
    let mut best_cost = found.cost;
    if objective != Objective::MaxEntropy {
        let polished = model.polish_top_weight(best.clone());
        let pc = cost(&polished);
        if pc < best_cost {
            best = polished;
            best_cost = pc;
        }
    }
    let value = objective.cost(best_cost);
    Optimum {
        energy: model.energy(&best),
        coefficients: best,
        value,
        report: OptimizerReport {
            phase: phase.to_string(),
            objective,
            cutoff: model.cutoff(),
            dimension: model.dimension(),
            restarts,
            iterations: found.iterations,
            evaluations: found.evaluations,
            best_objective: value,
        },
    }
}

/// Brute-force optimum of `objective` over states in the span of eigenvectors with energy
/// ≤ `cutoff`, together with the state itself when it fits in memory.
pub fn optimize_low_energy<S: AsRef<str>>(
    source: &HamiltonianSource,
    cut: &[S],
    cutoff: f64,
    objective: Objective,
    restarts: usize,
    seed: u64,
) -> Result<(Optimum, Option<PureState>)> {
    let model = LowEnergyModel::new(source, cut, cutoff)?;
    let opt = optimize_model(&model, objective, restarts, seed, "search");
    let state = model.state(&opt.coefficients).ok();
    Ok((opt, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelSpec;
    use crate::clock::{build, ClockConfig, ClockEncoding};
    use crate::hamiltonian::LocalTerm;
    use crate::linalg::{identity, outer, pauli_z};
    use crate::qstate::vn_entropy;
    use crate::random::{haar_vector, seeded};

    fn two_qubits() -> RegisterLayout {
        RegisterLayout::new([("A", 1), ("B", 1)]).unwrap()
    }

    fn bell_penalty() -> LocalHamiltonian {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = CVector::from_vec(vec![C64::from(h), ZERO, ZERO, C64::from(h)]);
        let m = identity(4) - outer(&phi, &phi);
        LocalHamiltonian::new(two_qubits(), vec![LocalTerm::from_dense(vec![0, 1], &m).unwrap()]).unwrap()
    }

    fn number_operator() -> LocalHamiltonian {
        let one = (identity(2) - pauli_z()) * C64::from(0.5);
        let terms = vec![LocalTerm::from_dense(vec![0], &one).unwrap(), LocalTerm::from_dense(vec![1], &one).unwrap()];
        LocalHamiltonian::new(two_qubits(), terms).unwrap()
    }

    #[test]
    fn bell_ground_state_has_one_bit() {
        let src = HamiltonianSource::explicit(bell_penalty());
        let (opt, state) = optimize_low_energy(&src, &["A"], 0.1, Objective::MaxEntropy, 8, 1).unwrap();
        assert!((opt.value - 1.0).abs() < 1e-9);
        let psi = state.unwrap();
        assert!((vn_entropy(&psi.reduced(&["A"]).unwrap()) - 1.0).abs() < 1e-9);
        let (d, _) = optimize_low_energy(&src, &["A"], 0.1, Objective::MinProductDistance, 8, 1).unwrap();
        assert!((d.value - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn product_ground_state_has_no_entropy() {
        let src = HamiltonianSource::explicit(number_operator());
        let (opt, state) = optimize_low_energy(&src, &["A"], 0.1, Objective::MinEntropy, 8, 2).unwrap();
        assert!(opt.value.abs() < 1e-9);
        assert!((state.unwrap().amplitudes()[0].norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unconstrained_span_reaches_maximal_entanglement_and_products() {
        let src = HamiltonianSource::explicit(LocalHamiltonian::zero(two_qubits()).unwrap());
        let (max, _) = optimize_low_energy(&src, &["A"], 0.0, Objective::MaxEntropy, 16, 3).unwrap();
        assert!((max.value - 1.0).abs() < 1e-6, "{}", max.value);
        let (min, _) = optimize_low_energy(&src, &["B"], 0.0, Objective::MinProductDistance, 16, 3).unwrap();
        assert!(min.value < 1e-6);
    }

    #[test]
    fn empty_span_is_an_error() {
        let src = HamiltonianSource::explicit(number_operator().scaled(1.0).unwrap());
        assert!(matches!(
            LowEnergyModel::new(&src, &["A"], -0.5),
            Err(Error::EmptyLowEnergySpace { .. })
        ));
    }

    #[test]
    fn reduced_state_matches_explicit_state() {
        let mut rng = seeded(4);
        let h = number_operator();
        let model = LowEnergyModel::dense(&h, &["B"], 1.5).unwrap();
        assert_eq!(model.dimension(), 3);
        for _ in 0..5 {
            let c: Vec<C64> = haar_vector(3, &mut rng).iter().copied().collect();
            let psi = model.state(&c).unwrap();
            let direct = psi.reduced(&["B"]).unwrap();
            assert!((model.reduced(&c) - direct.matrix()).norm() < 1e-12);
            assert!((model.energy(&c) - h.energy(&psi).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn clock_model_matches_materialized_states() {
        let mut rng = seeded(5);
        let c = ChannelSpec::random(1, 1, 2, &mut rng).unwrap();
        let hc = build(&c, ClockConfig::for_channel(&c, 1, ClockEncoding::Kitaev)).unwrap();
        let cutoff = hc.spectral_gap() * 1.5;
        for cut in [vec!["B"], vec!["A", "E", "C"], vec!["A"]] {
            let model = LowEnergyModel::from_clock(&hc, &cut, cutoff).unwrap();
            assert!(model.dimension() > hc.ground_space_dimension());
            let d = model.dimension();
            let coeffs: Vec<C64> = haar_vector(d, &mut rng).iter().copied().collect();
            let psi = model.state(&coeffs).unwrap();
            let direct = psi.reduced(&cut).unwrap();
            let ours = model.reduced(&coeffs);
            let spec_a = crate::linalg::eigvalsh(direct.matrix());
            let spec_b = crate::linalg::eigvalsh(&ours);
            let sa = shannon_entropy(&spec_a);
            let sb = shannon_entropy(&spec_b);
            assert!((sa - sb).abs() < 1e-9, "{cut:?}: {sa} vs {sb}");
            if !cut.contains(&"C") {
                assert!((ours - direct.matrix()).norm() < 1e-10);
            }
            let e = hc.local_hamiltonian().unwrap().energy(&psi).unwrap();
            assert!((e - model.energy(&coeffs)).abs() < 1e-9);
        }
    }

    #[test]
    fn product_polish_reaches_schmidt_optimum() {
        // the degenerate span of |01⟩ and the Bell state holds exactly one product direction
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = CVector::from_vec(vec![C64::from(h), ZERO, ZERO, C64::from(h)]);
        let mut one = CVector::zeros(4);
        one[1] = C64::from(1.0);
        let m = identity(4) - outer(&bell, &bell) - outer(&one, &one);
        let ham = LocalHamiltonian::new(two_qubits(), vec![LocalTerm::from_dense(vec![0, 1], &m).unwrap()]).unwrap();
        let model = LowEnergyModel::dense(&ham, &["A"], 0.9).unwrap();
        let opt = optimize_model(&model, Objective::MinProductDistance, 4, 6, "t");
        assert!(opt.value < 1e-6, "{}", opt.value);
    }
}
