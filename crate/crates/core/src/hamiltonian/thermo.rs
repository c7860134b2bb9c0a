use super::{LocalHamiltonian, StateRef};
use crate::error::{Error, Result};
use crate::linalg::{eigh, CMatrix, CVector, C64};
use crate::qstate::{vn_entropy, DensityMatrix, RegisterLayout};
use crate::random::seeded;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

/// Full eigendecomposition kept around for repeated thermal queries.
#[derive(Clone, Debug)]
pub struct ThermalSpectrum {
    layout: RegisterLayout,
    values: Vec<f64>,
    vectors: CMatrix,
}

impl ThermalSpectrum {
    pub fn new(h: &LocalHamiltonian) -> Result<Self> {
        let e = eigh(&h.dense()?);
        Ok(Self { layout: h.layout().clone(), values: e.values, vectors: e.vectors })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// `ln Z`, evaluated stably around the ground energy.
    pub fn log_partition_function(&self, beta: f64) -> Result<f64> {
        check_beta(beta, true)?;
        let ground = self.values[0];
        let sum: f64 = self.values.iter().map(|&l| (-beta * (l - ground)).exp()).sum();
        Ok(-beta * ground + sum.ln())
    }

    pub fn gibbs_state(&self, beta: f64) -> Result<DensityMatrix> {
        check_beta(beta, true)?;
        let ground = self.values[0];
        let weights: Vec<f64> = self.values.iter().map(|&l| (-beta * (l - ground)).exp()).collect();
        let z: f64 = weights.iter().sum();
        let scaled = CVector::from_iterator(weights.len(), weights.iter().map(|w| C64::from(w / z)));
        let m = &self.vectors * CMatrix::from_diagonal(&scaled) * self.vectors.adjoint();
        DensityMatrix::from_matrix(self.layout.clone(), m)
    }

    /// `−ln Z / β` in energy units.
    pub fn free_energy(&self, beta: f64) -> Result<f64> {
        check_beta(beta, false)?;
        Ok(-self.log_partition_function(beta)? / beta)
    }
}

fn check_beta(beta: f64, allow_zero: bool) -> Result<()> {
    let ok = beta.is_finite() && (beta > 0.0 || (allow_zero && beta == 0.0));
    if !ok {
        return Err(Error::InvalidParameter(format!("inverse temperature {beta} out of range")));
    }
    Ok(())
}

pub fn log_partition_function(h: &LocalHamiltonian, beta: f64) -> Result<f64> {
    ThermalSpectrum::new(h)?.log_partition_function(beta)
}

/// `Z = Tr e^{−βH}`; overflow is reported with `ln Z`.
pub fn partition_function(h: &LocalHamiltonian, beta: f64) -> Result<f64> {
    let log_z = log_partition_function(h, beta)?;
    let z = log_z.exp();
    if !z.is_finite() {
        return Err(Error::Overflow { log_z });
    }
    Ok(z)
}

pub fn gibbs_state(h: &LocalHamiltonian, beta: f64) -> Result<DensityMatrix> {
    ThermalSpectrum::new(h)?.gibbs_state(beta)
}

pub fn free_energy(h: &LocalHamiltonian, beta: f64) -> Result<f64> {
    ThermalSpectrum::new(h)?.free_energy(beta)
}

/// `Tr(Hρ) − S(ρ)/β` with the entropy converted to nats.
pub fn free_energy_functional(h: &LocalHamiltonian, rho: &DensityMatrix, beta: f64) -> Result<f64> {
    check_beta(beta, false)?;
    Ok(h.energy(rho)? - vn_entropy(rho) * std::f64::consts::LN_2 / beta)
}

/// Outcome distribution of measuring one term in its eigenbasis.
struct TermMeasurement {
    outcomes: Vec<f64>,
    weights: Vec<f64>,
}

fn term_measurement(h: &LocalHamiltonian, j: usize, state: StateRef<'_>) -> TermMeasurement {
    let term = &h.terms()[j];
    let placed = term.placed(h.qubits());
    let (active, block) = term.matrix().active_block();
    if active.is_empty() {
        return TermMeasurement { outcomes: vec![0.0], weights: vec![1.0] };
    }
    let placed_idx: Vec<usize> = active.iter().map(|&a| placed.place(a)).collect();
    let reduced = state.reduced_block(&placed, &placed_idx);
    let e = eigh(&block);
    let mut outcomes = Vec::with_capacity(e.values.len() + 1);
    let mut weights = Vec::with_capacity(e.values.len() + 1);
    for (k, &lambda) in e.values.iter().enumerate() {
        let v = e.vectors.column(k);
        let p = (v.adjoint() * &reduced * v)[(0, 0)].re.max(0.0);
        outcomes.push(lambda);
        weights.push(p);
    }
    // the complement of the active block is the zero-eigenvalue outcome
    let rest = (1.0 - weights.iter().sum::<f64>()).max(0.0);
    outcomes.push(0.0);
    weights.push(rest);
    TermMeasurement { outcomes, weights }
}

/// Estimates `Tr(Hρ)` by measuring a uniformly random term per sample and returning `m` times
/// the sample mean. `samples = 0` returns the exact expectation.
pub fn sampled_energy_estimate<'a>(
    h: &LocalHamiltonian,
    state: impl Into<StateRef<'a>>,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let state = state.into();
    h.check_layout(state.layout())?;
    if samples == 0 {
        return match state {
            StateRef::Pure(p) => h.energy(p),
            StateRef::Mixed(r) => h.energy(r),
        };
    }
    if h.terms().iter().any(|t| t.support().len() <= 10 && t.norm() > 1.0 + 1e-9) {
        log::warn!("some term has operator norm above 1; the sampled estimate's spread is no longer bounded by m");
    }
    let m = h.terms().len();
    let mut cache: Vec<Option<(TermMeasurement, WeightedIndex<f64>)>> = (0..m).map(|_| None).collect();
    let mut rng = seeded(seed);
    let mut total = 0.0;
    for _ in 0..samples {
        let j = rng.random_range(0..m);
        let (meas, dist) = cache[j].get_or_insert_with(|| {
            let meas = term_measurement(h, j, state);
            let dist = WeightedIndex::new(&meas.weights).expect("outcome weights sum to one");
            (meas, dist)
        });
        total += meas.outcomes[dist.sample(&mut rng)];
    }
    Ok(m as f64 * total / samples as f64)
}
