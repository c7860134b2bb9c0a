//! Gap certification and witness extraction for the clock construction.

use super::{build, ClockConfig, ClockEncoding, ClockHamiltonian};
use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::hamiltonian::{spectrum, StateRef};
use crate::linalg::{CMatrix, CVector, C64};
use crate::qstate::{DensityMatrix, PureState};
use serde::Serialize;

/// Total qubits up to which `certify_gap` also diagonalizes densely as a cross-check.
const DENSE_CHECK_QUBITS: usize = 9;

/// Fitted exponents at or above this count as polynomial closing within the expected order.
pub const SCALING_EXPONENT_FLOOR: f64 = -3.25;

#[derive(Clone, Debug, Serialize)]
pub struct GapPoint {
    pub idle: usize,
    pub time_steps: usize,
    pub gap: f64,
    /// Gap from dense diagonalization when the instance is small enough.
    pub dense_gap: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapCertificate {
    pub encoding: ClockEncoding,
    pub points: Vec<GapPoint>,
    /// `p` in the least-squares fit `Δ ≈ c · (T+L+1)^p`.
    pub exponent: f64,
    pub prefactor: f64,
    pub fits_scaling: bool,
}

/// Computes the gap of `H_Φ` for every idle length in `idles` and fits a power law in `T+L+1`.
pub fn certify_gap(channel: &ChannelSpec, encoding: ClockEncoding, idles: &[usize]) -> Result<GapCertificate> {
    let mut points = Vec::with_capacity(idles.len());
    for &idle in idles {
        let hc = build(channel, ClockConfig::for_channel(channel, idle, encoding))?;
        let dense_gap = if hc.total_qubits() <= DENSE_CHECK_QUBITS {
            Some(spectrum(&hc.local_hamiltonian()?, 0.0)?.spectral_gap)
        } else {
            None
        };
        points.push(GapPoint { idle, time_steps: hc.time_steps(), gap: hc.spectral_gap(), dense_gap });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.time_steps as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.gap.ln()).collect();
    let (exponent, intercept) = least_squares(&xs, &ys).ok_or_else(|| {
        Error::InvalidParameter("the gap sweep needs at least two distinct idle lengths".into())
    })?;
    Ok(GapCertificate {
        encoding,
        points,
        exponent,
        prefactor: intercept.exp(),
        fits_scaling: exponent >= SCALING_EXPONENT_FLOOR,
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if xs.len() < 2 || sxx < 1e-12 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[derive(Clone, Debug)]
pub struct WitnessExtraction {
    /// Input on A read off the history-space component of the state.
    pub input: DensityMatrix,
    /// `Φ(input)` on B.
    pub output: DensityMatrix,
    /// Weight of the state on the zero-energy space.
    pub ground_weight: f64,
    /// `2√(β/Δ) + 2T/(T+L+1)`: trace distance allowed between the state's B marginal and `output`.
    pub bound: f64,
}

/// Given a state of energy at most `energy_bound`, projects it onto the history space and
/// returns the input it encodes together with the error bound on its B marginal.
pub fn extract_witness<'a>(
    hc: &ClockHamiltonian,
    state: impl Into<StateRef<'a>>,
    energy_bound: f64,
) -> Result<WitnessExtraction> {
    let state = state.into();
    if *state.layout() != *hc.layout() {
        return Err(Error::LayoutMismatch("state must live on the clock Hamiltonian's registers".into()));
    }
    let energy = hc.local_hamiltonian()?.energy(state)?;
    if energy > energy_bound + 1e-9 {
        return Err(Error::PromiseViolation(format!("state energy {energy} exceeds the bound {energy_bound}")));
    }
    let input_layout = hc.channel().input_layout();
    let da = input_layout.dim();
    let histories: Vec<CVector> = (0..da)
        .map(|a| Ok(hc.history_state(&PureState::basis(input_layout.clone(), a)?)?.into_amplitudes()))
        .collect::<Result<_>>()?;
    let sigma = match state {
        StateRef::Pure(psi) => {
            let amps = CVector::from_iterator(da, histories.iter().map(|h| h.dotc(psi.amplitudes())));
            &amps * amps.adjoint()
        }
        StateRef::Mixed(rho) => {
            let m = rho.matrix();
            CMatrix::from_fn(da, da, |x, y| histories[x].dotc(&(m * &histories[y])))
        }
    };
    let ground_weight = sigma.trace().re;
    if ground_weight < 1e-12 {
        return Err(Error::ZeroProbability(ground_weight));
    }
    let input = DensityMatrix::new(input_layout, sigma / C64::from(ground_weight))?;
    let output = hc.channel().apply_to_b(&input)?;
    let bound = 2.0 * (energy_bound.max(0.0) / hc.spectral_gap()).sqrt() + hc.idle_bound();
    Ok(WitnessExtraction { input, output, ground_weight, bound })
}
