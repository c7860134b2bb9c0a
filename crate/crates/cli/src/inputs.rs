//! State files and the compact input-state specs accepted by `verify-history`.

use crate::report::{CliError, CliResult};
use hamlab::linalg::{c64, from_row_major, CVector};
use hamlab::random::{haar_vector, seeded};
use hamlab::{DensityMatrix, PureState, RegisterLayout};
use serde::Deserialize;

/// `{ "registers": [[name, n], …], "amplitudes": [[re, im], …] }` for a pure state, or the same
/// with a row-major `"density"` matrix.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub registers: Vec<(String, usize)>,
    #[serde(default)]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub density: Option<Vec<[f64; 2]>>,
}

#[derive(Debug)]
pub enum LoadedState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl LoadedState {
    pub fn density(&self) -> CliResult<DensityMatrix> {
        Ok(match self {
            Self::Pure(p) => p.to_density()?,
            Self::Mixed(r) => r.clone(),
        })
    }
}

fn malformed(msg: impl Into<String>) -> CliError {
    CliError::Lib(hamlab::Error::Malformed(msg.into()))
}

pub fn parse_state(text: &str) -> CliResult<LoadedState> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    let layout = RegisterLayout::new(file.registers)?;
    let dim = layout.dim();
    match (file.amplitudes, file.density) {
        (Some(a), None) => {
            if a.len() != dim {
                return Err(hamlab::Error::DimensionMismatch { expected: dim, found: a.len() }.into());
            }
            let v = CVector::from_iterator(dim, a.iter().map(|&[re, im]| c64(re, im)));
            Ok(LoadedState::Pure(PureState::new(layout, v)?))
        }
        (None, Some(m)) => {
            let m = from_row_major(dim, &m).ok_or_else(|| malformed(format!("density must hold {} entries", dim * dim)))?;
            Ok(LoadedState::Mixed(DensityMatrix::new(layout, m)?))
        }
        _ => Err(malformed("a state file needs exactly one of \"amplitudes\" and \"density\"")),
    }
}

/// Inputs for a history-state check: `basis:K`, `random`, `random:N`, `all` (every basis state),
/// or a path to a pure state file over the input register.
#[derive(Clone, Debug)]
pub enum StateSpec {
    Basis(usize),
    Random(usize),
    All,
    File(std::path::PathBuf),
}

impl std::str::FromStr for StateSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = |_| format!("bad count in state spec {s:?}");
        Ok(match s.split_once(':') {
            Some(("basis", k)) => Self::Basis(k.parse().map_err(bad)?),
            Some(("random", n)) => Self::Random(n.parse().map_err(bad)?),
            None if s == "random" => Self::Random(1),
            None if s == "all" => Self::All,
            _ => Self::File(s.into()),
        })
    }
}

impl StateSpec {
    /// Materializes the inputs on `layout`. Random inputs draw from `seed`.
    pub fn inputs(&self, layout: &RegisterLayout, seed: u64, file_text: Option<&str>) -> CliResult<Vec<PureState>> {
        let dim = layout.dim();
        match self {
            Self::Basis(k) => Ok(vec![PureState::basis(layout.clone(), *k)?]),
            Self::All => (0..dim).map(|k| Ok(PureState::basis(layout.clone(), k)?)).collect(),
            Self::Random(n) => {
                let mut rng = seeded(seed);
                (0..*n).map(|_| Ok(PureState::new(layout.clone(), haar_vector(dim, &mut rng))?)).collect()
            }
            Self::File(_) => {
                let text = file_text.ok_or_else(|| CliError::Usage("state file was not read".into()))?;
                match parse_state(text)? {
                    LoadedState::Pure(p) => Ok(vec![p.with_layout(layout.clone())?]),
                    LoadedState::Mixed(_) => Err(malformed("history inputs must be pure states")),
                }
            }
        }
    }
}
