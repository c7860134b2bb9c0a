use super::{LocalHamiltonian, LocalTerm, SparseMatrix};
use crate::error::{Error, Result};
use crate::linalg::{c64, from_row_major, to_row_major};
use crate::qstate::RegisterLayout;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Terms on more qubits than this are written as coordinate lists instead of dense matrices.
const DENSE_TERM_QUBITS: usize = 4;

/// On-disk form of a [`LocalHamiltonian`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianFile {
    pub qubits: usize,
    pub registers: Vec<(String, usize)>,
    pub terms: Vec<TermFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Map<String, Value>>,
}

/// One term: a dense row-major `matrix` of `[re, im]` pairs, or sparse `entries` of `[row, col, re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub support: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<(usize, usize, f64, f64)>>,
}

impl From<&LocalHamiltonian> for HamiltonianFile {
    fn from(h: &LocalHamiltonian) -> Self {
        let terms = h
            .terms()
            .iter()
            .map(|t| {
                if t.support().len() <= DENSE_TERM_QUBITS {
                    TermFile {
                        support: t.support().to_vec(),
                        matrix: Some(to_row_major(&t.matrix().to_dense())),
                        entries: None,
                    }
                } else {
                    TermFile {
                        support: t.support().to_vec(),
                        matrix: None,
                        entries: Some(t.matrix().entries().iter().map(|&(r, c, v)| (r, c, v.re, v.im)).collect()),
                    }
                }
            })
            .collect();
        Self {
            qubits: h.qubits(),
            registers: h.layout().registers().to_vec(),
            terms,
            metadata: h.metadata().cloned(),
        }
    }
}

impl From<LocalHamiltonian> for HamiltonianFile {
    fn from(h: LocalHamiltonian) -> Self {
        Self::from(&h)
    }
}

impl TryFrom<HamiltonianFile> for LocalHamiltonian {
    type Error = Error;

    fn try_from(f: HamiltonianFile) -> Result<Self> {
        let layout = RegisterLayout::new(f.registers)?;
        if layout.total_qubits() != f.qubits {
            return Err(Error::Malformed(format!(
                "\"qubits\" is {} but registers hold {}",
                f.qubits,
                layout.total_qubits()
            )));
        }
        let mut terms = Vec::with_capacity(f.terms.len());
        for t in f.terms {
            let k = t.support.len();
            if k == 0 || k > 62 {
                return Err(Error::Malformed(format!("term support of size {k}")));
            }
            let dim = 1usize << k;
            let matrix = match (t.matrix, t.entries) {
                (Some(m), None) => {
                    let dense = from_row_major(dim, &m).ok_or_else(|| {
                        Error::Malformed(format!("term on {k} qubits needs {} matrix entries, found {}", dim * dim, m.len()))
                    })?;
                    SparseMatrix::from_dense(&dense)
                }
                (None, Some(e)) => SparseMatrix::from_triplets(dim, e.into_iter().map(|(r, c, re, im)| (r, c, c64(re, im))))?,
                _ => return Err(Error::Malformed("each term needs exactly one of \"matrix\" or \"entries\"".into())),
            };
            terms.push(LocalTerm::new(t.support, matrix)?);
        }
        let h = LocalHamiltonian::new(layout, terms)?;
        Ok(match f.metadata {
            Some(m) => h.with_metadata(m),
            None => h,
        })
    }
}

impl LocalHamiltonian {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&HamiltonianFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: HamiltonianFile = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        file.try_into()
    }
}
