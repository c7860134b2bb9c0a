use crate::error::{Error, Result};
use crate::linalg::{bit_position, scatter_bits, CMatrix, C64, ZERO};

/// Coordinate-format complex matrix, entries sorted by `(row, col)` with no explicit zeros.
///
/// Local terms of clock Hamiltonians act on many qubits but touch few basis states, so they
/// are stored sparsely even though their supports are small by operator standards.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    /// Sums duplicates and drops exact zeros.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Result<Self> {
        let mut entries: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            if r >= dim || c >= dim {
                return Err(Error::DimensionMismatch { expected: dim, found: r.max(c) });
            }
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != ZERO);
        Ok(Self { dim, entries: merged })
    }

    pub fn from_dense(m: &CMatrix) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != ZERO {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        Self { dim: m.nrows(), entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for &(r, c, v) in &self.entries {
            let mirror = self.get(c, r);
            worst = worst.max((v - mirror.conj()).norm());
        }
        worst
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        match self.entries.binary_search_by(|e| (e.0, e.1).cmp(&(row, col))) {
            Ok(k) => self.entries[k].2,
            Err(_) => ZERO,
        }
    }

    /// Indices appearing in some row or column, ascending.
    pub fn active_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = self.entries.iter().flat_map(|e| [e.0, e.1]).collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }

    /// Dense block on the active indices. Outside it the matrix vanishes.
    pub fn active_block(&self) -> (Vec<usize>, CMatrix) {
        let idx = self.active_indices();
        let mut m = CMatrix::zeros(idx.len(), idx.len());
        for &(r, c, v) in &self.entries {
            let i = idx.binary_search(&r).expect("active");
            let j = idx.binary_search(&c).expect("active");
            m[(i, j)] += v;
        }
        (idx, m)
    }
}

/// One Hermitian term `H_j` acting on `support` (first support qubit most significant).
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTerm {
    support: Vec<usize>,
    matrix: SparseMatrix,
}

impl LocalTerm {
    pub fn new(support: Vec<usize>, matrix: SparseMatrix) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidParameter("a term needs a nonempty support".into()));
        }
        for (i, q) in support.iter().enumerate() {
            if support[..i].contains(q) {
                return Err(Error::InvalidParameter(format!("qubit {q} repeated in support")));
            }
        }
        if support.len() >= usize::BITS as usize - 1 {
            return Err(Error::BudgetExceeded { what: "term support", needed: support.len(), limit: 62 });
        }
        let dim = 1usize << support.len();
        if matrix.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.dim() });
        }
        let herm = matrix.hermiticity_error();
        if herm > 1e-9 {
            return Err(Error::NotHermitian(herm));
        }
        Ok(Self { support, matrix })
    }

    pub fn from_dense(support: Vec<usize>, m: &CMatrix) -> Result<Self> {
        Self::new(support, SparseMatrix::from_dense(m))
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// Operator norm of the term (dense eigensolve on its active block).
    pub fn norm(&self) -> f64 {
        let (_, block) = self.matrix.active_block();
        crate::linalg::eigvalsh(&block).iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    /// Entries with row and column offsets already placed into an `n`-qubit index.
    pub(crate) fn placed(&self, n: usize) -> PlacedTerm {
        let positions: Vec<usize> = self.support.iter().map(|&q| bit_position(n, q)).collect();
        let rest: Vec<usize> = crate::linalg::complement(n, &self.support)
            .into_iter()
            .map(|q| bit_position(n, q))
            .collect();
        let entries = self
            .matrix
            .entries
            .iter()
            .map(|&(r, c, v)| (scatter_bits(r, &positions), scatter_bits(c, &positions), v))
            .collect();
        PlacedTerm { entries, rest, positions }
    }
}

/// A term ready to act on full-space vectors.
pub(crate) struct PlacedTerm {
    pub entries: Vec<(usize, usize, C64)>,
    /// Bit positions outside the support.
    pub rest: Vec<usize>,
    /// Bit positions of the support qubits.
    pub positions: Vec<usize>,
}

impl PlacedTerm {
    pub fn rest_bases(&self) -> impl Iterator<Item = usize> + '_ {
        (0..(1usize << self.rest.len())).map(move |r| scatter_bits(r, &self.rest))
    }

    pub fn place(&self, local: usize) -> usize {
        scatter_bits(local, &self.positions)
    }

    /// `y += H_j x`.
    pub fn apply_add(&self, x: &[C64], y: &mut [C64]) {
        for base in self.rest_bases() {
            for &(r, c, v) in &self.entries {
                y[base | r] += v * x[base | c];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, pauli_z};

    #[test]
    fn triplets_merge_and_drop_zeros() {
        let m = SparseMatrix::from_triplets(
            2,
            [(0, 0, c64(1.0, 0.0)), (0, 0, c64(-1.0, 0.0)), (1, 0, c64(2.0, 0.0))],
        )
        .unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(1, 0), c64(2.0, 0.0));
    }

    #[test]
    fn term_validation() {
        assert!(LocalTerm::from_dense(vec![0], &pauli_z()).is_ok());
        assert!(LocalTerm::from_dense(vec![0, 0], &CMatrix::identity(4, 4)).is_err());
        let mut bad = CMatrix::zeros(2, 2);
        bad[(0, 1)] = c64(1.0, 0.0);
        assert!(matches!(LocalTerm::from_dense(vec![0], &bad), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn active_block_of_projector() {
        let mut m = CMatrix::zeros(4, 4);
        m[(2, 2)] = c64(1.0, 0.0);
        let t = LocalTerm::from_dense(vec![0, 1], &m).unwrap();
        let (idx, block) = t.matrix().active_block();
        assert_eq!(idx, vec![2]);
        assert_eq!(block[(0, 0)], c64(1.0, 0.0));
        assert!((t.norm() - 1.0).abs() < 1e-15);
    }
}
