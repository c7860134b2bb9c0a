//! Dense complex linear algebra shared by every module.
//!
//! Bit convention: in an `n`-qubit index, qubit 0 is the most significant bit.

use nalgebra::{DMatrix, DVector};
pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `(m + m†) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entrywise modulus of `m - m†`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entrywise modulus of `u† u - I`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: CMatrix,
}

/// Hermitizes `m`, diagonalizes it and sorts the spectrum ascending.
pub fn eigh(m: &CMatrix) -> Eigh {
    let n = m.nrows();
    if n == 0 {
        return Eigh { values: Vec::new(), vectors: CMatrix::zeros(0, 0) };
    }
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        fix_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    Eigh { values, vectors }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Rotates a vector so that its largest-modulus entry is real and positive.
/// Makes eigenvector output reproducible across runs.
pub fn fix_phase(v: &mut CVector) {
    let mut best = 0usize;
    let mut best_norm = -1.0;
    for (i, z) in v.iter().enumerate() {
        // Small tolerance so that ties resolve to the lowest index.
        if z.norm() > best_norm + 1e-12 {
            best = i;
            best_norm = z.norm();
        }
    }
    if best_norm > 0.0 {
        let phase = v[best].conj() / v[best].norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let e = eigh(m);
    let n = m.nrows();
    let mut scaled = e.vectors.clone();
    for k in 0..n {
        let fk = f(e.values[k]);
        for i in 0..n {
            scaled[(i, k)] *= fk;
        }
    }
    scaled * e.vectors.adjoint()
}

/// Square root of a positive semidefinite matrix; negative eigenvalues are clamped to zero.
pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    hermitian_function(m, |x| x.max(0.0).sqrt())
}

/// Trace norm of a Hermitian matrix (sum of |eigenvalues|, which are its singular values).
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    eigvalsh(m).iter().map(|x| x.abs()).sum()
}

/// Trace norm of an arbitrary square matrix via singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    m.clone().singular_values().iter().sum()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// Bit position (from the least significant end) of qubit `q` in an `n`-qubit index.
#[inline]
pub fn bit_position(n: usize, q: usize) -> usize {
    n - 1 - q
}

/// Deposits the bits of `local` (most significant first) onto the given bit positions.
#[inline]
pub fn scatter_bits(local: usize, positions: &[usize]) -> usize {
    let k = positions.len();
    let mut out = 0usize;
    for (j, &p) in positions.iter().enumerate() {
        if (local >> (k - 1 - j)) & 1 == 1 {
            out |= 1 << p;
        }
    }
    out
}

/// Reads the bits at `positions` out of `full`, first position becoming the most significant bit.
#[inline]
pub fn gather_bits(full: usize, positions: &[usize]) -> usize {
    let mut out = 0usize;
    for &p in positions {
        out = (out << 1) | ((full >> p) & 1);
    }
    out
}

/// Qubits of `0..n` not in `qubits`, ascending.
pub fn complement(n: usize, qubits: &[usize]) -> Vec<usize> {
    (0..n).filter(|q| !qubits.contains(q)).collect()
}

/// Table `t[a * 2^|rest| + r]` = full index whose `kept` qubits read `a` and `rest` qubits read `r`.
pub fn split_index_table(n: usize, kept: &[usize]) -> (Vec<usize>, usize, usize) {
    let rest = complement(n, kept);
    let kp: Vec<usize> = kept.iter().map(|&q| bit_position(n, q)).collect();
    let rp: Vec<usize> = rest.iter().map(|&q| bit_position(n, q)).collect();
    let dk = 1usize << kept.len();
    let dr = 1usize << rest.len();
    let mut table = vec![0usize; dk * dr];
    for a in 0..dk {
        let ha = scatter_bits(a, &kp);
        for r in 0..dr {
            table[a * dr + r] = ha | scatter_bits(r, &rp);
        }
    }
    (table, dk, dr)
}

/// `op` (acting on `support`, first support qubit most significant) applied in place to an
/// `n`-qubit state vector.
pub fn apply_on_support(op: &CMatrix, support: &[usize], n: usize, state: &mut [C64]) {
    let k = support.len();
    let dk = 1usize << k;
    debug_assert_eq!(op.nrows(), dk);
    debug_assert_eq!(state.len(), 1usize << n);
    let positions: Vec<usize> = support.iter().map(|&q| bit_position(n, q)).collect();
    let offsets: Vec<usize> = (0..dk).map(|l| scatter_bits(l, &positions)).collect();
    let rest_positions: Vec<usize> =
        complement(n, support).iter().map(|&q| bit_position(n, q)).collect();
    let mut buf = vec![ZERO; dk];
    let mut out = vec![ZERO; dk];
    for r in 0..(1usize << rest_positions.len()) {
        let base = scatter_bits(r, &rest_positions);
        for l in 0..dk {
            buf[l] = state[base | offsets[l]];
        }
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (j, b) in buf.iter().enumerate() {
                acc += op[(i, j)] * b;
            }
            *o = acc;
        }
        for l in 0..dk {
            state[base | offsets[l]] = out[l];
        }
    }
}

/// `op ρ op†` for `op` acting on `support` of an `n`-qubit density matrix.
pub fn conjugate_on_support(rho: &CMatrix, op: &CMatrix, support: &[usize], n: usize) -> CMatrix {
    let dim = rho.nrows();
    let mut left = rho.clone();
    for col in left.as_mut_slice().chunks_mut(dim) {
        apply_on_support(op, support, n, col);
    }
    let mut right = left.adjoint();
    for col in right.as_mut_slice().chunks_mut(dim) {
        apply_on_support(op, support, n, col);
    }
    right.adjoint()
}

/// Embeds `op` on `support` into the full `2^n`-dimensional space.
pub fn embed(op: &CMatrix, support: &[usize], n: usize) -> CMatrix {
    let dim = 1usize << n;
    let mut out = CMatrix::identity(dim, dim);
    for col in out.as_mut_slice().chunks_mut(dim) {
        apply_on_support(op, support, n, col);
    }
    out
}

/// Permutes qubits: qubit `order[j]` of the input becomes qubit `j` of the output.
pub fn permutation_indices(n: usize, order: &[usize]) -> Vec<usize> {
    // new index -> old index
    let dim = 1usize << n;
    (0..dim)
        .map(|new| {
            let mut old = 0usize;
            for (j, &src) in order.iter().enumerate() {
                if (new >> bit_position(n, j)) & 1 == 1 {
                    old |= 1 << bit_position(n, src);
                }
            }
            old
        })
        .collect()
}

pub fn hadamard() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[c64(h, 0.0), c64(h, 0.0), c64(h, 0.0), c64(-h, 0.0)])
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, c64(0.0, -1.0), c64(0.0, 1.0), ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn cnot() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

pub fn swap_gate() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 2)] = ONE;
    m[(2, 1)] = ONE;
    m[(3, 3)] = ONE;
    m
}

pub fn controlled_z() -> CMatrix {
    let mut m = CMatrix::identity(4, 4);
    m[(3, 3)] = -ONE;
    m
}

/// Row-major flattening used by the JSON formats.
pub fn to_row_major(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

pub fn from_row_major(dim: usize, entries: &[[f64; 2]]) -> Option<CMatrix> {
    if entries.len() != dim * dim {
        return None;
    }
    Some(CMatrix::from_fn(dim, dim, |i, j| {
        let [re, im] = entries[i * dim + j];
        c64(re, im)
    }))
}

/// `log2` of a power of two, `None` otherwise.
pub fn exact_log2(dim: usize) -> Option<usize> {
    (dim.is_power_of_two()).then(|| dim.trailing_zeros() as usize)
}
