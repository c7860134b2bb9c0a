//! Real symmetric tridiagonal eigenproblems by Sturm bisection and inverse iteration.
//!
//! Used for Lanczos projections and for clock Hamiltonians, whose legal block reduces to
//! path-graph Laplacians with thousands of sites.

/// Symmetric tridiagonal matrix with diagonal `diag` and sub/super-diagonal `off`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(!diag.is_empty(), "empty tridiagonal matrix");
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length must be n - 1");
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Gershgorin interval containing the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0f64;
        for i in 0..self.len() {
            let b2 = if i > 0 { self.off[i - 1] * self.off[i - 1] } else { 0.0 };
            q = self.diag[i] - x - if i > 0 { b2 / q } else { 0.0 };
            if q == 0.0 {
                q = -f64::EPSILON * (1.0 + x.abs());
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based), to absolute accuracy ~1e-15 of the spectral range.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.len());
        let (mut lo, mut hi) = self.bounds();
        let scale = (hi - lo).abs().max(1.0);
        lo -= 1e-12 * scale;
        hi += 1e-12 * scale;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// All eigenvalues ascending. Quadratic; meant for small matrices.
    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.eigenvalue(k)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Unit eigenvector for an (accurate) eigenvalue by inverse iteration, sign fixed so the
    /// largest-magnitude component is positive. Assumes a simple eigenvalue.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        if n == 1 {
            return vec![1.0];
        }
        let (lo, hi) = self.bounds();
        let shift = lambda + 1e-10 * (hi - lo).abs().max(1.0);
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * ((i * 7919) % 13) as f64).collect();
        normalize(&mut x);
        for _ in 0..6 {
            x = self.solve_shifted(shift, &x);
            normalize(&mut x);
        }
        let pivot = x.iter().cloned().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
        if pivot < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        x
    }

    /// Solves `(M - shift) y = b` by Gaussian elimination with partial pivoting (banded).
    fn solve_shifted(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let n = self.len();
        // rows hold up to three nonzeros after pivoting: (main, upper1, upper2)
        let mut main: Vec<f64> = self.diag.iter().map(|d| d - shift).collect();
        let mut up1: Vec<f64> = (0..n).map(|i| if i + 1 < n { self.off[i] } else { 0.0 }).collect();
        let mut up2 = vec![0.0; n];
        let mut low: Vec<f64> = (0..n).map(|i| if i + 1 < n { self.off[i] } else { 0.0 }).collect();
        let mut rhs = b.to_vec();
        let tiny = f64::EPSILON * self.bounds().1.abs().max(1.0);
        for i in 0..n - 1 {
            // candidate rows i (main[i], up1[i], up2[i]) and i+1 (low[i], main[i+1], up1[i+1])
            if low[i].abs() > main[i].abs() {
                let (a0, a1, a2, ar) = (main[i], up1[i], up2[i], rhs[i]);
                main[i] = low[i];
                up1[i] = main[i + 1];
                up2[i] = up1[i + 1];
                rhs[i] = rhs[i + 1];
                low[i] = a0;
                main[i + 1] = a1;
                up1[i + 1] = a2;
                rhs[i + 1] = ar;
            }
            if main[i].abs() < tiny {
                main[i] = tiny;
            }
            let f = low[i] / main[i];
            main[i + 1] -= f * up1[i];
            up1[i + 1] -= f * up2[i];
            rhs[i + 1] -= f * rhs[i];
        }
        if main[n - 1].abs() < tiny {
            main[n - 1] = tiny;
        }
        let mut y = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = rhs[i];
            if i + 1 < n {
                v -= up1[i] * y[i + 1];
            }
            if i + 2 < n {
                v -= up2[i] * y[i + 2];
            }
            y[i] = v / main[i];
        }
        y
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
}
