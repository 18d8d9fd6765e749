//! Symmetric tridiagonal eigenpairs: Sturm-count bisection for eigenvalues,
//! inverse iteration for eigenvectors.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// `off[i]` couples entries `i` and `i + 1`.
    pub off: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Unit Euclidean norm.
    pub vector: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Precondition("tridiagonal shape mismatch".into()));
        }
        if diag.iter().chain(&off).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { r: f64::NAN });
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Dense copy, row-major.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diag[i];
            if i + 1 < n {
                m[i][i + 1] = self.off[i];
                m[i + 1][i] = self.off[i];
            }
        }
        m
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
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

    pub fn rayleigh(&self, x: &[f64]) -> f64 {
        let y = self.apply(x);
        dot(x, &y) / dot(x, x)
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut d = self.diag[0] - x;
        for i in 0..self.len() {
            if i > 0 {
                d = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / d;
            }
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `j`-th largest eigenvalue (`j = 0` is the top).
    pub fn eigenvalue_from_top(&self, j: usize) -> f64 {
        let n = self.len();
        let (mut lo, mut hi) = self.gershgorin();
        let pad = 1e-12 * (hi - lo).max(1.0);
        lo -= pad;
        hi += pad;
        // invariant: more than j eigenvalues ≥ lo, at most j eigenvalues ≥ hi.
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if n - self.count_below(mid) > j {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(T − σ I) x = b` by Gaussian elimination with partial pivoting.
    fn shifted_solve(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        let n = self.len();
        if n == 1 {
            let d = self.diag[0] - sigma;
            return vec![b[0] / if d == 0.0 { f64::EPSILON } else { d }];
        }
        let eps_scale = f64::EPSILON
            * self
                .gershgorin()
                .1
                .abs()
                .max(self.gershgorin().0.abs())
                .max(1.0);
        // rows: (l, d, u, u2) after pivoting
        let mut d: Vec<f64> = self.diag.iter().map(|a| a - sigma).collect();
        let mut du: Vec<f64> = self.off.clone();
        let mut dl: Vec<f64> = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut ipiv = vec![false; n - 1];
        let mut x = b.to_vec();
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                let f = if d[i] == 0.0 { 0.0 } else { dl[i] / d[i] };
                dl[i] = f;
                d[i + 1] -= f * du[i];
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - f * d[i + 1];
                if i + 1 < n - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -f;
                }
                ipiv[i] = true;
            }
        }
        for di in d.iter_mut() {
            if di.abs() < eps_scale {
                *di = if *di < 0.0 { -eps_scale } else { eps_scale };
            }
        }
        // forward: apply L⁻¹ with row interchanges
        for i in 0..n - 1 {
            if ipiv[i] {
                x.swap(i, i + 1);
                let t = x[i];
                x[i + 1] -= dl[i] * t;
            } else {
                x[i + 1] -= dl[i] * x[i];
            }
        }
        // back substitution with U (d, du, du2)
        x[n - 1] /= d[n - 1];
        if n >= 2 {
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
        }
        x
    }

    /// Eigenvector for an accurate eigenvalue, orthogonalised against `previous`.
    pub fn eigenvector(&self, value: f64, previous: &[&[f64]]) -> Vec<f64> {
        let n = self.len();
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64) * 0.7).sin())
            .collect();
        normalize(&mut x);
        for _ in 0..4 {
            x = self.shifted_solve(value, &x);
            for p in previous {
                let c = dot(&x, p);
                for (xi, pi) in x.iter_mut().zip(p.iter()) {
                    *xi -= c * pi;
                }
            }
            normalize(&mut x);
        }
        x
    }

    /// The `k` largest eigenpairs, in descending order.
    pub fn top_eigenpairs(&self, k: usize) -> Vec<EigenPair> {
        let k = k.min(self.len());
        let mut pairs: Vec<EigenPair> = Vec::with_capacity(k);
        for j in 0..k {
            let value = self.eigenvalue_from_top(j);
            let prev: Vec<&[f64]> = pairs.iter().map(|p| p.vector.as_slice()).collect();
            let vector = self.eigenvector(value, &prev);
            pairs.push(EigenPair { value, vector });
        }
        pairs
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) {
    let n = dot(x, x).sqrt();
    if n > 0.0 && n.is_finite() {
        for v in x.iter_mut() {
            *v /= n;
        }
    }
}
