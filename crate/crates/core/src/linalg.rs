//! Small dense/tridiagonal linear-algebra kernels that ndarray does not ship.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows i and i+1.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1));
        SymTridiagonal { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
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

    fn pivmin(&self) -> f64 {
        let emax = self.off.iter().fold(1.0f64, |m, e| m.max(e * e));
        f64::MIN_POSITIVE * emax
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k` smallest eigenvalues in ascending order, by bisection.
    pub fn lowest_eigenvalues(&self, k: usize) -> Result<Vec<f64>> {
        let n = self.len();
        if k > n {
            return Err(Error::InvalidArgument(format!(
                "requested {k} eigenvalues of a {n}x{n} matrix"
            )));
        }
        let (glo, ghi) = self.gershgorin();
        let span = (ghi - glo).abs().max(f64::MIN_POSITIVE);
        let glo = glo - 1e-12 * span - self.pivmin();
        let ghi = ghi + 1e-12 * span + self.pivmin();
        let mut values = Vec::with_capacity(k);
        let mut lower = glo;
        for index in 0..k {
            // Find x with count_below(x) <= index < count_below(y).
            let mut lo = lower;
            let mut hi = ghi;
            let mut converged = false;
            for _ in 0..256 {
                let mid = 0.5 * (lo + hi);
                let tol = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + self.pivmin();
                if hi - lo <= tol || mid <= lo || mid >= hi {
                    converged = true;
                    break;
                }
                if self.count_below(mid) > index {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if !converged {
                return Err(Error::NonConvergent(format!("bisection for eigenvalue {index}")));
            }
            let value = 0.5 * (lo + hi);
            values.push(value);
            lower = lo;
        }
        Ok(values)
    }

    /// Solves (T − shift·I) y = rhs in place by Gaussian elimination with
    /// partial pivoting. Exactly singular pivots are nudged to a tiny value,
    /// which is the desired behaviour for inverse iteration.
    fn solve_shifted(&self, shift: f64, rhs: &mut [f64]) {
        let n = self.len();
        let tiny = f64::EPSILON * self.gershgorin().1.abs().max(1.0);
        if n == 1 {
            let d = self.diag[0] - shift;
            rhs[0] /= if d.abs() < tiny { tiny } else { d };
            return;
        }
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - shift).collect();
        let mut dl = self.off.clone();
        let mut du = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n - 1];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i].abs() < tiny {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if d[n - 1].abs() < tiny {
            d[n - 1] = tiny;
        }
        for i in 0..n - 1 {
            if swapped[i] {
                let temp = rhs[i];
                rhs[i] = rhs[i + 1];
                rhs[i + 1] = temp - dl[i] * rhs[i];
            } else {
                rhs[i + 1] -= dl[i] * rhs[i];
            }
        }
        rhs[n - 1] /= d[n - 1];
        rhs[n - 2] = (rhs[n - 2] - du[n - 2] * rhs[n - 1]) / d[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            rhs[i] = (rhs[i] - du[i] * rhs[i + 1] - du2[i] * rhs[i + 2]) / d[i];
        }
    }

    /// The `k` lowest eigenpairs. Eigenvectors have unit Euclidean norm and are
    /// returned as columns of an (n × k) matrix.
    pub fn lowest_eigenpairs(&self, k: usize) -> Result<(Vec<f64>, Array2<f64>)> {
        let values = self.lowest_eigenvalues(k)?;
        let n = self.len();
        let (glo, ghi) = self.gershgorin();
        let norm = glo.abs().max(ghi.abs());
        let cluster = 1e-5 * norm;
        // Growth this large means the residual is at rounding level, even when
        // the iterate still wanders inside an unresolved cluster.
        let accept_growth = 1.0 / ((n as f64).sqrt() * f64::EPSILON * norm.max(f64::MIN_POSITIVE));
        let mut vectors = Array2::<f64>::zeros((n, k));
        let mut found: Vec<Vec<f64>> = Vec::with_capacity(k);
        for (index, &lambda) in values.iter().enumerate() {
            let neighbours: Vec<usize> =
                (0..index).rev().take_while(|&j| (lambda - values[j]).abs() < cluster).collect();
            let mut v: Vec<f64> =
                (0..n).map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_75).sin()).collect();
            normalize(&mut v);
            let mut converged = false;
            for _ in 0..8 {
                let before = v.clone();
                self.solve_shifted(lambda, &mut v);
                for &j in &neighbours {
                    let overlap: f64 = v.iter().zip(&found[j]).map(|(a, b)| a * b).sum();
                    for (a, b) in v.iter_mut().zip(&found[j]) {
                        *a -= overlap * b;
                    }
                }
                let growth = normalize(&mut v);
                if !growth.is_finite() || growth == 0.0 {
                    return Err(Error::NonConvergent(format!("inverse iteration for state {index}")));
                }
                let dot: f64 = v.iter().zip(&before).map(|(a, b)| a * b).sum();
                if (1.0 - dot.abs()) < 1e-12 || growth >= accept_growth {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NonConvergent(format!("inverse iteration for state {index}")));
            }
            for (i, &x) in v.iter().enumerate() {
                vectors[[i, index]] = x;
            }
            found.push(v);
        }
        Ok((values, vectors))
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 && norm.is_finite() {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// Whether the Hermitian matrix `m` has smallest eigenvalue ≥ −`tol`, decided
/// by attempting a Cholesky factorization of m + tol·I.
pub fn is_psd_within(m: &Array2<Complex64>, tol: f64) -> bool {
    let n = m.nrows();
    let mut l = Array2::<Complex64>::zeros((n, n));
    for j in 0..n {
        let mut diag = m[[j, j]].re + tol;
        for k in 0..j {
            diag -= l[[j, k]].norm_sqr();
        }
        if !(diag > 0.0) {
            return false;
        }
        let ljj = diag.sqrt();
        l[[j, j]] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = m[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]].conj();
            }
            l[[i, j]] = s / ljj;
        }
    }
    true
}
