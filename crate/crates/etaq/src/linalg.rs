//! Small dense matrices (n ≤ 8) and a deterministic cyclic Jacobi
//! eigensolver for the symmetric eigenproblems in this crate.

use crate::error::{Error, Result};

/// Dense square matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    n: usize,
    a: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Mat { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must form a square matrix");
        Mat::from_fn(n, |i, j| rows[i][j])
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Mat::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] += v;
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.add_to(i, j, aik * other.get(k, j));
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat { n: self.n, a: self.a.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!(self.n, other.n);
        Mat {
            n: self.n,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!(self.n, other.n);
        Mat {
            n: self.n,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.a.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Frobenius norm of the strictly off-diagonal part.
    pub fn offdiag_frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self.get(i, j) * self.get(i, j);
                }
            }
        }
        s.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        let scale = self.max_abs().max(1e-300);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if (self.get(i, j) - self.get(j, i)).abs() > rel_tol * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn symmetrize(&self) -> Mat {
        Mat::from_fn(self.n, |i, j| 0.5 * (self.get(i, j) + self.get(j, i)))
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Mat> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let mut piv = col;
            for r in (col + 1)..n {
                if a.get(r, col).abs() > a.get(piv, col).abs() {
                    piv = r;
                }
            }
            let pval = a.get(piv, col);
            if pval.abs() < 1e-300 {
                return Err(Error::Numeric(format!(
                    "singular matrix in inverse at column {col}"
                )));
            }
            if piv != col {
                for j in 0..n {
                    let (x, y) = (a.get(col, j), a.get(piv, j));
                    a.set(col, j, y);
                    a.set(piv, j, x);
                    let (x, y) = (inv.get(col, j), inv.get(piv, j));
                    inv.set(col, j, y);
                    inv.set(piv, j, x);
                }
            }
            let d = 1.0 / a.get(col, col);
            for j in 0..n {
                a.set(col, j, a.get(col, j) * d);
                inv.set(col, j, inv.get(col, j) * d);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col);
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a.add_to(r, j, -f * a.get(col, j));
                    inv.add_to(r, j, -f * inv.get(col, j));
                }
            }
        }
        Ok(inv)
    }
}

/// Solve a small dense system `A x = b` by LU with partial pivoting.
///
/// Used as a direct-solve oracle for the sparse solver and as a helper
/// for tiny Newton systems (domain projections).
pub fn solve_dense(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    let mut lu = a.clone();
    let mut x: Vec<f64> = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if lu.get(r, col).abs() > lu.get(piv, col).abs() {
                piv = r;
            }
        }
        if lu.get(piv, col).abs() < 1e-300 {
            return Err(Error::Numeric("singular matrix in solve_dense".into()));
        }
        if piv != col {
            for j in 0..n {
                let (u, v) = (lu.get(col, j), lu.get(piv, j));
                lu.set(col, j, v);
                lu.set(piv, j, u);
            }
            perm.swap(col, piv);
            x.swap(col, piv);
        }
        for r in (col + 1)..n {
            let f = lu.get(r, col) / lu.get(col, col);
            lu.set(r, col, f);
            for j in (col + 1)..n {
                lu.add_to(r, j, -f * lu.get(col, j));
            }
            x[r] -= f * x[col];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in (i + 1)..n {
            s -= lu.get(i, j) * x[j];
        }
        x[i] = s / lu.get(i, i);
    }
    Ok(x)
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps row pairs in a fixed order until the off-diagonal Frobenius norm
/// drops below `1e-13 * ||A||_F`, so results are reproducible bit-for-bit
/// across runs. Returns eigenvalues in ascending order and the orthogonal
/// matrix `B` with `A = B diag(w) Bᵀ` (eigenvectors in columns).
pub fn jacobi_eigen(a: &Mat) -> Result<(Vec<f64>, Mat)> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::Argument("jacobi_eigen on empty matrix".into()));
    }
    let norm = a.frobenius();
    if !norm.is_finite() {
        return Err(Error::Numeric("jacobi_eigen: non-finite input".into()));
    }
    let mut m = a.symmetrize();
    let mut v = Mat::identity(n);
    if n == 1 {
        return Ok((vec![m.get(0, 0)], v));
    }
    let tol = 1e-13 * norm.max(1e-300);
    const MAX_SWEEPS: usize = 64;
    let mut converged = norm == 0.0;
    for _ in 0..MAX_SWEEPS {
        if m.offdiag_frobenius() < tol {
            converged = true;
            break;
        }
        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Rotate rows/columns p and q of m.
                for i in 0..n {
                    let mip = m.get(i, p);
                    let miq = m.get(i, q);
                    m.set(i, p, c * mip - s * miq);
                    m.set(i, q, s * mip + c * miq);
                }
                for j in 0..n {
                    let mpj = m.get(p, j);
                    let mqj = m.get(q, j);
                    m.set(p, j, c * mpj - s * mqj);
                    m.set(q, j, s * mpj + c * mqj);
                }
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - s * viq);
                    v.set(i, q, s * vip + c * viq);
                }
            }
        }
    }
    if !converged && m.offdiag_frobenius() >= tol {
        return Err(Error::Numeric(
            "jacobi_eigen did not converge within 64 sweeps".into(),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).partial_cmp(&m.get(j, j)).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| m.get(i, i)).collect();
    let vecs = Mat::from_fn(n, |i, j| v.get(i, order[j]));
    Ok((vals, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_eigen() {
        let (vals, b) = jacobi_eigen(&Mat::identity(3)).unwrap();
        assert_eq!(vals, vec![1.0, 1.0, 1.0]);
        assert_eq!(b, Mat::identity(3));
    }

    #[test]
    fn eigen_recomposition_and_backward_error() {
        // fixed symmetric matrix with known character
        let a = Mat::from_rows(&[
            &[2.0, -1.0, 0.3, 0.0],
            &[-1.0, 1.5, 0.2, -0.4],
            &[0.3, 0.2, -0.7, 0.1],
            &[0.0, -0.4, 0.1, 3.2],
        ]);
        let (vals, b) = jacobi_eigen(&a).unwrap();
        for w in vals.windows(2) {
            assert!(w[0] <= w[1], "eigenvalues must be ascending");
        }
        // backward error per pair: ||A v - w v|| <= 1e-10 ||A||
        let norm = a.frobenius();
        for j in 0..4 {
            let v: Vec<f64> = (0..4).map(|i| b.get(i, j)).collect();
            let av = a.mul_vec(&v);
            let err: f64 = av
                .iter()
                .zip(&v)
                .map(|(x, y)| (x - vals[j] * y).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(err <= 1e-10 * norm, "backward error {err}");
        }
        // B diag Bᵀ reproduces A
        let d = Mat::diag(&vals);
        let rec = b.mul(&d).mul(&b.transpose());
        assert!(rec.sub(&a).frobenius() <= 1e-12 * norm.max(1.0));
    }

    #[test]
    fn eigen_deterministic() {
        let a = Mat::from_rows(&[&[1.0, 0.5, -0.25], &[0.5, -2.0, 0.125], &[-0.25, 0.125, 0.75]]);
        let (v1, b1) = jacobi_eigen(&a).unwrap();
        let (v2, b2) = jacobi_eigen(&a).unwrap();
        assert_eq!(v1, v2);
        assert_eq!(b1, b2);
    }

    #[test]
    fn inverse_roundtrip() {
        let a = Mat::from_rows(&[&[4.0, 1.0, 0.0], &[1.0, 3.0, -1.0], &[0.0, -1.0, 2.0]]);
        let inv = a.inverse().unwrap();
        let prod = a.mul(&inv);
        assert!(prod.sub(&Mat::identity(3)).frobenius() < 1e-12);
    }

    #[test]
    fn dense_solve_matches_inverse() {
        let a = Mat::from_rows(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let x = solve_dense(&a, &[5.0, 10.0]).unwrap();
        let y = a.inverse().unwrap().mul_vec(&[5.0, 10.0]);
        assert!((x[0] - y[0]).abs() < 1e-12 && (x[1] - y[1]).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = Mat::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(a.inverse().is_err());
        assert!(solve_dense(&a, &[1.0, 1.0]).is_err());
    }
}
