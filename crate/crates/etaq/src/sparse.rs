//! Sparse linear algebra for the Newton systems: CSR storage, ILU(0)
//! preconditioning, BiCGStab, and a banded LU direct fallback.
//!
//! Everything here is deterministic: fixed iteration order, no pivoting
//! randomness, no threading.

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct Csr {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl Csr {
    /// Builds from per-row `(col, value)` lists; entries are sorted and
    /// duplicates summed.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Csr> {
        if rows.len() != n {
            return Err(Error::Argument("row count mismatch".into()));
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|(c, _)| *c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if c >= n {
                    return Err(Error::Argument("column index out of range".into()));
                }
                if last == Some(c) {
                    *data.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    data.push(v);
                    last = Some(c);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Csr { n, indptr, indices, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.data[a..b])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut s = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                s += v * x[*c];
            }
            y[i] = s;
        }
        y
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    /// Largest |i − j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut bw = 0usize;
        for i in 0..self.n {
            let (cols, _) = self.row(i);
            for c in cols {
                bw = bw.max(i.abs_diff(*c));
            }
        }
        bw
    }
}

/// ILU(0) factors on the pattern of the input matrix.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: Csr,
    diag_pos: Vec<usize>,
}

/// Incomplete LU with zero fill-in. Requires a structurally nonzero diagonal.
pub fn ilu0(a: &Csr) -> Result<Ilu0> {
    let n = a.n;
    let mut lu = a.clone();
    let mut diag_pos = vec![usize::MAX; n];
    for i in 0..n {
        for p in lu.indptr[i]..lu.indptr[i + 1] {
            if lu.indices[p] == i {
                diag_pos[i] = p;
            }
        }
        if diag_pos[i] == usize::MAX {
            return Err(Error::Numeric(format!("ILU(0): missing diagonal in row {i}")));
        }
    }
    for i in 1..n {
        let (row_start, row_end) = (lu.indptr[i], lu.indptr[i + 1]);
        let mut p = row_start;
        while p < row_end && lu.indices[p] < i {
            let k = lu.indices[p];
            let pivot = lu.data[diag_pos[k]];
            if pivot == 0.0 {
                return Err(Error::Numeric(format!("ILU(0): zero pivot at row {k}")));
            }
            let factor = lu.data[p] / pivot;
            lu.data[p] = factor;
            // subtract factor * (row k, columns > k) from row i on the pattern
            let (kcols_all, _) = (lu.indptr[k], lu.indptr[k + 1]);
            let mut kp = diag_pos[k] + 1;
            let mut ip = p + 1;
            let _ = kcols_all;
            while kp < lu.indptr[k + 1] && ip < row_end {
                let ck = lu.indices[kp];
                let ci = lu.indices[ip];
                if ck == ci {
                    lu.data[ip] -= factor * lu.data[kp];
                    kp += 1;
                    ip += 1;
                } else if ck < ci {
                    kp += 1;
                } else {
                    ip += 1;
                }
            }
            p += 1;
        }
    }
    for i in 0..n {
        if lu.data[diag_pos[i]] == 0.0 {
            return Err(Error::Numeric(format!("ILU(0): zero pivot at row {i}")));
        }
    }
    Ok(Ilu0 { lu, diag_pos })
}

impl Ilu0 {
    /// Applies `(LU)^{-1}` to `rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.lu.n;
        let mut y = rhs.to_vec();
        // forward: L has unit diagonal
        for i in 0..n {
            let mut s = y[i];
            for p in self.lu.indptr[i]..self.diag_pos[i] {
                s -= self.lu.data[p] * y[self.lu.indices[p]];
            }
            y[i] = s;
        }
        // backward
        for i in (0..n).rev() {
            let mut s = y[i];
            for p in (self.diag_pos[i] + 1)..self.lu.indptr[i + 1] {
                s -= self.lu.data[p] * y[self.lu.indices[p]];
            }
            y[i] = s / self.lu.data[self.diag_pos[i]];
        }
        y
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Right-preconditioned BiCGStab. Converges when the true residual satisfies
/// `‖b − Ax‖₂ ≤ tol·‖b‖₂`. Breakdown or iteration exhaustion is an error so
/// callers can fall back to a direct method.
pub fn bicgstab(a: &Csr, b: &[f64], tol: f64, max_iter: usize, pre: Option<&Ilu0>) -> Result<Vec<f64>> {
    let n = a.n;
    if b.len() != n {
        return Err(Error::Argument("rhs length mismatch".into()));
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let apply_pre = |v: &[f64]| -> Vec<f64> {
        match pre {
            Some(m) => m.solve(v),
            None => v.to_vec(),
        }
    };
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let mut rho = 1.0f64;
    let mut alpha = 1.0f64;
    let mut omega = 1.0f64;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let eps = 1e-300;
    for _ in 0..max_iter {
        let rho1 = dot(&r_hat, &r);
        if rho1.abs() < eps {
            return Err(Error::Numeric("BiCGStab breakdown (rho)".into()));
        }
        let beta = (rho1 / rho) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let p_hat = apply_pre(&p);
        v = a.matvec(&p_hat);
        let rv = dot(&r_hat, &v);
        if rv.abs() < eps {
            return Err(Error::Numeric("BiCGStab breakdown (r_hat, v)".into()));
        }
        alpha = rho1 / rv;
        let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        if norm2(&s) <= tol * bnorm {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            let true_res = {
                let ax = a.matvec(&x);
                let rr: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
                norm2(&rr)
            };
            if true_res <= tol * bnorm {
                return Ok(x);
            }
            r = s;
            rho = rho1;
            continue;
        }
        let s_hat = apply_pre(&s);
        let t = a.matvec(&s_hat);
        let tt = dot(&t, &t);
        if tt < eps {
            return Err(Error::Numeric("BiCGStab breakdown (t, t)".into()));
        }
        omega = dot(&t, &s) / tt;
        if omega.abs() < eps {
            return Err(Error::Numeric("BiCGStab breakdown (omega)".into()));
        }
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
        }
        r = s.iter().zip(&t).map(|(si, ti)| si - omega * ti).collect();
        rho = rho1;
        if norm2(&r) <= tol * bnorm {
            let ax = a.matvec(&x);
            let rr: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            if norm2(&rr) <= tol * bnorm {
                return Ok(x);
            }
        }
    }
    Err(Error::Numeric(format!(
        "BiCGStab did not converge in {max_iter} iterations (‖r‖/‖b‖ = {:.3e})",
        norm2(&r) / bnorm
    )))
}

/// Banded LU with partial pivoting (band storage, LAPACK layout). Solves
/// `A x = b` for a matrix whose entries satisfy `|i − j| ≤ bw`.
pub fn banded_solve(a: &Csr, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n;
    if b.len() != n {
        return Err(Error::Argument("rhs length mismatch".into()));
    }
    let kl = a.bandwidth();
    let ku = kl;
    let kv = kl + ku;
    let ldab = 2 * kl + ku + 1;
    // ab[r][j] holds A(i, j) with r = kv + i - j; top kl rows are fill space
    let mut ab = vec![vec![0.0f64; n]; ldab];
    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (c, v) in cols.iter().zip(vals) {
            ab[kv + i - c][*c] = *v;
        }
    }
    let mut ipiv = vec![0usize; n];
    let mut ju = 0usize;
    for j in 0..n {
        let km = kl.min(n - 1 - j);
        // pivot search in column j among rows j..=j+km
        let mut jp = 0usize;
        let mut best = ab[kv][j].abs();
        for p in 1..=km {
            let v = ab[kv + p][j].abs();
            if v > best {
                best = v;
                jp = p;
            }
        }
        ipiv[j] = j + jp;
        if ab[kv + jp][j] == 0.0 {
            return Err(Error::Numeric(format!("banded LU: singular at column {j}")));
        }
        ju = ju.max((j + ku + jp).min(n - 1));
        if jp != 0 {
            for jj in j..=ju {
                let r1 = kv + (j + jp) - jj;
                let r2 = kv + j - jj;
                let tmp = ab[r1][jj];
                ab[r1][jj] = ab[r2][jj];
                ab[r2][jj] = tmp;
            }
        }
        if km > 0 {
            let pivot = ab[kv][j];
            for p in 1..=km {
                ab[kv + p][j] /= pivot;
            }
            for jj in (j + 1)..=ju {
                let up = ab[kv + j - jj][jj];
                if up != 0.0 {
                    for p in 1..=km {
                        ab[kv + p + j - jj][jj] -= ab[kv + p][j] * up;
                    }
                }
            }
        }
    }
    // forward substitution with row interchanges
    let mut x = b.to_vec();
    for j in 0..n {
        let ip = ipiv[j];
        if ip != j {
            x.swap(ip, j);
        }
        let km = kl.min(n - 1 - j);
        for p in 1..=km {
            x[j + p] -= ab[kv + p][j] * x[j];
        }
    }
    // back substitution
    for j in (0..n).rev() {
        x[j] /= ab[kv][j];
        let lo = j.saturating_sub(kv);
        for i in lo..j {
            x[i] -= ab[kv + i - j][j] * x[j];
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{solve_dense, Mat};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn to_dense(a: &Csr) -> Mat {
        Mat::from_fn(a.n(), |i, j| a.get(i, j))
    }

    fn laplacian_1d(n: usize) -> Csr {
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = vec![(i, 2.0)];
            if i > 0 {
                row.push((i - 1, -1.0));
            }
            if i + 1 < n {
                row.push((i + 1, -1.0));
            }
            rows.push(row);
        }
        Csr::from_rows(n, rows).unwrap()
    }

    fn random_dd(n: usize, fill: usize, rng: &mut ChaCha8Rng) -> Csr {
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = vec![];
            let mut offdiag = 0.0;
            for _ in 0..fill {
                let j = rng.gen_range(0..n);
                if j != i {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    offdiag += v.abs();
                    row.push((j, v));
                }
            }
            row.push((i, offdiag + rng.gen_range(0.5..1.5)));
            rows.push(row);
        }
        Csr::from_rows(n, rows).unwrap()
    }

    #[test]
    fn csr_matvec_and_dedup() {
        let a = Csr::from_rows(2, vec![vec![(1, 2.0), (0, 1.0), (1, 3.0)], vec![(0, -1.0)]])
            .unwrap();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(0, 1), 5.0);
        let y = a.matvec(&[1.0, 1.0]);
        assert_eq!(y, vec![6.0, -1.0]);
        assert_eq!(a.bandwidth(), 1);
    }

    #[test]
    fn ilu_exact_on_its_pattern_for_tridiagonal() {
        // ILU(0) of a tridiagonal matrix is the exact LU factorization
        let a = laplacian_1d(20);
        let m = ilu0(&a).unwrap();
        let rhs: Vec<f64> = (0..20).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = m.solve(&rhs);
        let r = a.matvec(&x);
        for (ri, bi) in r.iter().zip(&rhs) {
            assert!((ri - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn bicgstab_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = random_dd(40, 10, &mut rng);
        let b: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let pre = ilu0(&a).unwrap();
        let x = bicgstab(&a, &b, 1e-12, 500, Some(&pre)).unwrap();
        let dense = to_dense(&a);
        let x_ref = solve_dense(&dense, &b).unwrap();
        for (xi, ri) in x.iter().zip(&x_ref) {
            assert!((xi - ri).abs() < 1e-8, "{xi} vs {ri}");
        }
    }

    #[test]
    fn bicgstab_residual_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for trial in 0..5 {
            let a = random_dd(60, 6, &mut rng);
            let b: Vec<f64> = (0..60).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let pre = ilu0(&a).unwrap();
            let x = bicgstab(&a, &b, 1e-10, 500, Some(&pre)).unwrap();
            let r = a.matvec(&x);
            let rn: f64 = r
                .iter()
                .zip(&b)
                .map(|(ri, bi)| (ri - bi) * (ri - bi))
                .sum::<f64>()
                .sqrt();
            let bn: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(rn <= 1e-10 * bn, "trial {trial}: {rn} vs {bn}");
        }
    }

    #[test]
    fn bicgstab_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = random_dd(50, 8, &mut rng);
        let b: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let pre = ilu0(&a).unwrap();
        let x1 = bicgstab(&a, &b, 1e-11, 500, Some(&pre)).unwrap();
        let x2 = bicgstab(&a, &b, 1e-11, 500, Some(&pre)).unwrap();
        assert_eq!(x1, x2, "bitwise identical solves");
    }

    #[test]
    fn banded_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let n = 50;
        let bw = 3usize;
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = vec![];
            for j in i.saturating_sub(bw)..(i + bw + 1).min(n) {
                row.push((j, rng.gen_range(-1.0..1.0)));
            }
            rows.push(row);
        }
        let a = Csr::from_rows(n, rows).unwrap();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = banded_solve(&a, &b).unwrap();
        let x_ref = solve_dense(&to_dense(&a), &b).unwrap();
        for (xi, ri) in x.iter().zip(&x_ref) {
            assert!((xi - ri).abs() < 1e-9 * (1.0 + ri.abs()), "{xi} vs {ri}");
        }
    }

    #[test]
    fn banded_pivots_through_zero_diagonal() {
        // [[0, 1], [1, 0]] needs an interchange
        let a = Csr::from_rows(2, vec![vec![(0, 0.0), (1, 1.0)], vec![(0, 1.0), (1, 0.0)]])
            .unwrap();
        let x = banded_solve(&a, &[3.0, 4.0]).unwrap();
        assert_eq!(x, vec![4.0, 3.0]);
    }

    #[test]
    fn banded_identity_and_singular() {
        let id = Csr::from_rows(3, vec![vec![(0, 1.0)], vec![(1, 1.0)], vec![(2, 1.0)]]).unwrap();
        assert_eq!(banded_solve(&id, &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let sing =
            Csr::from_rows(2, vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 1.0), (1, 1.0)]]).unwrap();
        assert!(banded_solve(&sing, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn ilu_rejects_missing_diagonal() {
        let a = Csr::from_rows(2, vec![vec![(1, 1.0)], vec![(0, 1.0), (1, 1.0)]]).unwrap();
        assert!(ilu0(&a).is_err());
    }
}
