//! Pointwise geometry of spacelike graphs in Minkowski space ℝ^{n,1}.
//!
//! For a graph `x ↦ (x, u(x))` with `|Du| < 1`:
//!
//! ```text
//! w = √(1 − |Du|²)              g_ij  = δ_ij − u_i u_j
//! w̃ = 1/w                       g^ij  = δ_ij + u_i u_j / w²
//! ν = (Du, 1)/w                 h_ij  = u_ij / w
//! γ^ik = δ_ik + u_i u_k / (w(1+w)),   its inverse γ_ij = δ_ij − u_i u_j / (1+w)
//! ```
//!
//! `γ_ij` is the symmetric square root of `g`, so the symmetric matrix
//! `a_ij = (1/w) γ^ik u_kl γ^lj` has the principal curvatures `κ` of the
//! graph as eigenvalues. The tensor `η = Hg − h` (with `H = σ_1(κ)`) has
//! eigenvalues `λ_i(κ) = Σ_{j≠i} κ_j` against `g`.

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, Mat};
use crate::symfun::{kappa_to_lambda, EigenTuple};

/// Second-order jet of a graph at one point: position, height, gradient,
/// symmetric Hessian.
#[derive(Debug, Clone)]
pub struct GraphJet {
    pub x: Vec<f64>,
    pub u: f64,
    pub du: Vec<f64>,
    pub d2u: Mat,
}

impl GraphJet {
    /// Validates dimensions, finiteness and Hessian symmetry
    /// (relative tolerance 1e-13); the stored Hessian is symmetrized.
    pub fn new(x: Vec<f64>, u: f64, du: Vec<f64>, d2u: Mat) -> Result<Self> {
        let n = x.len();
        if n < 2 {
            return Err(Error::Argument("graph jet needs dimension >= 2".into()));
        }
        if du.len() != n || d2u.dim() != n {
            return Err(Error::Argument("graph jet dimension mismatch".into()));
        }
        let finite = x.iter().chain(du.iter()).all(|v| v.is_finite())
            && u.is_finite()
            && d2u.max_abs().is_finite();
        if !finite {
            return Err(Error::Argument("graph jet has non-finite entries".into()));
        }
        if !d2u.is_symmetric(1e-13) {
            return Err(Error::Argument("graph jet Hessian is not symmetric".into()));
        }
        Ok(GraphJet { x, u, du, d2u: d2u.symmetrize() })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// Spacelike margin `1 − |Du|`; positive iff the jet is spacelike.
pub fn spacelike_margin(jet: &GraphJet) -> f64 {
    1.0 - jet.du.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Metric quantities of a spacelike jet.
#[derive(Debug, Clone)]
pub struct MetricData {
    pub w: f64,
    pub tilde_w: f64,
    pub g: Mat,
    pub g_inv: Mat,
    pub gamma_up: Mat,
    pub gamma_down: Mat,
    /// Upward unit timelike normal `(Du, 1)/w`, length n+1.
    pub nu: Vec<f64>,
}

/// Induced metric, its inverse, the square-root factors and the normal.
/// Fails on non-spacelike jets.
pub fn metric_pack(jet: &GraphJet) -> Result<MetricData> {
    let n = jet.dim();
    let p = &jet.du;
    let p2: f64 = p.iter().map(|v| v * v).sum();
    if p2 >= 1.0 {
        return Err(Error::NotSpacelike {
            margin: 1.0 - p2.sqrt(),
            context: format!("jet at x = {:?}", jet.x),
        });
    }
    let w = (1.0 - p2).sqrt();
    let g = Mat::from_fn(n, |i, j| (if i == j { 1.0 } else { 0.0 }) - p[i] * p[j]);
    let g_inv = Mat::from_fn(n, |i, j| {
        (if i == j { 1.0 } else { 0.0 }) + p[i] * p[j] / (w * w)
    });
    let gamma_up = Mat::from_fn(n, |i, j| {
        (if i == j { 1.0 } else { 0.0 }) + p[i] * p[j] / (w * (1.0 + w))
    });
    let gamma_down = Mat::from_fn(n, |i, j| {
        (if i == j { 1.0 } else { 0.0 }) - p[i] * p[j] / (1.0 + w)
    });
    let mut nu: Vec<f64> = p.iter().map(|v| v / w).collect();
    nu.push(1.0 / w);
    Ok(MetricData { w, tilde_w: 1.0 / w, g, g_inv, gamma_up, gamma_down, nu })
}

/// The symmetric curvature matrix `a = (1/w) γ D²u γ` whose eigenvalues are
/// the principal curvatures.
pub fn curvature_matrix(jet: &GraphJet) -> Result<Mat> {
    let m = metric_pack(jet)?;
    Ok(curvature_matrix_with(&m, jet))
}

pub(crate) fn curvature_matrix_with(m: &MetricData, jet: &GraphJet) -> Mat {
    m.gamma_up
        .mul(&jet.d2u)
        .mul(&m.gamma_up)
        .scale(m.tilde_w)
        .symmetrize()
}

/// Principal curvatures of the graph, ascending.
pub fn principal_curvatures(jet: &GraphJet) -> Result<EigenTuple> {
    let a = curvature_matrix(jet)?;
    let (vals, _) = jacobi_eigen(&a)?;
    EigenTuple::new(vals)
}

/// Eigenvalues of `η = Hg − h` against `g`, i.e. `λ_i = Σ_{j≠i} κ_j`.
pub fn eta_eigenvalues(jet: &GraphJet) -> Result<EigenTuple> {
    Ok(kappa_to_lambda(&principal_curvatures(jet)?))
}

/// Full curvature package at one jet.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub metric: MetricData,
    /// Curvature matrix `a = (1/w) γ D²u γ`.
    pub a: Mat,
    /// Principal curvatures, ascending.
    pub kappa: EigenTuple,
    /// η-eigenvalues `λ_i = Σ_{j≠i} κ_j`.
    pub lambda_eta: EigenTuple,
    /// Mean curvature `H = σ_1(κ)`.
    pub mean_curvature: f64,
}

pub fn curvature_data(jet: &GraphJet) -> Result<CurvatureData> {
    let metric = metric_pack(jet)?;
    let a = curvature_matrix_with(&metric, jet);
    let (vals, _) = jacobi_eigen(&a)?;
    let kappa = EigenTuple::new(vals)?;
    let lambda_eta = kappa_to_lambda(&kappa);
    let mean_curvature = kappa.values().iter().sum();
    Ok(CurvatureData { metric, a, kappa, lambda_eta, mean_curvature })
}

/// Mesh-quality diagnostic: discrepancy between the covariant Hessian of `u`
/// (Christoffel symbols of the induced metric by central differences of `g`)
/// and `w̃ h = D²u/w²`, evaluated from samples of `u` on a centered stencil
/// of spacing `h` at `x0`. Second-order small in `h` for smooth spacelike
/// graphs.
pub fn gauss_consistency<F: Fn(&[f64]) -> f64>(u: F, x0: &[f64], h: f64) -> Result<f64> {
    let n = x0.len();
    if n < 2 {
        return Err(Error::Argument("gauss_consistency needs dimension >= 2".into()));
    }
    if !(h > 0.0) {
        return Err(Error::Argument("stencil spacing must be positive".into()));
    }
    let shift = |x: &[f64], d: usize, s: f64| {
        let mut y = x.to_vec();
        y[d] += s;
        y
    };
    let grad_at = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|d| (u(&shift(x, d, h)) - u(&shift(x, d, -h))) / (2.0 * h))
            .collect()
    };
    let g_at = |x: &[f64]| -> Mat {
        let p = grad_at(x);
        Mat::from_fn(n, |i, j| (if i == j { 1.0 } else { 0.0 }) - p[i] * p[j])
    };

    let du = grad_at(x0);
    let p2: f64 = du.iter().map(|v| v * v).sum();
    if p2 >= 1.0 {
        return Err(Error::NotSpacelike {
            margin: 1.0 - p2.sqrt(),
            context: format!("stencil at x = {x0:?}"),
        });
    }
    let w2 = 1.0 - p2;
    let u0 = u(x0);
    let mut d2u = Mat::zeros(n);
    for i in 0..n {
        let upp = u(&shift(x0, i, h));
        let umm = u(&shift(x0, i, -h));
        d2u.set(i, i, (upp - 2.0 * u0 + umm) / (h * h));
        for j in (i + 1)..n {
            let pp = u(&shift(&shift(x0, i, h), j, h));
            let pm = u(&shift(&shift(x0, i, h), j, -h));
            let mp = u(&shift(&shift(x0, i, -h), j, h));
            let mm = u(&shift(&shift(x0, i, -h), j, -h));
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            d2u.set(i, j, v);
            d2u.set(j, i, v);
        }
    }
    // dg[k] = ∂_k g by central differences of the metric itself
    let mut dg: Vec<Mat> = Vec::with_capacity(n);
    for k in 0..n {
        let gp = g_at(&shift(x0, k, h));
        let gm = g_at(&shift(x0, k, -h));
        dg.push(gp.sub(&gm).scale(1.0 / (2.0 * h)));
    }
    let g_inv = Mat::from_fn(n, |i, j| (if i == j { 1.0 } else { 0.0 }) + du[i] * du[j] / w2);
    // Γ^m_ij = ½ g^{ml} (∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    let mut discrepancy = Mat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut cov = d2u.get(i, j);
            for m in 0..n {
                let mut gamma_mij = 0.0;
                for l in 0..n {
                    gamma_mij += 0.5
                        * g_inv.get(m, l)
                        * (dg[i].get(j, l) + dg[j].get(i, l) - dg[l].get(i, j));
                }
                cov -= gamma_mij * du[m];
            }
            discrepancy.set(i, j, cov - d2u.get(i, j) / w2);
        }
    }
    Ok(discrepancy.frobenius())
}

/// Analytic jet of the hyperboloid `u(x) = √(ρ² + |x|²) + c`; all principal
/// curvatures equal `1/ρ`.
pub fn hyperboloid_jet(rho: f64, x: &[f64], offset: f64) -> GraphJet {
    let n = x.len();
    let s = (rho * rho + x.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let du: Vec<f64> = x.iter().map(|v| v / s).collect();
    let d2u = Mat::from_fn(n, |i, j| {
        (if i == j { 1.0 / s } else { 0.0 }) - x[i] * x[j] / (s * s * s)
    });
    GraphJet::new(x.to_vec(), s + offset, du, d2u).expect("hyperboloid jet is always valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::solve_dense;

    fn jet(du: &[f64], d2u: Mat) -> GraphJet {
        let n = du.len();
        GraphJet::new(vec![0.0; n], 0.0, du.to_vec(), d2u).unwrap()
    }

    #[test]
    fn margin_examples() {
        let j = jet(&[0.0, 0.0], Mat::zeros(2));
        assert_eq!(spacelike_margin(&j), 1.0);
        let j = jet(&[1.0, 0.0], Mat::zeros(2));
        assert_eq!(spacelike_margin(&j), 0.0);
        assert!(metric_pack(&j).is_err());
    }

    #[test]
    fn metric_pack_example() {
        let j = jet(&[0.6, 0.0], Mat::zeros(2));
        let m = metric_pack(&j).unwrap();
        assert!((m.w - 0.8).abs() < 1e-15);
        assert!((m.g.get(0, 0) - 0.64).abs() < 1e-15);
        assert!((m.g.get(1, 1) - 1.0).abs() < 1e-15);
        assert!((m.g_inv.get(0, 0) - 1.5625).abs() < 1e-12);
        assert!((m.g_inv.get(1, 1) - 1.0).abs() < 1e-15);
        // normal has Minkowski norm -1: |Du|²/w² + ... - (1/w)² ... sign convention:
        // <nu, nu> = (sum du_i²  - 1) / w² = -1
        let sp: f64 = m.nu[..2].iter().map(|v| v * v).sum::<f64>() - m.nu[2] * m.nu[2];
        assert!((sp + 1.0).abs() < 1e-12);
    }

    #[test]
    fn metric_identities_random() {
        let du = [0.31, -0.42, 0.17];
        let j = jet(&du, Mat::zeros(3));
        let m = metric_pack(&j).unwrap();
        let id = Mat::identity(3);
        assert!(m.g.mul(&m.g_inv).sub(&id).frobenius() < 1e-10);
        assert!(m.gamma_down.mul(&m.gamma_down).sub(&m.g).frobenius() < 1e-12);
        assert!(m.gamma_up.mul(&m.gamma_down).sub(&id).frobenius() < 1e-12);
    }

    #[test]
    fn curvature_matrix_special_cases() {
        // du = 0: a = D²u
        let d2u = Mat::from_rows(&[&[1.0, 0.5], &[0.5, -2.0]]);
        let j = jet(&[0.0, 0.0], d2u.clone());
        assert!(curvature_matrix(&j).unwrap().sub(&d2u).frobenius() < 1e-15);
        // affine graph: zero curvature
        let j = jet(&[0.3, 0.4], Mat::zeros(2));
        assert!(curvature_matrix(&j).unwrap().frobenius() < 1e-15);
        let k = principal_curvatures(&j).unwrap();
        assert!(k.values().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn hyperboloid_unit_curvatures() {
        for rho in [0.5, 1.0, 2.0] {
            for x in [[0.1, -0.2, 0.05], [0.0, 0.0, 0.0], [0.3, 0.3, -0.3]] {
                let j = hyperboloid_jet(rho, &x, 0.0);
                let k = principal_curvatures(&j).unwrap();
                for &v in k.values() {
                    assert!((v - 1.0 / rho).abs() < 1e-10, "rho {rho}: kappa {v}");
                }
            }
        }
    }

    #[test]
    fn eta_eigenvalues_match_generalized_problem() {
        // independent oracle: solve det(eta - lambda g) = 0 via the
        // non-symmetric matrix g^{-1} (H g - h) assembled from first principles
        let du = [0.25, -0.35, 0.1];
        let d2u = Mat::from_rows(&[
            &[1.2, 0.3, -0.2],
            &[0.3, 0.7, 0.15],
            &[-0.2, 0.15, 1.9],
        ]);
        let j = jet(&du, d2u.clone());
        let m = metric_pack(&j).unwrap();
        let h = d2u.scale(m.tilde_w);
        let hmean = m.g_inv.mul(&h).trace();
        let eta = m.g.scale(hmean).sub(&h);
        // symmetrized similar problem: gamma_up eta gamma_up has the same
        // eigenvalues as g^{-1} eta
        let sym = m.gamma_up.mul(&eta).mul(&m.gamma_up).symmetrize();
        let (oracle, _) = jacobi_eigen(&sym).unwrap();
        let lam = eta_eigenvalues(&j).unwrap();
        let mut got = lam.values().to_vec();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in got.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        // consistency: H = trace(g^{-1} h)
        let cd = curvature_data(&j).unwrap();
        assert!((cd.mean_curvature - hmean).abs() < 1e-10);
    }

    #[test]
    fn rotation_invariance() {
        // u'(x') = u(Rᵀ x') transforms du -> R du, d2u -> R d2u Rᵀ
        let du = vec![0.2, -0.3, 0.25];
        let d2u = Mat::from_rows(&[
            &[0.8, -0.1, 0.3],
            &[-0.1, 1.4, 0.2],
            &[0.3, 0.2, -0.5],
        ]);
        let j = jet(&du, d2u.clone());
        let k0 = principal_curvatures(&j).unwrap();
        // rotation about two axes
        let (c, s) = (0.6f64, 0.8f64);
        let r1 = Mat::from_rows(&[&[c, -s, 0.0], &[s, c, 0.0], &[0.0, 0.0, 1.0]]);
        let (c2, s2) = ((0.5f64).sqrt(), (0.5f64).sqrt());
        let r2 = Mat::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, c2, -s2], &[0.0, s2, c2]]);
        let r = r1.mul(&r2);
        let du_r = r.mul_vec(&du);
        let d2u_r = r.mul(&d2u).mul(&r.transpose());
        let jr = GraphJet::new(vec![0.0; 3], 0.0, du_r, d2u_r.symmetrize()).unwrap();
        let k1 = principal_curvatures(&jr).unwrap();
        for (a, b) in k0.values().iter().zip(k1.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn tangent_vectors_orthogonal_to_normal() {
        // tangents e_i + u_i e_{n+1}; Minkowski product with nu must vanish
        let du = [0.4, 0.1];
        let j = jet(&du, Mat::zeros(2));
        let m = metric_pack(&j).unwrap();
        for i in 0..2 {
            let prod = m.nu[i] - du[i] * m.nu[2];
            assert!(prod.abs() < 1e-13);
        }
    }

    #[test]
    fn gauss_consistency_cases() {
        // affine graph: identically zero
        let d = gauss_consistency(|x| 0.2 * x[0] - 0.3 * x[1] + 0.7, &[0.4, -0.1], 0.01).unwrap();
        assert!(d < 1e-12, "affine discrepancy {d}");
        // quadratic with critical point at the stencil center
        let d =
            gauss_consistency(|x| 0.5 * (x[0] * x[0] - 0.4 * x[1] * x[1]), &[0.0, 0.0], 0.01)
                .unwrap();
        assert!(d < 1e-10, "critical-point discrepancy {d}");
        // hyperboloid: second-order convergence
        let hb = |x: &[f64]| (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let x0 = [0.3, 0.2];
        let d1 = gauss_consistency(hb, &x0, 0.02).unwrap();
        let d2 = gauss_consistency(hb, &x0, 0.01).unwrap();
        let order = (d1 / d2).log2();
        assert!(order >= 1.9, "observed order {order} (d1 = {d1}, d2 = {d2})");
    }

    #[test]
    fn non_spacelike_and_asymmetric_rejected() {
        let j = GraphJet::new(vec![0.0, 0.0], 0.0, vec![2.0, 0.0], Mat::zeros(2)).unwrap();
        assert!(matches!(metric_pack(&j), Err(Error::NotSpacelike { .. })));
        let mut bad = Mat::zeros(2);
        bad.set(0, 1, 1.0); // not symmetric
        assert!(GraphJet::new(vec![0.0, 0.0], 0.0, vec![0.0, 0.0], bad).is_err());
    }

    #[test]
    fn solve_dense_available_for_oracles() {
        // keep linalg's solver exercised from geometry-side tests too
        let a = Mat::from_rows(&[&[1.0, 0.2], &[0.2, 2.0]]);
        let x = solve_dense(&a, &[1.0, 1.0]).unwrap();
        assert!((a.mul_vec(&x)[0] - 1.0).abs() < 1e-13);
    }
}
