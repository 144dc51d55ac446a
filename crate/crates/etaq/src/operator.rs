//! The curvature operator `G(D²u, Du) = f(λ(A[u]))` with `f = σ_k/σ_l`,
//! together with its exact linearization coefficients.
//!
//! With `A = (1/w) γ D²u γ` and `F^{ij} = ∂f/∂a_{ij} = Σ_s b_{is} f_s b_{js}`
//! (where `A = B diag(κ) Bᵀ` and `f_s = ∂f/∂κ_s`):
//!
//! ```text
//! G^{ij} = ∂G/∂u_{ij} = (1/w) Σ_{s,t} γ^{is} F^{st} γ^{tj}
//! G^s    = ∂G/∂u_s    = (u_s/w²) Σ_i f_i κ_i
//!                      + 2/(w(1+w)) Σ_{t,j} F^{ij} a_{it} (w u_t γ^{sj} + u_j γ^{ts})
//! ```
//!
//! Since `f` depends on `A` only through symmetric functions of its
//! eigenvalues, `F` needs no eigenvector derivatives and repeated
//! eigenvalues are harmless.

use crate::error::{Error, Result};
use crate::geometry::{curvature_matrix_with, metric_pack, GraphJet, MetricData};
use crate::linalg::{jacobi_eigen, Mat};
use crate::symfun::{
    first_nonpositive_sigma, in_tilde_gamma, kappa_to_lambda, quotient_gradient, quotient_value,
    EigenTuple, QuotientSpec,
};

/// `F = ∂f/∂a` at a symmetric matrix, with the eigendata it was built from.
#[derive(Debug, Clone)]
pub struct FMatrixData {
    /// `F^{ij}`, symmetric.
    pub f: Mat,
    /// `f_i = ∂f/∂κ_i`, in the order of `kappa`.
    pub f_grad: EigenTuple,
    /// Eigenvalues of the input matrix, ascending.
    pub kappa: EigenTuple,
    /// Orthogonal `B` with `a = B·diag(kappa)·Bᵀ`.
    pub basis: Mat,
}

/// Operator value and first-order linearization data at one jet.
#[derive(Debug, Clone)]
pub struct LinearizationData {
    /// `G = f(λ(A))`.
    pub value: f64,
    /// `G^{ij} = ∂G/∂u_{ij}`; symmetric, positive definite on admissible jets.
    pub gij: Mat,
    /// `G^s = ∂G/∂u_s`.
    pub gs: Vec<f64>,
    /// `F^{ij} = ∂f/∂a_{ij}`.
    pub f: Mat,
    /// `f_i = ∂f/∂κ_i`.
    pub f_grad: EigenTuple,
}

fn cone_check(spec: &QuotientSpec, lambda: &EigenTuple) -> Result<()> {
    if let Some((m, value)) = first_nonpositive_sigma(spec.k(), lambda) {
        return Err(Error::ConeViolation { m, value });
    }
    Ok(())
}

/// Operator value `f(λ(A[u]))` at a spacelike, admissible jet.
pub fn evaluate(spec: &QuotientSpec, jet: &GraphJet) -> Result<f64> {
    let m = metric_pack(jet)?;
    let a = curvature_matrix_with(&m, jet);
    let (vals, _) = jacobi_eigen(&a)?;
    let kappa = EigenTuple::new(vals)?;
    let lambda = kappa_to_lambda(&kappa);
    cone_check(spec, &lambda)?;
    quotient_value(spec, &lambda)
}

/// `F = ∂f/∂a` at a symmetric matrix with `λ(eig(a)) ∈ Γ_k`.
///
/// Chain rule through `λ_i = Σ_{j≠i} κ_j`: with `q = ∇(σ_k/σ_l)(λ)`,
/// `f_i = Σ_{p≠i} q_p`.
pub fn f_matrix(spec: &QuotientSpec, a: &Mat) -> Result<FMatrixData> {
    if a.dim() != spec.n() {
        return Err(Error::Argument("f_matrix: matrix dimension mismatch".into()));
    }
    if !a.is_symmetric(1e-12) {
        return Err(Error::Argument("f_matrix: matrix is not symmetric".into()));
    }
    let (vals, basis) = jacobi_eigen(&a.symmetrize())?;
    let kappa = EigenTuple::new(vals)?;
    f_matrix_from_eigen(spec, kappa, basis)
}

fn f_matrix_from_eigen(
    spec: &QuotientSpec,
    kappa: EigenTuple,
    basis: Mat,
) -> Result<FMatrixData> {
    let lambda = kappa_to_lambda(&kappa);
    cone_check(spec, &lambda)?;
    let q = quotient_gradient(spec, &lambda)?;
    let qsum: f64 = q.values().iter().sum();
    let f_grad: Vec<f64> = q.values().iter().map(|qi| qsum - qi).collect();
    let n = kappa.len();
    let mut f = Mat::zeros(n);
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for (t, ft) in f_grad.iter().enumerate() {
                s += basis.get(i, t) * ft * basis.get(j, t);
            }
            f.set(i, j, s);
            f.set(j, i, s);
        }
    }
    Ok(FMatrixData { f, f_grad: EigenTuple::new(f_grad)?, kappa, basis })
}

fn lin_from_parts(
    spec: &QuotientSpec,
    jet: &GraphJet,
    m: &MetricData,
    a: &Mat,
    fm: &FMatrixData,
) -> Result<LinearizationData> {
    let lambda = kappa_to_lambda(&fm.kappa);
    let value = quotient_value(spec, &lambda)?;
    let n = jet.dim();
    let w = m.w;
    let gij = m.gamma_up.mul(&fm.f).mul(&m.gamma_up).scale(1.0 / w).symmetrize();
    let sum_fk: f64 = fm
        .f_grad
        .values()
        .iter()
        .zip(fm.kappa.values())
        .map(|(fi, ki)| fi * ki)
        .sum();
    let fa_du = fm.f.mul_vec(&a.mul_vec(&jet.du));
    let af_du = a.mul_vec(&fm.f.mul_vec(&jet.du));
    let v1 = m.gamma_up.mul_vec(&fa_du);
    let v2 = m.gamma_up.mul_vec(&af_du);
    let c = 2.0 / (w * (1.0 + w));
    let mut gs = vec![0.0; n];
    for s in 0..n {
        gs[s] = jet.du[s] / (w * w) * sum_fk + c * (w * v1[s] + v2[s]);
    }
    Ok(LinearizationData { value, gij, gs, f: fm.f.clone(), f_grad: fm.f_grad.clone() })
}

/// Value, `G^{ij}` and `G^s` at a spacelike, admissible jet.
pub fn linearize(spec: &QuotientSpec, jet: &GraphJet) -> Result<LinearizationData> {
    let m = metric_pack(jet)?;
    let a = curvature_matrix_with(&m, jet);
    let fm = f_matrix(spec, &a)?;
    lin_from_parts(spec, jet, &m, &a, &fm)
}

/// Smallest eigenvalue of `G^{ij}`; positive on admissible jets.
pub fn ellipticity_margin(lin: &LinearizationData) -> Result<f64> {
    let (vals, _) = jacobi_eigen(&lin.gij)?;
    Ok(vals[0])
}

/// Result of the inadmissible-node surrogate linearization.
pub(crate) struct SurrogateLin {
    pub lin: LinearizationData,
    /// Euclidean distance from the original κ to its cone projection; 0 when
    /// the jet was admissible.
    pub cone_dist: f64,
    pub admissible: bool,
}

/// Projects κ onto the admissible cone along the segment toward `c·(1,…,1)`,
/// `c = max(1, |κ|_∞)`. Returns the projected tuple and the distance moved.
pub(crate) fn project_admissible(spec: &QuotientSpec, kappa: &EigenTuple) -> (EigenTuple, f64) {
    if in_tilde_gamma(spec.k(), kappa) {
        return (kappa.clone(), 0.0);
    }
    let c = kappa.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let blend = |s: f64| -> Vec<f64> {
        kappa.values().iter().map(|&v| (1.0 - s) * v + s * c).collect()
    };
    // bisection invariant: hi admissible, lo not (s=1 gives all-positive κ)
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let t = EigenTuple::new(blend(mid)).expect("blend of finite tuples is finite");
        if in_tilde_gamma(spec.k(), &t) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let proj = EigenTuple::new(blend(hi)).expect("blend of finite tuples is finite");
    let dist = hi
        * kappa
            .values()
            .iter()
            .map(|&v| (c - v) * (c - v))
            .sum::<f64>()
            .sqrt();
    (proj, dist)
}

/// Linearization that tolerates inadmissible jets by projecting κ back to the
/// cone; the projection distance feeds the assembly penalty. The Jacobian at
/// projected nodes drops the distance derivative, which only steers trial
/// steps and never enters a converged state.
pub(crate) fn linearize_guarded(spec: &QuotientSpec, jet: &GraphJet) -> Result<SurrogateLin> {
    let m = metric_pack(jet)?;
    let a = curvature_matrix_with(&m, jet);
    let (vals, basis) = jacobi_eigen(&a)?;
    let kappa = EigenTuple::new(vals)?;
    let (kappa_eff, cone_dist) = project_admissible(spec, &kappa);
    let admissible = cone_dist == 0.0;
    let (a_eff, fm) = if admissible {
        (a, f_matrix_from_eigen(spec, kappa_eff, basis)?)
    } else {
        let n = jet.dim();
        let mut a_eff = Mat::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for (t, kt) in kappa_eff.values().iter().enumerate() {
                    s += basis.get(i, t) * kt * basis.get(j, t);
                }
                a_eff.set(i, j, s);
                a_eff.set(j, i, s);
            }
        }
        (a_eff, f_matrix_from_eigen(spec, kappa_eff, basis)?)
    };
    let lin = lin_from_parts(spec, jet, &m, &a_eff, &fm)?;
    Ok(SurrogateLin { lin, cone_dist, admissible })
}

/// Smallest `R ≥ 0` with `f(κ_1, …, κ_{n−1}, κ_n + R) ≥ a_target`, found by
/// doubling then bisected to 1% relative width; the admissible upper end is
/// returned. Increasing the top curvature keeps κ admissible and increases f.
pub fn curvature_unbounded_check(
    spec: &QuotientSpec,
    kappa: &EigenTuple,
    a_target: f64,
) -> Result<f64> {
    if !in_tilde_gamma(spec.k(), kappa) {
        let lambda = kappa_to_lambda(kappa);
        let (m, value) =
            first_nonpositive_sigma(spec.k(), &lambda).expect("inadmissible tuple has a witness");
        return Err(Error::ConeViolation { m, value });
    }
    if !a_target.is_finite() {
        return Err(Error::Argument("curvature target must be finite".into()));
    }
    let n = kappa.len();
    let f_at = |r: f64| -> Result<f64> {
        let mut v = kappa.values().to_vec();
        v[n - 1] += r;
        quotient_value(spec, &kappa_to_lambda(&EigenTuple::new(v)?))
    };
    if f_at(0.0)? >= a_target {
        return Ok(0.0);
    }
    let cap = 1e12;
    let mut hi = 1.0;
    while f_at(hi)? < a_target {
        hi *= 2.0;
        if hi > cap {
            return Err(Error::Numeric(format!(
                "curvature search exceeded R = {cap:.0e} without reaching target {a_target:.6e}"
            )));
        }
    }
    let mut lo = hi / 2.0;
    if f_at(lo)? >= a_target {
        lo = 0.0;
    }
    while hi - lo > 0.01 * hi {
        let mid = 0.5 * (lo + hi);
        if f_at(mid)? >= a_target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::hyperboloid_jet;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(n: usize, k: usize, l: usize) -> QuotientSpec {
        QuotientSpec::new(n, k, l).unwrap()
    }

    fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Mat {
        let s = Mat::from_fn(n, |i, j| {
            let v: f64 = rng.gen_range(-1.0..1.0);
            if i <= j {
                v
            } else {
                0.0
            }
        })
        .symmetrize();
        let (_, b) = jacobi_eigen(&s).unwrap();
        b
    }

    /// Admissible spacelike jet: positive-curvature Hessian keeps κ in every cone.
    fn random_admissible_jet(n: usize, rng: &mut ChaCha8Rng) -> GraphJet {
        let scale: f64 = rng.gen_range(0.1..0.6);
        let mut du: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm: f64 = du.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut du {
            *v *= scale / norm.max(1e-12);
        }
        let b = random_orthogonal(n, rng);
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
        let d2u = Mat::from_fn(n, |i, j| {
            (0..n).map(|t| b.get(i, t) * d[t] * b.get(j, t)).sum()
        })
        .symmetrize();
        GraphJet::new(vec![0.0; n], 0.0, du, d2u).unwrap()
    }

    #[test]
    fn evaluate_hyperboloid_values() {
        let x = [0.15, -0.1, 0.2];
        let j = hyperboloid_jet(1.0, &x, 0.0);
        assert!((evaluate(&spec(3, 2, 0), &j).unwrap() - 12.0).abs() < 1e-9);
        assert!((evaluate(&spec(3, 2, 1), &j).unwrap() - 2.0).abs() < 1e-10);
        for rho in [0.5, 2.0] {
            let j = hyperboloid_jet(rho, &x, 0.0);
            let got = evaluate(&spec(3, 2, 0), &j).unwrap();
            assert!((got - 12.0 / (rho * rho)).abs() < 1e-8 * (1.0 + got.abs()));
        }
    }

    #[test]
    fn evaluate_rejects_inadmissible() {
        let d2u = Mat::diag(&[-1.0, -1.0, -1.0]);
        let j = GraphJet::new(vec![0.0; 3], 0.0, vec![0.0; 3], d2u).unwrap();
        match evaluate(&spec(3, 2, 0), &j) {
            Err(Error::ConeViolation { m, value }) => {
                assert_eq!(m, 1);
                assert!(value < 0.0);
            }
            other => panic!("expected cone violation, got {other:?}"),
        }
    }

    #[test]
    fn f_matrix_identity_example() {
        let fm = f_matrix(&spec(3, 2, 0), &Mat::identity(3)).unwrap();
        for i in 0..3 {
            assert!((fm.f_grad.get(i) - 8.0).abs() < 1e-12);
            for j in 0..3 {
                let want = if i == j { 8.0 } else { 0.0 };
                assert!((fm.f.get(i, j) - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn f_matrix_diagonal_input_gives_diagonal_f() {
        let fm = f_matrix(&spec(3, 2, 1), &Mat::diag(&[1.0, 2.0, 3.0])).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(fm.f.get(i, j).abs() < 1e-12);
                }
            }
        }
        // reconstruction a = B diag(kappa) B^T
        let a = Mat::from_fn(3, |i, j| {
            (0..3)
                .map(|t| fm.basis.get(i, t) * fm.kappa.get(t) * fm.basis.get(j, t))
                .sum()
        });
        assert!(a.sub(&Mat::diag(&[1.0, 2.0, 3.0])).frobenius() < 1e-10);
    }

    #[test]
    fn f_matrix_matches_finite_differences() {
        let sp = spec(3, 2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let value_of = |a: &Mat| -> f64 {
            let (vals, _) = jacobi_eigen(a).unwrap();
            let kap = EigenTuple::new(vals).unwrap();
            quotient_value(&sp, &kappa_to_lambda(&kap)).unwrap()
        };
        for _ in 0..5 {
            let b = random_orthogonal(3, &mut rng);
            let d: Vec<f64> = (0..3).map(|_| rng.gen_range(0.3..2.0)).collect();
            let a = Mat::from_fn(3, |i, j| {
                (0..3).map(|t| b.get(i, t) * d[t] * b.get(j, t)).sum()
            })
            .symmetrize();
            let fm = f_matrix(&sp, &a).unwrap();
            let delta = 1e-6;
            for i in 0..3 {
                for j in i..3 {
                    let mut ap = a.clone();
                    let mut am = a.clone();
                    ap.add_to(i, j, delta);
                    am.add_to(i, j, -delta);
                    if i != j {
                        ap.add_to(j, i, delta);
                        am.add_to(j, i, -delta);
                    }
                    let fd = (value_of(&ap) - value_of(&am)) / (2.0 * delta);
                    let analytic = if i == j { fm.f.get(i, i) } else { 2.0 * fm.f.get(i, j) };
                    let scale = analytic.abs().max(1e-6);
                    assert!(
                        (fd - analytic).abs() / scale < 1e-5,
                        "({i},{j}): fd {fd} vs {analytic}"
                    );
                }
            }
        }
    }

    #[test]
    fn linearize_flat_gradient() {
        let sp = spec(3, 2, 0);
        let j = GraphJet::new(vec![0.0; 3], 0.0, vec![0.0; 3], Mat::identity(3)).unwrap();
        let lin = linearize(&sp, &j).unwrap();
        for s in 0..3 {
            assert!(lin.gs[s].abs() < 1e-14);
        }
        assert!(lin.gij.sub(&lin.f).frobenius() < 1e-12);
        assert!((ellipticity_margin(&lin).unwrap() - 8.0).abs() < 1e-10);
    }

    #[test]
    fn linearize_matches_finite_differences() {
        for (n, k, l) in [(2, 1, 0), (3, 2, 0), (3, 2, 1)] {
            let sp = spec(n, k, l);
            let mut rng = ChaCha8Rng::seed_from_u64(11 + (n * 10 + k) as u64);
            for _ in 0..4 {
                let jet = random_admissible_jet(n, &mut rng);
                let lin = linearize(&sp, &jet).unwrap();
                let delta = 1e-6;
                for i in 0..n {
                    for j in i..n {
                        let mut dp = jet.d2u.clone();
                        let mut dm = jet.d2u.clone();
                        dp.add_to(i, j, delta);
                        dm.add_to(i, j, -delta);
                        if i != j {
                            dp.add_to(j, i, delta);
                            dm.add_to(j, i, -delta);
                        }
                        let jp =
                            GraphJet::new(jet.x.clone(), jet.u, jet.du.clone(), dp).unwrap();
                        let jm =
                            GraphJet::new(jet.x.clone(), jet.u, jet.du.clone(), dm).unwrap();
                        let fd = (evaluate(&sp, &jp).unwrap() - evaluate(&sp, &jm).unwrap())
                            / (2.0 * delta);
                        let analytic =
                            if i == j { lin.gij.get(i, i) } else { 2.0 * lin.gij.get(i, j) };
                        let scale = analytic.abs().max(1e-6);
                        assert!(
                            (fd - analytic).abs() / scale < 1e-5,
                            "Gij ({i},{j}) n={n} k={k} l={l}: {fd} vs {analytic}"
                        );
                    }
                }
                for s in 0..n {
                    let mut dup = jet.du.clone();
                    let mut dum = jet.du.clone();
                    dup[s] += delta;
                    dum[s] -= delta;
                    let jp =
                        GraphJet::new(jet.x.clone(), jet.u, dup, jet.d2u.clone()).unwrap();
                    let jm =
                        GraphJet::new(jet.x.clone(), jet.u, dum, jet.d2u.clone()).unwrap();
                    let fd = (evaluate(&sp, &jp).unwrap() - evaluate(&sp, &jm).unwrap())
                        / (2.0 * delta);
                    let scale = lin.gs[s].abs().max(1e-6);
                    assert!(
                        (fd - lin.gs[s]).abs() / scale < 1e-5,
                        "Gs {s} n={n} k={k} l={l}: {fd} vs {}",
                        lin.gs[s]
                    );
                }
            }
        }
    }

    #[test]
    fn homogeneity_of_quotient_power() {
        let sp = spec(3, 2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let jet = random_admissible_jet(3, &mut rng);
            let c: f64 = rng.gen_range(0.5..3.0);
            let scaled =
                GraphJet::new(jet.x.clone(), jet.u, jet.du.clone(), jet.d2u.scale(c)).unwrap();
            let f0 = evaluate(&sp, &jet).unwrap();
            let f1 = evaluate(&sp, &scaled).unwrap();
            let want = c.powi((sp.k() - sp.l()) as i32) * f0;
            assert!((f1 - want).abs() < 1e-10 * want.abs().max(1.0), "{f1} vs {want}");
        }
    }

    #[test]
    fn linearize_covariant_under_rotation() {
        let sp = spec(3, 2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let jet = random_admissible_jet(3, &mut rng);
        let r = random_orthogonal(3, &mut rng);
        let du_r = r.mul_vec(&jet.du);
        let d2u_r = r.mul(&jet.d2u).mul(&r.transpose()).symmetrize();
        let jet_r = GraphJet::new(jet.x.clone(), jet.u, du_r, d2u_r).unwrap();
        let lin = linearize(&sp, &jet).unwrap();
        let lin_r = linearize(&sp, &jet_r).unwrap();
        assert!((lin.value - lin_r.value).abs() < 1e-10);
        let gij_pushed = r.mul(&lin.gij).mul(&r.transpose());
        assert!(gij_pushed.sub(&lin_r.gij).frobenius() < 1e-9);
        let gs_pushed = r.mul_vec(&lin.gs);
        for s in 0..3 {
            assert!((gs_pushed[s] - lin_r.gs[s]).abs() < 1e-9);
        }
    }

    #[test]
    fn ellipticity_positive_and_gamma_bounds() {
        let sp = spec(3, 2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let jet = random_admissible_jet(3, &mut rng);
            let lin = linearize(&sp, &jet).unwrap();
            let margin = ellipticity_margin(&lin).unwrap();
            assert!(margin > 0.0);
            // spectral sandwich from gamma's eigenvalues {1, 1/w}
            let w = (1.0 - jet.du.iter().map(|v| v * v).sum::<f64>()).sqrt();
            let fmin = lin.f_grad.values().iter().cloned().fold(f64::INFINITY, f64::min);
            let fmax = lin.f_grad.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let (vals, _) = jacobi_eigen(&lin.gij).unwrap();
            assert!(vals[0] >= fmin / w - 1e-9 * fmax.abs());
            assert!(vals[2] <= fmax / (w * w * w) + 1e-9 * fmax.abs());
        }
        // umbilic jet at the axis: Du = 0, so the margin equals min f_i exactly
        let j0 = hyperboloid_jet(1.0, &[0.0, 0.0, 0.0], 0.0);
        let lin0 = linearize(&sp, &j0).unwrap();
        let fmin0 = lin0.f_grad.values().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((ellipticity_margin(&lin0).unwrap() - fmin0).abs() < 1e-10);
    }

    #[test]
    fn curvature_search_examples() {
        let sp20 = spec(3, 2, 0);
        let kap = EigenTuple::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(curvature_unbounded_check(&sp20, &kap, 12.0).unwrap(), 0.0);
        // linear case: f = 2 sigma_1(kappa), adding R to one slot adds (n-1) R
        let sp10 = spec(3, 1, 0);
        let kap = EigenTuple::new(vec![0.5, 0.5, 0.5]).unwrap();
        let r = curvature_unbounded_check(&sp10, &kap, 10.0).unwrap();
        let exact = (10.0 - 3.0) / 2.0;
        assert!((r - exact).abs() <= 0.02 * exact, "r = {r}, exact = {exact}");
        let r_big = curvature_unbounded_check(&sp10, &kap, 100.0).unwrap();
        assert!(r_big > r);
        // unreachable target trips the cap
        assert!(matches!(
            curvature_unbounded_check(&sp10, &kap, 1e30),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn projection_returns_admissible_point() {
        let sp = spec(3, 2, 0);
        let bad = EigenTuple::new(vec![-2.0, 0.3, 0.4]).unwrap();
        assert!(!in_tilde_gamma(2, &bad));
        let (proj, dist) = project_admissible(&sp, &bad);
        assert!(dist > 0.0);
        assert!(in_tilde_gamma(2, &proj));
        let good = EigenTuple::new(vec![0.5, 0.6, 0.7]).unwrap();
        let (proj, dist) = project_admissible(&sp, &good);
        assert_eq!(dist, 0.0);
        assert_eq!(proj.values(), good.values());
    }

    #[test]
    fn guarded_linearization_flags_projection() {
        let sp = spec(3, 2, 0);
        let good = random_admissible_jet(3, &mut ChaCha8Rng::seed_from_u64(5));
        let s = linearize_guarded(&sp, &good).unwrap();
        assert!(s.admissible);
        assert_eq!(s.cone_dist, 0.0);
        let bad =
            GraphJet::new(vec![0.0; 3], 0.0, vec![0.1, 0.0, 0.0], Mat::diag(&[-1.0, -0.9, 2.0]))
                .unwrap();
        let s = linearize_guarded(&sp, &bad).unwrap();
        assert!(!s.admissible);
        assert!(s.cone_dist > 0.0);
        assert!(s.lin.value.is_finite());
    }
}
