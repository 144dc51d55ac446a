//! Elementary symmetric polynomials, Hessian quotients and Garding cones.
//!
//! For `λ ∈ ℝⁿ` the elementary symmetric polynomial is
//! `σ_m(λ) = Σ_{i1<…<im} λ_{i1} ⋯ λ_{im}` with `σ_0 ≡ 1`. The open cone
//! `Γ_k = {λ : σ_m(λ) > 0, m = 1..k}` is where the quotient `σ_k/σ_l`
//! (`0 ≤ l < k ≤ n`) is positive, monotone in every coordinate, and
//! `(σ_k/σ_l)^{1/(k−l)}` is concave.
//!
//! Curvature tuples `κ` enter through the substitution `λ_i(κ) = Σ_{j≠i} κ_j`;
//! the pulled-back cone is `Γ̃_k = {κ : λ(κ) ∈ Γ_k}`.

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Ordered tuple of eigenvalues (or principal curvatures), length ≥ 2,
/// all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenTuple(Vec<f64>);

impl EigenTuple {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Argument(format!(
                "eigen tuple needs at least 2 entries, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("eigen tuple has non-finite entries".into()));
        }
        Ok(EigenTuple(values))
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Quotient exponents `(n, k, l)` with `0 ≤ l < k ≤ n`.
///
/// `l = 0` reduces to the plain Hessian operator `σ_k`. The interior solver
/// additionally wants `k < n`; that restriction is checked at the CLI level
/// so the algebra stays usable for `k = n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuotientSpec {
    n: usize,
    k: usize,
    l: usize,
}

impl QuotientSpec {
    pub fn new(n: usize, k: usize, l: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Argument(format!("dimension n = {n} must be at least 2")));
        }
        if !(l < k && k <= n) {
            return Err(Error::Argument(format!(
                "quotient exponents need 0 <= l < k <= n, got k = {k}, l = {l}, n = {n}"
            )));
        }
        Ok(QuotientSpec { n, k, l })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn l(&self) -> usize {
        self.l
    }

    /// Homogeneity degree `k − l` of `σ_k/σ_l`.
    #[inline]
    pub fn degree(&self) -> usize {
        self.k - self.l
    }
}

/// Binomial coefficient as a float (n small).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut num = 1.0f64;
    for i in 0..k {
        num = num * (n - i) as f64 / (i + 1) as f64;
    }
    num
}

/// Core DP recurrence for σ_m over `values`, skipping `skip` indices.
/// One pass of `e[j] += x e[j-1]` per retained entry, O(n·m).
fn sigma_dp(m: usize, values: &[f64], skip: &[usize]) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let mut e = vec![0.0f64; m + 1];
    e[0] = 1.0;
    let mut used = 0usize;
    for (i, &x) in values.iter().enumerate() {
        if skip.contains(&i) {
            continue;
        }
        used += 1;
        let top = m.min(used);
        for j in (1..=top).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e[m]
}

/// σ_m(λ). `m` must satisfy `0 ≤ m ≤ n`.
pub fn elementary_sigma(m: usize, lam: &EigenTuple) -> Result<f64> {
    if m > lam.len() {
        return Err(Error::Argument(format!(
            "sigma order {m} exceeds tuple length {}",
            lam.len()
        )));
    }
    Ok(sigma_dp(m, lam.values(), &[]))
}

/// σ_{m; i...}(λ): σ_m with the listed indices removed from the tuple.
pub fn sigma_deleted(m: usize, lam: &EigenTuple, deleted: &[usize]) -> Result<f64> {
    let n = lam.len();
    for (a, &i) in deleted.iter().enumerate() {
        if i >= n {
            return Err(Error::Argument(format!("deleted index {i} out of range for n = {n}")));
        }
        if deleted[..a].contains(&i) {
            return Err(Error::Argument(format!("duplicate deleted index {i}")));
        }
    }
    if m > n - deleted.len() {
        return Err(Error::Argument(format!(
            "sigma order {m} exceeds remaining length {}",
            n - deleted.len()
        )));
    }
    Ok(sigma_dp(m, lam.values(), deleted))
}

/// Gradient of σ_m: entry `i` is `∂σ_m/∂λ_i = σ_{m−1; i}`.
pub fn sigma_gradient(m: usize, lam: &EigenTuple) -> Result<EigenTuple> {
    if m == 0 || m > lam.len() {
        return Err(Error::Argument(format!(
            "sigma gradient needs 1 <= m <= n, got m = {m}, n = {}",
            lam.len()
        )));
    }
    let g: Vec<f64> = (0..lam.len())
        .map(|i| sigma_dp(m - 1, lam.values(), &[i]))
        .collect();
    EigenTuple::new(g)
}

fn check_len(spec: &QuotientSpec, lam: &EigenTuple) -> Result<()> {
    if lam.len() != spec.n() {
        return Err(Error::Argument(format!(
            "tuple length {} does not match spec dimension {}",
            lam.len(),
            spec.n()
        )));
    }
    Ok(())
}

/// Quotient value `σ_k(λ)/σ_l(λ)`; requires `σ_l(λ) > 0`.
pub fn quotient_value(spec: &QuotientSpec, lam: &EigenTuple) -> Result<f64> {
    check_len(spec, lam)?;
    let sl = sigma_dp(spec.l(), lam.values(), &[]);
    if sl <= 0.0 {
        return Err(Error::ConeViolation { m: spec.l(), value: sl });
    }
    Ok(sigma_dp(spec.k(), lam.values(), &[]) / sl)
}

/// Gradient of the quotient in λ:
/// `f_p = (σ_{k−1;p} σ_l − σ_k σ_{l−1;p}) / σ_l²` (`σ_{−1;p} ≡ 0`).
pub fn quotient_gradient(spec: &QuotientSpec, lam: &EigenTuple) -> Result<EigenTuple> {
    check_len(spec, lam)?;
    let (k, l) = (spec.k(), spec.l());
    let v = lam.values();
    let sl = sigma_dp(l, v, &[]);
    if sl <= 0.0 {
        return Err(Error::ConeViolation { m: l, value: sl });
    }
    let sk = sigma_dp(k, v, &[]);
    let g: Vec<f64> = (0..spec.n())
        .map(|p| {
            let skp = sigma_dp(k - 1, v, &[p]);
            let slp = if l >= 1 { sigma_dp(l - 1, v, &[p]) } else { 0.0 };
            (skp * sl - sk * slp) / (sl * sl)
        })
        .collect();
    EigenTuple::new(g)
}

/// Hessian of `g = (σ_k/σ_l)^{1/(k−l)}` in λ, valid where `σ_l > 0` and
/// the quotient is positive. Uses `∂²σ_m/∂λ_i∂λ_j = σ_{m−2; i,j}` off the
/// diagonal and 0 on it.
pub fn quotient_power_hessian(spec: &QuotientSpec, lam: &EigenTuple) -> Result<Mat> {
    check_len(spec, lam)?;
    let n = spec.n();
    let (k, l) = (spec.k(), spec.l());
    let v = lam.values();
    let b = sigma_dp(l, v, &[]);
    if b <= 0.0 {
        return Err(Error::ConeViolation { m: l, value: b });
    }
    let a = sigma_dp(k, v, &[]);
    let q = a / b;
    if q <= 0.0 {
        return Err(Error::ConeViolation { m: k, value: a });
    }
    let ai: Vec<f64> = (0..n).map(|i| sigma_dp(k - 1, v, &[i])).collect();
    let bi: Vec<f64> = (0..n)
        .map(|i| if l >= 1 { sigma_dp(l - 1, v, &[i]) } else { 0.0 })
        .collect();
    let second = |m: usize, i: usize, j: usize| -> f64 {
        if i == j {
            0.0
        } else if m >= 2 {
            sigma_dp(m - 2, v, &[i, j])
        } else {
            0.0
        }
    };
    // q_ij, then chain rule through q^{1/m}.
    let minv = 1.0 / spec.degree() as f64;
    let mut hess = Mat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let aij = second(k, i, j);
            let bij = second(l, i, j);
            let qi = (ai[i] * b - a * bi[i]) / (b * b);
            let qj = (ai[j] * b - a * bi[j]) / (b * b);
            let qij = aij / b - (ai[i] * bi[j] + ai[j] * bi[i]) / (b * b) - a * bij / (b * b)
                + 2.0 * a * bi[i] * bi[j] / (b * b * b);
            let gij = minv * (minv - 1.0) * q.powf(minv - 2.0) * qi * qj
                + minv * q.powf(minv - 1.0) * qij;
            hess.set(i, j, gij);
        }
    }
    Ok(hess)
}

/// Strict Garding cone membership: `σ_m(λ) > 0` for `m = 1..k`.
pub fn in_gamma(k: usize, lam: &EigenTuple) -> bool {
    assert!(k >= 1 && k <= lam.len(), "in_gamma order out of range");
    first_nonpositive_sigma(k, lam).is_none()
}

/// First `m ≤ k` with `σ_m(λ) ≤ 0`, if any. Used to build cone errors.
pub fn first_nonpositive_sigma(k: usize, lam: &EigenTuple) -> Option<(usize, f64)> {
    for m in 1..=k {
        let s = sigma_dp(m, lam.values(), &[]);
        if s <= 0.0 {
            return Some((m, s));
        }
    }
    None
}

/// The substitution `λ_i(κ) = σ_1(κ) − κ_i = Σ_{j≠i} κ_j`.
pub fn kappa_to_lambda(kappa: &EigenTuple) -> EigenTuple {
    let s: f64 = kappa.values().iter().sum();
    EigenTuple(kappa.values().iter().map(|&x| s - x).collect())
}

/// Membership of a curvature tuple in `Γ̃_k = {κ : λ(κ) ∈ Γ_k}`.
pub fn in_tilde_gamma(k: usize, kappa: &EigenTuple) -> bool {
    in_gamma(k, &kappa_to_lambda(kappa))
}

/// Newton–MacLaurin comparison on normalized quotients:
/// checks `[(σ_k/C(n,k)) / (σ_l/C(n,l))]^{1/(k−l)} ≤ [(σ_r/C(n,r)) / (σ_s/C(n,s))]^{1/(r−s)}`
/// within `1e-12` relative slack. Requires `λ ∈ Γ_k`, `k > l`, `r > s`,
/// `k ≥ r`, `l ≥ s`.
pub fn maclaurin_check(lam: &EigenTuple, k: usize, l: usize, r: usize, s: usize) -> Result<bool> {
    let n = lam.len();
    if !(k > l && k <= n && r > s && r <= n && k >= r && l >= s) {
        return Err(Error::Argument(format!(
            "invalid maclaurin indices (k,l,r,s) = ({k},{l},{r},{s}) for n = {n}"
        )));
    }
    if !in_gamma(k, lam) {
        return Err(Error::Argument("maclaurin_check requires lam in Gamma_k".into()));
    }
    let norm = |m: usize| sigma_dp(m, lam.values(), &[]) / binomial(n, m);
    let lhs = (norm(k) / norm(l)).powf(1.0 / (k - l) as f64);
    let rhs = (norm(r) / norm(s)).powf(1.0 / (r - s) as f64);
    let slack = 1e-12 * lhs.abs().max(rhs.abs()).max(1.0);
    Ok(lhs <= rhs + slack)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(v: &[f64]) -> EigenTuple {
        EigenTuple::from_slice(v).unwrap()
    }

    /// Subset-enumeration oracle for σ_m, independent of the DP recurrence.
    fn sigma_enum(m: usize, v: &[f64]) -> f64 {
        fn rec(v: &[f64], start: usize, m: usize) -> f64 {
            if m == 0 {
                return 1.0;
            }
            let mut acc = 0.0;
            for i in start..v.len() {
                acc += v[i] * rec(v, i + 1, m - 1);
            }
            acc
        }
        rec(v, 0, m)
    }

    #[test]
    fn sigma_basics() {
        let lam = t(&[1.0, 2.0, 3.0]);
        assert_eq!(elementary_sigma(0, &lam).unwrap(), 1.0);
        assert_eq!(elementary_sigma(1, &lam).unwrap(), 6.0);
        assert_eq!(elementary_sigma(2, &lam).unwrap(), 11.0);
        assert_eq!(elementary_sigma(3, &lam).unwrap(), 6.0);
        assert!(elementary_sigma(4, &lam).is_err());
    }

    #[test]
    fn sigma_matches_enumeration() {
        let v = [0.3, -1.2, 2.5, 0.9, -0.4, 1.6];
        let lam = t(&v);
        for m in 0..=6 {
            let dp = elementary_sigma(m, &lam).unwrap();
            let en = sigma_enum(m, &v);
            assert!((dp - en).abs() <= 1e-12 * en.abs().max(1.0), "m = {m}: {dp} vs {en}");
        }
    }

    #[test]
    fn deleted_and_gradient() {
        let lam = t(&[1.0, 2.0, 3.0]);
        assert_eq!(sigma_deleted(2, &lam, &[0]).unwrap(), 6.0);
        let g = sigma_gradient(2, &lam).unwrap();
        assert_eq!(g.values(), &[5.0, 4.0, 3.0]);
        assert!(sigma_deleted(1, &lam, &[0, 0]).is_err());
        assert!(sigma_deleted(1, &lam, &[3]).is_err());
    }

    #[test]
    fn quotient_values() {
        let s20 = QuotientSpec::new(3, 2, 0).unwrap();
        let s21 = QuotientSpec::new(3, 2, 1).unwrap();
        let lam = t(&[2.0, 2.0, 2.0]);
        assert_eq!(quotient_value(&s20, &lam).unwrap(), 12.0);
        assert_eq!(quotient_value(&s21, &lam).unwrap(), 2.0);
        // sigma_l <= 0 is a cone violation
        let bad = t(&[-1.0, -1.0, -1.0]);
        assert!(matches!(
            quotient_value(&s21, &bad),
            Err(Error::ConeViolation { m: 1, .. })
        ));
    }

    #[test]
    fn quotient_gradient_l0_reduces_to_deleted_sigma() {
        let spec = QuotientSpec::new(3, 2, 0).unwrap();
        let lam = t(&[1.0, 2.0, 3.0]);
        let g = quotient_gradient(&spec, &lam).unwrap();
        assert_eq!(g.values(), &[5.0, 4.0, 3.0]);
    }

    #[test]
    fn quotient_gradient_symmetric_point() {
        let spec = QuotientSpec::new(3, 2, 1).unwrap();
        let g = quotient_gradient(&spec, &t(&[2.0, 2.0, 2.0])).unwrap();
        for &v in g.values() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let spec = QuotientSpec::new(4, 3, 1).unwrap();
        let lam = t(&[1.1, 0.7, 2.3, 0.9]);
        let g = quotient_gradient(&spec, &lam).unwrap();
        let h = 1e-6;
        for p in 0..4 {
            let mut vp = lam.values().to_vec();
            let mut vm = vp.clone();
            vp[p] += h;
            vm[p] -= h;
            let fd = (quotient_value(&spec, &t(&vp)).unwrap()
                - quotient_value(&spec, &t(&vm)).unwrap())
                / (2.0 * h);
            assert!(
                (fd - g.get(p)).abs() <= 1e-8 * g.get(p).abs().max(1.0),
                "p = {p}: fd {fd} vs {}",
                g.get(p)
            );
        }
    }

    #[test]
    fn power_hessian_matches_finite_differences() {
        let spec = QuotientSpec::new(3, 2, 1).unwrap();
        let lam = [1.3, 0.9, 2.1];
        let hess = quotient_power_hessian(&spec, &t(&lam)).unwrap();
        let m = 1.0 / spec.degree() as f64;
        let g = |v: &[f64]| quotient_value(&spec, &t(v)).unwrap().powf(m);
        let h = 1e-4;
        for i in 0..3 {
            for j in 0..3 {
                let mut vpp = lam.to_vec();
                let mut vpm = lam.to_vec();
                let mut vmp = lam.to_vec();
                let mut vmm = lam.to_vec();
                vpp[i] += h;
                vpp[j] += h;
                vpm[i] += h;
                vpm[j] -= h;
                vmp[i] -= h;
                vmp[j] += h;
                vmm[i] -= h;
                vmm[j] -= h;
                let fd = (g(&vpp) - g(&vpm) - g(&vmp) + g(&vmm)) / (4.0 * h * h);
                assert!(
                    (fd - hess.get(i, j)).abs() <= 1e-4 * hess.max_abs().max(1.0),
                    "({i},{j}): fd {fd} vs {}",
                    hess.get(i, j)
                );
            }
        }
        // symmetry
        assert!(hess.is_symmetric(1e-12));
    }

    #[test]
    fn cone_membership() {
        assert!(!in_gamma(2, &t(&[2.0, 2.0, -1.0]))); // sigma_2 = 0, strict test fails
        assert!(in_gamma(1, &t(&[2.0, 2.0, -1.0])));
        assert!(in_gamma(3, &t(&[1.0, 2.0, 3.0])));
        assert!(in_tilde_gamma(1, &t(&[-1.0, 1.0, 1.0]))); // lambda = (2, 0, 0)
        assert!(!in_tilde_gamma(2, &t(&[-1.0, 1.0, 1.0])));
    }

    #[test]
    fn lambda_substitution() {
        let lam = kappa_to_lambda(&t(&[1.0, 2.0, 3.0]));
        assert_eq!(lam.values(), &[5.0, 4.0, 3.0]);
    }

    #[test]
    fn sum_identities() {
        // sum_i sigma_{k-1;i} = (n-k+1) sigma_{k-1} and
        // sum_i sigma_{k-1;i} kappa_i = k sigma_k
        let lam = t(&[0.5, -0.3, 1.7, 2.2]);
        let n = 4;
        for k in 1..=n {
            let g = sigma_gradient(k, &lam).unwrap();
            let lhs: f64 = g.values().iter().sum();
            let rhs = (n - k + 1) as f64 * elementary_sigma(k - 1, &lam).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0));
            let lhs2: f64 = g.values().iter().zip(lam.values()).map(|(a, b)| a * b).sum();
            let rhs2 = k as f64 * elementary_sigma(k, &lam).unwrap();
            assert!((lhs2 - rhs2).abs() <= 1e-12 * lhs2.abs().max(rhs2.abs()).max(1.0));
        }
    }

    #[test]
    fn maclaurin_examples() {
        let lam = t(&[1.0, 2.0, 3.0]);
        // (sigma_2/3)^{1/2} <= sigma_1/3
        assert!(maclaurin_check(&lam, 2, 0, 1, 0).unwrap());
        assert!(maclaurin_check(&lam, 3, 1, 2, 1).unwrap());
        assert!(maclaurin_check(&t(&[1.0, 1.0, 1.0]), 2, 0, 1, 0).unwrap()); // equality case
        assert!(maclaurin_check(&lam, 1, 0, 2, 0).is_err()); // k >= r violated
    }

    #[test]
    fn quotient_spec_validation() {
        assert!(QuotientSpec::new(3, 2, 2).is_err());
        assert!(QuotientSpec::new(3, 4, 0).is_err());
        assert!(QuotientSpec::new(1, 1, 0).is_err());
        assert!(QuotientSpec::new(3, 3, 1).is_ok());
    }

    #[test]
    fn eigen_tuple_validation() {
        assert!(EigenTuple::new(vec![1.0]).is_err());
        assert!(EigenTuple::new(vec![1.0, f64::NAN]).is_err());
        assert!(EigenTuple::new(vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(3, 2), 3.0);
        assert_eq!(binomial(6, 3), 20.0);
        assert_eq!(binomial(4, 0), 1.0);
        assert_eq!(binomial(3, 5), 0.0);
    }
}
