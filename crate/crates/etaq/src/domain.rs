//! Domain geometry: membership, signed distance, boundary principal
//! curvatures, and the (η,k)-convexity certificate.
//!
//! Every shape carries a level function `G` with `G < 0` inside, `G > 0`
//! outside. Signed distance is exact for boxes and balls and computed by
//! constrained Newton projection for ellipsoids and superellipsoids.

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, solve_dense, Mat};
use crate::symfun::{in_tilde_gamma, EigenTuple};

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Axis-aligned box `|x_i| ≤ hw_i`.
    Box { half_widths: Vec<f64> },
    Ball { r: f64 },
    /// `Σ (x_i/a_i)² = 1`.
    Ellipsoid { semi_axes: Vec<f64> },
    /// `Σ |x_i/a_i|^p = 1`, `2 ≤ p ≤ 6`.
    Superellipsoid { semi_axes: Vec<f64>, p: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub shape: Shape,
    pub n: usize,
}

/// A boundary point with its inward normal and principal curvatures
/// (ascending, with respect to the inward normal).
#[derive(Debug, Clone)]
pub struct BoundaryPoint {
    pub x: Vec<f64>,
    pub inward_normal: Vec<f64>,
    pub kappa_b: Vec<f64>,
}

/// Result of the boundary-convexity search. `k_found` is present only when
/// certified. Sampled certificates are certificates up to sampling
/// resolution, recorded in `samples`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvexityCertificate {
    pub certified: bool,
    pub k_found: Option<f64>,
    pub smooth_boundary: bool,
    pub samples: usize,
}

fn check_axes(n: usize, axes: &[f64]) -> Result<()> {
    if n < 2 {
        return Err(Error::Argument("domain dimension must be >= 2".into()));
    }
    if axes.len() != n {
        return Err(Error::Argument("domain parameter count must match dimension".into()));
    }
    if !axes.iter().all(|a| a.is_finite() && *a > 0.0) {
        return Err(Error::Argument("domain size parameters must be positive".into()));
    }
    Ok(())
}

impl DomainSpec {
    pub fn ball(n: usize, r: f64) -> Result<Self> {
        check_axes(n, &vec![r; n])?;
        Ok(DomainSpec { shape: Shape::Ball { r }, n })
    }

    pub fn boxdom(half_widths: Vec<f64>) -> Result<Self> {
        let n = half_widths.len();
        check_axes(n, &half_widths)?;
        Ok(DomainSpec { shape: Shape::Box { half_widths }, n })
    }

    pub fn ellipsoid(semi_axes: Vec<f64>) -> Result<Self> {
        let n = semi_axes.len();
        check_axes(n, &semi_axes)?;
        Ok(DomainSpec { shape: Shape::Ellipsoid { semi_axes }, n })
    }

    pub fn superellipsoid(semi_axes: Vec<f64>, p: f64) -> Result<Self> {
        let n = semi_axes.len();
        check_axes(n, &semi_axes)?;
        if !(2.0..=6.0).contains(&p) {
            return Err(Error::Argument(format!(
                "superellipsoid exponent must lie in [2, 6], got {p}"
            )));
        }
        Ok(DomainSpec { shape: Shape::Superellipsoid { semi_axes, p }, n })
    }

    /// Per-axis extent of the bounding box.
    pub fn half_widths(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Box { half_widths } => half_widths.clone(),
            Shape::Ball { r } => vec![*r; self.n],
            Shape::Ellipsoid { semi_axes } | Shape::Superellipsoid { semi_axes, .. } => {
                semi_axes.clone()
            }
        }
    }

    /// Radius of the largest origin-centered inscribed ball.
    pub fn inradius(&self) -> f64 {
        self.half_widths().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn smooth_boundary(&self) -> bool {
        !matches!(self.shape, Shape::Box { .. })
    }
}

/// Shape function: negative inside, positive outside, zero on the boundary.
pub fn level(dom: &DomainSpec, x: &[f64]) -> f64 {
    match &dom.shape {
        Shape::Box { half_widths } => x
            .iter()
            .zip(half_widths)
            .map(|(xi, hw)| xi.abs() - hw)
            .fold(f64::NEG_INFINITY, f64::max),
        Shape::Ball { r } => x.iter().map(|v| (v / r) * (v / r)).sum::<f64>() - 1.0,
        Shape::Ellipsoid { semi_axes } => {
            x.iter().zip(semi_axes).map(|(xi, a)| (xi / a) * (xi / a)).sum::<f64>() - 1.0
        }
        Shape::Superellipsoid { semi_axes, p } => {
            x.iter()
                .zip(semi_axes)
                .map(|(xi, a)| (xi / a).abs().powf(*p))
                .sum::<f64>()
                - 1.0
        }
    }
}

fn level_gradient(dom: &DomainSpec, x: &[f64]) -> Vec<f64> {
    match &dom.shape {
        Shape::Box { .. } => unreachable!("box handled separately"),
        Shape::Ball { r } => x.iter().map(|v| 2.0 * v / (r * r)).collect(),
        Shape::Ellipsoid { semi_axes } => {
            x.iter().zip(semi_axes).map(|(xi, a)| 2.0 * xi / (a * a)).collect()
        }
        Shape::Superellipsoid { semi_axes, p } => x
            .iter()
            .zip(semi_axes)
            .map(|(xi, a)| {
                let t = (xi / a).abs();
                p * t.powf(p - 1.0) * xi.signum() / a
            })
            .collect(),
    }
}

fn level_hessian(dom: &DomainSpec, x: &[f64]) -> Mat {
    let n = x.len();
    match &dom.shape {
        Shape::Box { .. } => unreachable!("box handled separately"),
        Shape::Ball { r } => Mat::identity(n).scale(2.0 / (r * r)),
        Shape::Ellipsoid { semi_axes } => {
            Mat::diag(&semi_axes.iter().map(|a| 2.0 / (a * a)).collect::<Vec<_>>())
        }
        Shape::Superellipsoid { semi_axes, p } => Mat::diag(
            &x.iter()
                .zip(semi_axes)
                .map(|(xi, a)| {
                    let t = (xi / a).abs();
                    p * (p - 1.0) * t.powf(p - 2.0) / (a * a)
                })
                .collect::<Vec<_>>(),
        ),
    }
}

/// Maps a direction to the boundary along its ray (norm-like shapes only).
pub(crate) fn radial_boundary_point(dom: &DomainSpec, dir: &[f64]) -> Vec<f64> {
    let g1 = match &dom.shape {
        Shape::Ball { r } => {
            let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            return dir.iter().map(|v| v * r / norm).collect();
        }
        Shape::Ellipsoid { semi_axes } => dir
            .iter()
            .zip(semi_axes)
            .map(|(d, a)| (d / a) * (d / a))
            .sum::<f64>()
            .sqrt(),
        Shape::Superellipsoid { semi_axes, p } => dir
            .iter()
            .zip(semi_axes)
            .map(|(d, a)| (d / a).abs().powf(*p))
            .sum::<f64>()
            .powf(1.0 / p),
        Shape::Box { .. } => {
            // boundary of the box along the ray
            let hw = dom.half_widths();
            let t = dir
                .iter()
                .zip(&hw)
                .filter(|(d, _)| **d != 0.0)
                .map(|(d, h)| h / d.abs())
                .fold(f64::INFINITY, f64::min);
            return dir.iter().map(|v| v * t).collect();
        }
    };
    dir.iter().map(|v| v / g1).collect()
}

/// Quasi-uniform boundary sample: uniform angles for n = 2, a Fibonacci
/// sphere for n = 3, mapped radially onto the boundary. Box faces are
/// sampled on regular face grids that exclude edges.
pub fn boundary_samples(dom: &DomainSpec, count: usize) -> Vec<Vec<f64>> {
    let n = dom.n;
    let mut out = Vec::with_capacity(count);
    match &dom.shape {
        Shape::Box { half_widths } => {
            // per-face grids, edges excluded
            let faces = 2 * n;
            let per_face = count.div_ceil(faces).max(1);
            let side = (per_face as f64).powf(1.0 / (n as f64 - 1.0)).ceil() as usize;
            let side = side.max(1);
            for axis in 0..n {
                for sign in [-1.0, 1.0] {
                    let mut idx = vec![0usize; n - 1];
                    loop {
                        let mut x = vec![0.0; n];
                        x[axis] = sign * half_widths[axis];
                        let mut d = 0;
                        for j in 0..n {
                            if j == axis {
                                continue;
                            }
                            let frac = (idx[d] as f64 + 1.0) / (side as f64 + 1.0);
                            x[j] = (2.0 * frac - 1.0) * half_widths[j];
                            d += 1;
                        }
                        out.push(x);
                        let mut c = 0;
                        loop {
                            if c == n - 1 {
                                break;
                            }
                            idx[c] += 1;
                            if idx[c] < side {
                                break;
                            }
                            idx[c] = 0;
                            c += 1;
                        }
                        if c == n - 1 {
                            break;
                        }
                    }
                }
            }
        }
        _ if n == 2 => {
            for i in 0..count {
                let t = 2.0 * std::f64::consts::PI * (i as f64) / (count as f64);
                out.push(radial_boundary_point(dom, &[t.cos(), t.sin()]));
            }
        }
        _ if n == 3 => {
            let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
            for i in 0..count {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / (count as f64);
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = 2.0 * std::f64::consts::PI * (i as f64) / golden;
                out.push(radial_boundary_point(dom, &[r * phi.cos(), r * phi.sin(), z]));
            }
        }
        _ => {
            // n >= 4: deterministic low-discrepancy directions via a simple
            // lattice rule on the sphere
            let mut state = 0x9e3779b97f4a7c15u64;
            for _ in 0..count {
                let mut dir = vec![0.0; n];
                let mut norm = 0.0;
                for d in dir.iter_mut() {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let u = ((state >> 11) as f64) / ((1u64 << 53) as f64);
                    *d = 2.0 * u - 1.0;
                    norm += *d * *d;
                }
                if norm < 1e-12 {
                    dir[0] = 1.0;
                }
                out.push(radial_boundary_point(dom, &dir));
            }
        }
    }
    out
}

/// Signed distance to the boundary: positive inside, negative outside.
/// Exact for boxes and balls; Newton projection onto `G = 0` otherwise.
pub fn signed_distance(dom: &DomainSpec, x: &[f64]) -> Result<f64> {
    match &dom.shape {
        Shape::Ball { r } => {
            let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            Ok(r - norm)
        }
        Shape::Box { half_widths } => {
            let q: Vec<f64> = x
                .iter()
                .zip(half_widths)
                .map(|(xi, hw)| xi.abs() - hw)
                .collect();
            let inside_gap = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if inside_gap <= 0.0 {
                Ok(-inside_gap)
            } else {
                let out: f64 = q.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>().sqrt();
                Ok(-out)
            }
        }
        _ => {
            let y = project_to_boundary(dom, x)?;
            let dist = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            Ok(if level(dom, x) <= 0.0 { dist } else { -dist })
        }
    }
}

/// Nearest boundary point by damped Newton on the first-order system
/// `y − x = t·∇G(y)`, `G(y) = 0`, seeded from a coarse boundary scan.
fn project_to_boundary(dom: &DomainSpec, x: &[f64]) -> Result<Vec<f64>> {
    let n = dom.n;
    let norm2: f64 = x.iter().map(|v| v * v).sum();
    {
        // a point already on the boundary projects to itself; catching this
        // here keeps distance queries exact on high-aspect shapes where the
        // critical-point iteration below could settle elsewhere
        let g = level_gradient(dom, x);
        let gn: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gn > 1e-12 && level(dom, x).abs() / gn <= 1e-12 * (1.0 + norm2.sqrt()) {
            return Ok(x.to_vec());
        }
    }
    let mut seeds = boundary_samples(dom, if n == 2 { 128 } else { 256 });
    if norm2 > 1e-24 {
        seeds.push(radial_boundary_point(dom, x));
    }
    let mut best = seeds[0].clone();
    let mut best_d = f64::INFINITY;
    for s in &seeds {
        let d: f64 = x.iter().zip(s).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best_d {
            best_d = d;
            best = s.clone();
        }
    }
    let mut y = best;
    let g0 = level_gradient(dom, &y);
    let gn: f64 = g0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut t = x
        .iter()
        .zip(&y)
        .zip(&g0)
        .map(|((xi, yi), gi)| (yi - xi) * gi)
        .sum::<f64>()
        / (gn * gn).max(1e-300);

    let scale = 1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let res_norm = |y: &[f64], t: f64| -> f64 {
        let g = level_gradient(dom, y);
        let mut m: f64 = level(dom, y).abs();
        for i in 0..n {
            m = m.max((y[i] - x[i] - t * g[i]).abs());
        }
        m
    };
    let mut r = res_norm(&y, t);
    for _ in 0..80 {
        if r <= 1e-12 * scale {
            return Ok(y);
        }
        let g = level_gradient(dom, &y);
        let hg = level_hessian(dom, &y);
        // full system in (y, t)
        let m = n + 1;
        let mut jac = Mat::zeros(m);
        let mut rhs = vec![0.0; m];
        for i in 0..n {
            for j in 0..n {
                jac.set(i, j, (if i == j { 1.0 } else { 0.0 }) - t * hg.get(i, j));
            }
            jac.set(i, n, -g[i]);
            jac.set(n, i, g[i]);
            rhs[i] = -(y[i] - x[i] - t * g[i]);
        }
        rhs[n] = -level(dom, &y);
        let delta = solve_dense(&jac, &rhs)?;
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let y_try: Vec<f64> =
                y.iter().zip(&delta[..n]).map(|(v, d)| v + step * d).collect();
            let t_try = t + step * delta[n];
            let r_try = res_norm(&y_try, t_try);
            if r_try < r {
                y = y_try;
                t = t_try;
                r = r_try;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if r <= 1e-9 * scale {
        return Ok(y);
    }
    Err(Error::Numeric(format!(
        "boundary projection did not converge at x = {x:?} (residual {r:.3e})"
    )))
}

/// Orthonormal tangent basis columns for a unit normal.
fn tangent_basis(normal: &[f64]) -> Vec<Vec<f64>> {
    let n = normal.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for axis in 0..n {
        if basis.len() == n - 1 {
            break;
        }
        let mut v = vec![0.0; n];
        v[axis] = 1.0;
        let dot: f64 = v.iter().zip(normal).map(|(a, b)| a * b).sum();
        for (vi, ni) in v.iter_mut().zip(normal) {
            *vi -= dot * ni;
        }
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= dot * bi;
            }
        }
        let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for vi in &mut v {
                *vi /= norm;
            }
            basis.push(v);
        }
    }
    basis
}

/// Principal curvatures of the boundary at `x_b` with respect to the inward
/// normal (positive for convex domains), ascending.
pub fn boundary_curvatures(dom: &DomainSpec, x_b: &[f64]) -> Result<BoundaryPoint> {
    let n = dom.n;
    if x_b.len() != n {
        return Err(Error::Argument("boundary point dimension mismatch".into()));
    }
    if let Shape::Box { half_widths } = &dom.shape {
        if level(dom, x_b).abs() > 1e-10 {
            return Err(Error::Argument(format!(
                "point is not on the boundary (face gap {:.3e})",
                level(dom, x_b)
            )));
        }
        let mut touching: Vec<usize> = Vec::new();
        for i in 0..n {
            if (x_b[i].abs() - half_widths[i]).abs() <= 1e-10 {
                touching.push(i);
            }
        }
        if touching.len() != 1 {
            return Err(Error::Argument(
                "box boundary curvature is undefined on edges and corners".into(),
            ));
        }
        let axis = touching[0];
        let mut normal = vec![0.0; n];
        normal[axis] = -x_b[axis].signum();
        return Ok(BoundaryPoint {
            x: x_b.to_vec(),
            inward_normal: normal,
            kappa_b: vec![0.0; n - 1],
        });
    }
    let g = level_gradient(dom, x_b);
    let gn: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    if gn < 1e-12 {
        return Err(Error::Numeric("degenerate boundary gradient".into()));
    }
    // membership via the level value; dividing by the gradient norm turns it
    // into a distance estimate that stays honest on very anisotropic shapes
    let d_est = level(dom, x_b).abs() / gn;
    if d_est > 1e-10 {
        return Err(Error::Argument(format!(
            "point is not on the boundary (distance estimate {d_est:.3e})"
        )));
    }
    let outward: Vec<f64> = g.iter().map(|v| v / gn).collect();
    let hess = level_hessian(dom, x_b);
    let basis = tangent_basis(&outward);
    let m = n - 1;
    let shape_op = Mat::from_fn(m, |i, j| {
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += basis[i][a] * hess.get(a, b) * basis[j][b];
            }
        }
        s / gn
    })
    .symmetrize();
    let kappa_b = if m == 1 {
        vec![shape_op.get(0, 0)]
    } else {
        jacobi_eigen(&shape_op)?.0
    };
    Ok(BoundaryPoint {
        x: x_b.to_vec(),
        inward_normal: outward.iter().map(|v| -v).collect(),
        kappa_b,
    })
}

/// Searches for a uniform `K` such that `(κ^b(x), K) ∈ Γ̃_k` at all sampled
/// boundary points, doubling `K` from 1 up to `k_max`.
pub fn eta_k_convexity(
    dom: &DomainSpec,
    k: usize,
    k_max: f64,
    samples: usize,
) -> Result<ConvexityCertificate> {
    let n = dom.n;
    if k == 0 || k >= n {
        return Err(Error::Argument(format!(
            "convexity certificate requires 1 <= k < n, got k = {k}, n = {n}"
        )));
    }
    if !(k_max >= 1.0) {
        return Err(Error::Argument("K_max must be at least 1".into()));
    }
    if !dom.smooth_boundary() {
        return Ok(ConvexityCertificate {
            certified: false,
            k_found: None,
            smooth_boundary: false,
            samples: 0,
        });
    }
    let pts = boundary_samples(dom, samples.max(1));
    let mut curvatures = Vec::with_capacity(pts.len());
    for p in &pts {
        curvatures.push(boundary_curvatures(dom, p)?.kappa_b);
    }
    let mut big_k = 1.0;
    loop {
        let mut all_ok = true;
        for kb in &curvatures {
            let mut tuple = kb.clone();
            tuple.push(big_k);
            let kap = EigenTuple::new(tuple)?;
            if !in_tilde_gamma(k, &kap) {
                all_ok = false;
                break;
            }
        }
        if all_ok {
            return Ok(ConvexityCertificate {
                certified: true,
                k_found: Some(big_k),
                smooth_boundary: true,
                samples: pts.len(),
            });
        }
        big_k *= 2.0;
        if big_k > k_max {
            return Ok(ConvexityCertificate {
                certified: false,
                k_found: None,
                smooth_boundary: true,
                samples: pts.len(),
            });
        }
    }
}
