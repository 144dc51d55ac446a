//! Cartesian-lattice discretization of the Dirichlet problem: node
//! classification against the domain, Shortley–Weller difference stencils,
//! jet extraction, and assembly of the discrete residual and Jacobian.
//!
//! The lattice is anchored at the domain center (a node sits exactly at the
//! origin), so grids at h and h/2 share nodes. Boundary data `u = 0` is
//! folded into the stencils; the unknown set is exactly the non-exterior
//! nodes, ordered lexicographically (axis 0 slowest).

use crate::domain::{level, DomainSpec};
use crate::error::{Error, Result};
use crate::geometry::{spacelike_margin, GraphJet};
use crate::linalg::Mat;
use crate::operator::{ellipticity_margin, linearize_guarded};
use crate::sparse::Csr;
use crate::symfun::QuotientSpec;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Penalty weight for the inadmissible-node surrogate residual.
pub(crate) const CONE_PENALTY: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Interior,
    NearBoundary,
    Exterior,
}

/// One arm of a difference stencil: fraction of the full step at which the
/// arm ends (1 for a regular lattice neighbor) and the unknown it references
/// (None when the arm ends on the boundary, where u = 0).
#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub theta: f64,
    pub col: Option<usize>,
}

/// Per-node difference stencil: axis rays `[minus, plus]` per dimension and
/// diagonal rays `[++, +-, -+, --]` per axis pair (a < b).
#[derive(Debug, Clone)]
pub struct Stencil {
    pub axis: Vec<[Ray; 2]>,
    pub diag: Vec<[Ray; 4]>,
}

type WeightList = Vec<(Option<usize>, f64)>;

/// Precomputed derivative weights at a node: per-axis gradient weights and
/// upper-triangle Hessian weights (pair order (0,0), (0,1), ..., (n-1,n-1)).
#[derive(Debug, Clone)]
struct JetWeights {
    grad: Vec<WeightList>,
    hess: Vec<WeightList>,
}

/// Discrete scalar field over the unknown (non-exterior) nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldU {
    pub values: Vec<f64>,
}

impl FieldU {
    pub fn zeros(n: usize) -> FieldU {
        FieldU { values: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `self + t·delta`.
    pub fn stepped(&self, delta: &[f64], t: f64) -> FieldU {
        FieldU {
            values: self
                .values
                .iter()
                .zip(delta)
                .map(|(u, d)| u + t * d)
                .collect(),
        }
    }

    pub fn sup_diff(&self, other: &FieldU) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// The assembled nonlinear system at one iterate.
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    pub residual: Vec<f64>,
    pub jacobian: Csr,
    pub admissible_mask: Vec<bool>,
    pub spacelike_margin_min: f64,
    pub min_ellipticity: f64,
    pub max_tilde_w: f64,
}

/// Right-hand side ψ(x, z) with its z-derivative, addressed per node so
/// homotopy blends can use per-node base values.
pub trait Psi: Sync {
    fn at_node(&self, node: usize, x: &[f64], z: f64) -> Result<(f64, f64)>;
}

/// Constant ψ.
pub struct PsiConst(pub f64);

impl Psi for PsiConst {
    fn at_node(&self, _node: usize, _x: &[f64], _z: f64) -> Result<(f64, f64)> {
        Ok((self.0, 0.0))
    }
}

/// Per-node table of ψ values (z-independent).
pub struct PsiTable(pub Vec<f64>);

impl Psi for PsiTable {
    fn at_node(&self, node: usize, _x: &[f64], _z: f64) -> Result<(f64, f64)> {
        Ok((self.0[node], 0.0))
    }
}

#[derive(Debug, Clone)]
pub struct Grid {
    n: usize,
    h: f64,
    dims: Vec<usize>,
    /// Coordinate of lattice index 0 along each axis.
    origin: Vec<f64>,
    class: Vec<NodeClass>,
    unknown_of_node: Vec<Option<usize>>,
    node_of_unknown: Vec<usize>,
    positions: Vec<Vec<f64>>,
    stencils: Vec<Stencil>,
    weights: Vec<JetWeights>,
    interior: Vec<bool>,
}

fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

fn pair_index(n: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < n);
    // pairs (0,1)..(0,n-1),(1,2)..
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

/// Upper-triangle index for (i ≤ j) including the diagonal.
fn tri_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    i * n - i * (i + 1) / 2 + j
}

impl Grid {
    /// Builds the lattice, classifies nodes, and precomputes stencils with
    /// boundary fractions found by bisection on the shape function.
    pub fn build(dom: &DomainSpec, h: f64) -> Result<Grid> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Config("grid spacing must be positive".into()));
        }
        let across = (2.0 * dom.inradius() / h).floor() as usize + 1;
        if across < 8 {
            return Err(Error::Config(format!(
                "grid too coarse: {across} nodes across the smallest width (need >= 8)"
            )));
        }
        Grid::build_unchecked(dom, h)
    }

    /// Lattice construction without the resolution gate (coarse diagnostics).
    #[cfg_attr(not(test), allow(dead_code))]
    pub(crate) fn build_unchecked(dom: &DomainSpec, h: f64) -> Result<Grid> {
        let n = dom.n;
        let hw = dom.half_widths();
        let half_counts: Vec<usize> =
            hw.iter().map(|w| (w / h).floor() as usize + 1).collect();
        let dims: Vec<usize> = half_counts.iter().map(|m| 2 * m + 1).collect();
        let origin: Vec<f64> = half_counts.iter().map(|m| -(*m as f64) * h).collect();
        let num_nodes: usize = dims.iter().product();

        let position = |mi: &[usize]| -> Vec<f64> {
            mi.iter()
                .zip(&origin)
                .map(|(i, o)| o + *i as f64 * h)
                .collect()
        };
        let decode = |flat: usize| -> Vec<usize> {
            let mut mi = vec![0usize; n];
            let mut rest = flat;
            for d in (0..n).rev() {
                mi[d] = rest % dims[d];
                rest /= dims[d];
            }
            mi
        };
        let encode = |mi: &[usize]| -> usize {
            let mut flat = 0usize;
            for d in 0..n {
                flat = flat * dims[d] + mi[d];
            }
            flat
        };

        // inside test up to a hairline tolerance; exactly-on-boundary nodes
        // count as exterior and carry the Dirichlet value
        let lv_tol = 1e-12;
        let mut lv = vec![0.0f64; num_nodes];
        for (flat, l) in lv.iter_mut().enumerate() {
            *l = level(dom, &position(&decode(flat)));
        }
        let inside = |flat: usize| lv[flat] < -lv_tol;

        let mut class = vec![NodeClass::Exterior; num_nodes];
        let offsets: Vec<Vec<isize>> = cube_offsets(n);
        for flat in 0..num_nodes {
            if !inside(flat) {
                continue;
            }
            let mi = decode(flat);
            let mut interior = true;
            'probe: for off in &offsets {
                let mut nb = vec![0usize; n];
                for d in 0..n {
                    let t = mi[d] as isize + off[d];
                    if t < 0 || t as usize >= dims[d] {
                        interior = false;
                        break 'probe;
                    }
                    nb[d] = t as usize;
                }
                // neighbor must lie in the closed domain
                if lv[encode(&nb)] > lv_tol {
                    interior = false;
                    break;
                }
            }
            class[flat] = if interior { NodeClass::Interior } else { NodeClass::NearBoundary };
        }

        let mut unknown_of_node = vec![None; num_nodes];
        let mut node_of_unknown = Vec::new();
        for flat in 0..num_nodes {
            if class[flat] != NodeClass::Exterior {
                unknown_of_node[flat] = Some(node_of_unknown.len());
                node_of_unknown.push(flat);
            }
        }

        let theta_of = |x: &[f64], dir: &[f64], target_level: f64| -> f64 {
            if target_level <= lv_tol {
                return 1.0;
            }
            let probe = |t: f64| -> f64 {
                let y: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi + t * h * di).collect();
                level(dom, &y)
            };
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if probe(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        };

        let mut positions = Vec::with_capacity(node_of_unknown.len());
        let mut stencils = Vec::with_capacity(node_of_unknown.len());
        for &flat in &node_of_unknown {
            let mi = decode(flat);
            let x = position(&mi);
            let ray_to = |dir: &[isize]| -> Ray {
                let mut nb = vec![0usize; n];
                for d in 0..n {
                    nb[d] = (mi[d] as isize + dir[d]) as usize;
                }
                let tflat = encode(&nb);
                match unknown_of_node[tflat] {
                    Some(col) => Ray { theta: 1.0, col: Some(col) },
                    None => {
                        let dirf: Vec<f64> = dir.iter().map(|v| *v as f64).collect();
                        Ray { theta: theta_of(&x, &dirf, lv[tflat]), col: None }
                    }
                }
            };
            let mut axis = Vec::with_capacity(n);
            for d in 0..n {
                let mut minus = vec![0isize; n];
                minus[d] = -1;
                let mut plus = vec![0isize; n];
                plus[d] = 1;
                axis.push([ray_to(&minus), ray_to(&plus)]);
            }
            let mut diag = Vec::with_capacity(pair_count(n));
            for a in 0..n {
                for b in (a + 1)..n {
                    let mut rays = [Ray { theta: 1.0, col: None }; 4];
                    for (slot, (sa, sb)) in
                        [(1, 1), (1, -1), (-1, 1), (-1, -1)].iter().enumerate()
                    {
                        let mut dir = vec![0isize; n];
                        dir[a] = *sa;
                        dir[b] = *sb;
                        rays[slot] = ray_to(&dir);
                    }
                    diag.push(rays);
                }
            }
            positions.push(x);
            stencils.push(Stencil { axis, diag });
        }

        let weights = stencils
            .iter()
            .enumerate()
            .map(|(p, st)| build_weights(n, h, p, st))
            .collect();
        let interior = node_of_unknown
            .iter()
            .map(|&flat| class[flat] == NodeClass::Interior)
            .collect();

        Ok(Grid {
            n,
            h,
            dims,
            origin,
            class,
            unknown_of_node,
            node_of_unknown,
            positions,
            stencils,
            weights,
            interior,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_nodes(&self) -> usize {
        self.class.len()
    }

    pub fn num_unknowns(&self) -> usize {
        self.node_of_unknown.len()
    }

    pub fn node_class(&self, flat: usize) -> NodeClass {
        self.class[flat]
    }

    pub fn unknown_at(&self, flat: usize) -> Option<usize> {
        self.unknown_of_node[flat]
    }

    pub fn node_of_unknown(&self, p: usize) -> usize {
        self.node_of_unknown[p]
    }

    pub fn position_of_unknown(&self, p: usize) -> &[f64] {
        &self.positions[p]
    }

    pub fn node_position(&self, flat: usize) -> Vec<f64> {
        let mut mi = vec![0usize; self.n];
        let mut rest = flat;
        for d in (0..self.n).rev() {
            mi[d] = rest % self.dims[d];
            rest /= self.dims[d];
        }
        mi.iter()
            .zip(&self.origin)
            .map(|(i, o)| o + *i as f64 * self.h)
            .collect()
    }

    pub fn is_interior_unknown(&self, p: usize) -> bool {
        self.interior[p]
    }

    pub fn stencil(&self, p: usize) -> &Stencil {
        &self.stencils[p]
    }

    /// Samples a function at the unknown nodes.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> FieldU {
        FieldU { values: self.positions.iter().map(|x| f(x)).collect() }
    }

    fn value_of(&self, u: &FieldU, col: Option<usize>) -> f64 {
        match col {
            Some(c) => u.values[c],
            None => 0.0,
        }
    }

    /// Second-order jet of the field at unknown `p` from the precomputed
    /// stencil weights (exact on affine and quadratic data).
    pub fn extract_jet(&self, u: &FieldU, p: usize) -> Result<GraphJet> {
        let n = self.n;
        let w = &self.weights[p];
        let mut du = vec![0.0; n];
        for d in 0..n {
            du[d] = w.grad[d]
                .iter()
                .map(|(col, wt)| wt * self.value_of(u, *col))
                .sum();
        }
        let mut d2u = Mat::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = w.hess[tri_index(n, i, j)]
                    .iter()
                    .map(|(col, wt)| wt * self.value_of(u, *col))
                    .sum();
                d2u.set(i, j, v);
                d2u.set(j, i, v);
            }
        }
        GraphJet::new(self.positions[p].clone(), u.values[p], du, d2u)
    }
}

/// All nonzero offsets in {-1,0,1}^n: the full centered-stencil probe set.
fn cube_offsets(n: usize) -> Vec<Vec<isize>> {
    let mut out = Vec::new();
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut off = vec![0isize; n];
        let mut rest = code;
        for o in off.iter_mut() {
            *o = (rest % 3) as isize - 1;
            rest /= 3;
        }
        if off.iter().any(|v| *v != 0) {
            out.push(off);
        }
    }
    out
}

/// Unequal-arm first/second derivative weights on a 3-point line stencil.
/// Both are exact on quadratics restricted to the line.
fn line_weights(theta_m: f64, theta_p: f64, step: f64) -> ([f64; 3], [f64; 3]) {
    let denom = theta_p * theta_m * (theta_p + theta_m);
    // order: [minus, center, plus]
    let d1 = [
        -theta_p * theta_p / (denom * step),
        (theta_p * theta_p - theta_m * theta_m) / (denom * step),
        theta_m * theta_m / (denom * step),
    ];
    let d2 = [
        2.0 * theta_p / (denom * step * step),
        -2.0 * (theta_p + theta_m) / (denom * step * step),
        2.0 * theta_m / (denom * step * step),
    ];
    (d1, d2)
}

fn build_weights(n: usize, h: f64, p: usize, st: &Stencil) -> JetWeights {
    let center = Some(p);
    let mut grad = Vec::with_capacity(n);
    let mut axis_d2 = Vec::with_capacity(n);
    for d in 0..n {
        let [m, pl] = st.axis[d];
        let (d1, d2) = line_weights(m.theta, pl.theta, h);
        grad.push(vec![(m.col, d1[0]), (center, d1[1]), (pl.col, d1[2])]);
        axis_d2.push(vec![(m.col, d2[0]), (center, d2[1]), (pl.col, d2[2])]);
    }
    let mut hess = vec![Vec::new(); n * (n + 1) / 2];
    for i in 0..n {
        hess[tri_index(n, i, i)] = axis_d2[i].clone();
    }
    for a in 0..n {
        for b in (a + 1)..n {
            let rays = &st.diag[pair_index(n, a, b)];
            // u_ab = (D_vv - D_ww)/2 along the diagonals v = e_a + e_b
            // (rays ++/--) and w = e_a - e_b (rays +-/-+); the step along a
            // diagonal is h per component, so the line step is h·√2
            let diag_step = h * std::f64::consts::SQRT_2;
            let (_, dvv) = line_weights(rays[3].theta, rays[0].theta, diag_step);
            let (_, dww) = line_weights(rays[2].theta, rays[1].theta, diag_step);
            let mut wl: WeightList = Vec::with_capacity(5);
            wl.push((rays[3].col, 0.5 * dvv[0]));
            wl.push((rays[0].col, 0.5 * dvv[2]));
            wl.push((rays[2].col, -0.5 * dww[0]));
            wl.push((rays[1].col, -0.5 * dww[2]));
            wl.push((center, 0.5 * (dvv[1] - dww[1])));
            hess[tri_index(n, a, b)] = wl;
        }
    }
    JetWeights { grad, hess }
}

struct RowResult {
    residual: f64,
    entries: BTreeMap<usize, f64>,
    admissible: bool,
    margin: f64,
    tilde_w: f64,
    ellipticity: f64,
}

/// Assembles the discrete residual `G(jet) − ψ(x, u)` and its Jacobian over
/// the unknowns. Inadmissible nodes get the cone-projection surrogate
/// residual `G(κ_proj) − ψ − μ·dist` and are flagged in `admissible_mask`.
pub fn assemble(
    spec: &QuotientSpec,
    grid: &Grid,
    u: &FieldU,
    psi: &dyn Psi,
) -> Result<DiscreteSystem> {
    let n = grid.n;
    if u.len() != grid.num_unknowns() {
        return Err(Error::Argument("field size does not match grid".into()));
    }
    let rows: Vec<Result<RowResult>> = (0..grid.num_unknowns())
        .into_par_iter()
        .map(|p| -> Result<RowResult> {
            let jet = grid.extract_jet(u, p)?;
            let margin = spacelike_margin(&jet);
            let sl = linearize_guarded(spec, &jet)?;
            let (psi_val, psi_z) = psi.at_node(p, &jet.x, jet.u)?;
            let residual = sl.lin.value - CONE_PENALTY * sl.cone_dist - psi_val;
            let w = &grid.weights[p];
            let mut entries: BTreeMap<usize, f64> = BTreeMap::new();
            let mut add = |col: Option<usize>, wt: f64| {
                if let Some(c) = col {
                    *entries.entry(c).or_insert(0.0) += wt;
                }
            };
            for i in 0..n {
                for j in i..n {
                    let fac = if i == j { 1.0 } else { 2.0 };
                    let g = fac * sl.lin.gij.get(i, j);
                    for (col, wt) in &w.hess[tri_index(n, i, j)] {
                        add(*col, g * wt);
                    }
                }
            }
            for s in 0..n {
                let g = sl.lin.gs[s];
                for (col, wt) in &w.grad[s] {
                    add(*col, g * wt);
                }
            }
            add(Some(p), -psi_z);
            let tilde_w = if margin > 0.0 {
                let p2: f64 = jet.du.iter().map(|v| v * v).sum();
                1.0 / (1.0 - p2).sqrt()
            } else {
                f64::INFINITY
            };
            let ellipticity = ellipticity_margin(&sl.lin)?;
            Ok(RowResult {
                residual,
                entries,
                admissible: sl.admissible,
                margin,
                tilde_w,
                ellipticity,
            })
        })
        .collect();

    // deterministic error selection: first failing node in index order
    let mut ok_rows = Vec::with_capacity(rows.len());
    for (p, r) in rows.into_iter().enumerate() {
        match r {
            Ok(row) => ok_rows.push(row),
            Err(e) => {
                return Err(Error::Assembly { node: grid.node_of_unknown(p), source: Box::new(e) })
            }
        }
    }

    let mut residual = Vec::with_capacity(ok_rows.len());
    let mut admissible_mask = Vec::with_capacity(ok_rows.len());
    let mut margin_min = f64::INFINITY;
    let mut ell_min = f64::INFINITY;
    let mut tw_max: f64 = 0.0;
    let mut rows_sparse = Vec::with_capacity(ok_rows.len());
    for row in ok_rows {
        residual.push(row.residual);
        admissible_mask.push(row.admissible);
        margin_min = margin_min.min(row.margin);
        ell_min = ell_min.min(row.ellipticity);
        tw_max = tw_max.max(row.tilde_w);
        rows_sparse.push(row.entries.into_iter().collect::<Vec<_>>());
    }
    let jacobian = Csr::from_rows(residual.len(), rows_sparse)?;
    Ok(DiscreteSystem {
        residual,
        jacobian,
        admissible_mask,
        spacelike_margin_min: margin_min,
        min_ellipticity: ell_min,
        max_tilde_w: tw_max,
    })
}
