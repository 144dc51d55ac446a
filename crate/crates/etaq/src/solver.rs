//! Homotopy continuation in the right-hand side with damped Newton steps,
//! plus the linear sub-solver, subsolution verification, and two-run
//! comparison diagnostics.
//!
//! The homotopy is ψ_t = (1−t)·ψ₀ + t·ψ_target with ψ₀ the operator value
//! of the initial field, so t = 0 starts exactly on the path. Newton steps
//! are accepted only when the iterate stays uniformly spacelike and the
//! squared residual norm satisfies an Armijo decrease; inadmissible nodes
//! are handled by the penalty surrogate inside assembly and must be gone
//! at convergence.

use crate::domain::{radial_boundary_point, DomainSpec};
use crate::error::{Error, Result};
use crate::expr::{diff_z, eval, Expr};
use crate::grid::{assemble, DiscreteSystem, FieldU, Grid, Psi};
use crate::operator;
use crate::sparse::{banded_solve, bicgstab, ilu0};
use crate::symfun::QuotientSpec;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ContinuationConfig {
    /// Initial number of homotopy stages (first step is 1/t_steps_init).
    pub t_steps_init: usize,
    /// Absolute sup-norm residual tolerance. Callers that want the
    /// ψ-relative default should scale 1e−9 by max(1, sup|ψ|).
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Armijo slope parameter on the squared residual norm.
    pub armijo_slope: f64,
    /// Line-search backtracking factor.
    pub backtrack: f64,
    /// Smallest admissible line-search step.
    pub min_step: f64,
    /// Required spacelike margin 1 − |Du| at every accepted iterate.
    pub theta_margin: f64,
    /// Relative tolerance for the inner linear solves.
    pub linear_tol: f64,
    /// Cumulative t-step halvings before the continuation gives up.
    pub max_halvings: usize,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            t_steps_init: 8,
            newton_tol: 1e-9,
            max_newton: 30,
            armijo_slope: 1e-4,
            backtrack: 0.5,
            min_step: (2.0f64).powi(-20),
            theta_margin: 0.05,
            linear_tol: 1e-10,
            max_halvings: 20,
        }
    }
}

impl ContinuationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_steps_init == 0 || self.max_newton == 0 {
            return Err(Error::Config("iteration counts must be positive".into()));
        }
        if !(self.newton_tol > 0.0 && self.linear_tol > 0.0 && self.min_step > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !(self.theta_margin > 0.0 && self.theta_margin < 1.0) {
            return Err(Error::Config("theta_margin must lie in (0,1)".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) || self.armijo_slope <= 0.0 {
            return Err(Error::Config("invalid line-search parameters".into()));
        }
        Ok(())
    }
}

/// Outcome of a solve: the field plus convergence monitors. `converged`
/// implies the final residual is below tolerance, every node is admissible,
/// and the spacelike margin never dropped below `theta_margin`.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub converged: bool,
    /// One entry per homotopy stage: (t, newton iterations, final residual).
    pub t_trace: Vec<(f64, usize, f64)>,
    pub min_spacelike_margin: f64,
    pub min_ellipticity: f64,
    pub max_tilde_w: f64,
    #[serde(skip)]
    pub field: FieldU,
}

/// ψ given by a closed-form expression in x1..xn and z; the z-derivative is
/// taken symbolically.
pub struct PsiExpr {
    expr: Expr,
    dz: Expr,
}

impl PsiExpr {
    pub fn new(expr: Expr) -> PsiExpr {
        let dz = diff_z(&expr);
        PsiExpr { expr, dz }
    }
}

impl Psi for PsiExpr {
    fn at_node(&self, _node: usize, x: &[f64], z: f64) -> Result<(f64, f64)> {
        Ok((eval(&self.expr, x, z)?, eval(&self.dz, x, z)?))
    }
}

/// Convex blend (1−t)·base + t·target used by the continuation.
pub struct HomotopyPsi<'a> {
    pub base: &'a [f64],
    pub target: &'a dyn Psi,
    pub t: f64,
}

impl Psi for HomotopyPsi<'_> {
    fn at_node(&self, node: usize, x: &[f64], z: f64) -> Result<(f64, f64)> {
        let (tv, tz) = self.target.at_node(node, x, z)?;
        Ok(((1.0 - self.t) * self.base[node] + self.t * tv, self.t * tz))
    }
}

/// Operator value at every unknown node; errors identify the node.
pub fn operator_values(spec: &QuotientSpec, grid: &Grid, u: &FieldU) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(grid.num_unknowns());
    for p in 0..grid.num_unknowns() {
        let v = grid
            .extract_jet(u, p)
            .and_then(|jet| operator::evaluate(spec, &jet))
            .map_err(|e| Error::Assembly { node: grid.node_of_unknown(p), source: Box::new(e) })?;
        out.push(v);
    }
    Ok(out)
}

/// The quotient is positive on the admissible cone, so a non-positive ψ
/// value anywhere rules out admissible solutions up front.
fn check_psi_positive(psi: &dyn Psi, grid: &Grid, u: &FieldU) -> Result<f64> {
    let mut min = f64::INFINITY;
    for p in 0..grid.num_unknowns() {
        let (v, _) = psi.at_node(p, grid.position_of_unknown(p), u.values[p])?;
        min = min.min(v);
    }
    if min <= 0.0 {
        return Err(Error::Argument(format!(
            "psi must be positive: the curvature quotient is positive on the \
             admissible cone, but min sampled psi = {min:.6e}"
        )));
    }
    Ok(min)
}

/// Minimum of ψ_z over a deterministic sample of (node, z) pairs; a negative
/// result voids the uniqueness hypothesis and should be surfaced as a
/// warning by callers.
pub fn sample_psi_z_min(
    psi: &dyn Psi,
    grid: &Grid,
    z_lo: f64,
    samples: usize,
) -> Result<f64> {
    let m = grid.num_unknowns();
    let mut min = f64::INFINITY;
    for i in 0..samples {
        let p = (i.wrapping_mul(2654435761)) % m;
        let frac = ((i as f64) * 0.618_033_988_749_895).fract();
        let z = z_lo * frac;
        let (_, pz) = psi.at_node(p, grid.position_of_unknown(p), z)?;
        min = min.min(pz);
    }
    Ok(min)
}

/// Solves `J x = rhs` with preconditioned BiCGStab; on Krylov failure falls
/// back to direct banded elimination when the grid is planar (n = 2).
pub fn linear_solve(
    system: &DiscreteSystem,
    rhs: &[f64],
    linear_tol: f64,
    grid_dim: usize,
) -> Result<Vec<f64>> {
    let precond = ilu0(&system.jacobian).ok();
    match bicgstab(&system.jacobian, rhs, linear_tol, 1000, precond.as_ref()) {
        Ok(x) => Ok(x),
        Err(_) if grid_dim == 2 => banded_solve(&system.jacobian, rhs),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy)]
struct Monitors {
    margin: f64,
    ellipticity: f64,
    tilde_w: f64,
}

impl Monitors {
    fn new() -> Monitors {
        Monitors { margin: f64::INFINITY, ellipticity: f64::INFINITY, tilde_w: 0.0 }
    }

    fn update(&mut self, sys: &DiscreteSystem) {
        self.margin = self.margin.min(sys.spacelike_margin_min);
        self.ellipticity = self.ellipticity.min(sys.min_ellipticity);
        self.tilde_w = self.tilde_w.max(sys.max_tilde_w);
    }
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn norm2_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn is_converged(sys: &DiscreteSystem, tol: f64, theta: f64) -> bool {
    norm_inf(&sys.residual) <= tol
        && sys.admissible_mask.iter().all(|a| *a)
        && sys.spacelike_margin_min >= theta
}

struct NewtonOutcome {
    u: FieldU,
    iters: usize,
    res_inf: f64,
    converged: bool,
}

/// Damped Newton on the assembled residual starting from an already
/// assembled state. Linear-solver failures and line-search stagnation
/// produce a non-converged outcome rather than an error.
fn newton_core(
    spec: &QuotientSpec,
    grid: &Grid,
    psi: &dyn Psi,
    mut u: FieldU,
    mut sys: DiscreteSystem,
    cfg: &ContinuationConfig,
    mon: &mut Monitors,
) -> NewtonOutcome {
    mon.update(&sys);
    let mut iters = 0;
    while iters < cfg.max_newton {
        if is_converged(&sys, cfg.newton_tol, cfg.theta_margin) {
            let res_inf = norm_inf(&sys.residual);
            return NewtonOutcome { u, iters, res_inf, converged: true };
        }
        let rhs: Vec<f64> = sys.residual.iter().map(|r| -r).collect();
        let delta = match linear_solve(&sys, &rhs, cfg.linear_tol, grid.n()) {
            Ok(d) => d,
            Err(_) => break,
        };
        let phi0 = norm2_sq(&sys.residual);
        let mut t = 1.0;
        let mut accepted = None;
        while t >= cfg.min_step {
            let ut = u.stepped(&delta, t);
            if let Ok(st) = assemble(spec, grid, &ut, psi) {
                let armijo = norm2_sq(&st.residual) <= (1.0 - 2.0 * cfg.armijo_slope * t) * phi0;
                if st.spacelike_margin_min >= cfg.theta_margin && armijo {
                    accepted = Some((ut, st));
                    break;
                }
            }
            t *= cfg.backtrack;
        }
        match accepted {
            Some((ut, st)) => {
                u = ut;
                sys = st;
                mon.update(&sys);
                iters += 1;
            }
            None => break,
        }
    }
    let res_inf = norm_inf(&sys.residual);
    let converged = is_converged(&sys, cfg.newton_tol, cfg.theta_margin);
    NewtonOutcome { u, iters, res_inf, converged }
}

/// Newton solve at fixed ψ. Errors on non-positive ψ, a non-spacelike or
/// inadmissible-beyond-surrogate start, or an under-margin start; divergence
/// is reported through `converged = false` with the trace retained.
pub fn newton_solve(
    spec: &QuotientSpec,
    grid: &Grid,
    psi: &dyn Psi,
    u_init: &FieldU,
    cfg: &ContinuationConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    check_psi_positive(psi, grid, u_init)?;
    let sys0 = assemble(spec, grid, u_init, psi)?;
    if sys0.spacelike_margin_min < cfg.theta_margin {
        return Err(Error::NotSpacelike {
            margin: sys0.spacelike_margin_min,
            context: "initial iterate".into(),
        });
    }
    let mut mon = Monitors::new();
    let out = newton_core(spec, grid, psi, u_init.clone(), sys0, cfg, &mut mon);
    Ok(SolveReport {
        converged: out.converged,
        t_trace: vec![(1.0, out.iters, out.res_inf)],
        min_spacelike_margin: mon.margin,
        min_ellipticity: mon.ellipticity,
        max_tilde_w: mon.tilde_w,
        field: out.u,
    })
}

/// Continuation from `u0` (exact at t = 0 by construction) to ψ_target at
/// t = 1, halving the t-step on stage failure up to `cfg.max_halvings`
/// cumulative halvings. A failed continuation returns the last good field
/// with `converged = false`.
pub fn continuation_solve(
    spec: &QuotientSpec,
    grid: &Grid,
    psi_target: &dyn Psi,
    u0: &FieldU,
    cfg: &ContinuationConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    check_psi_positive(psi_target, grid, u0)?;
    let base = operator_values(spec, grid, u0)?;
    let mut mon = Monitors::new();

    // if u0 already solves the target system (identity homotopy or
    // manufactured data), report the single trivial stage
    let direct = assemble(spec, grid, u0, psi_target)?;
    if direct.spacelike_margin_min < cfg.theta_margin {
        return Err(Error::NotSpacelike {
            margin: direct.spacelike_margin_min,
            context: "initial iterate".into(),
        });
    }
    if is_converged(&direct, cfg.newton_tol, cfg.theta_margin) {
        mon.update(&direct);
        return Ok(SolveReport {
            converged: true,
            t_trace: vec![(1.0, 0, norm_inf(&direct.residual))],
            min_spacelike_margin: mon.margin,
            min_ellipticity: mon.ellipticity,
            max_tilde_w: mon.tilde_w,
            field: u0.clone(),
        });
    }

    let mut u = u0.clone();
    let mut t = 0.0;
    let mut dt = 1.0 / cfg.t_steps_init as f64;
    let mut halvings = 0usize;
    let mut trace: Vec<(f64, usize, f64)> = Vec::new();
    while t < 1.0 {
        let t_next = (t + dt).min(1.0);
        let hp = HomotopyPsi { base: &base, target: psi_target, t: t_next };
        let stage = assemble(spec, grid, &u, &hp)
            .map(|sys| newton_core(spec, grid, &hp, u.clone(), sys, cfg, &mut mon));
        match stage {
            Ok(out) if out.converged => {
                trace.push((t_next, out.iters, out.res_inf));
                u = out.u;
                t = t_next;
                dt = (dt * 2.0).min(0.5);
            }
            other => {
                halvings += 1;
                if halvings > cfg.max_halvings {
                    if let Ok(out) = other {
                        trace.push((t_next, out.iters, out.res_inf));
                    }
                    return Ok(SolveReport {
                        converged: false,
                        t_trace: trace,
                        min_spacelike_margin: mon.margin,
                        min_ellipticity: mon.ellipticity,
                        max_tilde_w: mon.tilde_w,
                        field: u,
                    });
                }
                dt *= 0.5;
            }
        }
    }
    Ok(SolveReport {
        converged: true,
        t_trace: trace,
        min_spacelike_margin: mon.margin,
        min_ellipticity: mon.ellipticity,
        max_tilde_w: mon.tilde_w,
        field: u,
    })
}

/// Checks the discrete subsolution property: operator value ≥ ψ − 1e−9 with
/// admissible jets at every unknown node. Boundary values are identically 0
/// by construction of `FieldU`. Returns (ok, worst violation ψ − value);
/// an inadmissible jet forces ok = false with infinite violation.
pub fn verify_subsolution(
    spec: &QuotientSpec,
    grid: &Grid,
    underline_u: &FieldU,
    psi: &dyn Psi,
) -> Result<(bool, f64)> {
    let mut worst = f64::NEG_INFINITY;
    let mut admissible = true;
    for p in 0..grid.num_unknowns() {
        let jet = grid.extract_jet(underline_u, p)?;
        let (psi_val, _) = psi.at_node(p, &jet.x, jet.u)?;
        match operator::evaluate(spec, &jet) {
            Ok(f) => worst = worst.max(psi_val - f),
            Err(Error::ConeViolation { .. }) => {
                admissible = false;
                worst = f64::INFINITY;
            }
            Err(Error::NotSpacelike { margin, .. }) => {
                return Err(Error::NotSpacelike {
                    margin,
                    context: format!(
                        "subsolution check at node {}",
                        grid.node_of_unknown(p)
                    ),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok((admissible && worst <= 1e-9, worst))
}

/// Pointwise ordering diagnostics between two converged runs on one grid.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonSummary {
    pub min_diff: f64,
    pub max_diff: f64,
    pub frac_a_le_b: f64,
}

pub fn comparison_check(a: &SolveReport, b: &SolveReport) -> Result<ComparisonSummary> {
    if a.field.len() != b.field.len() {
        return Err(Error::Argument("comparison requires matching grids".into()));
    }
    if !a.converged || !b.converged {
        return Err(Error::Argument("comparison requires two converged reports".into()));
    }
    let mut min_diff = f64::INFINITY;
    let mut max_diff = f64::NEG_INFINITY;
    let mut le = 0usize;
    for (ua, ub) in a.field.values.iter().zip(&b.field.values) {
        let d = ua - ub;
        min_diff = min_diff.min(d);
        max_diff = max_diff.max(d);
        if *ua <= *ub + 1e-15 {
            le += 1;
        }
    }
    Ok(ComparisonSummary {
        min_diff,
        max_diff,
        frac_a_le_b: le as f64 / a.field.len() as f64,
    })
}

/// Initial field chosen by the ρ-doubling search over hyperboloid caps.
#[derive(Debug, Clone)]
pub struct CapInit {
    pub field: FieldU,
    pub rho: f64,
    /// Whether the cap passed `verify_subsolution` (otherwise it is merely
    /// admissible and spacelike).
    pub verified_subsolution: bool,
    pub worst_violation: f64,
}

/// Hyperboloid cap u₀ = ρ(√(1+(s/ρ)²) − √(1+(R/ρ)²)) with R the inradius
/// and s the radial coordinate rescaled so the cap vanishes on ∂Ω (s = |x|
/// on balls). Tries ρ ∈ {1/4, ..., 8} by doubling and prefers a verified
/// subsolution, falling back to the first admissible spacelike cap.
pub fn hyperboloid_cap_init(
    spec: &QuotientSpec,
    dom: &DomainSpec,
    grid: &Grid,
    psi: &dyn Psi,
    theta_margin: f64,
) -> Result<CapInit> {
    let r_in = dom.inradius();
    let mut fallback: Option<CapInit> = None;
    for rho in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let field = grid.sample(|x| cap_value(dom, r_in, rho, x));
        let mut structural = true;
        for p in 0..grid.num_unknowns() {
            let ok = grid.extract_jet(&field, p).ok().and_then(|jet| {
                if crate::geometry::spacelike_margin(&jet) < theta_margin {
                    return None;
                }
                operator::evaluate(spec, &jet).ok()
            });
            if ok.is_none() {
                structural = false;
                break;
            }
        }
        if !structural {
            continue;
        }
        let (ok, worst) = verify_subsolution(spec, grid, &field, psi)?;
        if ok {
            return Ok(CapInit { field, rho, verified_subsolution: true, worst_violation: worst });
        }
        if fallback.is_none() {
            fallback =
                Some(CapInit { field, rho, verified_subsolution: false, worst_violation: worst });
        }
    }
    fallback.ok_or_else(|| {
        Error::Numeric(
            "no admissible spacelike hyperboloid cap found (rho in [0.25, 8])".into(),
        )
    })
}

fn cap_value(dom: &DomainSpec, r_in: f64, rho: f64, x: &[f64]) -> f64 {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let s = if r < 1e-14 {
        0.0
    } else {
        let dir: Vec<f64> = x.iter().map(|v| v / r).collect();
        let bd = radial_boundary_point(dom, &dir);
        let r_bd = bd.iter().map(|v| v * v).sum::<f64>().sqrt();
        r * r_in / r_bd
    };
    rho * ((1.0 + (s / rho).powi(2)).sqrt() - (1.0 + (r_in / rho).powi(2)).sqrt())
}
