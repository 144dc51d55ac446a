//! Solver for the Dirichlet problem of Hessian-quotient curvature equations
//! on spacelike graphs in Minkowski space.
//!
//! A graph `u: Ω ⊂ ℝⁿ → ℝ` with `|Du| < 1` is spacelike in `ℝ^{n,1}`. Writing
//! `κ = (κ_1, …, κ_n)` for its principal curvatures, the equation prescribes
//!
//! ```text
//! σ_k(λ) / σ_l(λ) = ψ(x, u),   λ_i = Σ_{j≠i} κ_j,   u = 0 on ∂Ω,
//! ```
//!
//! where `σ_m` is the m-th elementary symmetric polynomial and `λ` collects the
//! eigenvalues of the (0,2)-tensor `Hg − h` against the induced metric. The
//! admissible class is the cone `Γ̃_k = {κ : λ(κ) ∈ Γ_k}` on which the operator
//! is elliptic and `(σ_k/σ_l)^{1/(k−l)}` is concave.
//!
//! Module map:
//!
//! * [`symfun`]: elementary symmetric polynomials, quotients, Garding cones.
//! * [`geometry`]: spacelike graph jets, induced metric, curvature matrix.
//! * [`operator`]: operator value and linearization (`G^{ij}`, `G^s`).
//! * [`domain`]: domain shapes, signed distance, boundary curvatures, the
//!   (η,k)-convexity certificate.
//! * [`grid`]: lattice over the domain, Shortley–Weller stencils, assembly of
//!   the discrete residual and Jacobian.
//! * [`solver`]: damped Newton with homotopy continuation in ψ, sub-solution
//!   verification, linear solves.
//! * [`expr`]: the small expression language for ψ(x, u) and graph inputs.
//! * [`props`]: seeded randomized invariant suites shared by tests and the
//!   `verify-props` command.
//! * [`cli`]: command-line front end (`solve`, `curvature`, `certify-domain`,
//!   `verify-props`).

pub mod cli;
pub mod domain;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod operator;
pub mod pgm;
pub mod props;
pub mod solver;
pub mod sparse;
pub mod symfun;

pub use error::{Error, Result};
