//! Difference operators on nonuniform grids, upwind discretization, and
//! the tridiagonal direct solve.
//!
//! Mesh functions are plain slices `z` of length `n + 1` indexed like the
//! grid nodes. With `h_i = x_i - x_{i-1}` and `hbar_i = (x_{i+1} -
//! x_{i-1}) / 2`, the operators are
//!
//! ```text
//!   D+ z_i   = (z_{i+1} - z_i) / h_{i+1}
//!   D- z_i   = (z_i - z_{i-1}) / h_i
//!   d2 z_i   = (D+ z_i - D- z_i) / hbar_i
//!   d2h z_i  = [ (h_{i+1}/h_i) D+ z_i - (hbar_i/hbar_{i-1}) D- z_i ] / hbar_i
//! ```
//!
//! `d2h` (the rebalanced second difference) satisfies the exact algebraic
//! identity `d2h (D- z) = D- (d2 z)` on arbitrary grids, which is what
//! makes discrete derivative bounds transferable between operators; the
//! identity is exercised to rounding accuracy by the tests here and by
//! the acceptance suite.

use crate::error::{Error, Result};
use crate::mesh::Grid;
use crate::problem::Problem;
use crate::scalar::Real;

/// Forward difference `D+ z_i`, defined for `0 <= i <= n-1`.
#[inline]
pub fn d_plus<T: Real>(grid: &Grid<T>, z: &[T], i: usize) -> T {
    debug_assert_eq!(z.len(), grid.n() + 1);
    (z[i + 1] - z[i]) * grid.inv_step(i + 1)
}

/// Backward difference `D- z_i`, defined for `1 <= i <= n`.
#[inline]
pub fn d_minus<T: Real>(grid: &Grid<T>, z: &[T], i: usize) -> T {
    debug_assert_eq!(z.len(), grid.n() + 1);
    (z[i] - z[i - 1]) * grid.inv_step(i)
}

/// Central second difference `d2 z_i`, defined for `1 <= i <= n-1`.
#[inline]
pub fn delta2<T: Real>(grid: &Grid<T>, z: &[T], i: usize) -> T {
    (d_plus(grid, z, i) - d_minus(grid, z, i)) / grid.hbar(i)
}

/// Rebalanced second difference `d2h z_i`, defined for `2 <= i <= n-1`
/// (it reaches back to `x_{i-2}` through `hbar_{i-1}`).
#[inline]
pub fn delta2_hat<T: Real>(grid: &Grid<T>, z: &[T], i: usize) -> T {
    let ratio_plus = grid.step(i + 1) * grid.inv_step(i);
    let ratio_minus = grid.hbar(i) / grid.hbar(i - 1);
    (ratio_plus * d_plus(grid, z, i) - ratio_minus * d_minus(grid, z, i)) / grid.hbar(i)
}

/// Residual of the discrete product rule
/// `D-(p q)_i - p_i D- q_i - q_{i-1} D- p_i`, which vanishes identically;
/// returns the floating-point leftovers for `1 <= i <= n`.
pub fn product_rule_residual<T: Real>(grid: &Grid<T>, p: &[T], q: &[T], i: usize) -> T {
    let pq_minus = (p[i] * q[i] - p[i - 1] * q[i - 1]) * grid.inv_step(i);
    pq_minus - p[i] * d_minus(grid, q, i) - q[i - 1] * d_minus(grid, p, i)
}

/// Tridiagonal linear system for the interior unknowns `U_1 .. U_{n-1}`,
/// with the boundary values already folded into the right-hand side.
///
/// Row `i` (for unknown `U_i`) reads
/// `sub[i-1] U_{i-1} + diag[i-1] U_i + sup[i-1] U_{i+1} = rhs[i-1]`,
/// where the `sub` entry of the first row and the `sup` entry of the last
/// row are kept for inspection (M-matrix checks) but already accounted
/// for in `rhs`.
#[derive(Debug, Clone)]
pub struct TridiagonalSystem<T> {
    pub sub: Vec<T>,
    pub diag: Vec<T>,
    pub sup: Vec<T>,
    pub rhs: Vec<T>,
    /// Left boundary value `U_0`.
    pub bc0: T,
    /// Right boundary value `U_n`.
    pub bc1: T,
}

impl<T: Real> TridiagonalSystem<T> {
    /// Number of interior unknowns.
    #[inline]
    pub fn unknowns(&self) -> usize {
        self.diag.len()
    }

    /// First row violating the M-matrix sign pattern
    /// (`sub <= 0`, `sup < 0`, `diag > |sub| + |sup|`), if any.
    pub fn first_m_matrix_violation(&self) -> Option<usize> {
        (0..self.unknowns()).find(|&k| {
            !(self.sub[k] <= T::zero()
                && self.sup[k] < T::zero()
                && self.diag[k] > self.sub[k].abs() + self.sup[k].abs())
        })
    }
}

/// Assembles the upwind system `-eps d2 U + mu a D- U + b U = source` on
/// the grid with Dirichlet data `bc0`, `bc1`, validating the coefficient
/// bounds along the way. Row `i` of the operator is
///
/// ```text
///   sub_i  = -eps / (h_i hbar_i) - mu a(x_i) / h_i
///   diag_i =  eps / (h_i hbar_i) + eps / (h_{i+1} hbar_i) + mu a(x_i) / h_i + b(x_i)
///   sup_i  = -eps / (h_{i+1} hbar_i)
/// ```
///
/// so each row sums to `b(x_i)` exactly in real arithmetic.
pub fn assemble_system<T: Real>(
    problem: &Problem<T>,
    grid: &Grid<T>,
    source: &dyn Fn(T) -> T,
    bc0: T,
    bc1: T,
) -> Result<TridiagonalSystem<T>> {
    problem.validate_on(grid)?;
    let n = grid.n();
    if n < 2 {
        return Err(Error::Config(
            "upwind assembly needs at least 2 intervals".into(),
        ));
    }
    let m = n - 1;
    let mut sub = Vec::with_capacity(m);
    let mut diag = Vec::with_capacity(m);
    let mut sup = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let eps = problem.eps;
    let mu = problem.mu;
    for i in 1..=m {
        let x = grid.node(i);
        let inv_hbar = T::one() / grid.hbar(i);
        let diffusion_minus = eps * grid.inv_step(i) * inv_hbar;
        let diffusion_plus = eps * grid.inv_step(i + 1) * inv_hbar;
        let convection = mu * (problem.a)(x) * grid.inv_step(i);
        sub.push(-diffusion_minus - convection);
        diag.push(diffusion_minus + diffusion_plus + convection + (problem.b)(x));
        sup.push(-diffusion_plus);
        rhs.push(source(x));
    }
    rhs[0] -= sub[0] * bc0;
    rhs[m - 1] -= sup[m - 1] * bc1;
    Ok(TridiagonalSystem {
        sub,
        diag,
        sup,
        rhs,
        bc0,
        bc1,
    })
}

/// Upwind assembly with the problem's own source term and boundary data.
pub fn assemble_upwind<T: Real>(
    problem: &Problem<T>,
    grid: &Grid<T>,
) -> Result<TridiagonalSystem<T>> {
    assemble_system(problem, grid, &*problem.f, problem.u0, problem.u1)
}

/// Solves the tridiagonal system by the Thomas algorithm (LU without
/// pivoting — safe for the diagonally dominant M-matrices assembled
/// here) and returns the full mesh function including boundary values.
///
/// Fails with a numerical error if a pivot vanishes, changes sign
/// relative to its diagonal entry, or goes non-finite.
pub fn thomas_solve<T: Real>(system: &TridiagonalSystem<T>) -> Result<Vec<T>> {
    let m = system.unknowns();
    if m == 0 {
        return Err(Error::Config("tridiagonal system has no unknowns".into()));
    }
    let mut upper = vec![T::zero(); m];
    let mut carry = vec![T::zero(); m];
    let mut pivot = system.diag[0];
    check_pivot(pivot, system.diag[0], 0)?;
    upper[0] = system.sup[0] / pivot;
    carry[0] = system.rhs[0] / pivot;
    for k in 1..m {
        pivot = system.diag[k] - system.sub[k] * upper[k - 1];
        check_pivot(pivot, system.diag[k], k)?;
        upper[k] = system.sup[k] / pivot;
        carry[k] = (system.rhs[k] - system.sub[k] * carry[k - 1]) / pivot;
    }
    let mut u = vec![T::zero(); m + 2];
    u[0] = system.bc0;
    u[m + 1] = system.bc1;
    u[m] = carry[m - 1];
    for k in (0..m - 1).rev() {
        u[k + 1] = carry[k] - upper[k] * u[k + 2];
    }
    Ok(u)
}

fn check_pivot<T: Real>(pivot: T, diag: T, row: usize) -> Result<()> {
    if !pivot.is_finite() || pivot == T::zero() || pivot.signum() != diag.signum() {
        return Err(Error::Numerical(format!(
            "elimination lost the pivot in row {row}: {pivot}"
        )));
    }
    Ok(())
}

/// Applies the discrete operator `(-eps d2 + mu a D- + b) z` at interior
/// node `i`; useful for residual checks.
pub fn apply_operator<T: Real>(problem: &Problem<T>, grid: &Grid<T>, z: &[T], i: usize) -> T {
    let x = grid.node(i);
    -problem.eps * delta2(grid, z, i)
        + problem.mu * (problem.a)(x) * d_minus(grid, z, i)
        + (problem.b)(x) * z[i]
}
