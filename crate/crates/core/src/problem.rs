//! Problem definition and the parameter regime derived from it.
//!
//! A problem is the two-parameter reaction-convection-diffusion equation
//!
//! ```text
//!     -eps u''(x) + mu a(x) u'(x) + b(x) u(x) = f(x),   x in (0,1),
//!     u(0) = u0,  u(1) = u1,
//! ```
//!
//! with `0 < eps <= 1`, `0 <= mu <= 1`, and coefficient lower bounds
//! `a(x) >= alpha > 0` and `b(x) >= gamma a(x)` with `gamma > 0`. Both
//! endpoints carry boundary layers; their widths (and therefore the mesh
//! and the error weights) are governed by the regime quantities computed
//! in [`classify`].

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::Grid;
use crate::scalar::Real;

/// A coefficient or source term. Closures must be pure: sweeps evaluate
/// them from several threads and at arbitrary points of `[0,1]`.
pub type Coefficient<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Two-parameter singularly perturbed boundary value problem on `(0,1)`.
#[derive(Clone)]
pub struct Problem<T: Real> {
    /// Convection coefficient `a(x)`, bounded below by `alpha`.
    pub a: Coefficient<T>,
    /// Reaction coefficient `b(x)`, bounded below by `gamma * a(x)`.
    pub b: Coefficient<T>,
    /// Source term `f(x)`.
    pub f: Coefficient<T>,
    /// Diffusion parameter, `0 < eps <= 1`.
    pub eps: T,
    /// Convection parameter, `0 <= mu <= 1`.
    pub mu: T,
    /// Lower bound for `a`.
    pub alpha: T,
    /// Lower bound for `b / a`.
    pub gamma: T,
    /// Left boundary value `u(0)`.
    pub u0: T,
    /// Right boundary value `u(1)`.
    pub u1: T,
    /// Solution of the reduced problem `mu a v' + b v = f`, `v(0) = ?`
    /// dropped, when known in closed form. Only consulted by the
    /// convection-dominated decomposition split; may be `None`.
    pub reduced: Option<Coefficient<T>>,
}

impl<T: Real> Problem<T> {
    /// Builds a problem from callable coefficients, checking parameter
    /// ranges (but not the pointwise coefficient bounds, which are sampled
    /// later on the mesh by [`Problem::validate_on`]).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: Coefficient<T>,
        b: Coefficient<T>,
        f: Coefficient<T>,
        eps: T,
        mu: T,
        alpha: T,
        gamma: T,
        u0: T,
        u1: T,
    ) -> Result<Self> {
        check_parameters(eps, mu)?;
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::Domain(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(Error::Domain(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        Ok(Problem {
            a,
            b,
            f,
            eps,
            mu,
            alpha,
            gamma,
            u0,
            u1,
            reduced: None,
        })
    }

    /// Constant-coefficient convenience constructor: `a = a0`, `b = b0`,
    /// `f = f0`, with the sharp bounds `alpha = a0`, `gamma = b0 / a0`.
    /// The reduced solution is the constant `f0 / b0`.
    pub fn constant(a0: T, b0: T, f0: T, eps: T, mu: T, u0: T, u1: T) -> Result<Self> {
        if !(a0 > T::zero()) || !(b0 > T::zero()) {
            return Err(Error::Domain(format!(
                "constant coefficients must be positive, got a = {a0}, b = {b0}"
            )));
        }
        let problem = Problem::new(
            Arc::new(move |_| a0),
            Arc::new(move |_| b0),
            Arc::new(move |_| f0),
            eps,
            mu,
            a0,
            b0 / a0,
            u0,
            u1,
        )?;
        Ok(problem.with_reduced(Arc::new(move |_| f0 / b0)))
    }

    /// Attaches a closed-form reduced solution (used by the default
    /// convection-dominated boundary split).
    pub fn with_reduced(mut self, v: Coefficient<T>) -> Self {
        self.reduced = Some(v);
        self
    }

    /// Samples the coefficient bounds at the grid nodes. `a < alpha` or
    /// `b < gamma a` anywhere is a hard error; the report carries softer
    /// diagnostics (equality in `b >= gamma a`, and whether the stability
    /// margin `b - 2 mu max|a'| > 0` holds under a finite-difference
    /// estimate of `a'`).
    pub fn validate_on(&self, grid: &Grid<T>) -> Result<ValidationReport<T>> {
        let nodes = grid.nodes();
        let mut min_a = T::infinity();
        let mut min_margin = T::infinity();
        let mut gamma_equality = false;
        for &x in nodes {
            let ax = (self.a)(x);
            let bx = (self.b)(x);
            if !ax.is_finite() || !bx.is_finite() {
                return Err(Error::Numerical(format!(
                    "coefficient evaluation not finite at x = {x}"
                )));
            }
            if ax < self.alpha {
                return Err(Error::Domain(format!(
                    "a({x}) = {ax} violates a >= alpha = {}",
                    self.alpha
                )));
            }
            let margin = bx - self.gamma * ax;
            if margin < T::zero() {
                return Err(Error::Domain(format!(
                    "b({x}) = {bx} violates b >= gamma a = {}",
                    self.gamma * ax
                )));
            }
            if margin == T::zero() {
                gamma_equality = true;
            }
            min_a = min_a.min(ax);
            min_margin = min_margin.min(margin);
        }
        // One-sided difference quotients of a over the grid estimate max|a'|.
        let mut max_da = T::zero();
        for i in 1..=grid.n() {
            let da = ((self.a)(grid.node(i)) - (self.a)(grid.node(i - 1))) * grid.inv_step(i);
            max_da = max_da.max(da.abs());
        }
        let two = T::of(2.0);
        let mut stability_margin_ok = true;
        for &x in nodes {
            if (self.b)(x) - two * self.mu * max_da <= T::zero() {
                stability_margin_ok = false;
                break;
            }
        }
        Ok(ValidationReport {
            gamma_equality,
            stability_margin_ok,
            min_a,
            min_margin,
        })
    }
}

/// Outcome of sampling the coefficient bounds on a grid.
#[derive(Debug, Clone, Copy)]
pub struct ValidationReport<T> {
    /// `b(x) = gamma a(x)` exactly at some node. The theory wants strict
    /// inequality; equality is accepted but worth reporting.
    pub gamma_equality: bool,
    /// Whether `b(x) - 2 mu max|a'| > 0` at all nodes, with `max|a'|`
    /// estimated by first-order difference quotients. A `false` here does
    /// not block the solve; it flags that the convection-dominated
    /// stability assumption could not be confirmed numerically.
    pub stability_margin_ok: bool,
    /// Smallest sampled `a(x)`.
    pub min_a: T,
    /// Smallest sampled `b(x) - gamma a(x)`.
    pub min_margin: T,
}

/// Which term dominates the layer structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeKind {
    /// `alpha mu^2 <= gamma eps`: both layers of reaction-diffusion width.
    ReactionDominated,
    /// `alpha mu^2 > gamma eps`: layers of widths `eps/mu` and `1/mu`.
    ConvectionDominated,
}

/// Layer parameters derived from `(eps, mu, alpha, gamma)`.
///
/// All downstream geometry — mesh transition points, error weights,
/// barrier decay rates — is a function of this struct alone.
#[derive(Debug, Clone, Copy)]
pub struct Regime<T> {
    /// Diffusion parameter the regime was computed for.
    pub eps: T,
    /// Convection parameter the regime was computed for.
    pub mu: T,
    /// `max(1, alpha mu^2 / (gamma eps))`.
    pub theta: T,
    /// Left layer decay rate `max(1, sqrt(gamma alpha / (theta eps)) / 2)`.
    pub rho_l: T,
    /// Right layer decay rate `max(1, sqrt(theta gamma alpha / eps))`.
    pub rho_r: T,
    /// Left weight transition `(2 / rho_l) ln rho_l` (zero when clamped).
    pub tau_l: T,
    /// Right weight transition `(2 / rho_r) ln rho_r` (zero when clamped).
    pub tau_r: T,
    /// Dominant balance.
    pub kind: RegimeKind,
}

fn check_parameters<T: Real>(eps: T, mu: T) -> Result<()> {
    if !(eps > T::zero() && eps <= T::one()) {
        return Err(Error::Domain(format!("eps must lie in (0, 1], got {eps}")));
    }
    if !(mu >= T::zero() && mu <= T::one()) {
        return Err(Error::Domain(format!("mu must lie in [0, 1], got {mu}")));
    }
    Ok(())
}

/// Computes the regime quantities for a problem.
pub fn classify<T: Real>(problem: &Problem<T>) -> Result<Regime<T>> {
    check_parameters(problem.eps, problem.mu)?;
    let one = T::one();
    let two = T::of(2.0);
    let (eps, mu) = (problem.eps, problem.mu);
    let ratio = problem.alpha * mu * mu / (problem.gamma * eps);
    let theta = one.max(ratio);
    let kind = if ratio > one {
        RegimeKind::ConvectionDominated
    } else {
        RegimeKind::ReactionDominated
    };
    let rho_l = one.max((problem.gamma * problem.alpha / (theta * eps)).sqrt() / two);
    let rho_r = one.max((theta * problem.gamma * problem.alpha / eps).sqrt());
    let tau = |rho: T| {
        if rho > one {
            two / rho * rho.ln()
        } else {
            T::zero()
        }
    };
    Ok(Regime {
        eps,
        mu,
        theta,
        rho_l,
        rho_r,
        tau_l: tau(rho_l),
        tau_r: tau(rho_r),
        kind,
    })
}

/// Weight `chi(x)` of the scaled C1 norm: `sqrt(eps theta)` up to `tau_l`,
/// `sqrt(eps / theta)` from `1 - tau_r` on, and `1` between. The left
/// branch wins if the transition regions ever overlap.
pub fn chi_weight<T: Real>(x: T, regime: &Regime<T>) -> Result<T> {
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::Domain(format!(
            "chi weight evaluated outside [0,1]: x = {x}"
        )));
    }
    let w = if x <= regime.tau_l {
        (regime.eps * regime.theta).sqrt()
    } else if x >= T::one() - regime.tau_r {
        (regime.eps / regime.theta).sqrt()
    } else {
        T::one()
    };
    Ok(w)
}
