//! The built-in test problem and its closed-form solution.
//!
//! The problem is `-eps u'' + mu u' + u = x` on `(0,1)` with `u(0) = 1`,
//! `u(1) = 0` (so `a = b = 1`, `alpha = gamma = 1`). Its solution is
//!
//! ```text
//!   u(x) = A e^{-m1 (1-x) / (2 eps)} + B e^{m2 x / (2 eps)} + x - mu,
//!   m1 = mu + sqrt(mu^2 + 4 eps),   m2 = mu - sqrt(mu^2 + 4 eps),
//! ```
//!
//! with `A`, `B` fixed by the boundary conditions. Both exponentials are
//! written with nonpositive exponents only, so evaluation never
//! overflows; deep in the layers they underflow harmlessly to zero.
//! `m2` is computed as `-4 eps / m1` to dodge the cancellation
//! `mu - sqrt(mu^2 + 4 eps)` when `mu^2` dominates `4 eps`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::scalar::Real;

/// Name of the built-in problem with a closed-form solution.
pub const BENCHMARK_PROBLEM: &str = "benchmark";

/// The built-in test problem for a given parameter pair.
pub fn benchmark_problem<T: Real>(eps: T, mu: T) -> Result<Problem<T>> {
    let one = T::one();
    let problem = Problem::new(
        Arc::new(move |_| one),
        Arc::new(move |_| one),
        Arc::new(|x| x),
        eps,
        mu,
        one,
        one,
        one,
        T::zero(),
    )?;
    // Reduced problem mu v' + v = x has the bounded solution v = x - mu.
    Ok(problem.with_reduced(Arc::new(move |x| x - mu)))
}

/// Looks up a problem by name. Only [`BENCHMARK_PROBLEM`] is registered.
pub fn builtin_problem<T: Real>(name: &str, eps: T, mu: T) -> Result<Problem<T>> {
    match name {
        BENCHMARK_PROBLEM => benchmark_problem(eps, mu),
        other => Err(Error::Config(format!(
            "unknown builtin problem {other:?}; available: {BENCHMARK_PROBLEM:?}"
        ))),
    }
}

/// Closed-form solution of the built-in problem, with derivatives.
#[derive(Debug, Clone, Copy)]
pub struct ExactTestSolution<T> {
    pub eps: T,
    pub mu: T,
    /// Positive characteristic root `mu + sqrt(mu^2 + 4 eps)`.
    pub m1: T,
    /// Negative characteristic root, computed as `-4 eps / m1`.
    pub m2: T,
    /// Amplitude of the right-layer mode `e^{-m1 (1-x) / (2 eps)}`.
    pub coef_a: T,
    /// Amplitude of the left-layer mode `e^{m2 x / (2 eps)}`.
    pub coef_b: T,
}

impl<T: Real> ExactTestSolution<T> {
    pub fn new(eps: T, mu: T) -> Result<Self> {
        // Parameter validation is shared with the problem constructor.
        let _ = benchmark_problem::<T>(eps, mu)?;
        let one = T::one();
        let two = T::of(2.0);
        let four = T::of(4.0);
        let disc = (mu * mu + four * eps).sqrt();
        let m1 = mu + disc;
        let m2 = -four * eps / m1;
        // Boundary-mode values q1 = e^{-m1/(2 eps)}, q2 = e^{m2/(2 eps)};
        // both exponents are negative. The denominator q1 q2 - 1 is
        // computed from exp(-disc/eps), which stays below e^{-2} for all
        // admissible parameters, so the subtraction never cancels.
        let q1 = (-m1 / (two * eps)).exp();
        let q2 = (m2 / (two * eps)).exp();
        let den = (-disc / eps).exp() - one;
        let coef_a = ((one + mu) * q2 + one - mu) / den;
        let coef_b = ((mu - one) * q1 - one - mu) / den;
        Ok(ExactTestSolution {
            eps,
            mu,
            m1,
            m2,
            coef_a,
            coef_b,
        })
    }

    #[inline]
    fn modes(&self, x: T) -> (T, T) {
        let two_eps = T::of(2.0) * self.eps;
        let right = (-self.m1 * (T::one() - x) / two_eps).exp();
        let left = (self.m2 * x / two_eps).exp();
        (right, left)
    }

    /// `u(x)` for `x` in `[0, 1]`.
    pub fn u(&self, x: T) -> T {
        self.check(x);
        let (right, left) = self.modes(x);
        self.coef_a * right + self.coef_b * left + x - self.mu
    }

    /// `u'(x)`.
    pub fn du(&self, x: T) -> T {
        self.check(x);
        let (right, left) = self.modes(x);
        let two_eps = T::of(2.0) * self.eps;
        self.coef_a * (self.m1 / two_eps) * right
            + self.coef_b * (self.m2 / two_eps) * left
            + T::one()
    }

    /// `u''(x)`.
    pub fn d2u(&self, x: T) -> T {
        self.check(x);
        let (right, left) = self.modes(x);
        let two_eps = T::of(2.0) * self.eps;
        let r1 = self.m1 / two_eps;
        let r2 = self.m2 / two_eps;
        self.coef_a * r1 * r1 * right + self.coef_b * r2 * r2 * left
    }

    /// Residual `-eps u'' + mu u' + u - x` at `x`, together with the
    /// magnitude of the largest term entering it (for relative checks:
    /// inside the layers the individual terms grow like `1/eps` while
    /// their sum stays zero).
    pub fn ode_residual(&self, x: T) -> (T, T) {
        let diffusion = -self.eps * self.d2u(x);
        let convection = self.mu * self.du(x);
        let reaction = self.u(x);
        let residual = diffusion + convection + reaction - x;
        let scale = diffusion
            .abs()
            .max(convection.abs())
            .max(reaction.abs())
            .max(x.abs())
            .max(T::one());
        (residual, scale)
    }

    #[inline]
    fn check(&self, x: T) {
        assert!(
            x >= T::zero() && x <= T::one(),
            "exact solution evaluated outside [0,1]"
        );
    }
}
