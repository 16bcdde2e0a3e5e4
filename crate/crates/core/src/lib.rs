// Validation deliberately uses `!(x > 0)`-style negated comparisons:
// they fail on NaN, where the positive forms would accept it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Upwind finite differences on Shishkin meshes for two-parameter
//! singularly perturbed boundary value problems
//!
//! ```text
//!     -eps u''(x) + mu a(x) u'(x) + b(x) u(x) = f(x)   on (0, 1),
//!     u(0) = u0,  u(1) = u1,
//! ```
//!
//! with `0 < eps <= 1`, `0 <= mu <= 1`, `a >= alpha > 0`, and
//! `b >= gamma a > 0`. Solutions develop boundary layers at both ends
//! whose widths depend on the balance between `eps` and `mu`; the
//! library classifies that balance ([`problem`]), builds piecewise
//! uniform layer-resolving meshes ([`mesh`]), discretizes with the
//! first-order upwind scheme and solves the resulting M-matrix systems
//! ([`operators`], [`solver`]), and measures convergence in a scaled C1
//! norm that sees the layer derivatives ([`norms`], [`experiments`]).
//! A closed-form reference solution for the built-in constant
//! coefficient test problem lives in [`reference`].
//!
//! Everything is generic over the scalar type via [`Real`] (implemented
//! for `f32` and `f64`); the `*64` aliases below pin the common choice.

pub mod error;
pub mod experiments;
pub mod mesh;
pub mod norms;
pub mod operators;
pub mod problem;
pub mod reference;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision aliases for the main types.
pub type Problem64 = problem::Problem<f64>;
pub type Regime64 = problem::Regime<f64>;
pub type Grid64 = mesh::Grid<f64>;
pub type Mesh64 = mesh::Mesh<f64>;
pub type TridiagonalSystem64 = operators::TridiagonalSystem<f64>;
pub type DiscreteSolution64 = solver::DiscreteSolution<f64>;
pub type Decomposition64 = solver::Decomposition<f64>;
pub type BarrierReport64 = solver::BarrierReport<f64>;
pub type ExactTestSolution64 = reference::ExactTestSolution<f64>;
pub type ErrorRecord64 = norms::ErrorRecord<f64>;
pub type SweepConfig64 = experiments::SweepConfig<f64>;
pub type SweepResult64 = experiments::SweepResult<f64>;
