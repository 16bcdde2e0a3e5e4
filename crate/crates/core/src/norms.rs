//! Error measurement in the scaled C1 norm.
//!
//! The discrete solution is extended to `[0, 1]` by piecewise linear
//! interpolation `Ubar`; its derivative is taken left-continuous (the
//! slope of the interval `(x_{i-1}, x_i]`). Errors against the exact
//! solution are measured on an `n_fine`-interval Shishkin mesh built for
//! the *same* parameter regime, as
//!
//! ```text
//!   E = max_fine chi |u' - Ubar'|  +  max_fine |u - Ubar|,
//! ```
//!
//! where `chi` is the layer-adapted weight from [`crate::problem`] (the
//! unweighted derivative blows up like `1/eps` inside the layers, so only
//! the weighted quantity converges). The node `x = 0` is excluded from
//! the derivative maximum: the left-continuous convention has no interval
//! to its left.

use crate::error::{Error, Result};
use crate::mesh::{build_mesh, transition_points, Grid};
use crate::problem::{chi_weight, Regime};
use crate::scalar::Real;
use crate::solver::DiscreteSolution;

/// Piecewise linear extension of nodal values, with a left-continuous
/// derivative.
#[derive(Debug, Clone, Copy)]
pub struct LinearInterpolant<'a, T> {
    grid: &'a Grid<T>,
    values: &'a [T],
}

impl<'a, T: Real> LinearInterpolant<'a, T> {
    pub fn new(grid: &'a Grid<T>, values: &'a [T]) -> Self {
        assert_eq!(values.len(), grid.n() + 1, "one value per node required");
        LinearInterpolant { grid, values }
    }

    /// Index `i` of the interval `(x_{i-1}, x_i]` containing `x`, with
    /// `x = 0` assigned to the first interval.
    #[inline]
    fn interval(&self, x: T) -> usize {
        debug_assert!(
            x >= T::zero() && x <= T::one(),
            "interpolant evaluated outside [0,1]"
        );
        self.grid.nodes().partition_point(|&node| node < x).max(1)
    }

    /// Value `Ubar(x)`; exact (bitwise) at the nodes.
    pub fn eval(&self, x: T) -> T {
        let i = self.interval(x);
        if x == self.grid.node(i) {
            return self.values[i];
        }
        self.values[i - 1] + self.slope(i) * (x - self.grid.node(i - 1))
    }

    /// Left-continuous derivative `Ubar'(x)`: the slope over
    /// `(x_{i-1}, x_i]`.
    pub fn deriv(&self, x: T) -> T {
        self.slope(self.interval(x))
    }

    /// Value and derivative with a single interval lookup.
    pub fn eval_and_deriv(&self, x: T) -> (T, T) {
        let i = self.interval(x);
        let slope = self.slope(i);
        let value = if x == self.grid.node(i) {
            self.values[i]
        } else {
            self.values[i - 1] + slope * (x - self.grid.node(i - 1))
        };
        (value, slope)
    }

    #[inline]
    fn slope(&self, i: usize) -> T {
        (self.values[i] - self.values[i - 1]) * self.grid.inv_step(i)
    }
}

/// One row of the error harness: a parameter pair, a mesh size, and the
/// measured error components.
#[derive(Debug, Clone, Copy)]
pub struct ErrorRecord<T> {
    pub eps: T,
    pub mu: T,
    pub n: usize,
    /// Scaled C1 error `e_flux + e_sup`.
    pub e_total: T,
    /// `max |u - Ubar|` over the fine mesh.
    pub e_sup: T,
    /// `max chi |u' - Ubar'|` over the fine mesh (excluding `x = 0`).
    pub e_flux: T,
    /// Scaled nodal flux errors `max chi |D-(U - u)|` by region:
    /// `(0, tau_l]`, `(tau_l, 1 - tau_r]`, `(1 - tau_r, 1]`.
    pub flux_left: T,
    pub flux_mid: T,
    pub flux_right: T,
}

impl<T: Real> ErrorRecord<T> {
    pub const CSV_HEADER: &'static str =
        "eps_exponent,mu_exponent,n,e_total,e_sup,e_flux,flux_left,flux_mid,flux_right";

    /// CSV row matching [`Self::CSV_HEADER`]. Parameters are written as
    /// base-2 exponents (the sweep sets are dyadic), rounded only in
    /// display for non-dyadic values.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            format_exponent(self.eps),
            format_exponent(self.mu),
            self.n,
            self.e_total,
            self.e_sup,
            self.e_flux,
            self.flux_left,
            self.flux_mid,
            self.flux_right
        )
    }
}

fn format_exponent<T: Real>(value: T) -> String {
    let e = value.log2();
    if e.fract() == T::zero() && e.abs() < T::of(1e6) {
        format!("{}", e.to_i64().expect("small integral exponent"))
    } else {
        format!("{e}")
    }
}

/// Measures the discrete solution against an exact solution in the
/// scaled C1 norm, on an `n_fine`-interval Shishkin mesh for the same
/// regime. `n_fine` must be a multiple of 4 and at least `4 n`.
pub fn scaled_c1_error<T: Real>(
    solution: &DiscreteSolution<T>,
    exact_u: &dyn Fn(T) -> T,
    exact_du: &dyn Fn(T) -> T,
    n_fine: usize,
) -> Result<ErrorRecord<T>> {
    let regime = &solution.regime;
    let n = solution.mesh.n();
    if n_fine < 4 * n {
        return Err(Error::Config(format!(
            "fine mesh ({n_fine}) must have at least 4x the intervals of the solution mesh ({n})"
        )));
    }
    let (sigma_l, sigma_r) = transition_points(n_fine, regime)?;
    let fine = build_mesh(n_fine, sigma_l, sigma_r)?;
    let interp = LinearInterpolant::new(solution.mesh.grid(), &solution.u);
    let mut e_sup = T::zero();
    let mut e_flux = T::zero();
    for (k, &y) in fine.nodes().iter().enumerate() {
        let (value, slope) = interp.eval_and_deriv(y);
        e_sup = e_sup.max((exact_u(y) - value).abs());
        if k > 0 {
            let weighted = chi_weight(y, regime)? * (exact_du(y) - slope).abs();
            e_flux = e_flux.max(weighted);
        }
    }
    let exact_nodes: Vec<T> = solution.mesh.nodes().iter().map(|&x| exact_u(x)).collect();
    let (flux_left, flux_mid, flux_right) = nodal_flux_errors(solution, &exact_nodes, regime);
    Ok(ErrorRecord {
        eps: regime.eps,
        mu: regime.mu,
        n,
        e_total: e_flux + e_sup,
        e_sup,
        e_flux,
        flux_left,
        flux_mid,
        flux_right,
    })
}

/// Scaled backward-difference errors `chi(x_i) |D-(U - u)(x_i)|`,
/// maximized separately over the three weight regions
/// `(0, tau_l]`, `(tau_l, 1 - tau_r]`, `(1 - tau_r, 1]`.
/// Empty regions report zero.
pub fn nodal_flux_errors<T: Real>(
    solution: &DiscreteSolution<T>,
    exact_nodes: &[T],
    regime: &Regime<T>,
) -> (T, T, T) {
    let grid = solution.mesh.grid();
    let n = grid.n();
    assert_eq!(
        exact_nodes.len(),
        n + 1,
        "one exact value per node required"
    );
    let weight_left = (regime.eps * regime.theta).sqrt();
    let weight_right = (regime.eps / regime.theta).sqrt();
    let right_edge = T::one() - regime.tau_r;
    let mut maxima = (T::zero(), T::zero(), T::zero());
    for i in 1..=n {
        let diff_prev = solution.u[i - 1] - exact_nodes[i - 1];
        let diff_here = solution.u[i] - exact_nodes[i];
        let d = ((diff_here - diff_prev) * grid.inv_step(i)).abs();
        let x = grid.node(i);
        if x <= regime.tau_l {
            maxima.0 = maxima.0.max(weight_left * d);
        } else if x <= right_edge {
            maxima.1 = maxima.1.max(d);
        } else {
            maxima.2 = maxima.2.max(weight_right * d);
        }
    }
    maxima
}

/// Observed convergence orders `p = log2(e_n / e_{2n})` from a sequence
/// of `(n, error)` pairs at consecutively doubled `n`. The final `n` has
/// no successor, and zero errors make the quotient meaningless; both
/// yield `None`.
pub fn convergence_orders<T: Real>(errors: &[(usize, T)]) -> Result<Vec<(usize, Option<T>)>> {
    for pair in errors.windows(2) {
        if pair[1].0 != 2 * pair[0].0 {
            return Err(Error::Config(format!(
                "convergence orders need consecutively doubled sizes, got {} then {}",
                pair[0].0, pair[1].0
            )));
        }
    }
    if let Some(&(n, e)) = errors.iter().find(|&&(_, e)| e < T::zero()) {
        return Err(Error::Config(format!("negative error {e} at n = {n}")));
    }
    Ok(errors
        .iter()
        .enumerate()
        .map(|(k, &(n, e))| {
            let order = errors.get(k + 1).and_then(|&(_, e_next)| {
                if e > T::zero() && e_next > T::zero() {
                    Some((e / e_next).log2())
                } else {
                    None
                }
            });
            (n, order)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Grid;
    use crate::problem::classify;
    use crate::reference::{benchmark_problem, ExactTestSolution};
    use crate::solver::solve;

    fn uniform_grid(n: usize) -> Grid<f64> {
        Grid::from_nodes((0..=n).map(|i| i as f64 / n as f64).collect()).unwrap()
    }

    #[test]
    fn interpolant_reproduces_parabola_samples() {
        // g = x^2 on h = 1/4: on (0.5, 0.75] the chord has slope 1.25,
        // so Ubar(0.6) = 0.25 + 1.25 * 0.1 = 0.375.
        let g = uniform_grid(4);
        let values: Vec<f64> = g.nodes().iter().map(|&x| x * x).collect();
        let interp = LinearInterpolant::new(&g, &values);
        assert!((interp.eval(0.6) - 0.375).abs() < 1e-15);
        assert!((interp.deriv(0.6) - 1.25).abs() < 1e-15);
        // Left continuity: at the node 0.5 the slope is the one from the
        // interval (0.25, 0.5].
        assert!((interp.deriv(0.5) - 0.75).abs() < 1e-15);
        assert!((interp.deriv(0.5 + 1e-12) - 1.25).abs() < 1e-15);
        // x = 0 uses the first interval.
        assert_eq!(interp.deriv(0.0), 0.25);
    }

    #[test]
    fn interpolant_is_exact_at_nodes() {
        let g = Grid::from_nodes(vec![0.0, 0.1, 0.3, 0.7, 1.0]).unwrap();
        let values = vec![0.3, -0.2, 0.7, 0.123456789, -1.5];
        let interp = LinearInterpolant::new(&g, &values);
        for (i, &x) in g.nodes().iter().enumerate() {
            assert_eq!(interp.eval(x), values[i], "node {i}");
        }
    }

    #[test]
    fn interpolant_reproduces_linear_functions() {
        let g = Grid::from_nodes(vec![0.0, 0.13, 0.35, 0.8, 1.0]).unwrap();
        let values: Vec<f64> = g.nodes().iter().map(|&x| 3.0 * x - 0.7).collect();
        let interp = LinearInterpolant::new(&g, &values);
        for k in 0..=20 {
            let x = k as f64 / 20.0;
            assert!((interp.eval(x) - (3.0 * x - 0.7)).abs() < 1e-14);
            assert!((interp.deriv(x) - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn error_record_csv_round_trip() {
        let rec = ErrorRecord {
            eps: 2f64.powi(-10),
            mu: 2f64.powi(-4),
            n: 64,
            e_total: 0.723,
            e_sup: 0.1,
            e_flux: 0.623,
            flux_left: 0.01,
            flux_mid: 0.02,
            flux_right: 0.03,
        };
        assert_eq!(rec.csv_row(), "-10,-4,64,0.723,0.1,0.623,0.01,0.02,0.03");
        assert_eq!(
            ErrorRecord::<f64>::CSV_HEADER.split(',').count(),
            rec.csv_row().split(',').count()
        );
    }

    #[test]
    fn fine_mesh_must_be_finer() {
        let p = benchmark_problem::<f64>(2f64.powi(-8), 2f64.powi(-2)).unwrap();
        let exact = ExactTestSolution::new(p.eps, p.mu).unwrap();
        let sol = solve(&p, 64).unwrap();
        assert!(scaled_c1_error(&sol, &|x| exact.u(x), &|x| exact.du(x), 128).is_err());
        assert!(scaled_c1_error(&sol, &|x| exact.u(x), &|x| exact.du(x), 256).is_ok());
    }

    #[test]
    fn exact_nodal_values_leave_only_interpolation_error() {
        // Feeding the exact solution's nodal values makes e_sup the pure
        // interpolation error, which decays like n^-2 ln^2 n — an order
        // faster than the n^-1-ish discretization error, so at n = 512
        // it sits far below it.
        let eps = 2f64.powi(-20);
        let mu = 2f64.powi(-4);
        let p = benchmark_problem::<f64>(eps, mu).unwrap();
        let exact = ExactTestSolution::new(eps, mu).unwrap();
        let mut sol = solve(&p, 512).unwrap();
        let discrete = scaled_c1_error(&sol, &|x| exact.u(x), &|x| exact.du(x), 4096).unwrap();
        sol.u = sol.mesh.nodes().iter().map(|&x| exact.u(x)).collect();
        let interpolation = scaled_c1_error(&sol, &|x| exact.u(x), &|x| exact.du(x), 4096).unwrap();
        assert!(interpolation.e_sup < 0.2 * discrete.e_sup);
    }

    /// Measures the benchmark problem at the given parameters against
    /// the frozen reference error, failing with both values printed.
    fn check_reference_error(eps: f64, mu: f64, n: usize, expected: f64, rel_tol: f64) {
        let p = benchmark_problem::<f64>(eps, mu).unwrap();
        let exact = ExactTestSolution::new(eps, mu).unwrap();
        let sol = solve(&p, n).unwrap();
        let rec = scaled_c1_error(&sol, &|x| exact.u(x), &|x| exact.du(x), 8192).unwrap();
        let deviation = (rec.e_total - expected) / expected;
        assert!(
            deviation.abs() <= rel_tol,
            "e_total = {:.6e}, reference {expected:.2e}, off by {:+.1}%",
            rec.e_total,
            100.0 * deviation
        );
    }

    #[test]
    fn matches_frozen_reference_error_small_eps() {
        // Frozen oracle for the strong-layer regime, cross-checked with an
        // independent dense-solve pipeline to all printed digits.
        check_reference_error(2f64.powi(-10), 2f64.powi(-4), 64, 7.23e-01, 0.05);
    }

    #[test]
    fn matches_frozen_reference_error_vanishing_eps() {
        // Frozen oracle for the vanishing-eps regime. Known red: faithful
        // measurement gives ~6.29e-2 here, 35% above the reference, and
        // even the most favorable evaluation convention tried (dropping
        // both fine-mesh endpoints from the flux maximum) stays ~10%
        // above. Kept at the stated tolerance rather than widened; the
        // README records the analysis.
        check_reference_error(2f64.powi(-40), 2f64.powi(-4), 2048, 4.65e-02, 0.05);
    }

    #[test]
    fn fine_mesh_refinement_leaves_error_stable() {
        // Doubling the fine mesh from 8192 to 16384 intervals must not
        // move either error component by more than 2%: the estimator has
        // converged in its sampling, so 8192 is a safe default.
        for (eps, mu) in [
            (2f64.powi(-10), 2f64.powi(-4)),
            (2f64.powi(-40), 2f64.powi(-8)),
        ] {
            let p = benchmark_problem::<f64>(eps, mu).unwrap();
            let exact = ExactTestSolution::new(eps, mu).unwrap();
            let sol = solve(&p, 256).unwrap();
            let coarse = scaled_c1_error(&sol, &|x| exact.u(x), &|x| exact.du(x), 8192).unwrap();
            let fine = scaled_c1_error(&sol, &|x| exact.u(x), &|x| exact.du(x), 16384).unwrap();
            let flux_change = ((fine.e_flux - coarse.e_flux) / coarse.e_flux).abs();
            let sup_change = ((fine.e_sup - coarse.e_sup) / coarse.e_sup).abs();
            assert!(
                flux_change <= 0.02 && sup_change <= 0.02,
                "eps = {eps:e}: flux moved {:.2}%, sup moved {:.2}%",
                100.0 * flux_change,
                100.0 * sup_change
            );
        }
    }

    #[test]
    fn nodal_flux_errors_partition_regions() {
        let eps = 2f64.powi(-20);
        let mu = 2f64.powi(-4);
        let p = benchmark_problem::<f64>(eps, mu).unwrap();
        let exact = ExactTestSolution::new(eps, mu).unwrap();
        let sol = solve(&p, 64).unwrap();
        let exact_nodes: Vec<f64> = sol.mesh.nodes().iter().map(|&x| exact.u(x)).collect();
        let regime = classify(&p).unwrap();
        let (l, m, r) = nodal_flux_errors(&sol, &exact_nodes, &regime);
        // All three regions are populated for these parameters.
        assert!(l > 0.0 && m > 0.0 && r > 0.0);
        // First-order scheme: every region error is below O(1) already
        // at n = 64 and the weights tame the layer derivatives.
        assert!(l < 2.0 && m < 2.0 && r < 2.0, "({l}, {m}, {r})");
    }

    #[test]
    fn convergence_order_examples() {
        // Exact halving: order 1.
        let orders = convergence_orders::<f64>(&[(64usize, 0.8), (128, 0.4), (256, 0.2)]).unwrap();
        assert_eq!(orders.len(), 3);
        assert_eq!(orders[0].0, 64);
        assert!((orders[0].1.unwrap() - 1.0).abs() < 1e-14);
        assert!((orders[1].1.unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(orders[2].1, None);
        // Zero error: undefined order.
        let orders = convergence_orders(&[(64usize, 0.5), (128, 0.0)]).unwrap();
        assert_eq!(orders[0].1, None);
        // Non-doubled sizes are rejected.
        assert!(convergence_orders(&[(64usize, 0.5), (192, 0.2)]).is_err());
        assert!(convergence_orders(&[(64usize, 0.5), (128, -0.2)]).is_err());
    }

    #[test]
    fn convergence_orders_are_scale_invariant() {
        let base = [(64usize, 0.8), (128, 0.52), (256, 0.3)];
        let scaled: Vec<(usize, f64)> = base.iter().map(|&(n, e)| (n, 7.3 * e)).collect();
        let a = convergence_orders(&base).unwrap();
        let b = convergence_orders(&scaled).unwrap();
        for (x, y) in a.iter().zip(&b) {
            match (x.1, y.1) {
                (Some(p), Some(q)) => assert!((p - q).abs() < 1e-12),
                (None, None) => {}
                _ => panic!("order structure changed under scaling"),
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // The interpolant reproduces affine data exactly (up to
            // rounding) everywhere, for arbitrary grids.
            #[test]
            fn linear_reproduction(
                seed_nodes in proptest::collection::vec(0.01f64..0.99, 3..20),
                slope in -5.0f64..5.0,
                intercept in -5.0f64..5.0,
                x in 0.0f64..1.0,
            ) {
                let mut nodes = seed_nodes;
                nodes.sort_by(f64::total_cmp);
                nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
                nodes.insert(0, 0.0);
                nodes.push(1.0);
                let g = Grid::from_nodes(nodes).unwrap();
                let values: Vec<f64> =
                    g.nodes().iter().map(|&t| slope * t + intercept).collect();
                let interp = LinearInterpolant::new(&g, &values);
                let expected = slope * x + intercept;
                prop_assert!((interp.eval(x) - expected).abs() <= 1e-12);
                prop_assert!((interp.deriv(x) - slope).abs() <= 1e-9);
            }
        }
    }
}
