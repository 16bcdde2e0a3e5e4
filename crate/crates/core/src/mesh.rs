//! Nonuniform grids and the piecewise-uniform Shishkin mesh.
//!
//! [`Grid`] is plain geometry — strictly increasing nodes plus cached step
//! sizes — and is what the difference operators work on. [`Mesh`] is a
//! Shishkin mesh: three uniform pieces `[0, sigma_l]`, `[sigma_l, 1 -
//! sigma_r]`, `[1 - sigma_r, 1]` carrying `n/4`, `n/2`, `n/4` intervals,
//! with the transition points chosen from the layer decay rates so that
//! the boundary layers are resolved by the two fine outer pieces.

use std::io::{self, Write};
use std::ops::Deref;

use crate::error::{Error, Result};
use crate::problem::Regime;
use crate::scalar::Real;

/// Strictly increasing 1-D grid with cached interval geometry.
///
/// Indexing follows the convention `h_i = x_i - x_{i-1}` for `i = 1..=n`
/// and `hbar_i = (x_{i+1} - x_{i-1}) / 2` for `i = 1..=n-1`.
#[derive(Debug, Clone)]
pub struct Grid<T> {
    nodes: Vec<T>,
    steps: Vec<T>,
    inv_steps: Vec<T>,
    hbars: Vec<T>,
}

impl<T: Real> Grid<T> {
    /// Builds a grid from nodes, which must be finite and strictly
    /// increasing with at least two entries.
    pub fn from_nodes(nodes: Vec<T>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Config("grid needs at least two nodes".into()));
        }
        for pair in nodes.windows(2) {
            if !(pair[1] > pair[0]) || !pair[0].is_finite() || !pair[1].is_finite() {
                return Err(Error::Config(format!(
                    "grid nodes must be finite and strictly increasing, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        let steps: Vec<T> = nodes.windows(2).map(|p| p[1] - p[0]).collect();
        let inv_steps = steps.iter().map(|&h| T::one() / h).collect();
        let hbars = nodes
            .windows(3)
            .map(|p| (p[2] - p[0]) / T::of(2.0))
            .collect();
        Ok(Grid {
            nodes,
            steps,
            inv_steps,
            hbars,
        })
    }

    /// Number of intervals `n` (one less than the number of nodes).
    #[inline]
    pub fn n(&self) -> usize {
        self.steps.len()
    }

    /// All nodes `x_0 <= ... <= x_n`.
    #[inline]
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// Node `x_i`, `0 <= i <= n`.
    #[inline]
    pub fn node(&self, i: usize) -> T {
        self.nodes[i]
    }

    /// Step `h_i = x_i - x_{i-1}`, `1 <= i <= n`.
    #[inline]
    pub fn step(&self, i: usize) -> T {
        self.steps[i - 1]
    }

    /// Cached `1 / h_i`.
    #[inline]
    pub fn inv_step(&self, i: usize) -> T {
        self.inv_steps[i - 1]
    }

    /// Averaged step `hbar_i = (x_{i+1} - x_{i-1}) / 2`, `1 <= i <= n-1`.
    #[inline]
    pub fn hbar(&self, i: usize) -> T {
        self.hbars[i - 1]
    }
}

/// Piecewise-uniform Shishkin mesh on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Mesh<T> {
    grid: Grid<T>,
    /// Left transition point.
    pub sigma_l: T,
    /// Right transition point (distance from `x = 1`).
    pub sigma_r: T,
    /// Fine step on `[0, sigma_l]`.
    pub h_l: T,
    /// Coarse step on `[sigma_l, 1 - sigma_r]`.
    pub h_c: T,
    /// Fine step on `[1 - sigma_r, 1]`.
    pub h_r: T,
}

impl<T: Real> Mesh<T> {
    /// The underlying grid geometry.
    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// Writes the mesh as CSV rows `index,x,h` (the `h` column is empty
    /// for the first node).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "index,x,h")?;
        for (i, &x) in self.grid.nodes().iter().enumerate() {
            if i == 0 {
                writeln!(w, "{i},{x},")?;
            } else {
                writeln!(w, "{i},{x},{}", self.grid.step(i))?;
            }
        }
        Ok(())
    }
}

impl<T> Deref for Mesh<T> {
    type Target = Grid<T>;

    fn deref(&self) -> &Grid<T> {
        &self.grid
    }
}

fn check_n<T: Real>(n: usize) -> Result<T> {
    if n < 8 || !n.is_multiple_of(4) {
        return Err(Error::Config(format!(
            "mesh size must be a multiple of 4 and at least 8, got {n}"
        )));
    }
    Ok(T::of_usize(n))
}

/// Transition points `sigma_l = min(1/4, (2 / rho_l) ln n)` and
/// `sigma_r = min(1/4, (4 / rho_r) ln n)` for an `n`-interval mesh.
pub fn transition_points<T: Real>(n: usize, regime: &Regime<T>) -> Result<(T, T)> {
    let nt: T = check_n(n)?;
    let quarter = T::of(0.25);
    let log_n = nt.ln();
    let sigma_l = quarter.min(T::of(2.0) / regime.rho_l * log_n);
    let sigma_r = quarter.min(T::of(4.0) / regime.rho_r * log_n);
    Ok((sigma_l, sigma_r))
}

/// Builds the three-piece mesh for given transition points.
///
/// Each piece is generated affinely from its endpoints, so `x_0 = 0`,
/// `x_{n/4} = sigma_l`, `x_{3n/4} = 1 - sigma_r`, and `x_n = 1` hold
/// exactly, and every interior piece is uniform to the last bit.
pub fn build_mesh<T: Real>(n: usize, sigma_l: T, sigma_r: T) -> Result<Mesh<T>> {
    let quarter_bound = T::of(0.25);
    check_n::<T>(n)?;
    for (name, sigma) in [("sigma_l", sigma_l), ("sigma_r", sigma_r)] {
        if !(sigma > T::zero()) || sigma > quarter_bound {
            return Err(Error::Config(format!(
                "{name} must lie in (0, 1/4], got {sigma}"
            )));
        }
    }
    let quarter = n / 4;
    let right_start = T::one() - sigma_r;
    let mut nodes = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = if i <= quarter {
            sigma_l * (T::of_usize(i) / T::of_usize(quarter))
        } else if i < 3 * quarter {
            let t = T::of_usize(i - quarter) / T::of_usize(2 * quarter);
            sigma_l + (right_start - sigma_l) * t
        } else if i == 3 * quarter {
            right_start
        } else if i < n {
            let t = T::of_usize(i - 3 * quarter) / T::of_usize(quarter);
            right_start + sigma_r * t
        } else {
            T::one()
        };
        nodes.push(x);
    }
    // Affine generation keeps each piece monotone, but guard against a
    // pathological sigma pair collapsing the interior piece.
    let grid = Grid::from_nodes(nodes).map_err(|_| {
        Error::Config(format!(
            "transition points sigma_l = {sigma_l}, sigma_r = {sigma_r} leave no interior"
        ))
    })?;
    let h_l = sigma_l / T::of_usize(quarter);
    let h_c = (right_start - sigma_l) / T::of_usize(2 * quarter);
    let h_r = sigma_r / T::of_usize(quarter);
    Ok(Mesh {
        grid,
        sigma_l,
        sigma_r,
        h_l,
        h_c,
        h_r,
    })
}

/// Diagnostics about the mesh shape.
#[derive(Debug, Clone, Copy)]
pub struct MeshReport<T> {
    /// Fine, coarse, fine step widths.
    pub h_l: T,
    pub h_c: T,
    pub h_r: T,
    /// Coarsening ratios `h_c / h_l` and `h_c / h_r`.
    pub coarse_ratio_l: T,
    pub coarse_ratio_r: T,
    /// Whether `sigma_r <= sigma_l`.
    pub sigma_ordered: bool,
    /// Whether `sigma_r <= sigma_l < 1/4` (the geometry the layer
    /// analysis assumes; fails when a transition point is capped).
    pub assumption_holds: bool,
    /// Both transition points capped at 1/4: the mesh is uniform.
    pub degenerate_uniform: bool,
    /// Whether the layer decay rates were clamped to 1.
    pub rho_l_clamped: bool,
    pub rho_r_clamped: bool,
}

/// Summarizes a mesh against the regime it was built for.
pub fn mesh_report<T: Real>(mesh: &Mesh<T>, regime: &Regime<T>) -> MeshReport<T> {
    let quarter = T::of(0.25);
    let sigma_ordered = mesh.sigma_r <= mesh.sigma_l;
    MeshReport {
        h_l: mesh.h_l,
        h_c: mesh.h_c,
        h_r: mesh.h_r,
        coarse_ratio_l: mesh.h_c / mesh.h_l,
        coarse_ratio_r: mesh.h_c / mesh.h_r,
        sigma_ordered,
        assumption_holds: sigma_ordered && mesh.sigma_l < quarter,
        degenerate_uniform: mesh.sigma_l == quarter && mesh.sigma_r == quarter,
        rho_l_clamped: regime.rho_l == T::one(),
        rho_r_clamped: regime.rho_r == T::one(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::classify;
    use crate::reference::benchmark_problem;

    fn regime_for(eps: f64, mu: f64) -> Regime<f64> {
        classify(&benchmark_problem::<f64>(eps, mu).unwrap()).unwrap()
    }

    #[test]
    fn grid_rejects_bad_nodes() {
        assert!(Grid::<f64>::from_nodes(vec![0.0]).is_err());
        assert!(Grid::from_nodes(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(Grid::from_nodes(vec![0.0, 0.7, 0.3, 1.0]).is_err());
        assert!(Grid::from_nodes(vec![0.0, f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn grid_geometry_caches() {
        let g = Grid::<f64>::from_nodes(vec![0.0, 0.1, 0.4, 1.0]).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.step(1), 0.1);
        assert!((g.step(2) - 0.3).abs() < 1e-16);
        assert!((g.step(3) - 0.6).abs() < 1e-16);
        assert!((g.hbar(1) - 0.2).abs() < 1e-16);
        assert!((g.hbar(2) - 0.45).abs() < 1e-16);
        assert!((g.inv_step(1) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn transition_point_examples() {
        // eps = 2^-20, mu = 2^-4, n = 64: rho_l = 8 caps the left point at
        // 1/4; rho_r = 65536 gives sigma_r = 4 ln 64 / 65536.
        let r = regime_for(2f64.powi(-20), 2f64.powi(-4));
        let (sl, sr) = transition_points(64, &r).unwrap();
        assert_eq!(sl, 0.25);
        assert!((sr - 2.538_380_788_183_393e-4).abs() < 1e-18);

        // eps = 2^-20, mu = 2^-12: rho_l = 512, rho_r = 1024 give equal
        // transition widths 2 ln 64 / 512 = 4 ln 64 / 1024.
        let r = regime_for(2f64.powi(-20), 2f64.powi(-12));
        let (sl, sr) = transition_points(64, &r).unwrap();
        assert!((sl - 0.016_245_637_044_373_717).abs() < 1e-16);
        assert_eq!(sl, sr);
    }

    #[test]
    fn mesh_size_validation() {
        let r = regime_for(0.5, 0.5);
        assert!(transition_points(4, &r).is_err());
        assert!(transition_points(66, &r).is_err());
        assert!(build_mesh(66, 0.25, 0.25).is_err());
        assert!(build_mesh(64, 0.0, 0.25).is_err());
        assert!(build_mesh(64, 0.3, 0.25).is_err());
    }

    #[test]
    fn eight_interval_node_positions() {
        // n = 8, sigma_l = 1/4, sigma_r = 1/16: pieces of 2, 4, 2 intervals.
        let m = build_mesh(8, 0.25, 0.0625).unwrap();
        let expected = [
            0.0, 0.125, 0.25, 0.421875, 0.59375, 0.765625, 0.9375, 0.96875, 1.0,
        ];
        assert_eq!(m.nodes(), &expected);
        assert_eq!(m.h_l, 0.125);
        assert_eq!(m.h_c, 0.171875);
        assert_eq!(m.h_r, 0.03125);
    }

    #[test]
    fn transition_nodes_are_exact() {
        let r = regime_for(2f64.powi(-20), 2f64.powi(-4));
        for n in [64usize, 256, 2048] {
            let (sl, sr) = transition_points(n, &r).unwrap();
            let m = build_mesh(n, sl, sr).unwrap();
            assert_eq!(m.node(0), 0.0);
            assert_eq!(m.node(n / 4), sl);
            assert_eq!(m.node(3 * n / 4), 1.0 - sr);
            assert_eq!(m.node(n), 1.0);
            // Step widths match the closed forms 4 sigma / n bit-for-bit
            // up to a single rounding.
            assert!((m.h_l - 4.0 * sl / n as f64).abs() <= 1e-16 * m.h_l);
            assert!((m.h_r - 4.0 * sr / n as f64).abs() <= 1e-16 * m.h_r);
        }
    }

    #[test]
    fn deep_parameters_resolve_layers() {
        // eps = 2^-40, mu = 2^-4: the right decay rate is 2^36, so the
        // right fine step is ~1.5e-11 while the coarse step stays ~1/n.
        let r = regime_for(2f64.powi(-40), 2f64.powi(-4));
        let (sl, sr) = transition_points(64, &r).unwrap();
        let m = build_mesh(64, sl, sr).unwrap();
        let report = mesh_report(&m, &r);
        assert!(m.h_r < 2e-11);
        assert!(report.coarse_ratio_r > 1e9);
        assert!(report.sigma_ordered);
        // sigma_l is capped at 1/4 here, so the full assumption fails.
        assert!(!report.assumption_holds);
        assert!(!report.degenerate_uniform);
    }

    #[test]
    fn unperturbed_mesh_degenerates_to_uniform() {
        let r = regime_for(1.0, 0.0);
        let (sl, sr) = transition_points(64, &r).unwrap();
        let m = build_mesh(64, sl, sr).unwrap();
        let report = mesh_report(&m, &r);
        assert!(report.degenerate_uniform);
        assert!(report.rho_l_clamped && report.rho_r_clamped);
        for i in 1..=64 {
            assert!((m.step(i) - 1.0 / 64.0).abs() < 1e-16);
        }
    }

    #[test]
    fn csv_dump_shape() {
        let m = build_mesh(8, 0.25, 0.0625).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 10);
        assert_eq!(lines[0], "index,x,h");
        assert_eq!(lines[1], "0,0,");
        assert_eq!(lines[2], "1,0.125,0.125");
        assert_eq!(lines[9], "8,1,0.03125");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // For every admissible (eps, mu, n) the mesh has exactly n
            // intervals, hits the transition points exactly, and is
            // ordered sigma_r <= sigma_l when nothing is capped.
            #[test]
            fn shishkin_mesh_structure(jeps in 0i32..=40, jmu in 0i32..=20, k in 1usize..=7) {
                let n = 8 * k;
                let r = regime_for(2f64.powi(-jeps), 2f64.powi(-jmu));
                let (sl, sr) = transition_points(n, &r).unwrap();
                prop_assert!(sl <= 0.25 && sr <= 0.25);
                if sl < 0.25 && sr < 0.25 {
                    // Uncapped: sigma_r / sigma_l = 2 rho_l / rho_r = 1 / theta <= 1.
                    prop_assert!(sr <= sl * (1.0 + 1e-14));
                }
                let m = build_mesh(n, sl, sr).unwrap();
                prop_assert_eq!(m.n(), n);
                prop_assert_eq!(m.node(n / 4), sl);
                prop_assert_eq!(m.node(3 * n / 4), 1.0 - sr);
                let total: f64 = (1..=n).map(|i| m.step(i)).sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }
}
