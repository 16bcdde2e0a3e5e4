//! Named verification suites.
//!
//! Each suite re-checks one family of discrete invariants the solver is
//! built on, across many configurations, and reports every violation
//! individually. They are the command-line twins of the crate's test
//! suites: fast enough to run after a build on a new machine or
//! toolchain, where a silent floating-point or codegen difference would
//! otherwise surface as quietly wrong tables.

use clap::ValueEnum;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use shishkin::experiments::{dyadic_label, rate_check, RateLaw, RateVerdict, SweepConfig};
use shishkin::mesh::{build_mesh, transition_points, Grid};
use shishkin::norms::scaled_c1_error;
use shishkin::operators::{assemble_upwind, d_minus, delta2, delta2_hat, product_rule_residual};
use shishkin::problem::classify;
use shishkin::reference::{benchmark_problem, ExactTestSolution};
use shishkin::solver::{decompose, solve, verify_layer_bounds, BcSplit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Exact algebraic identities of the difference operators on
    /// randomized nonuniform meshes.
    OperatorsIdentities,
    /// Sign pattern and diagonal dominance of every system assembled
    /// across the default sweep.
    MMatrix,
    /// Discrete layer bounds: barrier dominance and outside-layer decay
    /// of the solution decomposition.
    Barriers,
    /// Boundedness of measured errors normalized by the expected
    /// convergence law.
    Rates,
    /// The closed-form reference solution satisfies its equation and
    /// boundary values.
    ExactResidual,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::OperatorsIdentities => "operators-identities",
            Suite::MMatrix => "m-matrix",
            Suite::Barriers => "barriers",
            Suite::Rates => "rates",
            Suite::ExactResidual => "exact-residual",
        }
    }
}

/// One failed check: which case, and what was observed.
#[derive(Debug)]
pub struct CheckFailure {
    pub case: String,
    pub detail: String,
}

/// Everything a suite run produced: human summary lines, the number of
/// checks performed, and the failures.
#[derive(Debug)]
pub struct SuiteReport {
    pub lines: Vec<String>,
    pub checks: usize,
    pub failures: Vec<CheckFailure>,
}

pub fn run_suite(suite: Suite) -> shishkin::Result<SuiteReport> {
    match suite {
        Suite::OperatorsIdentities => operator_identities(),
        Suite::MMatrix => m_matrix(),
        Suite::Barriers => barriers(),
        Suite::Rates => rates(),
        Suite::ExactResidual => exact_residual(),
    }
}

/// Random strictly increasing grid on `[0, 1]` with `n` intervals of
/// widths varying by up to a factor 9.
fn random_grid(rng: &mut impl Rng, n: usize) -> Grid<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.8)).collect();
    let total: f64 = raw.iter().sum();
    let mut nodes = vec![0.0];
    let mut acc = 0.0;
    for w in &raw[..n - 1] {
        acc += w / total;
        nodes.push(acc);
    }
    nodes.push(1.0);
    Grid::from_nodes(nodes).expect("random grid is strictly increasing")
}

/// The rebalanced-second-difference commutation identity and the
/// discrete product rule, checked to 1e-13 on O(1)-scaled data over 100
/// random meshes.
fn operator_identities() -> shishkin::Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut checks = 0usize;
    let mut failures = Vec::new();
    for trial in 0..100 {
        let n = rng.gen_range(8..=128);
        let grid = random_grid(&mut rng, n);
        // Mesh-scaled samples keep both sides of the second-difference
        // identity O(1); the product-rule residual is rescaled by h below.
        let z: Vec<f64> = (0..=n)
            .map(|i| {
                let h = grid.step(i.max(1));
                rng.gen_range(-1.0..1.0) * h * h * h
            })
            .collect();
        let p: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let q: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dz: Vec<f64> = (0..=n)
            .map(|j| if j == 0 { 0.0 } else { d_minus(&grid, &z, j) })
            .collect();
        let d2z: Vec<f64> = (0..=n)
            .map(|j| {
                if j == 0 || j == n {
                    0.0
                } else {
                    delta2(&grid, &z, j)
                }
            })
            .collect();
        for i in 2..n {
            let lhs = delta2_hat(&grid, &dz, i);
            let rhs = d_minus(&grid, &d2z, i);
            checks += 1;
            if (lhs - rhs).abs() > 1e-13 * lhs.abs().max(rhs.abs()).max(1.0) {
                failures.push(CheckFailure {
                    case: format!("mesh {trial}, node {i}"),
                    detail: format!("delta2_hat(D- z) = {lhs:e} vs D-(delta2 z) = {rhs:e}"),
                });
            }
        }
        for i in 1..=n {
            // Product-rule terms scale like 1/h; multiplying by h makes
            // the residual comparable at 1e-13 absolute.
            let residual = product_rule_residual(&grid, &p, &q, i) * grid.step(i);
            checks += 1;
            if residual.abs() > 1e-13 {
                failures.push(CheckFailure {
                    case: format!("mesh {trial}, node {i}"),
                    detail: format!("scaled product-rule residual {residual:e}"),
                });
            }
        }
    }
    Ok(SuiteReport {
        lines: vec![format!(
            "operator identities on 100 random meshes (8..=128 intervals): {checks} checks"
        )],
        checks,
        failures,
    })
}

/// Assembles every system of the default sweep and checks the M-matrix
/// sign pattern rowwise.
fn m_matrix() -> shishkin::Result<SuiteReport> {
    let config = SweepConfig::<f64>::benchmark_defaults();
    let mut triples = Vec::new();
    for &eps in &config.eps_set {
        for &mu in &config.mu_set {
            for &n in &config.n_set {
                triples.push((eps, mu, n));
            }
        }
    }
    let outcomes: shishkin::Result<Vec<Option<CheckFailure>>> = triples
        .par_iter()
        .map(|&(eps, mu, n)| {
            let problem = benchmark_problem::<f64>(eps, mu)?;
            let regime = classify(&problem)?;
            let (sigma_l, sigma_r) = transition_points(n, &regime)?;
            let mesh = build_mesh(n, sigma_l, sigma_r)?;
            let system = assemble_upwind(&problem, mesh.grid())?;
            Ok(system.first_m_matrix_violation().map(|row| CheckFailure {
                case: format!(
                    "eps = {}, mu = {}, n = {n}",
                    dyadic_label(eps),
                    dyadic_label(mu)
                ),
                detail: format!("sign pattern broken in row {row}"),
            }))
        })
        .collect();
    let failures: Vec<CheckFailure> = outcomes?.into_iter().flatten().collect();
    Ok(SuiteReport {
        lines: vec![format!(
            "m-matrix sign pattern on {} systems across the default sweep",
            triples.len()
        )],
        checks: triples.len(),
        failures,
    })
}

/// Decomposes the solution for every default-sweep configuration and
/// checks barrier dominance (where the layer-analysis geometry holds)
/// plus the decay of layer content outside the fine mesh regions.
fn barriers() -> shishkin::Result<SuiteReport> {
    let config = SweepConfig::<f64>::benchmark_defaults();
    let mut pairs = Vec::new();
    for &eps in &config.eps_set {
        for &mu in &config.mu_set {
            pairs.push((eps, mu));
        }
    }
    struct PairOutcome {
        hypotheses_met: usize,
        checks: usize,
        failures: Vec<CheckFailure>,
    }
    let outcomes: shishkin::Result<Vec<PairOutcome>> = pairs
        .par_iter()
        .map(|&(eps, mu)| {
            let label = format!("eps = {}, mu = {}", dyadic_label(eps), dyadic_label(mu));
            let problem = benchmark_problem::<f64>(eps, mu)?;
            let regime = classify(&problem)?;
            let split = BcSplit::layer_resolving(&problem, &regime)?;
            let mut outcome = PairOutcome {
                hypotheses_met: 0,
                checks: 0,
                failures: Vec::new(),
            };
            // (n, outside-layer maxima) for the decay check across doublings.
            let mut history: Vec<(usize, f64, f64, bool)> = Vec::new();
            for &n in &config.n_set {
                let decomposition = decompose(&problem, n, split)?;
                let report = verify_layer_bounds(&decomposition);
                if report.hypotheses_met {
                    outcome.hypotheses_met += 1;
                    outcome.checks += 2;
                    if !report.bound_holds_l {
                        outcome.failures.push(CheckFailure {
                            case: format!("{label}, n = {n}"),
                            detail: "left barrier fails to dominate W_L".into(),
                        });
                    }
                    if !report.bound_holds_r {
                        outcome.failures.push(CheckFailure {
                            case: format!("{label}, n = {n}"),
                            detail: "right barrier fails to dominate W_R".into(),
                        });
                    }
                }
                history.push((
                    n,
                    report.outside_layer_max_l,
                    report.outside_layer_max_r,
                    report.hypotheses_met,
                ));
            }
            for w in history.windows(2) {
                let (n0, l0, r0, ok0) = w[0];
                let (n1, l1, r1, ok1) = w[1];
                if !(ok0 && ok1) {
                    continue;
                }
                for (side, coarse, fine) in [("W_L", l0, l1), ("W_R", r0, r1)] {
                    outcome.checks += 1;
                    // A fine-mesh maximum of exactly zero means the layer
                    // decayed below the representable range: pass.
                    if fine > 0.0 && coarse / fine < 3.5 {
                        outcome.failures.push(CheckFailure {
                            case: format!("{label}, n = {n0} -> {n1}"),
                            detail: format!(
                                "outside-layer max of {side} shrank only {:.2}x (need 3.5x)",
                                coarse / fine
                            ),
                        });
                    }
                }
            }
            Ok(outcome)
        })
        .collect();
    let outcomes = outcomes?;
    let hypotheses_met: usize = outcomes.iter().map(|o| o.hypotheses_met).sum();
    let checks: usize = outcomes.iter().map(|o| o.checks).sum();
    let failures: Vec<CheckFailure> = outcomes.into_iter().flat_map(|o| o.failures).collect();
    Ok(SuiteReport {
        lines: vec![
            format!(
                "layer barriers across {} parameter pairs x {} mesh sizes",
                pairs.len(),
                config.n_set.len()
            ),
            format!(
                "{hypotheses_met} configurations meet the layer-analysis geometry; {checks} checks"
            ),
        ],
        checks,
        failures,
    })
}

/// Measures the benchmark error for two deep-parameter pairs over the
/// doubling mesh sizes and checks that `e * n / ln^3 n` stays within a
/// 3x band (the expected almost-first-order law).
fn rates() -> shishkin::Result<SuiteReport> {
    let pairs = [
        (2f64.powi(-20), 2f64.powi(-4)),
        (2f64.powi(-20), 2f64.powi(-12)),
    ];
    let n_set = [64usize, 128, 256, 512, 1024, 2048];
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    let mut checks = 0usize;
    for &(eps, mu) in &pairs {
        let label = format!("eps = {}, mu = {}", dyadic_label(eps), dyadic_label(mu));
        let problem = benchmark_problem::<f64>(eps, mu)?;
        let exact = ExactTestSolution::new(eps, mu)?;
        let records: shishkin::Result<Vec<_>> = n_set
            .par_iter()
            .map(|&n| {
                let solution = solve(&problem, n)?;
                scaled_c1_error(&solution, &|x| exact.u(x), &|x| exact.du(x), 8192)
            })
            .collect();
        let report = rate_check(&records?, RateLaw::NLog3N)?;
        checks += 1;
        let spread = report
            .spread
            .map(|s| format!("{s:.2}"))
            .unwrap_or_else(|| "-".into());
        let verdict = match report.verdict {
            RateVerdict::Pass => "pass",
            RateVerdict::Fail => "fail",
            RateVerdict::Inconclusive => "inconclusive",
        };
        lines.push(format!("{label}: normalized spread {spread} -> {verdict}"));
        if report.verdict != RateVerdict::Pass {
            failures.push(CheckFailure {
                case: label,
                detail: format!("e n / ln^3 n spread {spread} over n = 64..2048 (pass needs <= 3)"),
            });
        }
    }
    Ok(SuiteReport {
        lines,
        checks,
        failures,
    })
}

/// Evaluates the closed-form reference solution for every default
/// parameter pair: boundary values to 1e-12 and the ODE residual to
/// 1e-8 relative to the largest equation term, at 101 points.
fn exact_residual() -> shishkin::Result<SuiteReport> {
    let config = SweepConfig::<f64>::benchmark_defaults();
    let mut pairs = Vec::new();
    for &eps in &config.eps_set {
        for &mu in &config.mu_set {
            pairs.push((eps, mu));
        }
    }
    let outcomes: shishkin::Result<Vec<Vec<CheckFailure>>> = pairs
        .par_iter()
        .map(|&(eps, mu)| {
            let label = format!("eps = {}, mu = {}", dyadic_label(eps), dyadic_label(mu));
            let exact = ExactTestSolution::<f64>::new(eps, mu)?;
            let mut failures = Vec::new();
            let (u0, u1) = (exact.u(0.0), exact.u(1.0));
            if (u0 - 1.0).abs() > 1e-12 || u1.abs() > 1e-12 {
                failures.push(CheckFailure {
                    case: label.clone(),
                    detail: format!("boundary values ({u0}, {u1}) differ from (1, 0)"),
                });
            }
            let mut worst: f64 = 0.0;
            for k in 0..=100 {
                let x = k as f64 / 100.0;
                let (residual, scale) = exact.ode_residual(x);
                worst = worst.max((residual / scale).abs());
            }
            if worst > 1e-8 {
                failures.push(CheckFailure {
                    case: label,
                    detail: format!("relative ODE residual up to {worst:e}"),
                });
            }
            Ok(failures)
        })
        .collect();
    let failures: Vec<CheckFailure> = outcomes?.into_iter().flatten().collect();
    let checks = 2 * pairs.len();
    Ok(SuiteReport {
        lines: vec![format!(
            "closed-form solution for {} parameter pairs, 101 sample points each",
            pairs.len()
        )],
        checks,
        failures,
    })
}
