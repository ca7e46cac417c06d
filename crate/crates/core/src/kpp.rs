//! Positive time-periodic solutions of `u_t = A u + u f(t, x, u)`.
//!
//! The orbit is the fixed point of the nonlinear period map `U(T, 0)`. It is
//! reached by iterating that map from a constant super-solution `M` (iterates
//! decrease) and from a small multiple of the linearised Perron vector
//! (iterates increase). Both limits must coincide.

use std::io::{self, Write};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::{steps_between, Discretization, Growth, ReactionTerm, Stepper, StepperOptions};
use crate::grid::{sup_distance, Field};
use crate::operators::DispersalOperator;
use crate::report::{OrbitDiagnostics, OrbitReport, OrbitRow};
use crate::spectral::{principal_value, PeriodMap, SpectrumResult, DEFAULT_MAX_ITERS};

/// Time samples per period in the lattice checks on `f`.
pub const LATTICE_TIMES: usize = 64;
/// Values of `u` in the lattice check of `∂_u f < 0`.
pub const LATTICE_LEVELS: usize = 17;
/// Scale of the sub-solution start `ε φ`.
pub const SUB_START_SCALE: f64 = 1e-3;
/// Slack allowed in the monotonicity of the iterates.
pub const MONOTONE_SLACK: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitOptions {
    /// fixed-point tolerance `‖U(T)u − u‖_∞`
    pub tol: f64,
    pub max_periods: usize,
    /// snapshots stored per period
    pub snapshots: usize,
    /// tolerance of the power iteration for the linearisation at zero
    pub h2_tol: f64,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions {
            tol: 1e-8,
            max_periods: 2000,
            snapshots: 32,
            h2_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KppProblem {
    stepper: Stepper,
    growth: Growth,
    reaction: ReactionTerm,
    options: StepperOptions,
    period: f64,
    steps: usize,
    saturation: f64,
}

impl KppProblem {
    /// Validates the sampled (H1) conditions and finds the saturation level
    /// `M`, the smallest of 1, 2, 4, … with `f(t, x, M) < 0` on the lattice.
    pub fn new(
        op: Arc<DispersalOperator>,
        growth: Growth,
        dt: f64,
        options: StepperOptions,
    ) -> Result<Self> {
        let period = growth.period();
        if !(period > 0.0) {
            return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
        }
        let steps = steps_between(0.0, period, dt)?;
        let grid = op.grid().clone();
        let times: Vec<f64> = (0..LATTICE_TIMES)
            .map(|k| k as f64 * period / LATTICE_TIMES as f64)
            .collect();
        let negative_at = |m: f64| {
            grid.non_ghost_nodes()
                .all(|n| times.iter().all(|&t| growth.value(t, grid.point(n), m) < 0.0))
        };
        let mut saturation = 1.0;
        while !negative_at(saturation) {
            saturation *= 2.0;
            if saturation > 1e9 {
                return Err(Error::InvalidArgument(
                    "f(t, x, u) stays nonnegative for large u".into(),
                ));
            }
        }
        for n in grid.non_ghost_nodes() {
            let x = grid.point(n);
            for &t in &times {
                for l in 0..LATTICE_LEVELS {
                    let u = saturation * l as f64 / (LATTICE_LEVELS - 1) as f64;
                    let d = growth.du(t, x, u);
                    if !(d < 0.0) {
                        return Err(Error::InvalidArgument(format!(
                            "growth is not decreasing in u: df/du = {d} at t = {t}, x = {x:?}, u = {u}"
                        )));
                    }
                }
            }
        }
        Ok(KppProblem {
            stepper: Stepper::new(op, dt, options)?,
            reaction: ReactionTerm::Kpp(growth.clone()),
            growth,
            options,
            period,
            steps,
            saturation,
        })
    }

    pub fn operator(&self) -> &Arc<DispersalOperator> {
        self.stepper.operator()
    }

    pub fn growth(&self) -> &Growth {
        &self.growth
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn dt(&self) -> f64 {
        self.stepper.dt()
    }

    pub fn saturation(&self) -> f64 {
        self.saturation
    }

    /// Applies the nonlinear period map in place on the active unknowns.
    pub fn apply_period_map(&self, u: &mut Vec<f64>) -> Result<()> {
        self.stepper.advance(&self.reaction, 0.0, self.steps, u)
    }

    fn linearization(&self, tol: f64) -> Result<SpectrumResult> {
        let map = PeriodMap::linearized(self.operator().clone(), &self.growth, self.dt(), self.options)?;
        principal_value(&map, tol, DEFAULT_MAX_ITERS)
    }
}

/// `(λ > 0, λ)` for the principal spectrum point of `a(t, x) = f(t, x, 0)`.
pub fn verify_h2(problem: &KppProblem, tol: f64) -> Result<(bool, f64)> {
    let lambda = problem.linearization(tol)?.lambda;
    Ok((lambda > 0.0, lambda))
}

#[derive(Clone, Debug)]
pub struct PeriodicOrbit {
    /// `u*(kT/m)` for `k = 0..m`
    pub snapshots: Vec<Field>,
    pub period: f64,
    pub saturation: f64,
    pub h2_lambda: f64,
    pub diagnostics: OrbitDiagnostics,
    operator: Arc<DispersalOperator>,
}

impl PeriodicOrbit {
    /// Minimum over the snapshots at the operator's unknowns, which exclude
    /// boundary nodes for the local Dirichlet problem.
    pub fn min_active(&self) -> f64 {
        self.snapshots
            .iter()
            .flat_map(|s| self.operator.active_nodes().iter().map(move |&n| s.values()[n]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.snapshots.iter().map(Field::sup_norm).fold(0.0, f64::max)
    }

    pub fn start(&self) -> &Field {
        &self.snapshots[0]
    }

    /// `max_k sup_distance(self(t_k), other(t_k))` over shared snapshots.
    pub fn sup_gap(&self, other: &PeriodicOrbit) -> Result<f64> {
        if self.snapshots.len() != other.snapshots.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} vs {} snapshots",
                self.snapshots.len(),
                other.snapshots.len()
            )));
        }
        let mut gap = 0.0f64;
        for (a, b) in self.snapshots.iter().zip(&other.snapshots) {
            gap = gap.max(sup_distance(a, b)?);
        }
        Ok(gap)
    }

    /// CSV with columns `t,x,value` (or `t,x,y,value`) over non-ghost nodes.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let grid = self.operator.grid();
        if grid.dimension() == 1 {
            writeln!(out, "t,x,value")?;
        } else {
            writeln!(out, "t,x,y,value")?;
        }
        for s in &self.snapshots {
            for n in grid.non_ghost_nodes() {
                write!(out, "{}", s.time())?;
                for c in grid.point(n) {
                    write!(out, ",{c}")?;
                }
                writeln!(out, ",{}", s.values()[n])?;
            }
        }
        Ok(())
    }
}

/// Iterates the period map until successive iterates are within `tol`.
/// Returns the limit, the number of periods and the largest step against the
/// expected direction (`descending`: any increase counts).
fn monotone_iteration(
    problem: &KppProblem,
    mut u: Vec<f64>,
    descending: bool,
    options: &OrbitOptions,
) -> Result<(Vec<f64>, usize, f64)> {
    let mut violation = 0.0f64;
    let mut diff = f64::INFINITY;
    for period in 1..=options.max_periods {
        let mut v = u.clone();
        problem.apply_period_map(&mut v)?;
        diff = 0.0;
        for (a, b) in v.iter().zip(&u) {
            diff = diff.max((a - b).abs());
            let wrong = if descending { a - b } else { b - a };
            violation = violation.max(wrong);
        }
        if v.iter().all(|x| x.abs() < 1e-12) {
            return Err(Error::CollapsedToZero { periods: period });
        }
        u = v;
        if diff < options.tol {
            return Ok((u, period, violation));
        }
    }
    Err(Error::NoConvergence {
        iterations: options.max_periods,
        last_ratio: diff,
    })
}

/// Positive periodic solution by monotone iteration from both sides.
///
/// Fails with [`Error::H2Failure`] if the linearisation at zero has `λ ≤ 0`.
pub fn positive_periodic_solution(problem: &KppProblem, options: &OrbitOptions) -> Result<PeriodicOrbit> {
    let m = options.snapshots;
    if m == 0 || problem.steps % m != 0 {
        return Err(Error::NonMultipleSnapshot {
            time: problem.period / m.max(1) as f64,
            dt: problem.dt(),
        });
    }
    let linear = problem.linearization(options.h2_tol)?;
    if linear.lambda <= 0.0 {
        return Err(Error::H2Failure {
            lambda: linear.lambda,
        });
    }
    let op = problem.operator().clone();
    let upper = vec![problem.saturation; op.dim()];
    let lower: Vec<f64> = op
        .gather(linear.eigenfunction.values())
        .into_iter()
        .map(|p| SUB_START_SCALE * p)
        .collect();
    let (from_above, from_below) = rayon::join(
        || monotone_iteration(problem, upper, true, options),
        || monotone_iteration(problem, lower, false, options),
    );
    let (u_star, super_periods, super_increase) = from_above?;
    let (u_low, sub_periods, sub_decrease) = from_below?;
    let start_agreement = u_star
        .iter()
        .zip(&u_low)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let stride = problem.steps / m;
    let grid = op.grid().clone();
    let mut values = vec![0.0; grid.node_count()];
    let mut snapshots = Vec::with_capacity(m);
    let mut u = u_star.clone();
    for k in 0..m {
        op.scatter(&u, &mut values);
        let t = problem.period * k as f64 / m as f64;
        snapshots.push(Field::new(grid.clone(), values.clone(), t)?);
        problem
            .stepper
            .advance(&problem.reaction, (k * stride) as f64 * problem.dt(), stride, &mut u)?;
    }
    let periodicity_residual = u
        .iter()
        .zip(&u_star)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    Ok(PeriodicOrbit {
        snapshots,
        period: problem.period,
        saturation: problem.saturation,
        h2_lambda: linear.lambda,
        diagnostics: OrbitDiagnostics {
            super_periods,
            sub_periods,
            super_increase,
            sub_decrease,
            start_agreement,
            periodicity_residual,
        },
        operator: op,
    })
}

/// Computes `u*` once and `u*_δ` per δ, reporting the sup over the shared
/// snapshot times. Rows where the linearisation at zero is not positive get
/// no gap instead of aborting the sweep.
pub fn theorem_c_experiment(
    disc: &Discretization,
    growth: &Growth,
    deltas: &[f64],
    options: &OrbitOptions,
) -> Result<OrbitReport> {
    disc.validate_sweep(deltas)?;
    let grid = disc.grid(deltas[0])?;
    let local = KppProblem::new(disc.local(&grid)?, growth.clone(), disc.dt, disc.stepper)?;
    let local_orbit = positive_periodic_solution(&local, options)?;
    let rows = deltas
        .par_iter()
        .map(|&delta| -> Result<OrbitRow> {
            let op = disc.nonlocal(&grid, delta)?;
            let problem = KppProblem::new(op, growth.clone(), disc.dt, disc.stepper)?;
            match positive_periodic_solution(&problem, options) {
                Ok(orbit) => Ok(OrbitRow {
                    delta,
                    sup_gap: Some(orbit.sup_gap(&local_orbit)?),
                    h2_lambda: orbit.h2_lambda,
                    h2_ok: true,
                    diagnostics: Some(orbit.diagnostics),
                }),
                Err(Error::H2Failure { lambda }) => Ok(OrbitRow {
                    delta,
                    sup_gap: None,
                    h2_lambda: lambda,
                    h2_ok: false,
                    diagnostics: None,
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OrbitReport {
        h2_lambda_local: local_orbit.h2_lambda,
        local: local_orbit.diagnostics,
        rows,
    })
}
