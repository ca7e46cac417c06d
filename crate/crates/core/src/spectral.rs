//! Period maps of linear time-periodic dispersal equations and their
//! principal spectrum points.
//!
//! `λ` is read off the spectral radius of the one-period map,
//! `r(Φ(T, 0; a)) = e^{λT}`, found by power iteration. The map is never stored
//! as a matrix; each application integrates one period.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::coefficient::TimePeriodicCoefficient;
use crate::error::{Error, Result};
use crate::evolution::{
    steps_between, Discretization, Growth, ReactionTerm, Stepper, StepperOptions,
};
use crate::grid::Field;
use crate::operators::{BoundaryCondition, DispersalOperator, OperatorKind};
use crate::report::{empirical_orders, SpectrumReport, SpectrumRow};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITERS: usize = 20_000;
/// Panels of the time quadrature for `(1/T)∫a dt`.
pub const AVERAGE_PANELS: usize = 512;
/// Time samples of the coefficient distance in [`perturbation_check`].
pub const DISTANCE_SAMPLES: usize = 512;

/// `u₀ ↦ u(T)` for `u_t = A u + a(t, x) u`.
#[derive(Clone, Debug)]
pub struct PeriodMap {
    stepper: Stepper,
    reaction: ReactionTerm,
    period: f64,
    steps: usize,
}

impl PeriodMap {
    pub fn new(
        op: Arc<DispersalOperator>,
        a: TimePeriodicCoefficient,
        dt: f64,
        options: StepperOptions,
    ) -> Result<Self> {
        let period = a.period();
        Self::from_reaction(op, ReactionTerm::Linear(a), period, dt, options)
    }

    /// Map of the linearization at zero of `u_t = A u + u f(t, x, u)`, i.e.
    /// the coefficient `a(t, x) = f(t, x, 0)`.
    pub fn linearized(
        op: Arc<DispersalOperator>,
        growth: &Growth,
        dt: f64,
        options: StepperOptions,
    ) -> Result<Self> {
        let period = growth.period();
        let reaction = match growth {
            Growth::Logistic(a) => ReactionTerm::Linear(*a),
            Growth::Custom { .. } => {
                let (g1, g2) = (growth.clone(), growth.clone());
                ReactionTerm::Custom(Growth::Custom {
                    f: Arc::new(move |t, x, u| u * g1.value(t, x, 0.0)),
                    df: Arc::new(move |t, x, _| g2.value(t, x, 0.0)),
                    period,
                })
            }
        };
        Self::from_reaction(op, reaction, period, dt, options)
    }

    fn from_reaction(
        op: Arc<DispersalOperator>,
        reaction: ReactionTerm,
        period: f64,
        dt: f64,
        options: StepperOptions,
    ) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
        }
        let steps = steps_between(0.0, period, dt)?;
        Ok(PeriodMap {
            stepper: Stepper::new(op, dt, options)?,
            reaction,
            period,
            steps,
        })
    }

    pub fn operator(&self) -> &Arc<DispersalOperator> {
        self.stepper.operator()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn dt(&self) -> f64 {
        self.stepper.dt()
    }

    pub fn reaction(&self) -> &ReactionTerm {
        &self.reaction
    }

    /// `a(t, x)` of the linear reaction.
    pub fn coefficient(&self, t: f64, x: &[f64]) -> f64 {
        self.reaction.du(t, x, 0.0)
    }

    /// Applies the map in place to a vector over the active unknowns.
    pub fn apply_active(&self, u: &mut Vec<f64>) -> Result<()> {
        self.stepper.advance(&self.reaction, 0.0, self.steps, u)
    }
}

pub fn apply_period_map(map: &PeriodMap, u0: &Field) -> Result<Field> {
    let op = map.operator();
    op.check_grid(u0)?;
    let mut u = op.gather(u0.values());
    map.apply_active(&mut u)?;
    let mut values = vec![0.0; u0.values().len()];
    op.scatter(&u, &mut values);
    Field::new(op.grid().clone(), values, map.period())
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub lambda: f64,
    /// Perron vector, sup norm 1
    pub eigenfunction: Field,
    pub iterations: usize,
    /// `‖Φu − e^{λT}u‖_∞` for the returned `u`
    pub residual: f64,
    /// Principal-eigenvalue criterion; local maps always have one.
    pub is_principal_eigenvalue: bool,
}

/// Default start: constant 1, or a product of sines vanishing on the box
/// boundary for Dirichlet problems.
pub fn default_start(map: &PeriodMap) -> Field {
    let op = map.operator();
    let grid = op.grid().clone();
    if op.bc() == BoundaryCondition::Dirichlet {
        let (lo, hi) = (grid.domain().lower().to_vec(), grid.domain().upper().to_vec());
        Field::from_fn(grid, |x| {
            x.iter()
                .enumerate()
                .map(|(k, &xk)| (PI * (xk - lo[k]) / (hi[k] - lo[k])).sin().max(0.0))
                .product()
        })
    } else {
        Field::constant(grid, 1.0)
    }
}

/// Power iteration from [`default_start`].
pub fn principal_value(map: &PeriodMap, tol: f64, max_iters: usize) -> Result<SpectrumResult> {
    principal_value_from(map, &default_start(map), tol, max_iters)
}

/// Power iteration with sup-norm normalisation. Stops once successive ratios
/// agree to `tol` relative and the eigen-residual is at most `tol`.
pub fn principal_value_from(
    map: &PeriodMap,
    start: &Field,
    tol: f64,
    max_iters: usize,
) -> Result<SpectrumResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let op = map.operator();
    op.check_grid(start)?;
    let mut v = op.gather(start.values());
    let norm = sup(&v);
    if !(norm > 0.0) {
        return Err(Error::InvalidArgument("start vector vanishes".into()));
    }
    v.iter_mut().for_each(|x| *x /= norm);

    let mut prev = f64::NAN;
    let mut rho = f64::NAN;
    for it in 1..=max_iters {
        let mut w = v.clone();
        map.apply_active(&mut w)?;
        rho = sup(&w);
        if !(rho > 0.0) {
            return Err(Error::NoConvergence {
                iterations: it,
                last_ratio: rho,
            });
        }
        let residual = w.iter().zip(&v).map(|(a, b)| (a - rho * b).abs()).fold(0.0, f64::max);
        let settled = (rho - prev).abs() <= tol * rho;
        if settled && residual <= tol {
            let lambda = rho.ln() / map.period();
            let mut values = vec![0.0; op.grid().node_count()];
            op.scatter(&v, &mut values);
            let eigenfunction = Field::new(op.grid().clone(), values, 0.0)?;
            let is_principal_eigenvalue = match op.kind() {
                OperatorKind::Local => true,
                OperatorKind::Nonlocal => match (op.effective_moment_constant(), op.delta()) {
                    (Some(c), Some(delta)) => pev_criterion(map, lambda, c, delta),
                    _ => true,
                },
            };
            return Ok(SpectrumResult {
                lambda,
                eigenfunction,
                iterations: it,
                residual,
                is_principal_eigenvalue,
            });
        }
        w.iter_mut().for_each(|x| *x /= rho);
        v = w;
        prev = rho;
    }
    Err(Error::NoConvergence {
        iterations: max_iters,
        last_ratio: rho,
    })
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `λ > max_x (−C/δ² + (1/T)∫₀^T a(t, x) dt)` over the non-ghost nodes.
pub fn pev_criterion(map: &PeriodMap, lambda: f64, c: f64, delta: f64) -> bool {
    let grid = map.operator().grid();
    let dt = map.period() / AVERAGE_PANELS as f64;
    let bound = grid
        .non_ghost_nodes()
        .map(|n| {
            let x = grid.point(n);
            let avg = (0..AVERAGE_PANELS)
                .map(|k| map.coefficient(k as f64 * dt, x))
                .sum::<f64>()
                / AVERAGE_PANELS as f64;
            avg - c / (delta * delta)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    lambda > bound
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbationCheck {
    pub lambda1: f64,
    pub lambda2: f64,
    /// sampled `max |a₁ − a₂|`
    pub coefficient_distance: f64,
    pub holds: bool,
}

/// Compares `|λ(a₁) − λ(a₂)|` against the sampled sup distance of the
/// coefficients over 512 times and all non-ghost nodes.
pub fn perturbation_check(map1: &PeriodMap, map2: &PeriodMap, tol: f64) -> Result<PerturbationCheck> {
    let (op1, op2) = (map1.operator(), map2.operator());
    if op1.kind() != op2.kind() || op1.bc() != op2.bc() || **op1.grid() != **op2.grid() {
        return Err(Error::MismatchedOperators(
            "period maps differ in kind, boundary condition or grid".into(),
        ));
    }
    if (map1.period() - map2.period()).abs() > 1e-14 * map1.period() {
        return Err(Error::MismatchedOperators(format!(
            "periods differ: {} vs {}",
            map1.period(),
            map2.period()
        )));
    }
    let power_tol = (tol * 1e-2).max(1e-12);
    let (r1, r2) = rayon::join(
        || principal_value(map1, power_tol, DEFAULT_MAX_ITERS),
        || principal_value(map2, power_tol, DEFAULT_MAX_ITERS),
    );
    let (lambda1, lambda2) = (r1?.lambda, r2?.lambda);
    let grid = op1.grid();
    let dt = map1.period() / DISTANCE_SAMPLES as f64;
    let mut dist = 0.0f64;
    for k in 0..DISTANCE_SAMPLES {
        let t = k as f64 * dt;
        for n in grid.non_ghost_nodes() {
            let x = grid.point(n);
            dist = dist.max((map1.coefficient(t, x) - map2.coefficient(t, x)).abs());
        }
    }
    Ok(PerturbationCheck {
        lambda1,
        lambda2,
        coefficient_distance: dist,
        holds: (lambda1 - lambda2).abs() <= dist + tol,
    })
}

/// `λ^r` from the local map once, `λ^δ` per δ in parallel.
pub fn theorem_b_experiment(
    disc: &Discretization,
    a: TimePeriodicCoefficient,
    deltas: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<SpectrumReport> {
    disc.validate_sweep(deltas)?;
    let grid = disc.grid(deltas[0])?;
    let local = PeriodMap::new(disc.local(&grid)?, a, disc.dt, disc.stepper)?;
    let lambda_r = principal_value(&local, tol, max_iters)?.lambda;
    let results: Vec<SpectrumResult> = deltas
        .par_iter()
        .map(|&delta| {
            let map = PeriodMap::new(disc.nonlocal(&grid, delta)?, a, disc.dt, disc.stepper)?;
            principal_value(&map, tol, max_iters)
        })
        .collect::<Result<_>>()?;
    let gaps: Vec<f64> = results.iter().map(|r| (r.lambda - lambda_r).abs()).collect();
    let orders = empirical_orders(deltas, &gaps);
    let rows = deltas
        .iter()
        .zip(&results)
        .zip(gaps.iter().zip(orders))
        .map(|((&delta, r), (&abs_gap, empirical_order))| SpectrumRow {
            delta,
            lambda_delta: r.lambda,
            abs_gap,
            empirical_order,
            pev_criterion: r.is_principal_eigenvalue,
        })
        .collect();
    Ok(SpectrumReport { lambda_r, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::CoefficientShape;
    use crate::grid::{Domain, Grid};
    use crate::operators::assemble_local;

    fn neumann_local() -> Arc<DispersalOperator> {
        let g = Arc::new(Grid::build(Domain::interval(0.0, 1.0).unwrap(), 1.0 / 32.0, 0.0).unwrap());
        Arc::new(assemble_local(g, BoundaryCondition::Neumann).unwrap())
    }

    #[test]
    fn constant_growth_scales_constants() {
        let op = neumann_local();
        let a = TimePeriodicCoefficient::constant(1.0, 0.4).unwrap();
        let map = PeriodMap::new(op.clone(), a, 1e-2, StepperOptions::default()).unwrap();
        let out = apply_period_map(&map, &Field::constant(op.grid().clone(), 1.0)).unwrap();
        for v in out.values() {
            assert!((v - 0.4f64.exp()).abs() < 1e-12);
        }
        let r = principal_value(&map, 1e-10, 100).unwrap();
        assert!((r.lambda - 0.4).abs() < 1e-10);
        assert!(r.is_principal_eigenvalue);
    }

    #[test]
    fn criterion_threshold() {
        let op = neumann_local();
        let a = TimePeriodicCoefficient::new(2.0, CoefficientShape::TimeSine { c0: 0.5, c1: 1.0 })
            .unwrap();
        let map = PeriodMap::new(op, a, 1e-2, StepperOptions::default()).unwrap();
        // bound is 0.5 − 14/0.01 = −1399.5
        assert!(pev_criterion(&map, -1399.0, 14.0, 0.1));
        assert!(!pev_criterion(&map, -1400.5, 14.0, 0.1));
    }

    #[test]
    fn non_multiple_period_is_rejected() {
        let a = TimePeriodicCoefficient::constant(1.0, 0.0).unwrap();
        let err = PeriodMap::new(neumann_local(), a, 0.3, StepperOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NonMultipleSnapshot { .. }));
    }
}
