//! Time integration of `u_t = A u + F(t, x, u)` for either operator kind.
//!
//! One step of size `dt` is the Strang composition
//! `R(dt/2) ∘ L(dt) ∘ R(dt/2)`. `L` is the linear dispersal step (backward
//! Euler by default, trapezoidal on request) and `R` advances the pointwise
//! reaction ODE with an exponential Rosenbrock step
//! `u ← u + τ φ₁(τ ∂_uF) F`, evaluated at the sub-step midpoint.
//!
//! With backward Euler every piece is order preserving: `(I − dt A)^{-1}` is a
//! nonnegative matrix and the reaction step is increasing in `u` for the
//! built-in reactions. Discrete comparison and positivity follow.

use std::sync::Arc;

use rayon::prelude::*;

use crate::coefficient::TimePeriodicCoefficient;
use crate::error::{Error, Result};
use crate::grid::{sup_distance, Domain, Field, Grid, NodeRole};
use crate::kernels::KernelProfile;
use crate::linalg::StepSolver;
use crate::operators::{
    assemble_local, assemble_nonlocal, BoundaryCondition, DispersalOperator, RateCalibration,
};
use crate::report::ConvergenceReport;

/// Sup norm beyond which a run is declared blown up.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

pub type ScalarFn = Arc<dyn Fn(f64, &[f64], f64) -> f64 + Send + Sync>;

/// Growth rate `f(t, x, u)` of a KPP reaction `u f(t, x, u)`.
#[derive(Clone)]
pub enum Growth {
    /// `f = a(t, x) − u`
    Logistic(TimePeriodicCoefficient),
    Custom {
        f: ScalarFn,
        df: ScalarFn,
        period: f64,
    },
}

impl std::fmt::Debug for Growth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Growth::Logistic(a) => write!(f, "Logistic({})", a.shape()),
            Growth::Custom { period, .. } => write!(f, "Custom {{ period: {period} }}"),
        }
    }
}

impl Growth {
    #[inline]
    pub fn value(&self, t: f64, x: &[f64], u: f64) -> f64 {
        match self {
            Growth::Logistic(a) => a.eval(t, x) - u,
            Growth::Custom { f, .. } => f(t, x, u),
        }
    }

    #[inline]
    pub fn du(&self, t: f64, x: &[f64], u: f64) -> f64 {
        match self {
            Growth::Logistic(_) => -1.0,
            Growth::Custom { df, .. } => df(t, x, u),
        }
    }

    pub fn period(&self) -> f64 {
        match self {
            Growth::Logistic(a) => a.period(),
            Growth::Custom { period, .. } => *period,
        }
    }
}

/// Reaction `F(t, x, u)` with its analytic `∂_u F`.
#[derive(Clone, Debug)]
pub enum ReactionTerm {
    Zero,
    /// `F = a(t, x) u`
    Linear(TimePeriodicCoefficient),
    /// `F = u f(t, x, u)`
    Kpp(Growth),
    Custom(Growth),
}

impl ReactionTerm {
    #[inline]
    pub fn value(&self, t: f64, x: &[f64], u: f64) -> f64 {
        match self {
            ReactionTerm::Zero => 0.0,
            ReactionTerm::Linear(a) => a.eval(t, x) * u,
            ReactionTerm::Kpp(g) => u * g.value(t, x, u),
            ReactionTerm::Custom(g) => g.value(t, x, u),
        }
    }

    #[inline]
    pub fn du(&self, t: f64, x: &[f64], u: f64) -> f64 {
        match self {
            ReactionTerm::Zero => 0.0,
            ReactionTerm::Linear(a) => a.eval(t, x),
            ReactionTerm::Kpp(g) => g.value(t, x, u) + u * g.du(t, x, u),
            ReactionTerm::Custom(g) => g.du(t, x, u),
        }
    }

    /// Time period, 0 for autonomous reactions.
    pub fn period(&self) -> f64 {
        match self {
            ReactionTerm::Zero => 0.0,
            ReactionTerm::Linear(a) => a.period(),
            ReactionTerm::Kpp(g) | ReactionTerm::Custom(g) => g.period(),
        }
    }

    /// Advances `u' = F(t, x, u)` pointwise over `[t, t + tau]`.
    fn advance(&self, t: f64, tau: f64, coords: &[f64], dim: usize, u: &mut [f64]) {
        let tm = t + 0.5 * tau;
        match self {
            ReactionTerm::Zero => {}
            ReactionTerm::Linear(a) => {
                for (i, ui) in u.iter_mut().enumerate() {
                    *ui *= (tau * a.eval(tm, &coords[i * dim..(i + 1) * dim])).exp();
                }
            }
            _ => {
                for (i, ui) in u.iter_mut().enumerate() {
                    let x = &coords[i * dim..(i + 1) * dim];
                    let f = self.value(tm, x, *ui);
                    let j = self.du(tm, x, *ui);
                    *ui += tau * phi1(tau * j) * f;
                }
            }
        }
    }
}

/// `(e^z − 1)/z`
#[inline]
fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 + 0.5 * z
    } else {
        z.exp_m1() / z
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LinearScheme {
    #[default]
    BackwardEuler,
    Trapezoidal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Banded LU when the band is small enough, CG otherwise.
    #[default]
    Auto,
    Banded,
    ConjugateGradient,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperOptions {
    pub scheme: LinearScheme,
    pub solver: SolverKind,
    /// Relative residual target for CG.
    pub cg_tol: f64,
}

impl Default for StepperOptions {
    fn default() -> Self {
        StepperOptions {
            scheme: LinearScheme::BackwardEuler,
            solver: SolverKind::Auto,
            cg_tol: 1e-13,
        }
    }
}

/// Fixed-step integrator bound to one operator and one `dt`.
#[derive(Clone, Debug)]
pub struct Stepper {
    op: Arc<DispersalOperator>,
    dt: f64,
    scheme: LinearScheme,
    solver: StepSolver,
    coords: Vec<f64>,
}

impl Stepper {
    pub fn new(op: Arc<DispersalOperator>, dt: f64, options: StepperOptions) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let c = match options.scheme {
            LinearScheme::BackwardEuler => dt,
            LinearScheme::Trapezoidal => 0.5 * dt,
        };
        let solver = match options.solver {
            SolverKind::Auto => StepSolver::auto(&op, c, options.cg_tol),
            SolverKind::Banded => StepSolver::banded(&op, c),
            SolverKind::ConjugateGradient => StepSolver::conjugate_gradient(&op, c, options.cg_tol),
        };
        let grid = op.grid();
        let coords = op
            .active_nodes()
            .iter()
            .flat_map(|&n| grid.point(n).iter().copied())
            .collect();
        Ok(Stepper {
            op,
            dt,
            scheme: options.scheme,
            solver,
            coords,
        })
    }

    pub fn operator(&self) -> &Arc<DispersalOperator> {
        &self.op
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One step from `t` on the active vector `u`.
    pub fn step(&self, reaction: &ReactionTerm, t: f64, u: &mut Vec<f64>) -> Result<()> {
        let half = 0.5 * self.dt;
        let dim = self.op.grid().dimension();
        reaction.advance(t, half, &self.coords, dim, u);
        let rhs = match self.scheme {
            LinearScheme::BackwardEuler => u.clone(),
            LinearScheme::Trapezoidal => {
                let mut au = vec![0.0; u.len()];
                self.op.apply_active(u, &mut au);
                u.iter().zip(&au).map(|(v, a)| v + half * a).collect()
            }
        };
        self.solver.solve(&self.op, &rhs, u)?;
        reaction.advance(t + half, half, &self.coords, dim, u);
        Ok(())
    }

    /// `steps` steps from `t0`, checking for blow-up after each.
    pub fn advance(
        &self,
        reaction: &ReactionTerm,
        t0: f64,
        steps: usize,
        u: &mut Vec<f64>,
    ) -> Result<()> {
        for k in 0..steps {
            let t = t0 + k as f64 * self.dt;
            self.step(reaction, t, u)?;
            check_blow_up(u, t + self.dt)?;
        }
        Ok(())
    }
}

fn check_blow_up(u: &[f64], time: f64) -> Result<()> {
    let norm = u.iter().fold(0.0f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) });
    if norm.is_nan() || norm > BLOW_UP_THRESHOLD {
        return Err(Error::BlowUp {
            time,
            norm: if norm.is_nan() { f64::INFINITY } else { norm },
        });
    }
    Ok(())
}

/// Number of `dt` steps from `start` to `time`, if integral.
pub fn steps_between(start: f64, time: f64, dt: f64) -> Result<usize> {
    let k = (time - start) / dt;
    let n = k.round();
    if n < 0.0 || (k - n).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::NonMultipleSnapshot { time, dt });
    }
    Ok(n as usize)
}

#[derive(Clone, Debug)]
pub struct SemilinearProblem {
    operator: Arc<DispersalOperator>,
    reaction: ReactionTerm,
    initial: Field,
    start: f64,
    end: f64,
}

impl SemilinearProblem {
    pub fn new(
        operator: Arc<DispersalOperator>,
        reaction: ReactionTerm,
        initial: Field,
        start: f64,
        end: f64,
    ) -> Result<Self> {
        operator.check_grid(&initial)?;
        if !(end > start) {
            return Err(Error::InvalidArgument(format!(
                "end time {end} must exceed start time {start}"
            )));
        }
        if operator.bc() == BoundaryCondition::Dirichlet {
            let scale = initial.sup_norm().max(1.0);
            let grid = operator.grid();
            for n in 0..grid.node_count() {
                if operator.active_slot(n).is_none() && initial.values()[n].abs() > 1e-12 * scale {
                    let place = if grid.role(n) == NodeRole::Ghost { "ghost" } else { "boundary" };
                    return Err(Error::InvalidArgument(format!(
                        "Dirichlet initial data must vanish on {place} node at {:?}",
                        grid.point(n)
                    )));
                }
            }
        }
        let initial = initial.with_time(start);
        Ok(SemilinearProblem {
            operator,
            reaction,
            initial,
            start,
            end,
        })
    }

    pub fn operator(&self) -> &Arc<DispersalOperator> {
        &self.operator
    }

    pub fn reaction(&self) -> &ReactionTerm {
        &self.reaction
    }

    pub fn initial(&self) -> &Field {
        &self.initial
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<Field>,
    pub steps: usize,
    pub dt: f64,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(Field::time).collect()
    }

    pub fn final_field(&self) -> &Field {
        self.snapshots.last().expect("trajectories hold at least u0")
    }

    /// Max over snapshots of the sup norm.
    pub fn sup_norm(&self) -> f64 {
        self.snapshots.iter().map(Field::sup_norm).fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.snapshots.iter().map(Field::min_value).fold(f64::INFINITY, f64::min)
    }
}

/// Integrates with the default stepper options.
pub fn solve(problem: &SemilinearProblem, dt: f64, snapshot_times: &[f64]) -> Result<Trajectory> {
    solve_with(problem, dt, snapshot_times, StepperOptions::default())
}

/// Integrates from `s` and records `u₀` plus a snapshot at every requested
/// time. An empty request records only the end time.
pub fn solve_with(
    problem: &SemilinearProblem,
    dt: f64,
    snapshot_times: &[f64],
    options: StepperOptions,
) -> Result<Trajectory> {
    let stepper = Stepper::new(problem.operator.clone(), dt, options)?;
    solve_on(&stepper, problem, snapshot_times)
}

/// As [`solve_with`] on an existing stepper.
pub fn solve_on(
    stepper: &Stepper,
    problem: &SemilinearProblem,
    snapshot_times: &[f64],
) -> Result<Trajectory> {
    let dt = stepper.dt();
    let s = problem.start;
    let requested: Vec<f64> = if snapshot_times.is_empty() {
        vec![problem.end]
    } else {
        snapshot_times.to_vec()
    };
    let mut marks = Vec::with_capacity(requested.len());
    for &t in &requested {
        if t < s - 1e-12 || t > problem.end + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "snapshot time {t} outside [{s}, {}]",
                problem.end
            )));
        }
        marks.push((t, steps_between(s, t, dt)?));
    }
    if marks.windows(2).any(|w| w[1].1 <= w[0].1) {
        return Err(Error::InvalidArgument(
            "snapshot times must be strictly increasing".into(),
        ));
    }

    let op = &problem.operator;
    let mut values = problem.initial.values().to_vec();
    let mut u = op.gather(&values);
    let mut snapshots = vec![problem.initial.clone()];
    let mut done = 0usize;
    for (t, step) in marks {
        if step == 0 {
            continue;
        }
        stepper.advance(&problem.reaction, s + done as f64 * dt, step - done, &mut u)?;
        done = step;
        op.scatter(&u, &mut values);
        snapshots.push(Field::new(op.grid().clone(), values.clone(), t)?);
    }
    Ok(Trajectory {
        snapshots,
        steps: done,
        dt,
    })
}

/// `true` iff `lower ≤ upper + tol` at every non-ghost node of every snapshot.
pub fn check_comparison(lower: &Trajectory, upper: &Trajectory, tol: f64) -> Result<bool> {
    if lower.snapshots.len() != upper.snapshots.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} vs {} snapshots",
            lower.snapshots.len(),
            upper.snapshots.len()
        )));
    }
    let mut ordered = true;
    for (a, b) in lower.snapshots.iter().zip(&upper.snapshots) {
        if (a.time() - b.time()).abs() > 1e-12 * a.time().abs().max(1.0) {
            return Err(Error::ShapeMismatch(format!(
                "snapshot times differ: {} vs {}",
                a.time(),
                b.time()
            )));
        }
        if !Arc::ptr_eq(a.grid(), b.grid()) && **a.grid() != **b.grid() {
            return Err(Error::ShapeMismatch("snapshots live on different grids".into()));
        }
        let grid = a.grid();
        if grid.non_ghost_nodes().any(|n| a.values()[n] > b.values()[n] + tol) {
            ordered = false;
        }
    }
    Ok(ordered)
}

/// Everything shared by the local and nonlocal runs of a δ-sweep.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub domain: Domain,
    pub bc: BoundaryCondition,
    pub kernel: KernelProfile,
    pub h: f64,
    pub dt: f64,
    pub calibration: RateCalibration,
    pub stepper: StepperOptions,
}

impl Discretization {
    pub fn new(
        domain: Domain,
        bc: BoundaryCondition,
        kernel: KernelProfile,
        h: f64,
        dt: f64,
    ) -> Self {
        Discretization {
            domain,
            bc,
            kernel,
            h,
            dt,
            calibration: RateCalibration::default(),
            stepper: StepperOptions::default(),
        }
    }

    /// Grid with a ghost band of width `max_delta` for Dirichlet problems.
    pub fn grid(&self, max_delta: f64) -> Result<Arc<Grid>> {
        let ghost = if self.bc == BoundaryCondition::Dirichlet { max_delta } else { 0.0 };
        Ok(Arc::new(Grid::build(self.domain.clone(), self.h, ghost)?))
    }

    pub fn local(&self, grid: &Arc<Grid>) -> Result<Arc<DispersalOperator>> {
        Ok(Arc::new(assemble_local(grid.clone(), self.bc)?))
    }

    pub fn nonlocal(&self, grid: &Arc<Grid>, delta: f64) -> Result<Arc<DispersalOperator>> {
        Ok(Arc::new(assemble_nonlocal(
            grid.clone(),
            &self.kernel,
            delta,
            self.bc,
            self.calibration,
        )?))
    }

    /// Deltas strictly decreasing, all positive, and `h ≤ min(δ)/8`.
    pub fn validate_sweep(&self, deltas: &[f64]) -> Result<()> {
        if deltas.is_empty() {
            return Err(Error::InvalidArgument("deltas must not be empty".into()));
        }
        if deltas.iter().any(|&d| !(d > 0.0)) {
            return Err(Error::InvalidArgument("deltas must be positive".into()));
        }
        if deltas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument("deltas must be strictly decreasing".into()));
        }
        let min = deltas[deltas.len() - 1];
        if self.h > min / 8.0 * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "h = {} violates h <= min(deltas)/8 = {}",
                self.h,
                min / 8.0
            )));
        }
        Ok(())
    }
}

/// Runs the local problem once and the nonlocal problem per δ, recording
/// `e(δ) = max over snapshots of sup_distance` and empirical orders.
///
/// Snapshots are taken at `snapshots` equally spaced times after `s`.
pub fn theorem_a_experiment<U>(
    disc: &Discretization,
    reaction: &ReactionTerm,
    initial: U,
    start: f64,
    horizon: f64,
    deltas: &[f64],
    snapshots: usize,
) -> Result<ConvergenceReport>
where
    U: Fn(&[f64]) -> f64 + Sync,
{
    disc.validate_sweep(deltas)?;
    if snapshots == 0 {
        return Err(Error::InvalidArgument("snapshot count must be positive".into()));
    }
    let grid = disc.grid(deltas[0])?;
    let u0 = Field::from_fn(grid.clone(), &initial);
    let times: Vec<f64> = (1..=snapshots)
        .map(|k| start + horizon * k as f64 / snapshots as f64)
        .collect();

    let run = |op: Arc<DispersalOperator>| -> Result<Trajectory> {
        // the local Dirichlet operator holds boundary nodes at zero
        let mut init = u0.clone();
        if op.bc() == BoundaryCondition::Dirichlet {
            for n in 0..grid.node_count() {
                if op.active_slot(n).is_none() {
                    init.values_mut()[n] = 0.0;
                }
            }
        }
        let problem = SemilinearProblem::new(op, reaction.clone(), init, start, start + horizon)?;
        solve_with(&problem, disc.dt, &times, disc.stepper)
    };

    let local = run(disc.local(&grid)?)?;
    let errors: Vec<f64> = deltas
        .par_iter()
        .map(|&delta| -> Result<f64> {
            let nonlocal = run(disc.nonlocal(&grid, delta)?)?;
            let mut e = 0.0f64;
            for (a, b) in nonlocal.snapshots.iter().zip(&local.snapshots) {
                e = e.max(sup_distance(a, b)?);
            }
            Ok(e)
        })
        .collect::<Result<_>>()?;
    Ok(ConvergenceReport::from_errors(deltas, &errors))
}
