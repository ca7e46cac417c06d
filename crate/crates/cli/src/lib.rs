//! Config-driven runner for the dispersal experiments.
//!
//! Each run reads one config, dispatches to the matching core routine and
//! writes CSV reports plus `run.txt`, which echoes the resolved config as
//! re-parseable `key = value` lines followed by the results as comments.

pub mod config;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use dispersal_core::evolution::{solve_with, theorem_a_experiment};
use dispersal_core::kpp::{positive_periodic_solution, theorem_c_experiment, KppProblem, OrbitOptions};
use dispersal_core::spectral::{principal_value, theorem_b_experiment, PeriodMap};
use dispersal_core::{
    BoundaryCondition, CoefficientShape, DispersalOperator, Discretization, Field, Growth,
    KernelProfile, OperatorKind, ReactionTerm, SemilinearProblem, StepperOptions,
    TimePeriodicCoefficient,
};

pub use config::{Experiment, ExperimentConfig};
use config::ReactionSpec;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config key '{key}': {message}")]
    Config { key: String, message: String },
    #[error(transparent)]
    Core(#[from] dispersal_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 2 for invalid input, 3 for numerical failure, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
            CliError::Io { .. } => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Reads the config at `path` and runs it, writing outputs into `out`.
pub fn run_file(experiment: Experiment, path: &Path, out: &Path) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let config = ExperimentConfig::parse(&text, experiment)?;
    run(&config, out)
}

/// Runs `config`; returns the summary lines that were appended to `run.txt`.
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<Vec<String>, CliError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let summary = match config.experiment {
        Experiment::Simulate => simulate(config, out)?,
        Experiment::Spectrum => spectrum(config, out)?,
        Experiment::KppOrbit => kpp_orbit(config, out)?,
        Experiment::ConvergeA => converge_a(config, out)?,
        Experiment::ConvergeB => converge_b(config, out)?,
        Experiment::ConvergeC => converge_c(config, out)?,
    };
    let mut text = config.render();
    for line in &summary {
        text.push_str("# ");
        text.push_str(line);
        text.push('\n');
    }
    write_file(&out.join("run.txt"), |w| w.write_all(text.as_bytes()))?;
    Ok(summary)
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

fn discretization(config: &ExperimentConfig) -> Result<Discretization, CliError> {
    let domain = config.domain.build()?;
    let kernel = KernelProfile::new(config.kernel, domain.dimension())?;
    let mut disc = Discretization::new(domain, config.bc, kernel, config.h, config.dt);
    disc.calibration = config.calibration;
    disc.stepper = StepperOptions {
        scheme: config.scheme,
        solver: config.solver,
        ..StepperOptions::default()
    };
    Ok(disc)
}

/// The single operator of a non-sweep experiment.
fn operator(config: &ExperimentConfig, disc: &Discretization) -> Result<Arc<DispersalOperator>, CliError> {
    match config.kind {
        OperatorKind::Local => Ok(disc.local(&disc.grid(0.0)?)?),
        OperatorKind::Nonlocal => {
            let delta = config.delta.expect("validated");
            Ok(disc.nonlocal(&disc.grid(delta)?, delta)?)
        }
    }
}

fn coefficient(config: &ExperimentConfig, shape: CoefficientShape) -> Result<TimePeriodicCoefficient, CliError> {
    Ok(TimePeriodicCoefficient::new(config.period, shape)?)
}

fn reaction(config: &ExperimentConfig) -> Result<ReactionTerm, CliError> {
    Ok(match config.reaction {
        ReactionSpec::Zero => ReactionTerm::Zero,
        ReactionSpec::Linear(a) => ReactionTerm::Linear(coefficient(config, a)?),
        ReactionSpec::Logistic(a) => ReactionTerm::Kpp(Growth::Logistic(coefficient(config, a)?)),
    })
}

fn growth(config: &ExperimentConfig) -> Result<Growth, CliError> {
    match config.reaction {
        ReactionSpec::Logistic(a) => Ok(Growth::Logistic(coefficient(config, a)?)),
        _ => Err(CliError::Config {
            key: "reaction".into(),
            message: "expected logistic(<coefficient>)".into(),
        }),
    }
}

fn orbit_options(config: &ExperimentConfig) -> OrbitOptions {
    OrbitOptions {
        tol: config.tol,
        max_periods: config.max_periods,
        snapshots: config.orbit_snapshots,
        ..OrbitOptions::default()
    }
}

fn simulate(config: &ExperimentConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let disc = discretization(config)?;
    let op = operator(config, &disc)?;
    let f = config.initial.expect("validated").evaluator(&config.domain);
    let mut u0 = Field::from_fn(op.grid().clone(), &f).with_time(config.start);
    if op.bc() == BoundaryCondition::Dirichlet {
        // ghost and eliminated boundary nodes carry the zero exterior value
        for n in 0..op.grid().node_count() {
            if op.active_slot(n).is_none() {
                u0.values_mut()[n] = 0.0;
            }
        }
    }
    let end = config.start + config.horizon;
    let problem = SemilinearProblem::new(op, reaction(config)?, u0, config.start, end)?;
    let times: Vec<f64> = (1..=config.snapshots)
        .map(|k| config.start + config.horizon * k as f64 / config.snapshots as f64)
        .collect();
    let traj = solve_with(&problem, config.dt, &times, disc.stepper)?;
    for (k, s) in traj.snapshots.iter().enumerate() {
        write_file(&out.join(format!("snapshot_{k:03}.csv")), |w| s.write_csv(w))?;
    }
    Ok(vec![
        format!("snapshots written = {}", traj.snapshots.len()),
        format!("steps = {}", traj.steps),
        format!("final sup norm = {:e}", traj.final_field().sup_norm()),
        format!("min value = {:e}", traj.min_value()),
    ])
}

fn spectrum(config: &ExperimentConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let disc = discretization(config)?;
    let op = operator(config, &disc)?;
    let a = coefficient(config, config.coefficient.expect("validated"))?;
    let map = PeriodMap::new(op, a, config.dt, disc.stepper)?;
    let r = principal_value(&map, config.tol, config.max_iters)?;
    let csv = format!(
        "lambda,iterations,residual,is_principal_eigenvalue\n{:e},{},{:e},{}\n",
        r.lambda,
        r.iterations,
        r.residual,
        u8::from(r.is_principal_eigenvalue)
    );
    write_file(&out.join("spectrum.csv"), |w| w.write_all(csv.as_bytes()))?;
    write_file(&out.join("eigenfunction.csv"), |w| r.eigenfunction.write_csv(w))?;
    Ok(vec![
        format!("lambda = {:e}", r.lambda),
        format!("iterations = {}", r.iterations),
        format!("residual = {:e}", r.residual),
        format!("principal eigenvalue = {}", r.is_principal_eigenvalue),
    ])
}

fn kpp_orbit(config: &ExperimentConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let disc = discretization(config)?;
    let op = operator(config, &disc)?;
    let problem = KppProblem::new(op, growth(config)?, config.dt, disc.stepper)?;
    let orbit = positive_periodic_solution(&problem, &orbit_options(config))?;
    write_file(&out.join("orbit.csv"), |w| orbit.write_csv(w))?;
    let d = &orbit.diagnostics;
    Ok(vec![
        format!("h2 lambda = {:e}", orbit.h2_lambda),
        format!("saturation = {}", orbit.saturation),
        format!("min over orbit = {:e}", orbit.min_active()),
        format!("max over orbit = {:e}", orbit.max_value()),
        format!("periods (super, sub) = ({}, {})", d.super_periods, d.sub_periods),
        format!("start agreement = {:e}", d.start_agreement),
        format!("periodicity residual = {:e}", d.periodicity_residual),
    ])
}

fn converge_a(config: &ExperimentConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let disc = discretization(config)?;
    let f = config.initial.expect("validated").evaluator(&config.domain);
    let report = theorem_a_experiment(
        &disc,
        &reaction(config)?,
        f,
        config.start,
        config.horizon,
        &config.deltas,
        config.snapshots,
    )?;
    write_file(&out.join("report.csv"), |w| w.write_all(report.to_csv().as_bytes()))?;
    Ok(vec![
        format!("errors = {:?}", report.errors()),
        format!("strictly decreasing = {}", report.is_strictly_decreasing()),
        format!("min empirical order = {:?}", report.min_order()),
    ])
}

fn converge_b(config: &ExperimentConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let disc = discretization(config)?;
    let a = coefficient(config, config.coefficient.expect("validated"))?;
    let report = theorem_b_experiment(&disc, a, &config.deltas, config.tol, config.max_iters)?;
    write_file(&out.join("report.csv"), |w| w.write_all(report.to_csv().as_bytes()))?;
    Ok(vec![
        format!("lambda_r = {:e}", report.lambda_r),
        format!("gaps = {:?}", report.gaps()),
    ])
}

fn converge_c(config: &ExperimentConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let disc = discretization(config)?;
    let report = theorem_c_experiment(&disc, &growth(config)?, &config.deltas, &orbit_options(config))?;
    write_file(&out.join("report.csv"), |w| w.write_all(report.to_csv().as_bytes()))?;
    let failed = report.rows.iter().filter(|r| !r.h2_ok).count();
    Ok(vec![
        format!("h2 lambda (local) = {:e}", report.h2_lambda_local),
        format!("gaps = {:?}", report.gaps()),
        format!("rows without a positive orbit = {failed}"),
    ])
}
