//! Nonlocal dispersal operators with rescaled kernels, their local (Laplacian)
//! counterparts, and the numerical experiments comparing the two as the
//! dispersal distance shrinks.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernels`]: the unit kernel, its rescaling and the moment constant.
//! * [`grid`]: domains, uniform grids with Dirichlet ghost bands, nodal fields.
//! * [`coefficient`]: time-periodic analytic coefficients.
//! * [`operators`]: sparse assembly of the nonlocal and local dispersal operators.
//! * [`linalg`]: banded LU and conjugate-gradient solvers for implicit steps.
//! * [`evolution`]: time integration, comparison checks, solution convergence.
//! * [`spectral`]: period maps, principal spectrum points, eigenvalue convergence.
//! * [`kpp`]: positive periodic solutions of KPP equations and their convergence.

pub mod coefficient;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod kernels;
pub mod kpp;
pub mod linalg;
pub mod operators;
pub mod report;
pub mod spectral;

pub use coefficient::{CoefficientShape, TimePeriodicCoefficient};
pub use error::{Error, Result};
pub use evolution::{
    Discretization, Growth, LinearScheme, ReactionTerm, SemilinearProblem, SolverKind,
    StepperOptions, Trajectory,
};
pub use grid::{Domain, DomainKind, Field, Grid};
pub use kernels::{KernelFamily, KernelProfile};
pub use operators::{BoundaryCondition, DispersalOperator, OperatorKind, RateCalibration};
pub use report::{ConvergenceReport, OrbitReport, SpectrumReport};
