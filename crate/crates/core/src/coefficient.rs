//! Time-periodic analytic coefficients `a(t, x)`.
//!
//! The catalog shapes are written in terms of the reduced phase
//! `θ = (t mod T)/T`, so `a(t + T, x) == a(t, x)` bitwise whenever `t + T`
//! is itself exactly representable.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoefficientShape {
    /// `c`
    Const(f64),
    /// `c0 + c1·sin(2πt/T)`
    TimeSine { c0: f64, c1: f64 },
    /// `c0 + c1·cos(k·x₁)`
    SpaceCosine { c0: f64, c1: f64, k: f64 },
    /// `c0 + c1·sin(2πt/T)·cos(k·x₁)`
    TxProduct { c0: f64, c1: f64, k: f64 },
}

impl CoefficientShape {
    /// Adds `c` to the constant part.
    pub fn shifted(self, c: f64) -> Self {
        match self {
            CoefficientShape::Const(v) => CoefficientShape::Const(v + c),
            CoefficientShape::TimeSine { c0, c1 } => CoefficientShape::TimeSine { c0: c0 + c, c1 },
            CoefficientShape::SpaceCosine { c0, c1, k } => {
                CoefficientShape::SpaceCosine { c0: c0 + c, c1, k }
            }
            CoefficientShape::TxProduct { c0, c1, k } => {
                CoefficientShape::TxProduct { c0: c0 + c, c1, k }
            }
        }
    }

    /// `true` when the shape does not depend on x.
    pub fn is_space_free(&self) -> bool {
        matches!(self, CoefficientShape::Const(_) | CoefficientShape::TimeSine { .. })
    }

    /// Sup of |a| over all (t, x).
    pub fn sup_abs(&self) -> f64 {
        match *self {
            CoefficientShape::Const(c) => c.abs(),
            CoefficientShape::TimeSine { c0, c1 }
            | CoefficientShape::SpaceCosine { c0, c1, .. }
            | CoefficientShape::TxProduct { c0, c1, .. } => c0.abs() + c1.abs(),
        }
    }
}

impl fmt::Display for CoefficientShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientShape::Const(c) => write!(f, "const({c})"),
            CoefficientShape::TimeSine { c0, c1 } => write!(f, "time-sine({c0}, {c1})"),
            CoefficientShape::SpaceCosine { c0, c1, k } => {
                write!(f, "space-cosine({c0}, {c1}, {k})")
            }
            CoefficientShape::TxProduct { c0, c1, k } => write!(f, "tx-product({c0}, {c1}, {k})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimePeriodicCoefficient {
    period: f64,
    shape: CoefficientShape,
}

impl TimePeriodicCoefficient {
    pub fn new(period: f64, shape: CoefficientShape) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
        }
        Ok(TimePeriodicCoefficient { period, shape })
    }

    pub fn constant(period: f64, c: f64) -> Result<Self> {
        Self::new(period, CoefficientShape::Const(c))
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn shape(&self) -> CoefficientShape {
        self.shape
    }

    pub fn shifted(&self, c: f64) -> Self {
        TimePeriodicCoefficient {
            period: self.period,
            shape: self.shape.shifted(c),
        }
    }

    #[inline]
    fn time_sine(&self, t: f64) -> f64 {
        let phase = t.rem_euclid(self.period) / self.period;
        (2.0 * PI * phase).sin()
    }

    #[inline]
    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        match self.shape {
            CoefficientShape::Const(c) => c,
            CoefficientShape::TimeSine { c0, c1 } => c0 + c1 * self.time_sine(t),
            CoefficientShape::SpaceCosine { c0, c1, k } => c0 + c1 * (k * x[0]).cos(),
            CoefficientShape::TxProduct { c0, c1, k } => {
                c0 + c1 * self.time_sine(t) * (k * x[0]).cos()
            }
        }
    }

    /// `(1/T) ∫₀^T a(t, x) dt` by the composite trapezoid rule with `panels` panels.
    pub fn time_average(&self, x: &[f64], panels: usize) -> f64 {
        let dt = self.period / panels as f64;
        // periodic integrand: the trapezoid end weights merge into one full weight
        (0..panels).map(|k| self.eval(k as f64 * dt, x)).sum::<f64>() / panels as f64
    }
}
