//! Unit dispersal kernels, their δ-rescaling and the second-moment constant.
//!
//! A profile `k₀` is radial, nonnegative, supported in the closed unit ball and
//! normalised to unit mass. The rescaled kernel is `k_δ(z) = δ^{-N} k₀(z/δ)`,
//! and the dispersal rate `ν_δ = C/δ²` uses `C = (½ ∫ k₀(z) z_N² dz)^{-1}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Midpoint cells per unit of support radius.
pub const DEFAULT_PANELS: usize = 512;

/// Largest tolerated deviation of the quadrature mass from 1.
pub const MASS_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// `(1 − |z|²)²` on the unit ball. Only C¹ at the edge, but with closed-form moments.
    QuarticPolynomial,
    /// `exp(−1/(1 − |z|²))`, smooth, normalised numerically.
    StandardMollifier,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::QuarticPolynomial => "quartic",
            KernelFamily::StandardMollifier => "mollifier",
        }
    }

    fn shape(self, r2: f64) -> f64 {
        if r2 >= 1.0 {
            return 0.0;
        }
        match self {
            KernelFamily::QuarticPolynomial => {
                let s = 1.0 - r2;
                s * s
            }
            KernelFamily::StandardMollifier => (-1.0 / (1.0 - r2)).exp(),
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "quartic" | "quartic-polynomial" => Ok(KernelFamily::QuarticPolynomial),
            "mollifier" | "standard-mollifier" => Ok(KernelFamily::StandardMollifier),
            other => Err(Error::InvalidArgument(format!("unknown kernel family '{other}'"))),
        }
    }
}

/// A normalised radial kernel in dimension 1 or 2 together with its moment constant.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelProfile {
    family: KernelFamily,
    dimension: usize,
    normalization: f64,
    moment_constant: f64,
}

impl KernelProfile {
    pub fn new(family: KernelFamily, dimension: usize) -> Result<Self> {
        if !(1..=2).contains(&dimension) {
            return Err(Error::InvalidArgument(format!(
                "kernel dimension must be 1 or 2, got {dimension}"
            )));
        }
        let normalization = match (family, dimension) {
            (KernelFamily::QuarticPolynomial, 1) => 15.0 / 16.0,
            (KernelFamily::QuarticPolynomial, _) => 3.0 / PI,
            (KernelFamily::StandardMollifier, _) => {
                let mass = midpoint_integral(dimension, DEFAULT_PANELS, |z| {
                    family.shape(norm_squared(z))
                });
                1.0 / mass
            }
        };
        let mut profile = KernelProfile {
            family,
            dimension,
            normalization,
            moment_constant: f64::NAN,
        };
        profile.moment_constant = profile.compute_moment_constant(DEFAULT_PANELS)?;
        Ok(profile)
    }

    pub fn quartic(dimension: usize) -> Result<Self> {
        Self::new(KernelFamily::QuarticPolynomial, dimension)
    }

    pub fn mollifier(dimension: usize) -> Result<Self> {
        Self::new(KernelFamily::StandardMollifier, dimension)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `C = (½ ∫ k₀(z) z_N² dz)^{-1}` at the default quadrature resolution.
    pub fn moment_constant(&self) -> f64 {
        self.moment_constant
    }

    /// `k₀` as a function of `|z|²`.
    #[inline]
    pub fn radial(&self, r2: f64) -> f64 {
        self.normalization * self.family.shape(r2)
    }

    /// `k₀(z)`; zero whenever `|z| ≥ 1`.
    pub fn evaluate(&self, z: &[f64]) -> f64 {
        debug_assert_eq!(z.len(), self.dimension);
        self.radial(norm_squared(z))
    }

    /// `k_δ(z) = δ^{-N} k₀(z/δ)`.
    pub fn scaled(&self, delta: f64, displacement: &[f64]) -> f64 {
        debug_assert!(delta > 0.0);
        let r2 = displacement.iter().map(|d| (d / delta) * (d / delta)).sum::<f64>();
        self.radial(r2) / delta.powi(self.dimension as i32)
    }

    /// Quadrature mass `∫ k₀` with `panels` midpoint cells per unit radius.
    pub fn mass(&self, panels: usize) -> f64 {
        midpoint_integral(self.dimension, panels, |z| self.evaluate(z))
    }

    /// Recomputes `C` with `panels` midpoint cells per unit radius, failing when
    /// the same rule does not reproduce unit mass.
    pub fn compute_moment_constant(&self, panels: usize) -> Result<f64> {
        let mass = self.mass(panels);
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::QuadratureFailure {
                mass,
                tolerance: MASS_TOLERANCE,
            });
        }
        let last = self.dimension - 1;
        let second = midpoint_integral(self.dimension, panels, |z| {
            self.evaluate(z) * z[last] * z[last]
        });
        Ok(1.0 / (0.5 * second))
    }
}

/// `ν_δ = C/δ²`.
pub fn dispersal_rate(c: f64, delta: f64) -> f64 {
    c / (delta * delta)
}

/// Composite midpoint rule over `[-1, 1]^N` with `panels` cells per unit length.
pub fn midpoint_integral<F>(dimension: usize, panels: usize, f: F) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let h = 1.0 / panels as f64;
    let cells = 2 * panels;
    let centre = |i: usize| -1.0 + (i as f64 + 0.5) * h;
    match dimension {
        1 => (0..cells).map(|i| f(&[centre(i)])).sum::<f64>() * h,
        2 => {
            let mut total = 0.0;
            for j in 0..cells {
                let y = centre(j);
                let mut row = 0.0;
                for i in 0..cells {
                    row += f(&[centre(i), y]);
                }
                total += row;
            }
            total * h * h
        }
        _ => panic!("midpoint_integral supports dimensions 1 and 2"),
    }
}

#[inline]
pub(crate) fn norm_squared(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum()
}
