//! Sparse assembly of the nonlocal dispersal operator and the discrete
//! Laplacian under Dirichlet, Neumann and periodic boundary conditions.
//!
//! Both kinds share one representation. Row `i` acts as
//!
//! ```text
//! (A u)_i = Σ_j w_ij (u_j − u_i) − leak_i · u_i
//! ```
//!
//! over the active unknowns, with off-diagonal weights `w_ij ≥ 0` and a
//! nonnegative `leak` carrying the Dirichlet loss to the zero exterior.
//! Applying rows as differences makes `A·1 = 0` exact whenever the leak
//! vanishes.

use std::io::{self, Write};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, NodeRole};
use crate::kernels::{dispersal_rate, KernelProfile};

/// Minimum kernel radius in grid cells.
pub const MIN_RESOLUTION: f64 = 4.0;

const PARALLEL_NNZ: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    Periodic,
}

impl BoundaryCondition {
    /// 1, 2, 3 for Dirichlet, Neumann, periodic.
    pub fn index(self) -> usize {
        match self {
            BoundaryCondition::Dirichlet => 1,
            BoundaryCondition::Neumann => 2,
            BoundaryCondition::Periodic => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::Periodic => "periodic",
        }
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "dirichlet" => Ok(BoundaryCondition::Dirichlet),
            "neumann" => Ok(BoundaryCondition::Neumann),
            "periodic" => Ok(BoundaryCondition::Periodic),
            other => Err(Error::InvalidArgument(format!("unknown boundary condition '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Nonlocal,
    Local,
}

/// How the nonlocal rate ν is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RateCalibration {
    /// `ν = 2 / (h^N Σ_m k_δ(z_m) z_{m,N}²)`: the sampled kernel reproduces
    /// the Laplacian exactly on quadratics.
    #[default]
    Lattice,
    /// `ν = C/δ²` with the continuum moment constant.
    Continuum,
}

#[derive(Clone, Debug)]
pub struct DispersalOperator {
    kind: OperatorKind,
    bc: BoundaryCondition,
    grid: Arc<Grid>,
    delta: Option<f64>,
    nu: Option<f64>,
    /// active index → grid node
    active: Vec<usize>,
    /// grid node → active index
    slot: Vec<Option<usize>>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
    leak: Vec<f64>,
    /// positive diagonal `W` with `W A` symmetric
    sym_weights: Vec<f64>,
}

impl DispersalOperator {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn delta(&self) -> Option<f64> {
        self.delta
    }

    pub fn nu(&self) -> Option<f64> {
        self.nu
    }

    /// `ν δ²`, the moment constant the assembled operator actually uses.
    pub fn effective_moment_constant(&self) -> Option<f64> {
        Some(self.nu? * self.delta? * self.delta?)
    }

    /// Number of unknowns.
    pub fn dim(&self) -> usize {
        self.active.len()
    }

    pub fn active_nodes(&self) -> &[usize] {
        &self.active
    }

    pub fn active_slot(&self, node: usize) -> Option<usize> {
        self.slot[node]
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.weights[r])
    }

    pub fn leak(&self) -> &[f64] {
        &self.leak
    }

    pub fn sym_weights(&self) -> &[f64] {
        &self.sym_weights
    }

    /// Diagonal entry of row `i`: `−Σ_j w_ij − leak_i`.
    pub fn diagonal(&self, i: usize) -> f64 {
        let (_, w) = self.row(i);
        -(w.iter().sum::<f64>() + self.leak[i])
    }

    #[inline]
    fn row_action(&self, i: usize, u: &[f64]) -> f64 {
        let (cols, w) = self.row(i);
        let ui = u[i];
        let mut acc = 0.0;
        for (&j, &wij) in cols.iter().zip(w) {
            acc += wij * (u[j] - ui);
        }
        acc - self.leak[i] * ui
    }

    /// `out = A u` on active vectors. Rows are summed left to right, so the
    /// result does not depend on the thread count.
    pub fn apply_active(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.dim());
        if self.nnz() >= PARALLEL_NNZ {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(i, o)| *o = self.row_action(i, u));
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.row_action(i, u);
            }
        }
    }

    /// Applies the operator to a field; inactive nodes of the result are zero.
    pub fn apply(&self, field: &Field) -> Result<Field> {
        self.check_grid(field)?;
        let u = self.gather(field.values());
        let mut au = vec![0.0; u.len()];
        self.apply_active(&u, &mut au);
        let mut values = vec![0.0; self.grid.node_count()];
        self.scatter(&au, &mut values);
        Field::new(self.grid.clone(), values, field.time())
    }

    pub fn check_grid(&self, field: &Field) -> Result<()> {
        if Arc::ptr_eq(field.grid(), &self.grid) || **field.grid() == *self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn gather(&self, values: &[f64]) -> Vec<f64> {
        self.active.iter().map(|&n| values[n]).collect()
    }

    pub fn scatter(&self, active: &[f64], values: &mut [f64]) {
        for (&n, &v) in self.active.iter().zip(active) {
            values[n] = v;
        }
    }

    /// Dense `(row, col, value)` triplets of the full matrix, diagonal included.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz() + self.dim());
        for i in 0..self.dim() {
            let (cols, w) = self.row(i);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(cols.len() + 1);
            merged.push((i, self.diagonal(i)));
            for (&j, &wij) in cols.iter().zip(w) {
                merged.push((j, wij));
            }
            merged.sort_by_key(|&(j, _)| j);
            // periodic wraps may hit the same column twice
            let mut k = 0;
            while k < merged.len() {
                let (j, mut v) = merged[k];
                k += 1;
                while k < merged.len() && merged[k].0 == j {
                    v += merged[k].1;
                    k += 1;
                }
                out.push((i, j, v));
            }
        }
        out
    }

    /// Coordinate-list dump: one `row col value` line per stored entry.
    pub fn write_coo<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (i, j, v) in self.triplets() {
            writeln!(out, "{i} {j} {v:e}")?;
        }
        Ok(())
    }

    /// Largest |A_ij − A_ji| over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut map = std::collections::HashMap::new();
        for (i, j, v) in self.triplets() {
            map.insert((i, j), v);
        }
        map.iter()
            .map(|(&(i, j), &v)| (v - map.get(&(j, i)).copied().unwrap_or(0.0)).abs())
            .fold(0.0, f64::max)
    }
}

struct Builder {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
    leak: Vec<f64>,
}

impl Builder {
    fn with_rows(rows: Vec<(Vec<(usize, f64)>, f64)>) -> Self {
        let mut b = Builder {
            row_ptr: vec![0],
            cols: Vec::new(),
            weights: Vec::new(),
            leak: Vec::with_capacity(rows.len()),
        };
        for (entries, leak) in rows {
            for (j, w) in entries {
                b.cols.push(j);
                b.weights.push(w);
            }
            b.row_ptr.push(b.cols.len());
            b.leak.push(leak);
        }
        b
    }
}

fn active_sets(grid: &Grid, keep: impl Fn(usize) -> bool) -> (Vec<usize>, Vec<Option<usize>>) {
    let active: Vec<usize> = (0..grid.node_count()).filter(|&n| keep(n)).collect();
    let mut slot = vec![None; grid.node_count()];
    for (k, &n) in active.iter().enumerate() {
        slot[n] = Some(k);
    }
    (active, slot)
}

/// Lattice offsets `m` with `|m h| < δ`, each with its kernel weight `h^N k_δ(m h)`.
fn stencil(profile: &KernelProfile, dim: usize, h: f64, delta: f64) -> Vec<([isize; 2], f64)> {
    let reach = (delta / h).ceil() as isize;
    let cell = h.powi(dim as i32);
    let mut out = Vec::new();
    let range = -reach..=reach;
    let second: Vec<isize> = if dim == 2 { range.clone().collect() } else { vec![0] };
    for &m1 in &second {
        for m0 in range.clone() {
            if m0 == 0 && m1 == 0 {
                continue;
            }
            let z = [m0 as f64 * h, m1 as f64 * h];
            let k = profile.scaled(delta, &z[..dim]);
            if k > 0.0 {
                out.push(([m0, m1], cell * k));
            }
        }
    }
    out
}

/// Assembles `ν_δ ∫ k_δ(y − x)[u(y) − u(x)] dy` on the grid.
///
/// Dirichlet integrates over D̄ and the ghost band with ghost values fixed at
/// zero, Neumann over D̄ only, periodic over the wrapped lattice.
pub fn assemble_nonlocal(
    grid: Arc<Grid>,
    profile: &KernelProfile,
    delta: f64,
    bc: BoundaryCondition,
    calibration: RateCalibration,
) -> Result<DispersalOperator> {
    let dim = grid.dimension();
    if profile.dimension() != dim {
        return Err(Error::InvalidArgument(format!(
            "kernel dimension {} differs from grid dimension {dim}",
            profile.dimension()
        )));
    }
    check_bc_domain(&grid, bc)?;
    let h = grid.spacing();
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if delta / h < MIN_RESOLUTION {
        return Err(Error::SupportUnresolved { ratio: delta / h });
    }
    if bc == BoundaryCondition::Dirichlet && grid.ghost_width() + 1e-12 < delta {
        return Err(Error::GhostBandTooNarrow {
            ghost_width: grid.ghost_width(),
            delta,
        });
    }
    if bc == BoundaryCondition::Periodic {
        let min_period = grid.domain().extents().into_iter().fold(f64::INFINITY, f64::min);
        if 2.0 * delta >= min_period {
            return Err(Error::InvalidArgument(format!(
                "delta = {delta} must be below half the smallest period {min_period}"
            )));
        }
    }

    let offsets = stencil(profile, dim, h, delta);
    let nu = match calibration {
        RateCalibration::Continuum => dispersal_rate(profile.moment_constant(), delta),
        RateCalibration::Lattice => {
            let axis = dim - 1;
            let moment: f64 = offsets
                .iter()
                .map(|(m, w)| {
                    let z = m[axis] as f64 * h;
                    w * z * z
                })
                .sum();
            2.0 / moment
        }
    };

    let (active, slot) = active_sets(&grid, |n| !grid.is_ghost(n));
    let counts = grid.counts().to_vec();
    let periodic = bc == BoundaryCondition::Periodic;
    let rows: Vec<(Vec<(usize, f64)>, f64)> = active
        .par_iter()
        .map(|&node| {
            let base = grid.axis_indices(node);
            let mut entries = Vec::with_capacity(offsets.len());
            let mut leak = 0.0;
            for (m, w) in &offsets {
                let mut idx = [0isize; 2];
                for axis in 0..dim {
                    let mut i = base[axis] as isize + m[axis];
                    if periodic {
                        i = i.rem_euclid(counts[axis] as isize);
                    }
                    idx[axis] = i;
                }
                match grid.node_at(&idx[..dim]) {
                    Some(other) if !grid.is_ghost(other) => {
                        entries.push((slot[other].expect("non-ghost nodes are active"), nu * w));
                    }
                    Some(_) => {
                        // ghost: exterior datum is zero, only the loss term survives
                        if bc == BoundaryCondition::Dirichlet {
                            leak += nu * w;
                        }
                    }
                    None => {
                        if bc == BoundaryCondition::Dirichlet {
                            leak += nu * w;
                        }
                    }
                }
            }
            (entries, leak)
        })
        .collect();
    let b = Builder::with_rows(rows);
    let n = active.len();
    Ok(DispersalOperator {
        kind: OperatorKind::Nonlocal,
        bc,
        grid,
        delta: Some(delta),
        nu: Some(nu),
        active,
        slot,
        row_ptr: b.row_ptr,
        cols: b.cols,
        weights: b.weights,
        leak: b.leak,
        sym_weights: vec![1.0; n],
    })
}

/// Second-order central differences. Dirichlet eliminates boundary nodes,
/// Neumann closes the stencil by mirror reflection, periodic wraps.
pub fn assemble_local(grid: Arc<Grid>, bc: BoundaryCondition) -> Result<DispersalOperator> {
    check_bc_domain(&grid, bc)?;
    let dim = grid.dimension();
    for (axis, &cells) in grid.cells().iter().enumerate() {
        let nodes = if bc == BoundaryCondition::Periodic { cells } else { cells + 1 };
        if nodes < 3 {
            return Err(Error::TooFewNodes { axis, nodes });
        }
    }
    let h2 = grid.spacing() * grid.spacing();
    let layers = grid.ghost_layers() as isize;
    let cells: Vec<isize> = grid.cells().iter().map(|&c| c as isize).collect();
    let counts = grid.counts().to_vec();

    let (active, slot) = match bc {
        BoundaryCondition::Dirichlet => {
            active_sets(&grid, |n| grid.role(n) == NodeRole::Interior)
        }
        _ => active_sets(&grid, |n| !grid.is_ghost(n)),
    };

    let mut rows = Vec::with_capacity(active.len());
    let mut sym_weights = Vec::with_capacity(active.len());
    for &node in &active {
        let base = grid.axis_indices(node);
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(2 * dim);
        let mut leak = 0.0;
        let mut weight = 1.0;
        for axis in 0..dim {
            // position along the axis relative to the lower boundary
            let pos = base[axis] as isize - layers;
            for step in [-1isize, 1] {
                let mut target = pos + step;
                let mut coef = 1.0 / h2;
                match bc {
                    BoundaryCondition::Periodic => {
                        target = target.rem_euclid(counts[axis] as isize);
                    }
                    BoundaryCondition::Neumann => {
                        if target < 0 || target > cells[axis] {
                            // mirror: u_{-1} = u_1, u_{n+1} = u_{n-1}
                            continue;
                        }
                        if pos == 0 || pos == cells[axis] {
                            coef = 2.0 / h2;
                        }
                    }
                    BoundaryCondition::Dirichlet => {
                        if target <= 0 || target >= cells[axis] {
                            leak += coef;
                            continue;
                        }
                    }
                }
                let mut idx = [base[0] as isize, base[1] as isize];
                idx[axis] = target + layers;
                let other = grid.node_at(&idx[..dim]).expect("stencil neighbour inside grid");
                entries.push((slot[other].expect("neighbour is active"), coef));
            }
            if bc == BoundaryCondition::Neumann && (pos == 0 || pos == cells[axis]) {
                weight *= 0.5;
            }
        }
        rows.push((entries, leak));
        sym_weights.push(weight);
    }
    let b = Builder::with_rows(rows);
    Ok(DispersalOperator {
        kind: OperatorKind::Local,
        bc,
        grid,
        delta: None,
        nu: None,
        active,
        slot,
        row_ptr: b.row_ptr,
        cols: b.cols,
        weights: b.weights,
        leak: b.leak,
        sym_weights,
    })
}

fn check_bc_domain(grid: &Grid, bc: BoundaryCondition) -> Result<()> {
    let periodic = grid.domain().is_periodic();
    if periodic != (bc == BoundaryCondition::Periodic) {
        return Err(Error::InvalidArgument(format!(
            "{} boundary condition does not match the domain kind",
            bc.name()
        )));
    }
    Ok(())
}

/// Sup over non-ghost nodes more than δ from ∂D of |(nonlocal − local) u|.
pub fn consistency_error(
    nonlocal: &DispersalOperator,
    local: &DispersalOperator,
    test_field: &Field,
) -> Result<f64> {
    if nonlocal.kind != OperatorKind::Nonlocal || local.kind != OperatorKind::Local {
        return Err(Error::MismatchedOperators(
            "expected one nonlocal and one local operator".into(),
        ));
    }
    if nonlocal.bc != local.bc {
        return Err(Error::MismatchedOperators(format!(
            "boundary conditions differ: {} vs {}",
            nonlocal.bc.name(),
            local.bc.name()
        )));
    }
    if !(Arc::ptr_eq(&nonlocal.grid, &local.grid) || *nonlocal.grid == *local.grid) {
        return Err(Error::MismatchedOperators("operators live on different grids".into()));
    }
    nonlocal.check_grid(test_field)?;
    let delta = nonlocal.delta.expect("nonlocal operators carry delta");
    let a = nonlocal.apply(test_field)?;
    let b = local.apply(test_field)?;
    let grid = nonlocal.grid();
    Ok(grid
        .non_ghost_nodes()
        .filter(|&n| grid.distance_to_boundary(n) > delta)
        .filter(|&n| local.active_slot(n).is_some())
        .map(|n| (a.values()[n] - b.values()[n]).abs())
        .fold(0.0, f64::max))
}
