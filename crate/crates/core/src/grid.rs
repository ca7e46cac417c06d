//! Domains, uniform grids and nodal fields.
//!
//! Bounded domains are axis-aligned boxes whose nodes include the boundary.
//! A box grid may carry a ghost band of exterior nodes for the Dirichlet
//! nonlocal problem; ghost values are the exterior datum and never evolve.
//! Periodic cells store each identified node once.

use std::io::{self, Write};
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    BoundedBox,
    PeriodicCell,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    kind: DomainKind,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Domain {
    pub fn bounded_box(lower: &[f64], upper: &[f64]) -> Result<Self> {
        Self::checked(DomainKind::BoundedBox, lower.to_vec(), upper.to_vec())
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::bounded_box(&[a], &[b])
    }

    /// Periodic cell `[0, p₁) × … ` with the given periods.
    pub fn periodic_cell(periods: &[f64]) -> Result<Self> {
        Self::checked(DomainKind::PeriodicCell, vec![0.0; periods.len()], periods.to_vec())
    }

    fn checked(kind: DomainKind, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() > 2 || lower.len() != upper.len() {
            return Err(Error::InvalidDomain(format!(
                "expected 1 or 2 matching coordinates, got {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (axis, (a, b)) in lower.iter().zip(&upper).enumerate() {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::InvalidDomain(format!(
                    "axis {axis}: upper {b} must exceed lower {a}"
                )));
            }
        }
        Ok(Domain { kind, lower, upper })
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Edge lengths for a box, periods for a cell.
    pub fn extents(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(a, b)| b - a).collect()
    }

    pub fn is_periodic(&self) -> bool {
        self.kind == DomainKind::PeriodicCell
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeRole {
    Interior,
    /// On ∂D (bounded boxes only).
    Boundary,
    /// In the exterior band, holding the Dirichlet datum.
    Ghost,
}

/// Uniform isotropic grid. Node `i` has axis indices `(i mod n₀, i div n₀)`;
/// axis 0 varies fastest.
#[derive(Clone, Debug)]
pub struct Grid {
    domain: Domain,
    h: f64,
    cells: Vec<usize>,
    ghost_layers: usize,
    counts: Vec<usize>,
    points: Vec<f64>,
    roles: Vec<NodeRole>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain
            && self.h == other.h
            && self.ghost_layers == other.ghost_layers
    }
}

impl Grid {
    /// Builds the grid with spacing `h` and, for boxes, enough ghost layers to
    /// cover `ghost_width` beyond ∂D on every side.
    pub fn build(domain: Domain, h: f64, ghost_width: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("spacing must be positive, got {h}")));
        }
        if ghost_width < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "ghost width must be nonnegative, got {ghost_width}"
            )));
        }
        let extents = domain.extents();
        let mut cells = Vec::with_capacity(extents.len());
        for (axis, &extent) in extents.iter().enumerate() {
            let n = (extent / h).round();
            if n < 1.0 || (n * h - extent).abs() > 1e-12 * extent.max(1.0) {
                return Err(Error::IncompatibleSpacing { h, extent, axis });
            }
            cells.push(n as usize);
        }
        let periodic = domain.is_periodic();
        let ghost_layers = if periodic || ghost_width == 0.0 {
            0
        } else {
            (ghost_width / h - 1e-9).ceil().max(0.0) as usize
        };
        let counts: Vec<usize> = cells
            .iter()
            .map(|&c| if periodic { c } else { c + 1 + 2 * ghost_layers })
            .collect();

        let dim = domain.dimension();
        let total: usize = counts.iter().product();
        let mut points = Vec::with_capacity(total * dim);
        let mut roles = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            let mut ghost = false;
            let mut boundary = false;
            for axis in 0..dim {
                let offset = idx[axis] as isize - ghost_layers as isize;
                points.push(domain.lower[axis] + offset as f64 * h);
                if !periodic {
                    if offset < 0 || offset > cells[axis] as isize {
                        ghost = true;
                    } else if offset == 0 || offset == cells[axis] as isize {
                        boundary = true;
                    }
                }
            }
            roles.push(if ghost {
                NodeRole::Ghost
            } else if boundary {
                NodeRole::Boundary
            } else {
                NodeRole::Interior
            });
            for axis in 0..dim {
                idx[axis] += 1;
                if idx[axis] < counts[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
        Ok(Grid {
            domain,
            h,
            cells,
            ghost_layers,
            counts,
            points,
            roles,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Cells per axis across the domain (excluding ghosts).
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    /// Stored nodes per axis, ghosts included.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn ghost_layers(&self) -> usize {
        self.ghost_layers
    }

    pub fn ghost_width(&self) -> f64 {
        self.ghost_layers as f64 * self.h
    }

    pub fn node_count(&self) -> usize {
        self.roles.len()
    }

    pub fn point(&self, node: usize) -> &[f64] {
        let dim = self.dimension();
        &self.points[node * dim..(node + 1) * dim]
    }

    pub fn role(&self, node: usize) -> NodeRole {
        self.roles[node]
    }

    pub fn is_ghost(&self, node: usize) -> bool {
        self.roles[node] == NodeRole::Ghost
    }

    pub fn axis_indices(&self, node: usize) -> [usize; 2] {
        let mut out = [0usize; 2];
        let mut rest = node;
        for (axis, &n) in self.counts.iter().enumerate() {
            out[axis] = rest % n;
            rest /= n;
        }
        out
    }

    /// Node at the given stored axis indices, if inside the stored lattice.
    pub fn node_at(&self, indices: &[isize]) -> Option<usize> {
        let mut node = 0usize;
        let mut stride = 1usize;
        for (axis, &n) in self.counts.iter().enumerate() {
            let i = indices[axis];
            if i < 0 || i as usize >= n {
                return None;
            }
            node += i as usize * stride;
            stride *= n;
        }
        Some(node)
    }

    /// Distance from a node to ∂D; infinite on periodic cells.
    pub fn distance_to_boundary(&self, node: usize) -> f64 {
        if self.domain.is_periodic() {
            return f64::INFINITY;
        }
        let p = self.point(node);
        (0..self.dimension())
            .map(|axis| (p[axis] - self.domain.lower[axis]).min(self.domain.upper[axis] - p[axis]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn non_ghost_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(move |&i| !self.is_ghost(i))
    }
}

/// Nodal values on a grid at a time stamp. Ghost nodes hold the exterior datum.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
    time: f64,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        Ok(Field { grid, values, time })
    }

    pub fn constant(grid: Arc<Grid>, value: f64) -> Self {
        Self::from_fn(grid, |_| value)
    }

    /// Samples `f` on D̄; ghost nodes are set to zero.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: Arc<Grid>, f: F) -> Self {
        let values = (0..grid.node_count())
            .map(|i| if grid.is_ghost(i) { 0.0 } else { f(grid.point(i)) })
            .collect();
        Field {
            grid,
            values,
            time: 0.0,
        }
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Max over non-ghost nodes of |u|.
    pub fn sup_norm(&self) -> f64 {
        self.grid
            .non_ghost_nodes()
            .map(|i| self.values[i].abs())
            .fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.grid
            .non_ghost_nodes()
            .map(|i| self.values[i])
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV with columns `x[,y],value` over non-ghost nodes.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let header = if self.grid.dimension() == 1 { "x,value" } else { "x,y,value" };
        writeln!(out, "{header}")?;
        for i in self.grid.non_ghost_nodes() {
            for c in self.grid.point(i) {
                write!(out, "{c},")?;
            }
            writeln!(out, "{}", self.values[i])?;
        }
        Ok(())
    }
}

/// Max over non-ghost nodes of |f − g|.
pub fn sup_distance(f: &Field, g: &Field) -> Result<f64> {
    if !Arc::ptr_eq(&f.grid, &g.grid) && *f.grid != *g.grid {
        return Err(Error::GridMismatch);
    }
    Ok(f.grid
        .non_ghost_nodes()
        .map(|i| (f.values[i] - g.values[i]).abs())
        .fold(0.0, f64::max))
}
