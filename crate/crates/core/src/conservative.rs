//! Flux-balance rows over Voronoi cells.

use crate::error::{Error, Result};
use crate::geometry::VoronoiCell;
use crate::pointcloud::{Neighborhood, PointCloud, Side};
use crate::scalar::Real;
use crate::strongform::{Functional, LocalFit, StencilRow};

/// How the diffusivity at a face midpoint is reconstructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MidpointMode {
    #[default]
    Harmonic,
    /// Weighted least-squares point evaluation at the midpoint. Can oscillate
    /// and even go negative across large jumps.
    Wlsq,
}

/// `2 / (1/eta_i + 1/eta_j)`
pub fn harmonic_mean<T: Real>(eta_i: T, eta_j: T) -> T {
    T::lit(2.0) / (eta_i.recip() + eta_j.recip())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidpointValue<T> {
    pub value: T,
    /// Set when a reconstruction came out non-positive.
    pub non_positive: bool,
}

/// Diffusivity on the face between `i` and `j`. The WLSQ mode evaluates
/// the reconstruction of `eta` from the stencil of `i` at `x_ij`.
pub fn eta_midpoint<T: Real>(
    mode: MidpointMode,
    cloud: &PointCloud<T>,
    neigh: &Neighborhood,
    eta: &[T],
    i: usize,
    j: usize,
) -> Result<MidpointValue<T>> {
    let value = match mode {
        MidpointMode::Harmonic => harmonic_mean(eta[i], eta[j]),
        MidpointMode::Wlsq => {
            let fit = LocalFit::new(cloud, neigh, i)?;
            let mid = cloud.point(i).midpoint(cloud.point(j));
            fit.functional(Functional::ValueAt(mid)).apply(eta)
        }
    };
    Ok(MidpointValue {
        value,
        non_positive: !(value > T::zero()),
    })
}

/// Row of the cell-averaged diffusion operator plus an extra right-hand-side
/// contribution used by boundary rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservativeRow<T> {
    pub row: StencilRow<T>,
    pub rhs_shift: T,
}

fn face_row<T: Real>(cell: &VoronoiCell<T>, eta: &[T]) -> Result<StencilRow<T>> {
    let i = cell.owner;
    if cell.faces.is_empty() {
        return Err(Error::IsolatedCell { point: i });
    }
    let mut cols = Vec::with_capacity(cell.faces.len() + 1);
    let mut vals = Vec::with_capacity(cell.faces.len() + 1);
    let mut diag = T::zero();
    let mut diag_pos = None;
    for f in &cell.faces {
        if diag_pos.is_none() && f.neighbor > i {
            diag_pos = Some(cols.len());
            cols.push(i);
            vals.push(T::zero());
        }
        let g = f.measure / cell.measure * harmonic_mean(eta[i], eta[f.neighbor]) / f.distance;
        diag -= g;
        cols.push(f.neighbor);
        vals.push(g);
    }
    let pos = diag_pos.unwrap_or_else(|| {
        cols.push(i);
        vals.push(T::zero());
        cols.len() - 1
    });
    vals[pos] = diag;
    Ok(StencilRow { center: i, cols, vals })
}

/// `g_ij = |Gamma_ij| / |Omega_i| * eta_ij / d_ij`, `g_ii = -sum_j g_ij`,
/// with harmonic-mean face diffusivities from the nodal `eta`.
pub fn diffusion_row_conservative<T: Real>(
    cell: &VoronoiCell<T>,
    eta: &[T],
) -> Result<ConservativeRow<T>> {
    Ok(ConservativeRow {
        row: face_row(cell, eta)?,
        rhs_shift: T::zero(),
    })
}

/// Flux balance of a Neumann boundary cell. The discrete equation reads
/// `sum_j g_ij u_j = -f_i + rhs_shift` with
/// `rhs_shift = -sum_sides |Gamma_i,side| / |Omega_i| * eta_i * g_N(side)`;
/// the nodal source `f_i` is left to the caller.
pub fn neumann_row_conservative<T: Real>(
    cell: &VoronoiCell<T>,
    eta: &[T],
    g_n: impl Fn(Side) -> T,
) -> Result<ConservativeRow<T>> {
    let i = cell.owner;
    if !(cell.boundary_face() > T::zero()) {
        return Err(Error::MisclassifiedBoundary { point: i });
    }
    let row = face_row(cell, eta)?;
    let flux: T = Side::ALL
        .iter()
        .filter(|s| cell.boundary_face_on(**s) > T::zero())
        .map(|&s| cell.boundary_face_on(s) * g_n(s))
        .sum();
    Ok(ConservativeRow {
        row,
        rhs_shift: -(flux / cell.measure) * eta[i],
    })
}

/// `max_j |sum_i |Omega_i| g_ij|` over the columns flagged in `columns`.
/// Rows are indexed by their center; all points should carry a row.
pub fn column_sum_check<T: Real>(
    rows: &[StencilRow<T>],
    cells: &[VoronoiCell<T>],
    columns: &[bool],
) -> T {
    let mut sums = vec![T::zero(); columns.len()];
    for row in rows {
        let vol = cells[row.center].measure;
        for (&j, &v) in row.cols.iter().zip(&row.vals) {
            sums[j] += vol * v;
        }
    }
    sums.iter()
        .zip(columns)
        .filter(|(_, &c)| c)
        .fold(T::zero(), |m, (s, _)| m.max(s.abs()))
}
