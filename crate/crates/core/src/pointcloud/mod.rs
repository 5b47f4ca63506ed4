//! Point clouds on a rectangle: generation, boundary classification,
//! neighborhoods and a CSV exchange format.

mod generate;
mod grid;
pub mod io;
mod neighbors;
mod point;
mod quality;

pub use generate::{
    generate_advancing_front, generate_uniform, level_radius, DEFAULT_R_MAX, DEFAULT_R_MIN,
    UNIFORM_SPACING_RATIO,
};
pub use grid::PointGrid;
pub use neighbors::{build_neighborhoods, Metric, Neighborhood};
pub use point::{Point, Rect, Side};
pub use quality::{quality_check, QualityReport};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Coordinate tolerance for deciding whether a point lies on the domain boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Type of boundary condition imposed on a side of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcType {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind<T> {
    Interior,
    Dirichlet { normal: Point<T> },
    Neumann { normal: Point<T> },
}

impl<T: Real> BoundaryKind<T> {
    pub fn is_interior(&self) -> bool {
        matches!(self, BoundaryKind::Interior)
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, BoundaryKind::Dirichlet { .. })
    }

    pub fn is_neumann(&self) -> bool {
        matches!(self, BoundaryKind::Neumann { .. })
    }

    pub fn normal(&self) -> Option<Point<T>> {
        match *self {
            BoundaryKind::Interior => None,
            BoundaryKind::Dirichlet { normal } | BoundaryKind::Neumann { normal } => Some(normal),
        }
    }

    /// Integer tag used in the CSV format.
    pub fn code(&self) -> u8 {
        match self {
            BoundaryKind::Interior => 0,
            BoundaryKind::Dirichlet { .. } => 1,
            BoundaryKind::Neumann { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Uniform,
    AdvancingFront,
    /// Loaded from a file or assembled by hand.
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CloudInfo {
    pub layout: Layout,
    pub level: Option<u32>,
    pub seed: Option<u64>,
}

impl Default for CloudInfo {
    fn default() -> Self {
        Self {
            layout: Layout::External,
            level: None,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    points: Vec<Point<T>>,
    h: Vec<T>,
    kind: Vec<BoundaryKind<T>>,
    domain: Rect<T>,
    pub info: CloudInfo,
}

impl<T: Real> PointCloud<T> {
    /// Validates and wraps raw point data.
    pub fn new(
        points: Vec<Point<T>>,
        h: Vec<T>,
        kind: Vec<BoundaryKind<T>>,
        domain: Rect<T>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("point cloud is empty".into()));
        }
        if points.len() != h.len() || points.len() != kind.len() {
            return Err(Error::Dimension(format!(
                "{} points, {} radii, {} kinds",
                points.len(),
                h.len(),
                kind.len()
            )));
        }
        if !domain.is_valid() {
            return Err(Error::InvalidParameter("invalid domain rectangle".into()));
        }
        let tol = T::lit(BOUNDARY_TOL);
        for (i, (p, (&hi, k))) in points.iter().zip(h.iter().zip(&kind)).enumerate() {
            if !p.is_finite() || !domain.contains(*p, tol) {
                return Err(Error::InvalidParameter(format!(
                    "point {i} is outside the domain"
                )));
            }
            if !(hi > T::zero() && hi.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "interaction radius of point {i} must be positive"
                )));
            }
            let on_boundary = domain.distance_to_boundary(*p) <= tol;
            if on_boundary == k.is_interior() {
                return Err(Error::InvalidParameter(format!(
                    "point {i} is misclassified as {}",
                    if on_boundary { "interior" } else { "boundary" }
                )));
            }
            if let Some(n) = k.normal() {
                if (n.norm() - T::one()).abs() > T::lit(1e-10) {
                    return Err(Error::InvalidParameter(format!(
                        "normal of point {i} is not a unit vector"
                    )));
                }
            }
        }
        Ok(Self {
            points,
            h,
            kind,
            domain,
            info: CloudInfo::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Point<T> {
        self.points[i]
    }

    pub fn radii(&self) -> &[T] {
        &self.h
    }

    pub fn h(&self, i: usize) -> T {
        self.h[i]
    }

    pub fn kinds(&self) -> &[BoundaryKind<T>] {
        &self.kind
    }

    pub fn kind(&self, i: usize) -> BoundaryKind<T> {
        self.kind[i]
    }

    pub fn domain(&self) -> &Rect<T> {
        &self.domain
    }

    pub fn max_h(&self) -> T {
        self.h.iter().copied().fold(T::zero(), T::max)
    }

    pub fn min_h(&self) -> T {
        self.h.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.kind[i].is_interior()).collect()
    }

    pub fn boundary_count(&self) -> usize {
        self.kind.iter().filter(|k| !k.is_interior()).count()
    }

    /// Sides of the domain that point `i` lies on.
    pub fn sides(&self, i: usize) -> Vec<Side> {
        self.domain.sides_at(self.points[i], T::lit(BOUNDARY_TOL))
    }

    /// Reassigns the boundary condition type of every boundary point from a
    /// per-side rule. Corners touching a Dirichlet side become Dirichlet.
    pub fn partition_boundary(&mut self, rule: impl Fn(Side) -> BcType) {
        let tol = T::lit(BOUNDARY_TOL);
        for (p, k) in self.points.iter().zip(self.kind.iter_mut()) {
            let sides = self.domain.sides_at(*p, tol);
            if sides.is_empty() {
                continue;
            }
            let normal = self
                .domain
                .outward_normal(*p, tol)
                .expect("boundary point has a normal");
            let dirichlet = sides.iter().any(|&s| rule(s) == BcType::Dirichlet);
            *k = if dirichlet {
                BoundaryKind::Dirichlet { normal }
            } else {
                BoundaryKind::Neumann { normal }
            };
        }
    }

    pub fn with_partition(mut self, rule: impl Fn(Side) -> BcType) -> Self {
        self.partition_boundary(rule);
        self
    }
}
