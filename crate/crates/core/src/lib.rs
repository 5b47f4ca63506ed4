//! Meshfree generalized finite differences for `-div(eta grad u) = f` on a
//! rectangle with piecewise-constant diffusivity.
//!
//! The crate provides strong-form weighted-least-squares operators,
//! conservative operators on locally constructed Voronoi cells, and hybrid
//! schemes that switch between the two where the strong form loses diagonal
//! dominance. All numerics are generic over [`Real`]; the aliases below fix
//! the scalar. The benchmark problems need `f64`: jumps of ten orders of
//! magnitude are out of reach in single precision.

pub mod assembly;
pub mod conservative;
pub mod dense;
pub mod error;
pub mod geometry;
pub mod pointcloud;
pub mod problems;
pub mod scalar;
pub mod strongform;

pub use error::{Error, Result};
pub use scalar::Real;

macro_rules! scalar_aliases {
    ($t:ty => $($alias:ident = $path:ident),* $(,)?) => {
        $(pub type $alias = $path<$t>;)*
    };
}

use assembly::{CsrMatrix, LinearSystem};
use geometry::VoronoiCell;
use pointcloud::{Point, PointCloud, Rect};
use problems::{CaseSolution, Geometry, TestCase};
use strongform::{DiffusivityField, StencilRow};

scalar_aliases!(f64 =>
    Point64 = Point,
    Rect64 = Rect,
    PointCloud64 = PointCloud,
    StencilRow64 = StencilRow,
    DiffusivityField64 = DiffusivityField,
    VoronoiCell64 = VoronoiCell,
    CsrMatrix64 = CsrMatrix,
    LinearSystem64 = LinearSystem,
    TestCase64 = TestCase,
    Geometry64 = Geometry,
    CaseSolution64 = CaseSolution,
);

scalar_aliases!(f32 =>
    Point32 = Point,
    Rect32 = Rect,
    PointCloud32 = PointCloud,
    StencilRow32 = StencilRow,
    DiffusivityField32 = DiffusivityField,
    VoronoiCell32 = VoronoiCell,
    CsrMatrix32 = CsrMatrix,
    LinearSystem32 = LinearSystem,
    TestCase32 = TestCase,
    Geometry32 = Geometry,
    CaseSolution32 = CaseSolution,
);
