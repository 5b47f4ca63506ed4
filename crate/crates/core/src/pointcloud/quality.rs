use super::grid::PointGrid;
use super::point::Point;
use super::{Neighborhood, PointCloud};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport<T> {
    /// `min_i min_{j in S_i, j != i} |x_j - x_i| / h_i`; infinite if no point
    /// has a neighbor.
    pub min_nearest_ratio: T,
    /// Largest distance from a probe location to its closest cloud point,
    /// relative to the local interaction radius of that point.
    pub max_hole_ratio: T,
    pub min_stencil: usize,
    pub mean_stencil: f64,
    pub max_stencil: usize,
}

/// Summarizes spacing and stencil statistics. `probe_spacing` controls the
/// resolution of the hole estimate and defaults to a tenth of the smallest h.
pub fn quality_check<T: Real>(
    cloud: &PointCloud<T>,
    neigh: &Neighborhood,
    probe_spacing: Option<T>,
) -> QualityReport<T> {
    let mut min_ratio = T::infinity();
    let (mut min_s, mut max_s, mut sum_s) = (usize::MAX, 0usize, 0usize);
    for i in 0..cloud.len() {
        let s = neigh.stencil(i);
        min_s = min_s.min(s.len());
        max_s = max_s.max(s.len());
        sum_s += s.len();
        let xi = cloud.point(i);
        for &j in s {
            if j != i {
                min_ratio = min_ratio.min(xi.dist(cloud.point(j)) / cloud.h(i));
            }
        }
    }

    let domain = cloud.domain();
    let spacing = probe_spacing.unwrap_or_else(|| cloud.min_h() * T::lit(0.1));
    let grid = PointGrid::from_points(domain, cloud.max_h(), cloud.points());
    let nx = (domain.width() / spacing).ceil().to_usize().unwrap_or(1).max(1);
    let ny = (domain.height() / spacing).ceil().to_usize().unwrap_or(1).max(1);
    let mut hole = T::zero();
    for iy in 0..=ny {
        for ix in 0..=nx {
            let q = Point::new(
                domain.xmin + domain.width() * T::from_usize_lossy(ix) / T::from_usize_lossy(nx),
                domain.ymin + domain.height() * T::from_usize_lossy(iy) / T::from_usize_lossy(ny),
            );
            if let Some((j, d)) = grid.nearest(q) {
                hole = hole.max(d / cloud.h(j));
            }
        }
    }

    QualityReport {
        min_nearest_ratio: min_ratio,
        max_hole_ratio: hole,
        min_stencil: min_s,
        mean_stencil: sum_s as f64 / cloud.len() as f64,
        max_stencil: max_s,
    }
}
