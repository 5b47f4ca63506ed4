use super::grid::PointGrid;
use super::PointCloud;
use crate::scalar::Real;

/// Scaled distance defining neighborhoods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    /// `|x_j - x_i| / h_i`: radial, not necessarily symmetric.
    D1,
    /// `2 |x_j - x_i| / (h_i + h_j)`: symmetric.
    #[default]
    D2,
}

impl Metric {
    pub fn distance<T: Real>(self, dist: T, h_i: T, h_j: T) -> T {
        match self {
            Metric::D1 => dist / h_i,
            Metric::D2 => T::lit(2.0) * dist / (h_i + h_j),
        }
    }
}

/// Index sets `S_i` of all points within scaled distance one of `x_i`,
/// each sorted ascending and containing `i` itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighborhood {
    stencils: Vec<Vec<usize>>,
    metric: Metric,
}

impl Neighborhood {
    pub fn from_stencils(stencils: Vec<Vec<usize>>, metric: Metric) -> Self {
        Self { stencils, metric }
    }

    pub fn len(&self) -> usize {
        self.stencils.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stencils.is_empty()
    }

    pub fn stencil(&self, i: usize) -> &[usize] {
        &self.stencils[i]
    }

    pub fn stencils(&self) -> &[Vec<usize>] {
        &self.stencils
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.stencils[i].binary_search(&j).is_ok()
    }
}

pub fn build_neighborhoods<T: Real>(cloud: &PointCloud<T>, metric: Metric) -> Neighborhood {
    let hmax = cloud.max_h();
    let grid = PointGrid::from_points(cloud.domain(), hmax, cloud.points());
    let stencils = (0..cloud.len())
        .map(|i| {
            let xi = cloud.point(i);
            let hi = cloud.h(i);
            // Under either metric, neighbors are within max(h_i, h_max) Euclidean.
            let mut s = Vec::new();
            grid.for_each_within(xi, hi.max(hmax), |j, d| {
                if j == i || metric.distance(d, hi, cloud.h(j)) <= T::one() {
                    s.push(j);
                }
            });
            s.sort_unstable();
            s
        })
        .collect();
    Neighborhood { stencils, metric }
}
