//! Voronoi cells built locally from each point's neighborhood by clipping the
//! domain rectangle with perpendicular bisectors.

use std::io::Write;

use crate::error::{Error, Result};
use crate::pointcloud::{Neighborhood, Point, PointCloud, Rect, Side};
use crate::scalar::Real;

/// Cells with smaller measure are rejected as degenerate.
pub const MIN_CELL_MEASURE: f64 = 1e-14;
/// Faces shorter than this times `h_i` are dropped.
pub const FACE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face<T> {
    pub neighbor: usize,
    /// `|Gamma_ij|`
    pub measure: T,
    /// `d_ij = |x_j - x_i|`
    pub distance: T,
    /// `x_ij = (x_i + x_j) / 2`
    pub midpoint: Point<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiCell<T> {
    pub owner: usize,
    pub faces: Vec<Face<T>>,
    /// `|Omega_i|`
    pub measure: T,
    /// Portion of the cell boundary on each domain side, indexed by [`Side::index`].
    pub boundary_faces: [T; 4],
    /// Counter-clockwise polygon vertices.
    pub vertices: Vec<Point<T>>,
}

impl<T: Real> VoronoiCell<T> {
    /// `|Gamma_i|`: total length of the cell boundary lying on the domain boundary.
    pub fn boundary_face(&self) -> T {
        self.boundary_faces.iter().copied().sum()
    }

    pub fn boundary_face_on(&self, side: Side) -> T {
        self.boundary_faces[side.index()]
    }

    pub fn face_to(&self, j: usize) -> Option<&Face<T>> {
        self.faces.iter().find(|f| f.neighbor == j)
    }

    /// `(1/4) sum_j |Gamma_ij| d_ij`, which equals the measure for cells not
    /// touching the domain boundary.
    pub fn face_area_sum(&self) -> T {
        self.faces
            .iter()
            .map(|f| f.measure * f.distance)
            .sum::<T>()
            * T::lit(0.25)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EdgeLabel {
    Domain(Side),
    Bisector(usize),
}

/// Clips a convex polygon by `{x : (x - m) . dir <= 0}`. Each vertex carries
/// the label of the edge leaving it.
fn clip<T: Real>(
    poly: &[(Point<T>, EdgeLabel)],
    m: Point<T>,
    dir: Point<T>,
    label: EdgeLabel,
) -> Vec<(Point<T>, EdgeLabel)> {
    let n = poly.len();
    let zero = T::zero();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..n {
        let (cur, lab) = poly[k];
        let (nxt, _) = poly[(k + 1) % n];
        let fc = (cur - m).dot(dir);
        let fnx = (nxt - m).dot(dir);
        let cut = || cur + (nxt - cur) * (fc / (fc - fnx));
        match (fc <= zero, fnx <= zero) {
            (true, true) => out.push((cur, lab)),
            (true, false) => {
                out.push((cur, lab));
                out.push((cut(), label));
            }
            (false, true) => out.push((cut(), lab)),
            (false, false) => {}
        }
    }
    out
}

fn shoelace<T: Real>(poly: &[(Point<T>, EdgeLabel)]) -> T {
    let n = poly.len();
    let mut twice = T::zero();
    for k in 0..n {
        let (a, _) = poly[k];
        let (b, _) = poly[(k + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    twice * T::lit(0.5)
}

/// Builds the Voronoi cell of point `i` restricted to the domain.
///
/// Only neighbors in `S_i` are considered; bisectors are applied in order of
/// increasing distance. Neighbors whose bisector is clipped away entirely, or
/// leaves a face shorter than `FACE_TOL * h_i`, get no face.
pub fn local_voronoi_cell<T: Real>(
    cloud: &PointCloud<T>,
    neigh: &Neighborhood,
    i: usize,
) -> Result<VoronoiCell<T>> {
    let xi = cloud.point(i);
    let c = cloud.domain().corners();
    let mut poly = vec![
        (c[0], EdgeLabel::Domain(Side::Bottom)),
        (c[1], EdgeLabel::Domain(Side::Right)),
        (c[2], EdgeLabel::Domain(Side::Top)),
        (c[3], EdgeLabel::Domain(Side::Left)),
    ];

    let mut others: Vec<(T, usize)> = neigh
        .stencil(i)
        .iter()
        .filter(|&&j| j != i)
        .map(|&j| (xi.dist(cloud.point(j)), j))
        .collect();
    others.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

    for &(dist, j) in &others {
        if dist == T::zero() {
            return Err(Error::DegenerateCell { point: i, measure: 0.0 });
        }
        let xj = cloud.point(j);
        poly = clip(&poly, xi.midpoint(xj), xj - xi, EdgeLabel::Bisector(j));
        if poly.len() < 3 {
            return Err(Error::DegenerateCell { point: i, measure: 0.0 });
        }
    }

    let measure = shoelace(&poly);
    if !(measure > T::lit(MIN_CELL_MEASURE)) {
        return Err(Error::DegenerateCell { point: i, measure: measure.as_f64() });
    }

    let min_face = T::lit(FACE_TOL) * cloud.h(i);
    let mut boundary_faces = [T::zero(); 4];
    let mut faces: Vec<Face<T>> = Vec::new();
    let n = poly.len();
    for k in 0..n {
        let (a, lab) = poly[k];
        let (b, _) = poly[(k + 1) % n];
        let len = a.dist(b);
        match lab {
            EdgeLabel::Domain(side) => boundary_faces[side.index()] += len,
            EdgeLabel::Bisector(j) => {
                if len < min_face {
                    continue;
                }
                if let Some(f) = faces.iter_mut().find(|f| f.neighbor == j) {
                    f.measure += len;
                } else {
                    let xj = cloud.point(j);
                    faces.push(Face {
                        neighbor: j,
                        measure: len,
                        distance: xi.dist(xj),
                        midpoint: xi.midpoint(xj),
                    });
                }
            }
        }
    }
    faces.sort_by_key(|f| f.neighbor);
    for b in boundary_faces.iter_mut() {
        if *b < min_face {
            *b = T::zero();
        }
    }

    Ok(VoronoiCell {
        owner: i,
        faces,
        measure,
        boundary_faces,
        vertices: poly.iter().map(|&(p, _)| p).collect(),
    })
}

pub fn build_cells<T: Real>(cloud: &PointCloud<T>, neigh: &Neighborhood) -> Result<Vec<VoronoiCell<T>>> {
    (0..cloud.len()).map(|i| local_voronoi_cell(cloud, neigh, i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellReport<T> {
    pub total_measure: T,
    /// `sum_i |Omega_i| - |Omega|`
    pub deviation: T,
    pub min_measure: T,
    pub max_measure: T,
}

pub fn cell_diagnostics<T: Real>(cells: &[VoronoiCell<T>], domain: &Rect<T>) -> CellReport<T> {
    let total: T = cells.iter().map(|c| c.measure).sum();
    CellReport {
        total_measure: total,
        deviation: total - domain.area(),
        min_measure: cells.iter().map(|c| c.measure).fold(T::infinity(), T::min),
        max_measure: cells.iter().map(|c| c.measure).fold(T::zero(), T::max),
    }
}

/// Writes cell polygons as `i,vertex_index,x,y` rows.
pub fn write_cells<T: Real, W: Write>(cells: &[VoronoiCell<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "vertex_index", "x", "y"])?;
    for c in cells {
        for (k, v) in c.vertices.iter().enumerate() {
            w.write_record([
                c.owner.to_string(),
                k.to_string(),
                crate::pointcloud::io::fmt_full(v.x),
                crate::pointcloud::io::fmt_full(v.y),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::{
        build_neighborhoods, generate_advancing_front, generate_uniform, BoundaryKind, Metric,
    };

    fn uniform(h: f64) -> (PointCloud<f64>, Neighborhood, f64) {
        let c = generate_uniform(h, &Rect::default()).unwrap();
        let n = build_neighborhoods(&c, Metric::D2);
        let s = c.point(1).x - c.point(0).x;
        (c, n, s)
    }

    // h = 0.2 gives a 26 x 26 lattice stored row by row.
    fn index_of(ix: usize, iy: usize) -> usize {
        iy * 26 + ix
    }

    #[test]
    fn interior_uniform_cell_is_square() {
        let (c, n, s) = uniform(0.2);
        let i = index_of(12, 13);
        let cell = local_voronoi_cell(&c, &n, i).unwrap();
        assert!((cell.measure - s * s).abs() < 1e-15);
        assert_eq!(cell.faces.len(), 4);
        for f in &cell.faces {
            assert!((f.measure - s).abs() < 1e-14);
            assert!((f.distance - s).abs() < 1e-14);
        }
        assert_eq!(cell.boundary_face(), 0.0);
        assert!((cell.face_area_sum() - cell.measure).abs() < 1e-10 * cell.measure);
    }

    #[test]
    fn edge_uniform_cell_is_half_square() {
        let (c, n, s) = uniform(0.2);
        let i = index_of(12, 0);
        let cell = local_voronoi_cell(&c, &n, i).unwrap();
        assert!((cell.measure - 0.5 * s * s).abs() < 1e-15);
        assert!((cell.boundary_face() - s).abs() < 1e-14);
        assert!((cell.boundary_face_on(Side::Bottom) - s).abs() < 1e-14);
        assert_eq!(cell.faces.len(), 3);
    }

    #[test]
    fn corner_cell_sums_both_edges() {
        let (c, n, s) = uniform(0.2);
        let cell = local_voronoi_cell(&c, &n, index_of(0, 0)).unwrap();
        assert!((cell.measure - 0.25 * s * s).abs() < 1e-15);
        assert!((cell.boundary_face() - s).abs() < 1e-14);
    }

    #[test]
    fn single_point_owns_domain() {
        let c = PointCloud::new(
            vec![Point::new(0.1f64, -0.2)],
            vec![0.3],
            vec![BoundaryKind::Interior],
            Rect::default(),
        )
        .unwrap();
        let n = build_neighborhoods(&c, Metric::D2);
        let cells = build_cells(&c, &n).unwrap();
        let rep = cell_diagnostics(&cells, c.domain());
        assert!((rep.total_measure - 4.0).abs() < 1e-14);
        assert!((cells[0].boundary_face() - 8.0).abs() < 1e-14);
    }

    #[test]
    fn duplicate_points_are_degenerate() {
        let c = PointCloud::new(
            vec![Point::new(0.0f64, 0.0), Point::new(0.0, 0.0)],
            vec![0.3, 0.3],
            vec![BoundaryKind::Interior; 2],
            Rect::default(),
        )
        .unwrap();
        let n = build_neighborhoods(&c, Metric::D2);
        assert!(matches!(
            local_voronoi_cell(&c, &n, 0),
            Err(Error::DegenerateCell { .. })
        ));
    }

    #[test]
    fn cells_partition_domain() {
        let (c, n, _) = uniform(0.2);
        let cells = build_cells(&c, &n).unwrap();
        assert!(cell_diagnostics(&cells, c.domain()).deviation.abs() < 1e-9);

        let c = generate_advancing_front(0.1f64, &Rect::default(), 0.25, 0.45, 42).unwrap();
        let n = build_neighborhoods(&c, Metric::D2);
        let cells = build_cells(&c, &n).unwrap();
        let rep = cell_diagnostics(&cells, c.domain());
        assert!(rep.deviation.abs() < 1e-9, "{rep:?}");
        assert!(rep.min_measure > 0.0);
    }

    #[test]
    fn irregular_faces_are_symmetric() {
        let c = generate_advancing_front(0.1f64, &Rect::default(), 0.25, 0.45, 5).unwrap();
        let n = build_neighborhoods(&c, Metric::D2);
        let cells = build_cells(&c, &n).unwrap();
        for cell in &cells {
            let i = cell.owner;
            for f in &cell.faces {
                let back = cells[f.neighbor].face_to(i).expect("face listed by both cells");
                assert!((back.measure - f.measure).abs() <= 1e-12);
                // The midpoint lies on the bisector.
                let xi = c.point(i);
                let xj = c.point(f.neighbor);
                assert!(((f.midpoint - xi).norm() - (f.midpoint - xj).norm()).abs() < 1e-12);
            }
            if cell.boundary_face() == 0.0 {
                assert!((cell.face_area_sum() - cell.measure).abs() <= 1e-10 * cell.measure);
            }
        }
    }
}
