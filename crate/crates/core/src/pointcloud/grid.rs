use super::point::{Point, Rect};
use crate::scalar::Real;

/// Bucket grid over a rectangle for fixed-radius and nearest-point queries.
/// Supports incremental insertion, which the advancing front relies on.
#[derive(Debug, Clone)]
pub struct PointGrid<T> {
    origin: Point<T>,
    cell: T,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
    points: Vec<Point<T>>,
}

impl<T: Real> PointGrid<T> {
    pub fn new(bounds: &Rect<T>, cell: T) -> Self {
        let nx = ((bounds.width() / cell).ceil().to_usize().unwrap_or(1)).max(1);
        let ny = ((bounds.height() / cell).ceil().to_usize().unwrap_or(1)).max(1);
        Self {
            origin: Point::new(bounds.xmin, bounds.ymin),
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
            points: Vec::new(),
        }
    }

    pub fn from_points(bounds: &Rect<T>, cell: T, points: &[Point<T>]) -> Self {
        let mut grid = Self::new(bounds, cell);
        for &p in points {
            grid.insert(p);
        }
        grid
    }

    fn coords(&self, p: Point<T>) -> (isize, isize) {
        let cx = ((p.x - self.origin.x) / self.cell).floor().to_isize().unwrap_or(0);
        let cy = ((p.y - self.origin.y) / self.cell).floor().to_isize().unwrap_or(0);
        (cx, cy)
    }

    fn clamp(&self, cx: isize, cy: isize) -> (usize, usize) {
        (
            cx.clamp(0, self.nx as isize - 1) as usize,
            cy.clamp(0, self.ny as isize - 1) as usize,
        )
    }

    /// Inserts a point and returns its index.
    pub fn insert(&mut self, p: Point<T>) -> usize {
        let (cx, cy) = self.coords(p);
        let (cx, cy) = self.clamp(cx, cy);
        let idx = self.points.len();
        self.points.push(p);
        self.buckets[cy * self.nx + cx].push(idx);
        idx
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

    /// Calls `f(index, distance)` for every point within `radius` of `q`.
    pub fn for_each_within(&self, q: Point<T>, radius: T, mut f: impl FnMut(usize, T)) {
        let (lx, ly) = self.coords(Point::new(q.x - radius, q.y - radius));
        let (hx, hy) = self.coords(Point::new(q.x + radius, q.y + radius));
        let (lx, ly) = self.clamp(lx, ly);
        let (hx, hy) = self.clamp(hx, hy);
        for cy in ly..=hy {
            for cx in lx..=hx {
                for &j in &self.buckets[cy * self.nx + cx] {
                    let d = q.dist(self.points[j]);
                    if d <= radius {
                        f(j, d);
                    }
                }
            }
        }
    }

    pub fn any_within(&self, q: Point<T>, radius: T) -> bool {
        let mut found = false;
        self.for_each_within(q, radius, |_, _| found = true);
        found
    }

    /// Closest point to `q`, or `None` for an empty grid.
    pub fn nearest(&self, q: Point<T>) -> Option<(usize, T)> {
        if self.points.is_empty() {
            return None;
        }
        let (qx, qy) = self.coords(q);
        let mut best: Option<(usize, T)> = None;
        let max_ring = self.nx.max(self.ny) as isize + 1;
        for ring in 0..=max_ring {
            for cy in (qy - ring)..=(qy + ring) {
                for cx in (qx - ring)..=(qx + ring) {
                    let on_ring = (cy - qy).abs() == ring || (cx - qx).abs() == ring;
                    if !on_ring
                        || cx < 0
                        || cy < 0
                        || cx >= self.nx as isize
                        || cy >= self.ny as isize
                    {
                        continue;
                    }
                    for &j in &self.buckets[cy as usize * self.nx + cx as usize] {
                        let d = q.dist(self.points[j]);
                        if best.map_or(true, |(_, bd)| d < bd) {
                            best = Some((j, d));
                        }
                    }
                }
            }
            // Everything outside ring r is at least r cells away.
            if let Some((_, bd)) = best {
                if bd <= T::from_usize_lossy(ring as usize) * self.cell {
                    break;
                }
            }
        }
        best
    }
}
