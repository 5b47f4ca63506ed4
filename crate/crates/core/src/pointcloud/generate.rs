use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::PointGrid;
use super::point::{Point, Rect};
use super::{BoundaryKind, CloudInfo, Layout, PointCloud, BOUNDARY_TOL};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Grid spacing of uniform clouds relative to the interaction radius.
pub const UNIFORM_SPACING_RATIO: f64 = 0.4;

/// Bounds on nearest-neighbor distance and hole size of irregular clouds,
/// relative to `h`.
pub const DEFAULT_R_MIN: f64 = 0.25;
pub const DEFAULT_R_MAX: f64 = 0.45;

/// Largest cloud either generator will attempt.
pub const MAX_POINTS: usize = 50_000_000;

/// Candidate placements tried around each front point.
const FRONT_ATTEMPTS: usize = 30;

/// Interaction radius of refinement level `k`: `2^-k / 5`.
pub fn level_radius<T: Real>(k: u32) -> T {
    T::lit(0.2 * 0.5f64.powi(k as i32))
}

fn boundary_kind<T: Real>(domain: &Rect<T>, p: Point<T>) -> BoundaryKind<T> {
    match domain.outward_normal(p, T::lit(BOUNDARY_TOL)) {
        Some(normal) => BoundaryKind::Dirichlet { normal },
        None => BoundaryKind::Interior,
    }
}

/// Axis-aligned grid with spacing at most `0.4 h`, boundary lines included.
///
/// All boundary points start out as Dirichlet; use
/// [`PointCloud::partition_boundary`] to assign Neumann sides.
pub fn generate_uniform<T: Real>(h: T, domain: &Rect<T>) -> Result<PointCloud<T>> {
    if !(h > T::zero() && h.is_finite()) {
        return Err(Error::InvalidParameter("h must be positive".into()));
    }
    if !domain.is_valid() {
        return Err(Error::InvalidParameter("invalid domain rectangle".into()));
    }
    let target = h * T::lit(UNIFORM_SPACING_RATIO);
    let intervals = |len: T| -> usize {
        // Guard against 25.000000001 becoming 26 intervals.
        (len / target - T::lit(1e-9)).ceil().to_usize().unwrap_or(0).max(1)
    };
    let nx = intervals(domain.width());
    let ny = intervals(domain.height());
    if (nx + 1).saturating_mul(ny + 1) > MAX_POINTS {
        return Err(Error::InvalidParameter(format!("h = {h} needs too many points")));
    }
    if nx + 1 < 3 || ny + 1 < 3 {
        return Err(Error::InvalidParameter(format!(
            "h = {h} gives fewer than 3 points per axis"
        )));
    }

    let coord = |lo: T, hi: T, k: usize, n: usize| -> T {
        if k == n {
            hi
        } else {
            lo + (hi - lo) * T::from_usize_lossy(k) / T::from_usize_lossy(n)
        }
    };
    let mut points = Vec::with_capacity((nx + 1) * (ny + 1));
    for iy in 0..=ny {
        let y = coord(domain.ymin, domain.ymax, iy, ny);
        for ix in 0..=nx {
            points.push(Point::new(coord(domain.xmin, domain.xmax, ix, nx), y));
        }
    }
    let kind = points.iter().map(|&p| boundary_kind(domain, p)).collect();
    let h = vec![h; points.len()];
    let mut cloud = PointCloud::new(points, h, kind, *domain)?;
    cloud.info = CloudInfo {
        layout: Layout::Uniform,
        level: None,
        seed: None,
    };
    Ok(cloud)
}

/// Irregular cloud filled from the boundary inward.
///
/// Boundary points are laid along the four edges with jittered spacing.
/// The interior is then grown front-wise: each front point proposes
/// candidates in an annulus around itself, accepting those that keep an
/// exclusion distance of `(r_min + r_max) / 2 * h` to every existing point.
/// A final sweep over a probe lattice fills remaining holes so that every
/// domain point has a cloud point within `r_max * h`.
pub fn generate_advancing_front<T: Real>(
    h: T,
    domain: &Rect<T>,
    r_min: T,
    r_max: T,
    seed: u64,
) -> Result<PointCloud<T>> {
    if !(h > T::zero() && h.is_finite()) {
        return Err(Error::InvalidParameter("h must be positive".into()));
    }
    if !(r_min > T::zero() && r_min < r_max && r_max < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < r_min < r_max < 1, got r_min = {r_min}, r_max = {r_max}"
        )));
    }
    if !domain.is_valid() {
        return Err(Error::InvalidParameter("invalid domain rectangle".into()));
    }
    let spacing = r_min * h;
    let estimate = (domain.area() / (spacing * spacing)).to_f64().unwrap_or(f64::INFINITY);
    if estimate > MAX_POINTS as f64 {
        return Err(Error::InvalidParameter(format!("h = {h} needs too many points")));
    }
    let half = T::lit(0.5);
    let exclusion = (r_min + r_max) * half * h;
    let min_dist = r_min * h;
    if domain.width().min(domain.height()) < min_dist {
        return Err(Error::InvalidParameter(format!(
            "h = {h} is too large for the domain"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid = PointGrid::new(domain, exclusion);

    // Boundary: corners first, then jittered nodes along each edge.
    let corners = domain.corners();
    for &c in &corners {
        grid.insert(c);
    }
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        let len = a.dist(b);
        let segments = (len / exclusion).round().to_usize().unwrap_or(1).max(1);
        let base = len / T::from_usize_lossy(segments);
        // Consecutive gaps stay within base +- 2*jitter, above r_min * h.
        let jitter = ((base - min_dist) * T::lit(0.45)).max(T::zero());
        if base < min_dist {
            return Err(Error::InvalidParameter(format!(
                "h = {h} is too large for the domain"
            )));
        }
        for k in 1..segments {
            let offset: f64 = rng.gen_range(-1.0..1.0);
            let t = (T::from_usize_lossy(k) * base + T::lit(offset) * jitter) / len;
            let mut p = a + (b - a) * t;
            // Pin the constant coordinate exactly onto the edge.
            if a.x == b.x {
                p.x = a.x;
            } else {
                p.y = a.y;
            }
            grid.insert(p);
        }
    }
    let n_boundary = grid.len();

    let inside = |p: Point<T>| domain.distance_to_boundary(p) > T::lit(1e-9) * h;
    let mut front: VecDeque<usize> = (0..n_boundary).collect();
    let tau = T::lit(std::f64::consts::TAU);
    while let Some(a) = front.pop_front() {
        let origin = grid.points()[a];
        for _ in 0..FRONT_ATTEMPTS {
            let r = exclusion * T::lit(1.0 + rng.gen::<f64>());
            let theta = tau * T::lit(rng.gen::<f64>());
            let cand = origin + Point::new(theta.cos(), theta.sin()) * r;
            if !inside(cand) || grid.any_within(cand, exclusion) {
                continue;
            }
            let idx = grid.insert(cand);
            front.push_back(idx);
        }
    }

    // Probe lattice: any domain point is within `probe_reach` of a probe,
    // and every probe ends up within `exclusion` of a cloud point.
    let probe_reach = (r_max * h - exclusion) * T::lit(0.9);
    let probe_spacing = probe_reach * T::SQRT_2();
    let nxp = (domain.width() / probe_spacing).ceil().to_usize().unwrap_or(1).max(1);
    let nyp = (domain.height() / probe_spacing).ceil().to_usize().unwrap_or(1).max(1);
    let probe = |ix: usize, iy: usize| {
        Point::new(
            domain.xmin + domain.width() * T::from_usize_lossy(ix) / T::from_usize_lossy(nxp),
            domain.ymin + domain.height() * T::from_usize_lossy(iy) / T::from_usize_lossy(nyp),
        )
    };
    for iy in 0..=nyp {
        for ix in 0..=nxp {
            let q = probe(ix, iy);
            if !grid.any_within(q, exclusion) {
                if !inside(q) {
                    return Err(Error::FrontStalled(format!(
                        "boundary gap at ({}, {})",
                        q.x, q.y
                    )));
                }
                grid.insert(q);
            }
        }
    }

    let points = grid.points().to_vec();
    let kind = points.iter().map(|&p| boundary_kind(domain, p)).collect();
    let radii = vec![h; points.len()];
    let mut cloud = PointCloud::new(points, radii, kind, *domain)?;
    cloud.info = CloudInfo {
        layout: Layout::AdvancingFront,
        level: None,
        seed: Some(seed),
    };
    Ok(cloud)
}
