use crate::assembly::HybridSelection;
use crate::error::{Error, Result};
use crate::pointcloud::{Neighborhood, PointCloud};
use crate::scalar::Real;
use crate::strongform::{Functional, LocalFit, MonomialBasis};

use super::TestCase;

/// `|u - u_h| / |u|` in the discrete norm `(sum_i v_i w_i^2)^(1/2)` with the
/// exact solution evaluated at the nodes.
pub fn relative_l2_error<T: Real>(
    u_h: &[T],
    case: &TestCase<T>,
    cloud: &PointCloud<T>,
    volumes: &[T],
) -> Result<T> {
    let u: Vec<T> = cloud.points().iter().map(|&p| case.exact_solution(p)).collect();
    relative_l2(u_h, &u, volumes)
}

/// `|u - u_h| / |u|` in the volume-weighted discrete norm.
pub fn relative_l2<T: Real>(u_h: &[T], u: &[T], volumes: &[T]) -> Result<T> {
    if u_h.len() != u.len() || volumes.len() != u.len() {
        return Err(Error::Dimension("error metric inputs disagree in size".into()));
    }
    let mut num = T::zero();
    let mut den = T::zero();
    for ((&u, &uh), &v) in u.iter().zip(u_h).zip(volumes) {
        num += v * (u - uh) * (u - uh);
        den += v * u * u;
    }
    if den == T::zero() {
        return Err(Error::ZeroNorm);
    }
    Ok((num / den).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxSample<T> {
    pub point: usize,
    pub x: T,
    /// `eta (u - u_h)_x`, absent where the one-sided stencil is too small.
    pub delta_q: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxProfile<T> {
    /// Ordered by `x`.
    pub samples: Vec<FluxSample<T>>,
}

impl<T: Real> FluxProfile<T> {
    pub fn values(&self) -> Vec<T> {
        self.samples.iter().filter_map(|s| s.delta_q).collect()
    }

    pub fn skipped(&self) -> usize {
        self.samples.iter().filter(|s| s.delta_q.is_none()).count()
    }
}

/// Flux error along the band `|y| <= h_i`. Derivatives use only neighbors
/// from the same constant-diffusivity region of `case`.
pub fn flux_error_profile<T: Real>(
    u_h: &[T],
    case: &TestCase<T>,
    cloud: &PointCloud<T>,
    neigh: &Neighborhood,
) -> Result<FluxProfile<T>> {
    if u_h.len() != cloud.len() {
        return Err(Error::Dimension("solution length differs from cloud".into()));
    }
    let diff: Vec<T> = cloud
        .points()
        .iter()
        .zip(u_h)
        .map(|(&p, &uh)| case.exact_solution(p) - uh)
        .collect();
    let mut samples = Vec::new();
    for i in 0..cloud.len() {
        let p = cloud.point(i);
        if p.y.abs() > cloud.h(i) {
            continue;
        }
        let region = case.region(p);
        let cols: Vec<usize> = neigh
            .stencil(i)
            .iter()
            .copied()
            .filter(|&j| case.region(cloud.point(j)) == region)
            .collect();
        let delta_q = match LocalFit::with_columns(cloud, i, cols, MonomialBasis::default()) {
            Ok(fit) => Some(case.diffusivity_at(p) * fit.functional(Functional::Dx).apply(&diff)),
            Err(Error::UnderResolvedStencil { .. } | Error::SingularStencil { .. }) => None,
            Err(e) => return Err(e),
        };
        samples.push(FluxSample { point: i, x: p.x, delta_q });
    }
    samples.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.point.cmp(&b.point)));
    Ok(FluxProfile { samples })
}

/// Percentages of interior points chosen for the conservative scheme and
/// how many of them sit at the interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionStats {
    pub interior: usize,
    pub sigma0: usize,
    pub conservative: usize,
    /// `|I_sigma0| / |I|`
    pub sigma0_pct: f64,
    /// `|I_c| / |I|`
    pub conservative_pct: f64,
    /// `|I_c & I_gamma| / |I_c|`, undefined when `I_c` is empty.
    pub at_interface_pct: Option<f64>,
    /// `|I_c & I_gamma+| / |I_c|`
    pub near_interface_pct: Option<f64>,
}

/// `I_gamma` holds points with a neighbor of different diffusivity;
/// `I_gamma+` is the interior part of their neighborhoods.
pub fn node_fraction_stats<T: Real>(
    selection: &HybridSelection,
    cloud: &PointCloud<T>,
    neigh: &Neighborhood,
    eta: &[T],
) -> FractionStats {
    let n = cloud.len();
    let interior = cloud.interior_indices().len();
    let mut gamma = vec![false; n];
    let mut gamma_plus = vec![false; n];
    for i in 0..n {
        if neigh.stencil(i).iter().any(|&j| eta[j] != eta[i]) {
            gamma[i] = true;
            for &j in neigh.stencil(i) {
                gamma_plus[j] |= cloud.kind(j).is_interior();
            }
        }
    }
    let ic = &selection.conservative;
    let pct = |a: usize, b: usize| 100.0 * a as f64 / b as f64;
    let ratio = |flags: &[bool]| {
        (!ic.is_empty()).then(|| pct(ic.iter().filter(|&&i| flags[i]).count(), ic.len()))
    };
    FractionStats {
        interior,
        sigma0: selection.sigma0.len(),
        conservative: ic.len(),
        sigma0_pct: pct(selection.sigma0.len(), interior),
        conservative_pct: pct(ic.len(), interior),
        at_interface_pct: ratio(&gamma),
        near_interface_pct: ratio(&gamma_plus),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_cells;
    use crate::pointcloud::{build_neighborhoods, generate_uniform, Metric, Rect};

    #[test]
    fn l2_error_examples() {
        let case = TestCase::interior_interface(10.0);
        let c = case.partition(generate_uniform(0.2, &Rect::default()).unwrap());
        let n = build_neighborhoods(&c, Metric::D2);
        let v: Vec<f64> = build_cells(&c, &n).unwrap().iter().map(|c| c.measure).collect();
        let exact: Vec<f64> = c.points().iter().map(|&p| case.exact_solution(p)).collect();
        assert_eq!(relative_l2_error(&exact, &case, &c, &v).unwrap(), 0.0);
        let doubled: Vec<f64> = exact.iter().map(|u| 2.0 * u).collect();
        assert!((relative_l2_error(&doubled, &case, &c, &v).unwrap() - 1.0).abs() < 1e-14);
        let k = 300;
        let mut bumped = exact.clone();
        bumped[k] += 0.1;
        let norm: f64 = exact.iter().zip(&v).map(|(u, w)| w * u * u).sum::<f64>().sqrt();
        let e = relative_l2_error(&bumped, &case, &c, &v).unwrap();
        assert!((e - 0.1 * v[k].sqrt() / norm).abs() < 1e-14);

        let no_volume = vec![0.0; c.len()];
        assert!(matches!(
            relative_l2_error(&exact, &case, &c, &no_volume),
            Err(Error::ZeroNorm)
        ));
    }

    #[test]
    fn flux_profile_vanishes_for_exact_solution() {
        let case = TestCase::three_strip(1e6, 1e-4);
        let c = case.partition(generate_uniform(0.1, &Rect::default()).unwrap());
        let n = build_neighborhoods(&c, Metric::D2);
        let exact: Vec<f64> = c.points().iter().map(|&p| case.exact_solution(p)).collect();
        let prof = flux_error_profile(&exact, &case, &c, &n).unwrap();
        assert!(!prof.samples.is_empty());
        assert!(prof.values().iter().all(|v| v.abs() < 1e-12));
        assert!(prof.samples.windows(2).all(|w| w[0].x <= w[1].x));

        // A constant-flux perturbation shows up as that constant, up to
        // roundoff amplified by the middle strip's diffusivity.
        let shifted: Vec<f64> = c
            .points()
            .iter()
            .zip(&exact)
            .map(|(p, u)| u - 0.01 * case.exact_solution(*p) + 0.01 * 2.0)
            .collect();
        let (q, _) = case.strip_flux();
        for v in flux_error_profile(&shifted, &case, &c, &n).unwrap().values() {
            assert!((v - 0.01 * q).abs() < 1e-6 * (0.01 * q).abs(), "{v} {q}");
        }
    }
}
