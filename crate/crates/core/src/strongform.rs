//! Strong-form operators from weighted least squares with exact monomial
//! reproduction, the classical diffusion row with a smoothed (optionally
//! log-scaled) diffusivity, the null-space correction and the diagonal
//! dominance error `sigma`.

use crate::dense::DenseLu;
use crate::error::{Error, Result};
use crate::pointcloud::{Neighborhood, Point, PointCloud};
use crate::scalar::Real;

/// Degree of the reproduced monomials.
pub const DEGREE: usize = 2;

/// Multi-indices `alpha` with `|alpha| <= K`, graded by total degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    degree: usize,
    exponents: Vec<(u32, u32)>,
}

impl MonomialBasis {
    pub fn new(degree: usize) -> Self {
        let mut exponents = Vec::with_capacity((degree + 1) * (degree + 2) / 2);
        for total in 0..=degree as u32 {
            for py in 0..=total {
                exponents.push((total - py, py));
            }
        }
        Self { degree, exponents }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[(u32, u32)] {
        &self.exponents
    }

    /// `d^alpha` for every multi-index.
    pub fn eval<T: Real>(&self, d: Point<T>) -> Vec<T> {
        self.exponents
            .iter()
            .map(|&(a, b)| d.x.powi(a as i32) * d.y.powi(b as i32))
            .collect()
    }
}

impl Default for MonomialBasis {
    fn default() -> Self {
        Self::new(DEGREE)
    }
}

/// Linear functional whose exact values on `(x - x_i)^alpha` form the targets `b*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional<T> {
    Value,
    Dx,
    Dy,
    Laplacian,
    /// Point evaluation at an arbitrary location.
    ValueAt(Point<T>),
}

impl<T: Real> Functional<T> {
    pub fn targets(&self, basis: &MonomialBasis, center: Point<T>) -> Vec<T> {
        match *self {
            Functional::ValueAt(p) => basis.eval(p - center),
            f => basis
                .exponents()
                .iter()
                .map(|&e| match (f, e) {
                    (Functional::Value, (0, 0)) => T::one(),
                    (Functional::Dx, (1, 0)) | (Functional::Dy, (0, 1)) => T::one(),
                    (Functional::Laplacian, (2, 0)) | (Functional::Laplacian, (0, 2)) => {
                        T::lit(2.0)
                    }
                    _ => T::zero(),
                })
                .collect(),
        }
    }
}

/// Sparse operator row over a neighborhood: `D_i u = sum_j vals[k] u[cols[k]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilRow<T> {
    pub center: usize,
    pub cols: Vec<usize>,
    pub vals: Vec<T>,
}

impl<T: Real> StencilRow<T> {
    pub fn apply(&self, u: &[T]) -> T {
        self.cols.iter().zip(&self.vals).map(|(&j, &v)| v * u[j]).sum()
    }

    pub fn diagonal(&self) -> T {
        self.cols
            .iter()
            .position(|&j| j == self.center)
            .map_or(T::zero(), |k| self.vals[k])
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            center: self.center,
            cols: self.cols.clone(),
            vals: self.vals.iter().map(|&v| v * s).collect(),
        }
    }

    /// `sum_j c_ij (x_j - x_i)^alpha` for every monomial.
    pub fn moments(&self, cloud: &PointCloud<T>, basis: &MonomialBasis) -> Vec<T> {
        let xi = cloud.point(self.center);
        let mut m = vec![T::zero(); basis.len()];
        for (&j, &v) in self.cols.iter().zip(&self.vals) {
            for (acc, p) in m.iter_mut().zip(basis.eval(cloud.point(j) - xi)) {
                *acc += v * p;
            }
        }
        m
    }
}

/// Weighted least-squares system of one point, factored once and reused for
/// several functionals.
///
/// Monomials are evaluated in coordinates scaled by `h_i`; the targets are
/// scaled to match, so returned coefficients need no unscaling.
#[derive(Debug, Clone)]
pub struct LocalFit<T> {
    center: usize,
    center_pos: Point<T>,
    h: T,
    cols: Vec<usize>,
    /// Scaled monomials, one row of `basis.len()` entries per column.
    kmat: Vec<Vec<T>>,
    w2: Vec<T>,
    lu: DenseLu<T>,
    basis: MonomialBasis,
}

/// `w_ij = exp(-2 |x_j - x_i| / (h_i + h_j))`
pub fn wlsq_weight<T: Real>(dist: T, h_i: T, h_j: T) -> T {
    (-T::lit(2.0) * dist / (h_i + h_j)).exp()
}

impl<T: Real> LocalFit<T> {
    pub fn new(cloud: &PointCloud<T>, neigh: &Neighborhood, i: usize) -> Result<Self> {
        Self::with_columns(cloud, i, neigh.stencil(i).to_vec(), MonomialBasis::default())
    }

    /// Fit over an explicit column set (which need not contain `i`).
    pub fn with_columns(
        cloud: &PointCloud<T>,
        i: usize,
        cols: Vec<usize>,
        basis: MonomialBasis,
    ) -> Result<Self> {
        let m = basis.len();
        if cols.len() < m {
            return Err(Error::UnderResolvedStencil {
                point: i,
                size: cols.len(),
                required: m,
            });
        }
        let xi = cloud.point(i);
        let hi = cloud.h(i);
        let inv_h = T::one() / hi;
        let mut kmat = Vec::with_capacity(cols.len());
        let mut w2 = Vec::with_capacity(cols.len());
        let mut moment = vec![T::zero(); m * m];
        for &j in &cols {
            let d = cloud.point(j) - xi;
            let k = basis.eval(d * inv_h);
            let w = wlsq_weight(d.norm(), hi, cloud.h(j));
            let ww = w * w;
            for a in 0..m {
                let ka = ww * k[a];
                for b in 0..m {
                    moment[a * m + b] += ka * k[b];
                }
            }
            kmat.push(k);
            w2.push(ww);
        }
        let lu = DenseLu::factor(moment, m).ok_or(Error::SingularStencil { point: i })?;
        Ok(Self {
            center: i,
            center_pos: xi,
            h: hi,
            cols,
            kmat,
            w2,
            lu,
            basis,
        })
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    /// Minimum-norm coefficients reproducing the unscaled targets `b*`.
    pub fn row(&self, targets: &[T]) -> StencilRow<T> {
        let scaled: Vec<T> = targets
            .iter()
            .zip(self.basis.exponents())
            .map(|(&b, &(a, c))| b / self.h.powi((a + c) as i32))
            .collect();
        let lambda = self.lu.solve(&scaled);
        let vals = self
            .kmat
            .iter()
            .zip(&self.w2)
            .map(|(k, &ww)| ww * k.iter().zip(&lambda).map(|(&a, &b)| a * b).sum::<T>())
            .collect();
        StencilRow {
            center: self.center,
            cols: self.cols.clone(),
            vals,
        }
    }

    pub fn functional(&self, f: Functional<T>) -> StencilRow<T> {
        self.row(&f.targets(&self.basis, self.center_pos))
    }
}

/// Solves the constrained minimization for one row of targets `b*`.
pub fn wlsq_row<T: Real>(
    cloud: &PointCloud<T>,
    neigh: &Neighborhood,
    i: usize,
    targets: &[T],
) -> Result<StencilRow<T>> {
    Ok(LocalFit::new(cloud, neigh, i)?.row(targets))
}

/// `k` passes of `v_i <- sum_j s_ij v_j / sum_j s_ij` over `S_i` with
/// `s_ij = exp(-3 |x_j - x_i|^2 / h_i^2)`.
pub fn smooth_field<T: Real>(
    values: &[T],
    cloud: &PointCloud<T>,
    neigh: &Neighborhood,
    cycles: usize,
) -> Vec<T> {
    let mut cur = values.to_vec();
    if cycles == 0 {
        return cur;
    }
    // Weights do not change between passes.
    let weights: Vec<Vec<T>> = (0..cloud.len())
        .map(|i| {
            let xi = cloud.point(i);
            let h2 = cloud.h(i) * cloud.h(i);
            neigh
                .stencil(i)
                .iter()
                .map(|&j| (-T::lit(3.0) * (cloud.point(j) - xi).norm_sq() / h2).exp())
                .collect()
        })
        .collect();
    for _ in 0..cycles {
        cur = (0..cloud.len())
            .map(|i| {
                let (mut num, mut den) = (T::zero(), T::zero());
                for (&j, &s) in neigh.stencil(i).iter().zip(&weights[i]) {
                    num += s * cur[j];
                    den += s;
                }
                let v = num / den;
                // Rounding can push an average of equal values off by an ulp.
                let (lo, hi) = neigh
                    .stencil(i)
                    .iter()
                    .fold((T::infinity(), T::neg_infinity()), |(l, h), &j| {
                        (l.min(cur[j]), h.max(cur[j]))
                    });
                v.max(lo).min(hi)
            })
            .collect();
    }
    cur
}

/// Nodal diffusivity together with the smoothed field the strong form uses.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusivityField<T> {
    pub eta: Vec<T>,
    /// Smoothed `eta`, present for the unscaled operator.
    pub smoothed: Option<Vec<T>>,
    /// Smoothed `log eta`, present for the log-scaled operator.
    pub mu: Option<Vec<T>>,
    pub smoothing_cycles: usize,
    pub scaled: bool,
}

impl<T: Real> DiffusivityField<T> {
    pub fn new(
        eta: Vec<T>,
        cloud: &PointCloud<T>,
        neigh: &Neighborhood,
        smoothing_cycles: usize,
        scaled: bool,
    ) -> Result<Self> {
        if eta.len() != cloud.len() {
            return Err(Error::Dimension(format!(
                "{} diffusivity values for {} points",
                eta.len(),
                cloud.len()
            )));
        }
        if let Some(i) = eta.iter().position(|&e| !(e > T::zero() && e.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "diffusivity at point {i} is not positive"
            )));
        }
        let (smoothed, mu) = if scaled {
            let log: Vec<T> = eta.iter().map(|e| e.ln()).collect();
            (None, Some(smooth_field(&log, cloud, neigh, smoothing_cycles)))
        } else {
            (Some(smooth_field(&eta, cloud, neigh, smoothing_cycles)), None)
        };
        Ok(Self {
            eta,
            smoothed,
            mu,
            smoothing_cycles,
            scaled,
        })
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }
}

/// Product-rule diffusion row `grad(eta) . c_grad + eta c_lap`, or its
/// log-scaled variant `exp(mu) (grad(mu) . c_grad + c_lap)`.
pub fn diffusion_row_classical<T: Real>(
    fit: &LocalFit<T>,
    field: &DiffusivityField<T>,
) -> StencilRow<T> {
    let gx = fit.functional(Functional::Dx);
    let gy = fit.functional(Functional::Dy);
    let lap = fit.functional(Functional::Laplacian);
    let i = fit.center;
    let (values, prefactor, lap_scale) = match (&field.mu, &field.smoothed) {
        (Some(mu), _) => (mu, mu[i].exp(), T::one()),
        (None, Some(eta)) => (eta, T::one(), eta[i]),
        (None, None) => (&field.eta, T::one(), field.eta[i]),
    };
    let dx = gx.apply(values);
    let dy = gy.apply(values);
    let vals = (0..lap.vals.len())
        .map(|k| prefactor * (dx * gx.vals[k] + dy * gy.vals[k] + lap_scale * lap.vals[k]))
        .collect();
    StencilRow {
        center: i,
        cols: lap.cols,
        vals,
    }
}

/// Zero operator `xi` with `xi_ii = 1` that annihilates all monomials, of
/// minimal weighted norm. Built by moving the center column to the
/// right-hand side.
pub fn null_space_vector<T: Real>(
    cloud: &PointCloud<T>,
    neigh: &Neighborhood,
    i: usize,
) -> Result<StencilRow<T>> {
    let basis = MonomialBasis::default();
    let others: Vec<usize> = neigh.stencil(i).iter().copied().filter(|&j| j != i).collect();
    let fit = LocalFit::with_columns(cloud, i, others, basis.clone())?;
    // The center column is (1, 0, ..., 0).
    let mut targets = vec![T::zero(); basis.len()];
    targets[0] = -T::one();
    let rest = fit.row(&targets);
    let mut cols = Vec::with_capacity(rest.cols.len() + 1);
    let mut vals = Vec::with_capacity(rest.cols.len() + 1);
    let mut placed = false;
    for (&j, &v) in rest.cols.iter().zip(&rest.vals) {
        if !placed && j > i {
            cols.push(i);
            vals.push(T::one());
            placed = true;
        }
        cols.push(j);
        vals.push(v);
    }
    if !placed {
        cols.push(i);
        vals.push(T::one());
    }
    Ok(StencilRow { center: i, cols, vals })
}

/// `phi(alpha) = sum_j (g_j + alpha x_j)^2 / (g_ii + alpha x_ii)^2`
pub fn correction_objective<T: Real>(row: &StencilRow<T>, xi: &StencilRow<T>, alpha: T) -> T {
    let den = row.diagonal() + alpha * xi.diagonal();
    row.vals
        .iter()
        .zip(&xi.vals)
        .map(|(&g, &x)| (g + alpha * x).powi(2))
        .sum::<T>()
        / (den * den)
}

/// Minimizer of [`correction_objective`], or `None` when the closed form
/// degenerates.
pub fn correction_alpha<T: Real>(row: &StencilRow<T>, xi: &StencilRow<T>) -> Option<T> {
    debug_assert_eq!(row.cols, xi.cols);
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| x * y).sum::<T>();
    let gg = dot(&row.vals, &row.vals);
    let gx = dot(&row.vals, &xi.vals);
    let xx = dot(&xi.vals, &xi.vals);
    let (g_ii, x_ii) = (row.diagonal(), xi.diagonal());
    let num = g_ii * gx - x_ii * gg;
    let den = x_ii * gx - g_ii * xx;
    if !(den.abs() >= T::lit(1e-14) * gg.sqrt() * xx.sqrt()) {
        return None;
    }
    Some(num / den)
}

/// `a_i = gamma_i + alpha_min xi_i`. Falls back to the input row when the
/// minimizer degenerates or would not lower the objective.
pub fn null_space_correction<T: Real>(row: &StencilRow<T>, xi: &StencilRow<T>) -> StencilRow<T> {
    match correction_alpha(row, xi) {
        Some(alpha)
            if correction_objective(row, xi, alpha) <= correction_objective(row, xi, T::zero()) =>
        {
            StencilRow {
                center: row.center,
                cols: row.cols.clone(),
                vals: row
                    .vals
                    .iter()
                    .zip(&xi.vals)
                    .map(|(&g, &x)| g + alpha * x)
                    .collect(),
            }
        }
        _ => row.clone(),
    }
}

/// Diagonal dominance error `max(sum_{j != i} |g_ij| / |g_ii| - 1, g_ii, 0)`;
/// infinite for a zero diagonal.
pub fn sigma<T: Real>(row: &StencilRow<T>) -> T {
    let d = row.diagonal();
    if d == T::zero() {
        return T::infinity();
    }
    let off: T = row
        .cols
        .iter()
        .zip(&row.vals)
        .filter(|(&j, _)| j != row.center)
        .map(|(_, v)| v.abs())
        .sum();
    (off / d.abs() - T::one()).max(d).max(T::zero())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassicalConfig {
    pub smoothing_cycles: usize,
    pub log_scaled: bool,
    pub correction: bool,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        Self {
            smoothing_cycles: 2,
            log_scaled: true,
            correction: true,
        }
    }
}

/// Classical diffusion row at `i`, corrected when configured.
pub fn classical_operator<T: Real>(
    cloud: &PointCloud<T>,
    neigh: &Neighborhood,
    i: usize,
    field: &DiffusivityField<T>,
    correction: bool,
) -> Result<StencilRow<T>> {
    let fit = LocalFit::new(cloud, neigh, i)?;
    let row = diffusion_row_classical(&fit, field);
    if !correction {
        return Ok(row);
    }
    let xi = null_space_vector(cloud, neigh, i)?;
    Ok(null_space_correction(&row, &xi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::{
        build_neighborhoods, generate_advancing_front, generate_uniform, BoundaryKind, Metric,
        Rect,
    };

    fn irregular() -> (PointCloud<f64>, Neighborhood) {
        let c = generate_advancing_front(0.1, &Rect::default(), 0.25, 0.45, 11).unwrap();
        let n = build_neighborhoods(&c, Metric::D2);
        (c, n)
    }

    fn some_interior(c: &PointCloud<f64>) -> usize {
        // Closest interior point to the origin.
        (0..c.len())
            .filter(|&i| c.kind(i).is_interior())
            .min_by(|&a, &b| c.point(a).norm().total_cmp(&c.point(b).norm()))
            .unwrap()
    }

    #[test]
    fn basis_size() {
        let b = MonomialBasis::new(2);
        assert_eq!(b.len(), 6);
        assert_eq!(b.exponents()[0], (0, 0));
        assert_eq!(MonomialBasis::new(3).len(), 10);
    }

    #[test]
    fn value_row_reproduces_constants() {
        let (c, n) = irregular();
        let i = some_interior(&c);
        let fit = LocalFit::new(&c, &n, i).unwrap();
        let row = fit.functional(Functional::Value);
        let u = vec![4.25; c.len()];
        assert!((row.apply(&u) - 4.25).abs() < 1e-12);
        let m = row.moments(&c, fit.basis());
        assert!((m[0] - 1.0).abs() < 1e-12);
        for v in &m[1..] {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_is_exact_on_linears() {
        let (c, n) = irregular();
        let i = some_interior(&c);
        let mut t = vec![0.0; 6];
        t[1] = 1.0;
        let row = wlsq_row(&c, &n, i, &t).unwrap();
        let u: Vec<f64> = c.points().iter().map(|p| 3.0 * p.x + 2.0).collect();
        assert!((row.apply(&u) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn under_resolved_stencil_errors() {
        let c = PointCloud::new(
            vec![Point::new(0.0, 0.0), Point::new(0.1, 0.0), Point::new(0.0, 0.1)],
            vec![0.5; 3],
            vec![BoundaryKind::Interior; 3],
            Rect::default(),
        )
        .unwrap();
        let n = build_neighborhoods(&c, Metric::D2);
        assert!(matches!(
            LocalFit::new(&c, &n, 0),
            Err(Error::UnderResolvedStencil { .. })
        ));
    }

    #[test]
    fn collinear_stencil_is_singular() {
        let pts: Vec<_> = (0..8).map(|k| Point::new(-0.4 + 0.1 * k as f64, 0.0)).collect();
        let c = PointCloud::new(pts, vec![1.0; 8], vec![BoundaryKind::Interior; 8], Rect::default())
            .unwrap();
        let n = build_neighborhoods(&c, Metric::D2);
        assert!(matches!(
            LocalFit::new(&c, &n, 3),
            Err(Error::SingularStencil { .. })
        ));
    }

    #[test]
    fn smoothing_constant_and_identity() {
        let (c, n) = irregular();
        let v = vec![7.0; c.len()];
        assert_eq!(smooth_field(&v, &c, &n, 3), v);
        let w: Vec<f64> = c.points().iter().map(|p| p.x).collect();
        assert_eq!(smooth_field(&w, &c, &n, 0), w);
    }

    #[test]
    fn smoothing_symmetric_step_gives_mean() {
        // 1D lattice; the point at x = 0 carries the mean of both sides.
        let s = 0.1;
        let pts: Vec<_> = (-3..=3).map(|k| Point::new(k as f64 * s, 0.0)).collect();
        let c = PointCloud::new(pts, vec![0.25; 7], vec![BoundaryKind::Interior; 7], Rect::default())
            .unwrap();
        let n = build_neighborhoods(&c, Metric::D2);
        let (l, r) = (1.0, 9.0);
        let eta: Vec<f64> = (-3..=3)
            .map(|k: i32| match k.signum() {
                -1 => l,
                1 => r,
                _ => 0.5 * (l + r),
            })
            .collect();
        let out = smooth_field(&eta, &c, &n, 1);
        assert!((out[3] - 0.5 * (l + r)).abs() < 1e-14);

        // Brute force at the jump-adjacent point x = s.
        let xi = 0.1;
        let (mut num, mut den) = (0.0, 0.0);
        for k in -3..=3 {
            let x = k as f64 * s;
            if (x - xi).abs() <= 0.25 {
                let w = (-3.0 * (x - xi).powi(2) / 0.0625).exp();
                num += w * eta[(k + 3) as usize];
                den += w;
            }
        }
        assert!((out[4] - num / den).abs() < 1e-14);
    }

    fn field(c: &PointCloud<f64>, n: &Neighborhood, eta: Vec<f64>, k: usize, scaled: bool) -> DiffusivityField<f64> {
        DiffusivityField::new(eta, c, n, k, scaled).unwrap()
    }

    #[test]
    fn constant_eta_reduces_to_laplacian() {
        let (c, n) = irregular();
        let i = some_interior(&c);
        let fit = LocalFit::new(&c, &n, i).unwrap();
        let lap = fit.functional(Functional::Laplacian);
        let eta = 3.5;
        let u: Vec<f64> = c.points().iter().map(|p| p.x * p.x).collect();
        for scaled in [false, true] {
            let f = field(&c, &n, vec![eta; c.len()], 2, scaled);
            let row = diffusion_row_classical(&fit, &f);
            assert!((row.apply(&u) - 2.0 * eta).abs() < 1e-8);
            for (a, b) in row.vals.iter().zip(&lap.vals) {
                assert!((a - eta * b).abs() < 1e-8 * (eta * b).abs().max(1.0));
            }
        }
    }

    #[test]
    fn smooth_eta_converges() {
        // L u = d/dx (e^x * 1) = e^x for u = x.
        let x0 = Point::new(0.1f64, 0.1);
        let mut errs = Vec::new();
        for h in [0.2f64, 0.1, 0.05] {
            let c = generate_uniform(h, &Rect::default()).unwrap();
            let n = build_neighborhoods(&c, Metric::D2);
            let i = (0..c.len())
                .min_by(|&a, &b| c.point(a).dist(x0).total_cmp(&c.point(b).dist(x0)))
                .unwrap();
            let eta: Vec<f64> = c.points().iter().map(|p| p.x.exp()).collect();
            let u: Vec<f64> = c.points().iter().map(|p| p.x).collect();
            let fit = LocalFit::new(&c, &n, i).unwrap();
            let mut e = 0.0f64;
            for scaled in [false, true] {
                let row = diffusion_row_classical(&fit, &field(&c, &n, eta.clone(), 0, scaled));
                e = e.max((row.apply(&u) - c.point(i).x.exp()).abs());
            }
            assert!(e < h, "h = {h}: error {e}");
            errs.push(e);
        }
        assert!(errs[2] < errs[0]);
    }

    #[test]
    fn null_space_vector_annihilates_monomials() {
        let (c, n) = irregular();
        let i = some_interior(&c);
        let xi = null_space_vector(&c, &n, i).unwrap();
        assert_eq!(xi.diagonal(), 1.0);
        assert_eq!(xi.cols, n.stencil(i));
        for m in xi.moments(&c, &MonomialBasis::default()) {
            assert!(m.abs() < 1e-9);
        }
    }

    #[test]
    fn correction_never_raises_objective() {
        let (c, n) = irregular();
        let f = field(&c, &n, c.points().iter().map(|p| if p.x < 0.0 { 1.0 } else { 1e6 }).collect(), 2, true);
        for i in c.interior_indices().into_iter().step_by(17) {
            let fit = LocalFit::new(&c, &n, i).unwrap();
            let row = diffusion_row_classical(&fit, &f);
            let xi = null_space_vector(&c, &n, i).unwrap();
            let corrected = null_space_correction(&row, &xi);
            let zero = StencilRow { center: i, cols: xi.cols.clone(), vals: vec![0.0; xi.cols.len()] };
            assert!(correction_objective(&corrected, &zero, 0.0) <= correction_objective(&row, &zero, 0.0) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn sigma_examples() {
        let row = |d: f64, off: &[f64]| {
            let mut cols = vec![0];
            let mut vals = vec![d];
            for (k, &v) in off.iter().enumerate() {
                cols.push(k + 1);
                vals.push(v);
            }
            StencilRow { center: 0, cols, vals }
        };
        assert_eq!(sigma(&row(-4.0, &[1.0, 1.0, 1.0, 1.0])), 0.0);
        assert_eq!(sigma(&row(-1.0, &[1.0, -1.5, 0.5])), 2.0);
        assert_eq!(sigma(&row(0.5, &[])), 0.5);
        assert!(sigma(&row(0.0, &[1.0])).is_infinite());
    }
}
