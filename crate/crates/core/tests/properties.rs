use gfdm::assembly::{
    bicgstab2, relative_residual, select_hybrid_nodes, CsrMatrix, SolverConfig,
};
use gfdm::conservative::{column_sum_check, diffusion_row_conservative};
use gfdm::geometry::build_cells;
use gfdm::pointcloud::{
    build_neighborhoods, generate_advancing_front, BoundaryKind, Metric, Neighborhood, Point,
    PointCloud, Rect, DEFAULT_R_MAX, DEFAULT_R_MIN,
};
use gfdm::problems::relative_l2;
use gfdm::strongform::{
    correction_alpha, correction_objective, null_space_correction, null_space_vector, sigma,
    smooth_field, wlsq_row, wlsq_weight, Functional, LocalFit, MonomialBasis, StencilRow,
};
use proptest::prelude::*;

const EXPONENTS: [(i32, i32); 6] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

/// A center at the origin with `n` neighbors scattered in its disc. The
/// stencil of point 0 is the whole set.
fn stencil_cloud(h: f64, offsets: &[(f64, f64)]) -> (PointCloud<f64>, Neighborhood) {
    let mut pts = vec![Point::new(0.0, 0.0)];
    pts.extend(offsets.iter().map(|&(r, t)| Point::new(r * h * t.cos(), r * h * t.sin())));
    let n = pts.len();
    let domain = Rect::new(-2.0 * h, 2.0 * h, -2.0 * h, 2.0 * h);
    let cloud = PointCloud::new(pts, vec![h; n], vec![BoundaryKind::Interior; n], domain).unwrap();
    let mut stencils = vec![(0..n).collect::<Vec<_>>()];
    stencils.extend((1..n).map(|i| vec![i]));
    (cloud, Neighborhood::from_stencils(stencils, Metric::D2))
}

fn offsets() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.2f64..1.0, 0.0f64..std::f64::consts::TAU), 10..30)
}

fn monomial(d: Point<f64>, (a, b): (i32, i32)) -> f64 {
    d.x.powi(a) * d.y.powi(b)
}

/// Minimizes `sum (c_j / w_j)^2` subject to `K c = b` through the full
/// saddle-point system, in unscaled coordinates.
fn kkt_oracle(cloud: &PointCloud<f64>, cols: &[usize], targets: &[f64]) -> Vec<f64> {
    let n = cols.len();
    let m = EXPONENTS.len();
    let dim = n + m;
    let xi = cloud.point(0);
    let mut a = vec![vec![0.0; dim + 1]; dim];
    for (k, &j) in cols.iter().enumerate() {
        let d = cloud.point(j) - xi;
        let w = wlsq_weight(d.norm(), cloud.h(0), cloud.h(j));
        a[k][k] = 1.0 / (w * w);
        for (r, &e) in EXPONENTS.iter().enumerate() {
            let v = monomial(d, e);
            a[k][n + r] = v;
            a[n + r][k] = v;
        }
    }
    for r in 0..m {
        a[n + r][dim] = targets[r];
    }
    for c in 0..dim {
        let p = (c..dim)
            .max_by(|&x, &y| a[x][c].abs().partial_cmp(&a[y][c].abs()).unwrap())
            .unwrap();
        a.swap(c, p);
        for r in c + 1..dim {
            let f = a[r][c] / a[c][c];
            for k in c..=dim {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    let mut x = vec![0.0; dim];
    for r in (0..dim).rev() {
        let s: f64 = (r + 1..dim).map(|k| a[r][k] * x[k]).sum();
        x[r] = (a[r][dim] - s) / a[r][r];
    }
    x.truncate(n);
    x
}

/// `(sum_j c_j d_j^alpha, sum_j |c_j d_j^alpha|)` per monomial.
fn moments(row: &StencilRow<f64>, cloud: &PointCloud<f64>) -> Vec<(f64, f64)> {
    let xi = cloud.point(row.center);
    EXPONENTS
        .iter()
        .map(|&e| {
            row.cols.iter().zip(&row.vals).fold((0.0, 0.0), |(s, a), (&j, &v)| {
                let t = v * monomial(cloud.point(j) - xi, e);
                (s + t, a + t.abs())
            })
        })
        .collect()
}

fn af_cloud(h: f64, seed: u64) -> PointCloud<f64> {
    generate_advancing_front(h, &Rect::default(), DEFAULT_R_MIN, DEFAULT_R_MAX, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wlsq_rows_reproduce_monomials(
        h in 0.05f64..2.0,
        offs in offsets(),
        targets in prop::collection::vec(-5.0f64..5.0, 6),
    ) {
        let (cloud, neigh) = stencil_cloud(h, &offs);
        let row = wlsq_row(&cloud, &neigh, 0, &targets).unwrap();
        let bmax = targets.iter().fold(0.0f64, |m, b| m.max(b.abs()));
        for (((m, scale), &b), &(a, c)) in moments(&row, &cloud).into_iter().zip(&targets).zip(&EXPONENTS) {
            let hp = h.powi(a + c);
            prop_assert!((m - b).abs() <= 1e-9 * (1.0 + bmax) * (hp + scale), "{m} vs {b}");
        }
    }

    #[test]
    fn wlsq_rows_match_kkt_oracle(
        offs in offsets(),
        targets in prop::collection::vec(-5.0f64..5.0, 6),
    ) {
        let (cloud, neigh) = stencil_cloud(1.0, &offs);
        let row = wlsq_row(&cloud, &neigh, 0, &targets).unwrap();
        let oracle = kkt_oracle(&cloud, &row.cols, &targets);
        let norm = |c: &[f64]| -> f64 {
            c.iter().zip(&row.cols).map(|(&v, &j)| {
                let w = wlsq_weight(cloud.point(j).norm(), 1.0, 1.0);
                (v / w).powi(2)
            }).sum()
        };
        let (got, want) = (norm(&row.vals), norm(&oracle));
        prop_assert!((got - want).abs() <= 1e-8 * want.max(1e-300), "{got} vs {want}");
        let cmax = oracle.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in row.vals.iter().zip(&oracle) {
            prop_assert!((a - b).abs() <= 1e-7 * cmax);
        }
    }

    #[test]
    fn correction_preserves_reproduction(h in 0.05f64..2.0, offs in offsets(), mu in prop::collection::vec(-3.0f64..3.0, 30)) {
        let (cloud, neigh) = stencil_cloud(h, &offs);
        let fit = LocalFit::new(&cloud, &neigh, 0).unwrap();
        let lap = fit.functional(Functional::Laplacian);
        let gx = fit.functional(Functional::Dx);
        let g = lap.vals.iter().zip(&gx.vals).enumerate()
            .map(|(k, (&l, &d))| l + mu[k % mu.len()] * d).collect();
        let row = StencilRow { center: 0, cols: lap.cols.clone(), vals: g };
        let xi = null_space_vector(&cloud, &neigh, 0).unwrap();
        prop_assert_eq!(xi.diagonal(), 1.0);
        let fixed = null_space_correction(&row, &xi);
        for ((a, sa), (b, sb)) in moments(&row, &cloud).into_iter().zip(moments(&fixed, &cloud)) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + sa.max(sb)), "{a} vs {b}");
        }
        for ((z, s), &(a, c)) in moments(&xi, &cloud).into_iter().zip(&EXPONENTS) {
            prop_assert!(z.abs() <= 1e-9 * (s + h.powi(a + c)));
        }
    }

    #[test]
    fn alpha_minimizes_objective(offs in offsets(), skew in -5.0f64..5.0) {
        let (cloud, neigh) = stencil_cloud(1.0, &offs);
        let fit = LocalFit::new(&cloud, &neigh, 0).unwrap();
        let lap = fit.functional(Functional::Laplacian);
        let gy = fit.functional(Functional::Dy);
        let vals = lap.vals.iter().zip(&gy.vals).map(|(&l, &d)| l + skew * d).collect();
        let row = StencilRow { center: 0, cols: lap.cols.clone(), vals };
        let xi = null_space_vector(&cloud, &neigh, 0).unwrap();
        if let Some(alpha) = correction_alpha(&row, &xi) {
            let best = correction_objective(&row, &xi, alpha);
            // Scan both sides of the pole at g_ii + alpha xi_ii = 0.
            let pole = -row.diagonal() / xi.diagonal();
            for k in -400..=400 {
                let a = pole + (k as f64) * 0.05 * (1.0 + pole.abs());
                if (a - pole).abs() < 1e-9 {
                    continue;
                }
                let v = correction_objective(&row, &xi, a);
                prop_assert!(best <= v * (1.0 + 1e-9), "alpha {alpha}: {best} > {v} at {a}");
            }
        }
    }

    #[test]
    fn sigma_ignores_positive_scaling(vals in prop::collection::vec(-10.0f64..10.0, 3..20), diag in -10.0f64..-0.1, s in 1e-6f64..1e6) {
        let mut vals = vals;
        vals[0] = diag;
        let cols: Vec<usize> = (0..vals.len()).collect();
        let row = StencilRow { center: 0, cols, vals };
        let a = sigma(&row);
        let b = sigma(&row.scaled(s));
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
    }

    #[test]
    fn relative_l2_is_scale_free(
        pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0, 0.01f64..1.0), 1..50),
        s in prop_oneof![-1e6f64..-1e-6, 1e-6f64..1e6],
    ) {
        let u: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        prop_assume!(u.iter().any(|&x| x != 0.0));
        let uh: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let v: Vec<f64> = pairs.iter().map(|p| p.2).collect();
        let su: Vec<f64> = u.iter().map(|x| x * s).collect();
        let suh: Vec<f64> = uh.iter().map(|x| x * s).collect();
        let a = relative_l2(&uh, &u, &v).unwrap();
        let b = relative_l2(&suh, &su, &v).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn selection_set_algebra(diags in prop::collection::vec(-2.0f64..0.5, 40), seed in 0u64..1000) {
        // Rows with off-diagonal mass 1 and a random diagonal.
        let n = diags.len();
        let stencils: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut s: Vec<usize> = [i, (i + 1) % n, (i + 1 + seed as usize % (n - 1)) % n].to_vec();
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        let neigh = Neighborhood::from_stencils(stencils.clone(), Metric::D1);
        let rows: Vec<StencilRow<f64>> = stencils.iter().enumerate().filter(|(i, _)| i % 7 != 0)
            .map(|(i, s)| {
                let k = s.len() as f64 - 1.0;
                let vals = s.iter().map(|&j| if j == i { diags[i] } else { 1.0 / k }).collect();
                StencilRow { center: i, cols: s.clone(), vals }
            })
            .collect();
        let sel = select_hybrid_nodes(&rows, &neigh, 1e-12);
        for &i in &sel.sigma0 {
            prop_assert!(sel.conservative.binary_search(&i).is_ok());
            prop_assert!(sel.sigma1.binary_search(&i).is_err());
        }
        let mut union: Vec<usize> = sel.sigma0.iter().chain(&sel.sigma1).copied().collect();
        union.sort_unstable();
        prop_assert_eq!(&union, &sel.conservative);
        for &i in &sel.sigma1 {
            prop_assert!(i % 7 != 0);
            prop_assert!(stencils[i].iter().any(|j| sel.sigma0.contains(j)));
        }
        for r in &rows {
            let flagged = sigma(r) > 1e-12;
            prop_assert_eq!(flagged, sel.sigma0.contains(&r.center));
        }
    }

    #[test]
    fn solver_reports_true_residual(seed in 0u64..10_000, n in 5usize..120) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        for i in 0..n {
            let mut row = Vec::new();
            let mut off = 0.0;
            for _ in 0..4 {
                let j = rng.gen_range(0..n);
                if j != i {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    off += v.abs();
                    row.push((j, v));
                }
            }
            row.push((i, off + rng.gen_range(0.1..1.0)));
            rows.push(row);
        }
        let g = CsrMatrix::from_rows(n, rows).unwrap();
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sol = bicgstab2(&g, &f, &SolverConfig::default()).unwrap();
        let check = relative_residual(&g, &sol.u, &f);
        prop_assert!((sol.residual - check).abs() <= 1e-14, "{} vs {}", sol.residual, check);
        prop_assert!(sol.residual <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn neighborhoods_are_symmetric_and_pure(seed in 0u64..1_000_000, h in 0.15f64..0.4) {
        let cloud = af_cloud(h, seed);
        let a = build_neighborhoods(&cloud, Metric::D2);
        let b = build_neighborhoods(&cloud, Metric::D2);
        prop_assert_eq!(&a, &b);
        for i in 0..cloud.len() {
            for &j in a.stencil(i) {
                prop_assert!(a.contains(j, i), "{i} -> {j} not mirrored");
            }
            let nearest = a.stencil(i).iter().filter(|&&j| j != i)
                .map(|&j| cloud.point(j).dist(cloud.point(i)) / cloud.h(i))
                .fold(f64::INFINITY, f64::min);
            prop_assert!(nearest >= DEFAULT_R_MIN * (1.0 - 1e-12));
        }
    }

    #[test]
    fn cells_partition_the_domain(seed in 0u64..1_000_000, h in 0.15f64..0.4) {
        let cloud = af_cloud(h, seed);
        let neigh = build_neighborhoods(&cloud, Metric::D2);
        let cells = build_cells(&cloud, &neigh).unwrap();
        let total: f64 = cells.iter().map(|c| c.measure).sum();
        prop_assert!((total - 4.0).abs() <= 4e-9, "{total}");
        for c in &cells {
            for f in &c.faces {
                let back = cells[f.neighbor].face_to(c.owner);
                prop_assert!(back.is_some());
                prop_assert!((back.unwrap().measure - f.measure).abs() <= 1e-12);
            }
            if c.boundary_face() == 0.0 {
                let rel = (c.face_area_sum() - c.measure).abs() / c.measure;
                prop_assert!(rel <= 1e-10, "{rel}");
            }
        }
    }

    #[test]
    fn conservative_rows_balance(seed in 0u64..1_000_000, logs in prop::collection::vec(-6.0f64..6.0, 8)) {
        let cloud = af_cloud(0.25, seed);
        let neigh = build_neighborhoods(&cloud, Metric::D2);
        let cells = build_cells(&cloud, &neigh).unwrap();
        // Piecewise-constant diffusivity over vertical bands.
        let eta: Vec<f64> = cloud.points().iter()
            .map(|p| {
                let band = (((p.x + 1.0) * 4.0) as usize).min(logs.len() - 1);
                10f64.powf(logs[band])
            })
            .collect();
        let rows: Vec<StencilRow<f64>> = cells.iter()
            .map(|c| diffusion_row_conservative(c, &eta).unwrap().row)
            .collect();
        for r in &rows {
            let d = r.diagonal();
            prop_assert!(d < 0.0);
            let off: f64 = r.cols.iter().zip(&r.vals).filter(|(&j, _)| j != r.center).map(|(_, v)| {
                assert!(*v >= 0.0);
                *v
            }).sum();
            prop_assert!((off + d).abs() <= 1e-13 * d.abs());
        }
        for c in &cells {
            for f in &c.faces {
                let i = c.owner;
                let j = f.neighbor;
                let a = rows[i].vals[rows[i].cols.binary_search(&j).unwrap()] * c.measure;
                let b = rows[j].vals[rows[j].cols.binary_search(&i).unwrap()] * cells[j].measure;
                // Relative to the cell's total flux; tiny faces carry roundoff.
                let scale = (rows[i].diagonal() * c.measure).abs();
                prop_assert!((a - b).abs() <= 1e-12 * scale, "{i} {j}: {a} vs {b}");
            }
        }
        let scale = rows.iter().zip(&cells).map(|(r, c)| r.diagonal().abs() * c.measure).fold(0.0, f64::max);
        let all = vec![true; cloud.len()];
        prop_assert!(column_sum_check(&rows, &cells, &all) <= 1e-12 * scale);
    }

    #[test]
    fn conservative_rows_are_exact_on_affine_data(seed in 0u64..1_000_000, a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, e in 0.1f64..100.0) {
        let h = 0.25;
        let cloud = af_cloud(h, seed);
        let neigh = build_neighborhoods(&cloud, Metric::D2);
        let cells = build_cells(&cloud, &neigh).unwrap();
        let eta = vec![e; cloud.len()];
        let u: Vec<f64> = cloud.points().iter().map(|p| a + b * p.x + c * p.y).collect();
        for cell in cells.iter().filter(|c| c.boundary_face() == 0.0) {
            let r = diffusion_row_conservative(cell, &eta).unwrap().row;
            let umax = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(r.apply(&u).abs() <= 1e-11 * e / (h * h) * (1.0 + umax));
        }
    }

    #[test]
    fn smoothing_stays_within_neighbor_range(seed in 0u64..1_000_000, cycles in 1usize..3) {
        let cloud = af_cloud(0.3, seed);
        let neigh = build_neighborhoods(&cloud, Metric::D2);
        let v: Vec<f64> = cloud.points().iter().map(|p| if p.x + 0.3 * p.y > 0.1 { 5.0 } else { -2.0 }).collect();
        let once = smooth_field(&v, &cloud, &neigh, 1);
        for i in 0..cloud.len() {
            let (lo, hi) = neigh.stencil(i).iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &j| (l.min(v[j]), h.max(v[j])));
            prop_assert!(once[i] >= lo && once[i] <= hi);
        }
        let more = smooth_field(&v, &cloud, &neigh, cycles);
        prop_assert!(more.iter().all(|&x| (-2.0..=5.0).contains(&x)));
    }
}

#[test]
fn monomial_basis_orders_match() {
    let basis = MonomialBasis::default();
    let expect: Vec<(u32, u32)> = EXPONENTS.iter().map(|&(a, b)| (a as u32, b as u32)).collect();
    assert_eq!(basis.exponents(), expect.as_slice());
}
