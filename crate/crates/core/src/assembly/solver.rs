use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::sparse::CsrMatrix;

/// Incomplete LU factorization without fill, stored on the pattern of the
/// input: unit lower factor below the diagonal, upper factor on and above.
#[derive(Debug, Clone)]
pub struct Ilu0<T> {
    lu: CsrMatrix<T>,
    diag: Vec<usize>,
}

pub fn ilu0<T: Real>(g: &CsrMatrix<T>) -> Result<Ilu0<T>> {
    let n = g.n_rows();
    if n != g.n_cols() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", n, g.n_cols())));
    }
    let row_ptr = g.row_ptr().to_vec();
    let col = g.col_idx().to_vec();
    let mut val = g.values().to_vec();
    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        let r = &col[row_ptr[i]..row_ptr[i + 1]];
        match r.binary_search(&i) {
            Ok(k) => diag.push(row_ptr[i] + k),
            Err(_) => return Err(Error::ZeroPivot { row: i }),
        }
    }
    const NONE: usize = usize::MAX;
    let mut pos = vec![NONE; n];
    for i in 0..n {
        for k in row_ptr[i]..row_ptr[i + 1] {
            pos[col[k]] = k;
        }
        for k in row_ptr[i]..diag[i] {
            let c = col[k];
            let m = val[k] / val[diag[c]];
            val[k] = m;
            for kk in diag[c] + 1..row_ptr[c + 1] {
                let p = pos[col[kk]];
                if p != NONE {
                    let sub = m * val[kk];
                    val[p] -= sub;
                }
            }
        }
        let d = val[diag[i]];
        if d == T::zero() || !d.is_finite() {
            return Err(Error::ZeroPivot { row: i });
        }
        for k in row_ptr[i]..row_ptr[i + 1] {
            pos[col[k]] = NONE;
        }
    }
    let lu = CsrMatrix::from_rows(
        n,
        (0..n)
            .map(|i| (row_ptr[i]..row_ptr[i + 1]).map(|k| (col[k], val[k])).collect())
            .collect(),
    )?;
    Ok(Ilu0 { lu, diag })
}

impl<T: Real> Ilu0<T> {
    /// Combined factors: `L - I + U` on the original pattern.
    pub fn factors(&self) -> &CsrMatrix<T> {
        &self.lu
    }

    /// Overwrites `x` with `(LU)^{-1} x`.
    pub fn apply_in_place(&self, x: &mut [T]) {
        let (rp, ci, v) = (self.lu.row_ptr(), self.lu.col_idx(), self.lu.values());
        for i in 0..x.len() {
            let mut s = x[i];
            for k in rp[i]..self.diag[i] {
                s -= v[k] * x[ci[k]];
            }
            x[i] = s;
        }
        for i in (0..x.len()).rev() {
            let mut s = x[i];
            for k in self.diag[i] + 1..rp[i + 1] {
                s -= v[k] * x[ci[k]];
            }
            x[i] = s / v[self.diag[i]];
        }
    }

    pub fn apply(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.apply_in_place(&mut x);
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    None,
    #[default]
    Ilu0,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    /// `None` means `10 * N`.
    pub maxiter: Option<usize>,
    pub preconditioner: Preconditioner,
    /// Keep iterating past `tol` until the true residual stops decreasing.
    /// The solve still fails unless `tol` was reached.
    pub to_floor: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            maxiter: None,
            preconditioner: Preconditioner::Ilu0,
            to_floor: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T> {
    pub u: Vec<T>,
    /// Completed BiCGstab(2) cycles, partial final cycle included.
    pub iterations: usize,
    /// Cycles until the recurrence residual first reached `tol`.
    pub tol_iterations: usize,
    /// `|G u - f| / |f|`, recomputed from the returned `u`.
    pub residual: f64,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

fn axpy<T: Real>(y: &mut [T], a: T, x: &[T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn relative_residual<T: Real>(g: &CsrMatrix<T>, u: &[T], f: &[T]) -> f64 {
    let gu = g.matvec(u);
    let r: Vec<T> = f.iter().zip(&gu).map(|(&a, &b)| a - b).collect();
    (norm(&r) / norm(f)).as_f64()
}

const L: usize = 2;

/// Restarts with a fresh shadow residual before a breakdown is reported.
const MAX_BREAKDOWN_RESTARTS: usize = 3;

/// Seeded random shadow residual. The common choice `r0` is orthogonal to
/// every interior residual once the unit Dirichlet rows are satisfied.
fn shadow_vector<T: Real>(n: usize, attempt: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ attempt);
    (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect()
}

/// Iterations between true-residual checkpoints. The solve is abandoned when
/// a window or a restart fails to halve the true residual.
const STALL_WINDOW: usize = 500;

enum Outcome {
    Converged,
    Breakdown,
    Exhausted,
}

/// BiCGstab(2) on `G M^{-1} y = f`, `u = M^{-1} y`, with zero initial guess.
/// Stops when the recurrence residual drops to `tol |f|`; the true residual
/// is then recomputed and the iteration restarted from the current iterate
/// if it has drifted above the tolerance. With `to_floor` the target is
/// machine precision and the best iterate is returned once progress stalls.
pub fn bicgstab2<T: Real>(
    g: &CsrMatrix<T>,
    f: &[T],
    config: &SolverConfig,
) -> Result<SolveResult<T>> {
    let n = g.n_rows();
    if n != g.n_cols() || f.len() != n {
        return Err(Error::Dimension(format!(
            "system {}x{} with rhs of length {}",
            n,
            g.n_cols(),
            f.len()
        )));
    }
    if !(config.tol > 0.0) {
        return Err(Error::InvalidParameter("solver tolerance must be positive".into()));
    }
    let maxiter = config.maxiter.unwrap_or(10 * n);
    let fnorm = norm(f);
    if fnorm == T::zero() {
        return Ok(SolveResult {
            u: vec![T::zero(); n],
            iterations: 0,
            tol_iterations: 0,
            residual: 0.0,
        });
    }
    let prec = match config.preconditioner {
        Preconditioner::Ilu0 => Some(ilu0(g)?),
        Preconditioner::None => None,
    };
    let accept = T::lit(config.tol) * fnorm;
    let target = if config.to_floor { T::epsilon() * fnorm } else { accept };
    let mut u = vec![T::zero(); n];
    let mut best: Option<(Vec<T>, T)> = None;
    let mut iterations = 0;
    let mut tol_iterations = None;
    let mut breakdowns = 0;
    let mut checkpoint: Option<T> = None;
    let done = |u: Vec<T>, res: T, iterations: usize, tol_iterations: Option<usize>| SolveResult {
        u,
        iterations,
        tol_iterations: tol_iterations.unwrap_or(iterations),
        residual: (res / fnorm).as_f64(),
    };
    loop {
        // Each restart is a refinement step; an accurate residual lets it
        // improve on the roundoff floor of the recurrence.
        let r0 = g.residual_compensated(&u, f);
        let res = norm(&r0);
        if res <= target {
            return Ok(done(u, res, iterations, tol_iterations));
        }
        if best.as_ref().map_or(true, |(_, b)| res < *b) {
            best = Some((u.clone(), res));
        }
        let stalled = checkpoint.take().is_some_and(|prev| res > prev * T::lit(0.5));
        if stalled || iterations >= maxiter {
            let (bu, bres) = best.take().unwrap_or((u, res));
            if bres <= accept {
                return Ok(done(bu, bres, iterations, tol_iterations));
            }
            let residual = (bres / fnorm).as_f64();
            return Err(if stalled {
                Error::Stagnation { iterations, residual }
            } else {
                Error::MaxIterations { iterations, residual }
            });
        }
        let shadow = shadow_vector(n, breakdowns as u64);
        let budget = (maxiter - iterations).min(STALL_WINDOW);
        let run = cycles(g, prec.as_ref(), r0, &shadow, [target, accept], budget);
        if tol_iterations.is_none() {
            tol_iterations = run.first_hit.map(|it| iterations + it);
        }
        iterations += run.used;
        let mut dx = run.x;
        if let Some(p) = &prec {
            p.apply_in_place(&mut dx);
        }
        axpy(&mut u, T::one(), &dx);
        match run.outcome {
            Outcome::Converged | Outcome::Exhausted => checkpoint = Some(res),
            Outcome::Breakdown => {
                breakdowns += 1;
                if breakdowns > MAX_BREAKDOWN_RESTARTS {
                    if let Some((bu, bres)) = best.take().filter(|(_, b)| *b <= accept) {
                        return Ok(done(bu, bres, iterations, tol_iterations));
                    }
                    return Err(Error::Breakdown { iteration: iterations });
                }
            }
        }
    }
}

struct Run<T> {
    x: Vec<T>,
    outcome: Outcome,
    used: usize,
    first_hit: Option<usize>,
}

/// Runs the recurrence for `G M^{-1} y = r0` from `y = 0`.
fn cycles<T: Real>(
    g: &CsrMatrix<T>,
    prec: Option<&Ilu0<T>>,
    r_init: Vec<T>,
    rtilde: &[T],
    [target, accept]: [T; 2],
    budget: usize,
) -> Run<T> {
    let n = r_init.len();
    let mut tmp = vec![T::zero(); n];
    let mut op = |x: &[T], out: &mut Vec<T>| {
        tmp.copy_from_slice(x);
        if let Some(p) = prec {
            p.apply_in_place(&mut tmp);
        }
        g.matvec_into(&tmp, out);
    };
    let mut x = vec![T::zero(); n];
    let mut r: Vec<Vec<T>> = vec![r_init; L + 1];
    for v in r.iter_mut().skip(1) {
        v.fill(T::zero());
    }
    let mut uu: Vec<Vec<T>> = vec![vec![T::zero(); n]; L + 1];
    let (mut rho0, mut alpha, mut omega) = (T::one(), T::zero(), T::one());
    let mut out = vec![T::zero(); n];
    let broken = |v: T| v == T::zero() || !v.is_finite();
    let mut first_hit = None;
    let mut check = |r0: &[T], it: usize| {
        let res = norm(r0);
        if res <= accept && first_hit.is_none() {
            first_hit = Some(it);
        }
        res <= target
    };

    for it in 1..=budget {
        rho0 = -omega * rho0;
        for j in 0..L {
            let rho1 = dot(&r[j], rtilde);
            if broken(rho0) {
                return Run { x, outcome: Outcome::Breakdown, used: it, first_hit };
            }
            let beta = alpha * rho1 / rho0;
            rho0 = rho1;
            for i in 0..=j {
                for k in 0..n {
                    uu[i][k] = r[i][k] - beta * uu[i][k];
                }
            }
            op(&uu[j], &mut out);
            std::mem::swap(&mut uu[j + 1], &mut out);
            let gamma = dot(&uu[j + 1], rtilde);
            if broken(gamma) {
                return Run { x, outcome: Outcome::Breakdown, used: it, first_hit };
            }
            alpha = rho0 / gamma;
            for i in 0..=j {
                axpy(&mut r[i], -alpha, &uu[i + 1]);
            }
            op(&r[j], &mut out);
            std::mem::swap(&mut r[j + 1], &mut out);
            axpy(&mut x, alpha, &uu[0]);
            if check(&r[0], it) {
                return Run { x, outcome: Outcome::Converged, used: it, first_hit };
            }
        }

        // Minimal residual part; indices 1..=L, tau[j][i] for j < i.
        let mut tau = [[T::zero(); L + 1]; L + 1];
        let mut sigma = [T::zero(); L + 1];
        let mut gp = [T::zero(); L + 1];
        for j in 1..=L {
            for i in 1..j {
                let t = dot(&r[j], &r[i]) / sigma[i];
                tau[i][j] = t;
                let (lo, hi) = r.split_at_mut(j);
                axpy(&mut hi[0], -t, &lo[i]);
            }
            sigma[j] = dot(&r[j], &r[j]);
            if broken(sigma[j]) {
                return Run { x, outcome: Outcome::Breakdown, used: it, first_hit };
            }
            gp[j] = dot(&r[0], &r[j]) / sigma[j];
        }
        let mut gm = [T::zero(); L + 1];
        gm[L] = gp[L];
        omega = gm[L];
        for j in (1..L).rev() {
            let mut s = gp[j];
            for i in j + 1..=L {
                s -= tau[j][i] * gm[i];
            }
            gm[j] = s;
        }
        let mut gpp = [T::zero(); L + 1];
        for j in 1..L {
            let mut s = gm[j + 1];
            for i in j + 1..L {
                s += tau[j][i] * gm[i + 1];
            }
            gpp[j] = s;
        }
        axpy(&mut x, gm[1], &r[0]);
        {
            let (lo, hi) = r.split_at_mut(L);
            axpy(&mut lo[0], -gp[L], &hi[0]);
            let (ulo, uhi) = uu.split_at_mut(L);
            axpy(&mut ulo[0], -gm[L], &uhi[0]);
        }
        for j in 1..L {
            let (ulo, uhi) = uu.split_at_mut(j);
            axpy(&mut ulo[0], -gm[j], &uhi[0]);
            axpy(&mut x, gpp[j], &r[j]);
            let (lo, hi) = r.split_at_mut(j);
            axpy(&mut lo[0], -gp[j], &hi[0]);
        }
        if broken(omega) {
            return Run { x, outcome: Outcome::Breakdown, used: it, first_hit };
        }
        if check(&r[0], it) {
            return Run { x, outcome: Outcome::Converged, used: it, first_hit };
        }
    }
    Run { x, outcome: Outcome::Exhausted, used: budget, first_hit }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseLu;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dominant(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                if i != j && rng.gen_bool(0.2) {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    a[i * n + j] = v;
                    s += v.abs();
                }
            }
            a[i * n + i] = s + rng.gen_range(0.5..2.0);
        }
        let b = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        (a, b)
    }

    #[test]
    fn ilu_identity() {
        let id = CsrMatrix::<f64>::identity(4);
        let f = ilu0(&id).unwrap();
        assert_eq!(f.factors(), &id);
    }

    #[test]
    fn ilu_full_pattern_is_exact_lu() {
        let a = [4.0, 1.0, 2.0, 2.0, 5.0, 1.0, 1.0, 3.0, 6.0];
        let m = CsrMatrix::from_dense(&a, 3, 3);
        let p: Ilu0<f64> = ilu0(&m).unwrap();
        let lu = DenseLu::factor(a.to_vec(), 3).unwrap();
        let b = [1.0, -2.0, 0.5];
        for (x, y) in p.apply(&b).iter().zip(lu.solve(&b)) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn ilu_tridiagonal_is_exact() {
        let n = 8;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 2.0;
            if i > 0 {
                a[i * n + i - 1] = -1.0;
                a[(i - 1) * n + i] = -1.0;
            }
        }
        let m = CsrMatrix::from_dense(&a, n, n);
        let p = ilu0(&m).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 1.0).collect();
        let x = p.apply(&b);
        assert!(relative_residual(&m, &x, &b) < 1e-14);
    }

    #[test]
    fn ilu_zero_pivot() {
        let m = CsrMatrix::from_dense(&[0.0, 1.0, 1.0, 0.0], 2, 2);
        assert!(matches!(ilu0(&m), Err(Error::ZeroPivot { row: 0 })));
        let m = CsrMatrix::from_dense(&[1.0, 1.0, 1.0, 1.0], 2, 2);
        assert!(matches!(ilu0(&m), Err(Error::ZeroPivot { row: 1 })));
    }

    #[test]
    fn identity_system() {
        let id = CsrMatrix::<f64>::identity(5);
        let f = vec![1.0, -2.0, 3.0, 0.0, 0.5];
        for preconditioner in [Preconditioner::None, Preconditioner::Ilu0] {
            let cfg = SolverConfig { preconditioner, ..Default::default() };
            let s = bicgstab2(&id, &f, &cfg).unwrap();
            assert!(s.iterations <= 1);
            for (a, b) in s.u.iter().zip(&f) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_rhs() {
        let (a, _) = random_dominant(10, 1);
        let m = CsrMatrix::from_dense(&a, 10, 10);
        let s = bicgstab2(&m, &[0.0; 10], &SolverConfig::default()).unwrap();
        assert_eq!(s.iterations, 0);
        assert!(s.u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dominant_systems_match_direct_solve() {
        for seed in 0..5 {
            let n = 50;
            let (a, b) = random_dominant(n, seed);
            let m = CsrMatrix::from_dense(&a, n, n);
            let exact = DenseLu::factor(a.clone(), n).unwrap().solve(&b);
            for preconditioner in [Preconditioner::None, Preconditioner::Ilu0] {
                let cfg = SolverConfig { preconditioner, ..Default::default() };
                let s = bicgstab2(&m, &b, &cfg).unwrap();
                assert!(s.residual <= 1e-10);
                assert!((s.residual - relative_residual(&m, &s.u, &b)).abs() < 1e-14);
                for (x, y) in s.u.iter().zip(&exact) {
                    assert!((x - y).abs() < 1e-8, "seed {seed}");
                }
            }
        }
    }

    #[test]
    fn nonsymmetric_convection_system() {
        // Upwinded 1D convection-diffusion, strongly nonsymmetric.
        let n = 200;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 3.0;
            if i > 0 {
                a[i * n + i - 1] = -2.5;
            }
            if i + 1 < n {
                a[i * n + i + 1] = -0.5;
            }
        }
        let m = CsrMatrix::from_dense(&a, n, n);
        let b = vec![1.0; n];
        let cfg = SolverConfig { preconditioner: Preconditioner::None, ..Default::default() };
        let s = bicgstab2(&m, &b, &cfg).unwrap();
        assert!(relative_residual(&m, &s.u, &b) <= 1e-10);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let (a, b) = random_dominant(40, 3);
        let m = CsrMatrix::from_dense(&a, 40, 40);
        let cfg = SolverConfig {
            maxiter: Some(1),
            tol: 1e-15,
            preconditioner: Preconditioner::None,
            to_floor: false,
        };
        assert!(matches!(bicgstab2(&m, &b, &cfg), Err(Error::MaxIterations { .. })));
    }

    #[test]
    fn unreachable_tolerance_stagnates() {
        let (a, b) = random_dominant(200, 4);
        let m = CsrMatrix::from_dense(&a, 200, 200);
        let cfg = SolverConfig { tol: 1e-30, ..SolverConfig::default() };
        match bicgstab2(&m, &b, &cfg) {
            Err(Error::Stagnation { iterations, residual }) => {
                assert!(iterations < 2000);
                assert!(residual < 1e-13);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn floor_mode_goes_past_tolerance() {
        let (a, b) = random_dominant(200, 5);
        let m = CsrMatrix::from_dense(&a, 200, 200);
        let plain = bicgstab2(&m, &b, &SolverConfig::default()).unwrap();
        let cfg = SolverConfig { to_floor: true, ..SolverConfig::default() };
        let floor = bicgstab2(&m, &b, &cfg).unwrap();
        assert!(floor.residual < 1e-14, "{}", floor.residual);
        assert!(floor.residual <= plain.residual);
        assert!(floor.tol_iterations <= floor.iterations);
        assert!(floor.tol_iterations >= plain.iterations.saturating_sub(1));
    }
}
