//! Global system assembly, hybrid node selection and the iterative solver.

mod solver;
mod sparse;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

pub use solver::{bicgstab2, ilu0, relative_residual, Ilu0, Preconditioner, SolveResult, SolverConfig};
pub use sparse::CsrMatrix;

use crate::conservative::{diffusion_row_conservative, neumann_row_conservative};
use crate::error::{Error, Result};
use crate::geometry::VoronoiCell;
use crate::pointcloud::io::fmt_full;
use crate::pointcloud::{BoundaryKind, Neighborhood, PointCloud};
use crate::problems::Problem;
use crate::scalar::Real;
use crate::strongform::{
    classical_operator, null_space_correction, null_space_vector, sigma, DiffusivityField,
    Functional, LocalFit, StencilRow,
};

/// Switch tolerance for the diagonal dominance error.
pub const DEFAULT_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Method {
    #[default]
    Strong,
    /// Conservative rows where the strong row is not diagonally dominant.
    PosHybrid,
    /// Conservative rows on those points and their interior neighbors.
    ConsHybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NeumannMode {
    #[default]
    Strong,
    ConservativeNearSwitch,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Strong, Method::PosHybrid, Method::ConsHybrid];

    pub fn name(self) -> &'static str {
        match self {
            Method::Strong => "strong",
            Method::PosHybrid => "pos_hybrid",
            Method::ConsHybrid => "cons_hybrid",
        }
    }
}

impl NeumannMode {
    pub fn name(self) -> &'static str {
        match self {
            NeumannMode::Strong => "strong",
            NeumannMode::ConservativeNearSwitch => "conservative_near_switch",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for NeumannMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown method '{s}'")))
    }
}

impl FromStr for NeumannMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strong" => Ok(NeumannMode::Strong),
            "conservative_near_switch" | "conservative" => Ok(NeumannMode::ConservativeNearSwitch),
            _ => Err(Error::Parse(format!("unknown neumann mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowKind {
    InteriorStrong,
    InteriorConservative,
    Dirichlet,
    NeumannStrong,
    NeumannConservative,
}

impl RowKind {
    pub fn name(self) -> &'static str {
        match self {
            RowKind::InteriorStrong => "interior_strong",
            RowKind::InteriorConservative => "interior_conservative",
            RowKind::Dirichlet => "dirichlet",
            RowKind::NeumannStrong => "neumann_strong",
            RowKind::NeumannConservative => "neumann_conservative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RowKindCounts {
    pub interior_strong: usize,
    pub interior_conservative: usize,
    pub dirichlet: usize,
    pub neumann_strong: usize,
    pub neumann_conservative: usize,
}

/// Interior points handed to the conservative scheme.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HybridSelection {
    /// `sigma_i > epsilon`.
    pub sigma0: Vec<usize>,
    /// Interior neighbors of `sigma0` outside it.
    pub sigma1: Vec<usize>,
    /// Union of both, sorted.
    pub conservative: Vec<usize>,
    pub epsilon: f64,
}

/// Selects `I_sigma0` from the corrected strong rows of all interior points
/// and widens it by one neighborhood to `I_c`.
pub fn select_hybrid_nodes<T: Real>(
    rows: &[StencilRow<T>],
    neigh: &Neighborhood,
    epsilon: f64,
) -> HybridSelection {
    let n = neigh.stencils().len();
    let eps = T::lit(epsilon);
    let mut interior = vec![false; n];
    let mut flagged = vec![false; n];
    for r in rows {
        interior[r.center] = true;
        flagged[r.center] = sigma(r) > eps;
    }
    let sigma0: Vec<usize> = (0..n).filter(|&i| flagged[i]).collect();
    let sigma1: Vec<usize> = (0..n)
        .filter(|&i| interior[i] && !flagged[i] && neigh.stencil(i).iter().any(|&j| flagged[j]))
        .collect();
    let mut conservative: Vec<usize> = sigma0.iter().chain(&sigma1).copied().collect();
    conservative.sort_unstable();
    HybridSelection {
        sigma0,
        sigma1,
        conservative,
        epsilon,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    pub method: Method,
    pub neumann: NeumannMode,
    pub epsilon: f64,
    /// Apply the null-space correction to strong rows.
    pub correction: bool,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            method: Method::Strong,
            neumann: NeumannMode::Strong,
            epsilon: DEFAULT_EPSILON,
            correction: true,
        }
    }
}

/// `G u = f` with one row per point.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem<T> {
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
    pub row_kind: Vec<RowKind>,
    pub selection: HybridSelection,
}

impl<T: Real> LinearSystem<T> {
    pub fn counts(&self) -> RowKindCounts {
        let mut c = RowKindCounts::default();
        for k in &self.row_kind {
            match k {
                RowKind::InteriorStrong => c.interior_strong += 1,
                RowKind::InteriorConservative => c.interior_conservative += 1,
                RowKind::Dirichlet => c.dirichlet += 1,
                RowKind::NeumannStrong => c.neumann_strong += 1,
                RowKind::NeumannConservative => c.neumann_conservative += 1,
            }
        }
        c
    }

    /// Matrix in `i j value` lines and the right-hand side one value per line.
    pub fn write<W1: Write, W2: Write>(&self, matrix: W1, mut rhs: W2) -> Result<()> {
        self.matrix.write_coo(matrix)?;
        for &v in &self.rhs {
            writeln!(rhs, "{}", fmt_full(v))?;
        }
        Ok(())
    }

    /// Rows divided by their largest magnitude entry.
    pub fn equilibrated(&self) -> (CsrMatrix<T>, Vec<T>) {
        let n = self.matrix.n_rows();
        let mut rows = Vec::with_capacity(n);
        let mut rhs = Vec::with_capacity(n);
        for i in 0..n {
            let (cols, vals) = self.matrix.row(i);
            let m = vals.iter().fold(T::zero(), |a, v| a.max(v.abs()));
            let s = if m > T::zero() { m.recip() } else { T::one() };
            rows.push(cols.iter().zip(vals).map(|(&j, &v)| (j, v * s)).collect());
            rhs.push(self.rhs[i] * s);
        }
        let matrix = CsrMatrix::from_rows(self.matrix.n_cols(), rows).expect("same pattern");
        (matrix, rhs)
    }

    /// Solves the row-equilibrated system; the reported residual refers to
    /// it. Rows of conservative and strong operators scale with the local
    /// diffusivity, so the unscaled residual has a roundoff floor near
    /// `eps max(eta) / h^2` that large jumps push far above any useful
    /// tolerance.
    pub fn solve(&self, config: &SolverConfig) -> Result<SolveResult<T>> {
        let (g, f) = self.equilibrated();
        bicgstab2(&g, &f, config)
    }
}

/// Corrected (or plain) classical rows of all interior points, by index.
pub fn strong_rows<T: Real>(
    cloud: &PointCloud<T>,
    neigh: &Neighborhood,
    field: &DiffusivityField<T>,
    correction: bool,
) -> Result<Vec<StencilRow<T>>> {
    cloud
        .interior_indices()
        .into_iter()
        .map(|i| classical_operator(cloud, neigh, i, field, correction))
        .collect()
}

/// Directional derivative `n . grad` at a boundary point. The one-sided
/// stencil can leave the plain row with a tiny or negative diagonal; the
/// null-space correction restores dominance without touching consistency.
pub fn normal_derivative_row<T: Real>(
    cloud: &PointCloud<T>,
    neigh: &Neighborhood,
    i: usize,
    correction: bool,
) -> Result<StencilRow<T>> {
    let n = cloud
        .kind(i)
        .normal()
        .ok_or(Error::MisclassifiedBoundary { point: i })?;
    let fit = LocalFit::new(cloud, neigh, i)?;
    let gx = fit.functional(Functional::Dx);
    let gy = fit.functional(Functional::Dy);
    let vals = gx.vals.iter().zip(&gy.vals).map(|(&a, &b)| n.x * a + n.y * b).collect();
    let row = StencilRow {
        center: i,
        cols: gx.cols,
        vals,
    };
    if !correction {
        return Ok(row);
    }
    let xi = null_space_vector(cloud, neigh, i)?;
    Ok(null_space_correction(&row, &xi))
}

pub fn assemble<T: Real, P: Problem<T> + ?Sized>(
    cloud: &PointCloud<T>,
    neigh: &Neighborhood,
    cells: &[VoronoiCell<T>],
    field: &DiffusivityField<T>,
    problem: &P,
    options: &AssemblyOptions,
) -> Result<LinearSystem<T>> {
    let rows = strong_rows(cloud, neigh, field, options.correction)?;
    assemble_with_rows(cloud, neigh, cells, field, problem, options, &rows)
}

/// [`assemble`] with the interior strong rows supplied by the caller, as
/// returned by [`strong_rows`] for the same field and correction flag.
pub fn assemble_with_rows<T: Real, P: Problem<T> + ?Sized>(
    cloud: &PointCloud<T>,
    neigh: &Neighborhood,
    cells: &[VoronoiCell<T>],
    field: &DiffusivityField<T>,
    problem: &P,
    options: &AssemblyOptions,
    rows: &[StencilRow<T>],
) -> Result<LinearSystem<T>> {
    let n = cloud.len();
    if neigh.stencils().len() != n || cells.len() != n || field.len() != n {
        return Err(Error::Dimension("assembly inputs disagree in size".into()));
    }
    let selection = match options.method {
        Method::Strong => HybridSelection {
            epsilon: options.epsilon,
            ..Default::default()
        },
        _ => select_hybrid_nodes(rows, neigh, options.epsilon),
    };
    let switched = match options.method {
        Method::Strong => &[][..],
        Method::PosHybrid => &selection.sigma0[..],
        Method::ConsHybrid => &selection.conservative[..],
    };
    let mut is_switched = vec![false; n];
    let mut near_switch = vec![false; n];
    for &i in switched {
        is_switched[i] = true;
        for &j in neigh.stencil(i) {
            near_switch[j] = true;
        }
    }

    let mut strong_at = vec![usize::MAX; n];
    for (k, r) in rows.iter().enumerate() {
        strong_at[r.center] = k;
    }

    let mut entries: Vec<Vec<(usize, T)>> = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    let mut row_kind = Vec::with_capacity(n);
    let negated = |r: &StencilRow<T>| r.cols.iter().zip(&r.vals).map(|(&j, &v)| (j, -v)).collect();
    for i in 0..n {
        let p = cloud.point(i);
        match cloud.kind(i) {
            BoundaryKind::Interior => {
                if is_switched[i] {
                    let r = diffusion_row_conservative(&cells[i], &field.eta)?;
                    entries.push(negated(&r.row));
                    row_kind.push(RowKind::InteriorConservative);
                } else {
                    let k = strong_at[i];
                    if k == usize::MAX {
                        return Err(Error::Dimension(format!("no strong row for point {i}")));
                    }
                    entries.push(negated(&rows[k]));
                    row_kind.push(RowKind::InteriorStrong);
                }
                rhs.push(problem.source(p));
            }
            BoundaryKind::Dirichlet { .. } => {
                entries.push(vec![(i, T::one())]);
                rhs.push(problem.dirichlet(p));
                row_kind.push(RowKind::Dirichlet);
            }
            BoundaryKind::Neumann { normal } => {
                if options.neumann == NeumannMode::ConservativeNearSwitch && near_switch[i] {
                    let r = neumann_row_conservative(&cells[i], &field.eta, |s| {
                        problem.neumann(p, s.outward_normal())
                    })?;
                    entries.push(negated(&r.row));
                    rhs.push(problem.source(p) - r.rhs_shift);
                    row_kind.push(RowKind::NeumannConservative);
                } else {
                    let r = normal_derivative_row(cloud, neigh, i, options.correction)?;
                    entries.push(r.cols.iter().copied().zip(r.vals).collect());
                    rhs.push(problem.neumann(p, normal));
                    row_kind.push(RowKind::NeumannStrong);
                }
            }
        }
    }
    Ok(LinearSystem {
        matrix: CsrMatrix::from_rows(n, entries)?,
        rhs,
        row_kind,
        selection,
    })
}
