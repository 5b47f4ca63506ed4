use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::assembly::{
    assemble_with_rows, strong_rows, AssemblyOptions, HybridSelection, LinearSystem, Method,
    NeumannMode, RowKind, RowKindCounts, SolverConfig, DEFAULT_EPSILON,
};
use crate::error::{Error, Result};
use crate::geometry::{build_cells, VoronoiCell};
use crate::pointcloud::{
    build_neighborhoods, generate_advancing_front, generate_uniform, level_radius, Metric,
    Neighborhood, PointCloud, Rect, DEFAULT_R_MAX, DEFAULT_R_MIN,
};
use crate::scalar::Real;
use crate::strongform::{DiffusivityField, StencilRow};

use super::{relative_l2_error, TestCase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CloudType {
    Uniform,
    #[default]
    Irregular,
}

impl CloudType {
    pub fn name(self) -> &'static str {
        match self {
            CloudType::Uniform => "uniform",
            CloudType::Irregular => "irregular",
        }
    }
}

impl fmt::Display for CloudType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CloudType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(CloudType::Uniform),
            "irregular" | "advancing_front" => Ok(CloudType::Irregular),
            _ => Err(Error::Parse(format!("unknown cloud type '{s}'"))),
        }
    }
}

/// Cloud, neighborhoods and Voronoi cells; independent of the problem and
/// reusable across solves.
#[derive(Debug, Clone)]
pub struct Geometry<T> {
    pub cloud: PointCloud<T>,
    pub neigh: Neighborhood,
    pub cells: Vec<VoronoiCell<T>>,
}

impl<T: Real> Geometry<T> {
    pub fn new(cloud: PointCloud<T>, metric: Metric) -> Result<Self> {
        let neigh = build_neighborhoods(&cloud, metric);
        let cells = build_cells(&cloud, &neigh)?;
        Ok(Self { cloud, neigh, cells })
    }

    /// Cloud of radius `h` on `[-1, 1]^2`.
    pub fn generate(cloud_type: CloudType, h: T, seed: u64, metric: Metric) -> Result<Self> {
        let domain = Rect::default();
        let cloud = match cloud_type {
            CloudType::Uniform => generate_uniform(h, &domain)?,
            CloudType::Irregular => generate_advancing_front(
                h,
                &domain,
                T::lit(DEFAULT_R_MIN),
                T::lit(DEFAULT_R_MAX),
                seed,
            )?,
        };
        Self::new(cloud, metric)
    }

    /// Cloud of refinement level `k`.
    pub fn level(cloud_type: CloudType, k: u32, seed: u64, metric: Metric) -> Result<Self> {
        let mut g = Self::generate(cloud_type, level_radius(k), seed, metric)?;
        g.cloud.info.level = Some(k);
        Ok(g)
    }

    pub fn volumes(&self) -> Vec<T> {
        self.cells.iter().map(|c| c.measure).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub method: Method,
    pub neumann: NeumannMode,
    pub smoothing_cycles: usize,
    /// Smooth and differentiate `log eta` instead of `eta`.
    pub scaled: bool,
    pub correction: bool,
    pub epsilon: f64,
    pub solver: SolverConfig,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            method: Method::Strong,
            neumann: NeumannMode::Strong,
            smoothing_cycles: 2,
            scaled: true,
            correction: true,
            epsilon: DEFAULT_EPSILON,
            // Large jumps leave a floating subdomain unresolved at any fixed
            // tolerance, so the pipeline iterates down to roundoff.
            solver: SolverConfig { to_floor: true, ..SolverConfig::default() },
        }
    }
}

impl Settings {
    /// Defaults for `method`: the strong method smooths twice, the hybrids
    /// work on the unsmoothed field.
    pub fn for_method(method: Method) -> Self {
        let smoothing_cycles = match method {
            Method::Strong => 2,
            Method::PosHybrid | Method::ConsHybrid => 0,
        };
        Self { method, smoothing_cycles, ..Self::default() }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_neumann(mut self, neumann: NeumannMode) -> Self {
        self.neumann = neumann;
        self
    }

    pub fn assembly_options(&self) -> AssemblyOptions {
        AssemblyOptions {
            method: self.method,
            neumann: self.neumann,
            epsilon: self.epsilon,
            correction: self.correction,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseSolution<T> {
    pub u_h: Vec<T>,
    pub u_exact: Vec<T>,
    pub error: T,
    pub iterations: usize,
    /// Iterations until the solver tolerance was first met.
    pub tol_iterations: usize,
    pub residual: f64,
    pub counts: RowKindCounts,
    pub row_kind: Vec<RowKind>,
    pub selection: HybridSelection,
}

/// A test case bound to a geometry, with the diffusivity field and strong
/// rows computed once for any number of assemblies.
#[derive(Debug, Clone)]
pub struct Prepared<'g, T> {
    pub geom: &'g Geometry<T>,
    pub case: TestCase<T>,
    /// The geometry's cloud with this case's boundary partition.
    pub cloud: PointCloud<T>,
    pub field: DiffusivityField<T>,
    pub rows: Vec<StencilRow<T>>,
    smoothing_cycles: usize,
    scaled: bool,
    correction: bool,
}

impl<'g, T: Real> Prepared<'g, T> {
    pub fn new(geom: &'g Geometry<T>, case: TestCase<T>, settings: &Settings) -> Result<Self> {
        case.validate()?;
        let cloud = case.partition(geom.cloud.clone());
        let eta = case.diffusivity_field(&cloud);
        let field = DiffusivityField::new(
            eta,
            &cloud,
            &geom.neigh,
            settings.smoothing_cycles,
            settings.scaled,
        )?;
        let rows = strong_rows(&cloud, &geom.neigh, &field, settings.correction)?;
        Ok(Self {
            geom,
            case,
            cloud,
            field,
            rows,
            smoothing_cycles: settings.smoothing_cycles,
            scaled: settings.scaled,
            correction: settings.correction,
        })
    }

    fn check(&self, settings: &Settings) -> Result<()> {
        if (settings.smoothing_cycles, settings.scaled, settings.correction)
            != (self.smoothing_cycles, self.scaled, self.correction)
        {
            return Err(Error::InvalidParameter(
                "settings differ from those the rows were prepared with".into(),
            ));
        }
        Ok(())
    }

    pub fn assemble(&self, settings: &Settings) -> Result<LinearSystem<T>> {
        self.check(settings)?;
        assemble_with_rows(
            &self.cloud,
            &self.geom.neigh,
            &self.geom.cells,
            &self.field,
            &self.case,
            &settings.assembly_options(),
            &self.rows,
        )
    }

    pub fn solve(&self, settings: &Settings) -> Result<CaseSolution<T>> {
        let system = self.assemble(settings)?;
        let sol = system.solve(&settings.solver)?;
        let u_exact = self
            .cloud
            .points()
            .iter()
            .map(|&p| self.case.exact_solution(p))
            .collect();
        let error = relative_l2_error(&sol.u, &self.case, &self.cloud, &self.geom.volumes())?;
        Ok(CaseSolution {
            u_h: sol.u,
            u_exact,
            error,
            iterations: sol.iterations,
            tol_iterations: sol.tol_iterations,
            residual: sol.residual,
            counts: system.counts(),
            row_kind: system.row_kind,
            selection: system.selection,
        })
    }
}

pub fn solve_case<T: Real>(
    geom: &Geometry<T>,
    case: TestCase<T>,
    settings: &Settings,
) -> Result<CaseSolution<T>> {
    Prepared::new(geom, case, settings)?.solve(settings)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub level: Option<u32>,
    pub h: f64,
    pub n: usize,
    pub error: Option<f64>,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    /// Reason the level produced no error value.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorReport {
    pub entries: Vec<LevelResult>,
}

impl ErrorReport {
    /// `log(e_{k-1} / e_k) / log(h_{k-1} / h_k)`; `None` for the first level
    /// and wherever an error is missing or zero.
    pub fn orders(&self) -> Vec<Option<f64>> {
        let mut out = vec![None; self.entries.len()];
        for k in 1..self.entries.len() {
            let (a, b) = (&self.entries[k - 1], &self.entries[k]);
            if let (Some(ea), Some(eb)) = (a.error, b.error) {
                if ea > 0.0 && eb > 0.0 && a.h != b.h {
                    let p = (ea / eb).ln() / (a.h / b.h).ln();
                    out[k] = p.is_finite().then_some(p);
                }
            }
        }
        out
    }

    pub fn last_order(&self) -> Option<f64> {
        self.orders().last().copied().flatten()
    }

    pub fn last_error(&self) -> Option<f64> {
        self.entries.last().and_then(|e| e.error)
    }

    /// Columns `h,N,error,order`; missing values are left empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["h", "N", "error", "order"])?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.10e}"));
        for (e, o) in self.entries.iter().zip(self.orders()) {
            w.write_record([format!("{:.10e}", e.h), e.n.to_string(), opt(e.error), opt(o)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Solves `case` on each geometry in turn. Failures are recorded per level
/// and do not stop the study.
pub fn convergence_study<T: Real>(
    case: TestCase<T>,
    settings: &Settings,
    geometries: &[&Geometry<T>],
) -> ErrorReport {
    let entries = geometries
        .iter()
        .map(|g| {
            let mut r = LevelResult {
                level: g.cloud.info.level,
                h: g.cloud.max_h().as_f64(),
                n: g.cloud.len(),
                error: None,
                iterations: None,
                residual: None,
                failure: None,
            };
            match solve_case(g, case, settings) {
                Ok(s) => {
                    r.error = Some(s.error.as_f64());
                    r.iterations = Some(s.iterations);
                    r.residual = Some(s.residual);
                }
                Err(e) => r.failure = Some(e.to_string()),
            }
            r
        })
        .collect();
    ErrorReport { entries }
}

/// Generates one cloud per level and runs [`convergence_study`].
pub fn convergence_study_levels<T: Real>(
    case: TestCase<T>,
    settings: &Settings,
    cloud_type: CloudType,
    levels: &[u32],
    seed: u64,
    metric: Metric,
) -> ErrorReport {
    let mut entries = Vec::with_capacity(levels.len());
    for &k in levels {
        match Geometry::<T>::level(cloud_type, k, seed, metric) {
            Ok(g) => entries.extend(convergence_study(case, settings, &[&g]).entries),
            Err(e) => entries.push(LevelResult {
                level: Some(k),
                h: level_radius::<f64>(k),
                n: 0,
                error: None,
                iterations: None,
                residual: None,
                failure: Some(e.to_string()),
            }),
        }
    }
    ErrorReport { entries }
}
