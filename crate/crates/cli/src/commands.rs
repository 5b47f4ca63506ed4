use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::Path;
use std::time::Instant;

use gfdm::assembly::Method;
use gfdm::pointcloud::io::write_cloud;
use gfdm::problems::{
    convergence_study, flux_error_profile, node_fraction_stats, CaseId, ErrorReport,
    Geometry, Prepared,
};

use crate::config::{with_jump, RawConfig, Resolution, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(io::Error),
    Numerical(gfdm::Error),
    /// Some solves of a study failed; their diagnostics were already printed.
    Failed(usize),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Numerical(e) => write!(f, "{e}"),
            CliError::Failed(n) => write!(f, "{n} solve(s) failed"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<gfdm::Error> for CliError {
    fn from(e: gfdm::Error) -> Self {
        match e {
            gfdm::Error::Io(e) => CliError::Io(e),
            e => CliError::Numerical(e),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

type Res<T> = Result<T, CliError>;

fn create(dir: &Path, name: &str) -> Res<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn prepare_out(cfg: &RunConfig) -> Res<()> {
    fs::create_dir_all(&cfg.out).map_err(|e| {
        CliError::Usage(format!("cannot create output directory {}: {e}", cfg.out.display()))
    })?;
    fs::write(cfg.out.join("config.txt"), cfg.render())?;
    Ok(())
}

fn geometry(cfg: &RunConfig, res: Resolution) -> Res<Geometry<f64>> {
    let g = match res {
        Resolution::Level(k) => Geometry::level(cfg.cloud, k, cfg.seed, cfg.metric),
        Resolution::Radius(h) => Geometry::generate(cfg.cloud, h, cfg.seed, cfg.metric),
    };
    Ok(g?)
}

fn e(v: f64) -> String {
    format!("{v:.10e}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), e)
}

pub fn run(cfg: &RunConfig, raw: &RawConfig) -> Res<()> {
    prepare_out(cfg)?;
    let geom = geometry(cfg, cfg.resolution)?;
    let method = cfg.methods[0];
    let settings = cfg.settings_for(raw, method);
    let prep = Prepared::new(&geom, cfg.case, &settings)?;
    write_cloud(&prep.cloud, create(&cfg.out, "cloud.csv")?)?;
    let sol = prep.solve(&settings)?;

    let mut w = csv::Writer::from_writer(create(&cfg.out, "solution.csv")?);
    w.write_record(["x", "y", "u_h", "u_exact", "kind"])?;
    for (i, p) in prep.cloud.points().iter().enumerate() {
        w.write_record([e(p.x), e(p.y), e(sol.u_h[i]), e(sol.u_exact[i]), sol.row_kind[i].name().into()])?;
    }
    w.flush()?;

    let c = sol.counts;
    let mut w = csv::Writer::from_writer(create(&cfg.out, "report.csv")?);
    w.write_record([
        "case",
        "method",
        "N",
        "h",
        "error",
        "iterations",
        "tol_iterations",
        "residual",
        "interior_strong",
        "interior_conservative",
        "dirichlet",
        "neumann_strong",
        "neumann_conservative",
        "sigma0",
        "min_u_h",
    ])?;
    let min_u = sol.u_h.iter().copied().fold(f64::INFINITY, f64::min);
    w.write_record([
        cfg.case.id().name().to_string(),
        method.name().to_string(),
        prep.cloud.len().to_string(),
        e(prep.cloud.max_h()),
        e(sol.error),
        sol.iterations.to_string(),
        sol.tol_iterations.to_string(),
        e(sol.residual),
        c.interior_strong.to_string(),
        c.interior_conservative.to_string(),
        c.dirichlet.to_string(),
        c.neumann_strong.to_string(),
        c.neumann_conservative.to_string(),
        sol.selection.sigma0.len().to_string(),
        e(min_u),
    ])?;
    w.flush()?;

    if matches!(cfg.case.id(), CaseId::TwoStrip | CaseId::ThreeStrip) {
        let profile = flux_error_profile(&sol.u_h, &cfg.case, &prep.cloud, &geom.neigh)?;
        let mut w = csv::Writer::from_writer(create(&cfg.out, "flux.csv")?);
        w.write_record(["point", "x", "delta_q"])?;
        for s in &profile.samples {
            w.write_record([s.point.to_string(), e(s.x), opt(s.delta_q)])?;
        }
        w.flush()?;
    }
    eprintln!(
        "{} {}: N = {}, error = {:.3e}, iterations = {}",
        cfg.case.id(),
        method,
        prep.cloud.len(),
        sol.error,
        sol.iterations
    );
    Ok(())
}

pub fn convergence(cfg: &RunConfig, raw: &RawConfig) -> Res<()> {
    prepare_out(cfg)?;
    let geoms = cfg
        .levels
        .iter()
        .map(|&k| geometry(cfg, Resolution::Level(k)))
        .collect::<Res<Vec<_>>>()?;
    let refs: Vec<_> = geoms.iter().collect();
    let mut failures = Vec::new();

    let mut all = csv::Writer::from_writer(create(&cfg.out, "convergence.csv")?);
    all.write_record(["method", "level", "h", "N", "error", "order", "iterations", "residual", "failure"])?;
    for &method in &cfg.methods {
        let settings = cfg.settings_for(raw, method);
        let rep = convergence_study(cfg.case, &settings, &refs);
        rep.write_csv(create(&cfg.out, &format!("convergence_{}.csv", method.name()))?)?;
        for (r, o) in rep.entries.iter().zip(rep.orders()) {
            all.write_record([
                method.name().to_string(),
                r.level.map_or(String::new(), |k| k.to_string()),
                e(r.h),
                r.n.to_string(),
                opt(r.error),
                opt(o),
                r.iterations.map_or(String::new(), |i| i.to_string()),
                opt(r.residual),
                r.failure.clone().unwrap_or_default(),
            ])?;
            if let Some(f) = &r.failure {
                failures.push(format!("{method} level {:?}: {f}", r.level));
            }
        }
        summarize(method, &rep);
    }
    all.flush()?;

    if !cfg.jumps.is_empty() {
        let geom = geometry(cfg, cfg.resolution)?;
        let mut w = csv::Writer::from_writer(create(&cfg.out, "errjump.csv")?);
        w.write_record(["method", "jump", "error", "iterations", "failure"])?;
        for &method in &cfg.methods {
            let settings = cfg.settings_for(raw, method);
            for &jump in &cfg.jumps {
                let rep = convergence_study(with_jump(cfg.case, jump), &settings, &[&geom]);
                let r = &rep.entries[0];
                w.write_record([
                    method.name().to_string(),
                    e(jump),
                    opt(r.error),
                    r.iterations.map_or(String::new(), |i| i.to_string()),
                    r.failure.clone().unwrap_or_default(),
                ])?;
                if let Some(f) = &r.failure {
                    failures.push(format!("{method} jump {jump:e}: {f}"));
                }
            }
        }
        w.flush()?;
    }
    report_failures(failures)
}

fn summarize(method: Method, rep: &ErrorReport) {
    let errs: Vec<_> = rep
        .entries
        .iter()
        .map(|r| r.error.map_or("-".into(), |v| format!("{v:.3e}")))
        .collect();
    eprintln!("{method}: errors [{}], last order {}", errs.join(", "), rep.last_order().map_or("-".into(), |p| format!("{p:.2}")));
}

fn report_failures(failures: Vec<String>) -> Res<()> {
    if failures.is_empty() {
        return Ok(());
    }
    for f in &failures {
        eprintln!("failed: {f}");
    }
    Err(CliError::Failed(failures.len()))
}

pub fn fractions(cfg: &RunConfig, raw: &RawConfig) -> Res<()> {
    prepare_out(cfg)?;
    let method = cfg.methods[0];
    let settings = cfg.settings_for(raw, method);
    // One table row per jump, one column group per radius.
    let mut rows: Vec<Vec<String>> = cfg.jumps.iter().map(|&j| vec![e(j)]).collect();
    let mut header = vec!["jump".to_string()];
    for &h in &cfg.hs {
        for col in ["sigma0_pct", "conservative_pct", "at_interface_pct", "near_interface_pct"] {
            header.push(format!("{col}@{h:e}"));
        }
        let geom = geometry(cfg, Resolution::Radius(h))?;
        for (row, &jump) in rows.iter_mut().zip(&cfg.jumps) {
            let case = with_jump(cfg.case, jump);
            let prep = Prepared::new(&geom, case, &settings)?;
            let system = prep.assemble(&settings)?;
            let eta = case.diffusivity_field(&prep.cloud);
            let s = node_fraction_stats(&system.selection, &prep.cloud, &geom.neigh, &eta);
            row.extend([
                e(s.sigma0_pct),
                e(s.conservative_pct),
                e(s.at_interface_pct.unwrap_or(0.0)),
                e(s.near_interface_pct.unwrap_or(0.0)),
            ]);
        }
    }
    let mut w = csv::Writer::from_writer(create(&cfg.out, "fractions.csv")?);
    w.write_record(&header)?;
    for row in &rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn bench(cfg: &RunConfig, raw: &RawConfig) -> Res<()> {
    prepare_out(cfg)?;
    let mut w = csv::Writer::from_writer(create(&cfg.out, "bench.csv")?);
    w.write_record(["method", "level", "N", "iterations", "tol_iterations", "error", "mean_ms"])?;
    let mut failures = Vec::new();
    for &k in &cfg.levels {
        let geom = geometry(cfg, Resolution::Level(k))?;
        for &method in &cfg.methods {
            let settings = cfg.settings_for(raw, method);
            let mut total = 0.0;
            let mut last = None;
            for _ in 0..cfg.repetitions {
                let start = Instant::now();
                let sol = Prepared::new(&geom, cfg.case, &settings).and_then(|p| p.solve(&settings));
                total += start.elapsed().as_secs_f64();
                match sol {
                    Ok(s) => last = Some(s),
                    Err(err) => {
                        failures.push(format!("{method} level {k}: {err}"));
                        last = None;
                        break;
                    }
                }
            }
            let Some(s) = last else { continue };
            let mean_ms = 1e3 * total / cfg.repetitions as f64;
            w.write_record([
                method.name().to_string(),
                k.to_string(),
                geom.cloud.len().to_string(),
                s.iterations.to_string(),
                s.tol_iterations.to_string(),
                e(s.error),
                format!("{mean_ms:.3}"),
            ])?;
            w.flush()?;
            eprintln!("{method} level {k}: {} iterations, {mean_ms:.1} ms", s.iterations);
        }
    }
    w.flush()?;
    report_failures(failures)
}
