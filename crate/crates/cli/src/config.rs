//! Flat `key = value` configuration. A `[section]` header scopes the keys
//! below it; sections are named after a case or a command and take
//! precedence over top-level keys when that case or command is active.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use gfdm::assembly::{Method, SolverConfig};
use gfdm::pointcloud::Metric;
use gfdm::problems::{CaseId, CloudType, Settings, TestCase};

const SECTIONS: [&str; 8] = [
    "two_strip",
    "curved_interface",
    "interior_interface",
    "three_strip",
    "run",
    "convergence",
    "fractions",
    "bench",
];

const KEYS: [&str; 29] = [
    "case",
    "jump",
    "eta_l",
    "eta_r",
    "eta_in",
    "eta_out",
    "height",
    "jump_l",
    "jump_r",
    "method",
    "methods",
    "neumann",
    "cloud",
    "level",
    "h",
    "levels",
    "seed",
    "metric",
    "smoothing_cycles",
    "scaled",
    "correction",
    "epsilon",
    "tol",
    "maxiter",
    "to_floor",
    "jumps",
    "hs",
    "repetitions",
    "out",
];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Res<T> = Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Res<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<(Option<String>, String), String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Res<Self> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return err(format!("line {}: unknown section [{name}]", n + 1));
                }
                section = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("line {}: expected `key = value`", n + 1));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return err(format!("line {}: unknown key '{key}'", n + 1));
            }
            if value.is_empty() {
                return err(format!("line {}: empty value for '{key}'", n + 1));
            }
            if entries
                .insert((section.clone(), key.to_string()), value.to_string())
                .is_some()
            {
                return err(format!("line {}: duplicate key '{key}'", n + 1));
            }
        }
        Ok(Self { entries })
    }

    /// Looks `key` up in each scope in turn, then at top level.
    fn get(&self, scopes: &[&str], key: &str) -> Option<&str> {
        scopes
            .iter()
            .map(|s| Some(s.to_string()))
            .chain([None])
            .find_map(|s| self.entries.get(&(s, key.to_string())))
            .map(String::as_str)
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Res<T> {
    v.parse().map_err(|_| ConfigError(format!("invalid value for '{key}': {v}")))
}

fn parse_bool(key: &str, v: &str) -> Res<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => err(format!("invalid value for '{key}': {v}")),
    }
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Res<Vec<T>> {
    v.split(',').map(|s| parse_value(key, s.trim())).collect()
}

/// `a..b` (inclusive) or a comma list.
fn parse_levels(v: &str) -> Res<Vec<u32>> {
    if let Some((a, b)) = v.split_once("..") {
        let (a, b): (u32, u32) = (parse_value("levels", a.trim())?, parse_value("levels", b.trim())?);
        if a > b {
            return err(format!("empty level range {v}"));
        }
        return Ok((a..=b).collect());
    }
    parse_list("levels", v)
}

fn parse_metric(v: &str) -> Res<Metric> {
    match v {
        "d1" => Ok(Metric::D1),
        "d2" => Ok(Metric::D2),
        _ => err(format!("invalid value for 'metric': {v}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolution {
    Level(u32),
    Radius(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Convergence,
    Fractions,
    Bench,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Convergence => "convergence",
            Command::Fractions => "fractions",
            Command::Bench => "bench",
        }
    }
}

/// Fully resolved configuration of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub case: TestCase<f64>,
    pub methods: Vec<Method>,
    pub settings: Settings,
    pub cloud: CloudType,
    pub resolution: Resolution,
    pub levels: Vec<u32>,
    pub seed: u64,
    pub metric: Metric,
    pub jumps: Vec<f64>,
    pub hs: Vec<f64>,
    pub repetitions: usize,
    pub out: PathBuf,
}

fn default_case(id: CaseId) -> TestCase<f64> {
    match id {
        CaseId::TwoStrip => TestCase::two_strip(1e10),
        CaseId::CurvedInterface => TestCase::curved(1.0, 1e10),
        CaseId::InteriorInterface => TestCase::interior_interface(1e6),
        CaseId::ThreeStrip => TestCase::three_strip(1e6, 1e-4),
    }
}

/// The case with its principal jump replaced by `jump`.
pub fn with_jump(case: TestCase<f64>, jump: f64) -> TestCase<f64> {
    match case {
        TestCase::TwoStrip { .. } => TestCase::TwoStrip { jump },
        TestCase::CurvedInterface { eta_l, .. } => TestCase::CurvedInterface { eta_l, eta_r: eta_l * jump },
        TestCase::InteriorInterface { eta_out, level, .. } => TestCase::InteriorInterface {
            eta_in: eta_out * jump,
            eta_out,
            level,
        },
        TestCase::ThreeStrip { jump_r, .. } => TestCase::ThreeStrip { jump_l: jump, jump_r },
    }
}

impl RunConfig {
    pub fn resolve(raw: &RawConfig, command: Command) -> Res<Self> {
        let cmd = command.name();
        let case_id: CaseId = match raw.get(&[cmd], "case") {
            Some(v) => v.parse().map_err(|e: gfdm::Error| ConfigError(e.to_string()))?,
            None => match command {
                Command::Fractions => CaseId::TwoStrip,
                Command::Bench => CaseId::InteriorInterface,
                _ => return err("missing key 'case'"),
            },
        };
        let scopes = [case_id.name(), cmd];
        let get = |key: &str| raw.get(&scopes, key);
        let num = |key: &str| -> Res<Option<f64>> { get(key).map(|v| parse_value(key, v)).transpose() };

        let mut case = default_case(case_id);
        if command == Command::Bench && get("jump").is_none() {
            case = with_jump(case, 1e10);
        }
        if let Some(j) = num("jump")? {
            case = with_jump(case, j);
        }
        case = match case {
            TestCase::CurvedInterface { eta_l, eta_r } => TestCase::CurvedInterface {
                eta_l: num("eta_l")?.unwrap_or(eta_l),
                eta_r: num("eta_r")?.unwrap_or(eta_r),
            },
            TestCase::InteriorInterface { eta_in, eta_out, level } => TestCase::InteriorInterface {
                eta_in: num("eta_in")?.unwrap_or(eta_in),
                eta_out: num("eta_out")?.unwrap_or(eta_out),
                level: num("height")?.unwrap_or(level),
            },
            TestCase::ThreeStrip { jump_l, jump_r } => TestCase::ThreeStrip {
                jump_l: num("jump_l")?.unwrap_or(jump_l),
                jump_r: num("jump_r")?.unwrap_or(jump_r),
            },
            c => c,
        };
        case.validate().map_err(|e| ConfigError(e.to_string()))?;

        let parse_method = |v: &str| -> Res<Method> {
            v.trim().parse().map_err(|e: gfdm::Error| ConfigError(e.to_string()))
        };
        let methods = match (get("methods"), get("method")) {
            (Some(list), _) => list.split(',').map(parse_method).collect::<Res<Vec<_>>>()?,
            (None, Some(m)) => vec![parse_method(m)?],
            (None, None) if command == Command::Bench => vec![Method::Strong, Method::ConsHybrid],
            (None, None) => vec![Method::ConsHybrid],
        };
        let mut settings = Settings::for_method(methods[0]);
        if let Some(v) = get("neumann") {
            settings.neumann = v.parse().map_err(|e: gfdm::Error| ConfigError(e.to_string()))?;
        }
        if let Some(v) = get("smoothing_cycles") {
            settings.smoothing_cycles = parse_value("smoothing_cycles", v)?;
        }
        if let Some(v) = get("scaled") {
            settings.scaled = parse_bool("scaled", v)?;
        }
        if let Some(v) = get("correction") {
            settings.correction = parse_bool("correction", v)?;
        }
        if let Some(v) = num("epsilon")? {
            settings.epsilon = v;
        }
        let mut solver = SolverConfig { to_floor: true, ..SolverConfig::default() };
        if let Some(v) = num("tol")? {
            if !(v > 0.0) {
                return err("'tol' must be positive");
            }
            solver.tol = v;
        }
        if let Some(v) = get("maxiter") {
            solver.maxiter = Some(parse_value("maxiter", v)?);
        }
        if let Some(v) = get("to_floor") {
            solver.to_floor = parse_bool("to_floor", v)?;
        }
        settings.solver = solver;

        let cloud = get("cloud").map(|v| v.parse().map_err(|e: gfdm::Error| ConfigError(e.to_string()))).transpose()?;
        let resolution = match (get("level"), num("h")?) {
            (Some(_), Some(_)) => return err("set either 'level' or 'h', not both"),
            (Some(k), None) => Resolution::Level(parse_value("level", k)?),
            (None, Some(h)) if h > 0.0 => Resolution::Radius(h),
            (None, Some(_)) => return err("'h' must be positive"),
            (None, None) => Resolution::Level(2),
        };
        let levels = match get("levels") {
            Some(v) => parse_levels(v)?,
            None if command == Command::Bench => (0..=4).collect(),
            None => (1..=3).collect(),
        };
        let jumps = match get("jumps") {
            Some(v) => parse_list("jumps", v)?,
            None if command == Command::Fractions => vec![1.0, 1e2, 1e4, 1e6, 1e8, 1e10],
            None => Vec::new(),
        };
        if jumps.iter().any(|&j: &f64| !(j > 0.0 && j.is_finite())) {
            return err("'jumps' must be positive");
        }
        let hs = match get("hs") {
            Some(v) => parse_list("hs", v)?,
            None => vec![5e-2, 1.25e-2],
        };
        if hs.iter().any(|&h: &f64| !(h > 0.0)) {
            return err("'hs' must be positive");
        }
        let repetitions = match get("repetitions") {
            Some(v) => parse_value("repetitions", v)?,
            None => 10,
        };
        if repetitions == 0 {
            return err("'repetitions' must be at least 1");
        }
        Ok(Self {
            command,
            case,
            methods,
            settings,
            cloud: cloud.unwrap_or_default(),
            resolution,
            levels,
            seed: get("seed").map(|v| parse_value("seed", v)).transpose()?.unwrap_or(1),
            metric: get("metric").map(parse_metric).transpose()?.unwrap_or_default(),
            jumps,
            hs,
            repetitions,
            out: PathBuf::from(get("out").unwrap_or("out")),
        })
    }

    /// Settings for `method`: method defaults overridden by explicit keys.
    pub fn settings_for(&self, raw: &RawConfig, method: Method) -> Settings {
        let mut s = self.settings;
        s.method = method;
        let scopes = [self.case.id().name(), self.command.name()];
        if raw.get(&scopes, "smoothing_cycles").is_none() {
            s.smoothing_cycles = Settings::for_method(method).smoothing_cycles;
        }
        s
    }

    /// `key = value` lines describing the resolved configuration.
    pub fn render(&self) -> String {
        let mut lines = vec![format!("command = {}", self.command.name())];
        lines.push(format!("case = {}", self.case.id()));
        match self.case {
            TestCase::TwoStrip { jump } => lines.push(format!("jump = {jump:e}")),
            TestCase::CurvedInterface { eta_l, eta_r } => {
                lines.push(format!("eta_l = {eta_l:e}"));
                lines.push(format!("eta_r = {eta_r:e}"));
            }
            TestCase::InteriorInterface { eta_in, eta_out, level } => {
                lines.push(format!("eta_in = {eta_in:e}"));
                lines.push(format!("eta_out = {eta_out:e}"));
                lines.push(format!("height = {level}"));
            }
            TestCase::ThreeStrip { jump_l, jump_r } => {
                lines.push(format!("jump_l = {jump_l:e}"));
                lines.push(format!("jump_r = {jump_r:e}"));
            }
        }
        let names: Vec<_> = self.methods.iter().map(|m| m.name()).collect();
        lines.push(format!("methods = {}", names.join(",")));
        let s = &self.settings;
        lines.push(format!("neumann = {}", s.neumann));
        lines.push(format!("smoothing_cycles = {}", s.smoothing_cycles));
        lines.push(format!("scaled = {}", s.scaled));
        lines.push(format!("correction = {}", s.correction));
        lines.push(format!("epsilon = {:e}", s.epsilon));
        lines.push(format!("tol = {:e}", s.solver.tol));
        if let Some(m) = s.solver.maxiter {
            lines.push(format!("maxiter = {m}"));
        }
        lines.push(format!("to_floor = {}", s.solver.to_floor));
        lines.push(format!("cloud = {}", self.cloud));
        match self.resolution {
            Resolution::Level(k) => lines.push(format!("level = {k}")),
            Resolution::Radius(h) => lines.push(format!("h = {h:e}")),
        }
        let levels: Vec<_> = self.levels.iter().map(u32::to_string).collect();
        lines.push(format!("levels = {}", levels.join(",")));
        lines.push(format!("seed = {}", self.seed));
        lines.push(format!(
            "metric = {}",
            match self.metric {
                Metric::D1 => "d1",
                Metric::D2 => "d2",
            }
        ));
        if !self.jumps.is_empty() {
            let j: Vec<_> = self.jumps.iter().map(|j| format!("{j:e}")).collect();
            lines.push(format!("jumps = {}", j.join(",")));
        }
        let hs: Vec<_> = self.hs.iter().map(|h| format!("{h:e}")).collect();
        lines.push(format!("hs = {}", hs.join(",")));
        lines.push(format!("repetitions = {}", self.repetitions));
        lines.push(format!("out = {}", self.out.display()));
        lines.join("\n") + "\n"
    }
}
