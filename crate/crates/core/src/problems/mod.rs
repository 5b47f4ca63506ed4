//! Benchmark problems with closed-form solutions, error metrics and studies.

mod metrics;
mod study;

use std::fmt;
use std::str::FromStr;

pub use metrics::{
    flux_error_profile, node_fraction_stats, relative_l2, relative_l2_error, FluxProfile, FluxSample,
    FractionStats,
};
pub use study::{
    convergence_study, convergence_study_levels, solve_case, CaseSolution, CloudType, ErrorReport,
    Geometry, LevelResult, Prepared, Settings,
};

use crate::error::{Error, Result};
use crate::pointcloud::{BcType, Point, PointCloud, Side};
use crate::scalar::Real;

/// Boundary value problem data as seen by the assembly.
pub trait Problem<T: Real> {
    fn diffusivity(&self, p: Point<T>) -> T;
    fn source(&self, p: Point<T>) -> T;
    fn bc_type(&self, side: Side) -> BcType;
    fn dirichlet(&self, p: Point<T>) -> T;
    /// `du/dn` for outward normal `n`.
    fn neumann(&self, p: Point<T>, n: Point<T>) -> T;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    TwoStrip,
    CurvedInterface,
    InteriorInterface,
    ThreeStrip,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [
        CaseId::TwoStrip,
        CaseId::CurvedInterface,
        CaseId::InteriorInterface,
        CaseId::ThreeStrip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::TwoStrip => "two_strip",
            CaseId::CurvedInterface => "curved_interface",
            CaseId::InteriorInterface => "interior_interface",
            CaseId::ThreeStrip => "three_strip",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown case '{s}'")))
    }
}

/// The four benchmark configurations on `[-1, 1]^2`.
///
/// Points exactly on an interface take the left, lower or outer value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestCase<T> {
    /// `eta = 1` for `x <= 0`, `jump` for `x > 0`.
    TwoStrip { jump: T },
    /// Interface `y = 2 x^3`; `eta_l` above it, `eta_r` below.
    CurvedInterface { eta_l: T, eta_r: T },
    /// Interface `cos(pi x / 2) cos(pi y / 2) = level`; `eta_in` inside,
    /// `eta_out` outside.
    InteriorInterface { eta_in: T, eta_out: T, level: T },
    /// Strips split at `x = -1/3` and `x = 1/3` with `eta_m = jump_l` and
    /// `eta_r = jump_l jump_r`.
    ThreeStrip { jump_l: T, jump_r: T },
}

fn phi<T: Real>(p: Point<T>) -> T {
    let h = T::FRAC_PI_2();
    (h * p.x).cos() * (h * p.y).cos()
}

impl<T: Real> TestCase<T> {
    pub fn two_strip(jump: T) -> Self {
        TestCase::TwoStrip { jump }
    }

    pub fn curved(eta_l: T, eta_r: T) -> Self {
        TestCase::CurvedInterface { eta_l, eta_r }
    }

    pub fn interior_interface(eta_in: T) -> Self {
        TestCase::InteriorInterface {
            eta_in,
            eta_out: T::one(),
            level: T::lit(0.75),
        }
    }

    pub fn three_strip(jump_l: T, jump_r: T) -> Self {
        TestCase::ThreeStrip { jump_l, jump_r }
    }

    pub fn id(&self) -> CaseId {
        match self {
            TestCase::TwoStrip { .. } => CaseId::TwoStrip,
            TestCase::CurvedInterface { .. } => CaseId::CurvedInterface,
            TestCase::InteriorInterface { .. } => CaseId::InteriorInterface,
            TestCase::ThreeStrip { .. } => CaseId::ThreeStrip,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: T| v > T::zero() && v.is_finite();
        let valid = match *self {
            TestCase::TwoStrip { jump } => ok(jump),
            TestCase::CurvedInterface { eta_l, eta_r } => ok(eta_l) && ok(eta_r),
            TestCase::InteriorInterface {
                eta_in,
                eta_out,
                level,
            } => ok(eta_in) && ok(eta_out) && level > T::zero() && level < T::one(),
            TestCase::ThreeStrip { jump_l, jump_r } => ok(jump_l) && ok(jump_r) && ok(jump_l * jump_r),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid parameters for {}", self.id())))
        }
    }

    fn strip_values(&self) -> [T; 3] {
        match *self {
            TestCase::ThreeStrip { jump_l, jump_r } => [T::one(), jump_l, jump_l * jump_r],
            TestCase::TwoStrip { jump } => [T::one(), jump, jump],
            _ => unreachable!(),
        }
    }

    /// Index of the constant-diffusivity piece containing `p`.
    pub fn region(&self, p: Point<T>) -> usize {
        let third = T::one() / T::lit(3.0);
        match *self {
            TestCase::TwoStrip { .. } => usize::from(p.x > T::zero()),
            TestCase::CurvedInterface { .. } => usize::from(p.y < T::lit(2.0) * p.x.powi(3)),
            TestCase::InteriorInterface { level, .. } => usize::from(phi(p) > level),
            TestCase::ThreeStrip { .. } => {
                if p.x <= -third {
                    0
                } else if p.x <= third {
                    1
                } else {
                    2
                }
            }
        }
    }

    pub fn diffusivity_at(&self, p: Point<T>) -> T {
        let r = self.region(p);
        match *self {
            TestCase::TwoStrip { jump } => [T::one(), jump][r],
            TestCase::CurvedInterface { eta_l, eta_r } => [eta_l, eta_r][r],
            TestCase::InteriorInterface { eta_in, eta_out, .. } => [eta_out, eta_in][r],
            TestCase::ThreeStrip { .. } => self.strip_values()[r],
        }
    }

    /// Constant flux `eta u_x` and the slopes of the strip problems.
    fn strip_flux(&self) -> (T, [T; 3]) {
        let eta = self.strip_values();
        let len = match self {
            TestCase::TwoStrip { .. } => [T::one(), T::zero(), T::one()],
            _ => [T::lit(2.0) / T::lit(3.0); 3],
        };
        // u(1) - u(-1) = -1 = q sum_k len_k / eta_k
        let resistance: T = (0..3).map(|k| len[k] / eta[k]).sum();
        let q = -T::one() / resistance;
        (q, [q / eta[0], q / eta[1], q / eta[2]])
    }

    pub fn exact_solution(&self, p: Point<T>) -> T {
        let two = T::lit(2.0);
        match *self {
            TestCase::TwoStrip { .. } | TestCase::ThreeStrip { .. } => {
                let (_, a) = self.strip_flux();
                let breaks = match self {
                    TestCase::TwoStrip { .. } => [T::zero(), T::zero()],
                    _ => [-T::one() / T::lit(3.0), T::one() / T::lit(3.0)],
                };
                let mut u = two;
                let mut left = -T::one();
                for (k, &right) in breaks.iter().chain([T::one()].iter()).enumerate() {
                    let seg = (p.x.min(right) - left).max(T::zero());
                    u += a[k] * seg;
                    left = left.max(right);
                }
                u
            }
            TestCase::CurvedInterface { .. } => {
                let s = p.y - two * p.x.powi(3);
                (s * s - T::lit(30.0) * s) / self.diffusivity_at(p)
            }
            TestCase::InteriorInterface { level, .. } => {
                (phi(p) - level) / self.diffusivity_at(p) + level
            }
        }
    }

    pub fn exact_gradient(&self, p: Point<T>) -> Point<T> {
        let two = T::lit(2.0);
        match *self {
            TestCase::TwoStrip { .. } | TestCase::ThreeStrip { .. } => {
                let (q, _) = self.strip_flux();
                Point::new(q / self.diffusivity_at(p), T::zero())
            }
            TestCase::CurvedInterface { .. } => {
                let s = p.y - two * p.x.powi(3);
                let g = (two * s - T::lit(30.0)) / self.diffusivity_at(p);
                Point::new(-T::lit(6.0) * p.x * p.x * g, g)
            }
            TestCase::InteriorInterface { .. } => {
                let h = T::FRAC_PI_2();
                let d = Point::new(
                    -h * (h * p.x).sin() * (h * p.y).cos(),
                    -h * (h * p.x).cos() * (h * p.y).sin(),
                );
                d * (T::one() / self.diffusivity_at(p))
            }
        }
    }

    pub fn source_term(&self, p: Point<T>) -> T {
        match *self {
            TestCase::TwoStrip { .. } | TestCase::ThreeStrip { .. } => T::zero(),
            TestCase::CurvedInterface { .. } => {
                -T::lit(120.0) * p.x.powi(4) + T::lit(24.0) * p.x * (p.y - T::lit(15.0)) - T::lit(2.0)
            }
            TestCase::InteriorInterface { .. } => T::PI() * T::PI() / T::lit(2.0) * phi(p),
        }
    }

    pub fn bc_type_on(&self, side: Side) -> BcType {
        match (self, side) {
            (TestCase::TwoStrip { .. } | TestCase::ThreeStrip { .. }, Side::Top | Side::Bottom) => {
                BcType::Neumann
            }
            _ => BcType::Dirichlet,
        }
    }

    /// Condition type and value at a boundary point; corners follow the
    /// Dirichlet side.
    pub fn boundary_data(&self, p: Point<T>, sides: &[Side]) -> (BcType, T) {
        if sides.iter().any(|&s| self.bc_type_on(s) == BcType::Dirichlet) || sides.is_empty() {
            (BcType::Dirichlet, self.exact_solution(p))
        } else {
            let n = sides
                .iter()
                .fold(Point::zero(), |acc, s| acc + s.outward_normal())
                .normalized();
            (BcType::Neumann, self.exact_gradient(p).dot(n))
        }
    }

    /// The cloud with boundary condition types of this case.
    pub fn partition(&self, cloud: PointCloud<T>) -> PointCloud<T> {
        cloud.with_partition(|s| self.bc_type_on(s))
    }

    pub fn diffusivity_field(&self, cloud: &PointCloud<T>) -> Vec<T> {
        cloud.points().iter().map(|&p| self.diffusivity_at(p)).collect()
    }
}

impl<T: Real> Problem<T> for TestCase<T> {
    fn diffusivity(&self, p: Point<T>) -> T {
        self.diffusivity_at(p)
    }

    fn source(&self, p: Point<T>) -> T {
        self.source_term(p)
    }

    fn bc_type(&self, side: Side) -> BcType {
        self.bc_type_on(side)
    }

    fn dirichlet(&self, p: Point<T>) -> T {
        self.exact_solution(p)
    }

    fn neumann(&self, p: Point<T>, n: Point<T>) -> T {
        self.exact_gradient(p).dot(n)
    }
}
