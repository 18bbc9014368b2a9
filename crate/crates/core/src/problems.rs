//! Boundary value problems `-div(beta grad u) = f` on a box.
//!
//! Each face carries either Dirichlet data `u = g_D` or Robin data
//! `alpha u + beta du/dn = g_R`; Neumann is Robin with `alpha = 0`.
//! Three smooth/singular benchmarks are built in, plus a few manufactured
//! solutions selected with `"manufactured:<id>"`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{BoundaryKind, BoundaryTags, Face};

pub type Point = [f64; 3];
type FieldFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(Point) -> [f64; 3] + Send + Sync>;

/// A real function on the domain. Constants are kept distinct so assembly can
/// reuse element matrices and skip vanishing boundary terms.
#[derive(Clone)]
pub enum ScalarField {
    Constant(f64),
    Function(FieldFn),
}

impl ScalarField {
    pub fn new(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField::Function(Arc::new(f))
    }

    pub fn zero() -> Self {
        ScalarField::Constant(0.0)
    }

    #[inline]
    pub fn eval(&self, p: Point) -> f64 {
        match self {
            ScalarField::Constant(c) => *c,
            ScalarField::Function(f) => f(p),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarField::Constant(c) if *c == 0.0)
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            ScalarField::Constant(c) => Some(*c),
            ScalarField::Function(_) => None,
        }
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Constant(c) => write!(f, "Constant({c})"),
            ScalarField::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl From<f64> for ScalarField {
    fn from(c: f64) -> Self {
        ScalarField::Constant(c)
    }
}

#[derive(Debug, Clone)]
pub enum FaceCondition {
    Dirichlet { value: ScalarField },
    Robin { alpha: ScalarField, data: ScalarField },
}

impl FaceCondition {
    pub fn neumann_homogeneous() -> Self {
        FaceCondition::Robin {
            alpha: ScalarField::zero(),
            data: ScalarField::zero(),
        }
    }

    pub fn kind(&self) -> BoundaryKind {
        match self {
            FaceCondition::Dirichlet { .. } => BoundaryKind::Dirichlet,
            FaceCondition::Robin { .. } => BoundaryKind::Robin,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub origin: Point,
    pub extent: Point,
    pub beta: ScalarField,
    pub source: ScalarField,
    /// Indexed by [`Face::index`].
    pub faces: [FaceCondition; 6],
    pub exact: Option<ScalarField>,
    /// Coarsest cells used by the CLI when none are given.
    pub default_coarsest: [usize; 3],
}

impl ProblemSpec {
    pub fn tags(&self) -> BoundaryTags {
        let mut kinds = [BoundaryKind::Robin; 6];
        for f in Face::ALL {
            kinds[f.index()] = self.faces[f.index()].kind();
        }
        BoundaryTags(kinds)
    }

    pub fn face(&self, f: Face) -> &FaceCondition {
        &self.faces[f.index()]
    }

    pub fn exact_at(&self, p: Point) -> Option<f64> {
        self.exact.as_ref().map(|u| u.eval(p))
    }
}

/// Looks up `"p1"`, `"p2"`, `"p3"` or `"manufactured:<id>"`.
pub fn by_name(name: &str) -> Result<ProblemSpec> {
    match name {
        "p1" => Ok(problem1()),
        "p2" => Ok(problem2()),
        "p3" => Ok(problem3()),
        other => match other.strip_prefix("manufactured:") {
            Some("trilinear") => Ok(manufactured_trilinear()),
            Some("robin") => Ok(manufactured_robin()),
            Some("varcoef") => Ok(manufactured_varcoef()),
            _ => Err(Error::UnknownProblem(other.to_string())),
        },
    }
}

pub const PROBLEM_NAMES: &[&str] = &[
    "p1",
    "p2",
    "p3",
    "manufactured:trilinear",
    "manufactured:robin",
    "manufactured:varcoef",
];

fn dirichlet(value: ScalarField) -> FaceCondition {
    FaceCondition::Dirichlet { value }
}

fn p1_exact(p: Point) -> f64 {
    let k = PI / 2.0;
    (k * p[0]).sin() * (k * p[1]).sin() * (k * p[2]).sin()
}

/// `u = sin(pi x/2) sin(pi y/2) sin(pi z/2)` on the unit cube, zero Dirichlet
/// data on the three faces through the origin, homogeneous Neumann elsewhere.
pub fn problem1() -> ProblemSpec {
    let zero = || dirichlet(ScalarField::zero());
    ProblemSpec {
        name: "p1".into(),
        origin: [0.0; 3],
        extent: [1.0; 3],
        beta: ScalarField::Constant(1.0),
        source: ScalarField::new(|p| 0.75 * PI * PI * p1_exact(p)),
        faces: [
            zero(),
            FaceCondition::neumann_homogeneous(),
            zero(),
            FaceCondition::neumann_homogeneous(),
            zero(),
            FaceCondition::neumann_homogeneous(),
        ],
        exact: Some(ScalarField::new(p1_exact)),
        default_coarsest: [8, 8, 8],
    }
}

fn p2_exact(p: Point) -> f64 {
    p[2].exp() * (1.5 * PI * p[0]).sin() * (0.5 * PI * p[1]).sin()
}

/// `u = exp(z) sin(3 pi x/2) sin(pi y/2)`: Neumann on `x = 1` and `y = 1`,
/// Dirichlet from the exact solution elsewhere. Varies fastest in `x`.
pub fn problem2() -> ProblemSpec {
    let d = || dirichlet(ScalarField::new(p2_exact));
    ProblemSpec {
        name: "p2".into(),
        origin: [0.0; 3],
        extent: [1.0; 3],
        beta: ScalarField::Constant(1.0),
        source: ScalarField::new(|p| (2.5 * PI * PI - 1.0) * p2_exact(p)),
        faces: [
            d(),
            FaceCondition::neumann_homogeneous(),
            d(),
            FaceCondition::neumann_homogeneous(),
            d(),
            d(),
        ],
        exact: Some(ScalarField::new(p2_exact)),
        default_coarsest: [10, 4, 5],
    }
}

fn p3_exact(p: Point) -> f64 {
    let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    if r2 == 0.0 {
        return 0.0;
    }
    p[0] * p[1] * p[2] / r2.powf(0.75)
}

fn p3_source(p: Point) -> f64 {
    let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    if r2 == 0.0 {
        return 0.0;
    }
    33.0 * p[0] * p[1] * p[2] / (4.0 * r2.powf(1.75))
}

/// `u = xyz / (x²+y²+z²)^(3/4)`, Dirichlet everywhere. Only `H^(3-e)` smooth
/// because of the corner singularity at the origin.
pub fn problem3() -> ProblemSpec {
    let d = || dirichlet(ScalarField::new(p3_exact));
    ProblemSpec {
        name: "p3".into(),
        origin: [0.0; 3],
        extent: [1.0; 3],
        beta: ScalarField::Constant(1.0),
        source: ScalarField::new(p3_source),
        faces: [d(), d(), d(), d(), d(), d()],
        exact: Some(ScalarField::new(p3_exact)),
        default_coarsest: [8, 8, 8],
    }
}

/// A smooth solution with its gradient and Laplacian.
#[derive(Clone)]
pub struct Manufactured {
    pub u: FieldFn,
    pub grad: VectorFn,
    pub laplacian: FieldFn,
}

/// A coefficient with its gradient.
#[derive(Clone)]
pub struct Coefficient {
    pub value: ScalarField,
    pub grad: Option<VectorFn>,
}

impl Coefficient {
    pub fn constant(c: f64) -> Self {
        Coefficient {
            value: ScalarField::Constant(c),
            grad: None,
        }
    }
}

/// Boundary type requested for a face of a manufactured problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceSpec {
    Dirichlet,
    Robin { alpha: f64 },
}

/// Derives `f = -beta lap(u) - grad(beta)·grad(u)`, Dirichlet data `u` and
/// Robin data `alpha u + beta du/dn` from a manufactured solution.
pub fn manufactured(name: &str, sol: Manufactured, beta: Coefficient, faces: [FaceSpec; 6]) -> ProblemSpec {
    let source = {
        let sol = sol.clone();
        let beta = beta.clone();
        ScalarField::new(move |p| {
            let b = beta.value.eval(p);
            let mut f = -b * (sol.laplacian)(p);
            if let Some(gb) = &beta.grad {
                let gb = gb(p);
                let gu = (sol.grad)(p);
                f -= gb[0] * gu[0] + gb[1] * gu[1] + gb[2] * gu[2];
            }
            f
        })
    };
    let face_conditions = Face::ALL.map(|face| match faces[face.index()] {
        FaceSpec::Dirichlet => {
            let u = sol.u.clone();
            dirichlet(ScalarField::Function(u))
        }
        FaceSpec::Robin { alpha } => {
            let sol = sol.clone();
            let beta = beta.value.clone();
            let axis = face.axis();
            let sign = if face.is_max() { 1.0 } else { -1.0 };
            FaceCondition::Robin {
                alpha: ScalarField::Constant(alpha),
                data: ScalarField::new(move |p| {
                    alpha * (sol.u)(p) + beta.eval(p) * sign * (sol.grad)(p)[axis]
                }),
            }
        }
    });
    ProblemSpec {
        name: name.into(),
        origin: [0.0; 3],
        extent: [1.0; 3],
        beta: beta.value,
        source,
        faces: face_conditions,
        exact: Some(ScalarField::Function(sol.u)),
        default_coarsest: [4, 4, 4],
    }
}

/// Trilinear solution with mixed Dirichlet/Robin/Neumann faces; reproduced
/// exactly by trilinear elements.
pub fn manufactured_trilinear() -> ProblemSpec {
    let sol = Manufactured {
        u: Arc::new(|p: Point| {
            let [x, y, z] = p;
            1.0 + x - 2.0 * y + 0.5 * z + x * y - y * z + 2.0 * x * y * z
        }),
        grad: Arc::new(|p: Point| {
            let [x, y, z] = p;
            [1.0 + y + 2.0 * y * z, -2.0 + x - z + 2.0 * x * z, 0.5 - y + 2.0 * x * y]
        }),
        laplacian: Arc::new(|_| 0.0),
    };
    use FaceSpec::*;
    manufactured(
        "manufactured:trilinear",
        sol,
        Coefficient::constant(1.0),
        [
            Dirichlet,
            Robin { alpha: 1.0 },
            Dirichlet,
            Robin { alpha: 0.0 },
            Robin { alpha: 2.0 },
            Dirichlet,
        ],
    )
}

/// Smooth solution with `alpha = 1` Robin data on the three far faces.
pub fn manufactured_robin() -> ProblemSpec {
    let u = |p: Point| (0.5 * p[0]).exp() * (0.5 * PI * p[1]).sin() * (PI * p[2] / 3.0).cos();
    let sol = Manufactured {
        u: Arc::new(u),
        grad: Arc::new(move |p: Point| {
            let ex = (0.5 * p[0]).exp();
            let sy = (0.5 * PI * p[1]).sin();
            let cy = (0.5 * PI * p[1]).cos();
            let cz = (PI * p[2] / 3.0).cos();
            let sz = (PI * p[2] / 3.0).sin();
            [0.5 * ex * sy * cz, 0.5 * PI * ex * cy * cz, -PI / 3.0 * ex * sy * sz]
        }),
        laplacian: Arc::new(move |p| (0.25 - PI * PI / 4.0 - PI * PI / 9.0) * u(p)),
    };
    use FaceSpec::*;
    manufactured(
        "manufactured:robin",
        sol,
        Coefficient::constant(1.0),
        [
            Dirichlet,
            Robin { alpha: 1.0 },
            Dirichlet,
            Robin { alpha: 1.0 },
            Dirichlet,
            Robin { alpha: 1.0 },
        ],
    )
}

/// Variable coefficient `beta = 1 + x² + yz/2` with Robin far faces.
pub fn manufactured_varcoef() -> ProblemSpec {
    let sol = Manufactured {
        u: Arc::new(p1_exact),
        grad: Arc::new(|p: Point| {
            let k = PI / 2.0;
            let (sx, sy, sz) = ((k * p[0]).sin(), (k * p[1]).sin(), (k * p[2]).sin());
            let (cx, cy, cz) = ((k * p[0]).cos(), (k * p[1]).cos(), (k * p[2]).cos());
            [k * cx * sy * sz, k * sx * cy * sz, k * sx * sy * cz]
        }),
        laplacian: Arc::new(|p| -0.75 * PI * PI * p1_exact(p)),
    };
    let beta = Coefficient {
        value: ScalarField::new(|p| 1.0 + p[0] * p[0] + 0.5 * p[1] * p[2]),
        grad: Some(Arc::new(|p: Point| [2.0 * p[0], 0.5 * p[2], 0.5 * p[1]])),
    };
    use FaceSpec::*;
    manufactured(
        "manufactured:varcoef",
        sol,
        beta,
        [
            Dirichlet,
            Robin { alpha: 1.0 },
            Dirichlet,
            Robin { alpha: 1.0 },
            Dirichlet,
            Robin { alpha: 1.0 },
        ],
    )
}
