use std::fmt;
use std::str::FromStr;

use super::{CoefficientField, Field, ScalarField, VectorField};
use crate::matalg::SymMatrix3;
use crate::names::{unknown, CatalogSpec};
use crate::{CMat3, CVec3, Complex64, Error, Mat3, Vec3};

pub const FIELD_NAMES: &[&str] = &[
    "const a b c",
    "e1",
    "e2",
    "e3",
    "rotation",
    "position",
    "shear",
    "poly",
    "trig",
    "grad",
    "mixed",
    "cplx",
];

/// Closed-form vector fields with exact Jacobians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldKind {
    Const([f64; 3]),
    /// `(−x₂, x₁, 0)`
    Rotation,
    /// `x`
    Position,
    /// `(x₃, 0, 0)`
    Shear,
    /// `(x₁x₂, x₂x₃, x₃x₁)`
    Poly,
    /// `(sin x₂, cos x₃, sin x₁)`
    Trig,
    /// `∇(x₁²x₂ + sin x₃)`
    Grad,
    /// `(x₂², x₁ + x₃, sin(x₁x₂))`
    Mixed,
    /// `(1, 0, x₁) + i(x₂, −x₁x₃, 1)`
    Cplx,
}

impl FieldKind {
    /// Ten generators used as the default test basket.
    pub fn basket() -> Vec<FieldKind> {
        vec![
            FieldKind::Const([1.0, 0.0, 0.0]),
            FieldKind::Const([0.0, 1.0, 0.0]),
            FieldKind::Const([0.0, 0.0, 1.0]),
            FieldKind::Rotation,
            FieldKind::Position,
            FieldKind::Shear,
            FieldKind::Poly,
            FieldKind::Trig,
            FieldKind::Grad,
            FieldKind::Mixed,
        ]
    }
}

impl FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let c = CatalogSpec::parse("field", s)?;
        let unit = |k: usize| {
            let mut v = [0.0; 3];
            v[k] = 1.0;
            FieldKind::Const(v)
        };
        if c.name != "const" {
            c.expect_at_most("field", 0)?;
        }
        Ok(match c.name.as_str() {
            "const" => {
                c.expect_exactly("field", 3)?;
                FieldKind::Const([c.args[0], c.args[1], c.args[2]])
            }
            "e1" => unit(0),
            "e2" => unit(1),
            "e3" => unit(2),
            "rotation" => FieldKind::Rotation,
            "position" => FieldKind::Position,
            "shear" => FieldKind::Shear,
            "poly" => FieldKind::Poly,
            "trig" => FieldKind::Trig,
            "grad" => FieldKind::Grad,
            "mixed" => FieldKind::Mixed,
            "cplx" => FieldKind::Cplx,
            other => return Err(unknown("field", other, FIELD_NAMES)),
        })
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldKind::Const([a, b, c]) => write!(f, "const {a} {b} {c}"),
            FieldKind::Rotation => write!(f, "rotation"),
            FieldKind::Position => write!(f, "position"),
            FieldKind::Shear => write!(f, "shear"),
            FieldKind::Poly => write!(f, "poly"),
            FieldKind::Trig => write!(f, "trig"),
            FieldKind::Grad => write!(f, "grad"),
            FieldKind::Mixed => write!(f, "mixed"),
            FieldKind::Cplx => write!(f, "cplx"),
        }
    }
}

fn real_vec(a: f64, b: f64, c: f64) -> CVec3 {
    CVec3::new(a.into(), b.into(), c.into())
}

#[rustfmt::skip]
fn real_mat(m: [[f64; 3]; 3]) -> CMat3 {
    CMat3::new(
        m[0][0].into(), m[0][1].into(), m[0][2].into(),
        m[1][0].into(), m[1][1].into(), m[1][2].into(),
        m[2][0].into(), m[2][1].into(), m[2][2].into(),
    )
}

impl VectorField for FieldKind {
    fn value(&self, x: &Vec3) -> CVec3 {
        let (x1, x2, x3) = (x[0], x[1], x[2]);
        match *self {
            FieldKind::Const([a, b, c]) => real_vec(a, b, c),
            FieldKind::Rotation => real_vec(-x2, x1, 0.0),
            FieldKind::Position => real_vec(x1, x2, x3),
            FieldKind::Shear => real_vec(x3, 0.0, 0.0),
            FieldKind::Poly => real_vec(x1 * x2, x2 * x3, x3 * x1),
            FieldKind::Trig => real_vec(x2.sin(), x3.cos(), x1.sin()),
            FieldKind::Grad => real_vec(2.0 * x1 * x2, x1 * x1, x3.cos()),
            FieldKind::Mixed => real_vec(x2 * x2, x1 + x3, (x1 * x2).sin()),
            FieldKind::Cplx => CVec3::new(
                Complex64::new(1.0, x2),
                Complex64::new(0.0, -x1 * x3),
                Complex64::new(x1, 1.0),
            ),
        }
    }

    fn jacobian(&self, x: &Vec3) -> CMat3 {
        let (x1, x2, x3) = (x[0], x[1], x[2]);
        match *self {
            FieldKind::Const(_) => CMat3::zeros(),
            FieldKind::Rotation => real_mat([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0; 3]]),
            FieldKind::Position => CMat3::identity(),
            FieldKind::Shear => real_mat([[0.0, 0.0, 1.0], [0.0; 3], [0.0; 3]]),
            FieldKind::Poly => real_mat([[x2, x1, 0.0], [0.0, x3, x2], [x3, 0.0, x1]]),
            FieldKind::Trig => real_mat([
                [0.0, x2.cos(), 0.0],
                [0.0, 0.0, -x3.sin()],
                [x1.cos(), 0.0, 0.0],
            ]),
            FieldKind::Grad => real_mat([
                [2.0 * x2, 2.0 * x1, 0.0],
                [2.0 * x1, 0.0, 0.0],
                [0.0, 0.0, -x3.sin()],
            ]),
            FieldKind::Mixed => {
                let c = (x1 * x2).cos();
                real_mat([[0.0, 2.0 * x2, 0.0], [1.0, 0.0, 1.0], [x2 * c, x1 * c, 0.0]])
            }
            FieldKind::Cplx => {
                let i = Complex64::i();
                let z = Complex64::from(0.0);
                CMat3::new(z, i, z, -i * x3, z, -i * x1, Complex64::from(1.0), z, z)
            }
        }
    }

    fn name(&self) -> String {
        self.to_string()
    }
}

pub const SCALAR_NAMES: &[&str] = &["one", "x1", "x2", "x3", "quad", "wave", "cwave"];

/// Closed-form scalar test functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarKind {
    One,
    Coord(usize),
    /// `x₁x₂ + x₃²`
    Quad,
    /// `sin x₁ cos x₂ e^{x₃/2}`
    Wave,
    /// `exp(i(x₁ + 2x₂))`
    CWave,
}

impl ScalarKind {
    pub fn basket() -> Vec<ScalarKind> {
        vec![
            ScalarKind::One,
            ScalarKind::Coord(0),
            ScalarKind::Coord(2),
            ScalarKind::Quad,
            ScalarKind::Wave,
            ScalarKind::CWave,
        ]
    }
}

impl FromStr for ScalarKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let c = CatalogSpec::parse("scalar", s)?;
        c.expect_at_most("scalar", 0)?;
        Ok(match c.name.as_str() {
            "one" => ScalarKind::One,
            "x1" => ScalarKind::Coord(0),
            "x2" => ScalarKind::Coord(1),
            "x3" => ScalarKind::Coord(2),
            "quad" => ScalarKind::Quad,
            "wave" => ScalarKind::Wave,
            "cwave" => ScalarKind::CWave,
            other => return Err(unknown("scalar", other, SCALAR_NAMES)),
        })
    }
}

impl fmt::Display for ScalarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarKind::One => write!(f, "one"),
            ScalarKind::Coord(k) => write!(f, "x{}", k + 1),
            ScalarKind::Quad => write!(f, "quad"),
            ScalarKind::Wave => write!(f, "wave"),
            ScalarKind::CWave => write!(f, "cwave"),
        }
    }
}

impl ScalarField for ScalarKind {
    fn value(&self, x: &Vec3) -> Complex64 {
        match *self {
            ScalarKind::One => 1.0.into(),
            ScalarKind::Coord(k) => x[k].into(),
            ScalarKind::Quad => (x[0] * x[1] + x[2] * x[2]).into(),
            ScalarKind::Wave => (x[0].sin() * x[1].cos() * (0.5 * x[2]).exp()).into(),
            ScalarKind::CWave => Complex64::from_polar(1.0, x[0] + 2.0 * x[1]),
        }
    }

    fn gradient(&self, x: &Vec3) -> CVec3 {
        match *self {
            ScalarKind::One => CVec3::zeros(),
            ScalarKind::Coord(k) => {
                let mut g = CVec3::zeros();
                g[k] = 1.0.into();
                g
            }
            ScalarKind::Quad => real_vec(x[1], x[0], 2.0 * x[2]),
            ScalarKind::Wave => {
                let e = (0.5 * x[2]).exp();
                let (s1, c1, s2, c2) = (x[0].sin(), x[0].cos(), x[1].sin(), x[1].cos());
                real_vec(c1 * c2 * e, -s1 * s2 * e, 0.5 * s1 * c2 * e)
            }
            ScalarKind::CWave => {
                let v = self.value(x) * Complex64::i();
                CVec3::new(v, v * 2.0, 0.0.into())
            }
        }
    }

    fn name(&self) -> String {
        self.to_string()
    }
}

pub const COEFFICIENT_NAMES: &[&str] = &[
    "identity",
    "scalar c",
    "aniso [a11 a22 a33 a12 a13 a23]",
    "sin [a]",
    "ramp [a]",
    "varaniso",
];

const ANISO_PRESET: [f64; 6] = [2.0, 1.5, 1.2, 0.3, 0.1, 0.2];

/// Coefficient catalog. Declared bounds hold on all of ℝ³ except for
/// `ramp`, whose bounds refer to `|x₁| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientKind {
    Constant(SymMatrix3),
    /// `(1 + a sin x₁)·I`
    Sin {
        a: f64,
    },
    /// `(1 + a x₁)·I`
    Ramp {
        a: f64,
    },
    /// `A + 0.2 sin(x₁ + x₂)·I` with the preset anisotropic `A`.
    VarAniso,
}

impl CoefficientKind {
    pub fn scalar(c: f64) -> Self {
        CoefficientKind::Constant(SymMatrix3::diagonal(c, c, c))
    }

    pub fn identity() -> Self {
        Self::scalar(1.0)
    }

    fn preset() -> SymMatrix3 {
        let [a11, a22, a33, a12, a13, a23] = ANISO_PRESET;
        SymMatrix3::new(a11, a22, a33, a12, a13, a23)
    }
}

impl FromStr for CoefficientKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let c = CatalogSpec::parse("coefficient", s)?;
        let kind = match c.name.as_str() {
            "identity" => {
                c.expect_at_most("coefficient", 0)?;
                CoefficientKind::identity()
            }
            "scalar" => {
                c.expect_exactly("coefficient", 1)?;
                CoefficientKind::scalar(c.args[0])
            }
            "aniso" => {
                let m = match c.args.len() {
                    0 => CoefficientKind::preset(),
                    6 => SymMatrix3::new(
                        c.args[0], c.args[1], c.args[2], c.args[3], c.args[4], c.args[5],
                    ),
                    n => {
                        return Err(Error::Config(format!(
                            "coefficient `aniso` takes 0 or 6 arguments, got {n}"
                        )))
                    }
                };
                CoefficientKind::Constant(m)
            }
            "sin" => {
                c.expect_at_most("coefficient", 1)?;
                CoefficientKind::Sin { a: c.arg(0, 0.1) }
            }
            "ramp" => {
                c.expect_at_most("coefficient", 1)?;
                CoefficientKind::Ramp { a: c.arg(0, 1.0) }
            }
            "varaniso" => {
                c.expect_at_most("coefficient", 0)?;
                CoefficientKind::VarAniso
            }
            other => return Err(unknown("coefficient", other, COEFFICIENT_NAMES)),
        };
        let (b0, _) = kind.bounds();
        if !matches!(kind, CoefficientKind::Ramp { .. }) && !(b0 > 0.0) {
            return Err(Error::Config(format!(
                "coefficient `{s}` is not positive definite"
            )));
        }
        Ok(kind)
    }
}

impl fmt::Display for CoefficientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientKind::Constant(m) => {
                let a = *m.matrix();
                if a == Mat3::identity() {
                    write!(f, "identity")
                } else if a == Mat3::identity() * a[(0, 0)] {
                    write!(f, "scalar {}", a[(0, 0)])
                } else {
                    write!(
                        f,
                        "aniso {} {} {} {} {} {}",
                        a[(0, 0)],
                        a[(1, 1)],
                        a[(2, 2)],
                        a[(0, 1)],
                        a[(0, 2)],
                        a[(1, 2)]
                    )
                }
            }
            CoefficientKind::Sin { a } => write!(f, "sin {a}"),
            CoefficientKind::Ramp { a } => write!(f, "ramp {a}"),
            CoefficientKind::VarAniso => write!(f, "varaniso"),
        }
    }
}

impl CoefficientField for CoefficientKind {
    fn value(&self, x: &Vec3) -> Mat3 {
        match *self {
            CoefficientKind::Constant(m) => *m.matrix(),
            CoefficientKind::Sin { a } => Mat3::identity() * (1.0 + a * x[0].sin()),
            CoefficientKind::Ramp { a } => Mat3::identity() * (1.0 + a * x[0]),
            CoefficientKind::VarAniso => {
                *Self::preset().matrix() + Mat3::identity() * (0.2 * (x[0] + x[1]).sin())
            }
        }
    }

    fn derivative(&self, x: &Vec3) -> [Mat3; 3] {
        let z = Mat3::zeros();
        match *self {
            CoefficientKind::Constant(_) => [z; 3],
            CoefficientKind::Sin { a } => [Mat3::identity() * (a * x[0].cos()), z, z],
            CoefficientKind::Ramp { a } => [Mat3::identity() * a, z, z],
            CoefficientKind::VarAniso => {
                let d = Mat3::identity() * (0.2 * (x[0] + x[1]).cos());
                [d, d, z]
            }
        }
    }

    fn bounds(&self) -> (f64, f64) {
        match *self {
            CoefficientKind::Constant(m) => {
                let e = m.eigenvalues();
                (e[2], e[0])
            }
            CoefficientKind::Sin { a } | CoefficientKind::Ramp { a } => {
                (1.0 - a.abs(), 1.0 + a.abs())
            }
            CoefficientKind::VarAniso => {
                let e = Self::preset().eigenvalues();
                (e[2] - 0.2, e[0] + 0.2)
            }
        }
    }

    fn is_constant(&self) -> bool {
        matches!(self, CoefficientKind::Constant(_))
    }

    fn name(&self) -> String {
        self.to_string()
    }
}

/// Generalised smoothstep of order 5: `C⁵`, degree 11, `S(0) = 0`, `S(1) = 1`.
pub fn smoothstep5(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    // t⁶ Σ_{k=0}^{5} C(5+k, k) C(11, 5−k) (−t)^k
    const C: [f64; 6] = [462.0, -1980.0, 3465.0, -3080.0, 1386.0, -252.0];
    let mut acc = 0.0;
    for c in C.iter().rev() {
        acc = acc * t + c;
    }
    t.powi(6) * acc
}

/// `S'(t) = 2772 t⁵ (1−t)⁵`.
pub fn smoothstep5_derivative(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    2772.0 * (t * (1.0 - t)).powi(5)
}

/// Radial cutoff: 1 on `|x − c| ≤ inner`, 0 on `|x − c| ≥ outer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub center: Vec3,
    pub inner: f64,
    pub outer: f64,
}

impl Cutoff {
    pub fn new(center: Vec3, inner: f64, outer: f64) -> Self {
        Self {
            center,
            inner,
            outer,
        }
    }

    /// Centred at the origin with radii `ρ/2` and `ρ`.
    pub fn standard(rho: f64) -> Self {
        Self::new(Vec3::zeros(), 0.5 * rho, rho)
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        let r = (x - self.center).norm();
        1.0 - smoothstep5((r - self.inner) / (self.outer - self.inner))
    }

    pub fn grad(&self, x: &Vec3) -> Vec3 {
        let d = x - self.center;
        let r = d.norm();
        if r <= self.inner || r >= self.outer {
            return Vec3::zeros();
        }
        let w = self.outer - self.inner;
        -d / r * (smoothstep5_derivative((r - self.inner) / w) / w)
    }

    /// `χ·u` as a vector field.
    pub fn apply(self, u: Field) -> Field {
        std::sync::Arc::new(Scaled {
            cutoff: self,
            inner: u,
        })
    }
}

impl ScalarField for Cutoff {
    fn value(&self, x: &Vec3) -> Complex64 {
        self.eval(x).into()
    }

    fn gradient(&self, x: &Vec3) -> CVec3 {
        crate::complexify_vec(&self.grad(x))
    }

    fn name(&self) -> String {
        format!("cutoff({}, {})", self.inner, self.outer)
    }
}

/// `χ·u` with the product-rule Jacobian.
pub struct Scaled {
    pub cutoff: Cutoff,
    pub inner: Field,
}

impl VectorField for Scaled {
    fn value(&self, x: &Vec3) -> CVec3 {
        let c = self.cutoff.eval(x);
        if c == 0.0 {
            return CVec3::zeros();
        }
        self.inner.value(x) * Complex64::from(c)
    }

    fn jacobian(&self, x: &Vec3) -> CMat3 {
        let c = self.cutoff.eval(x);
        if c == 0.0 {
            return CMat3::zeros();
        }
        let g = crate::complexify_vec(&self.cutoff.grad(x));
        self.inner.jacobian(x) * Complex64::from(c) + self.inner.value(x) * g.transpose()
    }

    fn name(&self) -> String {
        format!("cut({})", self.inner.name())
    }
}

/// `a·u + b·v`.
pub struct Sum {
    pub a: Complex64,
    pub u: Field,
    pub b: Complex64,
    pub v: Field,
}

impl VectorField for Sum {
    fn value(&self, x: &Vec3) -> CVec3 {
        self.u.value(x) * self.a + self.v.value(x) * self.b
    }

    fn jacobian(&self, x: &Vec3) -> CMat3 {
        self.u.jacobian(x) * self.a + self.v.jacobian(x) * self.b
    }

    fn name(&self) -> String {
        format!(
            "{}·{} + {}·{}",
            self.a,
            self.u.name(),
            self.b,
            self.v.name()
        )
    }
}

type ValueFn = dyn Fn(&Vec3) -> CVec3 + Send + Sync;
type JacFn = dyn Fn(&Vec3) -> CMat3 + Send + Sync;

/// Field from closures; without a Jacobian closure derivatives use
/// Richardson-extrapolated central differences.
pub struct FnField {
    pub label: String,
    pub f: Box<ValueFn>,
    pub jac: Option<Box<JacFn>>,
}

impl FnField {
    pub fn new(label: &str, f: impl Fn(&Vec3) -> CVec3 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            f: Box::new(f),
            jac: None,
        }
    }

    pub fn with_jacobian(mut self, j: impl Fn(&Vec3) -> CMat3 + Send + Sync + 'static) -> Self {
        self.jac = Some(Box::new(j));
        self
    }
}

impl VectorField for FnField {
    fn value(&self, x: &Vec3) -> CVec3 {
        (self.f)(x)
    }

    fn jacobian(&self, x: &Vec3) -> CMat3 {
        match &self.jac {
            Some(j) => j(x),
            None => crate::fd::jacobian3(|y| (self.f)(y), x, super::FIELD_FD_STEP),
        }
    }

    fn name(&self) -> String {
        self.label.clone()
    }
}
