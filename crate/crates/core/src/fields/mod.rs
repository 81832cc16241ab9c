//! Vector calculus on domain patches: operators, norms, weak boundary
//! residuals and the integration-by-parts identities with curvature terms.

mod bc;
mod catalog;
mod identities;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{integrate_nodes, DomainPatch};
use crate::quadrature::compensated_sum;
use crate::{fd, CMat3, CVec3, Complex64, Error, Mat3, Result, Vec3};

pub use bc::{make_normal_zero, make_tangential_zero, HeightWeighted, NormalZero, TangentialZero};
pub use catalog::{
    CoefficientKind, Cutoff, FieldKind, FnField, ScalarKind, Scaled, Sum, COEFFICIENT_NAMES,
    FIELD_NAMES, SCALAR_NAMES,
};
pub use identities::{
    boundary_k, critical_point_probe, electric_identity, fit_i3_constant, fit_minor_constant,
    gaffney_residual, lemma33_check, lemma44_closed_form, minor_term_probe, CriticalPointProbe,
    ElectricIdentity, GaffneyReport, MinorTerms,
};

/// Finite-difference step for fields without a Jacobian oracle.
pub const FIELD_FD_STEP: f64 = 1e-4;

/// A complex vector field on ℝ³. `jacobian(x)[(i, j)] = ∂ⱼuᵢ`.
pub trait VectorField: Send + Sync {
    fn value(&self, x: &Vec3) -> CVec3;

    fn jacobian(&self, x: &Vec3) -> CMat3 {
        fd::jacobian3(|y| self.value(y), x, FIELD_FD_STEP)
    }

    fn name(&self) -> String {
        "field".into()
    }
}

pub trait ScalarField: Send + Sync {
    fn value(&self, x: &Vec3) -> Complex64;

    fn gradient(&self, x: &Vec3) -> CVec3 {
        fd::gradient3(|y| self.value(y), x, FIELD_FD_STEP)
    }

    fn name(&self) -> String {
        "scalar".into()
    }
}

/// Real symmetric matrix-valued coefficient with declared bounds
/// `β₀·I ≤ s(x) ≤ β₁·I`.
pub trait CoefficientField: Send + Sync {
    fn value(&self, x: &Vec3) -> Mat3;

    /// `[∂₁s, ∂₂s, ∂₃s]`.
    fn derivative(&self, x: &Vec3) -> [Mat3; 3] {
        std::array::from_fn(|i| {
            let mut e = Vec3::zeros();
            e[i] = 1.0;
            Mat3::from_fn(|r, c| {
                fd::richardson(|t| self.value(&(x + e * t))[(r, c)], 0.0, FIELD_FD_STEP)
            })
        })
    }

    fn bounds(&self) -> (f64, f64);

    fn is_constant(&self) -> bool {
        false
    }

    fn name(&self) -> String {
        "coefficient".into()
    }
}

pub type Field = Arc<dyn VectorField>;
pub type Scalar = Arc<dyn ScalarField>;
pub type Coefficient = Arc<dyn CoefficientField>;

impl<T: VectorField + ?Sized> VectorField for Arc<T> {
    fn value(&self, x: &Vec3) -> CVec3 {
        (**self).value(x)
    }
    fn jacobian(&self, x: &Vec3) -> CMat3 {
        (**self).jacobian(x)
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

impl<T: ScalarField + ?Sized> ScalarField for Arc<T> {
    fn value(&self, x: &Vec3) -> Complex64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &Vec3) -> CVec3 {
        (**self).gradient(x)
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

impl<T: CoefficientField + ?Sized> CoefficientField for Arc<T> {
    fn value(&self, x: &Vec3) -> Mat3 {
        (**self).value(x)
    }
    fn derivative(&self, x: &Vec3) -> [Mat3; 3] {
        (**self).derivative(x)
    }
    fn bounds(&self) -> (f64, f64) {
        (**self).bounds()
    }
    fn is_constant(&self) -> bool {
        (**self).is_constant()
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

pub fn field<F: VectorField + 'static>(f: F) -> Field {
    Arc::new(f)
}

pub fn parse_field(name: &str) -> Result<Field> {
    Ok(Arc::new(name.parse::<FieldKind>()?))
}

pub fn parse_scalar(name: &str) -> Result<Scalar> {
    Ok(Arc::new(name.parse::<ScalarKind>()?))
}

pub fn parse_coefficient(name: &str) -> Result<Coefficient> {
    Ok(Arc::new(name.parse::<CoefficientKind>()?))
}

/// `Σ aᵢ conj(bᵢ)`
pub fn inner(a: &CVec3, b: &CVec3) -> Complex64 {
    b.dotc(a)
}

/// Curl from a Jacobian with `j[(i, k)] = ∂ₖuᵢ`.
pub fn curl_of(j: &CMat3) -> CVec3 {
    CVec3::new(
        j[(2, 1)] - j[(1, 2)],
        j[(0, 2)] - j[(2, 0)],
        j[(1, 0)] - j[(0, 1)],
    )
}

pub fn rot(u: &dyn VectorField, x: &Vec3) -> CVec3 {
    curl_of(&u.jacobian(x))
}

pub fn div(u: &dyn VectorField, x: &Vec3) -> Complex64 {
    u.jacobian(x).trace()
}

pub fn grad(f: &dyn ScalarField, x: &Vec3) -> CVec3 {
    f.gradient(x)
}

/// Jacobian of `s·u`: `∂ⱼ(su)ᵢ = (∂ⱼs)ᵢₖuₖ + sᵢₖ∂ⱼuₖ`.
pub fn weighted_jacobian(s: &Mat3, ds: &[Mat3; 3], u: &CVec3, j: &CMat3) -> CMat3 {
    let mut out = crate::complexify_mat(s) * j;
    for (c, dsc) in ds.iter().enumerate() {
        let col = crate::complexify_mat(dsc) * u;
        for r in 0..3 {
            out[(r, c)] += col[r];
        }
    }
    out
}

/// `div(su) = Σ (∂ᵢsᵢₖ)uₖ + sᵢₖ∂ᵢuₖ`.
pub fn div_weighted(s: &dyn CoefficientField, u: &dyn VectorField, x: &Vec3) -> Complex64 {
    weighted_jacobian(&s.value(x), &s.derivative(x), &u.value(x), &u.jacobian(x)).trace()
}

/// Frobenius norm squared of a complex matrix.
pub fn frob_sq(m: &CMat3) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Squared pieces of the F-norm `‖rot u‖² + ‖div(su)‖² + (su, u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FNormParts {
    pub rot_sq: f64,
    pub div_sq: f64,
    pub mass: f64,
}

impl FNormParts {
    pub fn norm(&self) -> f64 {
        (self.rot_sq + self.div_sq + self.mass).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevParts {
    pub grad_sq: f64,
    pub l2_sq: f64,
}

impl SobolevParts {
    pub fn norm(&self) -> f64 {
        (self.grad_sq + self.l2_sq).sqrt()
    }
}

pub fn f_norm_parts(
    u: &dyn VectorField,
    s: &dyn CoefficientField,
    patch: &DomainPatch,
) -> FNormParts {
    let [rot_sq, div_sq, mass] = patch.integrate(|x| {
        let v = u.value(x);
        let j = u.jacobian(x);
        let sm = s.value(x);
        let js = weighted_jacobian(&sm, &s.derivative(x), &v, &j);
        let sv = crate::complexify_mat(&sm) * v;
        [
            curl_of(&j).norm_squared(),
            js.trace().norm_sqr(),
            inner(&sv, &v).re,
        ]
    });
    FNormParts {
        rot_sq,
        div_sq,
        mass,
    }
}

pub fn f_norm(u: &dyn VectorField, s: &dyn CoefficientField, patch: &DomainPatch) -> f64 {
    f_norm_parts(u, s, patch).norm()
}

pub fn sobolev_parts(u: &dyn VectorField, patch: &DomainPatch) -> SobolevParts {
    let [grad_sq, l2_sq] =
        patch.integrate(|x| [frob_sq(&u.jacobian(x)), u.value(x).norm_squared()]);
    SobolevParts { grad_sq, l2_sq }
}

pub fn sobolev_norm(u: &dyn VectorField, patch: &DomainPatch) -> f64 {
    sobolev_parts(u, patch).norm()
}

pub fn l2_norm(u: &dyn VectorField, patch: &DomainPatch) -> f64 {
    let [a] = patch.integrate(|x| [u.value(x).norm_squared()]);
    a.sqrt()
}

/// Sum of complex values through two compensated real sums.
fn complex_integral(patch: &DomainPatch, f: impl Fn(&Vec3) -> Complex64 + Sync) -> Complex64 {
    let [re, im] = patch.integrate(|x| {
        let z = f(x);
        [z.re, z.im]
    });
    Complex64::new(re, im)
}

/// `∫⟨w, rot h⟩ − ∫⟨rot w, h⟩`.
pub fn weak_tangential_residual(
    w: &dyn VectorField,
    h: &dyn VectorField,
    patch: &DomainPatch,
) -> Complex64 {
    complex_integral(patch, |x| {
        inner(&w.value(x), &rot(h, x)) - inner(&rot(w, x), &h.value(x))
    })
}

/// Surface oracle for [`weak_tangential_residual`]: `∫_∂Ω ⟨w×ν, h⟩ dS` over
/// the graph part of the boundary.
pub fn tangential_flux(w: &dyn VectorField, h: &dyn VectorField, patch: &DomainPatch) -> Complex64 {
    let [re, im] = patch.integrate_surface(|n| {
        let nu = crate::complexify_vec(&n.normal);
        let z = inner(&w.value(&n.x).cross(&nu), &h.value(&n.x));
        [z.re, z.im]
    });
    Complex64::new(re, im)
}

/// `∫⟨sw, ∇f⟩ + ∫ div(sw)·conj(f)`.
pub fn weak_normal_residual(
    w: &dyn VectorField,
    s: &dyn CoefficientField,
    f: &dyn ScalarField,
    patch: &DomainPatch,
) -> Complex64 {
    complex_integral(patch, |x| {
        let sm = s.value(x);
        let v = w.value(x);
        let sw = crate::complexify_mat(&sm) * v;
        let d = weighted_jacobian(&sm, &s.derivative(x), &v, &w.jacobian(x)).trace();
        inner(&sw, &f.gradient(x)) + d * f.value(x).conj()
    })
}

/// Surface oracle for [`weak_normal_residual`]: `∫_∂Ω ⟨sw, ν⟩·conj(f) dS`.
pub fn normal_flux(
    w: &dyn VectorField,
    s: &dyn CoefficientField,
    f: &dyn ScalarField,
    patch: &DomainPatch,
) -> Complex64 {
    let [re, im] = patch.integrate_surface(|n| {
        let sw = crate::complexify_mat(&s.value(&n.x)) * w.value(&n.x);
        let z = sw.dot(&crate::complexify_vec(&n.normal)) * f.value(&n.x).conj();
        [z.re, z.im]
    });
    Complex64::new(re, im)
}

/// Fails unless every volume node satisfies `β₀·I ≤ s(x) ≤ β₁·I` and `s` is
/// exactly symmetric.
pub fn check_coefficient_bounds(s: &dyn CoefficientField, patch: &DomainPatch) -> Result<()> {
    let (b0, b1) = s.bounds();
    let nodes = patch.volume_nodes();
    let [worst] = integrate_nodes(&nodes, |n| {
        let m = s.value(&n.x);
        if m != m.transpose() {
            return [1.0];
        }
        let e = crate::matalg::SymMatrix3::from_matrix(&m).eigenvalues();
        let slack = 1e-12 * b1.abs().max(1.0);
        [if e[2] < b0 - slack || e[0] > b1 + slack {
            1.0
        } else {
            0.0
        }]
    });
    if worst > 0.0 {
        return Err(Error::Precondition(format!(
            "coefficient {} leaves its declared bounds [{b0}, {b1}] or is not symmetric at {worst} nodes",
            s.name()
        )));
    }
    Ok(())
}

/// Pointwise quantities behind the trace form of `|∇v|²`: returns
/// `(|∇v|², tr(UU*), |∇v|² − |rot v|², Re tr(UŪ))` with `U_{kj} = ∂ⱼv_k`.
pub fn pointwise_trace_identities(j: &CMat3) -> [f64; 4] {
    let grad = frob_sq(j);
    let uu_star = (j * j.adjoint()).trace().re;
    let diff = grad - curl_of(j).norm_squared();
    let u_ubar = (j * j.map(|z| z.conj())).trace().re;
    [grad, uu_star, diff, u_ubar]
}

/// `Σ |zᵢ|` over residual samples, compensated.
pub fn total_abs(values: &[Complex64]) -> f64 {
    compensated_sum(values.iter().map(|z| z.norm()))
}
