//! Integration-by-parts identities with curvature boundary terms, and the
//! lower-order integrals that enter the coercivity estimates.

use std::sync::Arc;

use rand::RngExt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    curl_of, field, frob_sq, inner, make_tangential_zero, weighted_jacobian, CoefficientField,
    FieldKind, Sum, VectorField,
};
use crate::geometry::{weingarten, DomainPatch, Graph, GraphFunction};
use crate::rng::trial_rng;
use crate::{
    complexify_mat, complexify_vec, CMat3, CVec3, Complex64, Error, Mat2, Mat3, Result, Vec2, Vec3,
};

/// Both sides of `∫|rot w|² + |div w|² = ∫|∇w|² + ∫⟨Aw, w⟩ dS`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaffneyReport {
    pub lhs: f64,
    pub grad_sq: f64,
    pub surface: f64,
    /// `lhs − grad_sq − surface`
    pub residual: f64,
    /// Largest `|⟨w, ν⟩|` over boundary nodes.
    pub normal_trace: f64,
}

impl GaffneyReport {
    pub fn relative(&self) -> f64 {
        self.residual.abs() / self.lhs.abs().max(f64::MIN_POSITIVE)
    }
}

fn max_over_surface(
    patch: &DomainPatch,
    f: impl Fn(&crate::geometry::SurfaceNode) -> f64 + Sync + Send,
) -> f64 {
    use rayon::prelude::*;
    patch
        .surface_nodes()
        .par_iter()
        .map(f)
        .reduce(|| 0.0, f64::max)
}

pub fn gaffney_residual(w: &dyn VectorField, patch: &DomainPatch) -> Result<GaffneyReport> {
    let scale = max_over_surface(patch, |n| w.value(&n.x).norm()).max(1.0);
    let normal_trace = max_over_surface(patch, |n| {
        w.value(&n.x).dot(&complexify_vec(&n.normal)).norm()
    });
    if normal_trace > 1e-10 * scale {
        return Err(Error::Precondition(format!(
            "normal trace of {} reaches {normal_trace:e} on the boundary",
            w.name()
        )));
    }
    let [lhs, grad_sq] = patch.integrate(|x| {
        let j = w.jacobian(x);
        [
            curl_of(&j).norm_squared() + j.trace().norm_sqr(),
            frob_sq(&j),
        ]
    });
    let [surface] = patch.integrate_surface(|n| {
        let a = complexify_mat(&weingarten(&patch.graph, &n.xp));
        let v = w.value(&n.x);
        [inner(&(a * v), &v).re]
    });
    Ok(GaffneyReport {
        lhs,
        grad_sq,
        surface,
        residual: lhs - grad_sq - surface,
        normal_trace,
    })
}

/// `K = s_{jm} s_{kn} (ν_k ∂_j u_m − ν_j ∂_k u_m) ū_n` with `grad_u[(m, j)] = ∂ⱼuₘ`.
///
/// Equals `tr(s∇u)·⟨su, ν⟩‾ − (sν)ᵀ ∇u (sū)`. The real part is the boundary
/// density; the imaginary part vanishes for real fields.
pub fn boundary_k(s: &Mat3, nu: &Vec3, grad_u: &CMat3, u: &CVec3) -> Complex64 {
    let sc = complexify_mat(s);
    let su_bar = sc * u.map(|z| z.conj());
    let snu = complexify_vec(&(s * nu));
    (sc * grad_u).trace() * complexify_vec(nu).dot(&su_bar) - snu.dot(&(grad_u * su_bar))
}

/// `Σ_{j=1,2} (s_jj s₃₃ − s₃ⱼ s_j₃) λⱼ |u₃|²` at a critical point of `φ`
/// with principal curvatures `λ`.
pub fn lemma44_closed_form(s: &Mat3, lambda: [f64; 2], u3: Complex64) -> f64 {
    (0..2)
        .map(|j| (s[(j, j)] * s[(2, 2)] - s[(2, j)] * s[(j, 2)]) * lambda[j])
        .sum::<f64>()
        * u3.norm_sqr()
}

/// Terms of `∫|rot(su)|² + |div(su)|² = ∫|∇(su)|² + ∫K dS + I₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectricIdentity {
    pub lhs: f64,
    /// `∫|∇(su)|²`
    pub grad_sq: f64,
    /// `∫ Re K dS`
    pub surface_k: f64,
    /// `∫ Im K dS`
    pub surface_k_imag: f64,
    /// `lhs − grad_sq − surface_k`, the measured `I₃`.
    pub defect: f64,
    /// `‖∇u‖²`
    pub grad_u_sq: f64,
    /// `‖u‖²`
    pub l2_sq: f64,
}

impl ElectricIdentity {
    pub fn relative(&self) -> f64 {
        self.defect.abs() / self.lhs.abs().max(f64::MIN_POSITIVE)
    }

    /// `|I₃| ≤ δ‖∇u‖² + C‖u‖²`
    pub fn i3_bound_ok(&self, delta: f64, c: f64) -> bool {
        self.defect.abs() <= delta * self.grad_u_sq + c * self.l2_sq
    }
}

pub fn electric_identity(
    u: &dyn VectorField,
    s: &dyn CoefficientField,
    patch: &DomainPatch,
) -> ElectricIdentity {
    let [lhs, grad_sq, grad_u_sq, l2_sq] = patch.integrate(|x| {
        let v = u.value(x);
        let j = u.jacobian(x);
        let js = weighted_jacobian(&s.value(x), &s.derivative(x), &v, &j);
        [
            curl_of(&js).norm_squared() + js.trace().norm_sqr(),
            frob_sq(&js),
            frob_sq(&j),
            v.norm_squared(),
        ]
    });
    let [surface_k, surface_k_imag] = patch.integrate_surface(|n| {
        let k = boundary_k(&s.value(&n.x), &n.normal, &u.jacobian(&n.x), &u.value(&n.x));
        [k.re, k.im]
    });
    ElectricIdentity {
        lhs,
        grad_sq,
        surface_k,
        surface_k_imag,
        defect: lhs - grad_sq - surface_k,
        grad_u_sq,
        l2_sq,
    }
}

/// Smallest `C` with `|I₃| ≤ δ‖∇u‖² + C‖u‖²` on every member of a basket.
pub fn fit_i3_constant(reports: &[ElectricIdentity], delta: f64) -> f64 {
    reports
        .iter()
        .map(|r| (r.defect.abs() - delta * r.grad_u_sq) / r.l2_sq)
        .fold(0.0, f64::max)
}

/// Raw left sides of the two minor-term inequalities (summed over all index
/// combinations) and the squared norms on their right sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinorTerms {
    /// `Σ ∫ |∂ᵢs_{jk}|² |v_l|²`
    pub lhs33: f64,
    /// `Σ ∫ |s_{ij} ∂_k s_{lm} v_n ∂_p v_q|`
    pub lhs34: f64,
    /// `‖∇v‖²`
    pub grad_sq: f64,
    /// `‖v‖²`
    pub l2_sq: f64,
}

pub fn minor_term_probe(
    s: &dyn CoefficientField,
    v: &dyn VectorField,
    patch: &DomainPatch,
) -> MinorTerms {
    let [lhs33, lhs34, grad_sq, l2_sq] = patch.integrate(|x| {
        let ds = s.derivative(x);
        let sm = s.value(x);
        let val = v.value(x);
        let j = v.jacobian(x);
        let ds_sq: f64 = ds.iter().map(|d| d.norm_squared()).sum();
        let ds_abs: f64 = ds.iter().map(|d| d.abs().sum()).sum();
        let s_abs = sm.abs().sum();
        let v_abs: f64 = val.iter().map(|z| z.norm()).sum();
        let jv_abs: f64 = j.iter().map(|z| z.norm()).sum();
        [
            ds_sq * val.norm_squared(),
            s_abs * ds_abs * v_abs * jv_abs,
            frob_sq(&j),
            val.norm_squared(),
        ]
    });
    MinorTerms {
        lhs33,
        lhs34,
        grad_sq,
        l2_sq,
    }
}

/// Fitted `C(δ)` for both minor-term inequalities over a basket:
/// `max (lhs − δ‖∇v‖²)/‖v‖²`, floored at zero.
pub fn fit_minor_constant(terms: &[MinorTerms], delta: f64) -> (f64, f64) {
    let fit = |pick: fn(&MinorTerms) -> f64| {
        terms
            .iter()
            .map(|t| (pick(t) - delta * t.grad_sq) / t.l2_sq)
            .fold(0.0, f64::max)
    };
    (fit(|t| t.lhs33), fit(|t| t.lhs34))
}

/// `∫(|∇(sv)|² − |rot(sv)|² + β₁²|rot v|²) − (β₀²/2)∫|∇v|² + C_budget∫|v|²`,
/// nonnegative when the coercivity estimate holds with that budget.
pub fn lemma33_check(
    s: &dyn CoefficientField,
    v: &dyn VectorField,
    patch: &DomainPatch,
    c_budget: f64,
) -> f64 {
    let (b0, b1) = s.bounds();
    let [main, grad_sq, l2_sq] = patch.integrate(|x| {
        let val = v.value(x);
        let j = v.jacobian(x);
        let js = weighted_jacobian(&s.value(x), &s.derivative(x), &val, &j);
        [
            frob_sq(&js) - curl_of(&js).norm_squared() + b1 * b1 * curl_of(&j).norm_squared(),
            frob_sq(&j),
            val.norm_squared(),
        ]
    });
    main - 0.5 * b0 * b0 * grad_sq + c_budget * l2_sq
}

/// `(λ₁x₁² + λ₂x₂²)/2`: principal curvatures `λ` at the critical point 0.
#[derive(Debug)]
struct PrincipalQuadratic([f64; 2]);

impl Graph for PrincipalQuadratic {
    fn value(&self, x: &Vec2) -> f64 {
        0.5 * (self.0[0] * x[0] * x[0] + self.0[1] * x[1] * x[1])
    }

    fn gradient(&self, x: &Vec2) -> Vec2 {
        Vec2::new(self.0[0] * x[0], self.0[1] * x[1])
    }

    fn hessian(&self, _: &Vec2) -> Mat2 {
        Mat2::new(self.0[0], 0.0, 0.0, self.0[1])
    }

    fn lipschitz(&self, radius: f64) -> f64 {
        self.0[0].abs().max(self.0[1].abs()) * radius
    }

    fn name(&self) -> String {
        format!("quadratic({}, {})", self.0[0], self.0[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointProbe {
    pub samples: u64,
    /// Smallest `Re K` seen.
    pub min_k: f64,
    /// Largest `|K − closed form| / max(1, |closed form|)`.
    pub max_closed_form_error: f64,
    /// Largest `|Im K|`.
    pub max_imag: f64,
}

/// `K` at the critical point of a convex quadratic graph with random SPD `s`,
/// random curvatures `λ ≥ 0` and tangential-zero fields.
pub fn critical_point_probe(samples: u64, seed: u64) -> CriticalPointProbe {
    let generators = [
        FieldKind::Trig,
        FieldKind::Mixed,
        FieldKind::Cplx,
        FieldKind::Poly,
    ];
    let nu = Vec3::new(0.0, 0.0, -1.0);
    let cells: Vec<(f64, f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, k);
            let s = *crate::matalg::random_spd(&mut rng, 0.2, 5.0).matrix();
            let lambda = [rng.random_range(0.0..3.0), rng.random_range(0.0..3.0)];
            let c = [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.5..1.5),
            ];
            let phi = GraphFunction::new(PrincipalQuadratic(lambda));
            let g = field(Sum {
                a: 1.0.into(),
                u: field(generators[(k % 4) as usize]),
                b: 1.0.into(),
                v: Arc::new(FieldKind::Const(c)),
            });
            let u = make_tangential_zero(g, &phi);
            let x = Vec3::zeros();
            let kv = boundary_k(&s, &nu, &u.jacobian(&x), &u.value(&x));
            let closed = lemma44_closed_form(&s, lambda, u.value(&x)[2]);
            (
                kv.re,
                (kv.re - closed).abs() / closed.abs().max(1.0),
                kv.im.abs(),
            )
        })
        .collect();
    CriticalPointProbe {
        samples,
        min_k: cells.iter().map(|c| c.0).fold(f64::INFINITY, f64::min),
        max_closed_form_error: cells.iter().map(|c| c.1).fold(0.0, f64::max),
        max_imag: cells.iter().map(|c| c.2).fold(0.0, f64::max),
    }
}
