//! Maxwell and extended Maxwell expressions, weighted norms, and the
//! uniform-in-`α` estimate sweeps over a smoothing family.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fields::{
    curl_of, f_norm, inner, make_normal_zero, make_tangential_zero, sobolev_parts,
    weighted_jacobian, Coefficient, CoefficientField, Cutoff, Field, HeightWeighted, Scalar,
    ScalarField, Sum, VectorField,
};
use crate::geometry::DomainPatch;
use crate::mollify::SmoothingFamily;
use crate::quadrature::QuadratureSpec;
use crate::{complexify_mat, CVec3, Complex64, Error, Mat3, Result, Vec2, Vec3};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Weights `ε` on the electric block and `μ` on the magnetic block.
#[derive(Clone)]
pub struct WeightedL2Spec {
    pub epsilon: Coefficient,
    pub mu: Coefficient,
}

impl WeightedL2Spec {
    pub fn new(epsilon: Coefficient, mu: Coefficient) -> Self {
        Self { epsilon, mu }
    }

    pub fn check(&self, patch: &DomainPatch) -> Result<()> {
        crate::fields::check_coefficient_bounds(self.epsilon.as_ref(), patch)?;
        crate::fields::check_coefficient_bounds(self.mu.as_ref(), patch)
    }
}

fn solve(m: &Mat3, b: &CVec3) -> CVec3 {
    complexify_mat(
        &m.try_inverse()
            .expect("coefficient bounds guarantee invertibility"),
    ) * b
}

/// `(i ε⁻¹ rot H, −i μ⁻¹ rot E)`.
pub fn apply_maxwell(
    e: &dyn VectorField,
    h: &dyn VectorField,
    spec: &WeightedL2Spec,
    x: &Vec3,
) -> (CVec3, CVec3) {
    let eps = spec.epsilon.value(x);
    let mu = spec.mu.value(x);
    (
        solve(&eps, &curl_of(&h.jacobian(x))) * I,
        solve(&mu, &curl_of(&e.jacobian(x))) * -I,
    )
}

#[derive(Debug, Clone, Copy)]
struct ZeroScalar;

impl ScalarField for ZeroScalar {
    fn value(&self, _: &Vec3) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    fn gradient(&self, _: &Vec3) -> CVec3 {
        CVec3::zeros()
    }

    fn name(&self) -> String {
        "0".into()
    }
}

/// `X = (E, φ, H, η)`.
#[derive(Clone)]
pub struct ExtendedField {
    pub e: Field,
    pub phi: Scalar,
    pub h: Field,
    pub eta: Scalar,
}

impl ExtendedField {
    pub fn new(e: Field, phi: Scalar, h: Field, eta: Scalar) -> Self {
        Self { e, phi, h, eta }
    }

    /// `(E, 0, H, 0)`.
    pub fn maxwell(e: Field, h: Field) -> Self {
        Self::new(e, Arc::new(ZeroScalar), h, Arc::new(ZeroScalar))
    }

    pub fn value(&self, x: &Vec3) -> ExtendedValue {
        ExtendedValue {
            e: self.e.value(x),
            phi: self.phi.value(x),
            h: self.h.value(x),
            eta: self.eta.value(x),
        }
    }

    pub fn name(&self) -> String {
        format!(
            "({}, {}, {}, {})",
            self.e.name(),
            self.phi.name(),
            self.h.name(),
            self.eta.name()
        )
    }
}

/// Eight components in block order `(ℂ³, ℂ, ℂ³, ℂ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedValue {
    pub e: CVec3,
    pub phi: Complex64,
    pub h: CVec3,
    pub eta: Complex64,
}

impl ExtendedValue {
    pub fn components(&self) -> [Complex64; 8] {
        [
            self.e[0], self.e[1], self.e[2], self.phi, self.h[0], self.h[1], self.h[2], self.eta,
        ]
    }

    /// `⟨εE, E'⟩ + φφ̄' + ⟨μH, H'⟩ + ηη̄'`.
    pub fn weighted_inner(&self, other: &ExtendedValue, eps: &Mat3, mu: &Mat3) -> Complex64 {
        inner(&(complexify_mat(eps) * self.e), &other.e)
            + self.phi * other.phi.conj()
            + inner(&(complexify_mat(mu) * self.h), &other.h)
            + self.eta * other.eta.conj()
    }
}

/// `(i ε⁻¹ rot H + i∇η, −i div(μH), −i μ⁻¹ rot E − i∇φ, i div(εE))`.
pub fn apply_extended(x_field: &ExtendedField, spec: &WeightedL2Spec, x: &Vec3) -> ExtendedValue {
    let (me, mh) = apply_maxwell(x_field.e.as_ref(), x_field.h.as_ref(), spec, x);
    let div_mu_h = weighted_jacobian(
        &spec.mu.value(x),
        &spec.mu.derivative(x),
        &x_field.h.value(x),
        &x_field.h.jacobian(x),
    )
    .trace();
    let div_eps_e = weighted_jacobian(
        &spec.epsilon.value(x),
        &spec.epsilon.derivative(x),
        &x_field.e.value(x),
        &x_field.e.jacobian(x),
    )
    .trace();
    ExtendedValue {
        e: me + x_field.eta.gradient(x) * I,
        phi: -I * div_mu_h,
        h: mh - x_field.phi.gradient(x) * I,
        eta: I * div_eps_e,
    }
}

/// `(‖div(εE)‖, ‖div(μH)‖)` over the patch.
pub fn divergence_free_residual(
    e: &dyn VectorField,
    h: &dyn VectorField,
    spec: &WeightedL2Spec,
    patch: &DomainPatch,
) -> (f64, f64) {
    let [a, b] = patch.integrate(|x| {
        let de = weighted_jacobian(
            &spec.epsilon.value(x),
            &spec.epsilon.derivative(x),
            &e.value(x),
            &e.jacobian(x),
        );
        let dh = weighted_jacobian(
            &spec.mu.value(x),
            &spec.mu.derivative(x),
            &h.value(x),
            &h.jacobian(x),
        );
        [de.trace().norm_sqr(), dh.trace().norm_sqr()]
    });
    (a.sqrt(), b.sqrt())
}

/// Weighted `‖X‖²` and `‖LX‖²`.
pub fn graph_norm_parts(
    x_field: &ExtendedField,
    spec: &WeightedL2Spec,
    patch: &DomainPatch,
) -> (f64, f64) {
    let [l2, lx] = patch.integrate(|x| {
        let eps = spec.epsilon.value(x);
        let mu = spec.mu.value(x);
        let v = x_field.value(x);
        let l = apply_extended(x_field, spec, x);
        [
            v.weighted_inner(&v, &eps, &mu).re,
            l.weighted_inner(&l, &eps, &mu).re,
        ]
    });
    (l2, lx)
}

/// `(‖LX‖² + ‖X‖²)^{1/2}` with the block weights `(ε, 1, μ, 1)`.
pub fn graph_norm(x_field: &ExtendedField, spec: &WeightedL2Spec, patch: &DomainPatch) -> f64 {
    let (l2, lx) = graph_norm_parts(x_field, spec, patch);
    (l2 + lx).max(0.0).sqrt()
}

pub fn weighted_l2_norm(
    x_field: &ExtendedField,
    spec: &WeightedL2Spec,
    patch: &DomainPatch,
) -> f64 {
    graph_norm_parts(x_field, spec, patch).0.max(0.0).sqrt()
}

/// `W¹₂` norm of all eight components.
pub fn extended_sobolev_norm(x_field: &ExtendedField, patch: &DomainPatch) -> f64 {
    let e = sobolev_parts(x_field.e.as_ref(), patch);
    let h = sobolev_parts(x_field.h.as_ref(), patch);
    let [scalars] = patch.integrate(|x| {
        [x_field.phi.value(x).norm_sqr()
            + x_field.phi.gradient(x).norm_squared()
            + x_field.eta.value(x).norm_sqr()
            + x_field.eta.gradient(x).norm_squared()]
    });
    (e.grad_sq + e.l2_sq + h.grad_sq + h.l2_sq + scalars).sqrt()
}

/// `(LX, Y) − (X, LY)` in the weighted inner product.
pub fn symmetry_probe(
    x_field: &ExtendedField,
    y_field: &ExtendedField,
    spec: &WeightedL2Spec,
    patch: &DomainPatch,
) -> Complex64 {
    let [re, im] = patch.integrate(|x| {
        let eps = spec.epsilon.value(x);
        let mu = spec.mu.value(x);
        let lx = apply_extended(x_field, spec, x);
        let ly = apply_extended(y_field, spec, x);
        let z = lx.weighted_inner(&y_field.value(x), &eps, &mu)
            - x_field.value(x).weighted_inner(&ly, &eps, &mu);
        [z.re, z.im]
    });
    Complex64::new(re, im)
}

pub const SWEEP_MODES: &[&str] = &["magnetic", "electric", "extended"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// `(μv)_ν = 0`, ratio `‖v‖_{W¹₂} / ‖v‖_{F(μ)}`.
    Magnetic,
    /// `u_τ = 0`, ratio `‖u‖_{W¹₂} / ‖u‖_{F(ε)}`.
    Electric,
    /// `X = (E, 0, H, 0)`, ratio `‖X‖_{W¹₂} / graph norm`.
    Extended,
}

impl std::str::FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "magnetic" => Ok(SweepMode::Magnetic),
            "electric" => Ok(SweepMode::Electric),
            "extended" => Ok(SweepMode::Extended),
            other => Err(crate::names::unknown("sweep mode", other, SWEEP_MODES)),
        }
    }
}

impl std::fmt::Display for SweepMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepMode::Magnetic => "magnetic",
            SweepMode::Electric => "electric",
            SweepMode::Extended => "extended",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub rho: f64,
    pub height: f64,
    pub quad: QuadratureSpec,
    /// Boundary-condition violation above which a cell is invalid, relative
    /// to the field's size on the boundary.
    pub bc_tolerance: f64,
    /// Largest admissible fraction of invalid cells.
    pub invalid_budget: f64,
}

impl SweepOptions {
    pub fn new(rho: f64, quad: QuadratureSpec) -> Self {
        Self {
            rho,
            height: 2.0 * rho,
            quad,
            bc_tolerance: 1e-8,
            invalid_budget: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub alpha: f64,
    pub field_id: String,
    pub sobolev: f64,
    pub f_or_graph: f64,
    pub ratio: f64,
    pub valid: bool,
    /// Largest relative boundary-condition violation on surface nodes.
    pub bc_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub mode: SweepMode,
    pub cells: Vec<SweepCell>,
    /// `(α, max ratio over valid cells)`.
    pub max_ratio_per_alpha: Vec<(f64, f64)>,
    pub overall_max: f64,
    pub invalid_count: usize,
}

impl SweepReport {
    /// Largest over smallest per-`α` maximum.
    pub fn variation(&self) -> f64 {
        let maxima: Vec<f64> = self.max_ratio_per_alpha.iter().map(|p| p.1).collect();
        let lo = maxima.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = maxima.iter().copied().fold(0.0, f64::max);
        hi / lo
    }

    pub fn invalid_fraction(&self) -> f64 {
        self.invalid_count as f64 / self.cells.len().max(1) as f64
    }

    /// CSV `alpha,field_id,sobolev,f_or_graph,ratio,valid`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "alpha",
            "field_id",
            "sobolev",
            "f_or_graph",
            "ratio",
            "valid",
        ])?;
        for c in &self.cells {
            w.write_record([
                c.alpha.to_string(),
                c.field_id.clone(),
                c.sobolev.to_string(),
                c.f_or_graph.to_string(),
                c.ratio.to_string(),
                c.valid.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "mode": self.mode,
            "max_ratio_per_alpha": self.max_ratio_per_alpha,
            "overall_max": self.overall_max,
            "invalid_count": self.invalid_count,
            "cells": self.cells.len(),
        })
    }
}

/// Relative size of `u × ν` (tangential) or `⟨su, ν⟩` (normal) on the
/// graph boundary.
pub fn boundary_violation(
    u: &dyn VectorField,
    s: Option<&dyn CoefficientField>,
    patch: &DomainPatch,
) -> f64 {
    let nodes = patch.surface_nodes();
    let (bad, size) = nodes
        .par_iter()
        .map(|n| {
            let v = u.value(&n.x);
            let nu = crate::complexify_vec(&n.normal);
            let bad = match s {
                Some(s) => (complexify_mat(&s.value(&n.x)) * v).dot(&nu).norm(),
                None => v.cross(&nu).norm(),
            };
            (bad, v.norm())
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    bad / size.max(1.0)
}

/// Boundary-adapted test fields `(e, h)` for one cell: cutoff around the boundary
/// point above the origin, then the mode's projection.
pub fn cell_fields(
    g: &Field,
    mode: SweepMode,
    spec: &WeightedL2Spec,
    patch: &DomainPatch,
) -> Result<(Field, Field)> {
    let phi = &patch.graph;
    let center = Vec3::new(0.0, 0.0, phi.value(&Vec2::zeros()));
    let cut = Cutoff::new(center, 0.5 * patch.rho, patch.rho).apply(g.clone());
    let samples: Vec<Vec3> = patch.volume_nodes().iter().map(|n| n.x).collect();
    // Normal part on the boundary plus a term vanishing there, so that
    // tangential generators are not projected away.
    let e: Field = Arc::new(Sum {
        a: 1.0.into(),
        u: make_tangential_zero(cut.clone(), phi),
        b: 1.0.into(),
        v: Arc::new(HeightWeighted {
            g: cut.clone(),
            phi: phi.clone(),
        }),
    });
    let h = make_normal_zero(cut, spec.mu.clone(), phi, &samples)?;
    Ok(match mode {
        SweepMode::Electric => (e.clone(), e),
        SweepMode::Magnetic => (h.clone(), h),
        SweepMode::Extended => (e, h),
    })
}

/// Ratio and boundary violation for fields already adapted to `mode`.
pub fn cell_ratio(
    e: &Field,
    h: &Field,
    mode: SweepMode,
    spec: &WeightedL2Spec,
    patch: &DomainPatch,
) -> (f64, f64, f64) {
    match mode {
        SweepMode::Electric => {
            let sob = sobolev_parts(e.as_ref(), patch).norm();
            let f = f_norm(e.as_ref(), spec.epsilon.as_ref(), patch);
            (sob, f, boundary_violation(e.as_ref(), None, patch))
        }
        SweepMode::Magnetic => {
            let sob = sobolev_parts(h.as_ref(), patch).norm();
            let f = f_norm(h.as_ref(), spec.mu.as_ref(), patch);
            (
                sob,
                f,
                boundary_violation(h.as_ref(), Some(spec.mu.as_ref()), patch),
            )
        }
        SweepMode::Extended => {
            let x = ExtendedField::maxwell(e.clone(), h.clone());
            let sob = extended_sobolev_norm(&x, patch);
            let g = graph_norm(&x, spec, patch);
            let viol = boundary_violation(e.as_ref(), None, patch).max(boundary_violation(
                h.as_ref(),
                Some(spec.mu.as_ref()),
                patch,
            ));
            (sob, g, viol)
        }
    }
}

/// Sobolev over F (or graph) norm ratios for every `(α, field)` cell.
/// Basket members are localised by a cutoff and projected onto the mode's
/// boundary condition against each `φ_α`.
pub fn estimate_sweep(
    family: &SmoothingFamily,
    spec: &WeightedL2Spec,
    basket: &[Field],
    mode: SweepMode,
    opts: &SweepOptions,
) -> Result<SweepReport> {
    if basket.is_empty() {
        return Err(Error::Precondition(
            "estimate sweep needs a nonempty basket".into(),
        ));
    }
    let patches: Vec<(f64, DomainPatch)> = family
        .alphas
        .iter()
        .map(|&a| {
            (
                a,
                DomainPatch::new(family.graph(a), opts.rho, opts.height, opts.quad),
            )
        })
        .collect();
    for (_, p) in &patches {
        p.validate()?;
        spec.check(p)?;
    }
    let jobs: Vec<(usize, usize)> = (0..patches.len())
        .flat_map(|i| (0..basket.len()).map(move |j| (i, j)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(i, j)| {
            let (alpha, patch) = &patches[i];
            let (e, h) = cell_fields(&basket[j], mode, spec, patch)?;
            let (sob, f, viol) = cell_ratio(&e, &h, mode, spec, patch);
            let ratio = sob / f;
            Ok(SweepCell {
                alpha: *alpha,
                field_id: basket[j].name(),
                sobolev: sob,
                f_or_graph: f,
                ratio,
                valid: viol <= opts.bc_tolerance && ratio.is_finite(),
                bc_violation: viol,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let invalid_count = cells.iter().filter(|c| !c.valid).count();
    if invalid_count as f64 > opts.invalid_budget * cells.len() as f64 {
        return Err(Error::InvalidCells {
            invalid: invalid_count,
            total: cells.len(),
        });
    }
    let max_ratio_per_alpha: Vec<(f64, f64)> = family
        .alphas
        .iter()
        .map(|&a| {
            let m = cells
                .iter()
                .filter(|c| c.alpha == a && c.valid)
                .map(|c| c.ratio)
                .fold(0.0, f64::max);
            (a, m)
        })
        .collect();
    let overall_max = max_ratio_per_alpha.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(SweepReport {
        mode,
        cells,
        max_ratio_per_alpha,
        overall_max,
        invalid_count,
    })
}
