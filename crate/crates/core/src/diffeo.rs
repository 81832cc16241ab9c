//! Diffeomorphism pullbacks of vector fields and coefficients.
//!
//! Jacobian convention: `J[(j, k)] = ∂ⱼψ_k`, i.e. `J = (Dψ)ᵀ`. A field `v`
//! on the image pulls back to `u(x) = J(x)·v(ψ(x))`, and then
//! `rot u = det J · J⁻ᵀ (rot v)∘ψ`, `div(su) = |det J| · div(s̃v)∘ψ` with
//! `s̃ = Jᵀ s J / |det J|`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fields::{
    curl_of, div_weighted, f_norm_parts, sobolev_parts, CoefficientField, FNormParts, Field,
    SobolevParts, VectorField,
};
use crate::geometry::DomainPatch;
use crate::matalg::SymMatrix3;
use crate::names::{unknown, CatalogSpec};
use crate::quadrature::{gauss_on_breaks, CompensatedSum};
use crate::{complexify_mat, CMat3, CVec3, Error, Mat3, Result, Vec3};

/// Step for finite-difference second derivatives.
pub const DIFFEO_FD_STEP: f64 = 1e-3;

pub trait Diffeomorphism: Send + Sync {
    fn forward(&self, x: &Vec3) -> Vec3;

    fn inverse(&self, y: &Vec3) -> Vec3;

    /// `J[(j, k)] = ∂ⱼψ_k`.
    fn jacobian(&self, x: &Vec3) -> Mat3;

    /// `D[l][(j, k)] = ∂_l∂ⱼψ_k`, when available in closed form.
    fn second(&self, _x: &Vec3) -> Option<[Mat3; 3]> {
        None
    }

    fn name(&self) -> String;
}

pub type Diffeo = Arc<dyn Diffeomorphism>;

impl<T: Diffeomorphism + ?Sized> Diffeomorphism for Arc<T> {
    fn forward(&self, x: &Vec3) -> Vec3 {
        (**self).forward(x)
    }

    fn inverse(&self, y: &Vec3) -> Vec3 {
        (**self).inverse(y)
    }

    fn jacobian(&self, x: &Vec3) -> Mat3 {
        (**self).jacobian(x)
    }

    fn second(&self, x: &Vec3) -> Option<[Mat3; 3]> {
        (**self).second(x)
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

/// Second derivatives, from the oracle or by Richardson-extrapolated central
/// differences of the Jacobian with step `h`.
pub fn second_derivatives(psi: &dyn Diffeomorphism, x: &Vec3, h: f64) -> [Mat3; 3] {
    if let Some(d) = psi.second(x) {
        return d;
    }
    fd_second(psi, x, h)
}

pub fn fd_second(psi: &dyn Diffeomorphism, x: &Vec3, h: f64) -> [Mat3; 3] {
    let central = |l: usize, h: f64| {
        let mut e = Vec3::zeros();
        e[l] = h;
        (psi.jacobian(&(x + e)) - psi.jacobian(&(x - e))) / (2.0 * h)
    };
    std::array::from_fn(|l| (central(l, 0.5 * h) * 4.0 - central(l, h)) / 3.0)
}

/// Central-difference Jacobian of `ψ` in the `∂ⱼψ_k` convention.
pub fn fd_jacobian(psi: &dyn Diffeomorphism, x: &Vec3, h: f64) -> Mat3 {
    let mut j = Mat3::zeros();
    for r in 0..3 {
        let mut e = Vec3::zeros();
        e[r] = h;
        let d = (psi.forward(&(x + e)) - psi.forward(&(x - e))) / (2.0 * h);
        j.set_row(r, &d.transpose());
    }
    j
}

pub const DIFFEO_NAMES: &[&str] = &[
    "identity",
    "affine l11 l12 l13 l21 l22 l23 l31 l32 l33 b1 b2 b3",
    "scale c",
    "cusp32",
    "cusp12",
    "poly a b",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiffeoKind {
    Identity,
    /// `ψ(x) = Lx + b`, so `J = Lᵀ`.
    Affine {
        l: Mat3,
        b: Vec3,
    },
    /// `ψ(x) = c·x`
    Scale(f64),
    /// `(x', x₃ + |x'|^{3/2})`
    Cusp32,
    /// `(x', x₃ + |x'|^{1/2})`, not in `W²₃`.
    Cusp12,
    /// `(x₁, x₂ + a x₁², x₃ + b x₁x₂)`
    Poly {
        a: f64,
        b: f64,
    },
}

impl FromStr for DiffeoKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let c = CatalogSpec::parse("diffeomorphism", s)?;
        let kind = "diffeomorphism";
        Ok(match c.name.as_str() {
            "identity" | "id" => {
                c.expect_at_most(kind, 0)?;
                DiffeoKind::Identity
            }
            "affine" => {
                c.expect_exactly(kind, 12)?;
                let a = &c.args;
                DiffeoKind::Affine {
                    l: Mat3::new(a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8]),
                    b: Vec3::new(a[9], a[10], a[11]),
                }
            }
            "scale" => {
                c.expect_at_most(kind, 1)?;
                let v = c.arg(0, 2.0);
                if v == 0.0 || !v.is_finite() {
                    return Err(Error::Config(format!(
                        "scale factor {v} must be finite and nonzero"
                    )));
                }
                DiffeoKind::Scale(v)
            }
            "cusp32" => {
                c.expect_at_most(kind, 0)?;
                DiffeoKind::Cusp32
            }
            "cusp12" => {
                c.expect_at_most(kind, 0)?;
                DiffeoKind::Cusp12
            }
            "poly" => {
                c.expect_at_most(kind, 2)?;
                DiffeoKind::Poly {
                    a: c.arg(0, 0.5),
                    b: c.arg(1, 0.3),
                }
            }
            other => return Err(unknown(kind, other, DIFFEO_NAMES)),
        })
        .and_then(|d: DiffeoKind| match d {
            DiffeoKind::Affine { l, .. } if l.determinant().abs() < 1e-12 => {
                Err(Error::Config("affine map is singular".into()))
            }
            d => Ok(d),
        })
    }
}

impl fmt::Display for DiffeoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffeoKind::Identity => write!(f, "identity"),
            DiffeoKind::Affine { l, b } => {
                write!(f, "affine")?;
                for r in 0..3 {
                    for c in 0..3 {
                        write!(f, " {}", l[(r, c)])?;
                    }
                }
                write!(f, " {} {} {}", b[0], b[1], b[2])
            }
            DiffeoKind::Scale(c) => write!(f, "scale {c}"),
            DiffeoKind::Cusp32 => write!(f, "cusp32"),
            DiffeoKind::Cusp12 => write!(f, "cusp12"),
            DiffeoKind::Poly { a, b } => write!(f, "poly {a} {b}"),
        }
    }
}

/// `x₃`-shift `|x'|^p`: returns `(value, ∂₁, ∂₂, Hessian)`.
fn radial_power(x: &Vec3, p: f64) -> (f64, [f64; 2], [[f64; 2]; 2]) {
    let r = x[0].hypot(x[1]);
    if r == 0.0 {
        let d = if p > 1.0 { 0.0 } else { f64::INFINITY };
        return (0.0, [d, d], [[f64::INFINITY; 2]; 2]);
    }
    let xs = [x[0], x[1]];
    let g = [p * xs[0] * r.powf(p - 2.0), p * xs[1] * r.powf(p - 2.0)];
    let mut h = [[0.0; 2]; 2];
    for (l, row) in h.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let delta = if l == j { 1.0 } else { 0.0 };
            *v = p * (delta * r.powf(p - 2.0) + (p - 2.0) * xs[l] * xs[j] * r.powf(p - 4.0));
        }
    }
    (r.powf(p), g, h)
}

fn shift_second(h: [[f64; 2]; 2]) -> [Mat3; 3] {
    let mut d = [Mat3::zeros(); 3];
    for l in 0..2 {
        for j in 0..2 {
            d[l][(j, 2)] = h[l][j];
        }
    }
    d
}

impl Diffeomorphism for DiffeoKind {
    fn forward(&self, x: &Vec3) -> Vec3 {
        match *self {
            DiffeoKind::Identity => *x,
            DiffeoKind::Affine { l, b } => l * x + b,
            DiffeoKind::Scale(c) => x * c,
            DiffeoKind::Cusp32 => Vec3::new(x[0], x[1], x[2] + radial_power(x, 1.5).0),
            DiffeoKind::Cusp12 => Vec3::new(x[0], x[1], x[2] + radial_power(x, 0.5).0),
            DiffeoKind::Poly { a, b } => {
                Vec3::new(x[0], x[1] + a * x[0] * x[0], x[2] + b * x[0] * x[1])
            }
        }
    }

    fn inverse(&self, y: &Vec3) -> Vec3 {
        match *self {
            DiffeoKind::Identity => *y,
            DiffeoKind::Affine { l, b } => {
                l.lu().solve(&(y - b)).expect("affine map is nonsingular")
            }
            DiffeoKind::Scale(c) => y / c,
            DiffeoKind::Cusp32 => Vec3::new(y[0], y[1], y[2] - radial_power(y, 1.5).0),
            DiffeoKind::Cusp12 => Vec3::new(y[0], y[1], y[2] - radial_power(y, 0.5).0),
            DiffeoKind::Poly { a, b } => {
                let x2 = y[1] - a * y[0] * y[0];
                Vec3::new(y[0], x2, y[2] - b * y[0] * x2)
            }
        }
    }

    fn jacobian(&self, x: &Vec3) -> Mat3 {
        match *self {
            DiffeoKind::Identity => Mat3::identity(),
            DiffeoKind::Affine { l, .. } => l.transpose(),
            DiffeoKind::Scale(c) => Mat3::identity() * c,
            DiffeoKind::Cusp32 | DiffeoKind::Cusp12 => {
                let p = if *self == DiffeoKind::Cusp32 {
                    1.5
                } else {
                    0.5
                };
                let (_, g, _) = radial_power(x, p);
                let mut j = Mat3::identity();
                j[(0, 2)] = g[0];
                j[(1, 2)] = g[1];
                j
            }
            DiffeoKind::Poly { a, b } => {
                #[rustfmt::skip]
                let j = Mat3::new(
                    1.0, 2.0 * a * x[0], b * x[1],
                    0.0, 1.0, b * x[0],
                    0.0, 0.0, 1.0,
                );
                j
            }
        }
    }

    fn second(&self, x: &Vec3) -> Option<[Mat3; 3]> {
        Some(match *self {
            DiffeoKind::Identity | DiffeoKind::Affine { .. } | DiffeoKind::Scale(_) => {
                [Mat3::zeros(); 3]
            }
            DiffeoKind::Cusp32 => shift_second(radial_power(x, 1.5).2),
            DiffeoKind::Cusp12 => shift_second(radial_power(x, 0.5).2),
            DiffeoKind::Poly { a, b } => {
                let mut d = [Mat3::zeros(); 3];
                d[0][(0, 1)] = 2.0 * a;
                d[0][(1, 2)] = b;
                d[1][(0, 2)] = b;
                d
            }
        })
    }

    fn name(&self) -> String {
        self.to_string()
    }
}

pub fn parse_diffeo(name: &str) -> Result<Diffeo> {
    Ok(Arc::new(name.parse::<DiffeoKind>()?))
}

/// Analytic first derivatives, second derivatives forced through finite
/// differences of the Jacobian.
pub struct FdSecond {
    pub inner: Diffeo,
    pub h: f64,
}

impl Diffeomorphism for FdSecond {
    fn forward(&self, x: &Vec3) -> Vec3 {
        self.inner.forward(x)
    }

    fn inverse(&self, y: &Vec3) -> Vec3 {
        self.inner.inverse(y)
    }

    fn jacobian(&self, x: &Vec3) -> Mat3 {
        self.inner.jacobian(x)
    }

    fn second(&self, x: &Vec3) -> Option<[Mat3; 3]> {
        Some(fd_second(self.inner.as_ref(), x, self.h))
    }

    fn name(&self) -> String {
        format!("{} (fd second h={})", self.inner.name(), self.h)
    }
}

/// `outer ∘ inner`.
pub struct Compose {
    pub outer: Diffeo,
    pub inner: Diffeo,
}

impl Diffeomorphism for Compose {
    fn forward(&self, x: &Vec3) -> Vec3 {
        self.outer.forward(&self.inner.forward(x))
    }

    fn inverse(&self, y: &Vec3) -> Vec3 {
        self.inner.inverse(&self.outer.inverse(y))
    }

    fn jacobian(&self, x: &Vec3) -> Mat3 {
        self.inner.jacobian(x) * self.outer.jacobian(&self.inner.forward(x))
    }

    fn second(&self, x: &Vec3) -> Option<[Mat3; 3]> {
        let y = self.inner.forward(x);
        let ji = self.inner.jacobian(x);
        let jo = self.outer.jacobian(&y);
        let di = self.inner.second(x)?;
        let d_o = self.outer.second(&y)?;
        Some(std::array::from_fn(|l| {
            let chained: Mat3 = (0..3).map(|m| d_o[m] * ji[(l, m)]).sum();
            di[l] * jo + ji * chained
        }))
    }

    fn name(&self) -> String {
        format!("{} ∘ {}", self.outer.name(), self.inner.name())
    }
}

/// `ψ⁻¹`, with Jacobian `J(ψ⁻¹(y))⁻¹`.
pub struct Inverse(pub Diffeo);

impl Diffeomorphism for Inverse {
    fn forward(&self, y: &Vec3) -> Vec3 {
        self.0.inverse(y)
    }

    fn inverse(&self, x: &Vec3) -> Vec3 {
        self.0.forward(x)
    }

    fn jacobian(&self, y: &Vec3) -> Mat3 {
        let j = self.0.jacobian(&self.0.inverse(y));
        j.try_inverse()
            .unwrap_or_else(|| Mat3::from_element(f64::NAN))
    }

    fn name(&self) -> String {
        format!("inverse({})", self.0.name())
    }
}

/// `u(x) = J(x)·v(ψ(x))`.
pub struct Pullback {
    pub psi: Diffeo,
    pub v: Field,
    pub fd_step: f64,
}

impl VectorField for Pullback {
    fn value(&self, x: &Vec3) -> CVec3 {
        complexify_mat(&self.psi.jacobian(x)) * self.v.value(&self.psi.forward(x))
    }

    fn jacobian(&self, x: &Vec3) -> CMat3 {
        let y = self.psi.forward(x);
        let j = self.psi.jacobian(x);
        let d = second_derivatives(self.psi.as_ref(), x, self.fd_step);
        let vy = self.v.value(&y);
        let jc = complexify_mat(&j);
        let mut t = CMat3::zeros();
        for i in 0..3 {
            // column i: ∂ᵢJ · v
            t.set_column(i, &(complexify_mat(&d[i]) * vy));
        }
        t + jc * self.v.jacobian(&y) * jc.transpose()
    }

    fn name(&self) -> String {
        format!("pullback({}, {})", self.psi.name(), self.v.name())
    }
}

pub fn pullback_field(psi: Diffeo, v: Field) -> Field {
    Arc::new(Pullback {
        psi,
        v,
        fd_step: DIFFEO_FD_STEP,
    })
}

fn checked_det(j: &Mat3, x: &Vec3) -> Result<f64> {
    let det = j.determinant();
    if !(det.abs() >= 1e-12) {
        return Err(Error::Degenerate(format!("det J = {det:e} at {x:?}")));
    }
    Ok(det)
}

/// `|rot_x u(x) − det J · J⁻ᵀ (rot_y v)(ψ(x))|` for `u = pullback(ψ, v)`.
pub fn rot_transform_residual(psi: &Diffeo, v: &Field, x: &Vec3) -> Result<f64> {
    let j = psi.jacobian(x);
    let det = checked_det(&j, x)?;
    let u = pullback_field(psi.clone(), v.clone());
    let lhs = curl_of(&u.jacobian(x));
    let jit = j.try_inverse().expect("nonzero determinant").transpose();
    let rhs = complexify_mat(&(jit * det)) * curl_of(&v.jacobian(&psi.forward(x)));
    Ok((lhs - rhs).norm())
}

/// `s̃(y) = Jᵀ s J / |det J|` at `x = ψ⁻¹(y)`, with `∂_y s̃` by the chain rule.
pub struct TransformedCoefficient {
    pub psi: Diffeo,
    pub s: Arc<dyn CoefficientField>,
    pub fd_step: f64,
    pub beta: (f64, f64),
}

impl TransformedCoefficient {
    fn at_source(&self, x: &Vec3) -> Mat3 {
        let j = self.psi.jacobian(x);
        let m = j.transpose() * self.s.value(x) * j / j.determinant().abs();
        (m + m.transpose()) * 0.5
    }
}

impl CoefficientField for TransformedCoefficient {
    fn value(&self, y: &Vec3) -> Mat3 {
        self.at_source(&self.psi.inverse(y))
    }

    fn derivative(&self, y: &Vec3) -> [Mat3; 3] {
        let x = self.psi.inverse(y);
        let j = self.psi.jacobian(&x);
        let ji = j
            .try_inverse()
            .unwrap_or_else(|| Mat3::from_element(f64::NAN));
        let adet = j.determinant().abs();
        let s = self.s.value(&x);
        let ds = self.s.derivative(&x);
        let d = second_derivatives(self.psi.as_ref(), &x, self.fd_step);
        let st = j.transpose() * s * j / adet;
        // ∂ s̃ / ∂x_l
        let dx: [Mat3; 3] = std::array::from_fn(|l| {
            let dlog = (ji * d[l]).trace();
            (d[l].transpose() * s * j + j.transpose() * ds[l] * j + j.transpose() * s * d[l]) / adet
                - st * dlog
        });
        // ∂x_l/∂y_i = (J⁻ᵀ)_{li}
        let jit = ji.transpose();
        std::array::from_fn(|i| (0..3).map(|l| dx[l] * jit[(l, i)]).sum())
    }

    fn bounds(&self) -> (f64, f64) {
        self.beta
    }

    fn name(&self) -> String {
        format!("transformed({}, {})", self.s.name(), self.psi.name())
    }
}

/// `s̃` with bounds from the extreme eigenvalues at `ψ(samples)`.
pub fn coefficient_transform(
    psi: Diffeo,
    s: Arc<dyn CoefficientField>,
    samples: &[Vec3],
) -> Result<TransformedCoefficient> {
    let mut t = TransformedCoefficient {
        psi,
        s,
        fd_step: DIFFEO_FD_STEP,
        beta: (0.0, f64::INFINITY),
    };
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for x in samples {
        let e = SymMatrix3::from_matrix(&t.at_source(x)).eigenvalues();
        if !(e[2] > 0.0 && e[0].is_finite()) {
            return Err(Error::Degenerate(format!(
                "transformed coefficient has eigenvalue {} at {x:?}",
                e[2]
            )));
        }
        lo = lo.min(e[2]);
        hi = hi.max(e[0]);
    }
    if !samples.is_empty() {
        t.beta = (lo, hi);
    }
    Ok(t)
}

/// `|div_x(su)(x) − |det J| div_y(s̃v)(ψ(x))|`.
pub fn div_transform_residual(
    psi: &Diffeo,
    s: &Arc<dyn CoefficientField>,
    v: &Field,
    x: &Vec3,
) -> Result<f64> {
    let j = psi.jacobian(x);
    let det = checked_det(&j, x)?;
    let u = pullback_field(psi.clone(), v.clone());
    let lhs = div_weighted(s.as_ref(), u.as_ref(), x);
    let st = TransformedCoefficient {
        psi: psi.clone(),
        s: s.clone(),
        fd_step: DIFFEO_FD_STEP,
        beta: (0.0, f64::INFINITY),
    };
    let rhs = div_weighted(&st, v.as_ref(), &psi.forward(x)) * det.abs();
    Ok((lhs - rhs).norm())
}

/// Largest spectral norms of `J` and `J⁻¹` over samples.
pub fn jacobian_bounds(psi: &dyn Diffeomorphism, samples: &[Vec3]) -> (f64, f64) {
    samples
        .par_iter()
        .map(|x| {
            let sv = psi.jacobian(x).singular_values();
            let max = sv.max();
            let min = sv.min();
            (max, 1.0 / min)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEquivalence {
    /// `‖v‖_{F(dst, s̃)} / ‖u‖_{F(src, s)}`
    pub ratio_f: f64,
    pub ratio_sob: f64,
    /// `(1 + max‖J‖)(1 + max‖J⁻¹‖)`
    pub bound_c: f64,
    pub src_f: FNormParts,
    pub dst_f: FNormParts,
    pub src_sob: SobolevParts,
    pub dst_sob: SobolevParts,
}

impl NormEquivalence {
    pub fn within_bound(&self) -> bool {
        let c = self.bound_c;
        [self.ratio_f, self.ratio_sob]
            .iter()
            .all(|r| *r >= 1.0 / c && *r <= c)
    }
}

/// Compares norms of `v` on the image patch with those of its pullback on
/// the source patch. `patch_dst` must be the image of `patch_src`.
pub fn norm_equivalence_probe(
    psi: &Diffeo,
    s: &Arc<dyn CoefficientField>,
    v: &Field,
    patch_src: &DomainPatch,
    patch_dst: &DomainPatch,
) -> Result<NormEquivalence> {
    let nodes = patch_src.volume_nodes();
    let samples: Vec<Vec3> = nodes.iter().map(|n| n.x).collect();
    let mapped = {
        let mut acc = CompensatedSum::default();
        for n in &nodes {
            acc.add(n.weight * psi.jacobian(&n.x).determinant().abs());
        }
        acc.value()
    };
    let vol = patch_dst.volume();
    if (vol - mapped).abs() > 1e-6 * vol.max(1.0) {
        return Err(Error::Precondition(format!(
            "destination patch volume {vol} does not match the mapped source volume {mapped}"
        )));
    }
    let st = coefficient_transform(psi.clone(), s.clone(), &samples)?;
    let u = pullback_field(psi.clone(), v.clone());
    let src_f = f_norm_parts(u.as_ref(), s.as_ref(), patch_src);
    let dst_f = f_norm_parts(v.as_ref(), &st, patch_dst);
    let src_sob = sobolev_parts(u.as_ref(), patch_src);
    let dst_sob = sobolev_parts(v.as_ref(), patch_dst);
    let (jmax, jimax) = jacobian_bounds(psi.as_ref(), &samples);
    Ok(NormEquivalence {
        ratio_f: dst_f.norm() / src_f.norm(),
        ratio_sob: dst_sob.norm() / src_sob.norm(),
        bound_c: (1.0 + jmax) * (1.0 + jimax),
        src_f,
        dst_f,
        src_sob,
        dst_sob,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct W23Probe {
    pub level: usize,
    pub sup_j: f64,
    pub int_d2_cubed: f64,
}

/// Radial breaks `[0, ρ2^{-L}, …, ρ/2, ρ]`.
pub fn graded_breaks(rho: f64, level: usize) -> Vec<f64> {
    let mut b = vec![0.0];
    b.extend((0..=level).rev().map(|k| rho * 0.5f64.powi(k as i32)));
    b
}

/// `sup |J|` and `∫|D²ψ|³` over the patch, with radial panels graded towards
/// the axis. Gauss nodes never touch `x' = 0`.
pub fn w23_membership_probe(
    psi: &dyn Diffeomorphism,
    patch: &DomainPatch,
    level: usize,
) -> W23Probe {
    let q = patch.quad;
    let radial = gauss_on_breaks(&graded_breaks(patch.rho, level), q.order.max(2) * 2);
    let angular = q.angular_rule();
    let height = q.height_rule();
    let cells: Vec<(f64, f64)> = radial
        .par_iter()
        .map(|&(r, wr)| {
            let mut acc = CompensatedSum::default();
            let mut sup = 0.0f64;
            for &(t, wt) in &angular {
                let xp = crate::Vec2::new(r * t.cos(), r * t.sin());
                let base = patch.graph.value(&xp);
                for &(s, ws) in &height {
                    let x = Vec3::new(xp[0], xp[1], base + s * patch.height);
                    sup = sup.max(psi.jacobian(&x).norm());
                    let d = second_derivatives(psi, &x, DIFFEO_FD_STEP);
                    let sq: f64 = d.iter().map(|m| m.norm_squared()).sum();
                    acc.add(wr * r * wt * ws * patch.height * sq.powf(1.5));
                }
            }
            (acc.value(), sup)
        })
        .collect();
    let mut total = CompensatedSum::default();
    let mut sup_j = 0.0f64;
    for (v, s) in cells {
        total.add(v);
        sup_j = sup_j.max(s);
    }
    W23Probe {
        level,
        sup_j,
        int_d2_cubed: total.value(),
    }
}

/// Relative change between successive levels.
pub fn successive_changes(probes: &[W23Probe]) -> Vec<f64> {
    probes
        .windows(2)
        .map(|w| {
            (w[1].int_d2_cubed - w[0].int_d2_cubed).abs()
                / w[0].int_d2_cubed.abs().max(f64::MIN_POSITIVE)
        })
        .collect()
}
