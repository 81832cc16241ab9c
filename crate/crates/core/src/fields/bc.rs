//! Fields that satisfy `u_τ = 0` or `(su)_ν = 0` on the graph `x₃ = φ(x')`
//! identically, built from `N = (∂₁φ, ∂₂φ, −1)` extended constantly in `x₃`.

use std::sync::Arc;

use super::{Coefficient, Field, VectorField};
use crate::geometry::GraphFunction;
use crate::{complexify_vec, CMat3, CVec3, Complex64, Error, Mat3, Result, Vec2, Vec3};

fn normal_jet(phi: &GraphFunction, x: &Vec3) -> (Vec3, [Vec3; 3]) {
    let xp = Vec2::new(x[0], x[1]);
    let g = phi.gradient(&xp);
    let h = phi.hessian(&xp);
    let n = Vec3::new(g[0], g[1], -1.0);
    // ∂ⱼN = (∂ⱼ∂₁φ, ∂ⱼ∂₂φ, 0) for j = 1, 2 and zero for j = 3.
    let dn = [
        Vec3::new(h[(0, 0)], h[(1, 0)], 0.0),
        Vec3::new(h[(0, 1)], h[(1, 1)], 0.0),
        Vec3::zeros(),
    ];
    (n, dn)
}

/// `⟨g, N⟩ N / |N|²`.
pub struct TangentialZero {
    pub g: Field,
    pub phi: GraphFunction,
}

impl VectorField for TangentialZero {
    fn value(&self, x: &Vec3) -> CVec3 {
        let (n, _) = normal_jet(&self.phi, x);
        let nc = complexify_vec(&n);
        nc * (self.g.value(x).dot(&nc) / n.norm_squared())
    }

    fn jacobian(&self, x: &Vec3) -> CMat3 {
        let (n, dn) = normal_jet(&self.phi, x);
        let nc = complexify_vec(&n);
        let g = self.g.value(x);
        let jg = self.g.jacobian(x);
        let q = n.norm_squared();
        let a = g.dot(&nc);
        let mut out = CMat3::zeros();
        for j in 0..3 {
            let dnj = complexify_vec(&dn[j]);
            let da = jg.column(j).dot(&nc) + g.dot(&dnj);
            let dq = 2.0 * n.dot(&dn[j]);
            let col = nc * (da / q) + dnj * (a / q) - nc * (a * dq / (q * q));
            out.set_column(j, &col);
        }
        out
    }

    fn name(&self) -> String {
        format!("tangential_zero({})", self.g.name())
    }
}

/// `g − (⟨sg, N⟩ / |N|²)·s⁻¹N`, so that `⟨s w, N⟩ = 0`.
pub struct NormalZero {
    pub g: Field,
    pub s: Coefficient,
    pub phi: GraphFunction,
}

fn inverse(s: &Mat3) -> Option<Mat3> {
    s.try_inverse()
        .filter(|inv| inv.iter().all(|v| v.is_finite()))
}

impl VectorField for NormalZero {
    fn value(&self, x: &Vec3) -> CVec3 {
        let (n, _) = normal_jet(&self.phi, x);
        let s = self.s.value(x);
        let Some(si) = inverse(&s) else {
            return CVec3::from_element(Complex64::new(f64::NAN, f64::NAN));
        };
        let g = self.g.value(x);
        let b = g.dot(&complexify_vec(&(s * n)));
        g - complexify_vec(&(si * n)) * (b / n.norm_squared())
    }

    fn jacobian(&self, x: &Vec3) -> CMat3 {
        let (n, dn) = normal_jet(&self.phi, x);
        let s = self.s.value(x);
        let Some(si) = inverse(&s) else {
            return CMat3::from_element(Complex64::new(f64::NAN, f64::NAN));
        };
        let ds = self.s.derivative(x);
        let g = self.g.value(x);
        let jg = self.g.jacobian(x);
        let q = n.norm_squared();
        let sn = s * n;
        let m = si * n;
        let b = g.dot(&complexify_vec(&sn));
        let mc = complexify_vec(&m);
        let mut out = jg;
        for j in 0..3 {
            let dsn = ds[j] * n + s * dn[j];
            let db = jg.column(j).dot(&complexify_vec(&sn)) + g.dot(&complexify_vec(&dsn));
            let dm = -(si * ds[j] * m) + si * dn[j];
            let dq = 2.0 * n.dot(&dn[j]);
            let col = mc * (db / q) + complexify_vec(&dm) * (b / q) - mc * (b * dq / (q * q));
            let cur = out.column(j) - col;
            out.set_column(j, &cur);
        }
        out
    }

    fn name(&self) -> String {
        format!("normal_zero({}, {})", self.g.name(), self.s.name())
    }
}

/// `(x₃ − φ(x'))·g`, which vanishes on the graph.
pub struct HeightWeighted {
    pub g: Field,
    pub phi: GraphFunction,
}

impl VectorField for HeightWeighted {
    fn value(&self, x: &Vec3) -> CVec3 {
        let d = x[2] - self.phi.value(&Vec2::new(x[0], x[1]));
        self.g.value(x) * Complex64::from(d)
    }

    fn jacobian(&self, x: &Vec3) -> CMat3 {
        let xp = Vec2::new(x[0], x[1]);
        let d = x[2] - self.phi.value(&xp);
        let grad = self.phi.gradient(&xp);
        let dd = complexify_vec(&Vec3::new(-grad[0], -grad[1], 1.0));
        self.g.jacobian(x) * Complex64::from(d) + self.g.value(x) * dd.transpose()
    }

    fn name(&self) -> String {
        format!("height_weighted({})", self.g.name())
    }
}

pub fn make_tangential_zero(g: Field, phi: &GraphFunction) -> Field {
    Arc::new(TangentialZero {
        g,
        phi: phi.clone(),
    })
}

/// Fails when `s` is singular somewhere on `samples`.
pub fn make_normal_zero(
    g: Field,
    s: Coefficient,
    phi: &GraphFunction,
    samples: &[Vec3],
) -> Result<Field> {
    for x in samples {
        if inverse(&s.value(x)).is_none() || s.value(x).determinant().abs() < 1e-14 {
            return Err(Error::Degenerate(format!(
                "coefficient {} is singular at {x:?}",
                s.name()
            )));
        }
    }
    Ok(Arc::new(NormalZero {
        g,
        s,
        phi: phi.clone(),
    }))
}
