//! Ascending smooth convex approximations `φ_α = Mα + ω_α * φ` of a
//! Lipschitz graph.
//!
//! The convolution is evaluated with one fixed discrete rule
//! `Σ wᵢ φ(x' − α zᵢ)` whose weights are nonnegative and sum to one. Every
//! property checked below (Lipschitz bound, convexity, monotonicity in `α`)
//! is inherited exactly by such a convex combination, so the discrete family
//! satisfies them up to rounding rather than up to quadrature error.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::io::Write;
use std::sync::{Arc, Mutex};

use rand::RngExt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fields::ScalarField;
use crate::geometry::{convexity_probe, DomainPatch, Graph, GraphFunction};
use crate::quadrature::{compensated_sum, composite_gauss};
use crate::rng::seeded;
use crate::{Error, Mat2, Result, Vec2};

fn bump(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r * r)).exp()
    }
}

/// Polar rule for the kernel support: composite Gauss–Legendre in the
/// radius, an even number of equally spaced angles so that the rule is
/// symmetric under `z ↦ −z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelRule {
    pub radial_panels: usize,
    pub order: usize,
    pub angles: usize,
}

impl Default for KernelRule {
    fn default() -> Self {
        Self {
            radial_panels: 16,
            order: 8,
            angles: 16,
        }
    }
}

/// Radial bump `exp(−1/(1−|z/a|²))` on `B_a`, normalised to unit mass.
#[derive(Debug, Clone)]
pub struct MollifierKernel {
    pub support_radius: f64,
    pub rule: KernelRule,
    /// Continuous normalisation constant applied to the bump.
    scale: f64,
    /// `(zᵢ, wᵢ)` with `Σ wᵢ = 1`.
    nodes: Vec<(Vec2, f64)>,
    /// Raw discrete mass before normalisation.
    pub raw_mass: f64,
    pub first_abs_moment: f64,
}

fn raw_nodes(a: f64, rule: &KernelRule) -> Vec<(Vec2, f64)> {
    let radial = composite_gauss(0.0, a, rule.radial_panels, rule.order);
    let dt = TAU / rule.angles as f64;
    let mut out = Vec::with_capacity(radial.len() * rule.angles);
    for &(r, wr) in &radial {
        let w = bump(r / a) * r * wr * dt;
        for k in 0..rule.angles {
            let t = (k as f64 + 0.5) * dt;
            out.push((Vec2::new(r * t.cos(), r * t.sin()), w));
        }
    }
    out
}

impl MollifierKernel {
    pub fn new(support_radius: f64, rule: KernelRule) -> Result<Self> {
        if !(support_radius > 0.0 && support_radius.is_finite()) {
            return Err(Error::Precondition(format!(
                "kernel support radius {support_radius} must be positive"
            )));
        }
        if rule.angles < 2 || rule.angles % 2 != 0 || rule.radial_panels == 0 || rule.order == 0 {
            return Err(Error::Config(format!(
                "kernel rule {rule:?} needs an even angle count and nonempty radius rule"
            )));
        }
        let nodes = raw_nodes(support_radius, &rule);
        let raw_mass = compensated_sum(nodes.iter().map(|n| n.1));
        // Self-test: the radial rule must have converged.
        let finer = KernelRule {
            radial_panels: 2 * rule.radial_panels,
            ..rule
        };
        let fine_mass = compensated_sum(raw_nodes(support_radius, &finer).iter().map(|n| n.1));
        if ((raw_mass - fine_mass) / fine_mass).abs() > 1e-9 {
            return Err(Error::SelfTest(format!(
                "kernel mass {raw_mass} differs from refined {fine_mass}"
            )));
        }
        let nodes: Vec<(Vec2, f64)> = nodes.into_iter().map(|(z, w)| (z, w / raw_mass)).collect();
        let first_abs_moment = compensated_sum(nodes.iter().map(|(z, w)| w * z.norm()));
        Ok(Self {
            support_radius,
            rule,
            scale: 1.0 / raw_mass,
            nodes,
            raw_mass,
            first_abs_moment,
        })
    }

    pub fn standard(support_radius: f64) -> Result<Self> {
        Self::new(support_radius, KernelRule::default())
    }

    pub fn evaluate(&self, z: &Vec2) -> f64 {
        self.scale * bump(z.norm() / self.support_radius)
    }

    /// Discrete mass, one up to rounding.
    pub fn mass(&self) -> f64 {
        compensated_sum(self.nodes.iter().map(|n| n.1))
    }

    pub fn nodes(&self) -> &[(Vec2, f64)] {
        &self.nodes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftConstant {
    pub value: f64,
    /// `K·∫ω|z| = 0`: every positive shift is admissible.
    pub degenerate: bool,
}

/// `K · first_abs_moment · (1 + margin)`.
pub fn shift_constant(k: f64, kernel: &MollifierKernel, margin: f64) -> Result<ShiftConstant> {
    if !(margin > 0.0) {
        return Err(Error::Precondition(format!(
            "shift margin {margin} must be positive"
        )));
    }
    let value = k * kernel.first_abs_moment * (1.0 + margin);
    Ok(ShiftConstant {
        value,
        degenerate: value == 0.0,
    })
}

/// Memoised values of one `φ_α` keyed by the bit pattern of `x'`. Volume
/// quadrature revisits each `x'` once per height node.
#[derive(Debug, Default)]
struct JetCache(Mutex<HashMap<[u64; 2], Jet>>);

#[derive(Debug, Clone, Copy, Default)]
struct Jet {
    value: Option<f64>,
    gradient: Option<Vec2>,
    hessian: Option<Mat2>,
}

const JET_CACHE_LIMIT: usize = 1 << 16;

impl JetCache {
    fn get_or<T: Copy>(
        &self,
        x: &Vec2,
        slot: fn(&mut Jet) -> &mut Option<T>,
        compute: impl FnOnce() -> T,
    ) -> T {
        let key = [x[0].to_bits(), x[1].to_bits()];
        if let Some(v) = self
            .0
            .lock()
            .ok()
            .and_then(|mut m| m.get_mut(&key).and_then(|j| *slot(j)))
        {
            return v;
        }
        let v = compute();
        if let Ok(mut m) = self.0.lock() {
            if m.len() >= JET_CACHE_LIMIT {
                m.clear();
            }
            *slot(m.entry(key).or_default()) = Some(v);
        }
        v
    }
}

/// `φ_α` for one `α` as a graph.
#[derive(Debug)]
pub struct Mollified {
    base: GraphFunction,
    kernel: Arc<MollifierKernel>,
    alpha: f64,
    shift: f64,
    cache: JetCache,
}

impl Mollified {
    fn sum<T>(&self, x: &Vec2, zero: T, f: impl Fn(&Vec2) -> T) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        self.kernel
            .nodes
            .iter()
            .fold(zero, |acc, (z, w)| acc + f(&(x - z * self.alpha)) * *w)
    }
}

impl Graph for Mollified {
    fn value(&self, x: &Vec2) -> f64 {
        self.cache.get_or(
            x,
            |j| &mut j.value,
            || {
                let conv = compensated_sum(
                    self.kernel
                        .nodes
                        .iter()
                        .map(|(z, w)| w * self.base.value(&(x - z * self.alpha))),
                );
                self.shift * self.alpha + conv
            },
        )
    }

    fn gradient(&self, x: &Vec2) -> Vec2 {
        self.cache.get_or(
            x,
            |j| &mut j.gradient,
            || self.sum(x, Vec2::zeros(), |y| self.base.gradient(y)),
        )
    }

    fn hessian(&self, x: &Vec2) -> Mat2 {
        self.cache.get_or(
            x,
            |j| &mut j.hessian,
            || self.sum(x, Mat2::zeros(), |y| self.base.hessian(y)),
        )
    }

    fn lipschitz(&self, radius: f64) -> f64 {
        self.base
            .lipschitz(radius + self.alpha * self.kernel.support_radius)
    }

    fn has_hessian_oracle(&self) -> bool {
        self.base.has_hessian_oracle()
    }

    fn name(&self) -> String {
        format!("mollified({}, α={})", self.base.name(), self.alpha)
    }
}

#[derive(Debug, Clone)]
pub struct SmoothingFamily {
    pub base: GraphFunction,
    pub kernel: Arc<MollifierKernel>,
    pub shift_m: f64,
    pub shift_degenerate: bool,
    /// Lipschitz constant of the base on `B_{2ρ}`.
    pub lipschitz_k: f64,
    pub rho: f64,
    pub alphas: Vec<f64>,
}

impl SmoothingFamily {
    /// Kernel support is `ρ` so that `α·supp ω ⊂ B_ρ`.
    pub fn new(base: GraphFunction, rho: f64, margin: f64, alphas: Vec<f64>) -> Result<Self> {
        Self::with_kernel(
            base,
            Arc::new(MollifierKernel::standard(rho)?),
            rho,
            margin,
            alphas,
        )
    }

    pub fn with_kernel(
        base: GraphFunction,
        kernel: Arc<MollifierKernel>,
        rho: f64,
        margin: f64,
        alphas: Vec<f64>,
    ) -> Result<Self> {
        if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(Error::Precondition(format!(
                "alphas {alphas:?} must lie in (0, 1)"
            )));
        }
        if alphas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Precondition(format!(
                "alphas {alphas:?} must be strictly ascending"
            )));
        }
        let lipschitz_k = base.lipschitz(2.0 * rho);
        let shift = shift_constant(lipschitz_k, &kernel, margin)?;
        Ok(Self {
            base,
            kernel,
            shift_m: if shift.degenerate {
                margin
            } else {
                shift.value
            },
            shift_degenerate: shift.degenerate,
            lipschitz_k,
            rho,
            alphas,
        })
    }

    /// `M − K·∫ω|z|`, the guaranteed lower bound of `∂φ_α/∂α`.
    pub fn growth_floor(&self) -> f64 {
        self.shift_m - self.lipschitz_k * self.kernel.first_abs_moment
    }

    /// `M + K·∫ω|z|`, the slope of the union surrogate.
    pub fn union_rate(&self) -> f64 {
        self.shift_m + self.lipschitz_k * self.kernel.first_abs_moment
    }

    pub fn graph(&self, alpha: f64) -> GraphFunction {
        if alpha == 0.0 {
            return self.base.clone();
        }
        GraphFunction::new(Mollified {
            base: self.base.clone(),
            kernel: self.kernel.clone(),
            alpha,
            shift: self.shift_m,
            cache: JetCache::default(),
        })
    }
}

pub fn mollify_phi(family: &SmoothingFamily, alpha: f64, xprime: &Vec2) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Precondition(format!("alpha {alpha} outside (0, 1)")));
    }
    Ok(family.graph(alpha).value(xprime))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRow {
    pub alpha: f64,
    pub check_name: String,
    pub worst_value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub witness: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub base: String,
    pub shift_m: f64,
    pub shift_degenerate: bool,
    pub lipschitz_k: f64,
    pub first_abs_moment: f64,
    pub rows: Vec<FamilyRow>,
}

impl FamilyReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn check_passes(&self, name: &str) -> bool {
        self.rows
            .iter()
            .filter(|r| r.check_name == name)
            .all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<&FamilyRow> {
        self.rows.iter().filter(|r| !r.pass).collect()
    }

    /// Rows as CSV `alpha,check_name,worst_value,pass`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["alpha", "check_name", "worst_value", "pass"])?;
        for r in &self.rows {
            w.write_record([
                r.alpha.to_string(),
                r.check_name.clone(),
                r.worst_value.to_string(),
                r.pass.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn disc_samples(rho: f64, n: usize, seed: u64) -> Vec<Vec2> {
    let mut rng = seeded(seed);
    let mut out = vec![Vec2::zeros()];
    while out.len() < n.max(1) {
        let p = Vec2::new(rng.random_range(-rho..rho), rng.random_range(-rho..rho));
        if p.norm() < rho {
            out.push(p);
        }
    }
    out
}

fn pair_samples(rho: f64, n: usize, seed: u64) -> Vec<(Vec2, Vec2)> {
    let pts = disc_samples(rho, 2 * n + 1, seed ^ 0x9e37_79b9);
    pts[1..]
        .chunks(2)
        .filter(|c| c.len() == 2 && (c[0] - c[1]).norm() >= 0.01 * rho)
        .map(|c| (c[0], c[1]))
        .collect()
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Monotonicity, Lipschitz, convexity and nesting checks at every `α`,
/// plus the union surrogate `max(φ_α − φ) ≤ (M + K∫ω|z|)·α`.
pub fn family_checks(family: &SmoothingFamily, samples: usize, seed: u64) -> Result<FamilyReport> {
    if samples == 0 {
        return Err(Error::Precondition("family checks need samples ≥ 1".into()));
    }
    let pts = disc_samples(family.rho, samples, seed);
    let pairs = pair_samples(family.rho, samples, seed);
    let base_vals: Vec<f64> = pts.par_iter().map(|p| family.base.value(p)).collect();
    let mut prev_alpha = 0.0;
    let mut prev_vals = base_vals.clone();
    let mut rows = Vec::new();
    let k = family.lipschitz_k;
    for &alpha in &family.alphas {
        let g = family.graph(alpha);
        let vals: Vec<f64> = pts.par_iter().map(|p| g.value(p)).collect();
        let w = |i: usize| Some([pts[i][0], pts[i][1]]);

        let quot: Vec<f64> = vals
            .iter()
            .zip(&prev_vals)
            .map(|(a, b)| (a - b) / (alpha - prev_alpha))
            .collect();
        let i = argmin(&quot);
        let floor = family.growth_floor() - 1e-8;
        rows.push(FamilyRow {
            alpha,
            check_name: "monotonicity".into(),
            worst_value: quot[i],
            threshold: floor,
            pass: quot[i] >= floor && quot[i] > 0.0,
            witness: w(i),
        });

        let lips: Vec<f64> = pairs
            .par_iter()
            .map(|(a, b)| -((g.value(a) - g.value(b)).abs() / (a - b).norm()))
            .collect();
        let j = argmin(&lips);
        rows.push(FamilyRow {
            alpha,
            check_name: "lipschitz".into(),
            worst_value: -lips[j],
            threshold: k + 1e-8,
            pass: -lips[j] <= k + 1e-8,
            witness: pairs.get(j).map(|(a, _)| [a[0], a[1]]),
        });

        let conv = convexity_probe(&g, family.rho, samples, seed.wrapping_add(1))?;
        rows.push(FamilyRow {
            alpha,
            check_name: "convexity".into(),
            worst_value: conv.min_ratio,
            threshold: -1e-10,
            pass: conv.min_ratio >= -1e-10,
            witness: Some(conv.witness_y),
        });

        let nest: Vec<f64> = vals
            .iter()
            .zip(&base_vals)
            .zip(&prev_vals)
            .map(|((v, b), p)| (v - b).min(v - p))
            .collect();
        let n = argmin(&nest);
        rows.push(FamilyRow {
            alpha,
            check_name: "nesting".into(),
            worst_value: nest[n],
            threshold: 0.0,
            pass: nest[n] > 0.0,
            witness: w(n),
        });

        let gaps: Vec<f64> = vals.iter().zip(&base_vals).map(|(v, b)| -(v - b)).collect();
        let u = argmin(&gaps);
        let bound = family.union_rate() * alpha;
        rows.push(FamilyRow {
            alpha,
            check_name: "union_gap".into(),
            worst_value: -gaps[u],
            threshold: bound,
            pass: -gaps[u] <= bound * (1.0 + 1e-12) + 1e-14,
            witness: w(u),
        });

        prev_alpha = alpha;
        prev_vals = vals;
    }
    Ok(FamilyReport {
        base: family.base.name(),
        shift_m: family.shift_m,
        shift_degenerate: family.shift_degenerate,
        lipschitz_k: k,
        first_abs_moment: family.kernel.first_abs_moment,
        rows,
    })
}

/// Slope `c` of the least-squares fit `max(φ_α − φ) ≈ c·α` through the origin.
pub fn union_slope(report: &FamilyReport) -> f64 {
    let pts: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.check_name == "union_gap")
        .map(|r| (r.alpha, r.worst_value))
        .collect();
    let num: f64 = pts.iter().map(|(a, g)| a * g).sum();
    let den: f64 = pts.iter().map(|(a, _)| a * a).sum();
    num / den
}

/// `‖u‖_{L⁶} / ‖∇u‖_{L²}` over the patch.
pub fn sobolev_ratio_probe(patch: &DomainPatch, u: &dyn ScalarField) -> Result<f64> {
    let [l6, grad] = patch.integrate(|x| [u.value(x).norm().powi(6), u.gradient(x).norm_squared()]);
    if !(grad > 1e-300) {
        return Err(Error::Degenerate(format!(
            "{} has zero gradient on the patch",
            u.name()
        )));
    }
    Ok(l6.powf(1.0 / 6.0) / grad.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Cutoff, ScalarKind};
    use crate::quadrature::QuadratureSpec;
    use crate::{CVec3, Complex64, Vec3};
    use approx::assert_abs_diff_eq;

    fn g(s: &str) -> GraphFunction {
        GraphFunction::parse(s).unwrap()
    }

    /// Adaptive Simpson on `[a, b]`.
    fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 40)
    }

    /// Nested adaptive quadrature of `f` over the square `[−r, r]²`.
    fn adaptive_2d(f: &(dyn Fn(f64, f64) -> f64 + Sync), r: f64, tol: f64) -> f64 {
        let inner = |y: f64| adaptive(&|x| f(x, y), -r, r, tol);
        adaptive(&inner, -r, r, tol)
    }

    #[test]
    fn kernel_invariants() {
        let k = MollifierKernel::standard(1.0).unwrap();
        assert_abs_diff_eq!(k.mass(), 1.0, epsilon = 1e-14);
        let mut rng = seeded(1);
        for _ in 0..1000 {
            let z = Vec2::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
            let v = k.evaluate(&z);
            assert!(v >= 0.0);
            assert_eq!(v, k.evaluate(&-z));
            if z.norm() >= 1.0 {
                assert_eq!(v, 0.0);
            }
        }
        // Continuous mass of the normalised kernel.
        let mass = adaptive_2d(&|x, y| k.evaluate(&Vec2::new(x, y)), 1.0, 1e-12);
        assert!((mass - 1.0).abs() <= 1e-6, "{mass}");
        // Node set is symmetric under z ↦ −z.
        for (z, w) in k.nodes() {
            assert!(k
                .nodes()
                .iter()
                .any(|(y, v)| (y + z).norm() < 1e-14 && v == w));
        }
    }

    #[test]
    fn first_moment_matches_radial_reduction() {
        let k = MollifierKernel::standard(1.0).unwrap();
        let num = adaptive(&|r| bump(r) * r * r, 0.0, 1.0, 1e-14);
        let den = adaptive(&|r| bump(r) * r, 0.0, 1.0, 1e-14);
        assert_abs_diff_eq!(k.first_abs_moment, num / den, epsilon = 1e-10);
        let half = MollifierKernel::standard(0.5).unwrap();
        assert_abs_diff_eq!(
            half.first_abs_moment,
            0.5 * k.first_abs_moment,
            epsilon = 1e-14
        );
    }

    #[test]
    fn shift_constant_examples() {
        let k1 = MollifierKernel::standard(1.0).unwrap();
        let k = MollifierKernel::standard(0.5 / k1.first_abs_moment).unwrap();
        let s = shift_constant(1.0, &k, 0.1).unwrap();
        assert_abs_diff_eq!(s.value, 0.55, epsilon = 1e-12);
        assert!(!s.degenerate);
        let z = shift_constant(0.0, &k, 0.1).unwrap();
        assert_eq!(z.value, 0.0);
        assert!(z.degenerate);
        assert!(shift_constant(1.0, &k, 0.0).is_err());
    }

    #[test]
    fn mollify_examples() {
        let fam = SmoothingFamily::new(g("flat"), 1.0, 0.1, vec![0.1, 0.2]).unwrap();
        assert!(fam.shift_degenerate);
        assert_abs_diff_eq!(
            mollify_phi(&fam, 0.2, &Vec2::new(0.3, 0.1)).unwrap(),
            0.2 * fam.shift_m,
            epsilon = 1e-15
        );
        let lin = SmoothingFamily::new(g("linear 0.7 -0.4"), 1.0, 0.1, vec![0.1]).unwrap();
        let x = Vec2::new(0.2, -0.5);
        let expect = lin.base.value(&x) + lin.shift_m * 0.3;
        assert_abs_diff_eq!(mollify_phi(&lin, 0.3, &x).unwrap(), expect, epsilon = 1e-14);
        assert!(mollify_phi(&lin, 1.0, &x).is_err());
        assert!(mollify_phi(&lin, 0.0, &x).is_err());
    }

    #[test]
    fn cone_at_origin_matches_adaptive_oracle() {
        let fam = SmoothingFamily::new(g("abs"), 1.0, 0.1, vec![0.1]).unwrap();
        let k = &fam.kernel;
        let alpha = 0.1;
        let bump2 = |x: f64, y: f64| bump((x * x + y * y).sqrt());
        let mass = adaptive_2d(&bump2, 1.0, 1e-13);
        let conv = adaptive_2d(
            &|x, y| bump2(x, y) * alpha * (x * x + y * y).sqrt(),
            1.0,
            1e-13,
        ) / mass;
        let oracle = fam.shift_m * alpha + conv;
        let value = mollify_phi(&fam, alpha, &Vec2::zeros()).unwrap();
        assert!((value - oracle).abs() < 1e-8, "{value} {oracle}");
        assert!(k.first_abs_moment > 0.0);
    }

    #[test]
    fn derivatives_are_exact_for_the_discrete_family() {
        let fam = SmoothingFamily::new(g("ripple"), 1.0, 0.1, vec![0.2]).unwrap();
        let phi = fam.graph(0.2);
        for x in [Vec2::new(0.1, 0.3), Vec2::new(-0.5, 0.2)] {
            let fdg = crate::fd::gradient2(|y| phi.value(y), &x, 1e-3);
            assert_abs_diff_eq!(phi.gradient(&x), fdg, epsilon = 1e-9);
            let h = 1e-4;
            for j in 0..2 {
                let mut e = Vec2::zeros();
                e[j] = h;
                let col = (phi.gradient(&(x + e)) - phi.gradient(&(x - e))) / (2.0 * h);
                assert_abs_diff_eq!(phi.hessian(&x).column(j).into_owned(), col, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn cone_family_passes_all_checks() {
        let fam = SmoothingFamily::new(g("abs"), 1.0, 0.1, vec![0.05, 0.1, 0.2, 0.4]).unwrap();
        let r = family_checks(&fam, 400, 7).unwrap();
        assert!(r.all_pass(), "{:?}", r.failures());
        let slope = union_slope(&r);
        assert!(
            (slope / fam.union_rate() - 1.0).abs() < 0.2,
            "{slope} {}",
            fam.union_rate()
        );
    }

    #[test]
    fn flat_family_passes_trivially() {
        let fam = SmoothingFamily::new(g("flat"), 1.0, 0.1, vec![0.1, 0.2]).unwrap();
        assert!(family_checks(&fam, 100, 1).unwrap().all_pass());
    }

    #[test]
    fn nonconvex_wedge_fails_only_convexity() {
        let fam = SmoothingFamily::new(g("wedge 1"), 1.0, 0.1, vec![0.1, 0.2]).unwrap();
        let r = family_checks(&fam, 400, 3).unwrap();
        for name in ["monotonicity", "lipschitz", "nesting", "union_gap"] {
            assert!(r.check_passes(name), "{name}: {:?}", r.failures());
        }
        assert!(!r.check_passes("convexity"));
        assert!(r.failures().iter().all(|f| f.witness.is_some()));
    }

    #[test]
    fn csv_rows() {
        let fam = SmoothingFamily::new(g("abs"), 1.0, 0.1, vec![0.1, 0.2]).unwrap();
        let r = family_checks(&fam, 50, 1).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("alpha,check_name,worst_value,pass\n"));
        assert_eq!(text.lines().count(), 1 + r.rows.len());
    }

    #[test]
    fn bad_alphas_rejected() {
        for a in [vec![], vec![0.2, 0.1], vec![0.5, 1.0], vec![0.0, 0.1]] {
            assert!(SmoothingFamily::new(g("abs"), 1.0, 0.1, a).is_err());
        }
    }

    #[derive(Debug)]
    struct Localized(GraphFunction);

    impl ScalarField for Localized {
        fn value(&self, x: &Vec3) -> Complex64 {
            let c = Cutoff::standard(1.0);
            (c.eval(x) * (x[2] - self.0.value(&Vec2::new(x[0], x[1])))).into()
        }
    }

    #[test]
    fn sobolev_ratio() {
        let fam = SmoothingFamily::new(g("paraboloid"), 1.0, 0.1, vec![0.1, 0.2, 0.4]).unwrap();
        let q = QuadratureSpec::new(8, 2);
        let ratios: Vec<f64> = fam
            .alphas
            .iter()
            .map(|a| {
                let gph = fam.graph(*a);
                let patch = DomainPatch::new(gph.clone(), 1.0, 2.0, q);
                sobolev_ratio_probe(&patch, &Localized(gph)).unwrap()
            })
            .collect();
        assert!(ratios.iter().all(|r| r.is_finite() && *r > 0.0));
        let (lo, hi) = ratios
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(*r), h.max(*r)));
        assert!(hi / lo < 2.0, "{ratios:?}");
        let patch = DomainPatch::new(g("flat"), 1.0, 2.0, q);
        assert!(matches!(
            sobolev_ratio_probe(&patch, &ScalarKind::One),
            Err(Error::Degenerate(_))
        ));
        let _ = CVec3::zeros();
    }
}
