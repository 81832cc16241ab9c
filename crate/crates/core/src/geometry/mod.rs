//! Special Lipschitz graph domains `Ω = {x₃ > φ(x')}` and their boundary
//! geometry.

mod catalog;
mod ebc;

use std::fmt;
use std::sync::Arc;

use rand::RngExt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quadrature::{compensated_sum, QuadratureSpec};
use crate::rng::seeded;
use crate::{fd, Error, Mat2, Mat3, Result, Vec2, Vec3};

pub use catalog::{GraphKind, GRAPH_NAMES};
pub use ebc::{ebc_infimum, ebc_radius, ebc_radius_with, EbcResult, EbcSearch};

/// Default finite-difference step used when a graph has no derivative oracle.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// A scalar function on ℝ² describing the lower boundary of a graph domain.
///
/// Gradient and Hessian default to second-order central differences, so
/// implementors only override them when an exact oracle exists.
pub trait Graph: Send + Sync + fmt::Debug {
    fn value(&self, x: &Vec2) -> f64;

    fn gradient(&self, x: &Vec2) -> Vec2 {
        fd::central_gradient2(|y| self.value(y), x, self.fd_step())
    }

    fn hessian(&self, x: &Vec2) -> Mat2 {
        fd::central_hessian2(|y| self.value(y), x, self.fd_step())
    }

    /// Lipschitz constant on the disc `|x'| < radius`.
    fn lipschitz(&self, radius: f64) -> f64;

    fn fd_step(&self) -> f64 {
        DEFAULT_FD_STEP
    }

    fn has_hessian_oracle(&self) -> bool {
        false
    }

    fn name(&self) -> String {
        format!("{self:?}")
    }
}

/// Shared handle to a [`Graph`].
#[derive(Clone)]
pub struct GraphFunction(Arc<dyn Graph>);

impl fmt::Debug for GraphFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GraphFunction({})", self.0.name())
    }
}

impl GraphFunction {
    pub fn new<G: Graph + 'static>(g: G) -> Self {
        Self(Arc::new(g))
    }

    pub fn from_arc(g: Arc<dyn Graph>) -> Self {
        Self(g)
    }

    pub fn parse(spec: &str) -> Result<Self> {
        Ok(Self::new(spec.parse::<GraphKind>()?))
    }

    pub fn value(&self, x: &Vec2) -> f64 {
        self.0.value(x)
    }

    pub fn gradient(&self, x: &Vec2) -> Vec2 {
        self.0.gradient(x)
    }

    pub fn hessian(&self, x: &Vec2) -> Mat2 {
        self.0.hessian(x)
    }

    pub fn lipschitz(&self, radius: f64) -> f64 {
        self.0.lipschitz(radius)
    }

    pub fn has_hessian_oracle(&self) -> bool {
        self.0.has_hessian_oracle()
    }

    pub fn name(&self) -> String {
        self.0.name()
    }

    /// Same function with derivatives forced through central differences.
    pub fn without_oracles(&self, h: f64) -> Self {
        Self::new(FdOnly {
            inner: self.clone(),
            h,
        })
    }
}

#[derive(Debug)]
struct FdOnly {
    inner: GraphFunction,
    h: f64,
}

impl Graph for FdOnly {
    fn value(&self, x: &Vec2) -> f64 {
        self.inner.value(x)
    }
    fn lipschitz(&self, radius: f64) -> f64 {
        self.inner.lipschitz(radius)
    }
    fn fd_step(&self) -> f64 {
        self.h
    }
    fn name(&self) -> String {
        format!("fd({})", self.inner.name())
    }
}

/// `φ(y+z) + φ(y−z) − 2φ(y)`; zero for `z = 0`.
pub fn second_difference(phi: &GraphFunction, y: &Vec2, z: &Vec2) -> f64 {
    if z.norm() == 0.0 {
        return 0.0;
    }
    phi.value(&(y + z)) + phi.value(&(y - z)) - 2.0 * phi.value(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    /// Minimum of `second_difference / |z|²` over the sample.
    pub min_ratio: f64,
    pub witness_y: [f64; 2],
    pub witness_z: [f64; 2],
    pub samples: usize,
}

impl ConvexityReport {
    pub fn is_convex(&self, slack: f64) -> bool {
        self.min_ratio >= -slack
    }
}

/// Shortest admissible step length: below it, rounding in the second
/// difference dominates the `|z|²` normalisation.
const MIN_STEP_FRACTION: f64 = 0.05;

/// Random pairs `(y, z)` with `y ± z ∈ B_ρ` and `|z| ≥ 0.05ρ`.
pub fn sample_second_difference_pairs(rho: f64, samples: usize, seed: u64) -> Vec<(Vec2, Vec2)> {
    let mut rng = seeded(seed);
    let min_step = MIN_STEP_FRACTION * rho;
    let mut out = Vec::with_capacity(samples);
    while out.len() < samples {
        let y = Vec2::new(rng.random_range(-rho..rho), rng.random_range(-rho..rho));
        if y.norm() >= rho {
            continue;
        }
        let th = rng.random_range(0.0..std::f64::consts::TAU);
        let d = Vec2::new(th.cos(), th.sin());
        let yd = y.dot(&d);
        let t_max = -yd.abs() + (yd * yd + rho * rho - y.norm_squared()).sqrt();
        if t_max <= min_step {
            continue;
        }
        let t = rng.random_range(min_step..t_max);
        out.push((y, d * t));
    }
    out
}

pub fn convexity_probe(
    phi: &GraphFunction,
    rho: f64,
    samples: usize,
    seed: u64,
) -> Result<ConvexityReport> {
    if samples == 0 {
        return Err(Error::Precondition(
            "convexity probe needs samples ≥ 1".into(),
        ));
    }
    let pairs = sample_second_difference_pairs(rho, samples, seed);
    let ratios: Vec<f64> = pairs
        .par_iter()
        .map(|(y, z)| second_difference(phi, y, z) / z.norm_squared())
        .collect();
    let mut best = 0;
    for (i, r) in ratios.iter().enumerate() {
        if *r < ratios[best] {
            best = i;
        }
    }
    let (y, z) = pairs[best];
    Ok(ConvexityReport {
        min_ratio: ratios[best],
        witness_y: [y[0], y[1]],
        witness_z: [z[0], z[1]],
        samples,
    })
}

/// Outward unit normal `(∂₁φ, ∂₂φ, −1)/√(1+|∇φ|²)`.
pub fn unit_normal(phi: &GraphFunction, xp: &Vec2) -> Vec3 {
    let g = phi.gradient(xp);
    Vec3::new(g[0], g[1], -1.0) / (1.0 + g.norm_squared()).sqrt()
}

/// Unnormalised normal `N = (∂₁φ, ∂₂φ, −1)`.
pub fn normal_vector(phi: &GraphFunction, xp: &Vec2) -> Vec3 {
    let g = phi.gradient(xp);
    Vec3::new(g[0], g[1], -1.0)
}

/// Tangent vectors `τ₁ = (1, 0, ∂₁φ)`, `τ₂ = (0, 1, ∂₂φ)`.
pub fn tangents(phi: &GraphFunction, xp: &Vec2) -> [Vec3; 2] {
    let g = phi.gradient(xp);
    [Vec3::new(1.0, 0.0, g[0]), Vec3::new(0.0, 1.0, g[1])]
}

/// Weingarten map of the boundary at `(x', φ(x'))`.
pub fn weingarten(phi: &GraphFunction, xp: &Vec2) -> Mat3 {
    let g = phi.gradient(xp);
    let h = phi.hessian(xp);
    let c = 1.0 / (1.0 + g.norm_squared()).sqrt();
    let mixed = 0.5 * (h[(0, 1)] + h[(1, 0)]);
    Mat3::new(
        c * h[(0, 0)],
        c * mixed,
        0.0,
        c * mixed,
        c * h[(1, 1)],
        0.0,
        0.0,
        0.0,
        0.0,
    )
}

/// Frame matrix `M` with `det M = 1 + |∇φ|²`; `(Mu)₃ = 0` iff `u ⊥ ν`.
pub fn boundary_frame(phi: &GraphFunction, xp: &Vec2) -> Mat3 {
    let g = phi.gradient(xp);
    Mat3::new(1.0, 0.0, g[0], 0.0, 1.0, g[1], -g[0], -g[1], 1.0)
}

/// Surface measure density `√(1+|∇φ|²)` of the graph parameterisation.
pub fn area_element(phi: &GraphFunction, xp: &Vec2) -> f64 {
    (1.0 + phi.gradient(xp).norm_squared()).sqrt()
}

/// Volume quadrature node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeNode {
    pub x: Vec3,
    pub weight: f64,
}

/// Boundary quadrature node on `x₃ = φ(x')`. The weight is with respect to
/// `dx'`; multiply by `area` for `dS`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceNode {
    pub xp: Vec2,
    pub x: Vec3,
    pub weight: f64,
    pub area: f64,
    /// Outward unit normal.
    pub normal: Vec3,
}

/// `Ω ∩ {|x'| < ρ, x₃ < φ(x') + height}` with its quadrature.
///
/// Volume nodes come from the map `(x', t) ↦ (x', φ(x') + t·height)`, so they
/// conform exactly to the curved boundary.
#[derive(Debug, Clone)]
pub struct DomainPatch {
    pub graph: GraphFunction,
    pub rho: f64,
    pub height: f64,
    pub quad: QuadratureSpec,
}

impl DomainPatch {
    pub fn new(graph: GraphFunction, rho: f64, height: f64, quad: QuadratureSpec) -> Self {
        Self {
            graph,
            rho,
            height,
            quad,
        }
    }

    pub fn with_quadrature(&self, quad: QuadratureSpec) -> Self {
        Self {
            quad,
            ..self.clone()
        }
    }

    pub fn with_graph(&self, graph: GraphFunction) -> Self {
        Self {
            graph,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite())
            || !(self.height > 0.0 && self.height.is_finite())
        {
            return Err(Error::Degenerate(format!(
                "patch with rho={} height={} has no interior",
                self.rho, self.height
            )));
        }
        self.quad.validate()
    }

    /// Exact volume `πρ²·height`.
    pub fn volume(&self) -> f64 {
        std::f64::consts::PI * self.rho * self.rho * self.height
    }

    pub fn volume_nodes(&self) -> Vec<VolumeNode> {
        let disc = self.quad.disc_rule(self.rho);
        let heights = self.quad.height_rule();
        let columns: Vec<(f64, f64, f64, f64)> = disc
            .par_iter()
            .map(|(xp, w)| (xp[0], xp[1], self.graph.value(&Vec2::new(xp[0], xp[1])), *w))
            .collect();
        let mut nodes = Vec::with_capacity(columns.len() * heights.len());
        for (x1, x2, base, w) in columns {
            for &(t, wt) in &heights {
                nodes.push(VolumeNode {
                    x: Vec3::new(x1, x2, base + t * self.height),
                    weight: w * wt * self.height,
                });
            }
        }
        nodes
    }

    pub fn surface_nodes(&self) -> Vec<SurfaceNode> {
        self.quad
            .disc_rule(self.rho)
            .par_iter()
            .map(|(p, w)| {
                let xp = Vec2::new(p[0], p[1]);
                let g = self.graph.gradient(&xp);
                let area = (1.0 + g.norm_squared()).sqrt();
                SurfaceNode {
                    xp,
                    x: Vec3::new(p[0], p[1], self.graph.value(&xp)),
                    weight: *w,
                    area,
                    normal: Vec3::new(g[0], g[1], -1.0) / area,
                }
            })
            .collect()
    }

    /// `∫_patch f dx` for a vector of `N` integrands.
    pub fn integrate<const N: usize, F>(&self, f: F) -> [f64; N]
    where
        F: Fn(&Vec3) -> [f64; N] + Sync,
    {
        let nodes = self.volume_nodes();
        integrate_nodes(&nodes, |n| {
            let v = f(&n.x);
            v.map(|a| a * n.weight)
        })
    }

    /// `∫_{∂Ω ∩ patch} f dS`.
    pub fn integrate_surface<const N: usize, F>(&self, f: F) -> [f64; N]
    where
        F: Fn(&SurfaceNode) -> [f64; N] + Sync,
    {
        let nodes = self.surface_nodes();
        integrate_nodes(&nodes, |n| {
            let v = f(n);
            let w = n.weight * n.area;
            v.map(|a| a * w)
        })
    }

    /// Known-integral self-test: volume and `∫|x'|²` must be reproduced.
    pub fn self_test(&self) -> Result<()> {
        self.validate()?;
        let [vol, m2] = self.integrate(|x| [1.0, x[0] * x[0] + x[1] * x[1]]);
        let exact_m2 = self.height * std::f64::consts::PI * self.rho.powi(4) / 2.0;
        let e1 = (vol - self.volume()).abs() / self.volume();
        let e2 = (m2 - exact_m2).abs() / exact_m2;
        // One-point panels miss the second moment by exactly 0.5/n².
        let tol = if self.quad.order >= 2 {
            1e-10
        } else {
            1.0 / (self.quad.resolution as f64).powi(2)
        };
        if e1 > 1e-10 || e2 > tol {
            return Err(Error::SelfTest(format!(
                "patch volume error {e1:e}, second moment error {e2:e}"
            )));
        }
        Ok(())
    }
}

pub(crate) fn integrate_nodes<T, const N: usize, F>(nodes: &[T], f: F) -> [f64; N]
where
    T: Sync,
    F: Fn(&T) -> [f64; N] + Sync,
{
    let vals: Vec<[f64; N]> = nodes.par_iter().map(&f).collect();
    std::array::from_fn(|k| compensated_sum(vals.iter().map(|v| v[k])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn g(s: &str) -> GraphFunction {
        GraphFunction::parse(s).unwrap()
    }

    #[test]
    fn second_difference_examples() {
        let z = Vec2::new(1.0, 0.0);
        assert_abs_diff_eq!(
            second_difference(&g("paraboloid"), &Vec2::zeros(), &z),
            1.0,
            epsilon = 1e-15
        );
        // |x'|² (not halved) gives 2
        let p2 = GraphFunction::new(GraphKind::Paraboloid { a: 2.0 });
        assert_abs_diff_eq!(
            second_difference(&p2, &Vec2::zeros(), &z),
            2.0,
            epsilon = 1e-15
        );
        let lin = g("linear 0.7 -1.3");
        assert_abs_diff_eq!(
            second_difference(&lin, &Vec2::new(0.3, 0.1), &Vec2::new(-0.2, 0.5)),
            0.0,
            epsilon = 1e-15
        );
        let cone = g("rcone 1");
        for t in [1.0, 0.1, 0.01] {
            let d = second_difference(&cone, &Vec2::zeros(), &Vec2::new(t, 0.0));
            assert_abs_diff_eq!(d, -2.0 * t, epsilon = 1e-15);
        }
        assert_eq!(
            second_difference(&cone, &Vec2::new(0.2, 0.0), &Vec2::zeros()),
            0.0
        );
    }

    #[test]
    fn convexity_probe_examples() {
        let r = convexity_probe(&g("paraboloid"), 1.0, 2000, 1).unwrap();
        assert_abs_diff_eq!(r.min_ratio, 1.0, epsilon = 1e-12);
        let r = convexity_probe(&g("linear 1 2"), 1.0, 2000, 1).unwrap();
        assert_abs_diff_eq!(r.min_ratio, 0.0, epsilon = 1e-12);
        let r = convexity_probe(&g("wedge 1"), 1.0, 2000, 1).unwrap();
        assert!(r.min_ratio < -0.1);
        assert!(convexity_probe(&g("flat"), 1.0, 0, 1).is_err());
    }

    #[test]
    fn cusp32_convex_against_grid_oracle() {
        // Deterministic grid over (y, z) with y ± z in the unit disc.
        let phi = g("cusp32");
        let n = 24;
        let mut grid_min = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                let y = Vec2::new(
                    -0.9 + 1.8 * i as f64 / (n - 1) as f64,
                    -0.9 + 1.8 * j as f64 / (n - 1) as f64,
                );
                for a in 0..12 {
                    for l in 1..=6 {
                        let th = a as f64 * std::f64::consts::PI / 12.0;
                        let z = Vec2::new(th.cos(), th.sin()) * (0.05 * l as f64);
                        if (y + z).norm() < 1.0 && (y - z).norm() < 1.0 {
                            grid_min =
                                grid_min.min(second_difference(&phi, &y, &z) / z.norm_squared());
                        }
                    }
                }
            }
        }
        assert!(grid_min >= 0.0);
        let r = convexity_probe(&phi, 1.0, 5000, 9).unwrap();
        assert!(r.min_ratio >= 0.0, "{r:?}");
    }

    #[test]
    fn unit_normal_examples() {
        let n = unit_normal(&g("flat"), &Vec2::new(0.3, 0.2));
        assert_eq!(n, Vec3::new(0.0, 0.0, -1.0));
        let s = 1.0 / 2f64.sqrt();
        let n = unit_normal(&g("linear 1 0"), &Vec2::zeros());
        assert_abs_diff_eq!(n, Vec3::new(s, 0.0, -s), epsilon = 1e-15);
        let n = unit_normal(&g("paraboloid"), &Vec2::new(1.0, 0.0));
        assert_abs_diff_eq!(n, Vec3::new(s, 0.0, -s), epsilon = 1e-15);
    }

    #[test]
    fn weingarten_examples() {
        assert_eq!(weingarten(&g("flat"), &Vec2::new(0.4, 0.1)), Mat3::zeros());
        let a = weingarten(&g("paraboloid"), &Vec2::zeros());
        assert_abs_diff_eq!(
            a,
            Mat3::from_diagonal(&Vec3::new(1.0, 1.0, 0.0)),
            epsilon = 1e-12
        );
        let a = weingarten(&g("saddle"), &Vec2::new(1.0, 0.0));
        let s = 1.0 / 2f64.sqrt();
        let expected = Mat3::new(0.0, s, 0.0, s, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert_abs_diff_eq!(a, expected, epsilon = 1e-14);
    }

    #[test]
    fn frame_and_area_examples() {
        assert_eq!(boundary_frame(&g("flat"), &Vec2::zeros()), Mat3::identity());
        assert_abs_diff_eq!(
            boundary_frame(&g("linear 1 0"), &Vec2::zeros()).determinant(),
            2.0,
            epsilon = 1e-14
        );
        assert_eq!(area_element(&g("flat"), &Vec2::new(0.5, 0.5)), 1.0);
        assert_abs_diff_eq!(
            area_element(&g("linear 1 0"), &Vec2::zeros()),
            2f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            area_element(&g("paraboloid"), &Vec2::new(1.0, 1.0)),
            3f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn frame_maps_tangential_fields_to_zero_third_component() {
        let mut rng = seeded(31);
        let phi = g("ripple");
        for _ in 0..500 {
            let xp = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let m = boundary_frame(&phi, &xp);
            let nu = unit_normal(&phi, &xp);
            assert_abs_diff_eq!(
                m.determinant(),
                1.0 + phi.gradient(&xp).norm_squared(),
                epsilon = 1e-12
            );
            let u = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let tangential = u - nu * u.dot(&nu);
            assert_abs_diff_eq!((m * tangential)[2], 0.0, epsilon = 1e-12);
            // (Mu)₃ = −|N|·⟨u, ν⟩
            let n_len = (1.0 + phi.gradient(&xp).norm_squared()).sqrt();
            assert_abs_diff_eq!((m * u)[2], -n_len * u.dot(&nu), epsilon = 1e-12);
        }
    }

    #[test]
    fn patch_nodes_lie_inside_and_on_boundary() {
        let patch = DomainPatch::new(g("paraboloid"), 1.0, 2.0, QuadratureSpec::new(4, 2));
        for n in patch.volume_nodes() {
            let xp = Vec2::new(n.x[0], n.x[1]);
            assert!(xp.norm() < 1.0);
            assert!(n.x[2] > patch.graph.value(&xp));
        }
        for s in patch.surface_nodes() {
            assert_eq!(s.x[2], patch.graph.value(&s.xp));
        }
        patch.self_test().unwrap();
    }

    #[test]
    fn degenerate_patch_rejected() {
        let patch = DomainPatch::new(g("flat"), 0.0, 1.0, QuadratureSpec::default());
        assert!(matches!(patch.validate(), Err(Error::Degenerate(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn smooth_graphs() -> impl Strategy<Value = GraphFunction> {
            prop_oneof![
                Just(g("paraboloid")),
                Just(g("cap")),
                Just(g("saddle")),
                Just(g("ripple")),
                Just(g("flat")),
                (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| g(&format!("linear {a} {b}"))),
            ]
        }

        proptest! {
            #[test]
            fn normal_is_unit_and_orthogonal_to_tangents(phi in smooth_graphs(), x in -1.0..1.0f64, y in -1.0..1.0f64) {
                let xp = Vec2::new(x, y);
                let nu = unit_normal(&phi, &xp);
                prop_assert!((nu.norm() - 1.0).abs() <= 1e-12);
                for t in tangents(&phi, &xp) {
                    prop_assert!(nu.dot(&t).abs() <= 1e-12);
                }
            }

            #[test]
            fn weingarten_symmetric_with_empty_third_row(phi in smooth_graphs(), x in -1.0..1.0f64, y in -1.0..1.0f64) {
                let a = weingarten(&phi, &Vec2::new(x, y));
                prop_assert_eq!(a, a.transpose());
                for k in 0..3 {
                    prop_assert_eq!(a[(2, k)], 0.0);
                    prop_assert_eq!(a[(k, 2)], 0.0);
                }
            }

            #[test]
            fn frame_determinant(phi in smooth_graphs(), x in -1.0..1.0f64, y in -1.0..1.0f64) {
                let xp = Vec2::new(x, y);
                let d = boundary_frame(&phi, &xp).determinant();
                prop_assert!((d - 1.0 - phi.gradient(&xp).norm_squared()).abs() <= 1e-12 * d);
            }

            #[test]
            fn convex_second_differences_nonnegative(seed in any::<u64>()) {
                for phi in [g("paraboloid"), g("abs"), g("cusp32"), g("flat")] {
                    for (y, z) in sample_second_difference_pairs(1.0, 50, seed) {
                        prop_assert!(second_difference(&phi, &y, &z) >= -1e-12 * z.norm_squared());
                    }
                }
            }

            #[test]
            fn lipschitz_bound_holds(seed in any::<u64>()) {
                let mut rng = seeded(seed);
                for name in ["paraboloid", "wedge 2", "abs", "cusp32", "saddle", "ripple", "rcone 1.5"] {
                    let phi = g(name);
                    let k = phi.lipschitz(1.0);
                    for _ in 0..20 {
                        let a = Vec2::new(rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7));
                        let b = Vec2::new(rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7));
                        prop_assert!((phi.value(&a) - phi.value(&b)).abs() <= k * (a - b).norm() + 1e-14);
                    }
                }
            }
        }
    }
}
