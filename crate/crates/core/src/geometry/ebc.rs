//! Largest exterior ball touching the boundary at a given point.
//!
//! A ball `B_R(z)` is admissible at `p = (p', φ(p'))` when `p` lies on its
//! sphere and the open ball does not meet the patch `Ω ∩ {|x'| < ρ}`.
//! Admissibility is monotone in `R` for a fixed direction `z − p`, so the
//! radius is found by bisection; at every trial radius the normal direction
//! and a cone of tilted directions are tried.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{unit_normal, DomainPatch};
use crate::{Error, Result, Vec2, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EbcResult {
    pub point: [f64; 3],
    pub radius: f64,
    /// The search reached `r_max` without finding an obstruction.
    pub capped: bool,
    pub witness_center: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EbcSearch {
    pub r_max: f64,
    pub tol: f64,
    /// Tilt angles (radians) away from the outward normal.
    pub tilts: Vec<f64>,
    pub azimuths: usize,
    /// Radial and angular sample counts of the shadow grid.
    pub radial_samples: usize,
    pub angular_samples: usize,
}

impl EbcSearch {
    pub fn new(r_max: f64, tol: f64) -> Self {
        Self {
            r_max,
            tol,
            tilts: [10.0, 20.0, 30.0, 45.0, 60.0]
                .iter()
                .map(|d: &f64| d.to_radians())
                .collect(),
            azimuths: 8,
            radial_samples: 32,
            angular_samples: 32,
        }
    }

    fn directions(&self, nu: &Vec3) -> Vec<Vec3> {
        let helper = if nu[0].abs() < 0.9 {
            Vec3::x()
        } else {
            Vec3::y()
        };
        let e1 = nu.cross(&helper).normalize();
        let e2 = nu.cross(&e1);
        let mut out = vec![*nu];
        for &t in &self.tilts {
            for k in 0..self.azimuths {
                let a = TAU * k as f64 / self.azimuths as f64;
                out.push(nu * t.cos() + (e1 * a.cos() + e2 * a.sin()) * t.sin());
            }
        }
        out
    }
}

/// Offsets from a centre point: a graded polar grid reaching `radius`.
fn shadow_offsets(radius: f64, radial: usize, angular: usize) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(radial * angular + 1);
    out.push(Vec2::zeros());
    for i in 0..radial {
        // Geometric grading from 1e-4·radius up to radius.
        let s = radius * 10f64.powf(-4.0 * (1.0 - i as f64 / (radial - 1) as f64));
        for k in 0..angular {
            let a = TAU * (k as f64 + 0.5 * (i % 2) as f64) / angular as f64;
            out.push(Vec2::new(a.cos(), a.sin()) * s);
        }
    }
    out
}

/// Does the open ball `B_R(z)` avoid the patch?
fn ball_clear(patch: &DomainPatch, z: &Vec3, r: f64, p: &Vec2, search: &EbcSearch) -> bool {
    let zp = Vec2::new(z[0], z[1]);
    let offsets = shadow_offsets(r, search.radial_samples, search.angular_samples);
    let slack = 1e-12 * (1.0 + r);
    let check = |xp: Vec2| -> bool {
        if xp.norm() >= patch.rho {
            return true;
        }
        let d2 = (xp - zp).norm_squared();
        if d2 >= r * r {
            return true;
        }
        let chord = (r * r - d2).sqrt();
        let base = patch.graph.value(&xp);
        // Open ball column (z₃ − chord, z₃ + chord) against (φ, φ + height).
        z[2] + chord <= base + slack || z[2] - chord >= base + patch.height - slack
    };
    offsets.iter().all(|o| check(zp + o) && check(p + o))
}

fn admissible_center(
    patch: &DomainPatch,
    p: &Vec3,
    dirs: &[Vec3],
    r: f64,
    search: &EbcSearch,
) -> Option<Vec3> {
    let pp = Vec2::new(p[0], p[1]);
    dirs.iter()
        .map(|d| p + d * r)
        .find(|z| ball_clear(patch, z, r, &pp, search))
}

pub fn ebc_radius(
    patch: &DomainPatch,
    boundary_point: Vec2,
    r_max: f64,
    tol: f64,
) -> Result<EbcResult> {
    ebc_radius_with(patch, boundary_point, &EbcSearch::new(r_max, tol))
}

pub fn ebc_radius_with(
    patch: &DomainPatch,
    boundary_point: Vec2,
    search: &EbcSearch,
) -> Result<EbcResult> {
    patch.validate()?;
    if !(search.r_max > 0.0) || !(search.tol > 0.0) {
        return Err(Error::Precondition(format!(
            "EBC search needs r_max > 0 and tol > 0, got {} and {}",
            search.r_max, search.tol
        )));
    }
    if boundary_point.norm() >= patch.rho {
        return Err(Error::Precondition(format!(
            "boundary point {boundary_point:?} outside the patch disc of radius {}",
            patch.rho
        )));
    }
    let p = Vec3::new(
        boundary_point[0],
        boundary_point[1],
        patch.graph.value(&boundary_point),
    );
    let dirs = search.directions(&unit_normal(&patch.graph, &boundary_point));
    let point = [p[0], p[1], p[2]];

    if let Some(z) = admissible_center(patch, &p, &dirs, search.r_max, search) {
        return Ok(EbcResult {
            point,
            radius: search.r_max,
            capped: true,
            witness_center: Some([z[0], z[1], z[2]]),
        });
    }
    let (mut lo, mut hi) = (0.0, search.r_max);
    let mut witness = None;
    while hi - lo > search.tol {
        let mid = 0.5 * (lo + hi);
        match admissible_center(patch, &p, &dirs, mid, search) {
            Some(z) => {
                lo = mid;
                witness = Some([z[0], z[1], z[2]]);
            }
            None => hi = mid,
        }
    }
    Ok(EbcResult {
        point,
        radius: lo,
        capped: false,
        witness_center: witness,
    })
}

/// Minimum radius over a deterministic polar grid of boundary points with
/// `|x'| ≤ ρ/2`, the origin included.
pub fn ebc_infimum(patch: &DomainPatch, samples: usize, r_max: f64, tol: f64) -> Result<f64> {
    let search = EbcSearch::new(r_max, tol);
    let mut pts = vec![Vec2::zeros()];
    let rings = ((samples.max(1) as f64).sqrt().ceil() as usize).max(1);
    let per = samples.saturating_sub(1).div_ceil(rings).max(1);
    'outer: for i in 1..=rings {
        let r = 0.5 * patch.rho * i as f64 / rings as f64;
        for k in 0..per {
            if pts.len() >= samples.max(1) {
                break 'outer;
            }
            let a = TAU * (k as f64 + 0.5) / per as f64;
            pts.push(Vec2::new(a.cos(), a.sin()) * r);
        }
    }
    let mut best = f64::INFINITY;
    for p in pts {
        best = best.min(ebc_radius_with(patch, p, &search)?.radius);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GraphFunction;
    use crate::quadrature::QuadratureSpec;

    fn patch(name: &str) -> DomainPatch {
        DomainPatch::new(
            GraphFunction::parse(name).unwrap(),
            1.0,
            2.0,
            QuadratureSpec::new(6, 2),
        )
    }

    /// Exact radius at the vertex of `−a|x'|²/2`: largest `r` with
    /// `r(1 − cos θ) ≥ a r² sin²θ / 2` for all θ, which is `1/a`.
    fn cap_oracle(a: f64) -> f64 {
        let mut best = f64::INFINITY;
        for i in 1..20000 {
            let th = std::f64::consts::FRAC_PI_2 * i as f64 / 20000.0;
            best = best.min(2.0 * (1.0 - th.cos()) / (a * th.sin().powi(2)));
        }
        best
    }

    #[test]
    fn cap_vertex_matches_oracle() {
        for a in [1.0, 2.0, 4.0] {
            let r = ebc_radius(&patch(&format!("cap {a}")), Vec2::zeros(), 5.0, 1e-4).unwrap();
            assert!(!r.capped);
            assert!((r.radius - cap_oracle(a)).abs() < 0.02 / a, "a={a}: {r:?}");
        }
    }

    #[test]
    fn convex_graphs_reach_cap() {
        for name in ["flat", "paraboloid", "abs", "cusp32"] {
            let r = ebc_radius(&patch(name), Vec2::new(0.1, -0.2), 3.0, 1e-3).unwrap();
            assert!(r.capped, "{name}: {r:?}");
        }
    }

    #[test]
    fn reentrant_corners_have_no_ball() {
        for name in ["wedge 1", "rcone 1"] {
            let r = ebc_radius(&patch(name), Vec2::zeros(), 3.0, 1e-4).unwrap();
            assert!(r.radius <= 1e-4, "{name}: {r:?}");
        }
        // Away from the edge a wedge face still has balls.
        let r = ebc_radius(&patch("wedge 1"), Vec2::new(0.4, 0.0), 3.0, 1e-4).unwrap();
        assert!(r.radius > 0.1);
    }

    #[test]
    fn witness_ball_contains_no_patch_node() {
        for name in ["cap", "cap 3", "saddle", "ripple"] {
            let pt = patch(name);
            let r = ebc_radius(&pt, Vec2::new(0.05, 0.1), 3.0, 1e-4).unwrap();
            let z = r.witness_center.unwrap();
            let z = Vec3::new(z[0], z[1], z[2]);
            let p = Vec3::from(r.point);
            assert!(((p - z).norm() - r.radius).abs() <= 1e-12 * (1.0 + r.radius));
            for n in pt.volume_nodes() {
                assert!((n.x - z).norm() >= r.radius * (1.0 - 1e-9), "{name}");
            }
        }
    }

    #[test]
    fn nested_domains_have_monotone_radii() {
        // Ω_a ⊂ Ω_b when a > b: the exterior shrinks and so does the radius.
        let r: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|a| {
                ebc_radius(&patch(&format!("cap {a}")), Vec2::zeros(), 5.0, 1e-3)
                    .unwrap()
                    .radius
            })
            .collect();
        assert!(r[0] >= r[1] && r[1] >= r[2], "{r:?}");
    }

    #[test]
    fn infimum_and_preconditions() {
        let pt = patch("cap");
        let inf = ebc_infimum(&pt, 9, 5.0, 1e-3).unwrap();
        assert!(inf > 0.9 && inf <= 1.01, "{inf}");
        assert!(ebc_infimum(&patch("paraboloid"), 5, 2.0, 1e-3).unwrap() == 2.0);
        assert!(ebc_radius(&pt, Vec2::new(1.5, 0.0), 1.0, 1e-3).is_err());
        assert!(ebc_radius(&pt, Vec2::zeros(), 0.0, 1e-3).is_err());
        let bad = DomainPatch::new(pt.graph.clone(), 1.0, 0.0, pt.quad);
        assert!(matches!(
            ebc_radius(&bad, Vec2::zeros(), 1.0, 1e-3),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn json_shape() {
        let r = ebc_radius(&patch("cap"), Vec2::zeros(), 5.0, 1e-3).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in ["point", "radius", "capped", "witness_center"] {
            assert!(v.get(key).is_some());
        }
    }
}
