//! Composite tensor rules used by every volume and surface integral.
//!
//! Patches are parameterised in polar coordinates over the disc `|x'| < ρ`
//! (composite Gauss–Legendre in the radius, uniform midpoint rule in the
//! angle, which is spectrally accurate for periodic integrands) and a
//! composite Gauss–Legendre rule in the normalised height `t ∈ [0, 1]`.
//! No node ever lies on the axis `x' = 0` or on the boundary of the patch.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Panels per axis (angular direction uses `4 * resolution` points).
    pub resolution: usize,
    /// Gauss–Legendre points per panel; 1 is the midpoint rule.
    pub order: usize,
    /// Step for finite-difference derivative fallbacks.
    pub fd_step: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            resolution: 8,
            order: 2,
            fd_step: 1e-4,
        }
    }
}

impl QuadratureSpec {
    pub fn new(resolution: usize, order: usize) -> Self {
        Self {
            resolution,
            order,
            ..Self::default()
        }
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::Config(format!(
                "quadrature resolution {} < 2",
                self.resolution
            )));
        }
        if self.order == 0 || self.order > 32 {
            return Err(Error::Config(format!(
                "rule order {} outside 1..=32",
                self.order
            )));
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(Error::Config(format!(
                "fd_step {} must be positive",
                self.fd_step
            )));
        }
        Ok(())
    }

    pub fn refined(&self) -> Self {
        Self {
            resolution: 2 * self.resolution,
            ..*self
        }
    }

    pub fn radial_rule(&self, rho: f64) -> Vec<(f64, f64)> {
        composite_gauss(0.0, rho, self.resolution, self.order)
    }

    pub fn angular_rule(&self) -> Vec<(f64, f64)> {
        periodic_midpoint(4 * self.resolution)
    }

    pub fn height_rule(&self) -> Vec<(f64, f64)> {
        composite_gauss(0.0, 1.0, self.resolution, self.order)
    }

    /// Polar rule on the disc `|x'| < ρ`; weights include the Jacobian `r`.
    pub fn disc_rule(&self, rho: f64) -> Vec<([f64; 2], f64)> {
        disc_rule(&self.radial_rule(rho), &self.angular_rule())
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(points: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(points).unwrap_or(NonZeroUsize::MIN);
    GaussLegendre::new(n).as_node_weight_pairs().to_vec()
}

/// Composite Gauss–Legendre on `[a, b]` with equal panels.
pub fn composite_gauss(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let base = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for &(x, w) in &base {
            out.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
        }
    }
    out
}

/// Composite Gauss–Legendre over explicit breakpoints.
pub fn gauss_on_breaks(breaks: &[f64], order: usize) -> Vec<(f64, f64)> {
    let base = gauss_legendre(order);
    let mut out = Vec::with_capacity(breaks.len() * order);
    for pair in breaks.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        for &(x, w) in &base {
            out.push((lo + 0.5 * (hi - lo) * (x + 1.0), 0.5 * (hi - lo) * w));
        }
    }
    out
}

/// `n` equally spaced angles offset by half a cell, weights `2π/n`.
pub fn periodic_midpoint(n: usize) -> Vec<(f64, f64)> {
    let w = 2.0 * PI / n as f64;
    (0..n).map(|k| ((k as f64 + 0.5) * w, w)).collect()
}

pub fn disc_rule(radial: &[(f64, f64)], angular: &[(f64, f64)]) -> Vec<([f64; 2], f64)> {
    let mut out = Vec::with_capacity(radial.len() * angular.len());
    for &(r, wr) in radial {
        for &(th, wt) in angular {
            out.push(([r * th.cos(), r * th.sin()], r * wr * wt));
        }
    }
    out
}

/// Neumaier-compensated accumulator. Quadrature sums are formed in node
/// order so results are reproducible bit for bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}
