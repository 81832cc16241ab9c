use std::fmt;
use std::str::FromStr;

use super::Graph;
use crate::names::{unknown, CatalogSpec};
use crate::{Error, Mat2, Vec2};

/// Names accepted by [`GraphKind::from_str`], with their optional arguments.
pub const GRAPH_NAMES: &[&str] = &[
    "flat",
    "paraboloid [a]",
    "cap [a]",
    "wedge [k]",
    "cone [k]",
    "rcone [k]",
    "abs",
    "cusp32",
    "rcusp32",
    "linear a b",
    "saddle",
    "ripple",
];

/// Catalog graphs with exact gradients and Hessians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphKind {
    Flat,
    /// `a|x'|²/2`
    Paraboloid {
        a: f64,
    },
    /// `−a|x'|²/2`; the domain above it is the exterior of a convex body.
    Cap {
        a: f64,
    },
    /// `−k|x₁|`, a reentrant edge.
    Wedge {
        k: f64,
    },
    /// `k|x'|`
    Cone {
        k: f64,
    },
    /// `−k|x'|`, a reentrant vertex.
    RCone {
        k: f64,
    },
    /// `|x'|^{3/2}`
    Cusp32,
    /// `−|x'|^{3/2}`
    RCusp32,
    /// `a x₁ + b x₂`
    Linear {
        a: f64,
        b: f64,
    },
    /// `x₁ x₂`
    Saddle,
    /// `0.3 sin x₁ cos x₂ + 0.1 x₁²`
    Ripple,
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let c = CatalogSpec::parse("graph", s)?;
        let one = |default: f64| -> Result<f64, Error> {
            c.expect_at_most("graph", 1)?;
            Ok(c.arg(0, default))
        };
        let none = || c.expect_at_most("graph", 0);
        let g = match c.name.as_str() {
            "flat" => none().map(|_| GraphKind::Flat)?,
            "paraboloid" => GraphKind::Paraboloid { a: one(1.0)? },
            "cap" | "rparaboloid" => GraphKind::Cap { a: one(1.0)? },
            "wedge" => GraphKind::Wedge { k: one(1.0)? },
            "cone" => GraphKind::Cone { k: one(1.0)? },
            "abs" => none().map(|_| GraphKind::Cone { k: 1.0 })?,
            "rcone" => GraphKind::RCone { k: one(1.0)? },
            "cusp32" => none().map(|_| GraphKind::Cusp32)?,
            "rcusp32" => none().map(|_| GraphKind::RCusp32)?,
            "linear" => {
                c.expect_exactly("graph", 2)?;
                GraphKind::Linear {
                    a: c.args[0],
                    b: c.args[1],
                }
            }
            "saddle" => none().map(|_| GraphKind::Saddle)?,
            "ripple" => none().map(|_| GraphKind::Ripple)?,
            other => return Err(unknown("graph", other, GRAPH_NAMES)),
        };
        Ok(g)
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Flat => write!(f, "flat"),
            GraphKind::Paraboloid { a } => write!(f, "paraboloid {a}"),
            GraphKind::Cap { a } => write!(f, "cap {a}"),
            GraphKind::Wedge { k } => write!(f, "wedge {k}"),
            GraphKind::Cone { k } => write!(f, "cone {k}"),
            GraphKind::RCone { k } => write!(f, "rcone {k}"),
            GraphKind::Cusp32 => write!(f, "cusp32"),
            GraphKind::RCusp32 => write!(f, "rcusp32"),
            GraphKind::Linear { a, b } => write!(f, "linear {a} {b}"),
            GraphKind::Saddle => write!(f, "saddle"),
            GraphKind::Ripple => write!(f, "ripple"),
        }
    }
}

fn radial_hessian(x: &Vec2, r: f64, d1: f64, d2: f64) -> Mat2 {
    // Hessian of f(|x'|) given f'(r) = d1 and f''(r) = d2.
    let u = x / r;
    let uu = u * u.transpose();
    uu * d2 + (Mat2::identity() - uu) * (d1 / r)
}

fn singular() -> Mat2 {
    Mat2::from_element(f64::INFINITY)
}

impl Graph for GraphKind {
    fn value(&self, x: &Vec2) -> f64 {
        let r2 = x.norm_squared();
        match *self {
            GraphKind::Flat => 0.0,
            GraphKind::Paraboloid { a } => 0.5 * a * r2,
            GraphKind::Cap { a } => -0.5 * a * r2,
            GraphKind::Wedge { k } => -k * x[0].abs(),
            GraphKind::Cone { k } => k * r2.sqrt(),
            GraphKind::RCone { k } => -k * r2.sqrt(),
            GraphKind::Cusp32 => r2.sqrt().powf(1.5),
            GraphKind::RCusp32 => -r2.sqrt().powf(1.5),
            GraphKind::Linear { a, b } => a * x[0] + b * x[1],
            GraphKind::Saddle => x[0] * x[1],
            GraphKind::Ripple => 0.3 * x[0].sin() * x[1].cos() + 0.1 * x[0] * x[0],
        }
    }

    fn gradient(&self, x: &Vec2) -> Vec2 {
        let r = x.norm();
        let unit = if r > 0.0 { x / r } else { Vec2::zeros() };
        match *self {
            GraphKind::Flat => Vec2::zeros(),
            GraphKind::Paraboloid { a } => x * a,
            GraphKind::Cap { a } => -x * a,
            GraphKind::Wedge { k } => Vec2::new(-k * sign(x[0]), 0.0),
            GraphKind::Cone { k } => unit * k,
            GraphKind::RCone { k } => -unit * k,
            GraphKind::Cusp32 => unit * (1.5 * r.sqrt()),
            GraphKind::RCusp32 => -unit * (1.5 * r.sqrt()),
            GraphKind::Linear { a, b } => Vec2::new(a, b),
            GraphKind::Saddle => Vec2::new(x[1], x[0]),
            GraphKind::Ripple => Vec2::new(
                0.3 * x[0].cos() * x[1].cos() + 0.2 * x[0],
                -0.3 * x[0].sin() * x[1].sin(),
            ),
        }
    }

    /// Singular points (kinks, cusp tips) return infinite entries.
    fn hessian(&self, x: &Vec2) -> Mat2 {
        let r = x.norm();
        match *self {
            GraphKind::Flat | GraphKind::Linear { .. } => Mat2::zeros(),
            GraphKind::Paraboloid { a } => Mat2::identity() * a,
            GraphKind::Cap { a } => -Mat2::identity() * a,
            GraphKind::Wedge { .. } if x[0] == 0.0 => singular(),
            GraphKind::Wedge { .. } => Mat2::zeros(),
            GraphKind::Cone { .. }
            | GraphKind::RCone { .. }
            | GraphKind::Cusp32
            | GraphKind::RCusp32
                if r == 0.0 =>
            {
                singular()
            }
            GraphKind::Cone { k } => radial_hessian(x, r, k, 0.0),
            GraphKind::RCone { k } => radial_hessian(x, r, -k, 0.0),
            GraphKind::Cusp32 => radial_hessian(x, r, 1.5 * r.sqrt(), 0.75 / r.sqrt()),
            GraphKind::RCusp32 => -radial_hessian(x, r, 1.5 * r.sqrt(), 0.75 / r.sqrt()),
            GraphKind::Saddle => Mat2::new(0.0, 1.0, 1.0, 0.0),
            GraphKind::Ripple => {
                let (s1, c1, s2, c2) = (x[0].sin(), x[0].cos(), x[1].sin(), x[1].cos());
                let m = -0.3 * c1 * s2;
                Mat2::new(-0.3 * s1 * c2 + 0.2, m, m, -0.3 * s1 * c2)
            }
        }
    }

    fn lipschitz(&self, radius: f64) -> f64 {
        match *self {
            GraphKind::Flat => 0.0,
            GraphKind::Paraboloid { a } | GraphKind::Cap { a } => a.abs() * radius,
            GraphKind::Wedge { k } | GraphKind::Cone { k } | GraphKind::RCone { k } => k.abs(),
            GraphKind::Cusp32 | GraphKind::RCusp32 => 1.5 * radius.sqrt(),
            GraphKind::Linear { a, b } => a.hypot(b),
            GraphKind::Saddle => radius,
            GraphKind::Ripple => 0.6 + 0.2 * radius,
        }
    }

    fn has_hessian_oracle(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        self.to_string()
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd;
    use approx::assert_abs_diff_eq;

    const ALL: &[&str] = &[
        "flat",
        "paraboloid",
        "paraboloid 3",
        "cap",
        "wedge 2",
        "cone 0.5",
        "abs",
        "rcone",
        "cusp32",
        "rcusp32",
        "linear 1 -2",
        "saddle",
        "ripple",
    ];

    #[test]
    fn names_roundtrip() {
        for s in ALL {
            let g: GraphKind = s.parse().unwrap();
            let again: GraphKind = g.to_string().parse().unwrap();
            assert_eq!(g, again);
        }
    }

    #[test]
    fn unknown_name_lists_catalog() {
        let e = "sphere".parse::<GraphKind>().unwrap_err();
        let msg = e.to_string();
        assert!(
            msg.contains("sphere") && msg.contains("paraboloid"),
            "{msg}"
        );
        assert_eq!(e.code(), "catalog_miss");
        assert!("linear 1".parse::<GraphKind>().is_err());
        assert!("flat 2".parse::<GraphKind>().is_err());
    }

    #[test]
    fn oracles_match_finite_differences() {
        let pts = [
            Vec2::new(0.31, -0.47),
            Vec2::new(-0.62, 0.18),
            Vec2::new(0.05, 0.77),
        ];
        for s in ALL {
            let g: GraphKind = s.parse().unwrap();
            for x in &pts {
                let fdg = fd::gradient2(|y| g.value(y), x, 1e-3);
                assert_abs_diff_eq!(g.gradient(x), fdg, epsilon = 1e-9);
                let h = 1e-3;
                let mut fdh = Mat2::zeros();
                for j in 0..2 {
                    let mut e = Vec2::zeros();
                    e[j] = 1.0;
                    let gp = g.gradient(&(x + e * h));
                    let gm = g.gradient(&(x - e * h));
                    let gp2 = g.gradient(&(x + e * 2.0 * h));
                    let gm2 = g.gradient(&(x - e * 2.0 * h));
                    let d = (gm2 - gp2 + (gp - gm) * 8.0) / (12.0 * h);
                    fdh.set_column(j, &d);
                }
                assert_abs_diff_eq!(g.hessian(x), fdh, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn hand_values() {
        let x = Vec2::new(3.0, 4.0);
        assert_eq!(GraphKind::Cusp32.value(&x), 5f64.powf(1.5));
        assert_eq!(GraphKind::Wedge { k: 2.0 }.value(&x), -6.0);
        assert_eq!(GraphKind::Cone { k: 1.0 }.value(&x), 5.0);
        assert_eq!(GraphKind::Paraboloid { a: 1.0 }.value(&x), 12.5);
        assert_eq!(GraphKind::Cusp32.gradient(&Vec2::zeros()), Vec2::zeros());
        assert!(GraphKind::Cone { k: 1.0 }.hessian(&Vec2::zeros())[(0, 0)].is_infinite());
    }
}
