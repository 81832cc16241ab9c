//! Central finite differences with one Richardson step (`O(h⁴)`).

use crate::{CMat3, CVec3, Complex64, Mat2, Vec2, Vec3};

/// Derivative of a scalar function of one variable at `x`.
pub fn richardson<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

pub fn richardson_c<F: Fn(f64) -> Complex64>(f: F, x: f64, h: f64) -> Complex64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / Complex64::from(2.0 * h);
    (d(0.5 * h) * 4.0 - d(h)) / 3.0
}

/// Plain second-order central gradient, no extrapolation.
pub fn central_gradient2<F: Fn(&Vec2) -> f64>(f: F, x: &Vec2, h: f64) -> Vec2 {
    let e = [Vec2::new(h, 0.0), Vec2::new(0.0, h)];
    Vec2::new(
        (f(&(x + e[0])) - f(&(x - e[0]))) / (2.0 * h),
        (f(&(x + e[1])) - f(&(x - e[1]))) / (2.0 * h),
    )
}

/// Plain second-order central Hessian, no extrapolation.
pub fn central_hessian2<F: Fn(&Vec2) -> f64>(f: F, x: &Vec2, h: f64) -> Mat2 {
    let e = [Vec2::new(h, 0.0), Vec2::new(0.0, h)];
    let f0 = f(x);
    let mut m = Mat2::zeros();
    for i in 0..2 {
        m[(i, i)] = (f(&(x + e[i])) - 2.0 * f0 + f(&(x - e[i]))) / (h * h);
    }
    let mixed = (f(&(x + e[0] + e[1])) - f(&(x + e[0] - e[1])) - f(&(x - e[0] + e[1]))
        + f(&(x - e[0] - e[1])))
        / (4.0 * h * h);
    m[(0, 1)] = mixed;
    m[(1, 0)] = mixed;
    m
}

/// Gradient of a scalar function on ℝ² with Richardson extrapolation.
pub fn gradient2<F: Fn(&Vec2) -> f64>(f: F, x: &Vec2, h: f64) -> Vec2 {
    Vec2::from_fn(|i, _| {
        richardson(
            |t| {
                let mut y = *x;
                y[i] += t;
                f(&y)
            },
            0.0,
            h,
        )
    })
}

/// Jacobian `J[(i, j)] = ∂ⱼ uᵢ` of a complex vector field on ℝ³.
pub fn jacobian3<F: Fn(&Vec3) -> CVec3>(f: F, x: &Vec3, h: f64) -> CMat3 {
    let mut jac = CMat3::zeros();
    for j in 0..3 {
        let col = |t: f64| {
            let mut y = *x;
            y[j] += t;
            f(&y)
        };
        let d = |s: f64| (col(s) - col(-s)) / Complex64::from(2.0 * s);
        let dj = (d(0.5 * h) * Complex64::from(4.0) - d(h)) / Complex64::from(3.0);
        jac.set_column(j, &dj);
    }
    jac
}

/// Gradient of a complex scalar on ℝ³.
pub fn gradient3<F: Fn(&Vec3) -> Complex64>(f: F, x: &Vec3, h: f64) -> CVec3 {
    CVec3::from_fn(|j, _| {
        richardson_c(
            |t| {
                let mut y = *x;
                y[j] += t;
                f(&y)
            },
            0.0,
            h,
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn richardson_is_fourth_order() {
        let f = |x: f64| x.sin();
        let e1 = (richardson(f, 0.7, 0.1) - 0.7f64.cos()).abs();
        let e2 = (richardson(f, 0.7, 0.05) - 0.7f64.cos()).abs();
        assert!(e1 / e2 > 12.0);
    }

    #[test]
    fn hessian2_of_quadratic_is_exact() {
        let f = |x: &Vec2| 1.5 * x[0] * x[0] + x[0] * x[1] - 0.5 * x[1] * x[1];
        let h = central_hessian2(f, &Vec2::new(0.3, -0.2), 1e-3);
        assert_abs_diff_eq!(h[(0, 0)], 3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(h[(0, 1)], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(h[(1, 1)], -1.0, epsilon = 1e-6);
    }
}
