//! Central finite-difference stencils.

use nalgebra::{Matrix3, Vector3};

/// Fourth-order central first derivative.
pub fn derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Sixth-order central first derivative.
pub fn derivative6<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x - 3.0 * h) + 9.0 * f(x - 2.0 * h) - 45.0 * f(x - h) + 45.0 * f(x + h)
        - 9.0 * f(x + 2.0 * h)
        + f(x + 3.0 * h))
        / (60.0 * h)
}

/// Jacobian `J[i][j] = d f_i / d x_j` of a vector field, fourth-order central.
pub fn jacobian<F: Fn(&Vector3<f64>) -> Vector3<f64>>(f: F, x: &Vector3<f64>, h: f64) -> Matrix3<f64> {
    let mut jac = Matrix3::zeros();
    for j in 0..3 {
        let mut e = Vector3::zeros();
        e[j] = h;
        let d = (f(&(x - 2.0 * e)) - 8.0 * f(&(x - e)) + 8.0 * f(&(x + e)) - f(&(x + 2.0 * e)))
            / (12.0 * h);
        jac.set_column(j, &d);
    }
    jac
}

/// Gradient of a scalar field, fourth-order central.
pub fn gradient<F: Fn(&Vector3<f64>) -> f64>(f: F, x: &Vector3<f64>, h: f64) -> Vector3<f64> {
    let mut g = Vector3::zeros();
    for j in 0..3 {
        let mut e = Vector3::zeros();
        e[j] = h;
        g[j] = (f(&(x - 2.0 * e)) - 8.0 * f(&(x - e)) + 8.0 * f(&(x + e)) - f(&(x + 2.0 * e)))
            / (12.0 * h);
    }
    g
}

/// Curl from a Jacobian `J[i][j] = d u_i / d x_j`.
pub fn curl_of(jac: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        jac[(2, 1)] - jac[(1, 2)],
        jac[(0, 2)] - jac[(2, 0)],
        jac[(1, 0)] - jac[(0, 1)],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_on_exponential() {
        let d4 = derivative(f64::exp, 0.3, 1e-3);
        let d6 = derivative6(f64::exp, 0.3, 1e-2);
        assert!((d4 - 0.3f64.exp()).abs() < 1e-12);
        assert!((d6 - 0.3f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn jacobian_and_curl_of_rotation_field() {
        // u = (-y, x, 0) has curl (0, 0, 2).
        let f = |x: &Vector3<f64>| Vector3::new(-x[1], x[0], 0.0);
        let jac = jacobian(f, &Vector3::new(0.2, -0.4, 0.9), 1e-3);
        let c = curl_of(&jac);
        assert!((c - Vector3::new(0.0, 0.0, 2.0)).norm() < 1e-12);
    }
}
