//! Frank elastic constants, the Oseen-Frank energy density and the full
//! Euler-Lagrange residual of sampled director fields.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::director::DirectorField;
use crate::error::{Error, Result};
use crate::fd;

/// |u| tolerance for analytically evaluated fields.
pub const UNIT_TOL_ANALYTIC: f64 = 1e-10;
/// |u| tolerance for finite-difference sampled fields.
pub const UNIT_TOL_SAMPLED: f64 = 1e-6;

/// How the saddle-splay constant `k4` was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum K4Convention {
    /// `k4 = -k2`, the choice under which the reduced energy is derived.
    MinusK2,
    /// `k4 = min{k1, k2, k3} - k2`, the choice that makes `W` coercive.
    AlphaMinusK2,
    /// `k4` supplied by the caller.
    Explicit,
}

/// Splay, twist, bend and saddle-splay constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrankConstants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub convention: K4Convention,
}

impl FrankConstants {
    pub fn new(k1: f64, k2: f64, k3: f64, convention: K4Convention, k4: Option<f64>) -> Result<Self> {
        for (name, k) in [("k1", k1), ("k2", k2), ("k3", k3)] {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::InvalidConstants(format!("{name} = {k} must be positive")));
            }
        }
        let k4 = match (convention, k4) {
            (K4Convention::MinusK2, _) => -k2,
            (K4Convention::AlphaMinusK2, _) => k1.min(k2).min(k3) - k2,
            (K4Convention::Explicit, Some(k4)) if k4.is_finite() => k4,
            (K4Convention::Explicit, _) => {
                return Err(Error::InvalidConstants(
                    "explicit convention requires a finite k4".into(),
                ))
            }
        };
        Ok(FrankConstants { k1, k2, k3, k4, convention })
    }

    pub fn minus_k2(k1: f64, k2: f64, k3: f64) -> Result<Self> {
        Self::new(k1, k2, k3, K4Convention::MinusK2, None)
    }

    pub fn alpha_minus_k2(k1: f64, k2: f64, k3: f64) -> Result<Self> {
        Self::new(k1, k2, k3, K4Convention::AlphaMinusK2, None)
    }

    pub fn explicit(k1: f64, k2: f64, k3: f64, k4: f64) -> Result<Self> {
        Self::new(k1, k2, k3, K4Convention::Explicit, Some(k4))
    }

    /// `k1 = k2 = k3 = kappa` with `k4 = k1 - k2`, where `W` is the Dirichlet density.
    pub fn one_constant(kappa: f64) -> Result<Self> {
        Self::explicit(kappa, kappa, kappa, 0.0)
    }
}

/// `alpha = min{k1,k2,k3}` and `beta = 3 k1 + 2 k2 + 2 k3`.
pub fn coercivity_bounds(k: &FrankConstants) -> (f64, f64) {
    (k.k1.min(k.k2).min(k.k3), 3.0 * k.k1 + 2.0 * k.k2 + 2.0 * k.k3)
}

/// A director value with its gradient `grad[(i, j)] = d u_i / d x_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectorState {
    u: Vector3<f64>,
    grad: Matrix3<f64>,
}

impl DirectorState {
    /// State of an analytically evaluated field.
    pub fn new(u: Vector3<f64>, grad: Matrix3<f64>) -> Result<Self> {
        Self::with_tolerance(u, grad, UNIT_TOL_ANALYTIC)
    }

    /// State whose gradient came from finite differences.
    pub fn sampled(u: Vector3<f64>, grad: Matrix3<f64>) -> Result<Self> {
        Self::with_tolerance(u, grad, UNIT_TOL_SAMPLED)
    }

    pub fn with_tolerance(u: Vector3<f64>, grad: Matrix3<f64>, tol: f64) -> Result<Self> {
        let norm = u.norm();
        if !((norm - 1.0).abs() <= tol) {
            return Err(Error::InvalidState { norm, tol });
        }
        Ok(DirectorState { u, grad })
    }

    pub fn u(&self) -> &Vector3<f64> {
        &self.u
    }

    pub fn grad(&self) -> &Matrix3<f64> {
        &self.grad
    }

    pub fn divergence(&self) -> f64 {
        self.grad.trace()
    }

    pub fn curl(&self) -> Vector3<f64> {
        fd::curl_of(&self.grad)
    }

    /// `max_j |sum_i u_i d_j u_i|`; vanishes for exact unit fields.
    pub fn tangency_defect(&self) -> f64 {
        (self.grad.transpose() * self.u).amax()
    }
}

/// `tr((grad u)^2) - (div u)^2`.
pub fn null_lagrangian(grad: &Matrix3<f64>) -> f64 {
    (grad * grad).trace() - grad.trace().powi(2)
}

/// Oseen-Frank density `W(u, grad u)`.
pub fn energy_density(state: &DirectorState, k: &FrankConstants) -> f64 {
    let div = state.divergence();
    let curl = state.curl();
    let twist = state.u.dot(&curl);
    let bend = state.u.cross(&curl).norm_squared();
    0.5 * (k.k1 * div * div
        + k.k2 * twist * twist
        + k.k3 * bend
        + (k.k2 + k.k4) * null_lagrangian(&state.grad))
}

/// Left side of the full Euler-Lagrange system at `point`, with its
/// component along `u` (the Lagrange multiplier) projected out.
///
/// All derivatives are nested fourth-order central differences with step `h`.
pub fn full_el_residual<F: DirectorField + ?Sized>(
    field: &F,
    k: &FrankConstants,
    point: &Vector3<f64>,
    h: f64,
) -> Result<Vector3<f64>> {
    // the nested stencil reaches 4h from the point
    if point.norm() <= 4.0 * h {
        return Err(Error::Domain(format!(
            "point at distance {} from the origin is within the stencil reach 4h = {}",
            point.norm(),
            4.0 * h
        )));
    }
    let jac = |x: &Vector3<f64>| fd::jacobian(|y| field.value(y), x, h);
    let div = |x: &Vector3<f64>| jac(x).trace();
    let curl = |x: &Vector3<f64>| fd::curl_of(&jac(x));
    let twist = |x: &Vector3<f64>| field.value(x).dot(&curl(x));

    let grad_div = fd::gradient(div, point, h);
    let curl_curl = fd::curl_of(&fd::jacobian(curl, point, h));
    let curl_twist_u = fd::curl_of(&fd::jacobian(|x| twist(x) * field.value(x), point, h));
    let c = curl(point);
    let u = field.value(point);
    let t = u.dot(&c);

    let lhs = -k.k1 * grad_div + k.k3 * curl_curl + (k.k2 - k.k3) * (curl_twist_u + t * c);
    Ok(lhs - lhs.dot(&u) * u)
}
