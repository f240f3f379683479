//! Angle fields `psi(r, theta)` on `D = (0,1) x (0,pi)` describing
//! O(2)-equivariant directors `u = sin(psi) e_phi_perp + cos(psi) e_3`.

use crate::profile::Profile;

/// `psi`, its partials and `chi = sin(psi)/sin(theta)` at one point of `D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftingSample {
    pub psi: f64,
    pub psi_r: f64,
    pub psi_theta: f64,
    pub chi: f64,
}

/// A lifting evaluable at any `(r, theta)` in the closure of `D`.
pub trait Lifting: Sync {
    fn sample(&self, r: f64, theta: f64) -> LiftingSample;
}

/// Every profile is an `r`-independent lifting.
impl<P: Profile> Lifting for P {
    fn sample(&self, _r: f64, theta: f64) -> LiftingSample {
        let p = self.eval(theta);
        LiftingSample {
            psi: p.psi,
            psi_r: 0.0,
            psi_theta: p.psi_prime,
            chi: p.chi,
        }
    }
}

/// `chi` of `psi + delta` from `chi` and `cos` of `psi` and `delta / sin(theta)`.
///
/// Stable up to the axis as long as `delta / sin(theta)` stays bounded.
pub fn shifted_chi(chi: f64, cos_psi: f64, delta: f64, delta_over_sin: f64) -> f64 {
    let sinc = if delta.abs() < 1e-8 {
        1.0 - delta * delta / 6.0
    } else {
        delta.sin() / delta
    };
    chi * delta.cos() + cos_psi * delta_over_sin * sinc
}

/// `base + eps * phi`, where `phi` is a lifting-like perturbation.
pub struct Perturbed<'a, B: ?Sized, F: ?Sized> {
    pub base: &'a B,
    pub phi: &'a F,
    pub eps: f64,
}

/// A scalar perturbation with partials, vanishing to first order at the axis.
pub trait ScalarField: Sync {
    /// `(phi, phi_r, phi_theta, phi / sin(theta))`.
    fn values(&self, r: f64, theta: f64) -> [f64; 4];
}

impl<B: Lifting + ?Sized, F: ScalarField + ?Sized> Lifting for Perturbed<'_, B, F> {
    fn sample(&self, r: f64, theta: f64) -> LiftingSample {
        let b = self.base.sample(r, theta);
        let [v, vr, vt, v_over_sin] = self.phi.values(r, theta);
        if v == 0.0 && vr == 0.0 && vt == 0.0 {
            return b;
        }
        let delta = self.eps * v;
        LiftingSample {
            psi: b.psi + delta,
            psi_r: b.psi_r + self.eps * vr,
            psi_theta: b.psi_theta + self.eps * vt,
            chi: shifted_chi(b.chi, b.psi.cos(), delta, self.eps * v_over_sin),
        }
    }
}

/// Lifting from closures for `psi`, `psi_r` and `psi_theta`; `chi` is
/// computed directly and is only valid away from the axis.
pub struct FnLifting<F> {
    f: F,
}

impl<F: Fn(f64, f64) -> [f64; 3] + Sync> FnLifting<F> {
    pub fn new(f: F) -> Self {
        FnLifting { f }
    }
}

impl<F: Fn(f64, f64) -> [f64; 3] + Sync> Lifting for FnLifting<F> {
    fn sample(&self, r: f64, theta: f64) -> LiftingSample {
        let [psi, psi_r, psi_theta] = (self.f)(r, theta);
        LiftingSample {
            psi,
            psi_r,
            psi_theta,
            chi: psi.sin() / theta.sin(),
        }
    }
}
