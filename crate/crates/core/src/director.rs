//! Director fields, liftings of sampled equivariant fields, equivariance
//! residuals and the topological degree.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fd;
use crate::frank::DirectorState;
use crate::lifting::Lifting;
use crate::profile::Profile;
use crate::quadrature::Rule;

/// Relative finite-difference step used for sampled gradients.
pub const FD_REL_STEP: f64 = 1e-4;

/// A unit vector field on `R^3 \ {0}`.
pub trait DirectorField: Sync {
    fn value(&self, x: &Vector3<f64>) -> Vector3<f64>;

    /// True if `u(lambda x) = u(x)` for all `lambda > 0`.
    fn is_zero_homogeneous(&self) -> bool {
        false
    }

    fn value_spherical(&self, r: f64, theta: f64, phi: f64) -> Vector3<f64> {
        self.value(&spherical_to_cartesian(r, theta, phi))
    }

    /// Value and fourth-order finite-difference gradient with step `FD_REL_STEP * |x|`.
    fn sampled_state(&self, x: &Vector3<f64>) -> Result<DirectorState> {
        let h = FD_REL_STEP * x.norm();
        let grad = fd::jacobian(|y| self.value(y), x, h);
        DirectorState::sampled(self.value(x), grad)
    }
}

pub fn spherical_to_cartesian(r: f64, theta: f64, phi: f64) -> Vector3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(r * st * cp, r * st * sp, r * ct)
}

/// `(r, theta, phi)` with `theta` in `[0, pi]` and `phi` in `(-pi, pi]`.
pub fn cartesian_to_spherical(x: &Vector3<f64>) -> (f64, f64, f64) {
    let rho = x[0].hypot(x[1]);
    (x.norm(), rho.atan2(x[2]), x[1].atan2(x[0]))
}

/// The hedgehog `x / |x|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Hedgehog;

impl DirectorField for Hedgehog {
    fn value(&self, x: &Vector3<f64>) -> Vector3<f64> {
        x / x.norm()
    }

    fn is_zero_homogeneous(&self) -> bool {
        true
    }
}

/// The antipodal hedgehog `-x / |x|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AntipodalHedgehog;

impl DirectorField for AntipodalHedgehog {
    fn value(&self, x: &Vector3<f64>) -> Vector3<f64> {
        -x / x.norm()
    }

    fn is_zero_homogeneous(&self) -> bool {
        true
    }
}

/// A constant unit field.
#[derive(Debug, Clone, Copy)]
pub struct ConstantField(pub Vector3<f64>);

impl DirectorField for ConstantField {
    fn value(&self, _x: &Vector3<f64>) -> Vector3<f64> {
        self.0
    }

    fn is_zero_homogeneous(&self) -> bool {
        true
    }
}

/// `u = sin(psi) e_phi_perp + cos(psi) e_3` built from a lifting.
///
/// In Cartesian form `u = (chi x1/r, chi x2/r, cos psi)`, which stays
/// smooth on the axis because `chi` does.
#[derive(Debug, Clone)]
pub struct EquivariantDirector<L> {
    pub lifting: L,
    homogeneous: bool,
}

impl<L: Lifting> EquivariantDirector<L> {
    pub fn from_lifting(lifting: L) -> Self {
        EquivariantDirector {
            lifting,
            homogeneous: false,
        }
    }
}

impl<L: Lifting> DirectorField for EquivariantDirector<L> {
    fn value(&self, x: &Vector3<f64>) -> Vector3<f64> {
        let r = x.norm();
        let theta = x[0].hypot(x[1]).atan2(x[2]);
        let s = self.lifting.sample(r, theta);
        Vector3::new(s.chi * x[0] / r, s.chi * x[1] / r, s.psi.cos())
    }

    fn is_zero_homogeneous(&self) -> bool {
        self.homogeneous
    }
}

/// The zero-homogeneous field `u(r, theta, phi)` of an angle profile.
pub fn build_director<P: Profile>(profile: P) -> EquivariantDirector<P> {
    EquivariantDirector {
        lifting: profile,
        homogeneous: true,
    }
}

/// `|grad u|^2 = psi_r^2 + (psi_theta^2 + chi^2) / r^2`.
pub fn grad_norm_sq<L: Lifting + ?Sized>(lifting: &L, r: f64, theta: f64) -> f64 {
    let s = lifting.sample(r, theta);
    s.psi_r * s.psi_r + (s.psi_theta * s.psi_theta + s.chi * s.chi) / (r * r)
}

/// Field values at `phi = 0` on a tensor `(r, theta)` grid, row-major in `r`.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    pub r_nodes: Vec<f64>,
    pub theta_nodes: Vec<f64>,
    pub values: Vec<Vector3<f64>>,
}

impl SampleGrid {
    pub fn sample<F: DirectorField + ?Sized>(field: &F, r_nodes: &[f64], theta_nodes: &[f64]) -> Self {
        let values = r_nodes
            .iter()
            .flat_map(|&r| theta_nodes.iter().map(move |&th| field.value_spherical(r, th, 0.0)))
            .collect();
        SampleGrid {
            r_nodes: r_nodes.to_vec(),
            theta_nodes: theta_nodes.to_vec(),
            values,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> &Vector3<f64> {
        &self.values[i * self.theta_nodes.len() + j]
    }
}

/// Result of lifting sampled values to an angle field.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftReport {
    pub n_r: usize,
    pub n_theta: usize,
    /// `psi[i * n_theta + j]` at `(r_i, theta_j)`.
    pub psi: Vec<f64>,
    /// Largest `|u . e_phi|` seen.
    pub max_c: f64,
    /// Axis class: `psi(r, pi) - psi(r, 0) = j pi` on every row.
    pub j: i64,
}

impl LiftReport {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.psi[i * self.n_theta + j]
    }
}

/// Default bound on `|u . e_phi|` accepted by [`lift_equivariant`].
pub const LIFT_C_TOL: f64 = 1e-8;

/// Recover `psi` from samples with `a = u1`, `b = u3`, `c = u2` at `phi = 0`.
///
/// Each `theta` line is anchored at the node nearest `pi/2` with `psi` in
/// `(-pi, pi]` and unwrapped outward; a jump above `pi/2` between neighbours
/// is treated as unresolved.
pub fn lift_equivariant(samples: &SampleGrid, c_tol: f64) -> Result<LiftReport> {
    let n_r = samples.r_nodes.len();
    let n_t = samples.theta_nodes.len();
    if n_r == 0 || n_t < 2 {
        return Err(Error::Domain("lifting needs at least one r line and two theta nodes".into()));
    }
    let max_c = samples.values.iter().map(|u| u[1].abs()).fold(0.0, f64::max);
    if max_c > c_tol {
        return Err(Error::NotEquivariant { max_c, tol: c_tol });
    }
    let anchor = samples
        .theta_nodes
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - FRAC_PI_2).abs().total_cmp(&(b.1 - FRAC_PI_2).abs()))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    let mut psi = vec![0.0; n_r * n_t];
    let mut class = None;
    for i in 0..n_r {
        let raw: Vec<f64> = (0..n_t).map(|j| {
            let u = samples.at(i, j);
            u[0].atan2(u[2])
        }).collect();
        let row = &mut psi[i * n_t..(i + 1) * n_t];
        row[anchor] = raw[anchor];
        let step = |from: usize, to: usize, row: &mut [f64]| -> Result<()> {
            let mut d = raw[to] - row[from];
            d -= 2.0 * PI * (d / (2.0 * PI)).round();
            if d.abs() > FRAC_PI_2 {
                return Err(Error::Resolution(format!(
                    "angle jumps by {d:.3} between theta = {} and {} on r = {}",
                    samples.theta_nodes[from], samples.theta_nodes[to], samples.r_nodes[i]
                )));
            }
            row[to] = row[from] + d;
            Ok(())
        };
        for j in anchor + 1..n_t {
            step(j - 1, j, row)?;
        }
        for j in (0..anchor).rev() {
            step(j + 1, j, row)?;
        }
        let j_row = (row[n_t - 1] / PI).round() as i64 - (row[0] / PI).round() as i64;
        match class {
            None => class = Some(j_row),
            Some(c) if c != j_row => {
                return Err(Error::Resolution(format!(
                    "axis class differs between r lines ({c} vs {j_row})"
                )))
            }
            _ => {}
        }
    }
    Ok(LiftReport {
        n_r,
        n_theta: n_t,
        psi,
        max_c,
        j: class.unwrap_or(0),
    })
}

/// `J = diag(-1, 1, 1)`.
pub fn reflection_j() -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(-1.0, 1.0, 1.0))
}

/// Rotation by `eta` about `e3`.
pub fn rotation_about_e3(eta: f64) -> Matrix3<f64> {
    let (s, c) = eta.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Maxima of `|u(R x) - R u(x)|` and `|u(J x) - J u(x)|` over random samples.
pub fn equivariance_residual<F: DirectorField + ?Sized>(field: &F, n_samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = reflection_j();
    let (mut max_rot, mut max_ref) = (0.0f64, 0.0f64);
    for _ in 0..n_samples {
        let r = rng.random_range(0.1..1.0);
        let z: f64 = rng.random_range(-1.0..1.0);
        let phi = rng.random_range(0.0..2.0 * PI);
        let x = spherical_to_cartesian(r, z.acos(), phi);
        let rot = rotation_about_e3(rng.random_range(0.0..2.0 * PI));
        let u = field.value(&x);
        max_rot = max_rot.max((field.value(&(rot * x)) - rot * u).norm());
        max_ref = max_ref.max((field.value(&(j * x)) - j * u).norm());
    }
    (max_rot, max_ref)
}

/// Degree with the raw value of the integral it was rounded from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Degree {
    pub degree: i64,
    pub raw: f64,
}

/// `(1/4 pi) int u . (d_theta u x d_phi u) dtheta dphi` over the unit sphere,
/// Gauss in `theta` and the periodic trapezoid rule in `phi`.
pub fn degree<F: DirectorField + ?Sized>(field: &F, n_theta: usize, n_phi: usize) -> Result<Degree> {
    let th_rule = Rule::gauss_legendre(n_theta, 0.0, PI);
    let ph_rule = Rule::periodic_trapezoid(n_phi, 0.0, 2.0 * PI);
    let mut total = 0.0;
    for (&th, &wt) in th_rule.nodes.iter().zip(&th_rule.weights) {
        let h_th = 1e-4f64.min(th / 4.0).min((PI - th) / 4.0);
        for (&ph, &wp) in ph_rule.nodes.iter().zip(&ph_rule.weights) {
            let u = field.value_spherical(1.0, th, ph);
            let d_th = central(|a| field.value_spherical(1.0, a, ph), th, h_th);
            let d_ph = central(|b| field.value_spherical(1.0, th, b), ph, 1e-4);
            total += wt * wp * u.dot(&d_th.cross(&d_ph));
        }
    }
    let raw = total / (4.0 * PI);
    let degree = raw.round();
    if (raw - degree).abs() > 0.01 || !raw.is_finite() {
        return Err(Error::Resolution(format!(
            "degree integral {raw} is not within 0.01 of an integer"
        )));
    }
    Ok(Degree {
        degree: degree as i64,
        raw,
    })
}

fn central<F: Fn(f64) -> Vector3<f64>>(f: F, x: f64, h: f64) -> Vector3<f64> {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// CSV with columns `r,theta,phi,u1,u2,u3`.
pub fn field_samples_csv<F: DirectorField + ?Sized>(field: &F, r: &[f64], theta: &[f64], phi: &[f64]) -> String {
    let mut out = String::from("r,theta,phi,u1,u2,u3\n");
    for &ri in r {
        for &ti in theta {
            for &pi in phi {
                let u = field.value_spherical(ri, ti, pi);
                out.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    ri, ti, pi, u[0], u[1], u[2]
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{closed_form_one_constant, hedgehog_profile, solve_branch, solve_profile, FnProfile};

    #[test]
    fn identity_profile_builds_the_hedgehog() {
        let u = build_director(hedgehog_profile());
        for x in [Vector3::new(0.3, -0.4, 0.2), Vector3::new(0.0, 0.0, -2.0), Vector3::new(1e-3, 0.0, 5.0)] {
            assert!((u.value(&x) - x / x.norm()).norm() < 1e-15);
        }
        assert!(u.is_zero_homogeneous());
    }

    #[test]
    fn zero_profile_builds_constant_field() {
        let u = build_director(FnProfile::new(|_| 0.0, |_| 0.0));
        assert_eq!(u.value(&Vector3::new(0.2, 0.1, -0.3)), Vector3::z());
    }

    #[test]
    fn one_constant_director_matches_n_t() {
        let t = 1.1;
        let sol = solve_profile(1.0, 1.0, t, 1e-12).unwrap();
        let u = build_director(&sol);
        for (th, ph) in [(0.01, 0.3), (1.0, 2.0), (2.5, -1.0), (3.1, 0.0)] {
            let d = 1.0 + t.cos() * f64::cos(th);
            let n = Vector3::new(
                t.sin() * f64::sin(th) / d * f64::cos(ph),
                t.sin() * f64::sin(th) / d * f64::sin(ph),
                (t.cos() + f64::cos(th)) / d,
            );
            assert!((u.value_spherical(0.7, th, ph) - n).norm() < 1e-10);
        }
        let _ = closed_form_one_constant(t, 0.0);
    }

    #[test]
    fn lifting_round_trips() {
        let sol = solve_profile(4.0, 1.0, 1.0, 1e-12).unwrap();
        let thetas = Rule::gauss_legendre(64, 0.0, PI).nodes;
        let grid = SampleGrid::sample(&build_director(&sol), &[0.25, 0.5, 1.0], &thetas);
        let rep = lift_equivariant(&grid, LIFT_C_TOL).unwrap();
        assert_eq!(rep.j, 1);
        for i in 0..3 {
            for (j, &th) in thetas.iter().enumerate() {
                assert!((rep.at(i, j) - sol.psi(th)).abs() < 1e-12);
            }
        }
        let grid = SampleGrid::sample(&ConstantField(Vector3::z()), &[0.5], &thetas);
        let rep = lift_equivariant(&grid, LIFT_C_TOL).unwrap();
        assert_eq!(rep.j, 0);
        assert!(rep.psi.iter().all(|&p| p == 0.0));
        let neg = solve_branch(2.0, 1.0, -1.0, 1e-10).unwrap();
        let grid = SampleGrid::sample(&build_director(&neg), &[0.5], &thetas);
        assert_eq!(lift_equivariant(&grid, LIFT_C_TOL).unwrap().j, -1);
    }

    #[test]
    fn lifting_rejects_twisted_and_coarse_samples() {
        let thetas = Rule::gauss_legendre(16, 0.0, PI).nodes;
        let mut grid = SampleGrid::sample(&Hedgehog, &[0.5], &thetas);
        grid.values[3] = Vector3::new(0.0, 1.0, 0.0);
        assert!(matches!(lift_equivariant(&grid, LIFT_C_TOL), Err(Error::NotEquivariant { .. })));
        let fast = build_director(FnProfile::new(|th: f64| 9.0 * th, |_| 9.0));
        let grid = SampleGrid::sample(&fast, &[0.5], &Rule::gauss_legendre(8, 0.0, PI).nodes);
        assert!(matches!(lift_equivariant(&grid, LIFT_C_TOL), Err(Error::Resolution(_))));
    }

    #[test]
    fn built_fields_are_equivariant() {
        let sol = solve_profile(4.0, 0.5, 0.6, 1e-10).unwrap();
        let (rot, refl) = equivariance_residual(&build_director(&sol), 500, 7);
        assert!(rot < 1e-12 && refl < 1e-12, "{rot} {refl}");
        let (rot, refl) = equivariance_residual(&Hedgehog, 200, 1);
        assert!(rot < 1e-15 && refl < 1e-15);
    }

    #[test]
    fn degrees() {
        let sol = solve_profile(4.0, 1.0, 1.0, 1e-10).unwrap();
        let d = degree(&build_director(&sol), 128, 16).unwrap();
        assert_eq!(d.degree, 1);
        assert!((d.raw - 1.0).abs() < 1e-6);
        assert_eq!(degree(&ConstantField(Vector3::z()), 32, 8).unwrap().degree, 0);
        assert_eq!(degree(&AntipodalHedgehog, 64, 16).unwrap().degree, -1);
    }

    #[test]
    fn grad_norm_of_hedgehog() {
        assert!((grad_norm_sq(&hedgehog_profile(), 0.5, 1.0) - 8.0).abs() < 1e-14);
    }
}
