//! The singular profile ODE
//!
//! ```text
//! psi'(theta) = sqrt(k1) sin(psi) / (sin(theta) sqrt(k1 cos^2(psi - theta) + k3 sin^2(psi - theta)))
//! ```
//!
//! solved from the midpoint `theta = pi/2` towards both poles.
//!
//! Both poles are regular singular points with exponent one. Writing
//! `psi = m pi + h` with `h` in `(0, pi)` and changing variables to
//! `x = ln tan(theta/2)`, `y = ln tan(h/2)` turns the equation into
//! `dy/dx = s sqrt(k1 / Q(h - theta))` with `s = (-1)^m`, which is smooth on the
//! whole line and satisfies `dy/dx = s + O(e^{2x})` at both ends. The solution is
//! tabulated on `|x| <= X_MAX` and continued beyond by the exact first-order
//! asymptotics `y = s x + a`, i.e. `tan(h/2) = e^a tan(theta/2)^s`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd;
use crate::ode::Dopri5;

/// Half-width of the tabulated range in the log-tan variable. Beyond it the
/// neglected correction to the linear asymptotics is below `e^{-2 X_MAX}`.
pub const X_MAX: f64 = 24.0;
/// Table spacing in the log-tan variable.
pub const TABLE_STEP: f64 = 1.0 / 128.0;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_NODES: usize = 512;

/// Which family of solutions a profile belongs to, fixed by `t = psi(pi/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Branch {
    /// `t` an integer multiple of `pi`: `psi` is constant.
    Constant,
    /// `t` in `(0, pi)`: increasing from 0 to `pi`.
    IncreasingZeroToPi,
    /// `t` in `(pi, 2 pi)`: decreasing from `2 pi` to `pi`.
    DecreasingTwoPiToPi,
    /// `t` in `(-pi, 0)`: decreasing from 0 to `-pi`.
    NegativeMirror,
    /// Any other interval: increasing from `2 l pi` to `(2 l + 1) pi`, or
    /// decreasing from `(2 l + 2) pi` to `(2 l + 1) pi`.
    ShiftedBy2LPi { shift: i64, decreasing: bool },
}

impl Branch {
    /// Branch of the solution passing through `psi` with `psi / pi` in `[m, m + 1)`.
    fn from_sheet(m: i64) -> Branch {
        match m {
            0 => Branch::IncreasingZeroToPi,
            1 => Branch::DecreasingTwoPiToPi,
            -1 => Branch::NegativeMirror,
            _ => Branch::ShiftedBy2LPi {
                shift: m.div_euclid(2),
                decreasing: m.rem_euclid(2) == 1,
            },
        }
    }
}

/// `psi`, `psi'` and `chi = sin(psi)/sin(theta)` at one angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub psi: f64,
    pub psi_prime: f64,
    pub chi: f64,
}

/// An angle profile `theta -> psi(theta)` on `[0, pi]`.
pub trait Profile: Sync {
    fn eval(&self, theta: f64) -> ProfilePoint;

    fn psi(&self, theta: f64) -> f64 {
        self.eval(theta).psi
    }
}

impl<P: Profile + ?Sized> Profile for &P {
    fn eval(&self, theta: f64) -> ProfilePoint {
        (**self).eval(theta)
    }
}

/// Profile from closures for `psi` and `psi'`; `chi` is taken by L'Hopital
/// at the poles, so the closure must vanish mod `pi` there.
pub struct FnProfile<F, G> {
    psi: F,
    dpsi: G,
}

impl<F, G> FnProfile<F, G>
where
    F: Fn(f64) -> f64 + Sync,
    G: Fn(f64) -> f64 + Sync,
{
    pub fn new(psi: F, dpsi: G) -> Self {
        FnProfile { psi, dpsi }
    }
}

impl<F, G> Profile for FnProfile<F, G>
where
    F: Fn(f64) -> f64 + Sync,
    G: Fn(f64) -> f64 + Sync,
{
    fn eval(&self, theta: f64) -> ProfilePoint {
        let psi = (self.psi)(theta);
        let psi_prime = (self.dpsi)(theta);
        let st = theta.sin();
        let chi = if st.abs() > 1e-7 {
            psi.sin() / st
        } else {
            psi.cos() * psi_prime / theta.cos()
        };
        ProfilePoint { psi, psi_prime, chi }
    }
}

/// The identity profile `psi = theta` of the hedgehog.
pub fn hedgehog_profile() -> FnProfile<fn(f64) -> f64, fn(f64) -> f64> {
    FnProfile::new(|th| th, |_| 1.0)
}

/// Replaces the derivative of a profile by a sixth-order central difference of `psi`.
pub struct FdDerivative<P>(pub P);

impl<P: Profile> Profile for FdDerivative<P> {
    fn eval(&self, theta: f64) -> ProfilePoint {
        let mut p = self.0.eval(theta);
        let h = 1e-3 * theta.min(PI - theta).min(1.0) / 3.0;
        if h > 0.0 {
            p.psi_prime = fd::derivative6(|th| self.0.psi(th), theta, h);
        }
        p
    }
}

/// `Q(d) = k1 cos^2 d + k3 sin^2 d`.
pub fn q_weight(k1: f64, k3: f64, delta: f64) -> f64 {
    let (s, c) = delta.sin_cos();
    k1 * c * c + k3 * s * s
}

/// `P(d) = k1 sin^2 d + k3 cos^2 d`.
pub fn p_weight(k1: f64, k3: f64, delta: f64) -> f64 {
    let (s, c) = delta.sin_cos();
    k1 * s * s + k3 * c * c
}

/// Right side of the profile ODE at an interior angle.
pub fn ode_rhs(k1: f64, k3: f64, theta: f64, psi: f64) -> f64 {
    k1.sqrt() * psi.sin() / (theta.sin() * q_weight(k1, k3, psi - theta).sqrt())
}

/// Solution of the profile ODE for one `(k1, k3, t)`.
#[derive(Debug, Clone)]
pub struct ProfileSolution {
    pub k1: f64,
    pub k3: f64,
    pub t: f64,
    pub tol: f64,
    pub branch: Branch,
    pub theta_nodes: Vec<f64>,
    pub psi: Vec<f64>,
    pub psi_prime: Vec<f64>,
    pub chi: Vec<f64>,
    repr: Repr,
}

#[derive(Debug, Clone)]
enum Repr {
    Constant(f64),
    Table(LogTanTable),
}

/// Dense quintic-Hermite table of `y(x)` on `[-X_MAX, X_MAX]`.
#[derive(Debug, Clone)]
struct LogTanTable {
    k1: f64,
    k3: f64,
    sign: f64,
    sheet: i64,
    y: Vec<f64>,
    dy: Vec<f64>,
    d2y: Vec<f64>,
    a_left: f64,
    a_right: f64,
}

fn angle_from_log_tan(y: f64) -> f64 {
    if y <= 0.0 {
        2.0 * y.exp().atan()
    } else {
        PI - 2.0 * (-y).exp().atan()
    }
}

fn log_tan_half(angle: f64) -> f64 {
    if angle <= FRAC_PI_2 {
        (0.5 * angle).tan().ln()
    } else {
        -(0.5 * (PI - angle)).tan().ln()
    }
}

/// `cosh(x) / cosh(y)` without overflow.
fn cosh_ratio(x: f64, y: f64) -> f64 {
    let (ax, ay) = (x.abs(), y.abs());
    (ax - ay).exp() * (1.0 + (-2.0 * ax).exp()) / (1.0 + (-2.0 * ay).exp())
}

impl LogTanTable {
    fn len() -> usize {
        (2.0 * X_MAX / TABLE_STEP).round() as usize + 1
    }

    fn node(i: usize) -> f64 {
        -X_MAX + i as f64 * TABLE_STEP
    }

    fn slope(&self, x: f64, y: f64) -> f64 {
        let delta = angle_from_log_tan(y) - angle_from_log_tan(x);
        self.sign * (self.k1 / q_weight(self.k1, self.k3, delta)).sqrt()
    }

    fn curvature(&self, x: f64, y: f64, dy: f64) -> f64 {
        let (k1, k3) = (self.k1, self.k3);
        let delta = angle_from_log_tan(y) - angle_from_log_tan(x);
        let q = q_weight(k1, k3, delta);
        let dg = -0.5 * k1.sqrt() * q.powf(-1.5) * (k3 - k1) * (2.0 * delta).sin();
        // d(delta)/dx = sin(h) y' - sin(theta), with sin = sech in log-tan variables
        self.sign * dg * (dy / y.cosh() - 1.0 / x.cosh())
    }

    /// March from `(x_start, y_start)` across the whole table.
    fn build(k1: f64, k3: f64, sheet: i64, x_start: f64, y_start: f64, tol: f64) -> Result<Self> {
        let n = Self::len();
        let sign = if sheet.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let mut table = LogTanTable {
            k1,
            k3,
            sign,
            sheet,
            y: vec![0.0; n],
            dy: vec![0.0; n],
            d2y: vec![0.0; n],
            a_left: 0.0,
            a_right: 0.0,
        };
        let atol = (1e-3 * tol).max(1e-16);
        let f = |x: f64, y: f64| table.slope(x, y);
        let pos = ((x_start + X_MAX) / TABLE_STEP).floor();
        let below = (pos.max(0.0) as usize).min(n - 2);

        let mut y = vec![0.0; n];
        let mut up = Dopri5::new(atol, 0.0).with_max_step(TABLE_STEP);
        let mut yi = up.advance(&f, x_start, y_start, Self::node(below + 1))?;
        y[below + 1] = yi;
        for i in below + 1..n - 1 {
            yi = up.advance(&f, Self::node(i), yi, Self::node(i + 1))?;
            y[i + 1] = yi;
        }
        let mut down = Dopri5::new(atol, 0.0).with_max_step(TABLE_STEP);
        yi = down.advance(&f, x_start, y_start, Self::node(below))?;
        y[below] = yi;
        for i in (1..=below).rev() {
            yi = down.advance(&f, Self::node(i), yi, Self::node(i - 1))?;
            y[i - 1] = yi;
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite value in the profile table".into()));
        }
        for (i, &yi) in y.iter().enumerate() {
            let x = Self::node(i);
            let d = table.slope(x, yi);
            table.dy[i] = d;
            table.d2y[i] = table.curvature(x, yi, d);
        }
        table.a_left = y[0] - sign * Self::node(0);
        table.a_right = y[n - 1] - sign * Self::node(n - 1);
        table.y = y;

        // the linear continuation must match the end slopes
        let mismatch = (table.dy[0] - sign).abs().max((table.dy[n - 1] - sign).abs());
        if mismatch > 1e-12 {
            return Err(Error::Numerical(format!(
                "asymptotic patch does not match: |y' - s| = {mismatch:e} at the table ends"
            )));
        }
        Ok(table)
    }

    fn y_at(&self, x: f64) -> f64 {
        let n = self.y.len();
        if x <= -X_MAX {
            return self.sign * x + self.a_left;
        }
        if x >= X_MAX {
            return self.sign * x + self.a_right;
        }
        let pos = (x + X_MAX) / TABLE_STEP;
        let i = (pos.floor() as usize).min(n - 2);
        let u = pos - i as f64;
        let h = TABLE_STEP;
        let (u2, u3) = (u * u, u * u * u);
        let (u4, u5) = (u3 * u, u3 * u2);
        let h0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
        let h1 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
        let h2 = 0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5);
        let h3 = 0.5 * (u3 - 2.0 * u4 + u5);
        let h4 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
        let h5 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
        self.y[i] * h0
            + h * self.dy[i] * h1
            + h * h * self.d2y[i] * h2
            + h * h * self.d2y[i + 1] * h3
            + h * self.dy[i + 1] * h4
            + self.y[i + 1] * h5
    }

    fn eval(&self, theta: f64) -> ProfilePoint {
        let base = self.sheet as f64 * PI;
        let (hat, chi) = if theta <= 0.0 {
            let hat = if self.sign > 0.0 { 0.0 } else { PI };
            (hat, self.sign * (self.sign * self.a_left).exp())
        } else if theta >= PI {
            let hat = if self.sign > 0.0 { PI } else { 0.0 };
            (hat, self.sign * (-self.sign * self.a_right).exp())
        } else {
            let x = log_tan_half(theta);
            let y = self.y_at(x);
            (angle_from_log_tan(y), self.sign * cosh_ratio(x, y))
        };
        let psi = base + hat;
        let th = theta.clamp(0.0, PI);
        let psi_prime = self.k1.sqrt() * chi / q_weight(self.k1, self.k3, psi - th).sqrt();
        ProfilePoint { psi, psi_prime, chi }
    }
}

impl Profile for ProfileSolution {
    fn eval(&self, theta: f64) -> ProfilePoint {
        match &self.repr {
            Repr::Constant(c) => ProfilePoint {
                psi: *c,
                psi_prime: 0.0,
                chi: 0.0,
            },
            Repr::Table(table) => table.eval(theta),
        }
    }
}

/// `theta_i = (pi/2)(1 - cos(i pi / (n - 1)))`, clustered at both poles.
pub fn chebyshev_theta_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| {
            if i == 0 {
                0.0
            } else if i == n - 1 {
                PI
            } else {
                FRAC_PI_2 * (1.0 - (i as f64 * PI / (n - 1) as f64).cos())
            }
        })
        .collect()
}

fn check_inputs(k1: f64, k3: f64, tol: f64) -> Result<()> {
    if !(k1.is_finite() && k1 > 0.0 && k3.is_finite() && k3 > 0.0) {
        return Err(Error::InvalidConstants(format!("k1 = {k1}, k3 = {k3} must be positive")));
    }
    if !(1e-14..=1e-6).contains(&tol) {
        return Err(Error::Domain(format!("tol = {tol:e} outside [1e-14, 1e-6]")));
    }
    Ok(())
}

fn integer_multiple_of_pi(v: f64) -> Option<i64> {
    let m = (v / PI).round();
    ((v - m * PI).abs() <= 4.0 * f64::EPSILON * v.abs().max(1.0)).then_some(m as i64)
}

impl ProfileSolution {
    fn from_repr(k1: f64, k3: f64, tol: f64, branch: Branch, repr: Repr, n_nodes: usize) -> Self {
        let mut sol = ProfileSolution {
            k1,
            k3,
            t: 0.0,
            tol,
            branch,
            theta_nodes: chebyshev_theta_grid(n_nodes),
            psi: Vec::new(),
            psi_prime: Vec::new(),
            chi: Vec::new(),
            repr,
        };
        sol.t = sol.eval(FRAC_PI_2).psi;
        let points: Vec<ProfilePoint> = sol.theta_nodes.iter().map(|&th| sol.eval(th)).collect();
        sol.psi = points.iter().map(|p| p.psi).collect();
        sol.psi_prime = points.iter().map(|p| p.psi_prime).collect();
        sol.chi = points.iter().map(|p| p.chi).collect();
        sol
    }

    /// Values `(psi(0), psi(pi))`.
    pub fn endpoints(&self) -> (f64, f64) {
        (self.eval(0.0).psi, self.eval(PI).psi)
    }

    /// Class `j` with `psi(pi) - psi(0) = j pi`.
    pub fn axis_class(&self) -> i64 {
        let (a, b) = self.endpoints();
        ((b - a) / PI).round() as i64
    }

    /// Copy of this profile tabulated on a Chebyshev grid of `n` nodes.
    pub fn resampled(&self, n: usize) -> ProfileSolution {
        let mut out = ProfileSolution::from_repr(self.k1, self.k3, self.tol, self.branch, self.repr.clone(), n);
        out.t = self.t;
        out
    }

    pub fn header(&self) -> ProfileHeader {
        ProfileHeader {
            k1: self.k1,
            k3: self.k3,
            t: self.t,
            tol: self.tol,
            branch: self.branch,
            nodes: self.theta_nodes.len(),
        }
    }

    /// CSV with a `# {json header}` first line and columns `theta,psi,psi_prime,chi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("# ");
        out.push_str(&serde_json::to_string(&self.header()).expect("header serializes"));
        out.push('\n');
        out.push_str("theta,psi,psi_prime,chi\n");
        for i in 0..self.theta_nodes.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.theta_nodes[i], self.psi[i], self.psi_prime[i], self.chi[i]
            ));
        }
        out
    }

    pub fn record(&self) -> ProfileRecord {
        ProfileRecord {
            header: self.header(),
            theta: self.theta_nodes.clone(),
            psi: self.psi.clone(),
            psi_prime: self.psi_prime.clone(),
            chi: self.chi.clone(),
        }
    }
}

/// Metadata written ahead of profile tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileHeader {
    pub k1: f64,
    pub k3: f64,
    pub t: f64,
    pub tol: f64,
    pub branch: Branch,
    pub nodes: usize,
}

/// Serializable form of a [`ProfileSolution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub header: ProfileHeader,
    pub theta: Vec<f64>,
    pub psi: Vec<f64>,
    pub psi_prime: Vec<f64>,
    pub chi: Vec<f64>,
}

/// Solve with `psi(pi/2) = t` for `t` in `(0, pi)`.
pub fn solve_profile(k1: f64, k3: f64, t: f64, tol: f64) -> Result<ProfileSolution> {
    if !(t > 0.0 && t < PI) {
        return Err(Error::Domain(format!(
            "t = {t} is not in (0, pi); use solve_branch for other values"
        )));
    }
    solve_branch(k1, k3, t, tol)
}

/// Solve with `psi(pi/2) = t` for any real `t`.
pub fn solve_branch(k1: f64, k3: f64, t: f64, tol: f64) -> Result<ProfileSolution> {
    solve_from_point(k1, k3, FRAC_PI_2, t, tol)
}

/// Solve through an arbitrary interior point `psi(theta_star) = psi_star`.
pub fn solve_from_point(k1: f64, k3: f64, theta_star: f64, psi_star: f64, tol: f64) -> Result<ProfileSolution> {
    solve_from_point_with(k1, k3, theta_star, psi_star, tol, DEFAULT_NODES)
}

pub fn solve_from_point_with(
    k1: f64,
    k3: f64,
    theta_star: f64,
    psi_star: f64,
    tol: f64,
    n_nodes: usize,
) -> Result<ProfileSolution> {
    check_inputs(k1, k3, tol)?;
    if !psi_star.is_finite() {
        return Err(Error::Domain(format!("initial value {psi_star} is not finite")));
    }
    if n_nodes < 2 {
        return Err(Error::Domain("profile grid needs at least two nodes".into()));
    }
    let x_star = if theta_star > 0.0 && theta_star < PI {
        log_tan_half(theta_star)
    } else {
        f64::NAN
    };
    if !(x_star.abs() < X_MAX) {
        return Err(Error::Domain(format!(
            "initial angle {theta_star} is not inside the tabulated range of (0, pi)"
        )));
    }
    if let Some(m) = integer_multiple_of_pi(psi_star) {
        let c = m as f64 * PI;
        return Ok(ProfileSolution::from_repr(k1, k3, tol, Branch::Constant, Repr::Constant(c), n_nodes));
    }
    let sheet = (psi_star / PI).floor() as i64;
    let hat = psi_star - sheet as f64 * PI;
    let table = LogTanTable::build(k1, k3, sheet, x_star, log_tan_half(hat), tol)?;
    Ok(ProfileSolution::from_repr(
        k1,
        k3,
        tol,
        Branch::from_sheet(sheet),
        Repr::Table(table),
        n_nodes,
    ))
}

/// `arccos((cos t + cos theta) / (1 + cos t cos theta))`, the `k1 = k3` profile.
///
/// Evaluated as `2 atan(tan(t/2) tan(theta/2))`, the same function without the
/// loss of precision of `arccos` near the poles.
pub fn closed_form_one_constant(t: f64, theta: f64) -> f64 {
    if theta >= PI {
        return PI;
    }
    2.0 * ((0.5 * t).tan() * (0.5 * theta).tan()).atan()
}

/// The arccos form of [`closed_form_one_constant`], kept as a cross-check.
pub fn closed_form_one_constant_arccos(t: f64, theta: f64) -> f64 {
    let (ct, cth) = (t.cos(), theta.cos());
    ((ct + cth) / (1.0 + ct * cth)).clamp(-1.0, 1.0).acos()
}

/// Bounds on `ln tan(psi(theta)/2)` from `p1 <= dy/dx <= p2`, ordered `(lower, upper)`.
pub fn bracket_bounds(t: f64, theta: f64, k1: f64, k3: f64) -> (f64, f64) {
    let (a, b) = (k1.sqrt(), k3.sqrt());
    let p1 = a / a.max(b);
    let p2 = a / a.min(b);
    let x = log_tan_half(theta);
    let y0 = log_tan_half(t);
    let (u, v) = (y0 + p1 * x, y0 + p2 * x);
    (u.min(v), u.max(v))
}

/// Linear rates `c0 = lim psi/theta` at 0 and `cpi = lim (pi - psi)/(pi - theta)` at `pi`.
pub fn endpoint_rates(profile: &ProfileSolution) -> Result<(f64, f64)> {
    if profile.branch != Branch::IncreasingZeroToPi {
        return Err(Error::Precondition(format!(
            "endpoint rates need the increasing branch, got {:?}",
            profile.branch
        )));
    }
    let c0 = profile.eval(0.0).chi;
    let cpi = profile.eval(PI).chi;
    // the difference quotients approach the limits at rate (c theta)^2; a large
    // rate means a pole layer of width about 1/c
    let (e0, epi) = (1e-4 / (1.0 + c0), 1e-4 / (1.0 + cpi));
    let q0 = profile.psi(e0) / e0;
    let qpi = (PI - profile.psi(PI - epi)) / epi;
    let fit = (q0 - c0).abs().max((qpi - cpi).abs());
    let allowed = 1e-6 * (1.0 + c0.max(cpi));
    if !(c0 > 0.0 && cpi > 0.0 && c0.is_finite() && cpi.is_finite()) || fit > allowed {
        return Err(Error::Numerical(format!(
            "endpoint rate fit failed: c0 = {c0}, cpi = {cpi}, residual {fit:e}"
        )));
    }
    Ok((c0, cpi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_constant_matches_closed_form() {
        for t in [0.3, PI / 4.0, 2.0, 3.0] {
            let sol = solve_profile(1.0, 1.0, t, 1e-12).unwrap();
            for (&th, &psi) in sol.theta_nodes.iter().zip(&sol.psi) {
                let err = (psi - closed_form_one_constant(t, th)).abs(); assert!(err < 1e-11, "t={t} th={th} err={err:e}");
            }
            let (c0, cpi) = endpoint_rates(&sol).unwrap();
            assert!((c0 - (t / 2.0).tan()).abs() < 1e-11);
            assert!((cpi - 1.0 / (t / 2.0).tan()).abs() < 1e-10);
        }
    }

    #[test]
    fn closed_form_variants_agree() {
        for t in [0.1, 1.0, 3.0] {
            for th in [0.0, 0.2, 1.5, 2.9, PI] {
                let a = closed_form_one_constant(t, th);
                assert!((a - closed_form_one_constant_arccos(t, th)).abs() < 1e-7);
            }
            assert_eq!(closed_form_one_constant(t, 0.0), 0.0);
            assert_eq!(closed_form_one_constant(t, PI), PI);
        }
        assert!((closed_form_one_constant(FRAC_PI_2, 0.7) - 0.7).abs() < 1e-15);
        assert!((closed_form_one_constant(PI / 4.0, FRAC_PI_2) - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn midpoint_pi_over_two_gives_identity() {
        let sol = solve_profile(7.0, 0.3, FRAC_PI_2, 1e-10).unwrap();
        for (&th, &psi) in sol.theta_nodes.iter().zip(&sol.psi) {
            assert!((psi - th).abs() < 1e-12);
        }
    }

    #[test]
    fn reference_values() {
        let sol = solve_profile(4.0, 1.0, 1.0, 1e-12).unwrap();
        assert!((sol.psi(2.0) - 1.465_769_918_415_225_1).abs() < 1e-11);
        assert!((sol.psi(0.5) - 0.250_170_005_692_734_88).abs() < 1e-11);
        let (c0, cpi) = endpoint_rates(&sol).unwrap();
        assert!((c0 - 0.486_386_006_486_097_1).abs() < 1e-10);
        assert!((cpi - 1.596_952_986_503_125).abs() < 1e-10);
    }

    #[test]
    fn branches_and_endpoints() {
        let s = solve_branch(1.0, 1.0, PI, 1e-10).unwrap();
        assert_eq!(s.branch, Branch::Constant);
        assert!(s.psi.iter().all(|&p| p == PI));

        let s = solve_branch(1.0, 1.0, 2.0 * PI + FRAC_PI_2, 1e-10).unwrap();
        assert_eq!(s.branch, Branch::ShiftedBy2LPi { shift: 1, decreasing: false });
        for (&th, &psi) in s.theta_nodes.iter().zip(&s.psi) {
            assert!((psi - 2.0 * PI - th).abs() < 1e-11);
        }

        let s = solve_branch(1.0, 1.0, 1.5 * PI, 1e-10).unwrap();
        assert_eq!(s.branch, Branch::DecreasingTwoPiToPi);
        let (a, b) = s.endpoints();
        assert_eq!((a, b), (2.0 * PI, PI));
        assert!(s.psi.windows(2).all(|w| w[1] <= w[0]));

        let s = solve_branch(3.0, 1.0, -0.7, 1e-10).unwrap();
        assert_eq!(s.branch, Branch::NegativeMirror);
        assert_eq!(s.endpoints(), (0.0, -PI));
        assert_eq!(s.axis_class(), -1);

        let s = solve_branch(3.0, 1.0, -2.0 * PI + 0.5, 1e-10).unwrap();
        assert_eq!(s.branch, Branch::ShiftedBy2LPi { shift: -1, decreasing: false });
    }

    #[test]
    fn negative_branch_mirrors_only_for_equal_constants() {
        let pos = solve_profile(1.0, 1.0, 0.9, 1e-12).unwrap();
        let neg = solve_branch(1.0, 1.0, -0.9, 1e-12).unwrap();
        for &th in &pos.theta_nodes {
            assert!((neg.psi(th) + pos.psi(th)).abs() < 1e-11);
        }
        let pos = solve_profile(4.0, 1.0, 0.9, 1e-12).unwrap();
        let neg = solve_branch(4.0, 1.0, -0.9, 1e-12).unwrap();
        let gap = pos.theta_nodes.iter().map(|&th| (neg.psi(th) + pos.psi(th)).abs()).fold(0.0, f64::max);
        assert!(gap > 1e-3);
    }

    #[test]
    fn restart_from_interior_point_reproduces_profile() {
        let sol = solve_profile(4.0, 0.5, 0.6, 1e-12).unwrap();
        for th in [0.05, 1.0, 2.9] {
            let again = solve_from_point(4.0, 0.5, th, sol.psi(th), 1e-12).unwrap();
            assert_eq!(again.branch, Branch::IncreasingZeroToPi);
            for &x in &sol.theta_nodes {
                assert!((again.psi(x) - sol.psi(x)).abs() < 1e-10);
            }
            assert!((again.t - 0.6).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(solve_profile(1.0, 1.0, 0.0, 1e-10), Err(Error::Domain(_))));
        assert!(matches!(solve_profile(1.0, 1.0, 4.0, 1e-10), Err(Error::Domain(_))));
        assert!(matches!(solve_profile(1.0, 1.0, 1.0, 1e-3), Err(Error::Domain(_))));
        assert!(matches!(solve_profile(-1.0, 1.0, 1.0, 1e-10), Err(Error::InvalidConstants(_))));
        let s = solve_branch(1.0, 1.0, 1.5 * PI, 1e-10).unwrap();
        assert!(matches!(endpoint_rates(&s), Err(Error::Precondition(_))));
    }

    #[test]
    fn bracket_degenerates_for_equal_constants() {
        let (lo, hi) = bracket_bounds(1.0, 0.4, 2.0, 2.0);
        let exact = log_tan_half(closed_form_one_constant(1.0, 0.4));
        assert!((lo - exact).abs() < 1e-14 && (hi - exact).abs() < 1e-14);
        let (lo, hi) = bracket_bounds(1.0, FRAC_PI_2, 4.0, 1.0);
        assert!((lo - log_tan_half(1.0)).abs() < 1e-15 && (hi - lo).abs() < 1e-15);
    }

    #[test]
    fn csv_has_header_and_columns() {
        let sol = solve_profile(2.0, 1.0, 1.0, 1e-10).unwrap().resampled(16);
        let csv = sol.to_csv();
        let mut lines = csv.lines();
        let head = lines.next().unwrap();
        let header: ProfileHeader = serde_json::from_str(head.trim_start_matches("# ")).unwrap();
        assert_eq!(header.branch, Branch::IncreasingZeroToPi);
        assert_eq!(lines.next().unwrap(), "theta,psi,psi_prime,chi");
        assert_eq!(lines.count(), 16);
    }
}
