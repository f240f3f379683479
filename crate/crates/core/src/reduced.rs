//! Reduced energy `J[psi]` of equivariant liftings, its Euler-Lagrange
//! residuals, the first integral of the profile equation, the boundary
//! identity for pairs `(A, B)` with `d_theta B = -A`, and the completed-square
//! form of `J`. Every reduced quantity can be checked against the direct
//! three-dimensional quadrature in [`direct_energy`].

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::director::{spherical_to_cartesian, DirectorField};
use crate::error::{Error, Result};
use crate::fd;
use crate::frank::{energy_density, FrankConstants};
use crate::lifting::{Lifting, LiftingSample};
use crate::profile::{p_weight, q_weight, Profile};
use crate::quadrature::{adaptive_gauss, Rule};

/// Sign of the boundary term of `J`.
///
/// Fixed by requiring the reduced energy of `psi = theta` with `k1 = k3 = 1` to
/// equal the direct energy `8 pi` of the hedgehog; the opposite sign gives 0.
/// The completed-square identity closes with the same sign.
pub const BOUNDARY_SIGN: f64 = -1.0;

/// Gauss nodes used for boundary integrals over `theta` at `r = 1`.
pub const BOUNDARY_NODES: usize = 512;

/// Tensor Gauss grid on `D = (0,1) x (0,pi)`; the poles are never nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub r: Rule,
    pub theta: Rule,
}

impl Grid2D {
    pub fn gauss(n_r: usize, n_theta: usize) -> Self {
        Grid2D {
            r: Rule::gauss_legendre(n_r, 0.0, 1.0),
            theta: Rule::gauss_legendre(n_theta, 0.0, PI),
        }
    }

    /// Composite Gauss grid with panels between the given breakpoints.
    pub fn composite(r_breaks: &[f64], n_r: usize, theta_breaks: &[f64], n_theta: usize) -> Self {
        Grid2D {
            r: Rule::composite_gauss(r_breaks, n_r),
            theta: Rule::composite_gauss(theta_breaks, n_theta),
        }
    }

    /// The `128 x 256` default.
    pub fn standard() -> Self {
        Self::gauss(128, 256)
    }

    pub fn len(&self) -> usize {
        self.r.len() * self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `sum w r^2 sin(theta)`, which approximates `2/3`.
    pub fn weighted_volume(&self) -> f64 {
        self.integrate(|r, th| r * r * th.sin())
    }

    pub fn integrate<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> f64 {
        let mut total = 0.0;
        for (&r, &wr) in self.r.nodes.iter().zip(&self.r.weights) {
            let mut row = 0.0;
            for (&th, &wt) in self.theta.nodes.iter().zip(&self.theta.weights) {
                row += wt * f(r, th);
            }
            total += wr * row;
        }
        total
    }
}

/// The five summands of `J` and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub bulk_rr: f64,
    pub bulk_tt: f64,
    pub bulk_cross: f64,
    pub bulk_singular: f64,
    pub boundary: f64,
    pub total: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub n_boundary: usize,
    pub sigma: f64,
}

/// Bulk integrand of `J` at one point, without the factor `pi`:
/// `[rr, tt, cross, singular]`.
pub fn bulk_terms(s: &LiftingSample, r: f64, theta: f64, k1: f64, k3: f64) -> [f64; 4] {
    let st = theta.sin();
    let delta = s.psi - theta;
    let (sd, cd) = delta.sin_cos();
    [
        p_weight(k1, k3, delta) * s.psi_r * s.psi_r * r * r * st,
        q_weight(k1, k3, delta) * s.psi_theta * s.psi_theta * st,
        -2.0 * (k1 - k3) * sd * cd * s.psi_r * s.psi_theta * r * st,
        k1 * s.chi * s.chi * st,
    ]
}

/// `sigma k1 pi int_0^pi [(psi - sin psi cos psi) cos theta - sin^2 psi sin theta] dtheta` at `r = 1`.
pub fn boundary_term<L: Lifting + ?Sized>(lifting: &L, k1: f64, n_theta: usize) -> f64 {
    let rule = Rule::gauss_legendre(n_theta, 0.0, PI);
    let bracket = rule.integrate(|th| {
        let psi = lifting.sample(1.0, th).psi;
        let (sp, cp) = psi.sin_cos();
        (psi - sp * cp) * th.cos() - sp * sp * th.sin()
    });
    BOUNDARY_SIGN * k1 * PI * bracket
}

/// `J[psi]` on `grid`, with the boundary term on [`BOUNDARY_NODES`] Gauss nodes.
pub fn reduced_energy<L: Lifting + ?Sized>(lifting: &L, k1: f64, k3: f64, grid: &Grid2D) -> Result<EnergyBreakdown> {
    let mut sums = [0.0; 4];
    for (&r, &wr) in grid.r.nodes.iter().zip(&grid.r.weights) {
        let mut row = [0.0; 4];
        for (&th, &wt) in grid.theta.nodes.iter().zip(&grid.theta.weights) {
            let terms = bulk_terms(&lifting.sample(r, th), r, th, k1, k3);
            for (acc, v) in row.iter_mut().zip(terms) {
                *acc += wt * v;
            }
        }
        for (acc, v) in sums.iter_mut().zip(row) {
            *acc += wr * v;
        }
    }
    let [rr, tt, cross, singular] = sums.map(|v| PI * v);
    let boundary = boundary_term(lifting, k1, BOUNDARY_NODES);
    if !(rr.is_finite() && tt.is_finite() && cross.is_finite() && singular.is_finite() && boundary.is_finite()) {
        return Err(Error::Quadrature(format!(
            "non-finite partial sums (rr {rr}, tt {tt}, cross {cross}, singular {singular}, boundary {boundary})"
        )));
    }
    Ok(EnergyBreakdown {
        bulk_rr: rr,
        bulk_tt: tt,
        bulk_cross: cross,
        bulk_singular: singular,
        boundary,
        total: rr + tt + cross + singular + boundary,
        n_r: grid.r.len(),
        n_theta: grid.theta.len(),
        n_boundary: BOUNDARY_NODES,
        sigma: BOUNDARY_SIGN,
    })
}

/// Quadrature rules for [`direct_energy`].
#[derive(Debug, Clone, PartialEq)]
pub struct DirectResolution {
    pub r_breaks: Vec<f64>,
    pub n_r: usize,
    pub theta_breaks: Vec<f64>,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for DirectResolution {
    /// Gauss 8 in `r` (exact for zero-homogeneous fields), Gauss 256 in `theta`, 8 trapezoid nodes in `phi`.
    fn default() -> Self {
        DirectResolution {
            r_breaks: vec![0.0, 1.0],
            n_r: 8,
            theta_breaks: vec![0.0, PI],
            n_theta: 256,
            n_phi: 8,
        }
    }
}

impl DirectResolution {
    /// Panels aligned with the edges of a rectangle in `D`.
    pub fn with_panels(r_edges: &[f64], n_r: usize, theta_edges: &[f64], n_theta: usize) -> Self {
        let mut r_breaks = vec![0.0];
        r_breaks.extend(r_edges.iter().copied().filter(|&v| v > 0.0 && v < 1.0));
        r_breaks.push(1.0);
        let mut theta_breaks = vec![0.0];
        theta_breaks.extend(theta_edges.iter().copied().filter(|&v| v > 0.0 && v < PI));
        theta_breaks.push(PI);
        DirectResolution {
            r_breaks,
            n_r,
            theta_breaks,
            n_theta,
            n_phi: 8,
        }
    }
}

fn shell_energy<F: DirectorField + ?Sized>(field: &F, k: &FrankConstants, r: f64, th: &Rule, ph: &Rule) -> Result<f64> {
    let mut total = 0.0;
    for (&t, &wt) in th.nodes.iter().zip(&th.weights) {
        let mut ring = 0.0;
        for (&p, &wp) in ph.nodes.iter().zip(&ph.weights) {
            let x = spherical_to_cartesian(r, t, p);
            ring += wp * energy_density(&field.sampled_state(&x)?, k);
        }
        total += wt * ring * t.sin();
    }
    Ok(total * r * r)
}

/// `int_B W(u, grad u) dx` over the unit ball by spherical tensor quadrature,
/// with fourth-order finite-difference gradients.
///
/// Fails with an integrability error when the energy per shell grows like
/// `r^-p` with `p >= 0.99` towards the origin.
pub fn direct_energy<F: DirectorField + ?Sized>(field: &F, k: &FrankConstants, res: &DirectResolution) -> Result<f64> {
    let r_rule = Rule::composite_gauss(&res.r_breaks, res.n_r);
    let th_rule = Rule::composite_gauss(&res.theta_breaks, res.n_theta);
    let ph_rule = Rule::periodic_trapezoid(res.n_phi, 0.0, 2.0 * PI);
    let mut total = 0.0;
    let mut first_shell = None;
    for (&r, &wr) in r_rule.nodes.iter().zip(&r_rule.weights) {
        let s = shell_energy(field, k, r, &th_rule, &ph_rule)?;
        first_shell.get_or_insert(s);
        total += wr * s;
    }
    let r1 = r_rule.nodes[0];
    let s1 = first_shell.unwrap_or(0.0);
    let s0 = shell_energy(field, k, 1e-3 * r1, &th_rule, &ph_rule)?;
    if s1.abs() > 1e-300 && s0.abs() > 1e-300 {
        let p = (s0.abs() / s1.abs()).ln() / 1e3f64.ln();
        if p >= 0.99 {
            return Err(Error::Integrability(format!(
                "energy per shell grows like r^-{p:.3} towards the origin"
            )));
        }
    }
    if !total.is_finite() {
        return Err(Error::Integrability(format!("energy quadrature gave {total}")));
    }
    Ok(total)
}

/// A pair `(A(s, theta), B(s, theta))` with `d_theta B = -A`.
pub trait BoundaryPair: Sync {
    fn a(&self, s: f64, theta: f64) -> f64;
    fn b(&self, s: f64, theta: f64) -> f64;
}

/// `A = -sin(s - theta) sin s`, `B = cos(s - theta) sin s`, from the cross term of the energy.
#[derive(Debug, Clone, Copy, Default)]
pub struct CrossTermPair;

impl BoundaryPair for CrossTermPair {
    fn a(&self, s: f64, theta: f64) -> f64 {
        -(s - theta).sin() * s.sin()
    }

    fn b(&self, s: f64, theta: f64) -> f64 {
        (s - theta).cos() * s.sin()
    }
}

/// The pair of the completed square:
/// `A = -(k1 - k3) sin d cos d sin s / sqrt(Q)`,
/// `B = (k1 k3 + (k1 - k3)^2 sin^2 d cos^2 d) sin s / (P sqrt(Q))`, `d = s - theta`.
#[derive(Debug, Clone, Copy)]
pub struct CompletedSquarePair {
    pub k1: f64,
    pub k3: f64,
}

impl BoundaryPair for CompletedSquarePair {
    fn a(&self, s: f64, theta: f64) -> f64 {
        let d = s - theta;
        let (sd, cd) = d.sin_cos();
        -(self.k1 - self.k3) * sd * cd * s.sin() / q_weight(self.k1, self.k3, d).sqrt()
    }

    fn b(&self, s: f64, theta: f64) -> f64 {
        let (k1, k3) = (self.k1, self.k3);
        let d = s - theta;
        let (sd, cd) = d.sin_cos();
        let num = k1 * k3 + (k1 - k3).powi(2) * sd * sd * cd * cd;
        num * s.sin() / (p_weight(k1, k3, d) * q_weight(k1, k3, d).sqrt())
    }
}

/// `A = 0`, `B = 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitPair;

impl BoundaryPair for UnitPair {
    fn a(&self, _s: f64, _theta: f64) -> f64 {
        0.0
    }

    fn b(&self, _s: f64, _theta: f64) -> f64 {
        1.0
    }
}

/// Largest `|d_theta B + A|` over a fixed sample of points.
pub fn pair_compatibility<P: BoundaryPair + ?Sized>(pair: &P) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..13 {
        let s = -1.0 + 0.61 * i as f64;
        for j in 1..12 {
            let th = PI * j as f64 / 12.0;
            let db = fd::derivative6(|t| pair.b(s, t), th, 1e-3);
            worst = worst.max((db + pair.a(s, th)).abs());
        }
    }
    worst
}

/// `int_0^pi int_0^{psi(1,theta)} A(s,theta) ds dtheta + int_0^{j pi} B(s, pi) ds`.
pub fn abcd_boundary_value<P: BoundaryPair + ?Sized, L: Lifting + ?Sized>(
    pair: &P,
    lifting: &L,
    j: i64,
) -> Result<f64> {
    let gap = pair_compatibility(pair);
    if gap > 1e-10 {
        return Err(Error::Precondition(format!(
            "pair is not compatible: |d_theta B + A| = {gap:e}"
        )));
    }
    let rule = Rule::gauss_legendre(BOUNDARY_NODES, 0.0, PI);
    let area = rule.integrate(|th| {
        let top = lifting.sample(1.0, th).psi;
        adaptive_gauss(&|s| pair.a(s, th), 0.0, top, 1e-14)
    });
    let axis = adaptive_gauss(&|s| pair.b(s, PI), 0.0, j as f64 * PI, 1e-14);
    Ok(area + axis)
}

/// `int_0^1 int_0^pi [r A(psi,theta) psi_r + B(psi,theta) psi_theta] dtheta dr` on `grid`.
pub fn abcd_left_side<P: BoundaryPair + ?Sized, L: Lifting + ?Sized>(pair: &P, lifting: &L, grid: &Grid2D) -> f64 {
    grid.integrate(|r, th| {
        let s = lifting.sample(r, th);
        r * pair.a(s.psi, th) * s.psi_r + pair.b(s.psi, th) * s.psi_theta
    })
}

/// Step below `h` that stays well inside the distance to the nearest pole,
/// where boundary layers of width comparable to that distance can form.
fn theta_step(theta: f64, h: f64) -> f64 {
    h.min(theta / 16.0).min((PI - theta) / 16.0)
}

/// `d/dtheta [sin(theta) sqrt(Q) psi'] - k1 chi cos(psi) / sqrt(Q)` at each angle.
///
/// The outer derivative is a sixth-order central difference with a step
/// shrunk near the poles.
pub fn el_residual_profile<P: Profile + ?Sized>(profile: &P, k1: f64, k3: f64, thetas: &[f64]) -> Vec<f64> {
    let flux = |th: f64| {
        let p = profile.eval(th);
        th.sin() * q_weight(k1, k3, p.psi - th).sqrt() * p.psi_prime
    };
    thetas
        .iter()
        .map(|&th| {
            let p = profile.eval(th);
            let h = theta_step(th, 1e-5);
            fd::derivative6(flux, th, h) - k1 * p.chi * p.psi.cos() / q_weight(k1, k3, p.psi - th).sqrt()
        })
        .collect()
}

/// `sin^2(theta) Q (psi')^2 - k1 sin^2(psi)` at each angle.
pub fn first_integral<P: Profile + ?Sized>(profile: &P, k1: f64, k3: f64, thetas: &[f64]) -> Vec<f64> {
    thetas
        .iter()
        .map(|&th| {
            let p = profile.eval(th);
            let st2 = th.sin().powi(2);
            st2 * (q_weight(k1, k3, p.psi - th) * p.psi_prime * p.psi_prime - k1 * p.chi * p.chi)
        })
        .collect()
}

/// Divergence-form fluxes and source of the Euler-Lagrange equation of `J`.
fn el_parts(s: &LiftingSample, r: f64, theta: f64, k1: f64, k3: f64) -> (f64, f64, f64) {
    let st = theta.sin();
    let d = s.psi - theta;
    let (sd, cd) = d.sin_cos();
    let sc = sd * cd;
    let kd = k1 - k3;
    let fr = r * r * st * p_weight(k1, k3, d) * s.psi_r - kd * r * st * sc * s.psi_theta;
    let ft = st * q_weight(k1, k3, d) * s.psi_theta - kd * r * st * sc * s.psi_r;
    let src = kd * sc * (r * r * s.psi_r * s.psi_r - s.psi_theta * s.psi_theta) * st
        - kd * r * (2.0 * d).cos() * s.psi_r * s.psi_theta * st
        + k1 * s.chi * s.psi.cos();
    (fr, ft, src)
}

/// Pointwise residual of the Euler-Lagrange equation of `J` on a grid.
#[derive(Debug, Clone)]
pub struct ElResidual2d {
    /// `values[i * n_theta + j]` at `(r_i, theta_j)`.
    pub values: Vec<f64>,
    /// `sqrt(sum w R^2)` with the grid weights.
    pub l2: f64,
    pub max_abs: f64,
}

/// `-d_r F_r - d_theta F_theta + S` by central differences with step `h`
/// (fourth order in `r`, sixth order in `theta`).
pub fn el_residual_2d<L: Lifting + ?Sized>(lifting: &L, k1: f64, k3: f64, grid: &Grid2D, h: f64) -> ElResidual2d {
    let mut values = Vec::with_capacity(grid.len());
    let mut l2 = 0.0;
    for (&r, &wr) in grid.r.nodes.iter().zip(&grid.r.weights) {
        let hr = h.min(r / 4.0);
        for (&th, &wt) in grid.theta.nodes.iter().zip(&grid.theta.weights) {
            let ht = theta_step(th, h);
            let dfr = fd::derivative(|rr| el_parts(&lifting.sample(rr, th), rr, th, k1, k3).0, r, hr);
            let dft = fd::derivative6(|tt| el_parts(&lifting.sample(r, tt), r, tt, k1, k3).1, th, ht);
            let src = el_parts(&lifting.sample(r, th), r, th, k1, k3).2;
            let v = -dfr - dft + src;
            l2 += wr * wt * v * v;
            values.push(v);
        }
    }
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ElResidual2d {
        values,
        l2: l2.sqrt(),
        max_abs,
    }
}

/// The two squares of the completed-square form of `J` and the remaining
/// part fixed by the trace at `r = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompletedSquare {
    pub deficit_rr: f64,
    pub deficit_tt: f64,
    pub constant_part: f64,
}

impl CompletedSquare {
    pub fn total(&self) -> f64 {
        self.deficit_rr + self.deficit_tt + self.constant_part
    }
}

/// Integrands of the two squares at one point, without the factor `pi`.
pub fn deficit_terms(s: &LiftingSample, r: f64, theta: f64, k1: f64, k3: f64) -> (f64, f64) {
    let st = theta.sin();
    let d = s.psi - theta;
    let (sd, cd) = d.sin_cos();
    let p = p_weight(k1, k3, d);
    let q = q_weight(k1, k3, d);
    let g = s.psi_theta - k1.sqrt() * s.chi / q.sqrt();
    let rr = r * s.psi_r - (k1 - k3) * sd * cd / p * g;
    (p * rr * rr * st, k1 * k3 / p * g * g * st)
}

/// Largest `|psi(1, theta) - psi_t(theta)|` over the boundary nodes.
pub fn trace_mismatch<L: Lifting + ?Sized, P: Profile + ?Sized>(lifting: &L, profile: &P) -> f64 {
    Rule::gauss_legendre(BOUNDARY_NODES, 0.0, PI)
        .nodes
        .iter()
        .map(|&th| (lifting.sample(1.0, th).psi - profile.psi(th)).abs())
        .fold(0.0, f64::max)
}

/// Completed-square decomposition of `J[psi]` for `psi` with the trace of `profile` at `r = 1`.
pub fn completed_square_energy<L: Lifting + ?Sized, P: Profile + ?Sized>(
    lifting: &L,
    profile: &P,
    k1: f64,
    k3: f64,
    grid: &Grid2D,
) -> Result<CompletedSquare> {
    let mismatch = trace_mismatch(lifting, profile);
    if mismatch > 1e-8 {
        return Err(Error::Precondition(format!(
            "trace at r = 1 differs from the profile by {mismatch:e}"
        )));
    }
    let (mut rr, mut tt) = (0.0, 0.0);
    for (&r, &wr) in grid.r.nodes.iter().zip(&grid.r.weights) {
        for (&th, &wt) in grid.theta.nodes.iter().zip(&grid.theta.weights) {
            let (a, b) = deficit_terms(&lifting.sample(r, th), r, th, k1, k3);
            rr += wr * wt * a;
            tt += wr * wt * b;
        }
    }
    let j = {
        let a = profile.psi(0.0);
        let b = profile.psi(PI);
        ((b - a) / PI).round() as i64
    };
    let pair_part = abcd_boundary_value(&CompletedSquarePair { k1, k3 }, &profile, j)?;
    let constant_part = boundary_term(&profile, k1, BOUNDARY_NODES) + 2.0 * k1.sqrt() * PI * pair_part;
    Ok(CompletedSquare {
        deficit_rr: PI * rr,
        deficit_tt: PI * tt,
        constant_part,
    })
}

/// `|u . (curl u)|` at a point by finite differences; zero for the equivariant ansatz.
pub fn twist_density<F: DirectorField + ?Sized>(field: &F, x: &Vector3<f64>) -> f64 {
    let jac = fd::jacobian(|y| field.value(y), x, 1e-4 * x.norm());
    field.value(x).dot(&fd::curl_of(&jac)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::director::{build_director, ConstantField, Hedgehog};
    use crate::profile::{hedgehog_profile, solve_profile, FnProfile};

    #[test]
    fn grid_volume_is_two_thirds() {
        assert!((Grid2D::gauss(16, 32).weighted_volume() - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn hedgehog_reduced_energy_is_eight_pi() {
        let e = reduced_energy(&hedgehog_profile(), 1.0, 1.0, &Grid2D::gauss(16, 64)).unwrap();
        assert!((e.total - 8.0 * PI).abs() < 1e-12, "{e:?}");
        assert!((e.bulk_tt - 2.0 * PI).abs() < 1e-12);
        assert!((e.bulk_singular - 2.0 * PI).abs() < 1e-12);
        assert!((e.boundary - 4.0 * PI).abs() < 1e-12);
        let k = FrankConstants::minus_k2(1.0, 1.0, 1.0).unwrap();
        let d = direct_energy(&Hedgehog, &k, &DirectResolution::default()).unwrap();
        assert!((d - 8.0 * PI).abs() < 1e-8 * 8.0 * PI);
    }

    #[test]
    fn constant_map_has_zero_energy() {
        let zero = FnProfile::new(|_| 0.0, |_| 0.0);
        let e = reduced_energy(&zero, 2.0, 1.0, &Grid2D::gauss(8, 16)).unwrap();
        assert_eq!(e.total, 0.0);
        let k = FrankConstants::minus_k2(2.0, 1.0, 1.0).unwrap();
        assert_eq!(direct_energy(&ConstantField(Vector3::z()), &k, &DirectResolution::default()).unwrap(), 0.0);
    }

    #[test]
    fn reduced_matches_direct_for_a_solved_profile() {
        let sol = solve_profile(4.0, 1.0, 1.0, 1e-12).unwrap();
        let e = reduced_energy(&sol, 4.0, 1.0, &Grid2D::gauss(8, 256)).unwrap();
        assert!((e.total - 91.768_465_846_870_55).abs() < 1e-8, "{}", e.total);
        let k = FrankConstants::minus_k2(4.0, 1.0, 1.0).unwrap();
        let d = direct_energy(&build_director(&sol), &k, &DirectResolution::default()).unwrap();
        assert!((e.total - d).abs() < 1e-7 * d, "{} {d}", e.total);
    }

    #[test]
    fn pairs_are_compatible() {
        assert!(pair_compatibility(&CrossTermPair) < 1e-12);
        assert!(pair_compatibility(&CompletedSquarePair { k1: 4.0, k3: 0.5 }) < 1e-11);
        struct Bad;
        impl BoundaryPair for Bad {
            fn a(&self, s: f64, _t: f64) -> f64 {
                s
            }
            fn b(&self, _s: f64, _t: f64) -> f64 {
                1.0
            }
        }
        assert!(matches!(abcd_boundary_value(&Bad, &hedgehog_profile(), 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn abcd_reference_values() {
        let v = abcd_boundary_value(&CrossTermPair, &hedgehog_profile(), 1).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        let v = abcd_boundary_value(&UnitPair, &hedgehog_profile(), 1).unwrap();
        assert!((v - PI).abs() < 1e-14);
        let l = abcd_left_side(&CrossTermPair, &hedgehog_profile(), &Grid2D::gauss(4, 64));
        assert!((l - 2.0).abs() < 1e-13);
    }

    #[test]
    fn hedgehog_is_critical_for_all_constants() {
        let thetas = Rule::gauss_legendre(64, 0.0, PI).nodes;
        let res = el_residual_profile(&hedgehog_profile(), 4.0, 0.5, &thetas);
        assert!(res.iter().all(|v| v.abs() < 1e-9));
        let bent = FnProfile::new(|t: f64| t + 0.1 * t.sin(), |t: f64| 1.0 + 0.1 * t.cos());
        let res = el_residual_profile(&bent, 1.0, 1.0, &thetas);
        let sup = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // sin(theta) is tangent to the one-constant family at t = pi/2, so the
        // residual is quadratic in the 0.1 amplitude
        assert!((sup - 0.007_840_132_434_766).abs() < 2e-4, "{sup}");
    }

    #[test]
    fn first_integral_examples() {
        let thetas = Rule::gauss_legendre(32, 0.0, PI).nodes;
        assert!(first_integral(&hedgehog_profile(), 1.0, 1.0, &thetas).iter().all(|c| c.abs() < 1e-15));
        let half = FnProfile::new(|t: f64| 0.5 * t, |_| 0.5);
        let c = first_integral(&half, 1.0, 1.0, &thetas);
        assert!((c[0] - c[16]).abs() > 0.1);
    }

    #[test]
    fn completed_square_of_the_hedgehog() {
        let cs = completed_square_energy(&hedgehog_profile(), &hedgehog_profile(), 1.0, 1.0, &Grid2D::gauss(8, 64)).unwrap();
        assert!(cs.deficit_rr.abs() < 1e-28 && cs.deficit_tt.abs() < 1e-28);
        assert!((cs.constant_part - 8.0 * PI).abs() < 1e-12);
    }
}
