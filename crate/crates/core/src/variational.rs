//! Perturbations in the admissible class, minimality probes of `J` around
//! solved profiles, and a discrete minimization of `J` with the trace at
//! `r = 1` held fixed.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifting::{shifted_chi, Lifting, LiftingSample, ScalarField};
use crate::profile::{p_weight, q_weight, Profile, ProfilePoint};
use crate::quadrature::{legendre_nodes, Rule};
use crate::reduced::{bulk_terms, deficit_terms, Grid2D};

/// Rectangle `[r_min, r_max] x [theta_min, theta_max]` in the closure of `D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub r_min: f64,
    pub r_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Support {
    /// `0 < r_min < r_max <= 1` and `0 < theta_min < theta_max < pi`.
    pub fn new(r_min: f64, r_max: f64, theta_min: f64, theta_max: f64) -> Result<Self> {
        let ok = r_min > 0.0 && r_max > r_min && r_max <= 1.0 && theta_min > 0.0 && theta_max > theta_min && theta_max < PI;
        if !ok {
            return Err(Error::Domain(format!(
                "degenerate support [{r_min}, {r_max}] x [{theta_min}, {theta_max}]"
            )));
        }
        Ok(Support {
            r_min,
            r_max,
            theta_min,
            theta_max,
        })
    }

    /// True when the support reaches `r = 1`, so the trace there is not fixed.
    pub fn touches_boundary(&self) -> bool {
        self.r_max >= 1.0
    }

    /// Gauss grid covering the rectangle.
    pub fn grid(&self, n_r: usize, n_theta: usize) -> Grid2D {
        Grid2D {
            r: Rule::gauss_legendre(n_r, self.r_min, self.r_max),
            theta: Rule::gauss_legendre(n_theta, self.theta_min, self.theta_max),
        }
    }
}

/// `((x - a)(b - x))^3 (4 / (b - a)^2)^3` on `(a, b)` and its derivative; 1 at the midpoint.
fn bump(x: f64, a: f64, b: f64) -> (f64, f64) {
    if x <= a || x >= b {
        return (0.0, 0.0);
    }
    let scale = (4.0 / ((b - a) * (b - a))).powi(3);
    let g = (x - a) * (b - x);
    let dg = a + b - 2.0 * x;
    (scale * g.powi(3), scale * 3.0 * g * g * dg)
}

/// `((r - a)/(1 - a))^3` for `r > a`; used when the support reaches `r = 1`.
fn ramp(x: f64, a: f64) -> (f64, f64) {
    if x <= a {
        return (0.0, 0.0);
    }
    let w = 1.0 - a;
    let u = (x - a) / w;
    (u.powi(3), 3.0 * u * u / w)
}

/// Angular factor of a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trig {
    One,
    Sin,
    Sin2,
}

impl Trig {
    fn eval(self, th: f64) -> (f64, f64) {
        match self {
            Trig::One => (1.0, 0.0),
            Trig::Sin => (th.sin(), th.cos()),
            Trig::Sin2 => ((2.0 * th).sin(), 2.0 * (2.0 * th).cos()),
        }
    }
}

/// One term `c r^k T(theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub power: i32,
    pub trig: Trig,
    pub coefficient: f64,
}

pub const MAX_MODES: usize = 9;

/// `phi = scale B_r(r) B_theta(theta) sum_i c_i r^k_i T_i(theta)` on a support rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub support: Support,
    pub modes: Vec<Mode>,
    pub scale: f64,
    /// Squared norm `||phi||_0^2`.
    pub x0_norm: f64,
}

impl Perturbation {
    /// Perturbation from explicit modes, normalized to unit squared norm.
    pub fn from_modes(support: Support, modes: Vec<Mode>) -> Result<Self> {
        let mut phi = Perturbation {
            support,
            modes,
            scale: 1.0,
            x0_norm: 0.0,
        };
        let n = x0_norm(&phi);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Domain("perturbation vanishes identically".into()));
        }
        phi.scale = 1.0 / n.sqrt();
        phi.x0_norm = x0_norm(&phi);
        Ok(phi)
    }

    pub fn scaled(&self, c: f64) -> Perturbation {
        let mut out = self.clone();
        out.scale *= c;
        out.x0_norm *= c * c;
        out
    }
}

impl ScalarField for Perturbation {
    fn values(&self, r: f64, theta: f64) -> [f64; 4] {
        let s = &self.support;
        let (br, dbr) = if s.touches_boundary() {
            ramp(r, s.r_min)
        } else {
            bump(r, s.r_min, s.r_max)
        };
        let (bt, dbt) = bump(theta, s.theta_min, s.theta_max);
        if br == 0.0 && dbr == 0.0 || bt == 0.0 && dbt == 0.0 {
            return [0.0; 4];
        }
        let (mut m, mut mr, mut mt) = (0.0, 0.0, 0.0);
        for mode in &self.modes {
            let (t, dt) = mode.trig.eval(theta);
            let rk = r.powi(mode.power);
            let drk = if mode.power == 0 {
                0.0
            } else {
                mode.power as f64 * r.powi(mode.power - 1)
            };
            m += mode.coefficient * rk * t;
            mr += mode.coefficient * drk * t;
            mt += mode.coefficient * rk * dt;
        }
        let c = self.scale;
        let v = c * br * bt * m;
        [
            v,
            c * (dbr * m + br * mr) * bt,
            c * br * (dbt * m + bt * mt),
            v / theta.sin(),
        ]
    }
}

/// Gauss nodes per axis for norms and probes on a support rectangle.
pub const SUPPORT_NODES: (usize, usize) = (24, 32);

/// `||phi||_0^2 = int [phi_r^2 + phi_theta^2/r^2 + phi^2/(r^2 sin^2)] r^2 sin(theta)`.
pub fn x0_norm(phi: &Perturbation) -> f64 {
    x0_norm_on(phi, &phi.support.grid(SUPPORT_NODES.0, SUPPORT_NODES.1))
}

pub fn x0_norm_on<F: ScalarField + ?Sized>(phi: &F, grid: &Grid2D) -> f64 {
    grid.integrate(|r, th| {
        let [_, vr, vt, vs] = phi.values(r, th);
        (vr * vr * r * r + vt * vt + vs * vs) * th.sin()
    })
}

/// Random smooth perturbation with `n_modes` terms, unit squared norm.
pub fn make_perturbation(seed: u64, n_modes: usize, support: Support) -> Result<Perturbation> {
    if n_modes == 0 || n_modes > MAX_MODES {
        return Err(Error::Domain(format!("n_modes = {n_modes} outside 1..={MAX_MODES}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trigs = [Trig::One, Trig::Sin, Trig::Sin2];
    let modes = (0..n_modes)
        .map(|i| Mode {
            power: (i / 3) as i32,
            trig: trigs[i % 3],
            coefficient: rng.random_range(-1.0..1.0),
        })
        .collect();
    Perturbation::from_modes(support, modes)
}

/// One row of a minimality probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSample {
    pub epsilon: f64,
    /// `J[psi_t + eps phi] - J[psi_t]`.
    pub delta_j: f64,
    /// Sum of the completed-square deficits of `psi_t + eps phi`.
    pub deficit: f64,
}

/// `J[psi_t + eps phi] - J[psi_t]` for each `eps`, with the completed-square
/// deficits as an independent evaluation of the same quantity.
///
/// Both are integrated over the support of `phi` only, where the integrands
/// of the difference live.
pub fn minimality_probe<P: Profile + ?Sized>(
    profile: &P,
    k1: f64,
    k3: f64,
    phi: &Perturbation,
    epsilons: &[f64],
) -> Result<Vec<ProbeSample>> {
    if phi.support.touches_boundary() {
        return Err(Error::Precondition(
            "perturbation does not vanish near r = 1, so the boundary trace is not fixed".into(),
        ));
    }
    let grid = phi.support.grid(SUPPORT_NODES.0, SUPPORT_NODES.1);
    let base: Vec<(f64, f64, f64, LiftingSample)> = grid
        .r
        .nodes
        .iter()
        .zip(&grid.r.weights)
        .flat_map(|(&r, &wr)| {
            grid.theta
                .nodes
                .iter()
                .zip(&grid.theta.weights)
                .map(move |(&th, &wt)| (r, th, wr * wt, profile.sample(r, th)))
        })
        .collect();
    let base_terms: Vec<f64> = base
        .iter()
        .map(|(r, th, _, s)| bulk_terms(s, *r, *th, k1, k3).iter().sum())
        .collect();
    let mut out = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let (mut dj, mut deficit) = (0.0, 0.0);
        for ((r, th, w, s), f0) in base.iter().zip(&base_terms) {
            let ps = shift_sample(s, phi, eps, *r, *th);
            let f: f64 = bulk_terms(&ps, *r, *th, k1, k3).iter().sum();
            let (a, b) = deficit_terms(&ps, *r, *th, k1, k3);
            dj += w * (f - f0);
            deficit += w * (a + b);
        }
        out.push(ProbeSample {
            epsilon: eps,
            delta_j: PI * dj,
            deficit: PI * deficit,
        });
    }
    Ok(out)
}

/// Cached base sample shifted by `eps phi`.
fn shift_sample(b: &LiftingSample, phi: &Perturbation, eps: f64, r: f64, theta: f64) -> LiftingSample {
    let [v, vr, vt, vs] = phi.values(r, theta);
    let delta = eps * v;
    LiftingSample {
        psi: b.psi + delta,
        psi_r: b.psi_r + eps * vr,
        psi_theta: b.psi_theta + eps * vt,
        chi: shifted_chi(b.chi, b.psi.cos(), delta, eps * vs),
    }
}

/// Barycentric weights of arbitrary distinct nodes.
fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let p: f64 = x.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &xk)| x[j] - xk).product();
            1.0 / p
        })
        .collect()
}

/// Spectral differentiation matrix on the nodes `x`.
fn differentiation_matrix(x: &[f64], w: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (x[i] - x[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    d
}

/// Barycentric interpolation coefficients `l_j(x)`.
fn lagrange_row(x: &[f64], w: &[f64], at: f64) -> Vec<f64> {
    if let Some(k) = x.iter().position(|&xi| xi == at) {
        let mut row = vec![0.0; x.len()];
        row[k] = 1.0;
        return row;
    }
    let terms: Vec<f64> = x.iter().zip(w).map(|(&xi, &wi)| wi / (at - xi)).collect();
    let sum: f64 = terms.iter().sum();
    terms.iter().map(|t| t / sum).collect()
}

/// Gauss-Legendre nodes on `(a, b)` (only the nodes).
fn gauss_nodes(n: usize, a: f64, b: f64) -> Vec<f64> {
    let (x, _) = legendre_nodes(n);
    x.iter().map(|&xi| 0.5 * (a + b) + 0.5 * (b - a) * xi).collect()
}

/// `psi = psi_t(theta) + (1 - r) sin(theta) w(r, theta)` with `w` stored at
/// tensor Gauss nodes and interpolated barycentrically in between.
#[derive(Debug, Clone)]
pub struct NodalField<'a, P: ?Sized> {
    pub profile: &'a P,
    pub r_nodes: Vec<f64>,
    pub theta_nodes: Vec<f64>,
    /// `w[i * n_theta + j]` at `(r_i, theta_j)`.
    pub w: Vec<f64>,
    w_r: Vec<f64>,
    w_t: Vec<f64>,
    bary_r: Vec<f64>,
    bary_t: Vec<f64>,
}

impl<'a, P: Profile + ?Sized> NodalField<'a, P> {
    pub fn new(profile: &'a P, r_nodes: Vec<f64>, theta_nodes: Vec<f64>, w: Vec<f64>) -> Self {
        let bary_r = barycentric_weights(&r_nodes);
        let bary_t = barycentric_weights(&theta_nodes);
        let dr = differentiation_matrix(&r_nodes, &bary_r);
        let dt = differentiation_matrix(&theta_nodes, &bary_t);
        let (nr, nt) = (r_nodes.len(), theta_nodes.len());
        let wm = DMatrix::from_row_slice(nr, nt, &w);
        let wr = &dr * &wm;
        let wt = &wm * dt.transpose();
        let flat = |m: DMatrix<f64>| m.transpose().as_slice().to_vec();
        NodalField {
            profile,
            r_nodes,
            theta_nodes,
            w,
            w_r: flat(wr),
            w_t: flat(wt),
            bary_r,
            bary_t,
        }
    }

    /// Nodal values sampled from any lifting with the same trace.
    pub fn from_lifting<L: Lifting + ?Sized>(profile: &'a P, r_nodes: Vec<f64>, theta_nodes: Vec<f64>, lifting: &L) -> Self {
        let mut w = Vec::with_capacity(r_nodes.len() * theta_nodes.len());
        for &r in &r_nodes {
            for &th in &theta_nodes {
                let d = lifting.sample(r, th).psi - profile.psi(th);
                w.push(d / ((1.0 - r) * th.sin()));
            }
        }
        NodalField::new(profile, r_nodes, theta_nodes, w)
    }

    /// `psi` at node `(i, j)`.
    pub fn psi_at(&self, i: usize, j: usize) -> f64 {
        let th = self.theta_nodes[j];
        self.profile.psi(th) + (1.0 - self.r_nodes[i]) * th.sin() * self.w[i * self.theta_nodes.len() + j]
    }

    fn interp(&self, values: &[f64], lr: &[f64], lt: &[f64]) -> f64 {
        let nt = self.theta_nodes.len();
        lr.iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(i, &c)| c * values[i * nt..(i + 1) * nt].iter().zip(lt).map(|(v, l)| v * l).sum::<f64>())
            .sum()
    }
}

impl<P: Profile + ?Sized> Lifting for NodalField<'_, P> {
    fn sample(&self, r: f64, theta: f64) -> LiftingSample {
        let lr = lagrange_row(&self.r_nodes, &self.bary_r, r);
        let lt = lagrange_row(&self.theta_nodes, &self.bary_t, theta);
        let w = self.interp(&self.w, &lr, &lt);
        let wr = self.interp(&self.w_r, &lr, &lt);
        let wt = self.interp(&self.w_t, &lr, &lt);
        let base = self.profile.eval(theta);
        compose(&base, r, theta, w, wr, wt)
    }
}

fn compose(base: &ProfilePoint, r: f64, theta: f64, w: f64, wr: f64, wt: f64) -> LiftingSample {
    let (st, ct) = theta.sin_cos();
    let delta = (1.0 - r) * st * w;
    LiftingSample {
        psi: base.psi + delta,
        psi_r: -st * w + (1.0 - r) * st * wr,
        psi_theta: base.psi_prime + (1.0 - r) * (ct * w + st * wt),
        chi: shifted_chi(base.chi, base.psi.cos(), delta, (1.0 - r) * w),
    }
}

/// Settings for [`descent_minimize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentOptions {
    pub n_r: usize,
    pub n_theta: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            n_r: 16,
            n_theta: 32,
            max_iters: 50,
            tol: 1e-11,
        }
    }
}

/// Discrete `J` (bulk part) as a function of the nodal values `w`.
struct DiscreteProblem {
    k1: f64,
    k3: f64,
    r: Vec<f64>,
    th: Vec<f64>,
    weights: Vec<f64>,
    base: Vec<ProfilePoint>,
    dr: DMatrix<f64>,
    dt: DMatrix<f64>,
}

impl DiscreteProblem {
    fn new<P: Profile + ?Sized>(profile: &P, k1: f64, k3: f64, n_r: usize, n_t: usize) -> Self {
        let r_rule = Rule::gauss_legendre(n_r, 0.0, 1.0);
        let t_rule = Rule::gauss_legendre(n_t, 0.0, PI);
        let dr = differentiation_matrix(&r_rule.nodes, &barycentric_weights(&r_rule.nodes));
        let dt = differentiation_matrix(&t_rule.nodes, &barycentric_weights(&t_rule.nodes));
        let weights = r_rule
            .weights
            .iter()
            .flat_map(|&a| t_rule.weights.iter().map(move |&b| a * b))
            .collect();
        let base = t_rule.nodes.iter().map(|&t| profile.eval(t)).collect();
        DiscreteProblem {
            k1,
            k3,
            r: r_rule.nodes,
            th: t_rule.nodes,
            weights,
            base,
            dr,
            dt,
        }
    }

    fn n(&self) -> usize {
        self.r.len() * self.th.len()
    }

    fn samples(&self, w: &DVector<f64>) -> Vec<LiftingSample> {
        let (nr, nt) = (self.r.len(), self.th.len());
        let wm = DMatrix::from_row_slice(nr, nt, w.as_slice());
        let wr = &self.dr * &wm;
        let wt = &wm * self.dt.transpose();
        let mut out = Vec::with_capacity(nr * nt);
        for i in 0..nr {
            for j in 0..nt {
                out.push(compose(&self.base[j], self.r[i], self.th[j], wm[(i, j)], wr[(i, j)], wt[(i, j)]));
            }
        }
        out
    }

    fn energy(&self, w: &DVector<f64>) -> f64 {
        let nt = self.th.len();
        let s = self.samples(w);
        let mut total = 0.0;
        for (idx, (sm, wq)) in s.iter().zip(&self.weights).enumerate() {
            let (i, j) = (idx / nt, idx % nt);
            total += wq * bulk_terms(sm, self.r[i], self.th[j], self.k1, self.k3).iter().sum::<f64>();
        }
        PI * total
    }

    fn gradient(&self, w: &DVector<f64>) -> DVector<f64> {
        let (nr, nt) = (self.r.len(), self.th.len());
        let (k1, k3) = (self.k1, self.k3);
        let kd = k1 - k3;
        let s = self.samples(w);
        // weighted partials of the integrand with respect to psi, psi_r, psi_theta
        let mut c = DMatrix::zeros(nr, nt);
        let mut a = DMatrix::zeros(nr, nt);
        let mut b = DMatrix::zeros(nr, nt);
        for i in 0..nr {
            let r = self.r[i];
            for j in 0..nt {
                let th = self.th[j];
                let st = th.sin();
                let sm = &s[i * nt + j];
                let d = sm.psi - th;
                let (sd, cd) = d.sin_cos();
                let sc = sd * cd;
                let (p, q) = (sm.psi_r, sm.psi_theta);
                let pw = p_weight(k1, k3, d);
                let qw = q_weight(k1, k3, d);
                let f_psi = 2.0 * kd * sc * p * p * r * r * st - 2.0 * kd * sc * q * q * st
                    - 2.0 * kd * (2.0 * d).cos() * p * q * r * st
                    + 2.0 * k1 * sm.chi * sm.psi.cos();
                let f_p = 2.0 * pw * p * r * r * st - 2.0 * kd * sc * q * r * st;
                let f_q = 2.0 * qw * q * st - 2.0 * kd * sc * p * r * st;
                let wq = PI * self.weights[i * nt + j];
                c[(i, j)] = wq * f_psi;
                a[(i, j)] = wq * f_p;
                b[(i, j)] = wq * f_q;
            }
        }
        let sin_t: Vec<f64> = self.th.iter().map(|t| t.sin()).collect();
        let cos_t: Vec<f64> = self.th.iter().map(|t| t.cos()).collect();
        // psi_r = -sin w + (1 - r) sin (Dr w); psi_theta = psi_t' + (1 - r)(cos w + sin (w Dt^T))
        let mut a_scaled = a.clone();
        let mut b_scaled = b.clone();
        for i in 0..nr {
            for j in 0..nt {
                a_scaled[(i, j)] *= (1.0 - self.r[i]) * sin_t[j];
                b_scaled[(i, j)] *= (1.0 - self.r[i]) * sin_t[j];
            }
        }
        let via_dr = self.dr.transpose() * a_scaled;
        let via_dt = b_scaled * &self.dt;
        let mut g = DVector::zeros(nr * nt);
        for i in 0..nr {
            let om = 1.0 - self.r[i];
            for j in 0..nt {
                g[i * nt + j] = c[(i, j)] * om * sin_t[j] - a[(i, j)] * sin_t[j]
                    + b[(i, j)] * om * cos_t[j]
                    + via_dr[(i, j)]
                    + via_dt[(i, j)];
            }
        }
        g
    }

    fn hessian(&self, w: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n();
        let mut h = DMatrix::zeros(n, n);
        let step = 1e-6;
        let mut x = w.clone();
        for k in 0..n {
            let orig = x[k];
            x[k] = orig + step;
            let gp = self.gradient(&x);
            x[k] = orig - step;
            let gm = self.gradient(&x);
            x[k] = orig;
            h.set_column(k, &((gp - gm) / (2.0 * step)));
        }
        (&h + h.transpose()) * 0.5
    }
}

/// Output of [`descent_minimize`].
#[derive(Debug, Clone)]
pub struct DescentResult<'a, P: ?Sized> {
    pub field: NodalField<'a, P>,
    pub iterations: usize,
    pub gradient_norm: f64,
    /// Discrete bulk energy at the returned field.
    pub energy: f64,
}

impl<P: Profile + ?Sized> DescentResult<'_, P> {
    /// `max |psi - psi_t|` over the nodes.
    pub fn max_deviation(&self) -> f64 {
        let f = &self.field;
        let mut m = 0.0f64;
        for i in 0..f.r_nodes.len() {
            for j in 0..f.theta_nodes.len() {
                m = m.max((f.psi_at(i, j) - f.profile.psi(f.theta_nodes[j])).abs());
            }
        }
        m
    }

    /// `max_theta (max_r psi - min_r psi)` over the nodes.
    pub fn r_variation(&self) -> f64 {
        let f = &self.field;
        (0..f.theta_nodes.len())
            .map(|j| {
                let col = (0..f.r_nodes.len()).map(|i| f.psi_at(i, j));
                let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                hi - lo
            })
            .fold(0.0, f64::max)
    }
}

/// Minimize the discrete `J` over `psi = psi_t + (1 - r) sin(theta) w`, which
/// keeps the trace at `r = 1` and the axis values of `psi_t`.
///
/// Damped Newton with a finite-difference Hessian of the exact discrete
/// gradient and a backtracking line search; converged once the gradient norm
/// drops below `tol (1 + |J|)`.
pub fn descent_minimize<'a, P: Profile + ?Sized, L: Lifting + ?Sized>(
    profile: &'a P,
    k1: f64,
    k3: f64,
    initial: &L,
    opts: &DescentOptions,
) -> Result<DescentResult<'a, P>> {
    if opts.n_r < 2 || opts.n_theta < 2 || !(opts.tol > 0.0) {
        return Err(Error::Domain("descent needs at least 2 x 2 nodes and a positive tolerance".into()));
    }
    let prob = DiscreteProblem::new(profile, k1, k3, opts.n_r, opts.n_theta);
    let init = NodalField::from_lifting(profile, prob.r.clone(), prob.th.clone(), initial);
    let mut w = DVector::from_vec(init.w);
    let mut energy = prob.energy(&w);
    let mut g = prob.gradient(&w);
    let mut iterations = 0;
    while g.norm() >= opts.tol * (1.0 + energy.abs()) {
        if iterations >= opts.max_iters {
            return Err(Error::NoConvergence {
                iterations,
                gradient_norm: g.norm(),
            });
        }
        iterations += 1;
        let h = prob.hessian(&w);
        let dir = newton_direction(&h, &g);
        let slope = g.dot(&dir);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = &w + alpha * &dir;
            let e = prob.energy(&trial);
            let gt = prob.gradient(&trial);
            let armijo = e <= energy + 1e-4 * alpha * slope;
            // below rounding of J the gradient is the only usable signal
            let flat = (e - energy).abs() <= 1e-13 * (1.0 + energy.abs()) && gt.norm() < g.norm();
            if e.is_finite() && (armijo || flat) {
                w = trial;
                energy = e;
                g = gt;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence {
                iterations,
                gradient_norm: g.norm(),
            });
        }
    }
    let field = NodalField::new(profile, prob.r.clone(), prob.th.clone(), w.as_slice().to_vec());
    Ok(DescentResult {
        field,
        iterations,
        gradient_norm: g.norm(),
        energy,
    })
}

/// Solve `H d = -g` by Cholesky, shifting `H` until it is positive definite.
fn newton_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    let scale = h.diagonal().amax().max(1e-300);
    let mut shift = 0.0;
    for _ in 0..60 {
        let mut m = h.clone();
        for k in 0..m.nrows() {
            m[(k, k)] += shift;
        }
        if let Some(ch) = m.cholesky() {
            return -ch.solve(g);
        }
        shift = if shift == 0.0 { 1e-10 * scale } else { shift * 10.0 };
    }
    -g.clone()
}

/// `sup_r |cos^2 psi - 1|` extrapolated to `theta = 0` and `theta = pi`.
pub fn axis_trace_check<L: Lifting + ?Sized>(lifting: &L, r_nodes: &[f64]) -> (f64, f64) {
    let eps = 1e-6;
    let f = |r: f64, th: f64| lifting.sample(r, th).psi.cos().powi(2) - 1.0;
    let extrap = |g: &dyn Fn(f64) -> f64| 3.0 * g(eps) - 3.0 * g(2.0 * eps) + g(3.0 * eps);
    let mut t0 = 0.0f64;
    let mut tpi = 0.0f64;
    for &r in r_nodes {
        t0 = t0.max(extrap(&|e| f(r, e)).abs());
        tpi = tpi.max(extrap(&|e| f(r, PI - e)).abs());
    }
    (t0, tpi)
}

/// Gauss nodes on `(0, 1)` used for axis checks by default.
pub fn default_r_nodes() -> Vec<f64> {
    gauss_nodes(16, 0.0, 1.0)
}
