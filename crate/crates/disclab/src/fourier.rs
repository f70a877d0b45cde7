//! Fourier transform of the indicator function of a convex body,
//! chat(xi) = int_Omega e^{-2 pi i xi . x} dx, evaluated by independent
//! routes:
//!
//! * closed forms (ball, cube, double cone along its axis),
//! * 1-D oscillatory quadrature of the parallel section function, using
//!   the identity chat(rho Theta) = int A(t) e^{-2 pi i rho t} dt,
//! * a divergence-theorem surface integral over the boundary,
//!
//! plus the stationary-phase leading term for positive-curvature bodies and
//! the forward finite difference operator with its Fourier multiplier.
//!
//! [`TransformEvaluator`] is the fast path used by the scanning modules: it
//! dispatches to closed forms where available and otherwise builds a
//! Filon-Legendre representation of the section profile once per
//! (body, direction), after which each frequency costs a short sum of
//! spherical Bessel terms.

use crate::bodies::{dot, BodyKind, BodySpec, Direction};
use crate::error::{DiscLabError, Result};
use crate::quad::{gauss_interval_c, gl_rule, graded_mesh};
use crate::special::{bessel_j1, bessel_j2, sph_bessel_j};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// One evaluation request: xi = rho * theta.
#[derive(Debug, Clone)]
pub struct FourierQuery {
    pub body: BodySpec,
    pub theta: Direction,
    pub rho: f64,
    pub tolerance: f64,
}

impl FourierQuery {
    pub fn new(body: BodySpec, theta: Direction, rho: f64) -> Self {
        Self {
            body,
            theta,
            rho,
            tolerance: 1e-9,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.body.validate()?;
        if self.theta.dim() != self.body.dim {
            return Err(DiscLabError::Config("direction/body dimension mismatch".into()));
        }
        if !(self.rho >= 0.0) {
            return Err(DiscLabError::Config("rho must be nonnegative".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-2) {
            return Err(DiscLabError::Config("tolerance must lie in (0, 1e-2]".into()));
        }
        Ok(())
    }
}

/// Forward finite difference of order d with step h.
#[derive(Debug, Clone, Copy)]
pub struct FiniteDifferenceSpec {
    pub order: u32,
    pub step: f64,
}

impl FiniteDifferenceSpec {
    pub fn new(order: u32, step: f64) -> Result<Self> {
        if order == 0 || order > 12 {
            return Err(DiscLabError::Config(
                "finite difference order must be in 1..=12".into(),
            ));
        }
        if !(step > 0.0) {
            return Err(DiscLabError::Config("finite difference step must be positive".into()));
        }
        Ok(Self { order, step })
    }
}

fn phase(s: f64, shift: f64) -> Complex64 {
    Complex64::from_polar(1.0, -TAU * s * shift)
}

// ---------------------------------------------------------------------------
// closed forms

/// Radial closed form for the centered ball of radius r in dimension d,
/// evaluated at |xi| = s. Real by symmetry.
pub(crate) fn ball_radial(d: usize, r: f64, s: f64) -> f64 {
    let u = r * s;
    let vol = crate::special::unit_ball_volume(d) * r.powi(d as i32);
    if u < 1e-4 {
        // chat = |B|(1 - (2 pi u)^2/(2(d+2)) + O(u^4))
        let z = TAU * u;
        return vol * (1.0 - z * z / (2.0 * (d as f64 + 2.0)));
    }
    match d {
        2 => r * r * bessel_j1(TAU * u) / u,
        3 => {
            let z = TAU * u;
            // equals (sin z - z cos z)/(2 pi^2 rho^3) for r = 1
            r.powi(3) * 4.0 * PI * (z.sin() - z * z.cos()) / (z * z * z)
        }
        4 => r.powi(4) * bessel_j2(TAU * u) / (u * u),
        _ => unreachable!("ball closed form restricted to d in 2..=4"),
    }
}

// chat of the double cone of half-length h along its axis; real and even.
fn cone_axis(h: f64, rho: f64) -> f64 {
    let z = TAU * h * rho;
    if z < 0.1 {
        // series of h/(pi rho^2) - sin(2 pi h rho)/(2 pi^2 rho^3)
        let c = 1.0 / (2.0 * PI * PI * rho.powi(3).max(f64::MIN_POSITIVE));
        if rho == 0.0 {
            return 2.0 * PI / 3.0 * h.powi(3);
        }
        let z2 = z * z;
        return c * (z.powi(3) / 6.0) * (1.0 - z2 / 20.0 + z2 * z2 / 840.0 - z2 * z2 * z2 / 60480.0);
    }
    h / (PI * rho * rho) - (z).sin() / (2.0 * PI * PI * rho.powi(3))
}

fn sinc(x: f64) -> f64 {
    let z = PI * x;
    if z.abs() < 1e-8 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

const CONE_AXIS_TOL: f64 = 1e-9;

/// Analytic value of chat at xi = rho * theta where a closed form exists:
/// ball (d <= 4), cube (any direction), double cone along its axis.
pub fn ft_closed_form(q: &FourierQuery) -> Result<Complex64> {
    q.validate()?;
    let shift = dot(q.theta.components(), &q.body.center);
    let val = match &q.body.kind {
        BodyKind::Ball { radius } => {
            if q.body.dim > 4 {
                return Err(DiscLabError::UnsupportedQuery(
                    "ball closed form restricted to d <= 4".into(),
                ));
            }
            ball_radial(q.body.dim, *radius, q.rho)
        }
        BodyKind::Cube { side } => q
            .theta
            .components()
            .iter()
            .map(|th| side * sinc(side * q.rho * th))
            .product(),
        BodyKind::DoubleCone { half_length } => {
            if q.theta.components()[0].abs() < 1.0 - CONE_AXIS_TOL {
                return Err(DiscLabError::UnsupportedQuery(
                    "double cone closed form holds along the axis only".into(),
                ));
            }
            cone_axis(*half_length, q.rho)
        }
        _ => {
            return Err(DiscLabError::UnsupportedQuery(format!(
                "no closed form for {:?}",
                q.body.kind
            )))
        }
    };
    Ok(phase(q.rho, shift) * val)
}

// ---------------------------------------------------------------------------
// section route

// Interior kinks of the section function (points where A loses smoothness),
// in the t-coordinate of the translated body.
fn section_kinks(body: &BodySpec, theta: &Direction) -> Vec<f64> {
    let shift = dot(theta.components(), &body.center);
    match &body.kind {
        BodyKind::DoubleCone { .. } => vec![shift],
        BodyKind::Cube { side } => {
            let cs: Vec<f64> = theta
                .components()
                .iter()
                .map(|th| (th * side).abs())
                .filter(|c| *c > 1e-9 * side)
                .collect();
            let total: f64 = cs.iter().sum();
            let mut kinks = Vec::new();
            for mask in 0u32..(1 << cs.len()) {
                let mut t = total / 2.0;
                for (i, c) in cs.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        t -= c;
                    }
                }
                kinks.push(t + shift);
            }
            kinks.sort_by(|a, b| a.partial_cmp(b).unwrap());
            kinks.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (1.0 + side));
            kinks
        }
        _ => Vec::new(),
    }
}

/// chat(rho theta) as the 1-D oscillatory transform of the section profile:
/// int_{-a}^{b} A(t) e^{-2 pi i rho t} dt, on panels no longer than
/// 1/(4 rho), graded toward the endpoint singularities, refined by doubling
/// until two successive values agree within the query tolerance.
pub fn ft_via_section(q: &FourierQuery) -> Result<Complex64> {
    q.validate()?;
    if q.rho == 0.0 {
        return Ok(Complex64::new(q.body.volume(), 0.0));
    }
    let support = q.body.support_interval(&q.theta)?;
    let width = support.width();
    let mut pieces = vec![-support.a];
    for k in section_kinks(&q.body, &q.theta) {
        if k > -support.a + 1e-12 * width && k < support.b - 1e-12 * width {
            pieces.push(k);
        }
    }
    pieces.push(support.b);

    let rule = gl_rule(16);
    let scale_floor = 1e-12 * q.body.volume();
    let mut cap = (width / 16.0).min(1.0 / (4.0 * q.rho.max(1.0)));
    let mut prev: Option<Complex64> = None;
    for it in 0..9 {
        let mut val = Complex64::new(0.0, 0.0);
        for w in pieces.windows(2) {
            let mesh = graded_mesh(w[0], w[1], cap, 34 + 4 * it);
            val += crate::quad::integrate_mesh_c(
                |t| {
                    let a = q.body.section_function(&q.theta, t).unwrap_or(0.0);
                    Complex64::from_polar(a, -TAU * q.rho * t)
                },
                &mesh,
                &rule,
            );
        }
        if let Some(p) = prev {
            if (val - p).norm() <= q.tolerance * val.norm().max(scale_floor) {
                return Ok(val);
            }
        }
        prev = Some(val);
        cap *= 0.5;
    }
    let p = prev.unwrap();
    Err(DiscLabError::Accuracy {
        context: format!("ft_via_section rho={}", q.rho),
        prev: p.re,
        last: p.im,
    })
}

// ---------------------------------------------------------------------------
// surface route

// Boundary point y = r(w) w of the centered smooth body together with the
// chart tangents, for w a function of chart parameters with known tangents.
fn star_point(body: &BodySpec, w: &[f64], w_tangents: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (p, _) = body.smooth_gauge().expect("smooth body");
    let pf = p as f64;
    let fval = body.gauge_f(w);
    let r = fval.powf(-1.0 / pf);
    let grad = body.gauge_grad(w);
    let coeff = -(1.0 / pf) * fval.powf(-1.0 / pf - 1.0);
    let y: Vec<f64> = w.iter().map(|wi| r * wi).collect();
    let tangents = w_tangents
        .iter()
        .map(|wt| {
            let rt = coeff * dot(&grad, wt);
            let mut v: Vec<f64> = wt.iter().map(|x| r * x).collect();
            for (vi, wi) in v.iter_mut().zip(w) {
                *vi += rt * wi;
            }
            v
        })
        .collect();
    (y, tangents)
}

/// chat(rho theta) by the divergence theorem:
/// (i/(2 pi rho)) int_{boundary} e^{-2 pi i rho theta . y} (theta . n) dsigma.
pub fn ft_via_surface(q: &FourierQuery) -> Result<Complex64> {
    q.validate()?;
    if !q.body.is_smooth() {
        return Err(DiscLabError::UnsupportedBody(
            "surface route requires a smooth body".into(),
        ));
    }
    if q.rho <= 0.0 {
        return Err(DiscLabError::Domain("surface route requires rho > 0".into()));
    }
    let shift = dot(q.theta.components(), &q.body.center);
    let pref = Complex64::new(0.0, 1.0 / (TAU * q.rho));
    let scale_floor = 1e-12 * q.body.volume();
    let osc = (q.rho * q.body.diameter()).ceil() as usize;
    match q.body.dim {
        2 => {
            let th = q.theta.components();
            let mut m = 64.max(8 * osc.max(1));
            let mut prev: Option<Complex64> = None;
            for _ in 0..7 {
                let mut sum = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    let phi = TAU * i as f64 / m as f64;
                    let w = vec![phi.cos(), phi.sin()];
                    let wp = vec![-phi.sin(), phi.cos()];
                    let (y, t) = star_point(&q.body, &w, std::slice::from_ref(&wp));
                    // outward normal element (y2', -y1') dphi
                    let nd = th[0] * t[0][1] - th[1] * t[0][0];
                    sum += Complex64::from_polar(nd, -TAU * q.rho * dot(th, &y));
                }
                let val = pref * sum * (TAU / m as f64);
                if let Some(p) = prev {
                    if (val - p).norm() <= q.tolerance.max(1e-9) * val.norm().max(scale_floor) {
                        return Ok(phase(q.rho, shift) * val);
                    }
                }
                prev = Some(val);
                m *= 2;
            }
            let p = prev.unwrap();
            Err(DiscLabError::Accuracy {
                context: format!("ft_via_surface d=2 rho={}", q.rho),
                prev: p.re,
                last: p.im,
            })
        }
        3 => {
            let th = q.theta.components();
            let rule = gl_rule(8);
            let mut panels = 16.max(3 * osc.max(1));
            let mut mphi = 32.max(6 * osc.max(1));
            let mut prev: Option<Complex64> = None;
            for _ in 0..4 {
                let mut sum = Complex64::new(0.0, 0.0);
                for i in 0..mphi {
                    let phi = TAU * i as f64 / mphi as f64;
                    let (cp, sp) = (phi.cos(), phi.sin());
                    let integrand = |tp: f64| {
                        let (st, ct) = (tp.sin(), tp.cos());
                        let w = vec![st * cp, st * sp, ct];
                        let w_t = vec![ct * cp, ct * sp, -st];
                        let w_p = vec![-st * sp, st * cp, 0.0];
                        let (y, tans) = star_point(&q.body, &w, &[w_t, w_p]);
                        let n = crate::bodies::cross(&tans[0], &tans[1]);
                        Complex64::from_polar(dot(th, &n), -TAU * q.rho * dot(th, &y))
                    };
                    let mut inner = Complex64::new(0.0, 0.0);
                    for k in 0..panels {
                        let a = PI * k as f64 / panels as f64;
                        let b = PI * (k + 1) as f64 / panels as f64;
                        inner += gauss_interval_c(integrand, a, b, &rule);
                    }
                    sum += inner;
                }
                let val = pref * sum * (TAU / mphi as f64);
                if let Some(p) = prev {
                    if (val - p).norm() <= q.tolerance.max(1e-8) * val.norm().max(scale_floor) {
                        return Ok(phase(q.rho, shift) * val);
                    }
                }
                prev = Some(val);
                panels *= 2;
                mphi *= 2;
            }
            let p = prev.unwrap();
            Err(DiscLabError::Accuracy {
                context: format!("ft_via_surface d=3 rho={}", q.rho),
                prev: p.re,
                last: p.im,
            })
        }
        _ => Err(DiscLabError::UnsupportedQuery(
            "surface route implemented for d in {2, 3}".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// stationary phase leading term

/// Leading term of the stationary-phase expansion for positive-curvature
/// bodies:
/// (-1/(2 pi i)) rho^{-(d+1)/2} [K^{-1/2}(Theta) e^{-2 pi i (rho Theta.p(Theta) - (d-1)/8)}
///  - K^{-1/2}(-Theta) e^{-2 pi i (rho Theta.p(-Theta) + (d-1)/8)}].
pub fn herz_leading_term(q: &FourierQuery) -> Result<Complex64> {
    q.validate()?;
    if !q.body.is_positive_curvature() {
        return Err(DiscLabError::UnsupportedBody(
            "leading term requires strictly positive curvature".into(),
        ));
    }
    if q.rho < 1.0 {
        return Err(DiscLabError::Domain("leading term defined for rho >= 1".into()));
    }
    let d = q.body.dim as f64;
    let neg = q.theta.negated();
    let k_plus = q.body.gauss_curvature(&q.theta)?;
    let k_minus = q.body.gauss_curvature(&neg)?;
    let p_plus = q.body.normal_point(&q.theta)?;
    let p_minus = q.body.normal_point(&neg)?;
    let b = dot(q.theta.components(), &p_plus);
    let ma = dot(q.theta.components(), &p_minus);
    let pref = Complex64::new(0.0, 1.0 / TAU); // -1/(2 pi i) = i/(2 pi)
    let t1 = Complex64::from_polar(k_plus.powf(-0.5), -TAU * (q.rho * b - (d - 1.0) / 8.0));
    let t2 = Complex64::from_polar(k_minus.powf(-0.5), -TAU * (q.rho * ma + (d - 1.0) / 8.0));
    Ok(pref * q.rho.powf(-(d + 1.0) / 2.0) * (t1 - t2))
}

// ---------------------------------------------------------------------------
// finite differences

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    let mut v = 1.0;
    for i in 0..k.min(n - k) {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Forward finite difference of order d with step h:
/// Delta_h^d f(t) = sum_{k=0}^{d} C(d,k) (-1)^{d-k} f(t + k h).
pub fn finite_difference<F: Fn(f64) -> f64>(f: F, spec: &FiniteDifferenceSpec, t: f64) -> f64 {
    let d = spec.order;
    (0..=d)
        .map(|k| {
            let sign = if (d - k) % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(d, k) * f(t + k as f64 * spec.step)
        })
        .sum()
}

/// Fourier multiplier of the finite difference operator:
/// (e^{2 pi i h xi} - 1)^d.
pub fn fd_multiplier(xi: f64, spec: &FiniteDifferenceSpec) -> Complex64 {
    (Complex64::from_polar(1.0, TAU * spec.step * xi) - 1.0).powu(spec.order)
}

// ---------------------------------------------------------------------------
// fast per-direction evaluator

const FILON_ORDER: usize = 18;
const FILON_SAMPLES: usize = 24;

/// Filon-Legendre representation of int A(t) e^{-2 pi i s t} dt: the section
/// profile is expanded in Legendre series on graded panels once, after
/// which every frequency is a sum of spherical Bessel terms. The cost per
/// frequency is independent of s.
pub struct FilonProfile {
    panels: Vec<(f64, f64)>, // (mid, half-length)
    coeffs: Vec<[f64; FILON_ORDER]>,
}

impl FilonProfile {
    pub fn build(body: &BodySpec, theta: &Direction) -> Result<Self> {
        let support = body.support_interval(theta)?;
        let width = support.width();
        let mesh = graded_mesh(-support.a, support.b, width / 48.0, 46);
        let rule = gl_rule(FILON_SAMPLES);
        // Legendre values at the sampling nodes
        let mut pvals = vec![[0.0; FILON_ORDER]; FILON_SAMPLES];
        for (k, &x) in rule.nodes.iter().enumerate() {
            pvals[k][0] = 1.0;
            pvals[k][1] = x;
            for l in 2..FILON_ORDER {
                let lf = l as f64;
                pvals[k][l] =
                    ((2.0 * lf - 1.0) * x * pvals[k][l - 1] - (lf - 1.0) * pvals[k][l - 2]) / lf;
            }
        }
        let mut panels = Vec::with_capacity(mesh.len() - 1);
        let mut coeffs = Vec::with_capacity(mesh.len() - 1);
        for w in mesh.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let half = 0.5 * (w[1] - w[0]);
            let samples: Vec<f64> = rule
                .nodes
                .iter()
                .map(|&x| body.section_function(theta, mid + half * x).unwrap_or(0.0))
                .collect();
            let mut c = [0.0; FILON_ORDER];
            for (l, cl) in c.iter_mut().enumerate() {
                let mut acc = 0.0;
                for k in 0..FILON_SAMPLES {
                    acc += rule.weights[k] * samples[k] * pvals[k][l];
                }
                *cl = (2.0 * l as f64 + 1.0) / 2.0 * acc;
            }
            panels.push((mid, half));
            coeffs.push(c);
        }
        Ok(Self { panels, coeffs })
    }

    /// int A(t) e^{-2 pi i s t} dt using
    /// int_{-1}^{1} P_l(x) e^{-i w x} dx = 2 (-i)^l j_l(w).
    pub fn eval(&self, s: f64) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for ((mid, half), c) in self.panels.iter().zip(&self.coeffs) {
            let w = TAU * s.abs() * half;
            let jl = sph_bessel_j(FILON_ORDER - 1, w);
            // sum c_l (-i)^l j_l(w), cycling (1, -i, -1, i)
            let mut re = 0.0;
            let mut im = 0.0;
            for (l, (cl, j)) in c.iter().zip(&jl).enumerate() {
                let v = cl * j;
                match l % 4 {
                    0 => re += v,
                    1 => im -= v,
                    2 => re -= v,
                    _ => im += v,
                }
            }
            let mut inner = Complex64::new(re, im);
            if s < 0.0 {
                inner = inner.conj();
            }
            total += Complex64::from_polar(1.0, -TAU * s * mid) * inner * (2.0 * half);
        }
        total
    }
}

enum Route {
    /// chat(s theta) = factor * ball_radial(d, radius, s); exact for balls
    /// (factor 1) and ellipsoids (radius = support in direction theta,
    /// factor = prod a_i / radius^d).
    Radial { factor: f64, radius: f64 },
    CubeProduct { side: f64 },
    ConeAxis { half: f64 },
    Filon(FilonProfile),
}

/// Per-(body, direction) evaluator of s -> chat(s theta), dispatching to
/// the cheapest exact route available.
pub struct TransformEvaluator {
    dim: usize,
    shift: f64,
    theta: Direction,
    route: Route,
}

impl TransformEvaluator {
    pub fn new(body: &BodySpec, theta: &Direction) -> Result<Self> {
        body.validate()?;
        if theta.dim() != body.dim {
            return Err(DiscLabError::Config("direction/body dimension mismatch".into()));
        }
        let shift = dot(theta.components(), &body.center);
        let route = match &body.kind {
            BodyKind::Ball { radius } => Route::Radial {
                factor: 1.0,
                radius: *radius,
            },
            BodyKind::Ellipsoid { semi_axes } => {
                let w = body.support_function(theta);
                Route::Radial {
                    factor: semi_axes.iter().product::<f64>() / w.powi(body.dim as i32),
                    radius: w,
                }
            }
            BodyKind::Cube { side } => Route::CubeProduct { side: *side },
            BodyKind::DoubleCone { half_length } => {
                if theta.components()[0].abs() < 1.0 - CONE_AXIS_TOL {
                    return Err(DiscLabError::UnsupportedQuery(
                        "double cone evaluator restricted to the axis direction".into(),
                    ));
                }
                Route::ConeAxis { half: *half_length }
            }
            BodyKind::Superellipsoid { .. } => Route::Filon(FilonProfile::build(body, theta)?),
        };
        Ok(Self {
            dim: body.dim,
            shift,
            theta: theta.clone(),
            route,
        })
    }

    /// chat(s theta).
    pub fn eval(&self, s: f64) -> Complex64 {
        match &self.route {
            Route::Radial { factor, radius } => {
                if self.dim > 4 {
                    unreachable!("radial route restricted to d <= 4 by construction");
                }
                phase(s, self.shift) * (factor * ball_radial(self.dim, *radius, s.abs()))
            }
            Route::CubeProduct { side } => {
                let v: f64 = self
                    .theta
                    .components()
                    .iter()
                    .map(|th| side * sinc(side * s * th))
                    .product();
                phase(s, self.shift) * v
            }
            Route::ConeAxis { half } => phase(s, self.shift) * cone_axis(*half, s.abs()),
            Route::Filon(f) => f.eval(s),
        }
    }

    /// |chat(s theta)|^2.
    pub fn magnitude2(&self, s: f64) -> f64 {
        match &self.route {
            Route::Radial { factor, radius } => {
                let v = factor * ball_radial(self.dim, *radius, s.abs());
                v * v
            }
            Route::ConeAxis { half } => {
                let v = cone_axis(*half, s.abs());
                v * v
            }
            _ => self.eval(s).norm_sqr(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_mesh_c, uniform_mesh};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn q(body: BodySpec, theta: Direction, rho: f64) -> FourierQuery {
        FourierQuery::new(body, theta, rho)
    }

    #[test]
    fn closed_form_examples() {
        // double cone on its axis
        let cone = BodySpec::double_cone(1.0);
        let e1 = Direction::axis(3, 0);
        let v = ft_closed_form(&q(cone.clone(), e1.clone(), 2.0)).unwrap();
        assert_relative_eq!(v.re, 1.0 / (4.0 * PI), max_relative = 1e-12);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);

        // rho = 0 gives the volume for every supported body
        for (body, th) in [
            (BodySpec::ball(3, 1.0), Direction::axis(3, 2)),
            (BodySpec::cube(3, 1.0), Direction::from_vector(&[1.0, 1.0, 0.5]).unwrap()),
            (cone, e1),
        ] {
            let v = ft_closed_form(&q(body.clone(), th, 0.0)).unwrap();
            assert_relative_eq!(v.re, body.volume(), max_relative = 1e-9);
        }

        // cube at integer frequency along an axis
        let v = ft_closed_form(&q(BodySpec::cube(2, 1.0), Direction::axis(2, 0), 3.0)).unwrap();
        assert_abs_diff_eq!(v.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn section_matches_closed_form_ball() {
        for (d, rho) in [(2usize, 1.0), (2, 17.5), (3, 1.0), (3, 9.25)] {
            let th = if d == 2 {
                Direction::from_vector(&[1.0, 2.0]).unwrap()
            } else {
                Direction::from_vector(&[1.0, 2.0, -0.5]).unwrap()
            };
            let query = q(BodySpec::ball(d, 1.0), th, rho);
            let a = ft_via_section(&query).unwrap();
            let b = ft_closed_form(&query).unwrap();
            assert!((a - b).norm() <= 1e-8 * b.norm().max(1e-6), "d={d} rho={rho}");
        }
    }

    #[test]
    fn section_double_cone_formula() {
        let cone = BodySpec::double_cone(1.0);
        let e1 = Direction::axis(3, 0);
        for rho in [2.0, 5.0, 10.0, 50.0] {
            let v = ft_via_section(&q(cone.clone(), e1.clone(), rho)).unwrap();
            let exact = 1.0 / (PI * rho * rho) - (TAU * rho).sin() / (2.0 * PI * PI * rho.powi(3));
            assert_relative_eq!(v.re, exact, max_relative = 1e-6);
        }
    }

    #[test]
    fn surface_matches_other_routes() {
        // unit disk vs closed form
        let query = q(BodySpec::ball(2, 1.0), Direction::from_vector(&[3.0, 4.0]).unwrap(), 1.0);
        let s = ft_via_surface(&query).unwrap();
        let c = ft_closed_form(&query).unwrap();
        assert!((s - c).norm() <= 1e-6 * c.norm());

        // ellipse vs section route
        let query = q(BodySpec::ellipsoid(vec![2.0, 1.0]), Direction::axis(2, 1), 3.0);
        let s = ft_via_surface(&query).unwrap();
        let sec = ft_via_section(&query).unwrap();
        assert!((s - sec).norm() <= 1e-6 * sec.norm().max(1e-6));

        // unit ball d=3 vs section route
        let query = q(BodySpec::ball(3, 1.0), Direction::from_vector(&[0.0, 1.0, 1.0]).unwrap(), 0.5);
        let s = ft_via_surface(&query).unwrap();
        let sec = ft_via_section(&query).unwrap();
        assert!((s - sec).norm() <= 1e-6 * sec.norm());

        // superellipsoid d=3 cross-check at moderate frequency
        let query = q(
            BodySpec::superellipsoid(4, vec![1.0, 1.0, 1.0]),
            Direction::from_vector(&[1.0, 0.4, -0.2]).unwrap(),
            2.0,
        );
        let s = ft_via_surface(&query).unwrap();
        let sec = ft_via_section(&query).unwrap();
        assert!((s - sec).norm() <= 1e-5 * sec.norm().max(1e-6));

        assert!(ft_via_surface(&q(BodySpec::cube(2, 1.0), Direction::axis(2, 0), 1.0)).is_err());
    }

    #[test]
    fn herz_leading_term_ball_and_ellipse() {
        // ellipse at high frequency: leading term approximates the transform
        let query = q(BodySpec::ellipsoid(vec![2.0, 1.0]), Direction::axis(2, 0), 100.0);
        let lead = herz_leading_term(&query).unwrap();
        let sec = ft_via_section(&query).unwrap();
        assert!((lead - sec).norm() <= 0.05 * sec.norm());

        // residual decays one order faster than the leading term for a ball
        let ball = BodySpec::ball(2, 1.0);
        let th = Direction::axis(2, 0);
        for rho in [60.0, 240.0] {
            let query = q(ball.clone(), th.clone(), rho);
            let res = (herz_leading_term(&query).unwrap() - ft_closed_form(&query).unwrap()).norm();
            assert!(res <= 1.0 * rho.powf(-2.5), "rho={rho} residual={res}");
        }

        assert!(herz_leading_term(&q(
            BodySpec::superellipsoid(4, vec![1.0, 1.0]),
            Direction::axis(2, 0),
            10.0
        ))
        .is_err());
    }

    #[test]
    fn finite_difference_examples() {
        let spec = FiniteDifferenceSpec::new(2, 0.3).unwrap();
        for t in [-1.0, 0.0, 2.5] {
            assert_relative_eq!(
                finite_difference(|x| x * x, &spec, t),
                2.0 * 0.3 * 0.3,
                max_relative = 1e-12
            );
        }
        let spec5 = FiniteDifferenceSpec::new(5, 0.7).unwrap();
        assert_abs_diff_eq!(finite_difference(|_| 4.2, &spec5, 1.0), 0.0, epsilon = 1e-12);

        // near the right endpoint of the support, the difference collapses
        // to A itself because A vanishes beyond b
        let disk = BodySpec::ball(2, 1.0);
        let th = Direction::axis(2, 0);
        let spec = FiniteDifferenceSpec::new(2, 0.01).unwrap();
        let t = 1.0 - 0.005;
        let a = |x: f64| disk.section_function(&th, x).unwrap();
        assert_relative_eq!(finite_difference(a, &spec, t), a(t), max_relative = 1e-12);
    }

    #[test]
    fn multiplier_examples_and_identity() {
        let spec = FiniteDifferenceSpec::new(3, 0.5).unwrap();
        assert_abs_diff_eq!(fd_multiplier(0.0, &spec).norm(), 0.0, epsilon = 1e-15);
        let spec1 = FiniteDifferenceSpec::new(1, 0.5).unwrap();
        let v = fd_multiplier(1.0, &spec1); // h xi = 1/2
        assert_abs_diff_eq!(v.re, -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);

        // transform of Delta_h^d f equals multiplier times transform of f
        let f = |t: f64| {
            if t.abs() < 1.0 {
                (1.0 - t * t).powi(3)
            } else {
                0.0
            }
        };
        let spec = FiniteDifferenceSpec::new(3, 0.05).unwrap();
        let rule = gl_rule(16);
        for xi in [0.7, 1.9, 4.3] {
            let mesh = uniform_mesh(-1.5, 1.5, 0.02);
            let tf = integrate_mesh_c(
                |t| Complex64::from_polar(1.0, -TAU * xi * t) * f(t),
                &mesh,
                &rule,
            );
            let tdf = integrate_mesh_c(
                |t| {
                    Complex64::from_polar(1.0, -TAU * xi * t)
                        * finite_difference(f, &spec, t)
                },
                &mesh,
                &rule,
            );
            let expected = fd_multiplier(xi, &spec) * tf;
            assert!((tdf - expected).norm() <= 1e-6 * expected.norm().max(1e-9));
        }
    }

    #[test]
    fn hermitian_symmetry_and_volume_bound() {
        let body = BodySpec::superellipsoid(4, vec![1.0, 0.7]);
        let th = Direction::from_vector(&[1.0, -0.3]).unwrap();
        let a = ft_via_section(&q(body.clone(), th.clone(), 3.3)).unwrap();
        let b = ft_via_section(&q(body.clone(), th.negated(), 3.3)).unwrap();
        assert!((a - b.conj()).norm() <= 1e-9);
        assert!(a.norm() <= body.volume());
    }

    #[test]
    fn evaluator_matches_section_route() {
        // Filon route for the superellipsoid
        let body = BodySpec::superellipsoid(4, vec![1.0, 0.8]);
        let th = Direction::from_vector(&[1.0, 0.5]).unwrap();
        let ev = TransformEvaluator::new(&body, &th).unwrap();
        for s in [0.0, 0.7, 4.0, 31.5, 200.0] {
            let direct = if s == 0.0 {
                Complex64::new(body.volume(), 0.0)
            } else {
                ft_via_section(&q(body.clone(), th.clone(), s)).unwrap()
            };
            let fast = ev.eval(s);
            assert!(
                (fast - direct).norm() <= 1e-7 * direct.norm().max(1e-8),
                "s={s}: {fast} vs {direct}"
            );
        }

        // radial route for the ellipse
        let ell = BodySpec::ellipsoid(vec![2.0, 1.0]);
        let th = Direction::from_vector(&[1.0, 1.0]).unwrap();
        let ev = TransformEvaluator::new(&ell, &th).unwrap();
        for s in [0.5, 3.0, 50.0] {
            let direct = ft_via_section(&q(ell.clone(), th.clone(), s)).unwrap();
            assert!((ev.eval(s) - direct).norm() <= 1e-8 * direct.norm().max(1e-8));
        }

        // cone route against the closed form, conjugate symmetry in s
        let cone = BodySpec::double_cone(1.0);
        let e1 = Direction::axis(3, 0);
        let ev = TransformEvaluator::new(&cone, &e1).unwrap();
        let v = ev.eval(5.0);
        assert_relative_eq!(v.re, 1.0 / (25.0 * PI), max_relative = 1e-12);
        assert_abs_diff_eq!((ev.eval(-5.0) - v.conj()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn evaluator_superellipsoid_d3() {
        let body = BodySpec::superellipsoid(4, vec![1.0, 1.0, 1.0]);
        let th = Direction::from_vector(&[1.0, 0.3, 0.1]).unwrap();
        let ev = TransformEvaluator::new(&body, &th).unwrap();
        for s in [1.0, 8.0] {
            let direct = ft_via_section(&q(body.clone(), th.clone(), s)).unwrap();
            assert!(
                (ev.eval(s) - direct).norm() <= 1e-6 * direct.norm().max(1e-8),
                "s={s}"
            );
        }
    }
}
