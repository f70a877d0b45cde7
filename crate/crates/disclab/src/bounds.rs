//! Numerical certification of the two-sided decay inequalities for
//! chat(rho Theta). Each inequality is turned into a normalized ratio whose
//! boundedness (above or below) the corresponding theorem asserts; the
//! ratio is scanned over a (direction, frequency) grid and the report
//! carries the empirical inf/sup constants together with a pass/fail
//! verdict.
//!
//! The underlying constants are existential in the source estimates, so
//! "bounded" is operationalized as a half-split stability test: the
//! extremal statistic over the upper half of the logarithmic rho-grid must
//! stay within a configurable slack factor of the statistic over the lower
//! half.

use crate::bodies::{fibonacci_sphere, BodySpec, Direction, SectionProfile};
use crate::error::{DiscLabError, Result};
use crate::fourier::TransformEvaluator;
use crate::quad::{gl_rule, integrate_mesh, loglog_slope, uniform_mesh};
use serde::{Deserialize, Serialize};

/// Grid configuration shared by the ratio checks.
#[derive(Debug, Clone)]
pub struct RatioScan {
    pub body: BodySpec,
    pub theta_grid: Vec<Direction>,
    pub rho_grid: Vec<f64>,
    /// Lower edge factor of the averaging window [alpha rho, beta rho].
    pub alpha: f64,
    /// Upper edge factor of the averaging window.
    pub beta: f64,
    /// Window factor of the one-sided average [gamma rho, rho].
    pub gamma: f64,
    /// Minimal rho taken into account by verdicts.
    pub kappa: f64,
    /// Half-split stability factor ("bounded" means within this factor).
    pub slack: f64,
    /// Maximal sup/inf ratio accepted by the two-sided band check.
    pub band: f64,
}

impl RatioScan {
    pub fn new(body: BodySpec, theta_grid: Vec<Direction>, rho_grid: Vec<f64>) -> Self {
        Self {
            body,
            theta_grid,
            rho_grid,
            alpha: 0.25,
            beta: 4.0,
            gamma: 0.25 / 4.0,
            kappa: 8.0,
            slack: 2.0,
            band: 50.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.body.validate()?;
        if self.theta_grid.is_empty() || self.rho_grid.is_empty() {
            return Err(DiscLabError::Config("scan grids must be non-empty".into()));
        }
        if !self.rho_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(DiscLabError::Config("rho grid must be increasing".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0 && self.beta > 1.0) {
            return Err(DiscLabError::Config("need 0 < alpha < 1 < beta".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(DiscLabError::Config("need gamma in (0,1)".into()));
        }
        if !(self.slack >= 1.0 && self.band >= 1.0) {
            return Err(DiscLabError::Config("slack and band factors must be >= 1".into()));
        }
        Ok(())
    }

    fn config_json(&self, check: &str) -> serde_json::Value {
        serde_json::json!({
            "check": check,
            "body": self.body,
            "theta_count": self.theta_grid.len(),
            "rho_min": self.rho_grid.first(),
            "rho_max": self.rho_grid.last(),
            "rho_steps": self.rho_grid.len(),
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "kappa": self.kappa,
            "slack": self.slack,
            "band": self.band,
        })
    }
}

/// One scanned ratio value. `theta` indexes the scan's direction grid when
/// applicable; `x` is the abscissa (rho for frequency scans, t or lambda for
/// profile scans).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridPoint {
    pub theta: Option<usize>,
    pub x: f64,
    pub value: f64,
}

/// Outcome of one certification check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub points: Vec<GridPoint>,
    pub inf: f64,
    pub sup: f64,
    pub slope: Option<f64>,
    pub verdict: bool,
    pub config: serde_json::Value,
}

impl CheckReport {
    fn from_points(check: &str, points: Vec<GridPoint>, config: serde_json::Value) -> Self {
        let inf = points.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
        let sup = points
            .iter()
            .map(|p| p.value)
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            check: check.to_string(),
            points,
            inf,
            sup,
            slope: None,
            verdict: false,
            config,
        }
    }

    /// (statistic over lower half, statistic over upper half) of the
    /// logarithmic x-range, reduced by `combine` (f64::min or f64::max).
    fn half_split(&self, combine: fn(f64, f64) -> f64, init: f64) -> (f64, f64) {
        let lo = self.points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let hi = self
            .points
            .iter()
            .map(|p| p.x)
            .fold(f64::NEG_INFINITY, f64::max);
        let mid = (lo * hi).sqrt();
        let mut bottom = init;
        let mut top = init;
        for p in &self.points {
            if p.x <= mid {
                bottom = combine(bottom, p.value);
            } else {
                top = combine(top, p.value);
            }
        }
        (bottom, top)
    }

    pub fn all_finite(&self) -> bool {
        self.points.iter().all(|p| p.value.is_finite())
    }
}

// ---------------------------------------------------------------------------
// grids

/// Logarithmically spaced grid from lo to hi inclusive.
pub fn log_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    assert!(steps >= 2 && lo > 0.0 && hi > lo);
    (0..steps)
        .map(|i| lo * (hi / lo).powf(i as f64 / (steps - 1) as f64))
        .collect()
}

/// Direction grid: uniform angles on the circle, Fibonacci spiral on the
/// sphere. The circle grid starts at the x-axis so that curvature-flat
/// directions of axis-aligned bodies are included.
pub fn direction_grid(d: usize, n: usize) -> Result<Vec<Direction>> {
    match d {
        2 => Ok((0..n)
            .map(|i| {
                let phi = std::f64::consts::TAU * i as f64 / n as f64;
                Direction::from_vector(&[phi.cos(), phi.sin()]).unwrap()
            })
            .collect()),
        3 => Ok(fibonacci_sphere(n)
            .into_iter()
            .map(|v| Direction::from_vector(&v).unwrap())
            .collect()),
        _ => Err(DiscLabError::UnsupportedQuery(
            "direction grids implemented for d in {2, 3}".into(),
        )),
    }
}

// composite quadrature of int |chat(s theta)|^2 ds with node density
// proportional to the oscillation scale (the body width)
fn magnitude2_integral(ev: &TransformEvaluator, width: f64, s0: f64, s1: f64) -> f64 {
    let cap = (1.0 / (4.0 * width)).min((s1 - s0) / 4.0);
    let mesh = uniform_mesh(s0, s1, cap);
    let rule = gl_rule(8);
    integrate_mesh(|s| ev.magnitude2(s), &mesh, &rule)
}

// A(-a + 1/rho) and A(b - 1/rho)
fn endpoint_sections(body: &BodySpec, theta: &Direction, rho: f64) -> Result<(f64, f64)> {
    let s = body.support_interval(theta)?;
    let lo = body.section_function(theta, -s.a + 1.0 / rho)?;
    let hi = body.section_function(theta, s.b - 1.0 / rho)?;
    Ok((lo, hi))
}

fn require_smooth(body: &BodySpec, check: &str) -> Result<()> {
    if !body.is_smooth() {
        return Err(DiscLabError::UnsupportedBody(format!(
            "{check} requires a smooth body"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// checks

/// Upper bound through boundary slices:
/// R = |chat(rho Theta)| rho / (A(-a + 1/rho) + A(b - 1/rho)) must stay
/// bounded for smooth finite-type bodies.
pub fn check_bnw_upper(scan: &RatioScan) -> Result<CheckReport> {
    scan.validate()?;
    require_smooth(&scan.body, "the slice upper bound")?;
    let mut points = Vec::new();
    for (ti, theta) in scan.theta_grid.iter().enumerate() {
        let ev = TransformEvaluator::new(&scan.body, theta)?;
        for &rho in &scan.rho_grid {
            if rho < scan.kappa {
                continue;
            }
            let (alo, ahi) = endpoint_sections(&scan.body, theta, rho)?;
            let value = ev.magnitude2(rho).sqrt() * rho / (alo + ahi);
            points.push(GridPoint {
                theta: Some(ti),
                x: rho,
                value,
            });
        }
    }
    let mut report = CheckReport::from_points("bnw-upper", points, scan.config_json("bnw-upper"));
    let (bottom, top) = report.half_split(f64::max, f64::NEG_INFINITY);
    report.verdict = report.all_finite() && top <= scan.slack * bottom;
    Ok(report)
}

/// The double cone shows the slice upper bound can fail without
/// smoothness: along the axis R(rho) grows like rho (log-log slope 1).
pub fn check_double_cone_failure(rho_grid: &[f64]) -> Result<CheckReport> {
    if rho_grid.iter().any(|&r| r <= 1.0) {
        return Err(DiscLabError::Config(
            "double cone failure scan needs rho > 1".into(),
        ));
    }
    let cone = BodySpec::double_cone(1.0);
    let axis = Direction::axis(3, 0);
    let ev = TransformEvaluator::new(&cone, &axis)?;
    let points: Vec<GridPoint> = rho_grid
        .iter()
        .map(|&rho| {
            let a = cone.section_function(&axis, 1.0 - 1.0 / rho).unwrap();
            GridPoint {
                theta: None,
                x: rho,
                value: ev.magnitude2(rho).sqrt() / (a / rho),
            }
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.value).collect();
    let slope = loglog_slope(&xs, &ys);
    let mut report = CheckReport::from_points(
        "double-cone-failure",
        points,
        serde_json::json!({"check": "double-cone-failure", "rho_min": xs.first(), "rho_max": xs.last(), "steps": xs.len()}),
    );
    report.slope = Some(slope);
    report.verdict = slope >= 0.8;
    Ok(report)
}

/// Averaged lower bound:
/// L = rho int_{alpha rho}^{beta rho} |chat(s Theta)|^2 ds
///       / (A(-a+1/rho)^2 + A(b-1/rho)^2)
/// must stay bounded away from zero.
pub fn check_lower_average(scan: &RatioScan) -> Result<CheckReport> {
    scan.validate()?;
    require_smooth(&scan.body, "the averaged lower bound")?;
    let width = scan.body.diameter();
    let mut points = Vec::new();
    for (ti, theta) in scan.theta_grid.iter().enumerate() {
        let ev = TransformEvaluator::new(&scan.body, theta)?;
        for &rho in &scan.rho_grid {
            if rho < scan.kappa {
                continue;
            }
            let integral = magnitude2_integral(&ev, width, scan.alpha * rho, scan.beta * rho);
            let (alo, ahi) = endpoint_sections(&scan.body, theta, rho)?;
            let value = rho * integral / (alo * alo + ahi * ahi);
            points.push(GridPoint {
                theta: Some(ti),
                x: rho,
                value,
            });
        }
    }
    let mut report =
        CheckReport::from_points("lower-average", points, scan.config_json("lower-average"));
    let (bottom, top) = report.half_split(f64::min, f64::INFINITY);
    report.verdict = report.inf > 0.0 && top >= bottom / scan.slack;
    Ok(report)
}

/// Single-scale two-sided behavior for positive curvature:
/// U = rho^{d+1} int_rho^{rho+1} |chat(s Theta)|^2 ds stays inside a fixed
/// band (sup/inf bounded).
pub fn check_single_scale_lower(scan: &RatioScan) -> Result<CheckReport> {
    scan.validate()?;
    if !scan.body.is_positive_curvature() {
        return Err(DiscLabError::UnsupportedBody(
            "the single-scale bound requires strictly positive curvature".into(),
        ));
    }
    let d = scan.body.dim as i32;
    let width = scan.body.diameter();
    let mut points = Vec::new();
    for (ti, theta) in scan.theta_grid.iter().enumerate() {
        // the phase of the leading oscillation is the body width in this
        // direction; convexity with interior origin keeps it positive
        let support = scan.body.support_interval(theta)?;
        if support.width() <= 0.0 {
            return Err(DiscLabError::Domain("degenerate body width".into()));
        }
        let ev = TransformEvaluator::new(&scan.body, theta)?;
        for &rho in &scan.rho_grid {
            if rho < scan.kappa {
                continue;
            }
            let integral = magnitude2_integral(&ev, width, rho, rho + 1.0);
            points.push(GridPoint {
                theta: Some(ti),
                x: rho,
                value: rho.powi(d + 1) * integral,
            });
        }
    }
    let mut report =
        CheckReport::from_points("single-scale", points, scan.config_json("single-scale"));
    report.verdict = report.inf > 0.0 && report.sup <= scan.band * report.inf;
    Ok(report)
}

/// One-sided averaged lower bound at scale rho^{-d}:
/// V = rho^d int_{gamma rho}^{rho} |chat(s Theta)|^2 ds bounded below.
pub fn check_corollary_rho_d(scan: &RatioScan) -> Result<CheckReport> {
    scan.validate()?;
    require_smooth(&scan.body, "the rho^{-d} average")?;
    let d = scan.body.dim as i32;
    let width = scan.body.diameter();
    let mut points = Vec::new();
    for (ti, theta) in scan.theta_grid.iter().enumerate() {
        let ev = TransformEvaluator::new(&scan.body, theta)?;
        for &rho in &scan.rho_grid {
            if rho < scan.kappa {
                continue;
            }
            let integral = magnitude2_integral(&ev, width, scan.gamma * rho, rho);
            points.push(GridPoint {
                theta: Some(ti),
                x: rho,
                value: rho.powi(d) * integral,
            });
        }
    }
    let mut report =
        CheckReport::from_points("corollary-rho-d", points, scan.config_json("corollary-rho-d"));
    let (bottom, top) = report.half_split(f64::min, f64::INFINITY);
    report.verdict = report.inf > 0.0 && top >= bottom / scan.slack;
    Ok(report)
}

/// Brunn concavity: f = A^{1/(d-1)} has nonpositive second differences on a
/// uniform grid of the open support, with additive slack 1e-9 times the
/// profile scale. Points carry (t, second difference).
pub fn check_brunn(body: &BodySpec, theta: &Direction, grid_size: usize) -> Result<CheckReport> {
    body.validate()?;
    let profile = body.section_profile(theta)?;
    let s = profile.support;
    let n = grid_size.max(8);
    let h = s.width() / (n as f64 + 1.0);
    let f: Vec<f64> = (1..=n)
        .map(|i| profile.concave_root(-s.a + i as f64 * h))
        .collect();
    let scale = f.iter().cloned().fold(0.0, f64::max);
    let slack = 1e-9 * scale;
    let mut points = Vec::with_capacity(n.saturating_sub(2));
    let mut ok = true;
    for i in 1..n - 1 {
        let second = f[i - 1] - 2.0 * f[i] + f[i + 1];
        if second > slack {
            ok = false;
        }
        points.push(GridPoint {
            theta: None,
            x: -s.a + (i + 1) as f64 * h,
            value: second,
        });
    }
    let mut report = CheckReport::from_points(
        "brunn",
        points,
        serde_json::json!({"check": "brunn", "body": body, "theta": theta, "grid_size": n, "slack": slack}),
    );
    report.verdict = ok;
    Ok(report)
}

/// Pointwise consequences of concavity for f = A^{1/(d-1)} vanishing at the
/// support endpoints: for each ordered pair (l1, l2) on the same side of 0
/// with |l1| < |l2|,
///   f(l2) <= (1 + max(b/a, a/b)) f(l1),
///   f(x)  <= (1 + max(b/a, a/b)) f(0) for every sample,
///   f(l1) <= (b - l1)/(b - l2) f(l2) on [0, b] (mirrored on [-a, 0]).
/// Points carry (l2, worst normalized violation); negative means satisfied.
pub fn check_concave_lemma(
    profile: &SectionProfile,
    pairs: &[(f64, f64)],
) -> Result<CheckReport> {
    let s = profile.support;
    let (a, b) = (s.a, s.b);
    let cmax = 1.0 + (b / a).max(a / b);
    let scale = {
        let n = 64;
        (0..=n)
            .map(|i| profile.concave_root(-a + s.width() * i as f64 / n as f64))
            .fold(0.0, f64::max)
    };
    let slack = 1e-9 * scale;
    let f0 = profile.concave_root(0.0);
    let mut points = Vec::new();
    let mut ok = true;
    for &(l1, l2) in pairs {
        if l1 < -a || l1 > b || l2 < -a || l2 > b {
            return Err(DiscLabError::Domain(format!(
                "pair ({l1}, {l2}) outside support [{}, {}]",
                -a, b
            )));
        }
        if l1 * l2 < 0.0 || l1.abs() >= l2.abs() {
            return Err(DiscLabError::Domain(
                "pairs must be same-sided with |l1| < |l2|".into(),
            ));
        }
        let f1 = profile.concave_root(l1);
        let f2 = profile.concave_root(l2);
        // constant-factor bounds
        let mut worst = f2 - cmax * f1;
        worst = worst.max(f1 - cmax * f0).max(f2 - cmax * f0);
        // chord ratio toward the vanishing endpoint
        if l2 >= 0.0 {
            worst = worst.max(f1 - (b - l1) / (b - l2) * f2);
        } else {
            worst = worst.max(f1 - (a - l1.abs()) / (a - l2.abs()) * f2);
        }
        if worst > slack {
            ok = false;
        }
        points.push(GridPoint {
            theta: None,
            x: l2,
            value: worst,
        });
    }
    let mut report = CheckReport::from_points(
        "concave-lemma",
        points,
        serde_json::json!({"check": "concave-lemma", "pairs": pairs.len(), "slack": slack, "a": a, "b": b}),
    );
    report.verdict = ok;
    Ok(report)
}

/// Uniform lower bound on boundary slices at depth 1/rho:
/// W = A(-a + 1/rho) rho^{(d-1)/2} (and the b-side analog) bounded below
/// for rho >= 2 / r_min, where r_min is the rolling-ball radius estimated
/// from the maximal principal curvature over a boundary scan.
pub fn check_uniform_ball(scan: &RatioScan) -> Result<CheckReport> {
    scan.validate()?;
    require_smooth(&scan.body, "the uniform slice bound")?;
    let r_min = scan.body.min_curvature_radius()?;
    let rho_floor = (2.0 / r_min).max(scan.kappa);
    if scan.rho_grid.iter().all(|&r| r < rho_floor) {
        return Err(DiscLabError::Domain(format!(
            "all rho below the rolling-ball threshold {rho_floor}"
        )));
    }
    let e = (scan.body.dim as f64 - 1.0) / 2.0;
    let mut points = Vec::new();
    for (ti, theta) in scan.theta_grid.iter().enumerate() {
        for &rho in &scan.rho_grid {
            if rho < rho_floor {
                continue;
            }
            let (alo, ahi) = endpoint_sections(&scan.body, theta, rho)?;
            points.push(GridPoint {
                theta: Some(ti),
                x: rho,
                value: alo.min(ahi) * rho.powf(e),
            });
        }
    }
    let mut config = scan.config_json("uniform-ball");
    config["r_min"] = serde_json::json!(r_min);
    config["rho_floor"] = serde_json::json!(rho_floor);
    let mut report = CheckReport::from_points("uniform-ball", points, config);
    let (bottom, top) = report.half_split(f64::min, f64::INFINITY);
    report.verdict = report.inf > 0.0 && top >= bottom / scan.slack;
    Ok(report)
}
