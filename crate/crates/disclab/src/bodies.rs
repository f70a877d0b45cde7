//! Catalog of convex bodies and the geometric queries consumed by the
//! Fourier and bound modules: parallel section functions, support
//! intervals, normal points, Gaussian curvature, boundary caps, volume
//! and membership.
//!
//! All bodies are origin-symmetric before the optional center translation,
//! so the support interval of the centered body satisfies a = b for every
//! direction; the translation shifts it.

use crate::error::{DiscLabError, Result};
use crate::quad::{gauss_interval, gl_rule};
use crate::special::{gamma_fn, unit_ball_volume};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

const DIR_NORM_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// small vector helpers (d <= 4, plain slices)

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub(crate) fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Cross product in R^3.
pub(crate) fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Orthonormal basis of the hyperplane orthogonal to the unit vector `n`,
/// via Gram-Schmidt on the standard basis.
pub(crate) fn tangent_basis(n: &[f64]) -> Vec<Vec<f64>> {
    let d = n.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        let p = dot(&e, n);
        axpy(&mut e, -p, n);
        for b in &basis {
            let p = dot(&e, b);
            axpy(&mut e, -p, b);
        }
        let len = norm(&e);
        if len > 1e-7 {
            basis.push(scale(&e, 1.0 / len));
            if basis.len() == d - 1 {
                break;
            }
        }
    }
    debug_assert_eq!(basis.len(), d - 1);
    basis
}

// ---------------------------------------------------------------------------
// Direction

/// Unit vector on the (d-1)-sphere; carrier for all directional queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Accepts a vector already normalized to within 1e-12.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.len() < 2 {
            return Err(DiscLabError::Config("direction needs dimension >= 2".into()));
        }
        let n = norm(&components);
        if (n - 1.0).abs() > DIR_NORM_TOL {
            return Err(DiscLabError::Config(format!(
                "direction norm {n} deviates from 1 by more than 1e-12"
            )));
        }
        Ok(Self(components))
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn from_vector(v: &[f64]) -> Result<Self> {
        let n = norm(v);
        if n == 0.0 || !n.is_finite() {
            return Err(DiscLabError::Config("cannot normalize zero direction".into()));
        }
        Ok(Self(scale(v, 1.0 / n)))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|x| -x).collect())
    }

    /// e_i in dimension d.
    pub fn axis(d: usize, i: usize) -> Self {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        Self(v)
    }
}

// ---------------------------------------------------------------------------
// BodySpec

#[derive(Debug, Clone, PartialEq)]
pub enum BodyKind {
    Ball { radius: f64 },
    Ellipsoid { semi_axes: Vec<f64> },
    Superellipsoid { exponent: u32, semi_axes: Vec<f64> },
    /// {(x,y,z): sqrt(y^2+z^2) <= s - |x|}, apexes at (+-s, 0, 0). d = 3 only.
    DoubleCone { half_length: f64 },
    Cube { side: f64 },
}

/// Parametric description of a convex body in dimension d.
#[derive(Debug, Clone, PartialEq)]
pub struct BodySpec {
    pub kind: BodyKind,
    pub dim: usize,
    pub center: Vec<f64>,
}

// JSON form: {"kind":"superellipsoid","p":4,"axes":[1,1,1]}; the dimension
// is inferred from the axes length where possible. Unknown keys rejected.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BodyJson {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    axes: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    side: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    half_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    center: Option<Vec<f64>>,
}

impl Serialize for BodySpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut j = BodyJson {
            kind: String::new(),
            radius: None,
            axes: None,
            p: None,
            side: None,
            half_length: None,
            dim: None,
            center: None,
        };
        match &self.kind {
            BodyKind::Ball { radius } => {
                j.kind = "ball".into();
                j.radius = Some(*radius);
                j.dim = Some(self.dim);
            }
            BodyKind::Ellipsoid { semi_axes } => {
                j.kind = "ellipsoid".into();
                j.axes = Some(semi_axes.clone());
            }
            BodyKind::Superellipsoid { exponent, semi_axes } => {
                j.kind = "superellipsoid".into();
                j.p = Some(*exponent);
                j.axes = Some(semi_axes.clone());
            }
            BodyKind::DoubleCone { half_length } => {
                j.kind = "double-cone".into();
                j.half_length = Some(*half_length);
            }
            BodyKind::Cube { side } => {
                j.kind = "cube".into();
                j.side = Some(*side);
                j.dim = Some(self.dim);
            }
        }
        if self.center.iter().any(|&c| c != 0.0) {
            j.center = Some(self.center.clone());
        }
        j.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BodySpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let j = BodyJson::deserialize(d)?;
        let body = BodySpec::from_json_parts(&j).map_err(D::Error::custom)?;
        Ok(body)
    }
}

impl BodySpec {
    fn from_json_parts(j: &BodyJson) -> Result<Self> {
        let mut body = match j.kind.as_str() {
            "ball" => {
                let radius = j
                    .radius
                    .ok_or_else(|| DiscLabError::Config("ball needs \"radius\"".into()))?;
                let dim = j
                    .dim
                    .ok_or_else(|| DiscLabError::Config("ball needs \"dim\"".into()))?;
                BodySpec::ball(dim, radius)
            }
            "ellipsoid" => {
                let axes = j
                    .axes
                    .clone()
                    .ok_or_else(|| DiscLabError::Config("ellipsoid needs \"axes\"".into()))?;
                BodySpec::ellipsoid(axes)
            }
            "superellipsoid" => {
                let axes = j
                    .axes
                    .clone()
                    .ok_or_else(|| DiscLabError::Config("superellipsoid needs \"axes\"".into()))?;
                let p = j.p.unwrap_or(4);
                BodySpec::superellipsoid(p, axes)
            }
            "double-cone" => BodySpec::double_cone(j.half_length.unwrap_or(1.0)),
            "cube" => {
                let side = j
                    .side
                    .ok_or_else(|| DiscLabError::Config("cube needs \"side\"".into()))?;
                let dim = j
                    .dim
                    .ok_or_else(|| DiscLabError::Config("cube needs \"dim\"".into()))?;
                BodySpec::cube(dim, side)
            }
            other => {
                return Err(DiscLabError::Config(format!("unknown body kind \"{other}\"")))
            }
        };
        if let Some(c) = &j.center {
            body.center = c.clone();
        }
        body.validate()?;
        Ok(body)
    }

    pub fn ball(dim: usize, radius: f64) -> Self {
        Self {
            kind: BodyKind::Ball { radius },
            dim,
            center: vec![0.0; dim],
        }
    }

    pub fn ellipsoid(semi_axes: Vec<f64>) -> Self {
        let dim = semi_axes.len();
        Self {
            kind: BodyKind::Ellipsoid { semi_axes },
            dim,
            center: vec![0.0; dim],
        }
    }

    pub fn superellipsoid(exponent: u32, semi_axes: Vec<f64>) -> Self {
        let dim = semi_axes.len();
        Self {
            kind: BodyKind::Superellipsoid { exponent, semi_axes },
            dim,
            center: vec![0.0; dim],
        }
    }

    pub fn double_cone(half_length: f64) -> Self {
        Self {
            kind: BodyKind::DoubleCone { half_length },
            dim: 3,
            center: vec![0.0; 3],
        }
    }

    pub fn cube(dim: usize, side: f64) -> Self {
        Self {
            kind: BodyKind::Cube { side },
            dim,
            center: vec![0.0; dim],
        }
    }

    pub fn with_center(mut self, center: Vec<f64>) -> Self {
        self.center = center;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(DiscLabError::Config("dimension must be >= 2".into()));
        }
        if self.center.len() != self.dim {
            return Err(DiscLabError::Config("center dimension mismatch".into()));
        }
        match &self.kind {
            BodyKind::Ball { radius } => {
                if *radius <= 0.0 {
                    return Err(DiscLabError::Config("ball radius must be positive".into()));
                }
            }
            BodyKind::Ellipsoid { semi_axes } => {
                if semi_axes.len() != self.dim || semi_axes.iter().any(|&a| a <= 0.0) {
                    return Err(DiscLabError::Config(
                        "ellipsoid semi-axes must be positive, one per dimension".into(),
                    ));
                }
            }
            BodyKind::Superellipsoid { exponent, semi_axes } => {
                if semi_axes.len() != self.dim || semi_axes.iter().any(|&a| a <= 0.0) {
                    return Err(DiscLabError::Config(
                        "superellipsoid semi-axes must be positive, one per dimension".into(),
                    ));
                }
                if *exponent < 2 || exponent % 2 != 0 {
                    return Err(DiscLabError::Config(
                        "superellipsoid exponent must be an even integer >= 2".into(),
                    ));
                }
            }
            BodyKind::DoubleCone { half_length } => {
                if self.dim != 3 {
                    return Err(DiscLabError::Config("double cone is 3-dimensional".into()));
                }
                if *half_length <= 0.0 {
                    return Err(DiscLabError::Config("double cone size must be positive".into()));
                }
            }
            BodyKind::Cube { side } => {
                if *side <= 0.0 {
                    return Err(DiscLabError::Config("cube side must be positive".into()));
                }
            }
        }
        if norm(&self.center) >= self.inner_radius_centered() {
            return Err(DiscLabError::Config(
                "center too far from origin: origin must stay interior".into(),
            ));
        }
        Ok(())
    }

    /// Ball, ellipsoid and superellipsoid have smooth boundary of finite
    /// type; double cone and cube are flagged non-smooth.
    pub fn is_smooth(&self) -> bool {
        matches!(
            self.kind,
            BodyKind::Ball { .. } | BodyKind::Ellipsoid { .. } | BodyKind::Superellipsoid { .. }
        )
    }

    /// Everywhere positive Gaussian curvature (ball and ellipsoid).
    pub fn is_positive_curvature(&self) -> bool {
        matches!(self.kind, BodyKind::Ball { .. } | BodyKind::Ellipsoid { .. })
    }

    /// Radius r1 of a ball centered at the origin contained in the centered
    /// body.
    fn inner_radius_centered(&self) -> f64 {
        match &self.kind {
            BodyKind::Ball { radius } => *radius,
            BodyKind::Ellipsoid { semi_axes } | BodyKind::Superellipsoid { semi_axes, .. } => {
                semi_axes.iter().cloned().fold(f64::INFINITY, f64::min)
            }
            BodyKind::DoubleCone { half_length } => half_length / std::f64::consts::SQRT_2,
            BodyKind::Cube { side } => side / 2.0,
        }
    }

    /// Inner radius r1 with the center translation accounted for.
    pub fn inner_radius(&self) -> f64 {
        self.inner_radius_centered() - norm(&self.center)
    }

    /// Radius r2 of a ball centered at the origin containing the body.
    pub fn outer_radius(&self) -> f64 {
        let centered = match &self.kind {
            BodyKind::Ball { radius } => *radius,
            BodyKind::Ellipsoid { semi_axes } => {
                semi_axes.iter().cloned().fold(0.0, f64::max)
            }
            BodyKind::Superellipsoid { exponent, semi_axes } => {
                // max |x| over the boundary, by Hoelder duality
                let p = *exponent as f64;
                if *exponent == 2 {
                    semi_axes.iter().cloned().fold(0.0, f64::max)
                } else {
                    let e = p / (p - 2.0);
                    semi_axes
                        .iter()
                        .map(|a| (a * a).powf(e))
                        .sum::<f64>()
                        .powf(1.0 / (2.0 * e))
                }
            }
            BodyKind::DoubleCone { half_length } => *half_length,
            BodyKind::Cube { side } => side / 2.0 * (self.dim as f64).sqrt(),
        };
        centered + norm(&self.center)
    }

    /// Diameter; all catalog bodies are origin-symmetric before translation.
    pub fn diameter(&self) -> f64 {
        2.0 * (self.outer_radius() - norm(&self.center))
    }

    /// Uniform rescaling about the body's center.
    pub fn scaled(&self, factor: f64) -> Self {
        let kind = match &self.kind {
            BodyKind::Ball { radius } => BodyKind::Ball {
                radius: radius * factor,
            },
            BodyKind::Ellipsoid { semi_axes } => BodyKind::Ellipsoid {
                semi_axes: scale(semi_axes, factor),
            },
            BodyKind::Superellipsoid { exponent, semi_axes } => BodyKind::Superellipsoid {
                exponent: *exponent,
                semi_axes: scale(semi_axes, factor),
            },
            BodyKind::DoubleCone { half_length } => BodyKind::DoubleCone {
                half_length: half_length * factor,
            },
            BodyKind::Cube { side } => BodyKind::Cube { side: side * factor },
        };
        Self {
            kind,
            dim: self.dim,
            center: self.center.clone(),
        }
    }

    /// Rescale so that the outer radius of the centered body equals `r`.
    pub fn scaled_to_radius(&self, r: f64) -> Self {
        let cur = self.outer_radius() - norm(&self.center);
        self.scaled(r / cur)
    }

    // -- gauge machinery for the smooth catalog ----------------------------

    /// Exponent and semi-axes of the defining function F(x) = sum (x_i/a_i)^p
    /// for the smooth bodies.
    pub(crate) fn smooth_gauge(&self) -> Option<(u32, Vec<f64>)> {
        match &self.kind {
            BodyKind::Ball { radius } => Some((2, vec![*radius; self.dim])),
            BodyKind::Ellipsoid { semi_axes } => Some((2, semi_axes.clone())),
            BodyKind::Superellipsoid { exponent, semi_axes } => {
                Some((*exponent, semi_axes.clone()))
            }
            _ => None,
        }
    }

    /// F(x) for smooth bodies (x relative to the center).
    pub(crate) fn gauge_f(&self, x: &[f64]) -> f64 {
        let (p, axes) = self.smooth_gauge().expect("smooth body");
        x.iter()
            .zip(&axes)
            .map(|(xi, a)| (xi / a).powi(p as i32))
            .sum()
    }

    pub(crate) fn gauge_grad(&self, x: &[f64]) -> Vec<f64> {
        let (p, axes) = self.smooth_gauge().expect("smooth body");
        x.iter()
            .zip(&axes)
            .map(|(xi, a)| p as f64 * (xi / a).powi(p as i32 - 1) / a)
            .collect()
    }

    /// Diagonal of the Hessian of F (the Hessian is diagonal).
    pub(crate) fn gauge_hess_diag(&self, x: &[f64]) -> Vec<f64> {
        let (p, axes) = self.smooth_gauge().expect("smooth body");
        let pf = p as f64;
        x.iter()
            .zip(&axes)
            .map(|(xi, a)| pf * (pf - 1.0) * (xi / a).powi(p as i32 - 2) / (a * a))
            .collect()
    }

    /// Radial function of the centered smooth body: r(w) with r(w) w on the
    /// boundary for unit w. F is homogeneous of degree p, so r = F(w)^{-1/p}.
    pub(crate) fn radial(&self, w: &[f64]) -> f64 {
        let (p, _) = self.smooth_gauge().expect("smooth body");
        self.gauge_f(w).powf(-1.0 / p as f64)
    }

    // -- membership --------------------------------------------------------

    /// x in the closed body.
    pub fn membership(&self, x: &[f64]) -> bool {
        let y = sub(x, &self.center);
        const EPS: f64 = 1e-12;
        match &self.kind {
            BodyKind::Ball { radius } => norm(&y) <= radius * (1.0 + EPS),
            BodyKind::Ellipsoid { .. } | BodyKind::Superellipsoid { .. } => {
                self.gauge_f(&y) <= 1.0 + EPS
            }
            BodyKind::DoubleCone { half_length } => {
                let lateral = (y[1] * y[1] + y[2] * y[2]).sqrt();
                y[0].abs() + lateral <= half_length * (1.0 + EPS)
            }
            BodyKind::Cube { side } => y.iter().all(|&c| c.abs() <= side / 2.0 * (1.0 + EPS)),
        }
    }

    // -- volume ------------------------------------------------------------

    pub fn volume(&self) -> f64 {
        let d = self.dim;
        match &self.kind {
            BodyKind::Ball { radius } => unit_ball_volume(d) * radius.powi(d as i32),
            BodyKind::Ellipsoid { semi_axes } => {
                unit_ball_volume(d) * semi_axes.iter().product::<f64>()
            }
            BodyKind::Superellipsoid { exponent, semi_axes } => {
                let p = *exponent as f64;
                let prod: f64 = semi_axes.iter().map(|a| 2.0 * a).product();
                prod * gamma_fn(1.0 + 1.0 / p).powi(d as i32) / gamma_fn(1.0 + d as f64 / p)
            }
            BodyKind::DoubleCone { half_length } => {
                // two cones of height s over a disk of radius s
                2.0 * std::f64::consts::PI / 3.0 * half_length.powi(3)
            }
            BodyKind::Cube { side } => side.powi(d as i32),
        }
    }

    // -- support interval --------------------------------------------------

    /// Support function of the centered body.
    pub fn support_function(&self, theta: &Direction) -> f64 {
        let t = theta.components();
        match &self.kind {
            BodyKind::Ball { radius } => *radius,
            BodyKind::Ellipsoid { semi_axes } => t
                .iter()
                .zip(semi_axes)
                .map(|(ti, a)| (a * ti) * (a * ti))
                .sum::<f64>()
                .sqrt(),
            BodyKind::Superellipsoid { exponent, semi_axes } => {
                let p = *exponent as f64;
                let q = p / (p - 1.0);
                t.iter()
                    .zip(semi_axes)
                    .map(|(ti, a)| (a * ti.abs()).powf(q))
                    .sum::<f64>()
                    .powf(1.0 / q)
            }
            BodyKind::DoubleCone { half_length } => {
                let lateral = (t[1] * t[1] + t[2] * t[2]).sqrt();
                half_length * t[0].abs().max(lateral)
            }
            BodyKind::Cube { side } => side / 2.0 * t.iter().map(|ti| ti.abs()).sum::<f64>(),
        }
    }

    /// Support interval [-a, b] of the parallel section function.
    pub fn support_interval(&self, theta: &Direction) -> Result<SectionSupport> {
        self.check_dim(theta)?;
        let h = self.support_function(theta);
        let shift = dot(theta.components(), &self.center);
        let a = h - shift;
        let b = h + shift;
        if a <= 0.0 || b <= 0.0 {
            return Err(DiscLabError::Config("origin not interior to the body".into()));
        }
        Ok(SectionSupport { a, b })
    }

    fn check_dim(&self, theta: &Direction) -> Result<()> {
        if theta.dim() != self.dim {
            return Err(DiscLabError::Config(format!(
                "direction dimension {} does not match body dimension {}",
                theta.dim(),
                self.dim
            )));
        }
        Ok(())
    }

    // -- parallel section function -----------------------------------------

    /// A(t): (d-1)-volume of the slice of the body by the hyperplane
    /// orthogonal to theta at signed distance t from the origin.
    /// Returns 0 outside the open support (closed support convention).
    pub fn section_function(&self, theta: &Direction, t: f64) -> Result<f64> {
        self.check_dim(theta)?;
        self.validate()?;
        let support = self.support_interval(theta)?;
        if t <= -support.a || t >= support.b {
            return Ok(0.0);
        }
        // slice of the centered body at shifted height
        let tc = t - dot(theta.components(), &self.center);
        self.section_centered(theta, tc)
    }

    fn section_centered(&self, theta: &Direction, t: f64) -> Result<f64> {
        let d = self.dim;
        match &self.kind {
            BodyKind::Ball { radius } => {
                let r2 = radius * radius - t * t;
                Ok(unit_ball_volume(d - 1) * r2.max(0.0).powf((d as f64 - 1.0) / 2.0))
            }
            BodyKind::Ellipsoid { semi_axes } => {
                let w = self.support_function(theta);
                let prod: f64 = semi_axes.iter().product();
                let u = 1.0 - (t / w) * (t / w);
                Ok(unit_ball_volume(d - 1) * (prod / w) * u.max(0.0).powf((d as f64 - 1.0) / 2.0))
            }
            BodyKind::Cube { side } => Ok(cube_section(theta.components(), *side, t)),
            BodyKind::DoubleCone { half_length } => {
                let th = theta.components();
                if th[0].abs() < 1.0 - 1e-9 {
                    return Err(DiscLabError::UnsupportedQuery(
                        "double cone sections are implemented along the axis only".into(),
                    ));
                }
                let s = *half_length;
                let r = s - t.abs();
                Ok(std::f64::consts::PI * r * r)
            }
            BodyKind::Superellipsoid { .. } => self.superellipsoid_section(theta, t),
        }
    }

    // Chord (d=2) or polar-quadrature slice area (d=3) through the interior
    // point q = (t/b) p(theta) which lies on the slice hyperplane.
    fn superellipsoid_section(&self, theta: &Direction, t: f64) -> Result<f64> {
        let (p, axes) = self.smooth_gauge().expect("superellipsoid");
        let rmax = self.outer_radius();
        match self.dim {
            2 => {
                let th = theta.components();
                let perp = [-th[1], th[0]];
                let q = self.slice_anchor(theta, t);
                let neg = [th[1], -th[0]];
                let right = ray_boundary_fast(p as i32, &axes, &q, &perp, rmax);
                let left = ray_boundary_fast(p as i32, &axes, &q, &neg, rmax);
                Ok(right + left)
            }
            3 => {
                let basis = tangent_basis(theta.components());
                let (u, v) = (&basis[0], &basis[1]);
                let q = self.slice_anchor(theta, t);
                // polar area: 1/2 int R(phi)^2 dphi, spectrally accurate
                // trapezoid with doubling
                let mut m = 32usize;
                let mut prev = f64::NAN;
                loop {
                    let mut sum = 0.0;
                    for i in 0..m {
                        let phi = std::f64::consts::TAU * i as f64 / m as f64;
                        let (c, s) = (phi.cos(), phi.sin());
                        let w = [
                            c * u[0] + s * v[0],
                            c * u[1] + s * v[1],
                            c * u[2] + s * v[2],
                        ];
                        let r = ray_boundary_fast(p as i32, &axes, &q, &w, rmax);
                        sum += r * r;
                    }
                    let area = 0.5 * sum * std::f64::consts::TAU / m as f64;
                    if (area - prev).abs() <= 1e-11 * area.abs().max(1e-300) || m >= 2048 {
                        return Ok(area);
                    }
                    prev = area;
                    m *= 2;
                }
            }
            _ => Err(DiscLabError::UnsupportedQuery(
                "superellipsoid sections implemented for d in {2, 3}".into(),
            )),
        }
    }

    /// Interior point of the centered body lying on the slice hyperplane
    /// theta . x = t, obtained on the segment from the origin to p(theta).
    fn slice_anchor(&self, theta: &Direction, t: f64) -> Vec<f64> {
        let pb = self.normal_point_centered(theta);
        let b = dot(theta.components(), &pb);
        scale(&pb, t / b)
    }


    // -- normal point and curvature ---------------------------------------

    /// The unique boundary point with outward unit normal theta.
    pub fn normal_point(&self, theta: &Direction) -> Result<Vec<f64>> {
        self.check_dim(theta)?;
        if !self.is_smooth() {
            return Err(DiscLabError::UnsupportedBody(
                "normal point requires a smooth body".into(),
            ));
        }
        Ok(add(&self.normal_point_centered(theta), &self.center))
    }

    fn normal_point_centered(&self, theta: &Direction) -> Vec<f64> {
        let th = theta.components();
        match &self.kind {
            BodyKind::Ball { radius } => scale(th, *radius),
            BodyKind::Ellipsoid { semi_axes } => {
                let w = self.support_function(theta);
                th.iter().zip(semi_axes).map(|(ti, a)| a * a * ti / w).collect()
            }
            BodyKind::Superellipsoid { exponent, semi_axes } => {
                let p = *exponent as f64;
                let q = p / (p - 1.0);
                let s: f64 = th
                    .iter()
                    .zip(semi_axes)
                    .map(|(ti, a)| (a * ti.abs()).powf(q))
                    .sum();
                let mu = s.powf(-1.0 / p);
                th.iter()
                    .zip(semi_axes)
                    .map(|(ti, a)| mu * ti.signum() * a.powf(q) * ti.abs().powf(q - 1.0))
                    .collect()
            }
            _ => unreachable!("smoothness checked by caller"),
        }
    }

    /// Gaussian curvature of the boundary at the point with outward normal
    /// theta: determinant of the second fundamental form in an orthonormal
    /// tangent frame.
    pub fn gauss_curvature(&self, theta: &Direction) -> Result<f64> {
        self.check_dim(theta)?;
        if !self.is_smooth() {
            return Err(DiscLabError::UnsupportedBody(
                "Gaussian curvature requires a smooth body".into(),
            ));
        }
        let x = self.normal_point_centered(theta);
        Ok(self.curvature_at(&x).0)
    }

    /// (Gaussian curvature, max principal curvature) at a boundary point x
    /// of the centered body.
    pub(crate) fn curvature_at(&self, x: &[f64]) -> (f64, f64) {
        let grad = self.gauge_grad(x);
        let g = norm(&grad);
        let n = scale(&grad, 1.0 / g);
        let basis = tangent_basis(&n);
        let hd = self.gauge_hess_diag(x);
        let k = basis.len();
        // second fundamental form in the tangent frame
        let mut ii = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in i..k {
                let v: f64 = basis[i]
                    .iter()
                    .zip(&basis[j])
                    .zip(&hd)
                    .map(|((bi, bj), h)| bi * bj * h)
                    .sum();
                ii[i][j] = v / g;
                ii[j][i] = v / g;
            }
        }
        let gauss = det_small(&ii);
        let kmax = max_eigenvalue_sym(&ii);
        (gauss, kmax)
    }

    /// Smallest radius of curvature over a boundary scan; estimates the
    /// rolling-ball epsilon used by the uniform lower bound on slices.
    pub fn min_curvature_radius(&self) -> Result<f64> {
        match &self.kind {
            BodyKind::Ball { radius } => Ok(*radius),
            BodyKind::Ellipsoid { semi_axes } => {
                let amax = semi_axes.iter().cloned().fold(0.0, f64::max);
                let amin = semi_axes.iter().cloned().fold(f64::INFINITY, f64::min);
                Ok(amin * amin / amax)
            }
            BodyKind::Superellipsoid { .. } => {
                let mut kmax: f64 = 0.0;
                match self.dim {
                    2 => {
                        for i in 0..720 {
                            let phi = std::f64::consts::TAU * i as f64 / 720.0;
                            let w = [phi.cos(), phi.sin()];
                            let r = self.radial(&w);
                            let x = vec![r * w[0], r * w[1]];
                            kmax = kmax.max(self.curvature_at(&x).1);
                        }
                    }
                    3 => {
                        for w in fibonacci_sphere(2000) {
                            let r = self.radial(&w);
                            let x = scale(&w, r);
                            kmax = kmax.max(self.curvature_at(&x).1);
                        }
                    }
                    _ => {
                        return Err(DiscLabError::UnsupportedQuery(
                            "curvature scan implemented for d in {2, 3}".into(),
                        ))
                    }
                }
                Ok(1.0 / kmax)
            }
            _ => Err(DiscLabError::UnsupportedBody(
                "rolling-ball radius requires a smooth body".into(),
            )),
        }
    }

    // -- spherical caps ----------------------------------------------------

    /// Surface measures of the two boundary caps at distance 1/rho from the
    /// tangent planes orthogonal to theta: (cap at p(-theta), cap at
    /// p(theta)).
    pub fn cap_surface_measure(&self, theta: &Direction, rho: f64) -> Result<(f64, f64)> {
        self.check_dim(theta)?;
        if !self.is_smooth() {
            return Err(DiscLabError::UnsupportedBody(
                "cap measure requires a smooth body".into(),
            ));
        }
        if rho <= 1.0 / self.inner_radius() {
            return Err(DiscLabError::Domain(format!(
                "rho = {rho} too small: need rho > 1/r1"
            )));
        }
        let neg = theta.negated();
        let lower = self.one_cap(&neg, rho)?;
        let upper = self.one_cap(theta, rho)?;
        Ok((lower, upper))
    }

    // Cap {y on boundary : h(theta) - theta.y < 1/rho}, computed in polar
    // coordinates around the cap point with the angular extent found by
    // bisection per azimuth.
    fn one_cap(&self, theta: &Direction, rho: f64) -> Result<f64> {
        let depth = 1.0 / rho;
        let b = self.support_function(theta);
        let p = self.normal_point_centered(theta);
        let pole = scale(&p, 1.0 / norm(&p));
        let gap = |w: &[f64]| b - dot(theta.components(), &scale(w, self.radial(w)));
        match self.dim {
            2 => {
                let perp = vec![-pole[1], pole[0]];
                let mut total = 0.0;
                for side in [1.0, -1.0] {
                    let wdir = |phi: f64| {
                        add(&scale(&pole, phi.cos()), &scale(&perp, side * phi.sin()))
                    };
                    let phi_star = bisect_increasing(|phi| gap(&wdir(phi)) - depth, 0.0, std::f64::consts::PI);
                    let rule = gl_rule(16);
                    total += gauss_interval(
                        |phi| {
                            let w = wdir(phi);
                            self.arc_element(&w, &pole, &perp, side)
                        },
                        0.0,
                        phi_star,
                        &rule,
                    );
                }
                Ok(total)
            }
            3 => {
                let basis = tangent_basis(&pole);
                let rule = gl_rule(16);
                let mut m = 16usize;
                let mut prev = f64::NAN;
                loop {
                    let mut sum = 0.0;
                    for i in 0..m {
                        let phi = std::f64::consts::TAU * i as f64 / m as f64;
                        let u = add(
                            &scale(&basis[0], phi.cos()),
                            &scale(&basis[1], phi.sin()),
                        );
                        let wdir = |th: f64| add(&scale(&pole, th.cos()), &scale(&u, th.sin()));
                        let theta_star =
                            bisect_increasing(|th| gap(&wdir(th)) - depth, 0.0, std::f64::consts::PI);
                        sum += gauss_interval(
                            |th| self.area_element_polar(&wdir(th), &pole, &u, th),
                            0.0,
                            theta_star,
                            &rule,
                        );
                    }
                    let val = sum * std::f64::consts::TAU / m as f64;
                    if (val - prev).abs() <= 1e-6 * val.abs() || m >= 2048 {
                        return Ok(val);
                    }
                    prev = val;
                    m *= 2;
                }
            }
            _ => Err(DiscLabError::UnsupportedQuery(
                "cap measures implemented for d in {2, 3}".into(),
            )),
        }
    }

    // |y'(phi)| for y(phi) = r(w) w, w = cos(phi) pole + side sin(phi) perp
    fn arc_element(&self, w: &[f64], pole: &[f64], perp: &[f64], side: f64) -> f64 {
        // w' = -sin * pole + side cos * perp recovered from w itself:
        let c = dot(w, pole);
        let s = dot(w, perp) * side;
        let wp = add(&scale(pole, -s), &scale(perp, side * c));
        let r = self.radial(w);
        let (p, _) = self.smooth_gauge().expect("smooth body");
        let grad = self.gauge_grad(w);
        // r' = -(1/p) F^{-1/p - 1} F' with F(w) homogeneous values
        let fval = self.gauge_f(w);
        let rp = -(1.0 / p as f64) * fval.powf(-1.0 / p as f64 - 1.0) * dot(&grad, &wp);
        let y_t = {
            let mut v = scale(&wp, r);
            axpy(&mut v, rp, w);
            v
        };
        norm(&y_t)
    }

    // |y_theta x y_phi| for y = r(w) w on the polar chart
    // w(theta, phi) = cos(theta) pole + sin(theta) u(phi), d = 3.
    fn area_element_polar(&self, w: &[f64], pole: &[f64], u: &[f64], th: f64) -> f64 {
        let (p, _) = self.smooth_gauge().expect("smooth body");
        let pf = p as f64;
        // chart tangents of w
        let w_t = add(&scale(pole, -th.sin()), &scale(u, th.cos()));
        // u'(phi) = pole x u direction: w_p = sin(theta) * (pole x u)
        let pxu = cross(pole, u);
        let w_p = scale(&pxu, th.sin());
        let fval = self.gauge_f(w);
        let r = fval.powf(-1.0 / pf);
        let grad = self.gauge_grad(w);
        let coeff = -(1.0 / pf) * fval.powf(-1.0 / pf - 1.0);
        let r_t = coeff * dot(&grad, &w_t);
        let r_p = coeff * dot(&grad, &w_p);
        let mut y_t = scale(&w_t, r);
        axpy(&mut y_t, r_t, w);
        let mut y_p = scale(&w_p, r);
        axpy(&mut y_p, r_p, w);
        let c = cross(&y_t, &y_p);
        norm(&c)
    }

    /// Section profile bundling direction, support and evaluator.
    pub fn section_profile(&self, theta: &Direction) -> Result<SectionProfile> {
        let support = self.support_interval(theta)?;
        let body = self.clone();
        let th = theta.clone();
        Ok(SectionProfile {
            direction: theta.clone(),
            support,
            dim: self.dim,
            eval: Arc::new(move |t| body.section_function(&th, t).unwrap_or(0.0)),
        })
    }
}

/// Support [-a, b] of a parallel section function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionSupport {
    pub a: f64,
    pub b: f64,
}

impl SectionSupport {
    pub fn width(&self) -> f64 {
        self.a + self.b
    }
}

/// The parallel section function of a body in one direction, with its
/// support interval.
#[derive(Clone)]
pub struct SectionProfile {
    pub direction: Direction,
    pub support: SectionSupport,
    pub dim: usize,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl SectionProfile {
    /// Profile given directly by an evaluator (used by the concavity lemma
    /// checks on synthetic profiles).
    pub fn from_evaluator<F>(direction: Direction, support: SectionSupport, dim: usize, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            direction,
            support,
            dim,
            eval: Arc::new(f),
        }
    }

    pub fn section(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    /// f(t) = A(t)^{1/(d-1)}, the concave root of the section function.
    pub fn concave_root(&self, t: f64) -> f64 {
        self.section(t).max(0.0).powf(1.0 / (self.dim as f64 - 1.0))
    }
}

// ---------------------------------------------------------------------------
// free helpers

/// Section (d-1)-volume of the cube of side s centered at the origin, by the
/// box-spline (Irwin-Hall with weights) closed form. Components of theta
/// below 1e-9 are treated as zero and factored out.
fn cube_section(theta: &[f64], side: f64, t: f64) -> f64 {
    let cs: Vec<f64> = theta
        .iter()
        .map(|th| (th * side).abs())
        .filter(|c| *c > 1e-9 * side)
        .collect();
    let k = cs.len();
    let d = theta.len();
    if k == 0 {
        return 0.0;
    }
    let total: f64 = cs.iter().sum();
    if t.abs() >= total / 2.0 {
        return 0.0;
    }
    let density = if k == 1 {
        1.0 / cs[0]
    } else {
        // f(t) = 1/((k-1)! prod c) * sum_eps (-1)^{|eps|} relu(t + C/2 - eps.c)^{k-1}
        let mut sum = 0.0;
        for mask in 0u32..(1 << k) {
            let mut arg = t + total / 2.0;
            let mut sign = 1.0;
            for (i, c) in cs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    arg -= c;
                    sign = -sign;
                }
            }
            if arg > 0.0 {
                sum += sign * arg.powi(k as i32 - 1);
            }
        }
        let fact: f64 = (1..k).map(|i| i as f64).product();
        sum / (fact * cs.iter().product::<f64>())
    };
    side.powi(d as i32) * density
}

/// Distance from an interior point q (F(q) < 1) to the boundary of the
/// superellipsoid sum (x_i/a_i)^p = 1 along the unit direction w:
/// safeguarded Newton on the convex function F(q + lambda w) - 1.
/// Allocation-free; this is the innermost loop of slice-area quadrature.
fn ray_boundary_fast(p: i32, axes: &[f64], q: &[f64], w: &[f64], rmax: f64) -> f64 {
    let mut lo = 0.0_f64;
    let mut hi = 2.0 * rmax;
    let mut lam = hi * 0.5;
    for _ in 0..80 {
        let mut f = 0.0;
        let mut df = 0.0;
        for i in 0..q.len() {
            let xi = (q[i] + lam * w[i]) / axes[i];
            let t = xi.powi(p - 1);
            f += t * xi;
            df += p as f64 * t * w[i] / axes[i];
        }
        let val = f - 1.0;
        if val.abs() < 1e-14 {
            return lam;
        }
        if val > 0.0 {
            hi = lam;
        } else {
            lo = lam;
        }
        let mut next = if df > 0.0 { lam - val / df } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - lam).abs() <= 4.0e-16 * lam.abs() {
            return next;
        }
        lam = next;
    }
    lam
}

/// det of a small (<= 3x3) symmetric matrix.
fn det_small(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => panic!("det_small supports up to 3x3"),
    }
}

/// Largest eigenvalue of a small symmetric matrix (power iteration with a
/// positive shift; the second fundamental forms here are PSD).
fn max_eigenvalue_sym(m: &[Vec<f64>]) -> f64 {
    let k = m.len();
    if k == 1 {
        return m[0][0];
    }
    let mut v = vec![1.0 / (k as f64).sqrt(); k];
    let shift = 1.0
        + m.iter()
            .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max);
    let mut lambda = 0.0;
    for _ in 0..500 {
        let mut w = vec![0.0; k];
        for i in 0..k {
            for j in 0..k {
                w[i] += m[i][j] * v[j];
            }
            w[i] += shift * v[i];
        }
        let n = norm(&w);
        let next: Vec<f64> = scale(&w, 1.0 / n);
        let new_lambda = n - shift;
        if (new_lambda - lambda).abs() < 1e-14 * lambda.abs().max(1.0) {
            return new_lambda;
        }
        lambda = new_lambda;
        v = next;
    }
    lambda
}

/// Root of an increasing function on [lo, hi] by bisection; f(lo) < 0.
fn bisect_increasing<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    let mut lo = lo;
    let mut hi = hi;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Near-uniform points on S^2 (Fibonacci spiral).
pub fn fibonacci_sphere(n: usize) -> Vec<Vec<f64>> {
    let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = std::f64::consts::TAU * (i as f64 / golden).fract();
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn unit_ball3() -> BodySpec {
        BodySpec::ball(3, 1.0)
    }

    #[test]
    fn ball_central_section_is_unit_disk() {
        let theta = Direction::from_vector(&[0.3, -0.4, 0.86]).unwrap();
        let a = unit_ball3().section_function(&theta, 0.0).unwrap();
        assert_relative_eq!(a, PI, max_relative = 1e-12);
    }

    #[test]
    fn ball_section_at_point_six() {
        let theta = Direction::axis(3, 2);
        let a = unit_ball3().section_function(&theta, 0.6).unwrap();
        assert_relative_eq!(a, 0.64 * PI, max_relative = 1e-12);
    }

    #[test]
    fn double_cone_axis_section() {
        let cone = BodySpec::double_cone(1.0);
        let theta = Direction::axis(3, 0);
        for &t in &[-0.75, -0.2, 0.0, 0.4, 0.9] {
            let a = cone.section_function(&theta, t).unwrap();
            assert_relative_eq!(a, PI * (1.0 - t.abs()).powi(2), max_relative = 1e-12);
        }
        let off_axis = Direction::from_vector(&[1.0, 1.0, 0.0]).unwrap();
        assert!(cone.section_function(&off_axis, 0.1).is_err());
    }

    // Monte Carlo slice-area oracle: sample the (d-1)-dimensional slice
    // bounding box and count hits.
    fn mc_slice_area(body: &BodySpec, theta: &Direction, t: f64, samples: usize) -> f64 {
        let d = body.dim;
        let r2 = body.outer_radius();
        let basis = tangent_basis(theta.components());
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut hits = 0usize;
        for _ in 0..samples {
            let mut x = scale(theta.components(), t);
            for b in &basis {
                let u: f64 = rng.gen_range(-r2..r2);
                axpy(&mut x, u, b);
            }
            if body.membership(&x) {
                hits += 1;
            }
        }
        (2.0 * r2).powi(d as i32 - 1) * hits as f64 / samples as f64
    }

    #[test]
    fn superellipsoid_section_matches_mc_oracle() {
        let se = BodySpec::superellipsoid(4, vec![1.0, 1.0, 1.0]);
        let theta = Direction::from_vector(&[1.0, 0.5, -0.25]).unwrap();
        let a = se.section_function(&theta, 0.3).unwrap();
        let mc = mc_slice_area(&se, &theta, 0.3, 400_000);
        assert_relative_eq!(a, mc, max_relative = 2e-2);
    }

    #[test]
    fn superellipsoid_chord_d2() {
        let se = BodySpec::superellipsoid(4, vec![1.0, 1.0]);
        let theta = Direction::axis(2, 0);
        // axis-aligned chord has the closed form 2 (1 - t^4)^{1/4}
        for &t in &[0.0, 0.3, 0.9] {
            let a = se.section_function(&theta, t).unwrap();
            assert_relative_eq!(a, 2.0 * (1.0 - t.powi(4)).powf(0.25), max_relative = 1e-10);
        }
    }

    #[test]
    fn support_interval_examples() {
        let ball = BodySpec::ball(3, 1.0);
        let s = ball
            .support_interval(&Direction::from_vector(&[1.0, 2.0, 2.0]).unwrap())
            .unwrap();
        assert_abs_diff_eq!(s.a, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.b, 1.0, epsilon = 1e-14);

        let ell = BodySpec::ellipsoid(vec![2.0, 1.0]);
        let s = ell.support_interval(&Direction::axis(2, 0)).unwrap();
        assert_abs_diff_eq!(s.b, 2.0, epsilon = 1e-14);

        // dual-norm support for the superellipsoid vs numerical maximization
        let se = BodySpec::superellipsoid(4, vec![1.0, 1.0, 1.0]);
        let theta = Direction::from_vector(&[1.0, 1.0, 1.0]).unwrap();
        let s = se.support_interval(&theta).unwrap();
        let mut best: f64 = 0.0;
        for w in fibonacci_sphere(40_000) {
            let r = se.radial(&w);
            best = best.max(r * dot(&w, theta.components()));
        }
        assert_relative_eq!(s.b, best, max_relative = 1e-4);
        // closed form: (sum (|theta_i|)^{4/3})^{3/4} with unit axes
        let q: f64 = 4.0 / 3.0;
        let closed = (3.0 * (1.0 / 3.0_f64.sqrt()).powf(q)).powf(1.0 / q);
        assert_relative_eq!(s.b, closed, max_relative = 1e-12);
    }

    #[test]
    fn support_swaps_under_negation() {
        let body = BodySpec::ellipsoid(vec![2.0, 1.0, 0.5]).with_center(vec![0.1, 0.0, -0.05]);
        let theta = Direction::from_vector(&[0.2, -1.0, 0.4]).unwrap();
        let s1 = body.support_interval(&theta).unwrap();
        let s2 = body.support_interval(&theta.negated()).unwrap();
        assert_abs_diff_eq!(s1.a, s2.b, epsilon = 1e-13);
        assert_abs_diff_eq!(s1.b, s2.a, epsilon = 1e-13);
    }

    #[test]
    fn normal_point_consistency() {
        let bodies = [
            BodySpec::ball(3, 1.5),
            BodySpec::ellipsoid(vec![2.0, 1.0, 0.7]),
            BodySpec::superellipsoid(4, vec![1.0, 0.8, 1.2]),
        ];
        let theta = Direction::from_vector(&[0.4, -1.0, 0.3]).unwrap();
        for body in &bodies {
            let p = body.normal_point(&theta).unwrap();
            let b = body.support_interval(&theta).unwrap().b;
            assert_abs_diff_eq!(dot(&p, theta.components()), b, epsilon = 1e-10);
            // the point is on the boundary
            assert_abs_diff_eq!(body.gauge_f(&p), 1.0, epsilon = 1e-10);
            // the gradient there is parallel to theta
            let g = body.gauge_grad(&p);
            let gn = scale(&g, 1.0 / norm(&g));
            for (gi, ti) in gn.iter().zip(theta.components()) {
                assert_abs_diff_eq!(gi, ti, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn superellipsoid_normal_point_lagrange_d2() {
        let se = BodySpec::superellipsoid(4, vec![1.0, 1.0]);
        let theta = Direction::from_vector(&[1.0, 1.0]).unwrap();
        let p = se.normal_point(&theta).unwrap();
        // grad(x^4 + y^4) parallel to theta and on the boundary
        assert_abs_diff_eq!(p[0], p[1], epsilon = 1e-12);
        assert_abs_diff_eq!(p[0].powi(4) + p[1].powi(4), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn curvature_ball_and_flat_superellipsoid() {
        let theta = Direction::from_vector(&[1.0, -2.0, 0.5]).unwrap();
        for d in [2usize, 3] {
            let th = if d == 2 {
                Direction::from_vector(&[1.0, -2.0]).unwrap()
            } else {
                theta.clone()
            };
            for r in [0.5, 1.0, 2.0] {
                let k = BodySpec::ball(d, r).gauss_curvature(&th).unwrap();
                assert_relative_eq!(k, r.powi(-(d as i32 - 1)), max_relative = 1e-10);
            }
        }
        let se = BodySpec::superellipsoid(4, vec![1.0, 1.0]);
        let k = se.gauss_curvature(&Direction::axis(2, 0)).unwrap();
        assert_abs_diff_eq!(k, 0.0, epsilon = 1e-12);
    }

    // finite-difference second-fundamental-form oracle on the parametrized
    // ellipse boundary
    #[test]
    fn ellipse_curvature_matches_fd_oracle() {
        let ell = BodySpec::ellipsoid(vec![2.0, 1.0]);
        let theta = Direction::axis(2, 0);
        let k = ell.gauss_curvature(&theta).unwrap();
        // boundary (2 cos u, sin u); curvature by finite differences at u=0
        let h = 1e-4;
        let curve = |u: f64| [2.0 * u.cos(), u.sin()];
        let p0 = curve(-h);
        let p1 = curve(0.0);
        let p2 = curve(h);
        let d1 = [(p2[0] - p0[0]) / (2.0 * h), (p2[1] - p0[1]) / (2.0 * h)];
        let d2 = [
            (p2[0] - 2.0 * p1[0] + p0[0]) / (h * h),
            (p2[1] - 2.0 * p1[1] + p0[1]) / (h * h),
        ];
        let kappa = (d1[0] * d2[1] - d1[1] * d2[0]).abs()
            / (d1[0] * d1[0] + d1[1] * d1[1]).powf(1.5);
        assert_relative_eq!(k, kappa, max_relative = 1e-6);
        assert_relative_eq!(k, 2.0, max_relative = 1e-6);
    }

    #[test]
    fn cap_measures_unit_ball() {
        let ball = unit_ball3();
        let theta = Direction::from_vector(&[1.0, 1.0, 0.0]).unwrap();
        let (lo, hi) = ball.cap_surface_measure(&theta, 10.0).unwrap();
        // exact spherical cap area 2 pi h
        assert_relative_eq!(lo, 2.0 * PI * 0.1, max_relative = 1e-4);
        assert_relative_eq!(hi, 2.0 * PI * 0.1, max_relative = 1e-4);

        let disk = BodySpec::ball(2, 1.0);
        let (_, arc) = disk
            .cap_surface_measure(&Direction::axis(2, 0), 100.0)
            .unwrap();
        // exact arc length 2 arccos(1 - 1/rho)
        assert_relative_eq!(arc, 2.0 * (1.0 - 0.01_f64).acos(), max_relative = 1e-8);
    }

    #[test]
    fn cap_comparable_to_section_superellipsoid_flat() {
        let se = BodySpec::superellipsoid(4, vec![1.0, 1.0]);
        let theta = Direction::axis(2, 0);
        let rho = 100.0;
        let (_, cap) = se.cap_surface_measure(&theta, rho).unwrap();
        let b = se.support_interval(&theta).unwrap().b;
        let section = se.section_function(&theta, b - 1.0 / rho).unwrap();
        let ratio = cap / section;
        assert!(
            (0.25..=4.0).contains(&ratio),
            "cap {cap} vs section {section} not comparable"
        );
    }

    #[test]
    fn membership_examples() {
        let ball = unit_ball3();
        assert!(ball.membership(&[0.0, 0.0, 0.0]));
        assert!(ball.membership(&[1.0, 0.0, 0.0]));
        assert!(!ball.membership(&[1.0 + 1e-9, 0.0, 0.0]));
        let cube = BodySpec::cube(3, 1.0);
        assert!(!cube.membership(&[0.51, 0.0, 0.0]));
        assert!(cube.membership(&[0.5, 0.5, 0.5]));
    }

    #[test]
    fn volumes() {
        assert_relative_eq!(BodySpec::ball(2, 1.0).volume(), PI, max_relative = 1e-13);
        assert_relative_eq!(
            BodySpec::double_cone(1.0).volume(),
            2.0 * PI / 3.0,
            max_relative = 1e-13
        );
        let se = BodySpec::superellipsoid(4, vec![1.0, 1.0]);
        // 4 Gamma(5/4)^2 / Gamma(3/2)
        let exact = 4.0 * gamma_fn(1.25).powi(2) / gamma_fn(1.5);
        assert_relative_eq!(se.volume(), exact, max_relative = 1e-12);
        assert_abs_diff_eq!(exact, 3.7081, epsilon = 5e-4);

        // Monte-Carlo volume oracle
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut hits = 0usize;
        let n = 2_000_000;
        for _ in 0..n {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            if se.membership(&x) {
                hits += 1;
            }
        }
        let mc = 4.0 * hits as f64 / n as f64;
        assert_relative_eq!(se.volume(), mc, max_relative = 5e-3);
    }

    #[test]
    fn fubini_section_integrates_to_volume() {
        let rule = gl_rule(16);
        let cases: Vec<(BodySpec, Direction)> = vec![
            (unit_ball3(), Direction::from_vector(&[1.0, 2.0, -1.0]).unwrap()),
            (
                BodySpec::ellipsoid(vec![2.0, 1.0, 0.5]),
                Direction::from_vector(&[0.3, 0.4, 1.0]).unwrap(),
            ),
            (
                BodySpec::cube(3, 1.0),
                Direction::from_vector(&[1.0, 0.7, 0.2]).unwrap(),
            ),
            (BodySpec::double_cone(1.0), Direction::axis(3, 0)),
            (
                BodySpec::superellipsoid(4, vec![1.0, 1.0]),
                Direction::from_vector(&[2.0, 1.0]).unwrap(),
            ),
        ];
        for (body, theta) in cases {
            let s = body.support_interval(&theta).unwrap();
            let mesh = crate::quad::graded_mesh(-s.a, s.b, s.width() / 200.0, 40);
            let v = crate::quad::integrate_mesh(
                |t| body.section_function(&theta, t).unwrap(),
                &mesh,
                &rule,
            );
            assert_relative_eq!(v, body.volume(), max_relative = 1e-6);
        }
    }

    #[test]
    fn cube_section_axis_and_diagonal() {
        let cube = BodySpec::cube(2, 1.0);
        // diagonal direction: A(t) is the tent sqrt(2)(1 - |t| sqrt(2)) scaled
        let diag = Direction::from_vector(&[1.0, 1.0]).unwrap();
        let a0 = cube.section_function(&diag, 0.0).unwrap();
        assert_relative_eq!(a0, std::f64::consts::SQRT_2, max_relative = 1e-9);
        // nearly-axis direction stays close to the axis value
        let skew = Direction::from_vector(&[1.0, 1e-12]).unwrap();
        let a = cube.section_function(&skew, 0.2).unwrap();
        assert_relative_eq!(a, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn brunn_root_concave_on_grid() {
        let se = BodySpec::superellipsoid(4, vec![1.0, 0.8, 1.2]);
        let theta = Direction::from_vector(&[0.3, -1.0, 0.6]).unwrap();
        let profile = se.section_profile(&theta).unwrap();
        let s = profile.support;
        let n = 200;
        let h = s.width() / (n as f64 + 1.0);
        let f: Vec<f64> = (1..=n)
            .map(|i| profile.concave_root(-s.a + i as f64 * h))
            .collect();
        let fmax = f.iter().cloned().fold(0.0, f64::max);
        for w in f.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-9 * fmax);
        }
    }

    #[test]
    fn json_round_trip_and_rejects_unknown_keys() {
        let body: BodySpec =
            serde_json::from_str(r#"{"kind":"superellipsoid","p":4,"axes":[1,1,1]}"#).unwrap();
        assert_eq!(body.dim, 3);
        let s = serde_json::to_string(&body).unwrap();
        let back: BodySpec = serde_json::from_str(&s).unwrap();
        assert_eq!(body, back);

        assert!(serde_json::from_str::<BodySpec>(r#"{"kind":"ball","radius":1,"dim":2,"spin":3}"#)
            .is_err());
        assert!(serde_json::from_str::<BodySpec>(r#"{"kind":"ball","radius":-1,"dim":2}"#).is_err());
    }

    #[test]
    fn scaled_to_radius() {
        let se = BodySpec::superellipsoid(4, vec![1.0, 2.0]).scaled_to_radius(0.25);
        assert_relative_eq!(se.outer_radius(), 0.25, max_relative = 1e-12);
        assert!(se.diameter() < 1.0);
    }
}
