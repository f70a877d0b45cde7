//! Quadrature building blocks: Gauss–Legendre rules, panel meshes graded
//! toward endpoint singularities, and cumulative integral tables.

use num_complex::Complex64;
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// A Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GlRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

static GL_CACHE: Lazy<Mutex<HashMap<usize, Arc<GlRule>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Nodes and weights of the n-point Gauss–Legendre rule, cached globally.
pub fn gl_rule(n: usize) -> Arc<GlRule> {
    let mut cache = GL_CACHE.lock().unwrap();
    cache
        .entry(n)
        .or_insert_with(|| Arc::new(compute_gl(n)))
        .clone()
}

// Newton iteration on Legendre polynomials; standard and exact to
// machine precision for the small orders used here.
fn compute_gl(n: usize) -> GlRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    GlRule { nodes, weights }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Integrate a real function over one interval with an n-point Gauss rule.
pub fn gauss_interval<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rule: &GlRule) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        sum += w * f(mid + half * x);
    }
    sum * half
}

/// Integrate a complex function over one interval with an n-point Gauss rule.
pub fn gauss_interval_c<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    rule: &GlRule,
) -> Complex64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = Complex64::new(0.0, 0.0);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        sum += f(mid + half * x) * w;
    }
    sum * half
}

/// Integrate over a mesh given as ordered breakpoints.
pub fn integrate_mesh<F: FnMut(f64) -> f64>(mut f: F, mesh: &[f64], rule: &GlRule) -> f64 {
    mesh.windows(2)
        .map(|w| gauss_interval(&mut f, w[0], w[1], rule))
        .sum()
}

pub fn integrate_mesh_c<F: FnMut(f64) -> Complex64>(
    mut f: F,
    mesh: &[f64],
    rule: &GlRule,
) -> Complex64 {
    mesh.windows(2)
        .map(|w| gauss_interval_c(&mut f, w[0], w[1], rule))
        .sum()
}

/// Mesh on [a, b] with panels no longer than `cap`, geometrically refined
/// toward both endpoints down to `levels` halvings. Graded panels absorb
/// algebraic endpoint singularities of section functions.
pub fn graded_mesh(a: f64, b: f64, cap: f64, levels: u32) -> Vec<f64> {
    assert!(b > a);
    let len = b - a;
    let cap = cap.min(len / 4.0);
    // geometric offsets from each endpoint up to cap
    let mut left = Vec::new();
    let mut off = cap.min(len / 2.0);
    left.push(off);
    for _ in 0..levels {
        off *= 0.5;
        left.push(off);
    }
    left.reverse(); // increasing offsets

    let mut mesh = Vec::with_capacity(2 * left.len() + (len / cap) as usize + 2);
    mesh.push(a);
    for &o in &left {
        mesh.push(a + o);
    }
    // uniform middle
    let lo = a + left.last().copied().unwrap();
    let hi = b - left.last().copied().unwrap();
    if hi > lo {
        let n = ((hi - lo) / cap).ceil().max(1.0) as usize;
        let h = (hi - lo) / n as f64;
        for i in 1..n {
            mesh.push(lo + i as f64 * h);
        }
        mesh.push(hi);
    }
    for &o in left.iter().rev().skip(1) {
        mesh.push(b - o);
    }
    mesh.push(b);
    mesh.dedup_by(|x, y| (*x - *y).abs() < 1e-300);
    mesh
}

/// Uniform mesh with at most `cap`-long panels.
pub fn uniform_mesh(a: f64, b: f64, cap: f64) -> Vec<f64> {
    let n = ((b - a) / cap).ceil().max(1.0) as usize;
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// Least-squares slope of log(y) against log(x). Points with y <= 0 are
/// skipped.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Log-log slope fitted to bin-averaged RMS values: the x-range is split
/// into logarithmic bins, each bin is collapsed to the RMS of its y values,
/// and the slope is fitted through the bin centers. This tames the
/// oscillatory log-singularities of |cos|-type residuals that would bias a
/// pointwise fit.
pub fn binned_loglog_slope(xs: &[f64], ys: &[f64], bins: usize) -> f64 {
    assert!(bins >= 2 && xs.len() == ys.len());
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min).ln();
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max).ln();
    let mut sum2 = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    let mut xsum = vec![0.0; bins];
    for (&x, &y) in xs.iter().zip(ys) {
        let mut b = ((x.ln() - lo) / (hi - lo) * bins as f64) as usize;
        if b >= bins {
            b = bins - 1;
        }
        sum2[b] += y * y;
        xsum[b] += x.ln();
        count[b] += 1;
    }
    let mut cx = Vec::new();
    let mut cy = Vec::new();
    for b in 0..bins {
        if count[b] > 0 {
            cx.push((xsum[b] / count[b] as f64).exp());
            cy.push((sum2[b] / count[b] as f64).sqrt());
        }
    }
    loglog_slope(&cx, &cy)
}

/// Cumulative integral table: prefix integrals of `f` over a fixed mesh,
/// with exact partial-panel evaluation at arbitrary interior points.
pub struct CumulativeTable {
    mesh: Vec<f64>,
    prefix: Vec<f64>,
    rule: Arc<GlRule>,
    f: Box<dyn Fn(f64) -> f64 + Sync + Send>,
}

impl CumulativeTable {
    pub fn new<F>(f: F, mesh: Vec<f64>, order: usize) -> Self
    where
        F: Fn(f64) -> f64 + Sync + Send + 'static,
    {
        let rule = gl_rule(order);
        let mut prefix = Vec::with_capacity(mesh.len());
        prefix.push(0.0);
        let mut acc = 0.0;
        for w in mesh.windows(2) {
            acc += gauss_interval(&f, w[0], w[1], &rule);
            prefix.push(acc);
        }
        Self {
            mesh,
            prefix,
            rule,
            f: Box::new(f),
        }
    }

    /// Integral of f from the mesh start to `u`.
    pub fn eval(&self, u: f64) -> f64 {
        let start = self.mesh[0];
        let end = *self.mesh.last().unwrap();
        assert!(u >= start && u <= end + 1e-9, "point outside table range");
        let idx = match self
            .mesh
            .binary_search_by(|x| x.partial_cmp(&u).unwrap())
        {
            Ok(i) => return self.prefix[i],
            Err(i) => i - 1,
        };
        self.prefix[idx] + gauss_interval(&self.f, self.mesh[idx], u.min(end), &self.rule)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let rule = gl_rule(8);
        // degree 15 is exact for 8 nodes
        let v = gauss_interval(|x| x.powi(15) + 3.0 * x.powi(4), -1.0, 2.0, &rule);
        let exact = (2.0f64.powi(16) - 1.0) / 16.0 + 3.0 * (2.0f64.powi(5) + 1.0) / 5.0;
        assert_abs_diff_eq!(v, exact, epsilon = 1e-11);
    }

    #[test]
    fn graded_mesh_resolves_sqrt_singularity() {
        let mesh = graded_mesh(0.0, 1.0, 0.05, 50);
        let rule = gl_rule(16);
        let v = integrate_mesh(|x| x.sqrt(), &mesh, &rule);
        assert_abs_diff_eq!(v, 2.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<f64> = (1..50).map(|i| 1.5f64.powi(i)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-2.5)).collect();
        assert_abs_diff_eq!(loglog_slope(&xs, &ys), -2.5, epsilon = 1e-12);
    }

    #[test]
    fn cumulative_table_matches_direct() {
        let table = CumulativeTable::new(|x| (3.0 * x).sin().powi(2), uniform_mesh(0.0, 10.0, 0.3), 10);
        let rule = gl_rule(16);
        for &u in &[0.7, 3.33, 9.99] {
            let direct = integrate_mesh(|x| (3.0 * x).sin().powi(2), &uniform_mesh(0.0, u, 0.05), &rule);
            assert_abs_diff_eq!(table.eval(u), direct, epsilon = 1e-10);
        }
    }
}
