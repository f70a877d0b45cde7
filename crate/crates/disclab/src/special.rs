//! Special functions: Bessel J0/J1 to near machine precision and volumes
//! of unit balls.
//!
//! The Bessel evaluation switches between the power series (small argument),
//! the integral representation with the periodic trapezoidal rule (mid
//! range), and the Hankel asymptotic expansion (large argument). All three
//! agree to ~1e-15 on the overlaps, which matters because closed-form ball
//! transforms are used as oracles at 1e-8 relative tolerance.

use statrs::function::gamma::gamma;

const SERIES_CUT: f64 = 8.0;
const ASYMP_CUT: f64 = 35.0;

/// Bessel function of the first kind, order 0.
pub fn bessel_j0(x: f64) -> f64 {
    let z = x.abs();
    if z < SERIES_CUT {
        j_series(0, z)
    } else if z < ASYMP_CUT {
        j_integral(0, z)
    } else {
        j_asymptotic(0, z)
    }
}

/// Bessel function of the first kind, order 1.
pub fn bessel_j1(x: f64) -> f64 {
    let z = x.abs();
    let v = if z < SERIES_CUT {
        j_series(1, z)
    } else if z < ASYMP_CUT {
        j_integral(1, z)
    } else {
        j_asymptotic(1, z)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Bessel function of the first kind, order 2, via the standard recurrence.
pub fn bessel_j2(x: f64) -> f64 {
    let z = x.abs();
    if z < 1e-8 {
        // J2(z) = z^2/8 - z^4/96 + ...
        return z * z / 8.0 * (1.0 - z * z / 12.0);
    }
    2.0 * bessel_j1(z) / z - bessel_j0(z)
}

fn j_series(n: u32, z: f64) -> f64 {
    let half = z / 2.0;
    let mut term = half.powi(n as i32) / factorial(n);
    let mut sum = term;
    for k in 1..60 {
        term *= -(half * half) / (k as f64 * (k as f64 + n as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product::<f64>().max(1.0)
}

// J_n(z) = (1/2pi) \int_0^{2pi} cos(n t - z sin t) dt, spectrally accurate
// for periodic integrands.
fn j_integral(n: u32, z: f64) -> f64 {
    let m = 2 * ((z as usize) + 70);
    let h = std::f64::consts::TAU / m as f64;
    let mut sum = 0.0;
    for i in 0..m {
        let t = i as f64 * h;
        sum += (n as f64 * t - z * t.sin()).cos();
    }
    sum / m as f64
}

// Hankel expansion: J_n(z) ~ sqrt(2/(pi z)) (P cos chi - Q sin chi),
// chi = z - (n/2 + 1/4) pi; terms summed to their smallest magnitude.
fn j_asymptotic(n: u32, z: f64) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut prev = f64::INFINITY;
    for k in 0u32.. {
        if k % 2 == 0 {
            p += if k % 4 == 0 { term } else { -term };
        } else {
            q += if k % 4 == 1 { term } else { -term };
        }
        let odd = (2 * k + 1) as f64;
        let next = term * (mu - odd * odd) / ((k as f64 + 1.0) * 8.0 * z);
        if next.abs() >= prev || next.abs() < 1e-19 {
            break;
        }
        prev = term.abs();
        term = next;
    }
    let chi = z - (n as f64 / 2.0 + 0.25) * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Spherical Bessel functions j_0..j_lmax at x >= 0, by the standard
/// stable recurrences: upward when x dominates the order, downward with
/// normalization otherwise. Used by the Filon panels, where
/// int_{-1}^{1} P_l(x) e^{-i w x} dx = 2 (-i)^l j_l(w).
pub fn sph_bessel_j(lmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; lmax + 1];
    if x < 1e-6 {
        // j_l(x) = x^l/(2l+1)!! (1 - x^2/(2(2l+3)) + ...)
        let mut xl = 1.0;
        let mut dfact = 1.0;
        for (l, o) in out.iter_mut().enumerate() {
            *o = xl / dfact * (1.0 - x * x / (2.0 * (2 * l + 3) as f64));
            xl *= x;
            dfact *= (2 * l + 3) as f64;
        }
        return out;
    }
    let j0 = x.sin() / x;
    out[0] = j0;
    if lmax == 0 {
        return out;
    }
    let j1 = x.sin() / (x * x) - x.cos() / x;
    out[1] = j1;
    if x > lmax as f64 + 10.0 {
        for l in 1..lmax {
            out[l + 1] = (2 * l + 1) as f64 / x * out[l] - out[l - 1];
        }
        return out;
    }
    // downward recurrence with rescaling, normalized against the larger of
    // j0, j1 (they cannot both vanish at the same x)
    let lstart = lmax + 25;
    let mut fp = 0.0_f64; // f_{l+1}
    let mut fc = 1e-280_f64; // f_l
    let mut raw = vec![0.0; lmax + 2];
    for l in (0..=lstart).rev() {
        let fm = (2 * l + 3) as f64 / x * fc - fp;
        fp = fc;
        fc = fm;
        if l <= lmax {
            raw[l] = fc;
        }
        if fc.abs() > 1e250 {
            fp *= 1e-250;
            fc *= 1e-250;
            for r in raw.iter_mut() {
                *r *= 1e-250;
            }
        }
    }
    let scale = if j0.abs() >= j1.abs() {
        j0 / raw[0]
    } else {
        j1 / raw[1]
    };
    for (o, r) in out.iter_mut().zip(&raw) {
        *o = r * scale;
    }
    out
}

/// Volume of the unit ball in dimension `d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let d = d as f64;
    std::f64::consts::PI.powf(d / 2.0) / gamma(d / 2.0 + 1.0)
}

/// Surface measure of the unit sphere S^{d-1}.
pub fn unit_sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

pub use statrs::function::gamma::gamma as gamma_fn;
