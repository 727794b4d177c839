//! Polylogarithm `Li_s(e^{ik})` on the unit circle.
//!
//! Evaluated from the Bose-Einstein integral
//!
//! ```text
//! Li_s(z) = 1/Γ(s) ∫_0^∞ t^{s-1} z e^{-t} / (1 - z e^{-t}) dt,   z = e^{ik},
//! ```
//!
//! with the exp-sinh substitution `t = exp(π/2 · sinh u)` and the trapezoidal
//! rule in `u`. The integrand has poles at `t = i(k + 2πn)`; the step is
//! chosen from the distance of the nearest pole to the real `u` axis so the
//! discretisation error stays below double precision.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

/// Minimum distance of `k` from `0 mod 2π` accepted for `0 < s <= 1`.
pub const DEFAULT_SINGULARITY_MARGIN: f64 = 1e-6;

const MAX_STEP: f64 = 1.0 / 32.0;
const MIN_STEP: f64 = 1.0 / 1024.0;
const U_LIMIT: f64 = 30.0;
/// From here on the series itself converges after a few hundred terms.
const DIRECT_SERIES_ALPHA: f64 = 6.0;

/// `Li_alpha(e^{ik})` for `alpha > 1`, any real `k`.
///
/// For `alpha <= 1` the value exists only away from `k ≡ 0`; see
/// [`polylog_circle_with_margin`].
pub fn polylog_circle(alpha: f64, k: f64) -> Result<Complex64> {
    polylog_circle_with_margin(alpha, k, DEFAULT_SINGULARITY_MARGIN)
}

/// Like [`polylog_circle`], but for `0 < alpha <= 1` requires `k` to stay at
/// least `margin` away from `0 mod 2π`.
pub fn polylog_circle_with_margin(alpha: f64, k: f64, margin: f64) -> Result<Complex64> {
    if !alpha.is_finite() || !k.is_finite() {
        return Err(Error::invalid(format!(
            "polylog arguments must be finite (alpha={alpha}, k={k})"
        )));
    }
    if alpha <= 0.0 {
        return Err(Error::UnsupportedRegime(format!(
            "polylog on the unit circle needs alpha > 0, got {alpha}"
        )));
    }
    // reduce |k| so that k and -k map to the same angle bit for bit
    let reduced = k.abs().rem_euclid(TAU);
    let upper_half = (reduced <= PI) == (k >= 0.0);
    let angle = if reduced <= PI {
        reduced
    } else {
        TAU - reduced
    };
    if alpha <= 1.0 && angle < margin.max(0.0) {
        return Err(Error::Divergent(format!(
            "Li_{alpha}(e^(ik)) diverges at k = 0 for alpha <= 1 (k = {k})"
        )));
    }
    if alpha <= 1.0 && angle == 0.0 {
        return Err(Error::Divergent(format!("Li_{alpha}(1) diverges")));
    }
    let value = if alpha >= DIRECT_SERIES_ALPHA {
        direct_series(alpha, angle)
    } else {
        bose_einstein_integral(alpha, angle)
    };
    Ok(if upper_half { value } else { value.conj() })
}

fn direct_series(alpha: f64, angle: f64) -> Complex64 {
    // tail after n terms is below n^{1-α}/(α-1)
    let terms = (1e-17 * (alpha - 1.0)).powf(1.0 / (1.0 - alpha)).ceil() as usize + 1;
    (1..=terms)
        .rev()
        .map(|n| Complex64::from_polar((n as f64).powf(-alpha), angle * n as f64))
        .sum()
}

/// Width of the strip around the real `u` axis where the integrand stays
/// analytic and moderate, turned into a trapezoidal step.
fn step_for(s: f64, angle: f64) -> f64 {
    // pole at ln t = ln k ± iπ/2 and the peak of t^s e^{-t} at ln t = ln s,
    // each mapped back through u = asinh(2 ln t / π)
    let strip = |log_t: f64| {
        let x = (2.0 / PI) * log_t;
        1.0 / (1.0 + x * x).sqrt()
    };
    let mut dist = strip(s.max(1.0).ln());
    if angle > 0.0 {
        dist = dist.min(strip(angle.ln()));
    }
    // off-axis growth of t^s is up to e^s relative to the peak
    (TAU * dist / (38.0 + s)).clamp(MIN_STEP, MAX_STEP)
}

/// `expm1` for complex arguments without cancellation near zero.
fn expm1_complex(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    let em1 = z.re.exp_m1();
    Complex64::new(em1 * c - 2.0 * half * half, z.re.exp() * s)
}

fn bose_einstein_integral(s: f64, angle: f64) -> Complex64 {
    let h = step_for(s, angle);
    let log_gamma = ln_gamma(s);
    let phase = Complex64::from_polar(1.0, angle);

    let term = |u: f64| -> Complex64 {
        let log_t = FRAC_PI_2 * u.sinh();
        let t = log_t.exp();
        let log_mag = s * log_t - log_gamma - t;
        if log_mag < -745.0 {
            return Complex64::new(0.0, 0.0);
        }
        let jac = FRAC_PI_2 * u.cosh();
        // 1 - z e^{-t} = -expm1(-t + ik)
        let denom = -expm1_complex(Complex64::new(-t, angle));
        phase * (log_mag.exp() * jac) / denom
    };

    let mut sum = term(0.0);
    for direction in [1.0, -1.0] {
        let mut small_run = 0;
        let mut j = 1usize;
        loop {
            let u = direction * j as f64 * h;
            if u.abs() > U_LIMIT {
                break;
            }
            let v = term(u);
            sum += v;
            if v.norm() <= 1e-18 * sum.norm() {
                small_run += 1;
                // the integrand is unimodal in u far from the peak; a few
                // consecutive negligible terms end the tail
                if small_run >= 4 {
                    break;
                }
            } else {
                small_run = 0;
            }
            j += 1;
        }
    }
    sum * h
}
