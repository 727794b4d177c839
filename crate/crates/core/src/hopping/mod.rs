//! Free fermions on a periodic chain with hopping amplitude `d_l^{-α}`,
//! quenched from the staggered state `|0101…⟩`.
//!
//! Conventions: modes `k_m = 2πm/N`, `m = 0..N`; odd sites are occupied at
//! `t = 0`; entropies in nats.

mod dynamics;
mod velocity;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::numerics::{cos_table, polylog_circle};
use crate::{Error, Result};

pub use dynamics::{
    correlation_grid, correlation_matrix, mutual_information, mutual_information_grid, occupation,
    occupation_grid, staggered_correlation, CorrelationMatrix,
};
pub use velocity::{
    cone_velocity, density_of_states, group_velocity_scaling, ConeVelocity, GroupVelocityScaling,
    MIN_DOS_SAMPLES,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoppingModel {
    n: usize,
    alpha: f64,
}

impl HoppingModel {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "hopping chain length must be even and at least 4, got {n}"
            )));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::invalid(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        Ok(HoppingModel { n, alpha })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mode(&self, m: usize) -> f64 {
        std::f64::consts::TAU * m as f64 / self.n as f64
    }
}

/// `d_l^{-α}` for `l = 0..n`, with the `l = 0` entry set to zero.
fn hopping_row(n: usize, alpha: f64) -> Vec<f64> {
    (0..n)
        .map(|l| {
            let d = l.min(n - l);
            if d == 0 {
                0.0
            } else {
                (d as f64).powf(-alpha)
            }
        })
        .collect()
}

/// Above this size the dispersion is evaluated with an FFT.
pub const DIRECT_SUM_LIMIT: usize = 8192;

/// `ε(k_m) = -Σ_{l=1}^{n-1} cos(k_m l) / d_l^α` for every mode, with
/// `ε_m == ε_{n-m}` bit for bit. Any `n >= 2`.
pub(crate) fn finite_dispersion(n: usize, alpha: f64) -> Vec<f64> {
    let row = hopping_row(n, alpha);
    let mut eps = vec![0.0; n];
    if n <= DIRECT_SUM_LIMIT {
        let cos = cos_table(n);
        let half = (n - 1) / 2;
        for m in 0..=n / 2 {
            let mut s = 0.0;
            for (l, &w) in row.iter().enumerate().take(half + 1).skip(1) {
                s += w * cos[(m * l) % n];
            }
            let mut e = 2.0 * s;
            if n.is_multiple_of(2) {
                e += row[n / 2] * if m % 2 == 0 { 1.0 } else { -1.0 };
            }
            eps[m] = -e;
        }
    } else {
        let mut buf: Vec<Complex64> = row.iter().map(|&w| Complex64::new(w, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        for m in 0..=n / 2 {
            eps[m] = -buf[m].re;
        }
    }
    for m in 1..n.div_ceil(2) {
        eps[n - m] = eps[m];
    }
    eps
}

/// Mode energies and the frequency differences `Δ(k) = ε(k+π) - ε(k)` of a
/// [`HoppingModel`], plus the trigonometric tables the dynamics reuse.
#[derive(Debug, Clone)]
pub struct DispersionTable {
    model: HoppingModel,
    eps: Vec<f64>,
    delta_freq: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl DispersionTable {
    pub fn new(model: HoppingModel) -> Self {
        let n = model.n;
        let eps = finite_dispersion(n, model.alpha);
        let delta_freq = (0..n).map(|m| eps[(m + n / 2) % n] - eps[m]).collect();
        let cos = cos_table(n);
        let mut sin = vec![0.0; n];
        for r in 1..n.div_ceil(2) {
            let s = (std::f64::consts::TAU * r as f64 / n as f64).sin();
            sin[r] = s;
            sin[n - r] = -s;
        }
        DispersionTable {
            model,
            eps,
            delta_freq,
            cos,
            sin,
        }
    }

    pub fn model(&self) -> &HoppingModel {
        &self.model
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn delta_freq(&self) -> &[f64] {
        &self.delta_freq
    }

    /// `Δ(k_m) = 2 Σ_{odd l} cos(k_m l) / d_l^α`, the second printed form.
    pub fn delta_odd_sum(&self, m: usize) -> f64 {
        let n = self.model.n;
        let row = hopping_row(n, self.model.alpha);
        let mut s = 0.0;
        for l in (1..n).step_by(2) {
            s += row[l] * self.cos[(m * l) % n];
        }
        2.0 * s
    }
}

/// Single mode of the finite-chain dispersion, summed directly.
pub fn dispersion_finite(model: &HoppingModel, m: usize) -> Result<f64> {
    let n = model.n;
    if m >= n {
        return Err(Error::invalid(format!("mode {m} outside 0..{n}")));
    }
    let row = hopping_row(n, model.alpha);
    let cos = cos_table(n);
    Ok(-(1..n).map(|l| row[l] * cos[(m * l) % n]).sum::<f64>())
}

/// `ε(k) = -[Li_α(e^{ik}) + Li_α(e^{-ik})]` on the infinite chain.
pub fn dispersion_infinite(alpha: f64, k: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::UnsupportedRegime(format!(
            "infinite-chain dispersion needs alpha > 1, got {alpha}; use the finite chain"
        )));
    }
    let a = polylog_circle(alpha, k)?;
    let b = polylog_circle(alpha, -k)?;
    let sum = a + b;
    if sum.im.abs() > 1e-12 {
        return Err(Error::Internal(format!(
            "dispersion has imaginary residue {}",
            sum.im
        )));
    }
    Ok(-sum.re)
}

/// Tolerance for the agreement of the two forms of `Δ(k)`.
pub const DELTA_FORM_TOLERANCE: f64 = 1e-12;

/// `Δ(k_m)` for every mode, cross-checked against the odd-distance sum.
pub fn delta_frequencies(model: &HoppingModel) -> Result<Vec<f64>> {
    let table = DispersionTable::new(*model);
    for m in 0..model.n {
        let odd = table.delta_odd_sum(m);
        let diff = (odd - table.delta_freq[m]).abs();
        if diff > DELTA_FORM_TOLERANCE {
            return Err(Error::Internal(format!(
                "forms of Delta(k) disagree by {diff:e} at mode {m}"
            )));
        }
    }
    Ok(table.delta_freq)
}
