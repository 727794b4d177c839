//! Binary Ising signalling channel on an open chain.
//!
//! Sender `A` is site 0 and receiver `B` is site `N-1`. All spins start down
//! except `B`, which starts in `|+⟩`. A bit is encoded by flipping `A` (σ^x)
//! or not, and decoded by measuring `|+⟩⟨+|` on `B` after evolving under
//! `H = Σ_{i<j} J_ij σ^z_i σ^z_j`.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::numerics::{fit_power_law, PowerLawFit, RealSymmetricMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Couplings {
    /// `J_ij = |i-j|^{-α}`
    PowerLaw {
        alpha: f64,
    },
    Explicit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    couplings: RealSymmetricMatrix,
    kind: Couplings,
}

impl ChannelSpec {
    pub fn power_law(n: usize, alpha: f64) -> Result<Self> {
        check_length(n)?;
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::invalid(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        let couplings = RealSymmetricMatrix::from_upper(n, |i, j| {
            if i == j {
                0.0
            } else {
                (j.abs_diff(i) as f64).powf(-alpha)
            }
        })?;
        Ok(ChannelSpec {
            couplings,
            kind: Couplings::PowerLaw { alpha },
        })
    }

    pub fn from_matrix(couplings: RealSymmetricMatrix) -> Result<Self> {
        check_length(couplings.order())?;
        for i in 0..couplings.order() {
            if couplings.get(i, i) != 0.0 {
                return Err(Error::invalid(format!("nonzero self-coupling at site {i}")));
            }
        }
        Ok(ChannelSpec {
            couplings,
            kind: Couplings::Explicit,
        })
    }

    pub fn n(&self) -> usize {
        self.couplings.order()
    }

    pub fn couplings(&self) -> &RealSymmetricMatrix {
        &self.couplings
    }

    pub fn kind(&self) -> Couplings {
        self.kind
    }

    pub fn sender(&self) -> usize {
        0
    }

    pub fn receiver(&self) -> usize {
        self.n() - 1
    }

    /// `J_{AB}`
    pub fn direct_coupling(&self) -> f64 {
        self.couplings.get(self.sender(), self.receiver())
    }

    /// `Σ_{r∈S} J_{rB}` over the sites strictly between sender and receiver.
    pub fn spectator_coupling(&self) -> f64 {
        let b = self.receiver();
        (1..b).map(|r| self.couplings.get(r, b)).sum()
    }

    /// `(π/4) / Σ_{r∈S} J_{rB}`; for power-law couplings this is
    /// [`validity_horizon`].
    pub fn horizon(&self) -> Option<f64> {
        let s = self.spectator_coupling();
        (s > 0.0).then(|| FRAC_PI_4 / s)
    }
}

fn check_length(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::invalid(format!(
            "channel needs at least 3 sites, got {n}"
        )));
    }
    Ok(())
}

/// `p_t = |sin(2t Σ_{r∈S} J_{rB}) sin(2t J_{AB})|`.
pub fn signal_probability(spec: &ChannelSpec, t: f64) -> f64 {
    ((2.0 * t * spec.spectator_coupling()).sin() * (2.0 * t * spec.direct_coupling()).sin()).abs()
}

/// Probabilities of the `|+⟩` outcome on `B` without and with the flip on `A`:
/// `½(1 + cos 2t(ΣS ± J_AB))`.
pub fn branch_probabilities(spec: &ChannelSpec, t: f64) -> (f64, f64) {
    let s = spec.spectator_coupling();
    let j = spec.direct_coupling();
    (
        0.5 * (1.0 + (2.0 * t * (s + j)).cos()),
        0.5 * (1.0 + (2.0 * t * (s - j)).cos()),
    )
}

/// `(π/4) / Σ_{r=1}^{N-2} r^{-α}`.
pub fn validity_horizon(alpha: f64, n: usize) -> Result<f64> {
    check_length(n)?;
    if !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must be finite, got {alpha}")));
    }
    let s: f64 = (1..=n - 2).rev().map(|r| (r as f64).powf(-alpha)).sum();
    Ok(FRAC_PI_4 / s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LowerBound {
    Value(f64),
    /// `|t|` exceeds the horizon within which the bound was derived.
    OutsideHorizon {
        horizon: f64,
    },
}

impl LowerBound {
    pub fn value(self) -> Option<f64> {
        match self {
            LowerBound::Value(v) => Some(v),
            LowerBound::OutsideHorizon { .. } => None,
        }
    }
}

fn check_bound_alpha(alpha: f64) -> Result<()> {
    if alpha == 1.0 {
        return Err(Error::SingularParameter(
            "the lower bound divides by alpha - 1".into(),
        ));
    }
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::UnsupportedRegime(format!(
            "the lower bound needs alpha > 1, got {alpha}"
        )));
    }
    Ok(())
}

fn lower_bound_shape(alpha: f64, n: usize) -> f64 {
    let m = (n - 1) as f64;
    16.0 / (PI * PI * (alpha - 1.0)) * m.powf(-alpha) * (1.0 - m.powf(1.0 - alpha))
}

/// `p̲_t = 16t²/(π²(α-1)) (N-1)^{-α} (1 - (N-1)^{1-α})` for power-law
/// couplings.
pub fn lower_bound_probability(alpha: f64, n: usize, t: f64) -> Result<LowerBound> {
    check_bound_alpha(alpha)?;
    let horizon = validity_horizon(alpha, n)?;
    if !t.is_finite() {
        return Err(Error::invalid(format!("time must be finite, got {t}")));
    }
    if t.abs() > horizon {
        return Ok(LowerBound::OutsideHorizon { horizon });
    }
    Ok(LowerBound::Value(lower_bound_shape(alpha, n) * t * t))
}

/// Largest chain the state-vector oracle accepts.
pub const ED_MAX_SITES: usize = 14;

/// Probabilities of the `|+⟩` outcome on `B` without and with the flip on
/// `A`, from explicit evolution of the `2^N` state vector.
pub fn ed_oracle_branches(spec: &ChannelSpec, t: f64) -> Result<(f64, f64)> {
    let n = spec.n();
    if n > ED_MAX_SITES {
        return Err(Error::ResourceGuard(format!(
            "state-vector oracle limited to {ED_MAX_SITES} sites, got {n}"
        )));
    }
    let dim = 1usize << n;
    let (a, b) = (spec.sender(), spec.receiver());
    // bit i set means spin i up
    let energy = |s: usize| -> f64 {
        let mut e = 0.0;
        for i in 0..n {
            let zi = if s >> i & 1 == 1 { 1.0 } else { -1.0 };
            for j in i + 1..n {
                let zj = if s >> j & 1 == 1 { 1.0 } else { -1.0 };
                e += spec.couplings.get(i, j) * zi * zj;
            }
        }
        e
    };
    let mut initial = vec![Complex64::new(0.0, 0.0); dim];
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    initial[0] = Complex64::new(amp, 0.0);
    initial[1 << b] = Complex64::new(amp, 0.0);
    let flipped: Vec<Complex64> = (0..dim).map(|s| initial[s ^ (1 << a)]).collect();

    let plus_probability = |psi: &[Complex64]| -> f64 {
        let evolved: Vec<Complex64> = psi
            .iter()
            .enumerate()
            .map(|(s, &c)| c * Complex64::from_polar(1.0, -energy(s) * t))
            .collect();
        (0..dim)
            .filter(|s| s >> b & 1 == 0)
            .map(|s| ((evolved[s] + evolved[s | 1 << b]) * amp).norm_sqr())
            .sum()
    };
    Ok((plus_probability(&initial), plus_probability(&flipped)))
}

/// `|P(+ | no flip) - P(+ | flip)|` from the state-vector oracle.
pub fn ed_oracle_probability(spec: &ChannelSpec, t: f64) -> Result<f64> {
    let (p0, p1) = ed_oracle_branches(spec, t)?;
    Ok((p0 - p1).abs())
}

/// Exact and lower-bound detection probabilities along a time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalCurve {
    pub times: Vec<f64>,
    pub p_exact: Vec<f64>,
    pub p_lower: Vec<Option<f64>>,
    pub horizon: Option<f64>,
}

/// The lower bound is only filled in for power-law couplings with `α > 1`.
pub fn signal_curve(spec: &ChannelSpec, times: &[f64]) -> Result<SignalCurve> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("times must be finite"));
    }
    let p_exact = times.iter().map(|&t| signal_probability(spec, t)).collect();
    let p_lower = match spec.kind {
        Couplings::PowerLaw { alpha } if alpha > 1.0 => times
            .iter()
            .map(|&t| Ok(lower_bound_probability(alpha, spec.n(), t)?.value()))
            .collect::<Result<_>>()?,
        _ => vec![None; times.len()],
    };
    Ok(SignalCurve {
        times: times.to_vec(),
        p_exact,
        p_lower,
        horizon: spec.horizon(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourExponent {
    /// `(t, δ = N - 1)` on the contour `p̲_t = ε`.
    pub points: Vec<(f64, f64)>,
    /// Chain lengths whose contour time lies beyond the horizon.
    pub pruned: Vec<usize>,
    pub fit: PowerLawFit,
}

/// Time at which `p̲_t` reaches `epsilon` on a chain of `n` sites.
pub fn contour_time(alpha: f64, epsilon: f64, n: usize) -> Result<f64> {
    check_bound_alpha(alpha)?;
    check_length(n)?;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid(format!(
            "contour level must be positive, got {epsilon}"
        )));
    }
    Ok((epsilon / lower_bound_shape(alpha, n)).sqrt())
}

/// Exponent `γ` of `δ ∝ t^γ` along the contour `p̲_t = ε`.
pub fn contour_exponent(alpha: f64, epsilon: f64, n_range: &[usize]) -> Result<ContourExponent> {
    let mut points = Vec::new();
    let mut pruned = Vec::new();
    for &n in n_range {
        let t = contour_time(alpha, epsilon, n)?;
        if t > validity_horizon(alpha, n)? {
            pruned.push(n);
        } else {
            points.push((t, (n - 1) as f64));
        }
    }
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "only {} chain length(s) have their contour inside the horizon",
            points.len()
        )));
    }
    Ok(ContourExponent {
        fit: fit_power_law(&points)?,
        points,
        pruned,
    })
}
