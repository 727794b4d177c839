use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use super::{dispersion_infinite, finite_dispersion};
use crate::numerics::{density_from_samples, fit_line, fit_power_law, Density, PowerLawFit};
use crate::{Error, Result, SpacetimeGrid};

pub const MIN_DOS_SAMPLES: usize = 10_000;

/// Density of group velocities `v = ε'(k)` over `n_k` uniformly spaced
/// modes.
///
/// For `α > 1` the infinite-chain dispersion is used, otherwise the finite
/// chain with `n_k` sites. Derivatives are central differences with the
/// k-grid spacing. For `α <= 2` the mode at `k = 0` and its two neighbours
/// straddle the non-analytic point; they are dropped and counted in
/// `out_of_range_mass`. The density is normalised by `n_k`.
pub fn density_of_states(alpha: f64, n_k: usize, edges: &[f64]) -> Result<Density> {
    if n_k < MIN_DOS_SAMPLES {
        return Err(Error::invalid(format!(
            "density of states needs at least {MIN_DOS_SAMPLES} modes, got {n_k}"
        )));
    }
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::invalid(format!(
            "alpha must be finite and >= 0, got {alpha}"
        )));
    }
    let eps: Vec<f64> = if alpha > 1.0 {
        (0..n_k)
            .into_par_iter()
            .map(|m| dispersion_infinite(alpha, TAU * m as f64 / n_k as f64))
            .collect::<Result<_>>()?
    } else {
        finite_dispersion(n_k, alpha)
    };
    let h = TAU / n_k as f64;
    let excluded = |m: usize| alpha <= 2.0 && (m <= 1 || m == n_k - 1);
    let samples: Vec<f64> = (0..n_k)
        .filter(|&m| !excluded(m))
        .map(|m| (eps[(m + 1) % n_k] - eps[(m + n_k - 1) % n_k]) / (2.0 * h))
        .collect();
    let raw = density_from_samples(&samples, edges)?;
    let kept = samples.len() as f64 / n_k as f64;
    Ok(Density {
        density: raw.density.iter().map(|d| d * kept).collect(),
        out_of_range_mass: raw.out_of_range_mass * kept + (1.0 - kept),
        edges: raw.edges,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupVelocityScaling {
    /// `(N, |ε(2π/N) - ε(0)| N / 2π)` per chain length.
    pub quotients: Vec<(usize, f64)>,
    pub fit: PowerLawFit,
}

/// Difference quotient between the two lowest modes, fitted against `N`.
pub fn group_velocity_scaling(alpha: f64, n_list: &[usize]) -> Result<GroupVelocityScaling> {
    if n_list.len() < 4 {
        return Err(Error::invalid(
            "group-velocity scaling needs at least four sizes",
        ));
    }
    if n_list.iter().any(|&n| n < 4 || n % 2 != 0) || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "sizes must be even, >= 4 and strictly ascending",
        ));
    }
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::invalid(format!(
            "alpha must be finite and >= 0, got {alpha}"
        )));
    }
    let quotients: Vec<(usize, f64)> = n_list
        .iter()
        .map(|&n| {
            // ε(2π/N) - ε(0) = 2 Σ_l sin²(πl/N) d_l^{-α}, free of cancellation
            let diff: f64 = (1..n)
                .map(|l| {
                    let d = l.min(n - l) as f64;
                    let s = (PI * l as f64 / n as f64).sin();
                    2.0 * s * s * d.powf(-alpha)
                })
                .sum();
            (n, diff * n as f64 / TAU)
        })
        .collect();
    let pts: Vec<(f64, f64)> = quotients.iter().map(|&(n, q)| (n as f64, q)).collect();
    Ok(GroupVelocityScaling {
        fit: fit_power_law(&pts)?,
        quotients,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeVelocity {
    pub velocity: f64,
    pub intercept: f64,
    /// `(t, front δ)` pairs entering the final fit.
    pub points: Vec<(f64, f64)>,
}

/// Slope of the outermost distance at which the grid reaches `threshold`.
///
/// The fit first uses all times before the front comes within two sites of
/// the last grid row, then is repeated on `t < δ_max / v` with the first
/// estimate `v`.
pub fn cone_velocity(grid: &SpacetimeGrid, threshold: f64) -> Result<ConeVelocity> {
    let max = grid.max_value();
    if !(threshold > 0.0 && threshold < max) {
        return Err(if max == 0.0 {
            Error::NoFront("grid is identically zero".into())
        } else {
            Error::invalid(format!("threshold {threshold} outside (0, {max})"))
        });
    }
    let fronts = grid.front(threshold);
    let times = grid.t_values();
    let delta_max = *grid.delta_values().last().unwrap_or(&0) as f64;
    let stop = fronts
        .iter()
        .position(|f| f.is_some_and(|d| d as f64 >= delta_max - 2.0))
        .unwrap_or(fronts.len());
    let collect = |limit: f64, end: usize| -> Vec<(f64, f64)> {
        (0..end)
            .filter(|&c| times[c] < limit)
            .filter_map(|c| fronts[c].map(|d| (times[c], d as f64)))
            .collect()
    };
    let fit = |pts: &[(f64, f64)]| -> Result<(f64, f64)> {
        if pts.len() < 2 {
            return Err(Error::NoFront(format!(
                "only {} time(s) with a front above {threshold}",
                pts.len()
            )));
        }
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let l = fit_line(&xs, &ys).map_err(|e| Error::NoFront(e.to_string()))?;
        Ok((l.slope, l.intercept))
    };
    let first = collect(f64::INFINITY, stop);
    let (v0, _) = fit(&first)?;
    if !(v0 > 0.0) {
        return Err(Error::NoFront(format!(
            "front does not advance (slope {v0})"
        )));
    }
    let points = collect(delta_max / v0, fronts.len());
    let (velocity, intercept) = fit(&points)?;
    Ok(ConeVelocity {
        velocity,
        intercept,
        points,
    })
}
