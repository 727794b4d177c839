//! Lattice geometry and power-law interaction matrices.

use rayon::prelude::*;

use crate::numerics::RealSymmetricMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    Open,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        }
    }
}

/// Hypercubic lattice with `extents[a]` sites along axis `a`.
///
/// Sites are numbered with axis 0 running fastest.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeSpec {
    extents: Vec<usize>,
    boundary: Boundary,
}

impl LatticeSpec {
    pub fn new(extents: Vec<usize>, boundary: Boundary) -> Result<Self> {
        if extents.is_empty() {
            return Err(Error::invalid("lattice needs at least one axis"));
        }
        if extents.contains(&0) {
            return Err(Error::invalid("lattice extents must be positive"));
        }
        let n = extents
            .iter()
            .try_fold(1usize, |acc, &e| acc.checked_mul(e))
            .ok_or_else(|| Error::invalid("site count overflows"))?;
        if n < 2 {
            return Err(Error::invalid("lattice needs at least two sites"));
        }
        Ok(LatticeSpec { extents, boundary })
    }

    pub fn chain(n: usize, boundary: Boundary) -> Result<Self> {
        Self::new(vec![n], boundary)
    }

    pub fn dimension(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn n_sites(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn coords(&self, site: usize) -> Result<Vec<usize>> {
        self.check_site(site)?;
        let mut rest = site;
        Ok(self
            .extents
            .iter()
            .map(|&e| {
                let c = rest % e;
                rest /= e;
                c
            })
            .collect())
    }

    pub fn index(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.dimension() {
            return Err(Error::invalid(format!(
                "expected {} coordinates, got {}",
                self.dimension(),
                coords.len()
            )));
        }
        let mut idx = 0;
        for (&c, &e) in coords.iter().zip(&self.extents).rev() {
            if c >= e {
                return Err(Error::invalid(format!("coordinate {c} outside extent {e}")));
            }
            idx = idx * e + c;
        }
        Ok(idx)
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_sites() {
            return Err(Error::invalid(format!(
                "site {site} outside lattice of {} sites",
                self.n_sites()
            )));
        }
        Ok(())
    }

    /// Largest distance any pair of sites can have.
    pub fn diameter(&self) -> usize {
        self.extents
            .iter()
            .map(|&e| match self.boundary {
                Boundary::Periodic => e / 2,
                Boundary::Open => e - 1,
            })
            .sum()
    }

    fn distance_unchecked(&self, i: usize, j: usize) -> usize {
        let (mut a, mut b) = (i, j);
        let mut d = 0;
        for &e in &self.extents {
            let (ca, cb) = (a % e, b % e);
            a /= e;
            b /= e;
            let diff = ca.abs_diff(cb);
            d += match self.boundary {
                Boundary::Periodic => diff.min(e - diff),
                Boundary::Open => diff,
            };
        }
        d
    }

    /// Number of sites at each distance `0..=diameter` from `site`.
    fn distance_histogram(&self, site: usize) -> Vec<usize> {
        let mut counts = vec![0usize; self.diameter() + 1];
        for k in 0..self.n_sites() {
            counts[self.distance_unchecked(site, k)] += 1;
        }
        counts
    }
}

/// Shortest distance between two sites of a periodic chain that are `l`
/// sites apart.
pub fn chain_distance(l: usize, n: usize) -> Result<usize> {
    if l == 0 || l >= n {
        return Err(Error::invalid(format!(
            "offset {l} outside 1..{}",
            n.max(1) - 1
        )));
    }
    Ok(if l <= n / 2 { l } else { n - l })
}

/// Manhattan distance, wrapped per axis on periodic lattices.
pub fn graph_distance(spec: &LatticeSpec, i: usize, j: usize) -> Result<usize> {
    spec.check_site(i)?;
    spec.check_site(j)?;
    Ok(spec.distance_unchecked(i, j))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::invalid(format!(
            "alpha must be finite and >= 0, got {alpha}"
        )));
    }
    Ok(())
}

fn regularized_weights(max_distance: usize, alpha: f64) -> Vec<f64> {
    (0..=max_distance)
        .map(|d| (1.0 + d as f64).powf(-alpha))
        .collect()
}

fn coupling_sum(counts: &[usize], weights: &[f64]) -> f64 {
    // skip distance 0: the site itself
    counts
        .iter()
        .zip(weights)
        .skip(1)
        .rev()
        .map(|(&c, &w)| c as f64 * w)
        .sum()
}

/// `1 / sup_i Σ_{j≠i} (1 + dist(i,j))^{-α}`.
pub fn normalization_factor(spec: &LatticeSpec, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let weights = regularized_weights(spec.diameter(), alpha);
    let sup = match spec.boundary() {
        // translation invariant: every site sees the same environment
        Boundary::Periodic => coupling_sum(&spec.distance_histogram(0), &weights),
        Boundary::Open => (0..spec.n_sites())
            .into_par_iter()
            .map(|i| coupling_sum(&spec.distance_histogram(i), &weights))
            .reduce(|| 0.0, f64::max),
    };
    Ok(1.0 / sup)
}

/// Upper limit on `pairs × sites` work for [`reproducibility_constant`].
pub const REPRODUCIBILITY_WORK_LIMIT: u128 = 4_000_000_000;

/// Smallest `p` for which the reproducibility inequality holds on this
/// finite lattice:
/// `max_{i≠j} 𝒩 Σ_k w(i,k) w(k,j) / w(i,j)` with `w = (1 + dist)^{-α}`.
pub fn reproducibility_constant(spec: &LatticeSpec, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let n = spec.n_sites();
    let first_sites: Vec<usize> = match spec.boundary() {
        Boundary::Periodic => vec![0],
        Boundary::Open => (0..n).collect(),
    };
    let work = first_sites.len() as u128 * (n as u128) * (n as u128);
    if work > REPRODUCIBILITY_WORK_LIMIT {
        return Err(Error::ResourceGuard(format!(
            "reproducibility constant needs {work} kernel evaluations (limit {REPRODUCIBILITY_WORK_LIMIT})"
        )));
    }
    let n_factor = normalization_factor(spec, alpha)?;
    let weights = regularized_weights(spec.diameter(), alpha);
    let best = first_sites
        .par_iter()
        .flat_map_iter(|&i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| {
            let conv: f64 = (0..n)
                .map(|k| {
                    weights[spec.distance_unchecked(i, k)] * weights[spec.distance_unchecked(k, j)]
                })
                .sum();
            conv / weights[spec.distance_unchecked(i, j)]
        })
        .reduce(|| 0.0, f64::max);
    Ok(n_factor * best)
}

/// Decay constants entering the boundedness and reproducibility conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayParams {
    pub alpha: f64,
    pub lambda: f64,
    pub p: f64,
}

impl DecayParams {
    pub fn new(alpha: f64, lambda: f64, p: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::invalid(format!("p must be positive, got {p}")));
        }
        Ok(DecayParams { alpha, lambda, p })
    }
}

/// How the entries of an [`InteractionMatrix`] depend on distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `strength · (1 + d)^{-α}`
    Regularized,
    /// `½ d^{-α}`, the hopping-model amplitude
    HalfBare,
    /// supplied by the caller
    Explicit,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::Regularized => "(1+d)^-alpha",
            Convention::HalfBare => "0.5*d^-alpha",
            Convention::Explicit => "explicit",
        }
    }
}

/// Nonnegative symmetric coupling matrix with zero diagonal and its maximal
/// row sum `kappa`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    lattice: LatticeSpec,
    entries: RealSymmetricMatrix,
    kappa: f64,
    convention: Convention,
}

impl InteractionMatrix {
    pub fn from_entries(lattice: LatticeSpec, entries: RealSymmetricMatrix) -> Result<Self> {
        Self::build(lattice, entries, Convention::Explicit)
    }

    fn build(
        lattice: LatticeSpec,
        entries: RealSymmetricMatrix,
        convention: Convention,
    ) -> Result<Self> {
        let n = lattice.n_sites();
        if entries.order() != n {
            return Err(Error::invalid(format!(
                "matrix order {} does not match {n} lattice sites",
                entries.order()
            )));
        }
        for i in 0..n {
            if entries.get(i, i) != 0.0 {
                return Err(Error::invalid(format!("nonzero diagonal entry at {i}")));
            }
        }
        if entries.entries().iter().any(|&x| x < 0.0) {
            return Err(Error::invalid("interaction entries must be nonnegative"));
        }
        let kappa = row_sums(&entries).into_iter().fold(0.0, f64::max);
        Ok(InteractionMatrix {
            lattice,
            entries,
            kappa,
            convention,
        })
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn entries(&self) -> &RealSymmetricMatrix {
        &self.entries
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn n_sites(&self) -> usize {
        self.entries.order()
    }

    /// First row, if the matrix is circulant (exactly).
    pub fn circulant_row(&self) -> Option<Vec<f64>> {
        let n = self.n_sites();
        let row = self.entries.row(0).to_vec();
        let circulant =
            (1..n).all(|i| (0..n).all(|j| self.entries.get(i, j) == row[(j + n - i) % n]));
        circulant.then_some(row)
    }
}

fn row_sums(m: &RealSymmetricMatrix) -> Vec<f64> {
    (0..m.order()).map(|i| m.row(i).iter().sum()).collect()
}

/// `J[i][j] = strength · (1 + dist(i,j))^{-α}` off the diagonal.
pub fn power_law_interactions(
    spec: &LatticeSpec,
    alpha: f64,
    strength: f64,
) -> Result<InteractionMatrix> {
    check_alpha(alpha)?;
    if !(strength.is_finite() && strength > 0.0) {
        return Err(Error::invalid(format!(
            "strength must be positive, got {strength}"
        )));
    }
    let weights = regularized_weights(spec.diameter(), alpha);
    let entries = RealSymmetricMatrix::from_upper(spec.n_sites(), |i, j| {
        if i == j {
            0.0
        } else {
            strength * weights[spec.distance_unchecked(i, j)]
        }
    })?;
    InteractionMatrix::build(spec.clone(), entries, Convention::Regularized)
}

/// Periodic chain with `J[j][j+l] = ½ d_l^{-α}`, the hopping amplitudes.
pub fn hopping_interactions(n: usize, alpha: f64) -> Result<InteractionMatrix> {
    check_alpha(alpha)?;
    let spec = LatticeSpec::chain(n, Boundary::Periodic)?;
    let weights: Vec<f64> = (0..=n / 2)
        .map(|d| {
            if d == 0 {
                0.0
            } else {
                0.5 * (d as f64).powf(-alpha)
            }
        })
        .collect();
    let entries =
        RealSymmetricMatrix::from_upper(n, |i, j| weights[spec.distance_unchecked(i, j)])?;
    InteractionMatrix::build(spec, entries, Convention::HalfBare)
}
