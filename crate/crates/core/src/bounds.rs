//! Lieb-Robinson-type commutator bounds on a (distance, time) mesh.
//!
//! Operator norms of the two observables are fixed to 1 throughout.

use std::collections::BTreeMap;
use std::f64::consts::E;

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::lattice::{DecayParams, InteractionMatrix, LatticeSpec};
use crate::numerics::{
    circulant_eigenvalues, expm_symmetric, minimize_scalar, polylog_circle, CirculantSpectrum,
    RealSymmetricMatrix, SpectralExp,
};
use crate::{Error, Result, SpacetimeGrid};

/// Constants of the Hastings-Koma bound `C|A||B|(e^{v|t|}-1)/(dist+1)^α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HKParams {
    pub c: f64,
    pub v: f64,
    pub alpha: f64,
    pub size_a: usize,
    pub size_b: usize,
}

impl HKParams {
    /// The bound only holds for `alpha > dimension`.
    pub fn new(
        c: f64,
        v: f64,
        alpha: f64,
        size_a: usize,
        size_b: usize,
        dimension: usize,
    ) -> Result<Self> {
        positive("C", c)?;
        positive("v", v)?;
        if !(alpha.is_finite() && alpha > dimension as f64) {
            return Err(Error::UnsupportedRegime(format!(
                "Hastings-Koma bound needs alpha > D = {dimension}, got {alpha}"
            )));
        }
        if size_a == 0 || size_b == 0 {
            return Err(Error::invalid("support sizes must be positive"));
        }
        Ok(HKParams {
            c,
            v,
            alpha,
            size_a,
            size_b,
        })
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

pub fn hastings_koma(p: &HKParams, dist: usize, t: f64) -> f64 {
    p.c * (p.size_a * p.size_b) as f64 * (p.v * t.abs()).exp_m1()
        / (dist as f64 + 1.0).powf(p.alpha)
}

/// `2|A||B| / (p (1+dist)^α) · (e^{2pλ|τ|} - 1)` in rescaled time `τ`.
pub fn rescaled_bound(d: &DecayParams, size_a: usize, size_b: usize, dist: usize, tau: f64) -> f64 {
    2.0 * (size_a * size_b) as f64 / (d.p * (1.0 + dist as f64).powf(d.alpha))
        * (2.0 * d.p * d.lambda * tau.abs()).exp_m1()
}

/// `τ = t / 𝒩`.
pub fn rescale_time(t: f64, n_factor: f64) -> Result<f64> {
    positive("normalisation factor", n_factor)?;
    Ok(t / n_factor)
}

fn check_site(n: usize, site: usize) -> Result<()> {
    if site >= n {
        return Err(Error::invalid(format!("site {site} outside 0..{n}")));
    }
    Ok(())
}

/// `2 (exp(2κJ|t|)_{ij} - δ_{ij})`.
pub fn matexp_bound(j: &InteractionMatrix, t: f64, i: usize, site_j: usize) -> Result<f64> {
    check_site(j.n_sites(), i)?;
    check_site(j.n_sites(), site_j)?;
    let e = expm_symmetric(j.entries(), 2.0 * j.kappa() * t.abs())?;
    Ok(2.0 * (e.get(i, site_j) - kronecker(i, site_j)))
}

fn kronecker(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Matrix-exponential bound with the eigendecomposition of `J` cached, for
/// repeated evaluation at many times.
#[derive(Debug, Clone)]
pub struct MatexpBound {
    kappa: f64,
    spectral: SpectralExp,
}

impl MatexpBound {
    pub fn new(j: &InteractionMatrix) -> Result<Self> {
        Ok(MatexpBound {
            kappa: j.kappa(),
            spectral: SpectralExp::new(j.entries())?,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn value(&self, t: f64, i: usize, j: usize) -> Result<f64> {
        let n = self.spectral.order();
        check_site(n, i)?;
        check_site(n, j)?;
        Ok(2.0 * (self.spectral.entry(2.0 * self.kappa * t.abs(), i, j) - kronecker(i, j)))
    }
}

/// Matrix-exponential bound for a circulant coupling matrix, evaluated
/// through its Fourier spectrum.
#[derive(Debug, Clone)]
pub struct CirculantMatexp {
    spectrum: CirculantSpectrum,
    kappa: f64,
}

impl CirculantMatexp {
    pub fn new(first_row: &[f64]) -> Result<Self> {
        let spectrum = circulant_eigenvalues(first_row)?;
        if first_row.iter().any(|&x| x < 0.0) {
            return Err(Error::invalid("couplings must be nonnegative"));
        }
        Ok(CirculantMatexp {
            spectrum,
            kappa: first_row.iter().sum(),
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn size(&self) -> usize {
        self.spectrum.size()
    }

    pub fn value(&self, t: f64, delta: usize) -> f64 {
        self.values(t, &[delta])[0]
    }

    pub fn values(&self, t: f64, deltas: &[usize]) -> Vec<f64> {
        let s = 2.0 * self.kappa * t.abs();
        let n = self.size();
        self.spectrum
            .function_entries(|lam| (s * lam).exp(), deltas)
            .into_iter()
            .zip(deltas)
            .map(|(e, &d)| 2.0 * (e - kronecker(d % n, 0)))
            .collect()
    }
}

pub fn matexp_bound_circulant(first_row: &[f64], t: f64, delta: usize) -> Result<f64> {
    Ok(CirculantMatexp::new(first_row)?.value(t, delta))
}

/// Truncated power series of the matrix-exponential bound with a rigorous
/// tail estimate: `value <= exact <= value + 2·tail_bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesBound {
    pub value: f64,
    pub tail_bound: f64,
}

pub fn series_oracle_bound(
    j: &InteractionMatrix,
    t: f64,
    i: usize,
    site_j: usize,
    n_max: usize,
) -> Result<SeriesBound> {
    let n = j.n_sites();
    check_site(n, i)?;
    check_site(n, site_j)?;
    if n_max == 0 {
        return Err(Error::invalid("series needs at least one term"));
    }
    let kappa = j.kappa();
    let x = 2.0 * kappa * t.abs();
    let mut v = vec![0.0; n];
    v[site_j] = 1.0;
    let mut coeff = 1.0;
    let mut value = 0.0;
    for k in 1..=n_max {
        v = j.entries().apply(&v);
        coeff *= x / k as f64;
        value += coeff * v[i];
    }
    // the spectral norm of a symmetric J is at most its maximal row sum
    let tail_bound = exp_series_tail(x * kappa, n_max);
    Ok(SeriesBound {
        value: 2.0 * value,
        tail_bound,
    })
}

/// `Σ_{n > n_max} y^n / n!`, summed term by term.
fn exp_series_tail(y: f64, n_max: usize) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let first = n_max + 1;
    let mut term = (first as f64 * y.ln() - ln_gamma(first as f64 + 1.0)).exp();
    let mut sum = 0.0;
    let mut k = first;
    loop {
        sum += term;
        k += 1;
        term *= y / k as f64;
        if (k as f64 > y && term <= 1e-18 * sum) || term == 0.0 || !sum.is_finite() {
            return sum;
        }
    }
}

/// `exp(2κJ|t|) e_source` for every time, by repeated application of
/// truncated Taylor steps.
///
/// All series terms are nonnegative for nonnegative `J`, so entries far from
/// the source keep their relative accuracy and every entry is nondecreasing
/// along the (ascending) times.
fn propagate_nonnegative(j: &InteractionMatrix, source: usize, times: &[f64]) -> Vec<Vec<f64>> {
    let n = j.n_sites();
    let m = j.entries();
    let kappa = j.kappa();
    let mut x = vec![0.0; n];
    x[source] = 1.0;
    let mut s_prev = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let s = 2.0 * kappa * t.abs();
        let ds = s - s_prev;
        if ds > 0.0 {
            exp_action_step(m, kappa, &mut x, ds);
        }
        s_prev = s;
        out.push(x.clone());
    }
    out
}

const TAYLOR_STEP_NORM: f64 = 0.5;
const TAYLOR_MAX_TERMS: usize = 60;

fn exp_action_step(m: &RealSymmetricMatrix, norm: f64, x: &mut Vec<f64>, s: f64) {
    let substeps = ((s * norm) / TAYLOR_STEP_NORM).ceil().max(1.0) as usize;
    let h = s / substeps as f64;
    for _ in 0..substeps {
        let mut term = x.clone();
        let mut acc = x.clone();
        for k in 1..=TAYLOR_MAX_TERMS {
            term = m.apply(&term);
            let scale = h / k as f64;
            let mut term_max: f64 = 0.0;
            for (a, tv) in acc.iter_mut().zip(term.iter_mut()) {
                *tv *= scale;
                *a += *tv;
                term_max = term_max.max(*tv);
            }
            let acc_max = acc.iter().copied().fold(0.0, f64::max);
            if term_max <= 1e-17 * acc_max {
                break;
            }
        }
        *x = acc;
    }
}

/// Constants of the two-term bound for `α ≥ 1`:
/// `c₁ = 1/λ`, `v₁ = 2λ²e`, `c₂ = 1/(λ 9^D)`, `v₂ = 2λ² 9^D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GongParams {
    alpha: f64,
    dimension: usize,
    lambda: f64,
}

pub const GONG_MU_BRACKET: (f64, f64) = (1e-6, 1.0 - 1e-6);

impl GongParams {
    pub fn new(alpha: f64, dimension: usize, lambda: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 1.0) {
            return Err(Error::UnsupportedRegime(format!(
                "two-term bound needs alpha >= 1, got {alpha}"
            )));
        }
        if dimension == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        positive("lambda", lambda)?;
        Ok(GongParams {
            alpha,
            dimension,
            lambda,
        })
    }

    /// Infinite chain: `λ = Σ_{k≠0} |k|^{-α} = 2ζ(α)`.
    pub fn from_chain(alpha: f64) -> Result<Self> {
        if alpha <= 1.0 {
            return Err(Error::Divergent(format!(
                "coupling sum on the infinite chain diverges for alpha = {alpha}"
            )));
        }
        let zeta = polylog_circle(alpha, 0.0)?.re;
        Self::new(alpha, 1, 2.0 * zeta)
    }

    /// Finite lattice: `λ = sup_i Σ_{k≠i} dist(i,k)^{-α}`.
    pub fn from_lattice(spec: &LatticeSpec, alpha: f64) -> Result<Self> {
        let n = spec.n_sites();
        let sites: Vec<usize> = match spec.boundary() {
            crate::lattice::Boundary::Periodic => vec![0],
            crate::lattice::Boundary::Open => (0..n).collect(),
        };
        let mut lambda: f64 = 0.0;
        for i in sites {
            let mut s = 0.0;
            for k in 0..n {
                if k != i {
                    let d = crate::lattice::graph_distance(spec, i, k)?;
                    s += (d as f64).powf(-alpha);
                }
            }
            lambda = lambda.max(s);
        }
        Self::new(alpha, spec.dimension(), lambda)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn nine_d(&self) -> f64 {
        9f64.powi(self.dimension as i32)
    }

    pub fn c1(&self) -> f64 {
        1.0 / self.lambda
    }

    pub fn v1(&self) -> f64 {
        2.0 * self.lambda * self.lambda * E
    }

    pub fn c2(&self) -> f64 {
        1.0 / (self.lambda * self.nine_d())
    }

    pub fn v2(&self) -> f64 {
        2.0 * self.lambda * self.lambda * self.nine_d()
    }
}

fn check_gong_args(mu: f64, delta: f64, t: f64) -> Result<()> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::invalid(format!("mu must lie in (0, 1), got {mu}")));
    }
    positive("delta", delta)?;
    if !t.is_finite() {
        return Err(Error::invalid(format!("time must be finite, got {t}")));
    }
    Ok(())
}

/// `T₁ = c₁(e^{v₁|t|}-1)/e^{μδ}` and `T₂ = c₂(e^{v₂|t|}-1)/((1-μ)δ)^α`.
pub fn gong_terms(g: &GongParams, mu: f64, delta: f64, t: f64) -> Result<(f64, f64)> {
    check_gong_args(mu, delta, t)?;
    let t = t.abs();
    let t1 = g.c1() * (g.v1() * t).exp_m1() / (mu * delta).exp();
    let t2 = g.c2() * (g.v2() * t).exp_m1() / ((1.0 - mu) * delta).powf(g.alpha);
    Ok((t1, t2))
}

fn ln_expm1(x: f64) -> f64 {
    if x < 1.0 {
        x.exp_m1().ln()
    } else {
        x + (-(-x).exp()).ln_1p()
    }
}

fn log_sum(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn ln_gong_sum(g: &GongParams, mu: f64, delta: f64, t: f64) -> f64 {
    let l1 = g.c1().ln() + ln_expm1(g.v1() * t) - mu * delta;
    let l2 = g.c2().ln() + ln_expm1(g.v2() * t) - g.alpha * ((1.0 - mu) * delta).ln();
    log_sum(l1, l2)
}

/// `ln min_μ (T₁ + T₂)`, finite even where the bound itself overflows.
/// Returns the minimising `μ` alongside.
pub fn gong_log_bound(g: &GongParams, delta: f64, t: f64) -> Result<(f64, f64)> {
    check_gong_args(0.5, delta, t)?;
    let t = t.abs();
    if t == 0.0 {
        return Ok((f64::NEG_INFINITY, 0.5));
    }
    let (lo, hi) = GONG_MU_BRACKET;
    let m = minimize_scalar(|mu| ln_gong_sum(g, mu, delta, t), lo, hi, 1e-10)?;
    Ok((m.value, m.x))
}

/// `min_μ (T₁ + T₂)` over `μ ∈ [1e-6, 1 - 1e-6]`.
pub fn gong_bound(g: &GongParams, delta: f64, t: f64) -> Result<f64> {
    let (ln_value, mu) = gong_log_bound(g, delta, t)?;
    if ln_value == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let (t1, t2) = gong_terms(g, mu, delta, t)?;
    let value = t1 + t2;
    if !value.is_finite() {
        return Err(Error::Evaluation(format!(
            "two-term bound overflows at delta = {delta}, t = {t} (ln value = {ln_value:.6})"
        )));
    }
    Ok(value)
}

/// Which bound to sweep, with its parameters.
#[derive(Debug, Clone)]
pub enum BoundKind {
    HastingsKoma(HKParams),
    /// Times are physical; they are divided by `n_factor` before evaluation.
    Rescaled {
        decay: DecayParams,
        size_a: usize,
        size_b: usize,
        n_factor: f64,
    },
    /// Row `δ` holds the bound between `source` and `(source + δ) mod N`.
    Matexp {
        interactions: InteractionMatrix,
        source: usize,
    },
    MatexpCirculant {
        first_row: Vec<f64>,
    },
    Gong(GongParams),
}

impl BoundKind {
    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::HastingsKoma(_) => "hk",
            BoundKind::Rescaled { .. } => "rescaled",
            BoundKind::Matexp { .. } => "matexp",
            BoundKind::MatexpCirculant { .. } => "matexp-circulant",
            BoundKind::Gong(_) => "gong",
        }
    }

    fn meta(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("quantity".into(), "commutator_bound".into());
        m.insert("bound".into(), self.name().into());
        m.insert("operator_norms".into(), "1".into());
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        match self {
            BoundKind::HastingsKoma(p) => {
                put("C", p.c.to_string());
                put("v", p.v.to_string());
                put("alpha", p.alpha.to_string());
                put("size_a", p.size_a.to_string());
                put("size_b", p.size_b.to_string());
                put("convention", "(1+d)^-alpha".into());
            }
            BoundKind::Rescaled {
                decay,
                size_a,
                size_b,
                n_factor,
            } => {
                put("alpha", decay.alpha.to_string());
                put("lambda", decay.lambda.to_string());
                put("p", decay.p.to_string());
                put("size_a", size_a.to_string());
                put("size_b", size_b.to_string());
                put("n_factor", n_factor.to_string());
                put("time", "physical t, tau = t/n_factor".into());
                put("convention", "(1+d)^-alpha".into());
            }
            BoundKind::Matexp {
                interactions,
                source,
            } => {
                put("n", interactions.n_sites().to_string());
                put("kappa", interactions.kappa().to_string());
                put("source", source.to_string());
                put("convention", interactions.convention().as_str().into());
                put("rows", "site (source+delta) mod N".into());
            }
            BoundKind::MatexpCirculant { first_row } => {
                put("n", first_row.len().to_string());
                put("kappa", first_row.iter().sum::<f64>().to_string());
                put("rows", "offset delta".into());
            }
            BoundKind::Gong(g) => {
                put("alpha", g.alpha.to_string());
                put("dimension", g.dimension.to_string());
                put("lambda", g.lambda.to_string());
                put(
                    "mu_bracket",
                    format!("[{}, {}]", GONG_MU_BRACKET.0, GONG_MU_BRACKET.1),
                );
                put("convention", "d^-alpha".into());
            }
        }
        m
    }
}

fn check_axes(deltas: &[usize], times: &[f64]) -> Result<()> {
    if deltas.is_empty() {
        return Err(Error::Configuration("no distances requested".into()));
    }
    if times.is_empty() {
        return Err(Error::Configuration("no times requested".into()));
    }
    if deltas[0] == 0 || deltas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Configuration(
            "distances must be positive and strictly ascending".into(),
        ));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::Configuration(
            "times must be nonnegative and strictly ascending".into(),
        ));
    }
    Ok(())
}

fn cellwise<F>(deltas: &[usize], times: &[f64], f: F) -> Result<Vec<f64>>
where
    F: Fn(usize, f64) -> Result<f64> + Sync,
{
    let cols = times.len();
    (0..deltas.len() * cols)
        .into_par_iter()
        .map(|idx| f(deltas[idx / cols], times[idx % cols]))
        .collect()
}

/// Evaluates the selected bound on every `(δ, t)` cell.
pub fn bound_grid(kind: &BoundKind, deltas: &[usize], times: &[f64]) -> Result<SpacetimeGrid> {
    check_axes(deltas, times)?;
    let values = match kind {
        BoundKind::HastingsKoma(p) => cellwise(deltas, times, |d, t| Ok(hastings_koma(p, d, t)))?,
        BoundKind::Rescaled {
            decay,
            size_a,
            size_b,
            n_factor,
        } => {
            positive("n_factor", *n_factor)?;
            cellwise(deltas, times, |d, t| {
                Ok(rescaled_bound(
                    decay,
                    *size_a,
                    *size_b,
                    d,
                    rescale_time(t, *n_factor)?,
                ))
            })?
        }
        BoundKind::Matexp {
            interactions,
            source,
        } => {
            let n = interactions.n_sites();
            if *source >= n {
                return Err(Error::Configuration(format!(
                    "source site {source} outside 0..{n}"
                )));
            }
            check_offsets(deltas, n)?;
            let rows = propagate_nonnegative(interactions, *source, times);
            let mut values = vec![0.0; deltas.len() * times.len()];
            for (c, x) in rows.iter().enumerate() {
                for (r, &d) in deltas.iter().enumerate() {
                    values[r * times.len() + c] = 2.0 * x[(source + d) % n];
                }
            }
            values
        }
        BoundKind::MatexpCirculant { first_row } => {
            let fast = CirculantMatexp::new(first_row)?;
            check_offsets(deltas, fast.size())?;
            let columns: Vec<Vec<f64>> =
                times.par_iter().map(|&t| fast.values(t, deltas)).collect();
            let mut values = vec![0.0; deltas.len() * times.len()];
            for (c, col) in columns.iter().enumerate() {
                for (r, &v) in col.iter().enumerate() {
                    // rounding noise of the Fourier sum can dip below zero
                    // where the true value is tiny
                    values[r * times.len() + c] = if times[c] == 0.0 { 0.0 } else { v.max(0.0) };
                }
            }
            values
        }
        BoundKind::Gong(g) => cellwise(deltas, times, |d, t| gong_bound(g, d as f64, t))?,
    };
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        let cols = times.len();
        return Err(Error::Evaluation(format!(
            "{} bound is not finite at delta = {}, t = {}",
            kind.name(),
            deltas[pos / cols],
            times[pos % cols]
        )));
    }
    SpacetimeGrid::new(deltas.to_vec(), times.to_vec(), values, kind.meta())
}

fn check_offsets(deltas: &[usize], n: usize) -> Result<()> {
    if let Some(d) = deltas.iter().find(|&&d| d >= n) {
        return Err(Error::Configuration(format!(
            "distance {d} does not fit on {n} sites"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{hopping_interactions, power_law_interactions, Boundary};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_interactions(n: usize, seed: u64) -> InteractionMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut upper = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                upper[i * n + j] = rng.random::<f64>();
            }
        }
        let m = RealSymmetricMatrix::from_upper(n, |i, j| upper[i * n + j]).unwrap();
        InteractionMatrix::from_entries(LatticeSpec::chain(n, Boundary::Open).unwrap(), m).unwrap()
    }

    #[test]
    fn hastings_koma_examples() {
        let p = HKParams::new(1.0, 1.0, 2.0, 1, 1, 1).unwrap();
        assert_eq!(hastings_koma(&p, 3, 0.0), 0.0);
        assert_relative_eq!(
            hastings_koma(&p, 3, 1.0),
            (E - 1.0) / 16.0,
            max_relative = 1e-15
        );
        // dist + 1 doubles from 2 to 4
        assert_relative_eq!(
            hastings_koma(&p, 1, 0.7) / hastings_koma(&p, 3, 0.7),
            4.0,
            max_relative = 1e-12
        );
        assert!(HKParams::new(1.0, 1.0, 1.0, 1, 1, 1).is_err());
        assert!(HKParams::new(0.0, 1.0, 3.0, 1, 1, 1).is_err());
    }

    #[test]
    fn rescaled_examples() {
        let d = DecayParams::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(rescaled_bound(&d, 1, 1, 1, 0.0), 0.0);
        assert_relative_eq!(
            rescaled_bound(&d, 1, 1, 1, 1.0),
            E * E - 1.0,
            max_relative = 1e-15
        );
        let d = DecayParams::new(0.5, 1.3, 2.1).unwrap();
        for dist in [1usize, 4, 17] {
            let ratio =
                rescaled_bound(&d, 2, 3, dist, 0.4) / rescaled_bound(&d, 2, 3, 2 * dist + 1, 0.4);
            assert_relative_eq!(ratio, 2f64.powf(0.5), max_relative = 1e-12);
        }
    }

    #[test]
    fn rescale_time_examples() {
        assert_eq!(rescale_time(0.0, 0.3).unwrap(), 0.0);
        assert_eq!(rescale_time(2.5, 1.0).unwrap(), 2.5);
        assert!(rescale_time(1.0, 0.0).is_err());
        // the physical window for a fixed τ-window shrinks as N grows
        let n1 = crate::lattice::normalization_factor(
            &LatticeSpec::chain(1000, Boundary::Periodic).unwrap(),
            0.5,
        )
        .unwrap();
        let n2 = crate::lattice::normalization_factor(
            &LatticeSpec::chain(10_000, Boundary::Periodic).unwrap(),
            0.5,
        )
        .unwrap();
        assert!(n2 < n1);
    }

    #[test]
    fn matexp_two_site_closed_form() {
        let spec = LatticeSpec::chain(2, Boundary::Open).unwrap();
        let j = InteractionMatrix::from_entries(
            spec,
            RealSymmetricMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap(),
        )
        .unwrap();
        for t in [0.0, 0.3, -1.1, 2.0] {
            assert_relative_eq!(
                matexp_bound(&j, t, 0, 1).unwrap(),
                2.0 * (2.0 * t).abs().sinh(),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn matexp_matches_series_oracle() {
        let j = random_interactions(8, 11);
        let cached = MatexpBound::new(&j).unwrap();
        for t in [0.3, 0.05, 0.8] {
            for a in 0..8 {
                for b in 0..8 {
                    if a == b {
                        continue;
                    }
                    let exact = matexp_bound(&j, t, a, b).unwrap();
                    let series = series_oracle_bound(&j, t, a, b, 60).unwrap();
                    assert_relative_eq!(exact, series.value, max_relative = 1e-8);
                    assert!(series.value <= exact * (1.0 + 1e-12));
                    assert!(exact <= series.value + 2.0 * series.tail_bound + 1e-12 * exact);
                    assert_relative_eq!(
                        cached.value(t, a, b).unwrap(),
                        exact,
                        max_relative = 1e-12
                    );
                    assert_eq!(matexp_bound(&j, t, b, a).unwrap(), exact);
                }
            }
        }
    }

    #[test]
    fn series_first_term_and_tail() {
        let j = random_interactions(6, 3);
        let t = 0.4;
        let one = series_oracle_bound(&j, t, 1, 4, 1).unwrap();
        assert_relative_eq!(
            one.value,
            2.0 * 2.0 * j.kappa() * t * j.entries().get(1, 4),
            max_relative = 1e-15
        );
        let mut prev = f64::INFINITY;
        for n_max in 1..40 {
            let s = series_oracle_bound(&j, t, 1, 4, n_max).unwrap();
            assert!(s.tail_bound < prev);
            prev = s.tail_bound;
        }
        assert_eq!(
            series_oracle_bound(&j, 0.0, 1, 4, 5).unwrap().tail_bound,
            0.0
        );
        assert!(series_oracle_bound(&j, t, 1, 4, 0).is_err());
    }

    #[test]
    fn matexp_monotone_in_couplings() {
        let j = random_interactions(6, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let bump = RealSymmetricMatrix::from_upper(6, |a, b| {
            if a == b {
                0.0
            } else {
                j.entries().get(a, b) + 0.2 * rng.random::<f64>()
            }
        })
        .unwrap();
        let bigger = InteractionMatrix::from_entries(j.lattice().clone(), bump).unwrap();
        for t in [0.1, 0.5] {
            for a in 0..6 {
                for b in 0..6 {
                    if a != b {
                        assert!(
                            matexp_bound(&bigger, t, a, b).unwrap()
                                >= matexp_bound(&j, t, a, b).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn circulant_matches_dense() {
        let j = hopping_interactions(64, 4.0).unwrap();
        let row = j.circulant_row().unwrap();
        let dense = matexp_bound(&j, 1.0, 0, 5).unwrap();
        assert_abs_diff_eq!(
            matexp_bound_circulant(&row, 1.0, 5).unwrap(),
            dense,
            epsilon = 1e-9
        );
        let fast = CirculantMatexp::new(&row).unwrap();
        let diag = fast
            .spectrum
            .eigenvalues()
            .iter()
            .map(|l| (2.0 * fast.kappa() * 1.0 * l).exp())
            .sum::<f64>()
            / 64.0;
        assert_relative_eq!(fast.value(1.0, 0), 2.0 * (diag - 1.0), max_relative = 1e-12);
        for d in 1..64 {
            assert_abs_diff_eq!(fast.value(0.0, d), 0.0, epsilon = 1e-15);
        }
        assert!(matexp_bound_circulant(&[0.0, 1.0, 0.5], 1.0, 1).is_err());
    }

    #[test]
    fn propagation_matches_eigen_path() {
        let j = power_law_interactions(
            &LatticeSpec::chain(30, Boundary::Periodic).unwrap(),
            2.0,
            1.5,
        )
        .unwrap();
        let times: Vec<f64> = (0..25).map(|k| 0.2 * k as f64).collect();
        let deltas: Vec<usize> = (1..30).collect();
        let grid = bound_grid(
            &BoundKind::Matexp {
                interactions: j.clone(),
                source: 3,
            },
            &deltas,
            &times,
        )
        .unwrap();
        let eig = MatexpBound::new(&j).unwrap();
        let scale = grid.max_value();
        for (r, &d) in deltas.iter().enumerate() {
            for (c, &t) in times.iter().enumerate() {
                let e = eig.value(t, 3, (3 + d) % 30).unwrap();
                assert_abs_diff_eq!(grid.get(r, c), e, epsilon = 1e-12 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn gong_constants_rederived() {
        let g = GongParams::from_chain(4.0).unwrap();
        let lambda = std::f64::consts::PI.powi(4) / 45.0;
        assert_relative_eq!(g.lambda(), lambda, max_relative = 1e-13);
        let (mu, delta, t) = (0.3, 7.0, 0.01);
        let (t1, t2) = gong_terms(&g, mu, delta, t).unwrap();
        let t1_ref =
            (1.0 / lambda) * ((2.0 * lambda * lambda * E * t).exp() - 1.0) * (-mu * delta).exp();
        let t2_ref = (1.0 / (9.0 * lambda)) * ((18.0 * lambda * lambda * t).exp() - 1.0)
            / ((1.0 - mu) * delta).powi(4);
        assert_relative_eq!(t1, t1_ref, max_relative = 1e-12);
        assert_relative_eq!(t2, t2_ref, max_relative = 1e-12);
        assert_eq!(gong_terms(&g, 0.4, 3.0, 0.0).unwrap(), (0.0, 0.0));
        assert!(gong_terms(&g, 0.0, 3.0, 0.1).is_err());
        assert!(gong_terms(&g, 1.0, 3.0, 0.1).is_err());
        assert!(GongParams::from_chain(1.0).is_err());
        assert!(GongParams::new(0.5, 1, 1.0).is_err());
    }

    #[test]
    fn gong_t1_decreasing_in_mu() {
        let g = GongParams::from_chain(2.0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..100 {
            let (t1, _) = gong_terms(&g, k as f64 / 100.0, 5.0, 0.05).unwrap();
            assert!(t1 < prev);
            prev = t1;
        }
    }

    #[test]
    fn gong_bound_is_a_minimum() {
        let g = GongParams::from_chain(1.5).unwrap();
        assert_eq!(gong_bound(&g, 4.0, 0.0).unwrap(), 0.0);
        for (delta, t) in [(2.0, 0.01), (10.0, 0.05), (40.0, 0.1), (100.0, 0.02)] {
            let b = gong_bound(&g, delta, t).unwrap();
            let (a1, a2) = gong_terms(&g, 0.5, delta, t).unwrap();
            assert!(b <= a1 + a2);
            let grid_min = (0..=100)
                .map(|k| {
                    let mu = (k as f64 / 100.0).clamp(GONG_MU_BRACKET.0, GONG_MU_BRACKET.1);
                    let (x, y) = gong_terms(&g, mu, delta, t).unwrap();
                    x + y
                })
                .fold(f64::INFINITY, f64::min);
            assert!(b <= grid_min + 1e-12, "{b} > {grid_min}");
        }
    }

    #[test]
    fn gong_contours_bend_supersonically() {
        let g = GongParams::from_chain(1.2).unwrap();
        let deltas: Vec<usize> = (1..=2000).collect();
        let times: Vec<f64> = (1..=10).map(|i| 0.0005 * i as f64).collect();
        let grid = bound_grid(&BoundKind::Gong(g), &deltas, &times).unwrap();
        let front: Vec<f64> = grid
            .contour_front(0.1)
            .iter()
            .filter_map(|f| f.position())
            .collect();
        assert!(front.len() >= 6);
        // equal time steps, growing distance increments: faster than any cone
        let steps: Vec<f64> = front.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(steps.windows(2).all(|w| w[1] > w[0]), "{front:?}");
    }

    #[test]
    fn gong_overflow_is_reported() {
        let g = GongParams::from_chain(1.2).unwrap();
        assert!(matches!(
            gong_bound(&g, 5.0, 10.0),
            Err(Error::Evaluation(_))
        ));
        assert!(gong_log_bound(&g, 5.0, 10.0).unwrap().0.is_finite());
    }

    #[test]
    fn bound_grid_contracts() {
        let p = HKParams::new(1.0, 1.0, 2.0, 1, 1, 1).unwrap();
        let kind = BoundKind::HastingsKoma(p);
        assert!(matches!(
            bound_grid(&kind, &[1, 2], &[]),
            Err(Error::Configuration(_))
        ));
        assert!(bound_grid(&kind, &[0, 2], &[0.0]).is_err());
        assert!(bound_grid(&kind, &[1, 2], &[0.5, 0.1]).is_err());
        let circ = BoundKind::MatexpCirculant {
            first_row: hopping_interactions(8, 2.0)
                .unwrap()
                .circulant_row()
                .unwrap(),
        };
        assert!(matches!(
            bound_grid(&circ, &[1, 9], &[0.0]),
            Err(Error::Configuration(_))
        ));
        let g = bound_grid(&kind, &[1, 2, 5], &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(g.meta()["bound"], "hk");
        for r in 0..3 {
            assert_eq!(g.get(r, 0), 0.0);
            assert!(g.get(r, 1) < g.get(r, 2));
        }
    }
}
