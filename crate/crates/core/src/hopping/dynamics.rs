use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{DispersionTable, HoppingModel};
use crate::{Error, Result, SpacetimeGrid};

fn stagger_sign(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl DispersionTable {
    /// `⟨n_j(t)⟩ = 1/2 - ((-1)^j / 2N) Σ_k cos(tΔ(k))`.
    pub fn occupation(&self, j: usize, t: f64) -> f64 {
        let n = self.model.n as f64;
        let s: f64 = self.delta_freq.iter().map(|&d| (t * d).cos()).sum();
        0.5 - stagger_sign(j) * s / (2.0 * n)
    }

    /// `g_δ(t) = (1/N) Σ_m e^{itΔ_m} e^{-ik_m δ}` for each requested offset.
    fn fourier_g(&self, t: f64, deltas: &[usize]) -> Vec<Complex64> {
        let n = self.model.n;
        let phases: Vec<(f64, f64)> = self.delta_freq.iter().map(|&d| (t * d).sin_cos()).collect();
        deltas
            .iter()
            .map(|&delta| {
                let d = delta % n;
                let (mut re, mut im) = (0.0, 0.0);
                for (m, &(s, c)) in phases.iter().enumerate() {
                    let idx = (m * d) % n;
                    let (ck, sk) = (self.cos[idx], self.sin[idx]);
                    // (c + is)(ck - i sk)
                    re += c * ck + s * sk;
                    im += s * ck - c * sk;
                }
                Complex64::new(re, im) / n as f64
            })
            .collect()
    }

    fn correlation_from_g(&self, j: usize, delta: usize, g: Complex64) -> Complex64 {
        let d = delta % self.model.n;
        let diag = if d == 0 { 0.5 } else { 0.0 };
        Complex64::new(diag, 0.0) - g * (0.5 * stagger_sign(j + d))
    }

    /// `⟨c†_{j+δ}(t) c_j(t)⟩`.
    pub fn correlation(&self, j: usize, delta: usize, t: f64) -> Complex64 {
        let g = self.fourier_g(t, &[delta])[0];
        self.correlation_from_g(j, delta, g)
    }
}

pub fn occupation(model: &HoppingModel, j: usize, t: f64) -> f64 {
    DispersionTable::new(*model).occupation(j, t)
}

pub fn staggered_correlation(model: &HoppingModel, j: usize, delta: usize, t: f64) -> Complex64 {
    DispersionTable::new(*model).correlation(j, delta, t)
}

/// One-body density matrix `C_{ab} = ⟨c†_a c_b⟩` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    time: f64,
    entries: DMatrix<Complex64>,
}

pub const HERMITICITY_TOLERANCE: f64 = 1e-12;
pub const TRACE_TOLERANCE: f64 = 1e-10;
pub const EIGENVALUE_TOLERANCE: f64 = 1e-10;

impl CorrelationMatrix {
    pub fn from_table(table: &DispersionTable, t: f64) -> Result<Self> {
        let n = table.model.n;
        let deltas: Vec<usize> = (0..n).collect();
        let g = table.fourier_g(t, &deltas);
        let mut entries = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for j in 0..n {
            for (delta, &gd) in g.iter().enumerate() {
                entries[((j + delta) % n, j)] = table.correlation_from_g(j, delta, gd);
            }
        }
        let c = CorrelationMatrix { time: t, entries };
        c.check_physical(n as f64 / 2.0)
            .map_err(|e| Error::Internal(format!("correlation matrix at t = {t}: {e}")))?;
        Ok(c)
    }

    fn check_physical(&self, particles: f64) -> Result<()> {
        let n = self.n();
        for a in 0..n {
            for b in 0..n {
                let d = (self.entries[(a, b)] - self.entries[(b, a)].conj()).norm();
                if d > HERMITICITY_TOLERANCE {
                    return Err(Error::Internal(format!(
                        "not Hermitian at ({a}, {b}): {d:e}"
                    )));
                }
            }
        }
        let trace = self.entries.trace();
        if (trace.re - particles).abs() > TRACE_TOLERANCE || trace.im.abs() > TRACE_TOLERANCE {
            return Err(Error::Internal(format!(
                "trace {trace} differs from {particles}"
            )));
        }
        for ev in self.eigenvalues()? {
            if !(-EIGENVALUE_TOLERANCE..=1.0 + EIGENVALUE_TOLERANCE).contains(&ev) {
                return Err(Error::Internal(format!("eigenvalue {ev} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.entries[(a, b)]
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let eig = SymmetricEigen::try_new(self.entries.clone(), f64::EPSILON, 0)
            .ok_or_else(|| Error::Evaluation("Hermitian eigensolver did not converge".into()))?;
        Ok(eig.eigenvalues.iter().copied().collect())
    }
}

pub fn correlation_matrix(model: &HoppingModel, t: f64) -> Result<CorrelationMatrix> {
    CorrelationMatrix::from_table(&DispersionTable::new(*model), t)
}

/// Binary entropy in nats, `0 ln 0 = 0`.
fn mode_entropy(nu: f64) -> f64 {
    let nu = nu.clamp(0.0, 1.0);
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(nu) + term(1.0 - nu)
}

fn check_occupation(nu: f64) -> Result<()> {
    if !(-EIGENVALUE_TOLERANCE..=1.0 + EIGENVALUE_TOLERANCE).contains(&nu) {
        return Err(Error::invalid(format!(
            "invalid correlation matrix: eigenvalue {nu} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Mutual information of sites `i` and `j` from the 2×2 block
/// `[[c_ii, c_ij], [c_ji, c_jj]]`.
fn pair_mutual_information(c_ii: f64, c_jj: f64, c_ij: Complex64) -> Result<f64> {
    let mean = 0.5 * (c_ii + c_jj);
    let half_gap = (0.25 * (c_ii - c_jj).powi(2) + c_ij.norm_sqr()).sqrt();
    let (hi, lo) = (mean + half_gap, mean - half_gap);
    for nu in [c_ii, c_jj, hi, lo] {
        check_occupation(nu)?;
    }
    let info = mode_entropy(c_ii) + mode_entropy(c_jj) - mode_entropy(hi) - mode_entropy(lo);
    if info < -1e-10 {
        return Err(Error::Internal(format!(
            "negative mutual information {info:e}"
        )));
    }
    Ok(info.max(0.0))
}

/// `I(i:j) = S(i) + S(j) - S(i,j)` in nats.
pub fn mutual_information(c: &CorrelationMatrix, i: usize, j: usize) -> Result<f64> {
    let n = c.n();
    if i >= n || j >= n {
        return Err(Error::invalid(format!("sites ({i}, {j}) outside 0..{n}")));
    }
    if i == j {
        return Err(Error::invalid(
            "mutual information needs two distinct sites",
        ));
    }
    pair_mutual_information(c.get(i, i).re, c.get(j, j).re, c.get(i, j))
}

fn check_grid_rows(model: &HoppingModel, rows: &[usize]) -> Result<()> {
    if let Some(r) = rows.iter().find(|&&r| r >= model.n) {
        return Err(Error::Configuration(format!(
            "row {r} outside the chain of {} sites",
            model.n
        )));
    }
    Ok(())
}

fn base_meta(model: &HoppingModel, quantity: &str) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("quantity".into(), quantity.into());
    m.insert("n".into(), model.n.to_string());
    m.insert("alpha".into(), model.alpha.to_string());
    m.insert("boundary".into(), "periodic".into());
    m.insert("hopping".into(), "d^-alpha".into());
    m.insert(
        "initial_state".into(),
        "staggered, odd sites occupied".into(),
    );
    m.insert("k_grid".into(), "k=2*pi*m/N, m=0..N-1".into());
    m
}

fn assemble(rows: usize, columns: Vec<Vec<f64>>) -> Vec<f64> {
    let cols = columns.len();
    let mut values = vec![0.0; rows * cols];
    for (c, col) in columns.into_iter().enumerate() {
        for (r, v) in col.into_iter().enumerate() {
            values[r * cols + c] = v;
        }
    }
    values
}

/// `⟨n_j(t)⟩` with one row per site `j`.
pub fn occupation_grid(
    model: &HoppingModel,
    sites: &[usize],
    times: &[f64],
) -> Result<SpacetimeGrid> {
    check_grid_rows(model, sites)?;
    let table = DispersionTable::new(*model);
    let columns = times
        .par_iter()
        .map(|&t| {
            sites
                .iter()
                .map(|&j| table.occupation(j, t).clamp(0.0, 1.0))
                .collect()
        })
        .collect();
    let mut meta = base_meta(model, "occupation");
    meta.insert("rows".into(), "site j".into());
    SpacetimeGrid::new(
        sites.to_vec(),
        times.to_vec(),
        assemble(sites.len(), columns),
        meta,
    )
}

/// `|⟨c†_δ(t) c_0(t)⟩|`; the magnitude does not depend on the reference site.
pub fn correlation_grid(
    model: &HoppingModel,
    deltas: &[usize],
    times: &[f64],
) -> Result<SpacetimeGrid> {
    check_grid_rows(model, deltas)?;
    let table = DispersionTable::new(*model);
    let columns = times
        .par_iter()
        .map(|&t| {
            let g = table.fourier_g(t, deltas);
            deltas
                .iter()
                .zip(g)
                .map(|(&d, gd)| table.correlation_from_g(0, d, gd).norm())
                .collect()
        })
        .collect();
    let mut meta = base_meta(model, "correlation_magnitude");
    meta.insert("rows".into(), "offset delta from site 0".into());
    SpacetimeGrid::new(
        deltas.to_vec(),
        times.to_vec(),
        assemble(deltas.len(), columns),
        meta,
    )
}

/// `I(0 : δ)` in nats.
pub fn mutual_information_grid(
    model: &HoppingModel,
    deltas: &[usize],
    times: &[f64],
) -> Result<SpacetimeGrid> {
    check_grid_rows(model, deltas)?;
    if deltas.contains(&0) {
        return Err(Error::Configuration(
            "mutual information needs delta >= 1".into(),
        ));
    }
    let n = model.n;
    let table = DispersionTable::new(*model);
    let columns: Result<Vec<Vec<f64>>> = times
        .par_iter()
        .map(|&t| {
            let back: Vec<usize> = deltas.iter().map(|&d| n - d).collect();
            let g = table.fourier_g(t, &back);
            let n0 = table.occupation(0, t);
            deltas
                .iter()
                .zip(g)
                .map(|(&d, gd)| {
                    // ⟨c†_0 c_δ⟩ is the entry with j = δ, offset N - δ
                    let c_0d = table.correlation_from_g(d, n - d, gd);
                    pair_mutual_information(n0, table.occupation(d, t), c_0d)
                })
                .collect()
        })
        .collect();
    let mut meta = base_meta(model, "mutual_information");
    meta.insert("rows".into(), "offset delta from site 0".into());
    meta.insert("entropy".into(), "nats".into());
    SpacetimeGrid::new(
        deltas.to_vec(),
        times.to_vec(),
        assemble(deltas.len(), columns?),
        meta,
    )
}
