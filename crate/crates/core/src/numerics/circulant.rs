use std::f64::consts::TAU;

use crate::{Error, Result};

/// Eigenvalues of a real symmetric circulant matrix, one per Fourier mode
/// `k = 2πm/N`, `m = 0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantSpectrum {
    size: usize,
    eigenvalues: Vec<f64>,
}

impl CirculantSpectrum {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn mode(&self, m: usize) -> f64 {
        TAU * m as f64 / self.size as f64
    }

    /// Entry `(j, j + delta)` of `f(C)` for the circulant `C`, i.e. the
    /// inverse Fourier sum `(1/N) Σ_m f(ε_m) cos(k_m δ)`.
    pub fn function_entry<F: Fn(f64) -> f64>(&self, f: F, delta: usize) -> f64 {
        self.function_entries(f, &[delta])[0]
    }

    /// [`function_entry`](Self::function_entry) for several offsets, with
    /// `f` evaluated once per mode.
    pub fn function_entries<F: Fn(f64) -> f64>(&self, f: F, deltas: &[usize]) -> Vec<f64> {
        let n = self.size;
        let cos = cos_table(n);
        let fvals: Vec<f64> = self.eigenvalues.iter().map(|&lam| f(lam)).collect();
        deltas
            .iter()
            .map(|&delta| {
                let d = delta % n;
                let sum: f64 = fvals
                    .iter()
                    .enumerate()
                    .map(|(m, &fv)| fv * cos[(m * d) % n])
                    .sum();
                sum / n as f64
            })
            .collect()
    }
}

/// `cos(2πr/N)` for `r = 0..N`, mirrored so that entries `r` and `N - r` are
/// bit-identical.
pub(crate) fn cos_table(n: usize) -> Vec<f64> {
    let mut table = vec![0.0; n];
    for r in 0..=n / 2 {
        let c = (TAU * r as f64 / n as f64).cos();
        table[r] = c;
        if r > 0 {
            table[n - r] = c;
        }
    }
    table
}

/// Checks that `row` can be the first row of a real symmetric circulant
/// matrix without self-coupling.
pub fn validate_circulant_row(row: &[f64]) -> Result<()> {
    let n = row.len();
    if n == 0 {
        return Err(Error::invalid("circulant row is empty"));
    }
    if let Some(pos) = row.iter().position(|x| !x.is_finite()) {
        return Err(Error::invalid(format!(
            "non-finite circulant entry at {pos}"
        )));
    }
    if row[0] != 0.0 {
        return Err(Error::invalid(
            "circulant row must have zero diagonal entry",
        ));
    }
    for l in 1..n {
        if row[l] != row[n - l] {
            return Err(Error::invalid(format!(
                "circulant row not reflection-symmetric: row[{l}] != row[{}]",
                n - l
            )));
        }
    }
    Ok(())
}

/// Spectrum of the symmetric circulant matrix with the given first row.
///
/// For mode `k` the eigenvalue is `2 Σ_{n=1}^{⌊(N-1)/2⌋} r_n cos(nk)`, plus
/// `r_{N/2} e^{ikN/2}` when `N` is even. On the mode grid `e^{ikN/2} = (-1)^m`
/// exactly.
pub fn circulant_eigenvalues(first_row: &[f64]) -> Result<CirculantSpectrum> {
    validate_circulant_row(first_row)?;
    let n = first_row.len();
    let cos = cos_table(n);
    let half = (n - 1) / 2;
    let eigenvalues = (0..n)
        .map(|m| {
            let mut sum = 0.0;
            for l in 1..=half {
                sum += first_row[l] * cos[(m * l) % n];
            }
            let mut ev = 2.0 * sum;
            if n.is_multiple_of(2) {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                ev += first_row[n / 2] * sign;
            }
            ev
        })
        .collect();
    Ok(CirculantSpectrum {
        size: n,
        eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn dense_circulant(row: &[f64]) -> DMatrix<f64> {
        let n = row.len();
        DMatrix::from_fn(n, n, |i, j| row[(j + n - i) % n])
    }

    fn power_law_row(n: usize, alpha: f64) -> Vec<f64> {
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

    #[test]
    fn four_site_ring() {
        let spec = circulant_eigenvalues(&[0.0, 1.0, 0.0, 1.0]).unwrap();
        let expected = [2.0, 0.0, -2.0, 0.0];
        for (a, b) in spec.eigenvalues().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_row_zero_spectrum() {
        let spec = circulant_eigenvalues(&[0.0; 9]).unwrap();
        assert!(spec.eigenvalues().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn matches_dense_eigensolver() {
        for n in [63, 64] {
            let row = power_law_row(n, 4.0);
            let spec = circulant_eigenvalues(&row).unwrap();
            let mut ours = spec.eigenvalues().to_vec();
            ours.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut dense: Vec<f64> = SymmetricEigen::new(dense_circulant(&row))
                .eigenvalues
                .iter()
                .copied()
                .collect();
            dense.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (a, b) in ours.iter().zip(&dense) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn half_weight_power_law_matches_printed_fourier_form() {
        // For J = d^{-α}/2 the spectrum is Σ_{n≤⌊(N-1)/2⌋} cos(nk)/n^α + cos(kN/2)/(2(N/2)^α).
        for n in [10usize, 11] {
            let alpha = 1.7;
            let row: Vec<f64> = power_law_row(n, alpha).iter().map(|x| 0.5 * x).collect();
            let spec = circulant_eigenvalues(&row).unwrap();
            for m in 0..n {
                let k = TAU * m as f64 / n as f64;
                let mut printed: f64 = (1..=(n - 1) / 2)
                    .map(|l| (l as f64 * k).cos() / (l as f64).powf(alpha))
                    .sum();
                if n % 2 == 0 {
                    printed += (k * n as f64 / 2.0).cos() / (2.0 * (n as f64 / 2.0).powf(alpha));
                }
                assert_abs_diff_eq!(spec.eigenvalues()[m], printed, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn rejects_asymmetric_or_self_coupled_rows() {
        assert!(circulant_eigenvalues(&[0.0, 1.0, 0.5]).is_err());
        assert!(circulant_eigenvalues(&[1.0, 1.0, 1.0]).is_err());
        assert!(circulant_eigenvalues(&[]).is_err());
    }

    #[test]
    fn function_entry_reconstructs_matrix() {
        let row = power_law_row(12, 2.0);
        let spec = circulant_eigenvalues(&row).unwrap();
        for (delta, &r) in row.iter().enumerate() {
            assert_abs_diff_eq!(spec.function_entry(|x| x, delta), r, epsilon = 1e-14);
        }
    }
}
