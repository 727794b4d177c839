use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Result};

/// Dense real symmetric matrix, stored row-major.
///
/// Symmetry is exact: `get(i, j)` and `get(j, i)` are the same bits.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSymmetricMatrix {
    order: usize,
    entries: Vec<f64>,
}

impl RealSymmetricMatrix {
    pub fn new(order: usize, entries: Vec<f64>) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("matrix order must be positive"));
        }
        if entries.len() != order * order {
            return Err(Error::invalid(format!(
                "expected {} entries for order {order}, got {}",
                order * order,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite entry at ({}, {})",
                pos / order,
                pos % order
            )));
        }
        for i in 0..order {
            for j in (i + 1)..order {
                if entries[i * order + j].to_bits() != entries[j * order + i].to_bits() {
                    return Err(Error::invalid(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(RealSymmetricMatrix { order, entries })
    }

    /// Builds the matrix from the upper triangle `f(i, j)`, `i <= j`, mirrored.
    pub fn from_upper<F: FnMut(usize, usize) -> f64>(order: usize, mut f: F) -> Result<Self> {
        let mut entries = vec![0.0; order * order];
        for i in 0..order {
            for j in i..order {
                let v = f(i, j);
                entries[i * order + j] = v;
                entries[j * order + i] = v;
            }
        }
        Self::new(order, entries)
    }

    pub fn zeros(order: usize) -> Self {
        RealSymmetricMatrix {
            order,
            entries: vec![0.0; order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.entries[i * order + i] = 1.0;
        }
        m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.order..(i + 1) * self.order]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.order, self.order, &self.entries)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.order);
        (0..self.order)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest absolute row sum, an upper bound on the spectral norm.
    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.order)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Eigendecomposition `M = V diag(λ) Vᵀ` kept around so that `exp(sM)` can be
/// evaluated for many `s` without refactorising.
#[derive(Debug, Clone)]
pub struct SpectralExp {
    eigenvalues: Vec<f64>,
    // column k is the eigenvector for eigenvalues[k]
    eigenvectors: DMatrix<f64>,
}

impl SpectralExp {
    pub fn new(m: &RealSymmetricMatrix) -> Result<Self> {
        let eig = SymmetricEigen::try_new(m.to_dmatrix(), f64::EPSILON, 0).ok_or_else(|| {
            Error::Evaluation("symmetric eigensolver did not converge".to_string())
        })?;
        Ok(SpectralExp {
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Entry `(i, j)` of `exp(sM)`.
    pub fn entry(&self, s: f64, i: usize, j: usize) -> f64 {
        let v = &self.eigenvectors;
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &lam)| v[(i, k)] * (s * lam).exp() * v[(j, k)])
            .sum()
    }

    /// Row `i` of `exp(sM)`.
    pub fn row(&self, s: f64, i: usize) -> Vec<f64> {
        let n = self.order();
        let v = &self.eigenvectors;
        let weights: Vec<f64> = self
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &lam)| v[(i, k)] * (s * lam).exp())
            .collect();
        (0..n)
            .map(|j| (0..n).map(|k| weights[k] * v[(j, k)]).sum())
            .collect()
    }

    pub fn matrix(&self, s: f64) -> Result<RealSymmetricMatrix> {
        let n = self.order();
        let mut scaled = self.eigenvectors.clone();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = (s * lam).exp();
            scaled.column_mut(k).scale_mut(w);
        }
        let full = scaled * self.eigenvectors.transpose();
        RealSymmetricMatrix::from_upper(n, |i, j| full[(i, j)])
    }
}

/// `exp(s·M)` for a real symmetric `M`.
pub fn expm_symmetric(m: &RealSymmetricMatrix, s: f64) -> Result<RealSymmetricMatrix> {
    if !s.is_finite() {
        return Err(Error::invalid(format!(
            "scale factor must be finite, got {s}"
        )));
    }
    SpectralExp::new(m)?.matrix(s)
}
