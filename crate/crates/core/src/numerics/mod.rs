//! Shared numerical kernels.

mod circulant;
mod density;
mod expm;
mod fit;
mod minimize;
mod polylog;

pub(crate) use circulant::cos_table;
pub use circulant::{circulant_eigenvalues, validate_circulant_row, CirculantSpectrum};
pub use density::{density_from_samples, Density};
pub use expm::{expm_symmetric, RealSymmetricMatrix, SpectralExp};
pub use fit::{fit_line, fit_power_law, LineFit, PowerLawFit};
pub use minimize::{minimize_scalar, Minimum, COARSE_GRID_POINTS};
pub use polylog::{polylog_circle, polylog_circle_with_margin, DEFAULT_SINGULARITY_MARGIN};
