use crate::{Error, Result};

/// Normalised histogram density.
///
/// `density[i]` is the fraction of samples in bin `i` divided by the bin
/// width, so that `Σ density·width + out_of_range_mass = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub out_of_range_mass: f64,
}

impl Density {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn integral(&self) -> f64 {
        self.edges
            .windows(2)
            .zip(&self.density)
            .map(|(w, d)| d * (w[1] - w[0]))
            .sum()
    }
}

/// Histograms `samples` over the bins delimited by `edges`.
///
/// Bins are half-open `[e_i, e_{i+1})` except the last, which is closed.
pub fn density_from_samples(samples: &[f64], edges: &[f64]) -> Result<Density> {
    if samples.is_empty() {
        return Err(Error::invalid("no samples to histogram"));
    }
    if edges.len() < 2 {
        return Err(Error::invalid("need at least two bin edges"));
    }
    if edges.iter().any(|e| !e.is_finite()) {
        return Err(Error::invalid("non-finite bin edge"));
    }
    if edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("bin widths must be positive"));
    }
    let bins = edges.len() - 1;
    let lo = edges[0];
    let hi = edges[bins];
    let mut counts = vec![0usize; bins];
    let mut outside = 0usize;
    for &s in samples {
        if !(s >= lo && s <= hi) {
            outside += 1;
            continue;
        }
        // first edge strictly greater than s, minus one
        let idx = edges.partition_point(|&e| e <= s);
        let bin = idx.saturating_sub(1).min(bins - 1);
        counts[bin] += 1;
    }
    let total = samples.len() as f64;
    let density = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, w)| c as f64 / (total * (w[1] - w[0])))
        .collect();
    Ok(Density {
        edges: edges.to_vec(),
        density,
        out_of_range_mass: outside as f64 / total,
    })
}
