use crate::{Error, Result};

/// Ordinary least-squares line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 when `y` has no variance.
    pub r_squared: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("x and y lengths differ"));
    }
    if xs.len() < 2 {
        return Err(Error::invalid("a line fit needs at least two points"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite coordinate in line fit"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("all x values coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

/// `y ≈ prefactor · x^exponent`, fitted as a line in log-log coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Root-mean-square residual of `ln y`.
    pub residual: f64,
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if let Some((x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::invalid(format!(
            "power-law fit needs positive coordinates, got ({x}, {y})"
        )));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let line = fit_line(&lx, &ly)?;
    let residual = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let r = y - (line.slope * x + line.intercept);
            r * r
        })
        .sum::<f64>()
        / lx.len() as f64)
        .sqrt();
    Ok(PowerLawFit {
        exponent: line.slope,
        prefactor: line.intercept.exp(),
        residual,
    })
}
