use crate::{Error, Result};

/// Number of points in the coarse scan that precedes golden-section
/// refinement.
pub const COARSE_GRID_POINTS: usize = 64;

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const MAX_GOLDEN_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

fn checked<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation(format!(
            "objective returned {v} at x = {x}"
        )))
    }
}

/// Minimises `f` on `[lo, hi]`.
///
/// A uniform scan of [`COARSE_GRID_POINTS`] points locates the best basin;
/// golden-section search then refines inside the two neighbouring cells until
/// the bracket is narrower than `tol`. The returned value is never larger
/// than the best scanned value.
pub fn minimize_scalar<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<Minimum> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid(format!("invalid bracket [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let n = COARSE_GRID_POINTS;
    let step = (hi - lo) / (n - 1) as f64;
    let mut best = Minimum {
        x: lo,
        value: checked(&mut f, lo)?,
    };
    let mut best_idx = 0;
    for i in 1..n {
        let x = if i == n - 1 { hi } else { lo + step * i as f64 };
        let v = checked(&mut f, x)?;
        if v < best.value {
            best = Minimum { x, value: v };
            best_idx = i;
        }
    }

    let mut a = lo + step * best_idx.saturating_sub(1) as f64;
    let mut b = if best_idx + 1 >= n {
        hi
    } else {
        lo + step * (best_idx + 1) as f64
    };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = checked(&mut f, c)?;
    let mut fd = checked(&mut f, d)?;
    for _ in 0..MAX_GOLDEN_ITER {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = checked(&mut f, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = checked(&mut f, d)?;
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v < best.value {
            best = Minimum { x, value: v };
        }
    }
    Ok(best)
}
