use crate::error::{Error, Result};

pub(crate) const RIDGE: f64 = 1e-8;
pub(crate) const RIDGE_FALLBACK: f64 = 1e-4;
/// Cholesky pivots below this fraction of the largest diagonal entry mean
/// the normal equations are numerically singular.
const PIVOT_FLOOR: f64 = 1e-9;
/// Correction passes against the unregularized normal equations. Each
/// pass shrinks the ridge bias by about `ridge / eigenvalue`.
const REFINE_STEPS: usize = 2;

/// Least squares on standardized features: `y ≈ w₀ + Σ wᵢ zᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// Intercept first, then one weight per feature.
    pub weights: Vec<f64>,
    pub ridge: f64,
}

impl LinearModel {
    pub fn predict(&self, z: &[f64]) -> f64 {
        self.weights[0] + self.weights[1..].iter().zip(z).map(|(w, v)| w * v).sum::<f64>()
    }
}

/// In-place Cholesky solve of `a x = b`; `None` when a pivot collapses.
fn cholesky_solve(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    let scale = (0..n).map(|i| a[i * n + i]).fold(0.0, f64::max);
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > PIVOT_FLOOR * scale) {
            return None;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    Some(b)
}

fn solve(z: &[Vec<f64>], y: &[f64], ridge: f64, refine: bool) -> Option<Vec<f64>> {
    let p = z[0].len() + 1;
    let mut ata = vec![0.0; p * p];
    let mut aty = vec![0.0; p];
    let mut row = vec![1.0; p];
    for (zi, yi) in z.iter().zip(y) {
        row[1..].copy_from_slice(zi);
        for r in 0..p {
            aty[r] += row[r] * yi;
            for c in 0..p {
                ata[r * p + c] += row[r] * row[c];
            }
        }
    }
    let mut reg = ata.clone();
    // the intercept is not shrunk
    for i in 1..p {
        reg[i * p + i] += ridge;
    }
    let mut w = cholesky_solve(reg.clone(), aty.clone(), p)?;
    for _ in 0..if refine { REFINE_STEPS } else { 0 } {
        let resid: Vec<f64> = (0..p).map(|r| aty[r] - (0..p).map(|c| ata[r * p + c] * w[c]).sum::<f64>()).collect();
        let dw = cholesky_solve(reg.clone(), resid, p)?;
        w.iter_mut().zip(dw).for_each(|(a, d)| *a += d);
    }
    Some(w)
}

/// Returns the model and whether the fallback ridge was needed.
pub(crate) fn fit_linear(z: &[Vec<f64>], y: &[f64]) -> Result<(LinearModel, bool)> {
    if let Some(weights) = solve(z, y, RIDGE, true) {
        return Ok((LinearModel { weights, ridge: RIDGE }, false));
    }
    solve(z, y, RIDGE_FALLBACK, false)
        .map(|weights| (LinearModel { weights, ridge: RIDGE_FALLBACK }, true))
        .ok_or_else(|| Error::Param("normal equations singular even with fallback ridge".into()))
}
