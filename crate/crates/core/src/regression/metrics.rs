use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub r2: f64,
    pub mae: f64,
    /// Labels had zero variance; `r2` is reported as 0.
    pub r2_undefined: bool,
}

/// `R² = 1 − Σ(z − ẑ)² / Σ(z − z̄)²` and `MAE = Σ|z − ẑ| / n`.
pub fn evaluate(preds: &[f64], labels: &[f64]) -> Result<Metrics> {
    if preds.len() != labels.len() || labels.is_empty() {
        return Err(Error::Shape(format!(
            "evaluate needs equal non-empty lengths, got {} predictions and {} labels",
            preds.len(),
            labels.len()
        )));
    }
    let n = labels.len() as f64;
    let mean = labels.iter().sum::<f64>() / n;
    let ss_tot: f64 = labels.iter().map(|z| (z - mean).powi(2)).sum();
    let ss_res: f64 = preds.iter().zip(labels).map(|(p, z)| (z - p).powi(2)).sum();
    let mae = preds.iter().zip(labels).map(|(p, z)| (z - p).abs()).sum::<f64>() / n;
    if ss_tot == 0.0 {
        return Ok(Metrics { r2: 0.0, mae, r2_undefined: true });
    }
    Ok(Metrics { r2: 1.0 - ss_res / ss_tot, mae, r2_undefined: false })
}
