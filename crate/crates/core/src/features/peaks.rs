use super::{centered, check_band, Estimate};
use crate::error::{Error, Result};
use crate::real::Real;

/// Minimum prominence as a multiple of the signal's standard deviation.
pub const PEAK_PROMINENCE: f64 = 0.3;

/// Local maxima; a flat top counts once at its middle sample.
fn local_maxima(x: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < x.len() {
        if x[i] > x[i - 1] {
            let mut j = i;
            while j + 1 < x.len() && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < x.len() && x[j + 1] < x[i] {
                out.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Height above the higher of the two bases reached before a taller sample.
fn prominence(x: &[f64], p: usize) -> f64 {
    let h = x[p];
    let mut left = h;
    for &v in x[..p].iter().rev() {
        if v > h {
            break;
        }
        left = left.min(v);
    }
    let mut right = h;
    for &v in &x[p + 1..] {
        if v > h {
            break;
        }
        right = right.min(v);
    }
    h - left.max(right)
}

/// Peaks per second: local maxima with prominence ≥ 0.3·std, at least
/// `fs/band.1` samples apart (taller peaks claim their neighborhood first),
/// divided by `duration_s`.
pub fn peak_count_estimate<T: Real>(signal: &[T], fs: f64, band: (f64, f64), duration_s: f64) -> Result<Estimate> {
    check_band(fs, band)?;
    if !(duration_s > 0.0) {
        return Err(Error::Param(format!("observation time must be positive, got {duration_s}")));
    }
    let x = centered(signal);
    let std = (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt();
    let mut peaks: Vec<usize> =
        local_maxima(&x).into_iter().filter(|&p| prominence(&x, p) >= PEAK_PROMINENCE * std && std > 0.0).collect();
    peaks.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    let spacing = fs / band.1;
    let mut kept: Vec<usize> = Vec::new();
    for p in peaks {
        if kept.iter().all(|&q| (p.abs_diff(q) as f64) >= spacing) {
            kept.push(p);
        }
    }
    if kept.is_empty() {
        return Ok(Estimate::none());
    }
    Ok(Estimate::found(kept.len() as f64 / duration_s))
}
