use super::di_map::RangeAzimuthMap;
use crate::error::{Error, Result};
use crate::real::Real;

pub const DEFAULT_REL_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection<T> {
    pub range_bin: usize,
    pub azimuth_bin: usize,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Localization<T> {
    /// Sorted by value, descending. Empty means no subjects were found.
    pub detections: Vec<Detection<T>>,
    /// `max(rel_threshold × map max, map noise floor)`.
    pub threshold: T,
}

impl<T> Localization<T> {
    pub fn no_subjects(&self) -> bool {
        self.detections.is_empty()
    }
}

/// 3×3 non-maximum suppression followed by thresholding. Plateaus are
/// resolved in favor of the lowest flat index so adjacent equal bins yield
/// one detection.
pub fn localize<T: Real>(map: &RangeAzimuthMap<T>, rel_threshold: f64, max_subjects: usize) -> Result<Localization<T>> {
    if !(rel_threshold > 0.0 && rel_threshold < 1.0) {
        return Err(Error::Param(format!("rel_threshold must lie in (0, 1), got {rel_threshold}")));
    }
    let (nk, nr) = (map.azimuths, map.bins);
    let threshold = (T::lit(rel_threshold) * map.max()).max(map.threshold_used);
    let mut detections = Vec::new();
    for k in 0..nk {
        for r in 0..nr {
            let v = map.get(k, r);
            if !(v > T::zero()) || v < threshold {
                continue;
            }
            let idx = k * nr + r;
            let mut is_max = true;
            'nb: for dk in -1i64..=1 {
                for dr in -1i64..=1 {
                    let (kk, rr) = (k as i64 + dk, r as i64 + dr);
                    if (dk == 0 && dr == 0) || kk < 0 || rr < 0 || kk >= nk as i64 || rr >= nr as i64 {
                        continue;
                    }
                    let (kk, rr) = (kk as usize, rr as usize);
                    let other = map.get(kk, rr);
                    let beaten = if kk * nr + rr < idx { other >= v } else { other > v };
                    if beaten {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                detections.push(Detection { range_bin: r, azimuth_bin: k, value: v });
            }
        }
    }
    detections.sort_by(|a, b| {
        b.value
            .partial_cmp(&a.value)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then((a.azimuth_bin, a.range_bin).cmp(&(b.azimuth_bin, b.range_bin)))
    });
    detections.truncate(max_subjects);
    Ok(Localization { detections, threshold })
}
