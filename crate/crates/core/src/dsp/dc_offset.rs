use num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::Real;

const MAX_ITER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcStatus {
    Converged,
    /// Gauss–Newton did not settle; the input is returned unchanged.
    NotConverged,
    /// Radius collapsed or the points are collinear/identical; the mean was removed instead.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFit<T> {
    pub center: Complex<T>,
    pub radius: T,
    /// RMS geometric distance of the points from the fitted circle.
    pub rms_residual: T,
    pub iterations: usize,
    pub status: DcStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcCorrection<T> {
    pub corrected: Vec<Complex<T>>,
    pub fit: CircleFit<T>,
}

impl<T: Real> DcCorrection<T> {
    pub fn flagged(&self) -> bool {
        self.fit.status != DcStatus::Converged
    }
}

fn solve3<T: Real>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() <= T::epsilon() * T::lit(1e-3) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for c in col..3 {
                let t = a[col][c];
                a[row][c] -= f * t;
            }
            let t = b[col];
            b[row] -= f * t;
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for c in row + 1..3 {
            s -= a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Kåsa algebraic fit on normalized points: minimizes Σ(x²+y²+Dx+Ey+F)².
fn kasa<T: Real>(pts: &[(T, T)]) -> Option<(T, T, T)> {
    let mut ata = [[T::zero(); 3]; 3];
    let mut atb = [T::zero(); 3];
    for &(x, y) in pts {
        let row = [x, y, T::one()];
        let rhs = -(x * x + y * y);
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * rhs;
        }
    }
    let [d, e, f] = solve3(ata, atb)?;
    let half = T::lit(0.5);
    let (a, b) = (-d * half, -e * half);
    let r2 = a * a + b * b - f;
    (r2 > T::zero()).then(|| (a, b, r2.sqrt()))
}

/// Circle fit: Kåsa initialization, then Gauss–Newton on the geometric
/// distance `Σ(|p − c| − R)²`.
pub fn fit_circle<T: Real>(series: &[Complex<T>]) -> Result<CircleFit<T>> {
    if series.len() < 8 {
        return Err(Error::Param(format!("circle fit needs at least 8 samples, got {}", series.len())));
    }
    let n = T::from_usize_lossy(series.len());
    let mean = series.iter().fold(Complex::new(T::zero(), T::zero()), |a, b| a + b) / n;
    let scale = (series.iter().map(|p| (p - mean).norm_sqr()).sum::<T>() / n).sqrt();
    let degenerate = CircleFit { center: mean, radius: T::zero(), rms_residual: scale, iterations: 0, status: DcStatus::Degenerate };
    if !(scale > T::zero()) || !scale.is_finite() {
        return Ok(degenerate);
    }
    let pts: Vec<(T, T)> = series.iter().map(|p| ((p.re - mean.re) / scale, (p.im - mean.im) / scale)).collect();
    let Some((mut a, mut b, mut r)) = kasa(&pts) else {
        return Ok(degenerate);
    };
    let tol = T::epsilon().sqrt() * T::lit(1e-2);
    let mut status = DcStatus::NotConverged;
    let mut iterations = 0;
    for it in 1..=MAX_ITER {
        iterations = it;
        let mut jtj = [[T::zero(); 3]; 3];
        let mut jtr = [T::zero(); 3];
        for &(x, y) in &pts {
            let (dx, dy) = (x - a, y - b);
            let d = (dx * dx + dy * dy).sqrt();
            if d == T::zero() {
                continue;
            }
            let row = [-dx / d, -dy / d, -T::one()];
            let res = d - r;
            for i in 0..3 {
                for j in 0..3 {
                    jtj[i][j] += row[i] * row[j];
                }
                jtr[i] += row[i] * res;
            }
        }
        let Some(step) = solve3(jtj, [-jtr[0], -jtr[1], -jtr[2]]) else {
            break;
        };
        a += step[0];
        b += step[1];
        r += step[2];
        let size = (step[0] * step[0] + step[1] * step[1] + step[2] * step[2]).sqrt();
        if size <= tol * (T::one() + (a * a + b * b).sqrt()) {
            status = DcStatus::Converged;
            break;
        }
    }
    let center = Complex::new(mean.re + a * scale, mean.im + b * scale);
    let radius = r.abs() * scale;
    if status == DcStatus::Converged && radius < T::lit(1e-12) {
        return Ok(degenerate);
    }
    let rms_residual = (pts
        .iter()
        .map(|&(x, y)| {
            let d = ((x - a) * (x - a) + (y - b) * (y - b)).sqrt() - r;
            d * d
        })
        .sum::<T>()
        / n)
        .sqrt()
        * scale;
    Ok(CircleFit { center, radius, rms_residual, iterations, status })
}

/// Removes the fitted circle center from a slow-time series.
pub fn dc_offset_correct<T: Real>(series: &[Complex<T>]) -> Result<DcCorrection<T>> {
    let fit = fit_circle(series)?;
    let corrected = match fit.status {
        DcStatus::Converged | DcStatus::Degenerate => series.iter().map(|p| p - fit.center).collect(),
        DcStatus::NotConverged => series.to_vec(),
    };
    Ok(DcCorrection { corrected, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn arc(center: (f64, f64), radius: f64, span: f64, n: usize) -> Vec<Complex<f64>> {
        (0..n)
            .map(|i| {
                let t = span * i as f64 / (n - 1) as f64;
                Complex::new(center.0 + radius * t.cos(), center.1 + radius * t.sin())
            })
            .collect()
    }

    #[test]
    fn noiseless_quarter_arc() {
        let s = arc((0.5, 0.3), 1.0, std::f64::consts::FRAC_PI_2, 256);
        let fit = fit_circle(&s).unwrap();
        assert_eq!(fit.status, DcStatus::Converged);
        assert!((fit.center - Complex::new(0.5, 0.3)).norm() < 1e-6);
        assert!((fit.radius - 1.0).abs() < 1e-6);
    }

    #[test]
    fn centered_input_stays_put() {
        let s = arc((0.0, 0.0), 0.7, 4.0, 128);
        let out = dc_offset_correct(&s).unwrap();
        assert!(out.fit.center.norm() <= 1e-9);
        for (a, b) in out.corrected.iter().zip(&s) {
            assert!((a - b).norm() <= 1e-9);
        }
    }

    #[test]
    fn noisy_arc_monte_carlo() {
        let noise = Normal::new(0.0, 0.01).unwrap();
        let mut errs: Vec<f64> = (0..100u64)
            .map(|seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let s: Vec<_> = arc((0.5, 0.3), 1.0, std::f64::consts::FRAC_PI_2, 256)
                    .into_iter()
                    .map(|p| p + Complex::new(noise.sample(&mut rng), noise.sample(&mut rng)))
                    .collect();
                (fit_circle(&s).unwrap().center - Complex::new(0.5, 0.3)).norm()
            })
            .collect();
        errs.sort_by(f64::total_cmp);
        assert!(errs[94] <= 0.02, "p95 {}", errs[94]);
    }

    #[test]
    fn single_point_is_degenerate() {
        let s = vec![Complex::new(0.2, -0.1); 16];
        let out = dc_offset_correct(&s).unwrap();
        assert_eq!(out.fit.status, DcStatus::Degenerate);
        assert!(out.corrected.iter().all(|p| p.norm() < 1e-15));
    }

    #[test]
    fn idempotent() {
        let s = arc((1.5, -0.4), 0.3, 2.0, 200);
        let once = dc_offset_correct(&s).unwrap();
        let twice = fit_circle(&once.corrected).unwrap();
        assert!(twice.center.norm() <= 1e-9);
    }

    #[test]
    fn short_input_rejected() {
        assert!(fit_circle(&[Complex::new(1.0f64, 0.0); 4]).is_err());
    }

    #[test]
    fn works_in_f32() {
        let s: Vec<Complex<f32>> = arc((0.5, 0.3), 1.0, 1.5, 128)
            .into_iter()
            .map(|p| Complex::new(p.re as f32, p.im as f32))
            .collect();
        let fit = fit_circle(&s).unwrap();
        assert!((fit.center - Complex::new(0.5f32, 0.3)).norm() < 1e-3);
    }
}
