/// Inverse-distance-weighted k-nearest-neighbor regressor over
/// standardized features.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub k: usize,
    pub samples: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
}

const EXACT: f64 = 1e-12;

impl KnnModel {
    pub fn predict(&self, z: &[f64]) -> f64 {
        let mut dist: Vec<(f64, usize)> = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| (s.iter().zip(z).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt(), i))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let near = &dist[..self.k.min(dist.len())];
        // a query on top of a training point takes that point's label
        let exact: Vec<f64> = near.iter().filter(|d| d.0 <= EXACT).map(|d| self.labels[d.1]).collect();
        if !exact.is_empty() {
            return exact.iter().sum::<f64>() / exact.len() as f64;
        }
        let (num, den) = near.iter().fold((0.0, 0.0), |(n, d), &(dist, i)| (n + self.labels[i] / dist, d + 1.0 / dist));
        num / den
    }
}
