use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::scene::derive_seed;

pub(crate) const TREES: usize = 100;
pub(crate) const FEATURES_PER_SPLIT: usize = 3;
pub(crate) const MIN_LEAF: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Leaf(f64),
    /// Samples with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
}

impl ForestModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn mean(&self, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| self.y[i]).sum::<f64>() / idx.len() as f64
    }

    /// Best variance-reducing split over a random feature subset:
    /// `(feature, threshold, left count)` with `idx` sorted on that feature.
    fn best_split(&mut self, idx: &mut [usize]) -> Option<(usize, f64, usize)> {
        let nf = self.x[0].len();
        let mut feats: Vec<usize> = (0..nf).collect();
        let take = FEATURES_PER_SPLIT.min(nf);
        for i in 0..take {
            let j = self.rng.random_range(i..nf);
            feats.swap(i, j);
        }
        let n = idx.len();
        let total: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let parent = total * total / n as f64;
        let mut best: Option<(f64, usize, f64, usize)> = None;
        for &f in &feats[..take] {
            idx.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut left = 0.0;
            for cut in 1..n {
                left += self.y[idx[cut - 1]];
                let (lo, hi) = (self.x[idx[cut - 1]][f], self.x[idx[cut]][f]);
                if cut < MIN_LEAF || n - cut < MIN_LEAF || lo == hi {
                    continue;
                }
                let right = total - left;
                let gain = left * left / cut as f64 + right * right / (n - cut) as f64 - parent;
                if gain > 1e-12 * parent.abs().max(1.0) && best.is_none_or(|b| gain > b.0) {
                    best = Some((gain, f, 0.5 * (lo + hi), cut));
                }
            }
        }
        let (_, f, threshold, _) = best?;
        idx.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
        let cut = idx.iter().take_while(|&&i| self.x[i][f] <= threshold).count();
        Some((f, threshold, cut))
    }

    fn grow(&mut self, idx: &mut [usize]) -> usize {
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf(self.mean(idx)));
        if idx.len() < 2 * MIN_LEAF {
            return at;
        }
        let Some((feature, threshold, cut)) = self.best_split(idx) else {
            return at;
        };
        let (l, r) = idx.split_at_mut(cut);
        let left = self.grow(l);
        let right = self.grow(r);
        self.nodes[at] = Node::Split { feature, threshold, left, right };
        at
    }
}

fn fit_tree(x: &[Vec<f64>], y: &[f64], seed: u64) -> Tree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let mut b = Builder { x, y, rng, nodes: Vec::new() };
    b.grow(&mut idx);
    Tree { nodes: b.nodes }
}

/// Bootstrap forest; tree `t` draws from its own stream derived from
/// `seed`, so the result does not depend on thread scheduling.
pub(crate) fn fit_forest(x: &[Vec<f64>], y: &[f64], seed: u64) -> ForestModel {
    let trees = (0..TREES).into_par_iter().map(|t| fit_tree(x, y, derive_seed(seed, t as u64))).collect();
    ForestModel { trees }
}
