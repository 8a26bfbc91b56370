//! Random forest of CART trees with Gini splits, used to rank uniform bands.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::samples::Samples;
use crate::seed;
use crate::spectra::{ClassLabel, EnergyMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Features tried per split; `⌈√p⌉` when unset.
    pub features_per_split: Option<usize>,
    pub seed: u64,
}

impl Default for RfConfig {
    fn default() -> Self {
        RfConfig {
            n_trees: 200,
            max_depth: 8,
            features_per_split: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Leaf {
        class: ClassLabel,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> ClassLabel {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomForest {
    trees: Vec<Tree>,
    importance: Vec<f64>,
}

impl RandomForest {
    /// Total Gini decrease per feature, normalised to sum to one.
    pub fn importance(&self) -> &[f64] {
        &self.importance
    }

    /// Majority vote; a tie goes to class A.
    pub fn predict(&self, x: &[f64]) -> ClassLabel {
        let b = self
            .trees
            .iter()
            .filter(|t| t.predict(x) == ClassLabel::B)
            .count();
        if 2 * b > self.trees.len() {
            ClassLabel::B
        } else {
            ClassLabel::A
        }
    }
}

fn gini(n_a: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let p = n_a / n;
    2.0 * p * (1.0 - p)
}

struct Builder<'a> {
    x: &'a Samples,
    y: &'a [ClassLabel],
    mtry: usize,
    max_depth: usize,
    nodes: Vec<Node>,
    importance: Vec<f64>,
}

impl Builder<'_> {
    fn majority(&self, idx: &[usize]) -> ClassLabel {
        let b = idx.iter().filter(|&&i| self.y[i] == ClassLabel::B).count();
        if 2 * b > idx.len() {
            ClassLabel::B
        } else {
            ClassLabel::A
        }
    }

    fn grow<R: Rng>(&mut self, idx: Vec<usize>, depth: usize, rng: &mut R) -> usize {
        let me = self.nodes.len();
        self.nodes.push(Node::Leaf {
            class: self.majority(&idx),
        });
        let n = idx.len() as f64;
        let n_a = idx.iter().filter(|&&i| self.y[i] == ClassLabel::A).count() as f64;
        let parent = gini(n_a, n);
        if depth >= self.max_depth || parent == 0.0 || idx.len() < 2 {
            return me;
        }

        let p = self.x.dim();
        let features = sample(rng, p, self.mtry.min(p));
        // (decrease, feature, threshold)
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = idx.clone();
        for f in features.iter() {
            order.sort_by(|&a, &b| self.x.row(a)[f].total_cmp(&self.x.row(b)[f]));
            let mut left_a = 0.0;
            for s in 1..order.len() {
                if self.y[order[s - 1]] == ClassLabel::A {
                    left_a += 1.0;
                }
                let lo = self.x.row(order[s - 1])[f];
                let hi = self.x.row(order[s])[f];
                if lo == hi {
                    continue;
                }
                let nl = s as f64;
                let nr = n - nl;
                let child = (nl * gini(left_a, nl) + nr * gini(n_a - left_a, nr)) / n;
                let dec = parent - child;
                if best.is_none_or(|b| dec > b.0) {
                    best = Some((dec, f, 0.5 * (lo + hi)));
                }
            }
        }
        let Some((dec, feature, threshold)) = best else {
            return me;
        };
        if dec <= 0.0 {
            return me;
        }
        self.importance[feature] += n * dec;
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| self.x.row(i)[feature] <= threshold);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[me] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        me
    }
}

/// Trains `n_trees` trees on bootstrap resamples. Tree `t` draws from its
/// own derived stream, so results do not depend on the thread count.
pub fn train_forest(x: &Samples, y: &[ClassLabel], cfg: &RfConfig) -> Result<RandomForest> {
    if cfg.n_trees == 0 {
        return Err(Error::InvalidParameter("n_trees must be at least 1".into()));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if !(y.contains(&ClassLabel::A) && y.contains(&ClassLabel::B)) {
        return Err(Error::InsufficientData(
            "random forest needs both classes".into(),
        ));
    }
    let p = x.dim();
    let mtry = cfg
        .features_per_split
        .unwrap_or_else(|| (p as f64).sqrt().ceil() as usize)
        .clamp(1, p);
    let n = x.len();
    let grown: Vec<(Tree, Vec<f64>)> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng(cfg.seed, seed::domain::FOREST, t as u64);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut b = Builder {
                x,
                y,
                mtry,
                max_depth: cfg.max_depth,
                nodes: Vec::new(),
                importance: vec![0.0; p],
            };
            b.grow(idx, 0, &mut rng);
            (Tree { nodes: b.nodes }, b.importance)
        })
        .collect();
    let mut importance = vec![0.0; p];
    let mut trees = Vec::with_capacity(grown.len());
    for (tree, imp) in grown {
        for (a, b) in importance.iter_mut().zip(imp) {
            *a += b;
        }
        trees.push(tree);
    }
    let total: f64 = importance.iter().sum();
    if total > 0.0 {
        importance.iter_mut().for_each(|v| *v /= total);
    } else {
        importance.iter_mut().for_each(|v| *v = 1.0 / p as f64);
    }
    Ok(RandomForest { trees, importance })
}

/// Gini importance of every band of `energies`.
pub fn rf_importance(energies: &EnergyMatrix, cfg: &RfConfig) -> Result<Vec<f64>> {
    Ok(train_forest(energies.values(), energies.labels(), cfg)?.importance)
}
