//! K-means with k-means++ seeding, used to initialise EM.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::samples::Samples;

const MAX_LLOYD_ITERATIONS: usize = 300;

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansInit {
    pub means: Vec<Vec<f64>>,
    /// Fraction of points in each cluster.
    pub weights: Vec<f64>,
    pub assignments: Vec<usize>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's iterations from k-means++ seeds. Deterministic for a given
/// `seed`; a cluster that empties out is re-seeded with the point lying
/// farthest from its own centroid.
pub fn kmeans_init(points: &Samples, k: usize, seed: u64) -> Result<KMeansInit> {
    let n = points.len();
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if n < k {
        return Err(Error::InsufficientData(format!(
            "{n} points cannot form {k} clusters"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_seeds(points, k, &mut rng);
    let mut assignments = vec![usize::MAX; n];
    let mut iterations = 0;

    for it in 1..=MAX_LLOYD_ITERATIONS {
        iterations = it;
        let mut next: Vec<usize> = points.rows().map(|x| nearest(&centroids, x).0).collect();
        fill_empty(points, &mut centroids, &mut next, k);
        let stable = next == assignments;
        assignments = next;
        if stable {
            break;
        }
        centroids = cluster_means(points, &assignments, k, &centroids);
    }

    let mut counts = vec![0usize; k];
    for &a in &assignments {
        counts[a] += 1;
    }
    Ok(KMeansInit {
        means: centroids,
        weights: counts.iter().map(|&c| c as f64 / n as f64).collect(),
        assignments,
        iterations,
    })
}

fn plus_plus_seeds(points: &Samples, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points.row(rng.random_range(0..n)).to_vec()];
    let mut d2: Vec<f64> = points.rows().map(|x| sq_dist(x, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    idx = i;
                    break;
                }
                u -= w;
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        let c = points.row(pick).to_vec();
        for (d, x) in d2.iter_mut().zip(points.rows()) {
            *d = d.min(sq_dist(x, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn nearest(centroids: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn fill_empty(points: &Samples, centroids: &mut [Vec<f64>], assignments: &mut [usize], k: usize) {
    let mut counts = vec![0usize; k];
    for &a in assignments.iter() {
        counts[a] += 1;
    }
    for j in 0..k {
        if counts[j] > 0 {
            continue;
        }
        let mut donor = None;
        let mut far = -1.0;
        for (i, x) in points.rows().enumerate() {
            let a = assignments[i];
            if counts[a] > 1 {
                let d = sq_dist(x, &centroids[a]);
                if d > far {
                    far = d;
                    donor = Some(i);
                }
            }
        }
        // n >= k guarantees some cluster has a spare point.
        let i = donor.expect("a cluster with more than one point");
        counts[assignments[i]] -= 1;
        assignments[i] = j;
        counts[j] = 1;
        centroids[j] = points.row(i).to_vec();
    }
}

fn cluster_means(
    points: &Samples,
    assignments: &[usize],
    k: usize,
    previous: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let d = points.dim();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (x, &a) in points.rows().zip(assignments) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(x) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(counts)
        .enumerate()
        .map(|(j, (s, c))| {
            if c == 0 {
                previous[j].clone()
            } else {
                s.into_iter().map(|v| v / c as f64).collect()
            }
        })
        .collect()
}
