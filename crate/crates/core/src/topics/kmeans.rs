//! K-means with k-means++ seeding and Lloyd iterations.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::TopicError;
use crate::linalg::squared_distance;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    /// Inertia after each assignment step.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
    pub seed: u64,
}

impl ClusterModel {
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == cluster)
            .collect()
    }
}

pub fn distinct_points(points: &[Vec<f64>]) -> usize {
    let mut keys: Vec<Vec<u64>> = points
        .iter()
        .map(|p| p.iter().map(|v| (v + 0.0).to_bits()).collect())
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

/// Nearest centroid, ties to the lowest index.
fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared_distance(p, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus(points: &[Vec<f64>], k: usize, rng: &mut rng::Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.gen_range(0..n)].clone()];
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let mut u = rng.gen::<f64>() * total;
        let mut pick = None;
        for (i, &d) in d2.iter().enumerate() {
            if d > 0.0 {
                pick = Some(i);
                if u < d {
                    break;
                }
                u -= d;
            }
        }
        let chosen = points[pick.expect("k does not exceed the distinct points")].clone();
        for (slot, p) in d2.iter_mut().zip(points) {
            *slot = slot.min(squared_distance(p, &chosen));
        }
        centroids.push(chosen);
    }
    centroids
}

fn update(points: &[Vec<f64>], assignments: &mut [usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments.iter()) {
        counts[a] += 1;
        sums[a].iter_mut().zip(p).for_each(|(s, v)| *s += v);
    }
    for c in 0..k {
        if counts[c] > 0 {
            continue;
        }
        // Empty cluster: take the point farthest from its centroid in the
        // largest cluster.
        let largest = (0..k)
            .max_by_key(|&j| (counts[j], std::cmp::Reverse(j)))
            .unwrap();
        let mut far = None;
        let mut far_d = -1.0;
        for (i, p) in points.iter().enumerate() {
            if assignments[i] == largest {
                let d = squared_distance(p, &centroids[largest]);
                if d > far_d {
                    far_d = d;
                    far = Some(i);
                }
            }
        }
        let i = far.expect("largest cluster is non-empty");
        assignments[i] = c;
        counts[largest] -= 1;
        counts[c] = 1;
        sums[largest]
            .iter_mut()
            .zip(&points[i])
            .for_each(|(s, v)| *s -= v);
        sums[c] = points[i].clone();
    }
    for c in 0..k {
        let n = counts[c] as f64;
        centroids[c] = sums[c].iter().map(|s| s / n).collect();
    }
}

pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<ClusterModel, TopicError> {
    if k == 0 {
        return Err(TopicError::ZeroClusters);
    }
    let distinct = distinct_points(points);
    if k > distinct {
        return Err(TopicError::TooManyClusters { k, distinct });
    }
    let mut rng = rng::seeded(seed);
    let mut centroids = plus_plus(points, k, &mut rng);
    let mut assignments: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        let mut next = Vec::with_capacity(points.len());
        let mut inertia = 0.0;
        for p in points {
            let (c, d) = nearest(p, &centroids);
            next.push(c);
            inertia += d;
        }
        trace.push(inertia);
        let stable = next == assignments;
        assignments = next;
        if stable || iterations >= max_iters {
            break;
        }
        iterations += 1;
        update(points, &mut assignments, &mut centroids);
    }
    Ok(ClusterModel {
        k,
        centroids,
        assignments,
        inertia: *trace.last().expect("at least one assignment step"),
        inertia_trace: trace,
        iterations,
        seed,
    })
}

/// Lowest-inertia run over `restarts` seeds derived from `seed`.
pub fn kmeans_best_of(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iters: usize,
    restarts: usize,
) -> Result<ClusterModel, TopicError> {
    let mut best = kmeans(points, k, seed, max_iters)?;
    for r in 1..restarts {
        let run = kmeans(points, k, seed.wrapping_add(r as u64 * 7919), max_iters)?;
        if run.inertia < best.inertia {
            best = run;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_equals_n() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 5.0]];
        let m = kmeans(&pts, 3, 1, 100).unwrap();
        assert_eq!(m.inertia, 0.0);
        let mut a = m.assignments.clone();
        a.sort();
        assert_eq!(a, vec![0, 1, 2]);
    }

    #[test]
    fn too_many_clusters() {
        let pts = vec![vec![1.0], vec![1.0], vec![2.0]];
        assert_eq!(
            kmeans(&pts, 3, 0, 10).unwrap_err(),
            TopicError::TooManyClusters { k: 3, distinct: 2 }
        );
    }

    #[test]
    fn empty_cluster_is_repaired() {
        let pts = vec![vec![0.0], vec![0.1], vec![0.2], vec![10.0]];
        let mut assignments = vec![0, 0, 0, 0];
        let mut centroids = vec![vec![2.575], vec![100.0]];
        update(&pts, &mut assignments, &mut centroids);
        assert_eq!(assignments, vec![0, 0, 0, 1]);
        assert_eq!(centroids[1], vec![10.0]);
        assert!((centroids[0][0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        assert_eq!(nearest(&[0.0], &[vec![1.0], vec![-1.0]]).0, 0);
    }
}
