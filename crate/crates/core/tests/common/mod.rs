//! Brute-force oracles shared by the integration tests. Each one evaluates a
//! definition directly and shares no code with the library path it checks.
#![allow(dead_code)]

use datadim_core::{rng_from_seed, Matrix};
use rand::Rng;

/// Plain sequential sum of squared differences.
pub fn naive_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    s.sqrt()
}

/// Per point, all other distances fully sorted, first `k` kept.
pub fn brute_knn(m: &Matrix, k: usize) -> Vec<Vec<f64>> {
    (0..m.rows())
        .map(|i| {
            let mut d: Vec<f64> = (0..m.rows()).filter(|&j| j != i).map(|j| naive_dist(m.row(i), m.row(j))).collect();
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            d.truncate(k);
            d
        })
        .collect()
}

pub fn brute_pairwise(m: &Matrix) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..m.rows() {
        for j in i + 1..m.rows() {
            out.push(naive_dist(m.row(i), m.row(j)));
        }
    }
    out
}

/// The inverted-average MLE formula evaluated on a brute-force table,
/// skipping points with a zero first distance.
pub fn direct_mle(m: &Matrix, k: usize) -> f64 {
    let table = brute_knn(m, k);
    let mut total = 0.0;
    let mut used = 0;
    for t in &table {
        if t[0] == 0.0 {
            continue;
        }
        for j in 0..k - 1 {
            total += (t[k - 1] / t[j]).ln();
        }
        used += 1;
    }
    1.0 / (total / (used as f64 * (k - 1) as f64))
}

/// Distance with the library's documented summation order: eight partial
/// sums, sum `l` taking features `l, l + 8, l + 16, ...` in order, combined
/// as `((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7))`. Written out
/// independently so exact-equality oracles can rely on it.
pub fn lane_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = [0.0f64; 8];
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        s[i % 8] += (x - y) * (x - y);
    }
    (((s[0] + s[1]) + (s[2] + s[3])) + ((s[4] + s[5]) + (s[6] + s[7]))).sqrt()
}

/// max over all ordered pairs of [y_i != y_j] / ||x_i - x_j||.
pub fn exhaustive_sharpness(m: &Matrix, labels: &[u64]) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..m.rows() {
        for j in 0..m.rows() {
            if labels[i] != labels[j] {
                best = best.max(1.0 / lane_dist(m.row(i), m.row(j)));
            }
        }
    }
    best
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = rng_from_seed(seed);
    Matrix::new(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
