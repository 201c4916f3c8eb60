//! Inputs shared by the benchmarks.

use datadim_core::synth::sample_manifold;
use datadim_core::{Embedding, LabeledDataset, ManifoldKind, ManifoldSpec, Matrix};

/// Seeded hypercube sample of intrinsic dimension `d` in `R^n`.
pub fn cube(d: usize, n: usize, points: usize) -> Matrix {
    let spec = ManifoldSpec {
        intrinsic_dim: d,
        ambient_dim: n,
        kind: ManifoldKind::Hypercube,
        embedding: Embedding::RandomOrthogonal,
        n_points: points,
        seed: 1,
    };
    sample_manifold(&spec).expect("valid spec")
}

/// [`cube`] with two classes split at the median of the first coordinate.
pub fn labeled_cube(d: usize, n: usize, points: usize) -> LabeledDataset {
    let m = cube(d, n, points);
    let mut first: Vec<f64> = m.iter_rows().map(|r| r[0]).collect();
    first.sort_by(f64::total_cmp);
    let mid = first[points / 2];
    let labels = m.iter_rows().map(|r| u64::from(r[0] > mid)).collect();
    LabeledDataset::new(m, labels).expect("one label per row")
}
