//! Synthetic data with known answers: point clouds on manifolds of known
//! dimension, half-space labelings with a guaranteed class gap, and scaling
//! records generated from the model-A law.
//!
//! Gaussian draws use `rand_distr::StandardNormal` (ziggurat); uniform draws
//! use `Rng::random::<f64>()` on [`crate::Rng`]. Both are fixed for a release,
//! so a spec and seed always produce the same bits.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::{rng_from_seed, Error, LabeledDataset, Matrix, Result, Rng, ScalingRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    /// Uniform on `[0, 1]^d`.
    Hypercube,
    /// Uniform on the unit sphere `S^d` in `R^(d+1)`.
    Hypersphere,
    /// `u` uniform on `[0, 1]^d`, each coordinate lifted to
    /// `(sin 2 pi u, cos 2 pi u)`: a flat torus curved through `R^(2d)`.
    SineLift,
}

impl ManifoldKind {
    /// Dimension of the coordinates before embedding.
    pub fn latent_dim(self, d: usize) -> usize {
        match self {
            ManifoldKind::Hypercube => d,
            ManifoldKind::Hypersphere => d + 1,
            ManifoldKind::SineLift => 2 * d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Embedding {
    /// Latent coordinates followed by zero columns.
    AxisAligned,
    /// Latent coordinates mapped through random orthonormal columns.
    RandomOrthogonal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifoldSpec {
    pub intrinsic_dim: usize,
    pub ambient_dim: usize,
    pub kind: ManifoldKind,
    pub embedding: Embedding,
    pub n_points: usize,
    pub seed: u64,
}

impl ManifoldSpec {
    pub fn validate(&self) -> Result<()> {
        let d = self.intrinsic_dim;
        if d == 0 || d > self.ambient_dim {
            return Err(Error::InvalidSpec(format!("need 1 <= d <= n, got d = {d}, n = {}", self.ambient_dim)));
        }
        let latent = self.kind.latent_dim(d);
        if latent > self.ambient_dim {
            return Err(Error::InvalidSpec(format!(
                "{:?} of dimension {d} needs ambient dimension >= {latent}",
                self.kind
            )));
        }
        if self.n_points == 0 {
            return Err(Error::InvalidSpec("n_points must be positive".into()));
        }
        Ok(())
    }
}

/// `dim` orthonormal vectors in `R^ambient` from Gram-Schmidt on Gaussian
/// draws (two orthogonalization passes).
pub fn random_orthonormal(ambient: usize, dim: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    assert!(dim <= ambient, "cannot fit {dim} orthonormal vectors in R^{ambient}");
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while basis.len() < dim {
        let mut v: Vec<f64> = (0..ambient).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
}

/// Maps each row `z` to `sum_l z_l * basis[l]`.
pub fn embed(latent: &Matrix, basis: &[Vec<f64>]) -> Result<Matrix> {
    if basis.len() != latent.cols() {
        return Err(Error::LengthMismatch { a: basis.len(), b: latent.cols() });
    }
    let ambient = basis.first().map_or(0, Vec::len);
    let mut data = vec![0.0; latent.rows() * ambient];
    for (z, out) in latent.iter_rows().zip(data.chunks_exact_mut(ambient)) {
        for (zl, b) in z.iter().zip(basis) {
            out.iter_mut().zip(b).for_each(|(o, bv)| *o += zl * bv);
        }
    }
    Matrix::new(latent.rows(), ambient, data)
}

/// Applies a random rotation and translation drawn from `seed`.
pub fn random_isometry(points: &Matrix, seed: u64) -> Result<Matrix> {
    let mut rng = rng_from_seed(seed);
    let n = points.cols();
    let rotation = random_orthonormal(n, n, &mut rng);
    let shift: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) * 3.0).collect();
    let rotated = embed(points, &rotation)?;
    let data = rotated.as_slice().chunks_exact(n).flat_map(|r| r.iter().zip(&shift).map(|(x, s)| x + s)).collect();
    Matrix::new(points.rows(), n, data)
}

fn sample_latent(spec: &ManifoldSpec, rng: &mut Rng) -> Result<Matrix> {
    let d = spec.intrinsic_dim;
    let latent = spec.kind.latent_dim(d);
    let mut data = Vec::with_capacity(spec.n_points * latent);
    for _ in 0..spec.n_points {
        match spec.kind {
            ManifoldKind::Hypercube => data.extend((0..d).map(|_| rng.random::<f64>())),
            ManifoldKind::Hypersphere => loop {
                let v: Vec<f64> = (0..latent).map(|_| rng.sample(StandardNormal)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    data.extend(v.iter().map(|x| x / norm));
                    break;
                }
            },
            ManifoldKind::SineLift => {
                for _ in 0..d {
                    let angle = std::f64::consts::TAU * rng.random::<f64>();
                    data.push(angle.sin());
                    data.push(angle.cos());
                }
            }
        }
    }
    Matrix::new(spec.n_points, latent, data)
}

/// Samples `spec.n_points` points of the described manifold in
/// `R^ambient_dim`. Random-orthogonal embeddings preserve all distances of
/// the latent cloud.
pub fn sample_manifold(spec: &ManifoldSpec) -> Result<Matrix> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let latent_dim = spec.kind.latent_dim(spec.intrinsic_dim);
    let basis = match spec.embedding {
        Embedding::RandomOrthogonal => Some(random_orthonormal(spec.ambient_dim, latent_dim, &mut rng)),
        Embedding::AxisAligned => None,
    };
    let latent = sample_latent(spec, &mut rng)?;
    match basis {
        Some(b) => embed(&latent, &b),
        None => {
            let pad = spec.ambient_dim - latent_dim;
            let data =
                latent.iter_rows().flat_map(|r| r.iter().copied().chain(std::iter::repeat_n(0.0, pad))).collect();
            Matrix::new(spec.n_points, spec.ambient_dim, data)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceLabeling {
    pub data: LabeledDataset,
    /// Rows of the input that survived the margin filter, ascending.
    pub kept_rows: Vec<usize>,
}

/// Labels `1` where `normal . x > threshold`, `0` elsewhere, after removing
/// every point closer than `margin` (in projection units) to the threshold.
/// Any two differently labeled survivors are then at least
/// `2 * margin / |normal|` apart.
pub fn label_halfspace(points: &Matrix, normal: &[f64], threshold: f64, margin: f64) -> Result<HalfspaceLabeling> {
    if normal.len() != points.cols() {
        return Err(Error::LengthMismatch { a: normal.len(), b: points.cols() });
    }
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::InvalidParameter(format!("margin must be nonnegative, got {margin}")));
    }
    if normal.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidParameter("normal must be nonzero".into()));
    }
    let mut kept_rows = Vec::new();
    let mut labels = Vec::new();
    for (i, x) in points.iter_rows().enumerate() {
        let p: f64 = x.iter().zip(normal).map(|(a, b)| a * b).sum();
        if (p - threshold).abs() < margin {
            continue;
        }
        kept_rows.push(i);
        labels.push(u64::from(p > threshold));
    }
    if !(labels.contains(&0) && labels.contains(&1)) {
        return Err(Error::AllRemoved);
    }
    let data = LabeledDataset::new(points.select_rows(&kept_rows)?, labels)?;
    Ok(HalfspaceLabeling { data, kept_rows })
}

/// Inputs of one synthetic scaling record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordSpec {
    pub n: u64,
    pub d_data: f64,
    pub k_f: f64,
}

/// Records following `ln L = -ln(N)/d_data + ln(k_f) + a_true + eps` with
/// `eps ~ N(0, noise_sd^2)` drawn from `seed`. Record `i` is named
/// `synth-i`.
pub fn synth_scaling_records(
    a_true: f64,
    specs: &[RecordSpec],
    noise_sd: f64,
    seed: u64,
) -> Result<Vec<ScalingRecord>> {
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) || !a_true.is_finite() {
        return Err(Error::InvalidSpec(format!("bad a_true {a_true} or noise_sd {noise_sd}")));
    }
    let mut rng = rng_from_seed(seed);
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if s.n < 2 || !(s.d_data > 0.0 && s.d_data.is_finite()) || !(s.k_f > 0.0 && s.k_f.is_finite()) {
                return Err(Error::InvalidSpec(format!("record {i}: {s:?}")));
            }
            let eps: f64 = rng.sample::<f64, _>(StandardNormal) * noise_sd;
            let log_loss = -(s.n as f64).ln() / s.d_data + s.k_f.ln() + a_true + eps;
            Ok(ScalingRecord::new(format!("synth-{i}"), s.n, s.d_data, s.k_f, log_loss.exp()))
        })
        .collect()
}
