//! Intrinsic properties of datasets and the analyses built on them.
//!
//! The crate estimates the intrinsic dimension of a point cloud (MLE and
//! TwoNN, both on top of an exact k-nearest-neighbor kernel), the label
//! sharpness of a labeled dataset (the largest ratio of label change to input
//! distance over sampled pairs), and fits generalization scaling laws whose
//! regressors are those measured quantities.
//!
//! Module map:
//!
//! * [`dataio`]: IPMX matrices, label and scaling-record CSVs, binary PGM/PPM
//!   images and their preprocessing.
//! * [`knn`]: exact blocked nearest-neighbor search and pairwise distances.
//! * [`id`]: intrinsic dimension estimators.
//! * [`sharpness`]: label sharpness, binary, multi-class and class-paired.
//! * [`scaling`]: scaling-law fits, likelihood ratio, correlation, robustness
//!   bound, dimension check and task ranking.
//! * [`synth`]: synthetic manifolds and labelings with known answers.

pub mod dataio;
mod error;
pub mod id;
pub mod knn;
mod matrix;
pub mod scaling;
pub mod sharpness;
pub mod synth;

pub use error::{Error, Result};
pub use matrix::{LabeledDataset, Matrix};

pub use dataio::{ImageDims, IpmxDtype, ScalingRecord};
pub use id::{IdEstimate, IdEstimator, TwoNnVariant};
pub use knn::NeighborTable;
pub use scaling::{BoundReport, CorrelationResult, DimComparison, FitResult, ScalingModel, TaskRanking};
pub use sharpness::SharpnessEstimate;
pub use synth::{Embedding, ManifoldKind, ManifoldSpec};

/// Seedable generator used for every random draw in the crate.
///
/// ChaCha with 8 rounds: portable, reproducible across platforms and fixed for
/// a given release of this crate.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Builds the crate generator from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}
