//! Intrinsic dimension estimators.
//!
//! Both estimators read only ratios of nearest-neighbor distances, so they are
//! invariant to a uniform rescaling of the cloud. Points whose nearest
//! neighbors coincide with them (zero distances) are excluded as queries and
//! counted in [`IdEstimate::n_excluded`]; they still serve as neighbors for
//! other points.

use serde::Serialize;

use crate::knn::{knn_l2, NeighborTable};
use crate::{Error, Matrix, Result};

pub const DEFAULT_MLE_K: usize = 20;
pub const DEFAULT_DISCARD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IdEstimator {
    Mle,
    TwoNn,
}

/// How TwoNN turns the neighbor ratios into a dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoNnVariant {
    /// Least-squares slope through the origin of `-ln(1 - F(mu))` against
    /// `ln mu`, with `F` the empirical distribution of the ratios.
    #[default]
    LinearFit,
    /// Maximum-likelihood form `n / sum(ln mu)`.
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdEstimate {
    pub value: f64,
    pub estimator: IdEstimator,
    /// `k` for MLE, unused (0) for TwoNN.
    pub k: usize,
    /// Fraction of largest ratios dropped by TwoNN, 0 for MLE.
    pub discard_fraction: f64,
    pub variant: Option<TwoNnVariant>,
    /// Points that passed the duplicate policy.
    pub n_used: usize,
    /// Points excluded because a required neighbor distance was zero.
    pub n_excluded: usize,
    /// Of the used points, how many TwoNN dropped as largest ratios.
    pub n_discarded: usize,
}

/// Levina-Bickel maximum-likelihood estimate in its inverted-average form:
/// `[ 1/(n (k-1)) * sum_i sum_{j<k} ln(T_k(x_i) / T_j(x_i)) ]^-1`.
pub fn mle_id(points: &Matrix, k: usize) -> Result<IdEstimate> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("MLE needs k >= 2, got {k}")));
    }
    if points.rows() <= k {
        return Err(Error::TooFewPoints { needed: k + 1, found: points.rows() });
    }
    let table = knn_l2(points, k)?;
    mle_from_table(&table)
}

/// MLE estimate from an existing neighbor table, using all of its `k`
/// columns.
pub fn mle_from_table(table: &NeighborTable) -> Result<IdEstimate> {
    let k = table.k();
    if k < 2 {
        return Err(Error::InvalidParameter(format!("MLE needs k >= 2, got {k}")));
    }
    // Rows are sorted, so a zero anywhere implies a zero first entry.
    let mut per_point: Vec<f64> = (0..table.n())
        .map(|i| table.distances(i))
        .filter(|t| t[0] > 0.0)
        .map(|t| t[..k - 1].iter().map(|tj| (t[k - 1] / tj).ln()).sum::<f64>())
        .collect();
    let used = per_point.len();
    // Summing in sorted order makes the result independent of row order.
    per_point.sort_by(f64::total_cmp);
    let total: f64 = per_point.iter().sum();
    if used == 0 {
        return Err(Error::DegenerateCloud("every point has a duplicate among its neighbors".into()));
    }
    let mean = total / (used as f64 * (k - 1) as f64);
    let value = mean.recip();
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::DegenerateCloud(format!("all {k} nearest neighbors equidistant for every point")));
    }
    Ok(IdEstimate {
        value,
        estimator: IdEstimator::Mle,
        k,
        discard_fraction: 0.0,
        variant: None,
        n_used: used,
        n_excluded: table.n() - used,
        n_discarded: 0,
    })
}

/// TwoNN estimate from the ratios `mu_i = T_2(x_i) / T_1(x_i)`.
///
/// The largest `ceil(discard_fraction * n)` ratios are dropped before either
/// variant is evaluated. In the linear fit the empirical distribution is
/// `F(mu_(i)) = i / n` over the `n` used points; a point at `F = 1` carries no
/// finite ordinate and is left out of the regression.
pub fn twonn_id(points: &Matrix, discard_fraction: f64, variant: TwoNnVariant) -> Result<IdEstimate> {
    if !(0.0..1.0).contains(&discard_fraction) {
        return Err(Error::InvalidParameter(format!("discard fraction must lie in [0, 1), got {discard_fraction}")));
    }
    if points.rows() < 3 {
        return Err(Error::TooFewPoints { needed: 3, found: points.rows() });
    }
    let table = knn_l2(points, 2)?;
    let mut mu: Vec<f64> = (0..table.n())
        .filter_map(|i| {
            let t = table.distances(i);
            (t[0] > 0.0).then(|| t[1] / t[0])
        })
        .collect();
    let used = mu.len();
    if used < 3 {
        return Err(Error::TooFewPoints { needed: 3, found: used });
    }
    if mu.iter().any(|m| !m.is_finite()) {
        return Err(Error::DegenerateCloud("infinite neighbor ratio".into()));
    }
    mu.sort_by(f64::total_cmp);
    let dropped = (discard_fraction * used as f64).ceil() as usize;
    let kept = &mu[..used - dropped.min(used)];
    if kept.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, found: 0 });
    }

    let value = match variant {
        TwoNnVariant::ClosedForm => {
            let s: f64 = kept.iter().map(|m| m.ln()).sum();
            kept.len() as f64 / s
        }
        TwoNnVariant::LinearFit => {
            let n = used as f64;
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (i, m) in kept.iter().enumerate() {
                let f = (i + 1) as f64 / n;
                if f >= 1.0 {
                    break;
                }
                let x = m.ln();
                let y = -(1.0 - f).ln();
                sxy += x * y;
                sxx += x * x;
            }
            sxy / sxx
        }
    };
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::DegenerateCloud("first and second neighbors equidistant everywhere".into()));
    }
    Ok(IdEstimate {
        value,
        estimator: IdEstimator::TwoNn,
        k: 0,
        discard_fraction,
        variant: Some(variant),
        n_used: used,
        n_excluded: table.n() - used,
        n_discarded: dropped.min(used),
    })
}
