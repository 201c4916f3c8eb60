//! Generalization scaling laws and the statistics built on them.
//!
//! Each law predicts the log test loss from regressors measured upstream,
//!
//! ```text
//! model A:    ln L = -ln(N) / d_data + ln(K_F) + a
//! model B:    ln L = -ln(N) / d_data + b
//! model repr: ln L = -ln(N) / d_repr + b
//! ```
//!
//! and has a single free offset. Moving the known terms to the left gives a
//! per-record "basis" whose mean is the least-squares offset, so every fit is
//! closed form. All logarithms are natural.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::{Error, Result, ScalingRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScalingModel {
    #[serde(rename = "A_with_KF")]
    AWithKf,
    #[serde(rename = "B_without_KF")]
    BWithoutKf,
    #[serde(rename = "REPR")]
    Repr,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: ScalingModel,
    /// Fitted `a` (model A) or `b` (models B and repr).
    pub offset: f64,
    /// `basis_i - offset` per record, in input order.
    pub residuals: Vec<f64>,
    pub sse: f64,
    pub n_records: usize,
}

pub fn model_a_basis(r: &ScalingRecord) -> f64 {
    r.loss.ln() + (r.n as f64).ln() / r.d_data - r.k_f.ln()
}

pub fn model_b_basis(r: &ScalingRecord) -> f64 {
    r.loss.ln() + (r.n as f64).ln() / r.d_data
}

fn fit_bases(model: ScalingModel, bases: Vec<f64>) -> Result<FitResult> {
    if bases.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let n = bases.len();
    let offset = bases.iter().sum::<f64>() / n as f64;
    let residuals: Vec<f64> = bases.iter().map(|b| b - offset).collect();
    let sse = residuals.iter().map(|r| r * r).sum();
    Ok(FitResult { model, offset, residuals, sse, n_records: n })
}

/// Fits `a` in `ln L = -ln(N)/d_data + ln(K_F) + a`.
pub fn fit_model_a(records: &[ScalingRecord]) -> Result<FitResult> {
    fit_bases(ScalingModel::AWithKf, records.iter().map(model_a_basis).collect())
}

/// Fits `b` in `ln L = -ln(N)/d_data + b`, ignoring `K_F`.
pub fn fit_model_b(records: &[ScalingRecord]) -> Result<FitResult> {
    fit_bases(ScalingModel::BWithoutKf, records.iter().map(model_b_basis).collect())
}

/// Fits `b` in `ln L = -ln(N)/d_repr + b`. Every record needs `d_repr`.
pub fn fit_model_repr(records: &[ScalingRecord]) -> Result<FitResult> {
    let bases = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let d = r.d_repr.ok_or(Error::MissingDRepr(i))?;
            Ok(r.loss.ln() + (r.n as f64).ln() / d)
        })
        .collect::<Result<Vec<_>>>()?;
    fit_bases(ScalingModel::Repr, bases)
}

pub fn fit_model(model: ScalingModel, records: &[ScalingRecord]) -> Result<FitResult> {
    match model {
        ScalingModel::AWithKf => fit_model_a(records),
        ScalingModel::BWithoutKf => fit_model_b(records),
        ScalingModel::Repr => fit_model_repr(records),
    }
}

/// Splits records by the value of a column (`dataset` or any extra tag
/// column). Groups are returned in sorted key order.
pub fn group_records(records: &[ScalingRecord], column: &str) -> Result<BTreeMap<String, Vec<ScalingRecord>>> {
    let mut groups: BTreeMap<String, Vec<ScalingRecord>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let key =
            r.field(column).ok_or_else(|| Error::InvalidParameter(format!("record {i} has no column {column:?}")))?;
        groups.entry(key.to_owned()).or_default().push(r.clone());
    }
    Ok(groups)
}

/// Log of the Gaussian likelihood ratio `p(D | A) / p(D | B)` with unit
/// variance, `(SSE_B - SSE_A) / 2`. Positive values favor `fit_a`.
pub fn log_likelihood_ratio(fit_a: &FitResult, fit_b: &FitResult) -> Result<f64> {
    if fit_a.n_records != fit_b.n_records {
        return Err(Error::MismatchedRecords { a: fit_a.n_records, b: fit_b.n_records });
    }
    Ok((fit_b.sse - fit_a.sse) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub n: usize,
}

/// Sample Pearson correlation coefficient.
pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch { a: xs.len(), b: ys.len() });
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, found: n });
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    Ok(CorrelationResult { r, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub lower_bound: f64,
    pub margin: f64,
    pub lipschitz: f64,
}

/// Certified robustness radius lower bound `margin / (sqrt(2) * lipschitz)`
/// for a classifier with prediction margin `margin` and Lipschitz constant
/// `lipschitz`.
pub fn robustness_lower_bound(margin: f64, lipschitz: f64) -> Result<BoundReport> {
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::NonPositiveLipschitz(lipschitz));
    }
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::NegativeMargin(margin));
    }
    Ok(BoundReport { lower_bound: margin / (SQRT_2 * lipschitz), margin, lipschitz })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimComparison {
    pub d_data: f64,
    pub d_repr: f64,
    /// `d_repr <= d_data`.
    pub satisfied: bool,
    /// `d_data - d_repr`.
    pub gap: f64,
}

/// Checks whether a representation's dimension stays below the data's.
/// The relation is only expected to hold approximately, so this reports and
/// never fails.
pub fn compare_dims(d_data: f64, d_repr: f64) -> DimComparison {
    DimComparison { d_data, d_repr, satisfied: d_repr <= d_data, gap: d_data - d_repr }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedTask {
    pub name: String,
    pub k_f: f64,
    /// 1 for the hardest task; tied tasks share a rank.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskRatio {
    pub harder: String,
    pub easier: String,
    /// `k_f(harder) / k_f(easier)`, at least 1.
    pub ratio: f64,
    pub tie: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskRanking {
    pub order: Vec<RankedTask>,
    pub ratios: Vec<TaskRatio>,
}

/// Orders tasks from highest to lowest label sharpness, the predicted order
/// of difficulty, and reports every pairwise sharpness ratio. Equal values
/// keep their input order and are flagged as ties.
pub fn rank_tasks(tasks: &[(String, f64)]) -> Result<TaskRanking> {
    if tasks.is_empty() {
        return Err(Error::InvalidParameter("no tasks to rank".into()));
    }
    if let Some((name, _)) = tasks.iter().find(|(_, k)| !(*k > 0.0 && k.is_finite())) {
        return Err(Error::NonPositiveKf(name.clone()));
    }
    let mut sorted: Vec<&(String, f64)> = tasks.iter().collect();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1));

    let mut order = Vec::with_capacity(sorted.len());
    let mut rank = 0;
    for (i, (name, k_f)) in sorted.iter().map(|t| (&t.0, t.1)).enumerate() {
        if i == 0 || k_f != sorted[i - 1].1 {
            rank += 1;
        }
        order.push(RankedTask { name: name.clone(), k_f, rank });
    }
    let mut ratios = Vec::new();
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            ratios.push(TaskRatio {
                harder: order[i].name.clone(),
                easier: order[j].name.clone(),
                ratio: order[i].k_f / order[j].k_f,
                tie: order[i].k_f == order[j].k_f,
            });
        }
    }
    Ok(TaskRanking { order, ratios })
}
