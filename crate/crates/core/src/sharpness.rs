//! Label sharpness: the largest ratio of label change to input distance,
//!
//! ```text
//! K_F = max_{j,k} |y_j - y_k| / ||x_j - x_k||
//! ```
//!
//! taken over every pair of a class-balanced random sample. Labels enter only
//! through class membership: in the binary estimate the lower label value is
//! read as 0 and the higher as 1, and the multi-class estimate uses the
//! indicator `y_j != y_k`, so both numerators are 0 or 1.
//!
//! Sampling draws `floor(m / C)` rows per class without replacement. When a
//! class has fewer members every class is shrunk to the smallest class size.
//! When `m` is at least the dataset size the whole dataset is used as is.
//!
//! A differing-label pair at distance zero yields `+inf`, returned as a value
//! together with the offending pair.

use rand::seq::index::sample;
use rand::{Rng as _, RngCore};
use serde::Serialize;

use crate::knn::pairwise_l2;
use crate::{rng_from_seed, Error, LabeledDataset, Matrix, Result, Rng};

pub const DEFAULT_M: usize = 1000;
pub const DEFAULT_RUNS: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessEstimate {
    /// Mean of the finite per-run values; `+inf` only if every run was.
    pub value: f64,
    /// Rows sampled in the last run.
    pub m_used: usize,
    pub runs: usize,
    pub per_run_values: Vec<f64>,
    /// Runs whose value was `+inf` and which were left out of the mean.
    pub infinite_runs: usize,
    pub seed: u64,
    /// Original row indices of the maximizing pair in the last run.
    pub argmax_pair: (usize, usize),
    /// Class pair of each run (both entries equal the two classes for a
    /// plain binary estimate; empty for the multi-class estimate).
    pub run_classes: Vec<(u64, u64)>,
}

struct RunResult {
    value: f64,
    pair: (usize, usize),
    m_used: usize,
}

/// `(row, class position)` pairs taken for one estimate, ascending by row.
/// `groups` are the row indices of each class.
fn balanced_sample(groups: &[&[usize]], m: usize, rng: &mut Rng) -> Result<Vec<(usize, usize)>> {
    let total: usize = groups.iter().map(|g| g.len()).sum();
    let mut rows: Vec<(usize, usize)> = if m >= total {
        groups.iter().enumerate().flat_map(|(c, g)| g.iter().map(move |&r| (r, c))).collect()
    } else {
        let smallest = groups.iter().map(|g| g.len()).min().unwrap_or(0);
        let per_class = (m / groups.len()).min(smallest);
        if per_class == 0 {
            return Err(Error::InvalidParameter(format!(
                "m = {m} leaves no sample for some of the {} classes",
                groups.len()
            )));
        }
        let mut rows = Vec::with_capacity(per_class * groups.len());
        for (c, g) in groups.iter().enumerate() {
            rows.extend(sample(rng, g.len(), per_class).into_iter().map(|i| (g[i], c)));
        }
        rows
    };
    rows.sort_unstable();
    Ok(rows)
}

/// Max over all sampled pairs. Same-class pairs contribute 0.
fn run_once(points: &Matrix, groups: &[&[usize]], m: usize, rng: &mut Rng) -> Result<RunResult> {
    let (rows, classes): (Vec<usize>, Vec<usize>) = balanced_sample(groups, m, rng)?.into_iter().unzip();
    let sub = points.select_rows(&rows)?;
    let dist = pairwise_l2(&sub)?;

    let n = rows.len();
    let mut best = f64::NEG_INFINITY;
    let mut pair = (rows[0], rows[1]);
    let mut at = 0;
    for i in 0..n {
        for j in i + 1..n {
            let numerator = if classes[i] != classes[j] { 1.0 } else { 0.0 };
            let d = dist[at];
            at += 1;
            let ratio = if numerator == 0.0 { 0.0 } else { numerator / d };
            if ratio > best {
                best = ratio;
                pair = (rows[i], rows[j]);
            }
        }
    }
    Ok(RunResult { value: best, pair, m_used: n })
}

fn class_groups(data: &LabeledDataset) -> (Vec<u64>, Vec<Vec<usize>>) {
    data.class_members().into_iter().unzip()
}

/// Binary label sharpness. `data` must hold exactly two label values.
pub fn label_sharpness(data: &LabeledDataset, m: usize, seed: u64) -> Result<SharpnessEstimate> {
    let (classes, groups) = class_groups(data);
    if classes.len() != 2 {
        return Err(Error::NotBinary(classes.len()));
    }
    let refs: Vec<&[usize]> = groups.iter().map(Vec::as_slice).collect();
    let r = run_once(data.points(), &refs, m, &mut rng_from_seed(seed))?;
    Ok(single(r, seed, vec![(classes[0], classes[1])]))
}

/// Multi-class label sharpness with the indicator numerator, sampling
/// `floor(m / C)` rows from each of the `C` classes.
pub fn multiclass_sharpness(data: &LabeledDataset, m: usize, seed: u64) -> Result<SharpnessEstimate> {
    let (classes, groups) = class_groups(data);
    if classes.len() < 2 {
        return Err(Error::NotBinary(classes.len()));
    }
    let refs: Vec<&[usize]> = groups.iter().map(Vec::as_slice).collect();
    let r = run_once(data.points(), &refs, m, &mut rng_from_seed(seed))?;
    Ok(single(r, seed, Vec::new()))
}

fn single(r: RunResult, seed: u64, run_classes: Vec<(u64, u64)>) -> SharpnessEstimate {
    SharpnessEstimate {
        value: r.value,
        m_used: r.m_used,
        runs: 1,
        per_run_values: vec![r.value],
        infinite_runs: usize::from(r.value.is_infinite()),
        seed,
        argmax_pair: r.pair,
        run_classes,
    }
}

/// One run of [`paired_sharpness`]: the class pair (as positions in the
/// ascending class list) and the seed handed to the binary estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairedRun {
    pub first: usize,
    pub second: usize,
    pub subseed: u64,
}

/// The class pairs and subseeds [`paired_sharpness`] uses for `seed`.
pub fn paired_run_plan(n_classes: usize, runs: usize, seed: u64) -> Vec<PairedRun> {
    let mut rng = rng_from_seed(seed);
    (0..runs)
        .map(|_| {
            let a = rng.random_range(0..n_classes);
            let mut b = rng.random_range(0..n_classes - 1);
            if b >= a {
                b += 1;
            }
            PairedRun { first: a.min(b), second: a.max(b), subseed: rng.next_u64() }
        })
        .collect()
}

/// Binary sharpness averaged over `runs` uniformly drawn class pairs.
///
/// Run `r` restricts the data to its two classes and evaluates
/// [`label_sharpness`] with the run's subseed. Infinite runs are counted and
/// left out of the mean.
pub fn paired_sharpness(data: &LabeledDataset, m: usize, runs: usize, seed: u64) -> Result<SharpnessEstimate> {
    let (classes, groups) = class_groups(data);
    if classes.len() < 2 {
        return Err(Error::NotBinary(classes.len()));
    }
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    let mut per_run_values = Vec::with_capacity(runs);
    let mut run_classes = Vec::with_capacity(runs);
    let mut last = None;
    for plan in paired_run_plan(classes.len(), runs, seed) {
        let refs = [groups[plan.first].as_slice(), groups[plan.second].as_slice()];
        let r = run_once(data.points(), &refs, m, &mut rng_from_seed(plan.subseed))?;
        per_run_values.push(r.value);
        run_classes.push((classes[plan.first], classes[plan.second]));
        last = Some(r);
    }
    let last = last.expect("runs >= 1");
    let finite: Vec<f64> = per_run_values.iter().copied().filter(|v| v.is_finite()).collect();
    let value = if finite.is_empty() { f64::INFINITY } else { finite.iter().sum::<f64>() / finite.len() as f64 };
    Ok(SharpnessEstimate {
        value,
        m_used: last.m_used,
        runs,
        infinite_runs: runs - finite.len(),
        per_run_values,
        seed,
        argmax_pair: last.pair,
        run_classes,
    })
}
