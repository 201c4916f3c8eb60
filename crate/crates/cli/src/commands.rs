use std::path::Path;

use datadim_core::dataio::{
    preprocess, read_image_pnm, read_ipmx, read_labels_csv, read_scaling_csv, write_ipmx, write_labels_csv,
    write_scaling_csv,
};
use datadim_core::id::{mle_id, twonn_id};
use datadim_core::knn::knn_l2;
use datadim_core::scaling::{
    compare_dims, fit_model, fit_model_a, fit_model_b, group_records, log_likelihood_ratio, pearson_r, rank_tasks,
    robustness_lower_bound,
};
use datadim_core::sharpness::{label_sharpness, multiclass_sharpness, paired_sharpness, DEFAULT_RUNS};
use datadim_core::synth::{label_halfspace, sample_manifold, synth_scaling_records, RecordSpec};
use datadim_core::{
    rng_from_seed, Embedding, Error, IdEstimate, IpmxDtype, LabeledDataset, ManifoldKind, ManifoldSpec, Matrix, Result,
    ScalingModel, ScalingRecord, TwoNnVariant,
};
use rand::Rng as _;
use serde_json::{json, Value};

use crate::args::*;
use crate::report::{num, nums, object, to_value};

pub struct Outcome {
    pub command: &'static str,
    pub parameters: Value,
    pub results: Result<Value>,
    pub warnings: Vec<String>,
}

pub fn run(command: Command) -> Outcome {
    let mut warnings = Vec::new();
    let (name, parameters, results) = match command {
        Command::Id(a) => ("id", id_params(&a), id(&a, &mut warnings)),
        Command::Sharpness(a) => ("sharpness", sharpness_params(&a), sharpness(&a, &mut warnings)),
        Command::Fit(a) => (
            "fit",
            json!({
                "records": path(&a.records),
                "model": model(a.model),
                "group_by_column": a.group_by_column,
                "csv_out": a.csv_out.as_deref().map(path),
            }),
            fit(&a),
        ),
        Command::Lratio(a) => ("lratio", json!({ "records": path(&a.records) }), lratio(&a)),
        Command::Correlate(a) => {
            ("correlate", json!({ "xs": a.xs, "ys": a.ys }), pearson_r(&a.xs, &a.ys).map(|r| to_value(&r)))
        }
        Command::RankTasks(a) => ("rank-tasks", json!({ "tasks": a.tasks }), rank(&a)),
        Command::RobustBound(a) => (
            "robust-bound",
            json!({ "margin": a.margin, "lipschitz": a.lipschitz }),
            robustness_lower_bound(a.margin, a.lipschitz).map(|r| to_value(&r)),
        ),
        Command::CompareDims(a) => (
            "compare-dims",
            json!({ "d_data": a.d_data, "d_repr": a.d_repr }),
            Ok(to_value(&compare_dims(a.d_data, a.d_repr))),
        ),
        Command::Synth(a) => ("synth", synth_params(&a), synth(&a)),
        Command::SynthRecords(a) => (
            "synth-records",
            json!({
                "a_true": a.a_true,
                "noise_sd": a.noise_sd,
                "sizes": a.sizes,
                "d_data": a.d_data,
                "k_f": a.k_f,
                "seed": a.seed,
                "output": path(&a.output),
            }),
            synth_records(&a),
        ),
        Command::Knn(a) => {
            ("knn", json!({ "input": path(&a.input), "k": a.k, "csv_out": a.csv_out.as_deref().map(path) }), knn(&a))
        }
        Command::Convert(a) => (
            "convert",
            json!({
                "images": a.images.iter().map(|p| path(p)).collect::<Vec<_>>(),
                "resize": a.resize,
                "output": path(&a.output),
                "dtype": dtype_name(a.dtype),
            }),
            convert(&a),
        ),
    };
    Outcome { command: name, parameters, results, warnings }
}

fn path(p: &Path) -> String {
    p.display().to_string()
}

fn dtype(d: DtypeArg) -> IpmxDtype {
    match d {
        DtypeArg::F32 => IpmxDtype::F32,
        DtypeArg::F64 => IpmxDtype::F64,
    }
}

fn dtype_name(d: DtypeArg) -> &'static str {
    match d {
        DtypeArg::F32 => "f32",
        DtypeArg::F64 => "f64",
    }
}

fn model(m: ModelArg) -> ScalingModel {
    match m {
        ModelArg::A => ScalingModel::AWithKf,
        ModelArg::B => ScalingModel::BWithoutKf,
        ModelArg::Repr => ScalingModel::Repr,
    }
}

fn csv_writer(p: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(p).map_err(|e| Error::Csv { line: 0, message: format!("{}: {e}", p.display()) })
}

fn write_rows<I, R>(p: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let csv_err = |e: csv::Error| Error::Csv { line: 0, message: format!("{}: {e}", p.display()) };
    let mut w = csv_writer(p)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Io { path: p.to_path_buf(), source: e })
}

// ---- id ----

fn id_params(a: &IdArgs) -> Value {
    json!({
        "input": path(&a.input),
        "estimator": match a.estimator { EstimatorArg::Mle => "mle", EstimatorArg::Twonn => "twonn" },
        "k": a.k,
        "discard": a.discard,
        "variant": match a.variant { VariantArg::LinearFit => "linear_fit", VariantArg::ClosedForm => "closed_form" },
        "repeats": a.repeats,
        "seed": a.seed,
        "csv_out": a.csv_out.as_deref().map(path),
    })
}

fn estimate(a: &IdArgs, points: &Matrix) -> Result<IdEstimate> {
    match a.estimator {
        EstimatorArg::Mle => mle_id(points, a.k),
        EstimatorArg::Twonn => {
            let variant = match a.variant {
                VariantArg::LinearFit => TwoNnVariant::LinearFit,
                VariantArg::ClosedForm => TwoNnVariant::ClosedForm,
            };
            twonn_id(points, a.discard, variant)
        }
    }
}

/// Draws `n` rows with replacement and keeps each drawn row once, so that
/// resampling does not create the zero distances the estimators exclude.
fn bootstrap_rows(n: usize, rng: &mut datadim_core::Rng) -> Vec<usize> {
    let mut rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    rows.sort_unstable();
    rows.dedup();
    rows
}

fn id(a: &IdArgs, warnings: &mut Vec<String>) -> Result<Value> {
    if a.repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be at least 1".into()));
    }
    let points = read_ipmx(&a.input)?;
    let full = estimate(a, &points)?;
    if full.n_excluded > 0 {
        warnings.push(format!("{} points excluded: zero distance to a required neighbor", full.n_excluded));
    }
    let mut results = object([
        ("value", num(full.value)),
        ("estimate", to_value(&full)),
        ("n_points", json!(points.rows())),
        ("n_features", json!(points.cols())),
    ]);

    let mut samples = Vec::new();
    if a.repeats > 1 {
        let mut rng = rng_from_seed(a.seed);
        for _ in 0..a.repeats {
            let rows = bootstrap_rows(points.rows(), &mut rng);
            samples.push(estimate(a, &points.select_rows(&rows)?)?.value);
        }
        let r = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / r;
        let sd = (samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0)).sqrt();
        let half = 1.96 * sd;
        results["bootstrap"] = object([
            ("repeats", json!(a.repeats)),
            ("values", nums(&samples)),
            ("mean", num(mean)),
            ("sd", num(sd)),
            ("ci95", nums(&[mean - half, mean + half])),
        ]);
    }
    if let Some(p) = &a.csv_out {
        let rows = std::iter::once(vec!["full".to_owned(), full.value.to_string()])
            .chain(samples.iter().enumerate().map(|(i, v)| vec![(i + 1).to_string(), v.to_string()]));
        write_rows(p, &["sample", "value"], rows)?;
    }
    Ok(results)
}

// ---- sharpness ----

fn sharpness_params(a: &SharpnessArgs) -> Value {
    json!({
        "input": path(&a.input),
        "labels": path(&a.labels),
        "m": a.m,
        "runs": a.runs,
        "multiclass": a.multiclass,
        "seed": a.seed,
        "csv_out": a.csv_out.as_deref().map(path),
    })
}

fn sharpness(a: &SharpnessArgs, warnings: &mut Vec<String>) -> Result<Value> {
    let points = read_ipmx(&a.input)?;
    let labels = read_labels_csv(&a.labels)?;
    let data = LabeledDataset::new(points, labels)?;
    let n_classes = data.classes().len();
    let runs = a.runs.unwrap_or(if n_classes > 2 { DEFAULT_RUNS } else { 1 });
    let (mode, est) = if a.multiclass {
        if a.runs.is_some_and(|r| r != 1) {
            warnings.push("--runs is ignored with --multiclass".into());
        }
        ("multiclass", multiclass_sharpness(&data, a.m, a.seed)?)
    } else if n_classes == 2 && runs == 1 {
        ("binary", label_sharpness(&data, a.m, a.seed)?)
    } else {
        if n_classes < 2 {
            return Err(Error::NotBinary(n_classes));
        }
        ("paired", paired_sharpness(&data, a.m, runs, a.seed)?)
    };
    if est.infinite_runs > 0 {
        warnings.push(format!(
            "{} of {} runs infinite: identical points carry different labels (last pair: rows {} and {})",
            est.infinite_runs, est.runs, est.argmax_pair.0, est.argmax_pair.1
        ));
    }
    if let Some(p) = &a.csv_out {
        let rows = est.per_run_values.iter().enumerate().map(|(i, v)| {
            let (c0, c1) =
                est.run_classes.get(i).map_or((String::new(), String::new()), |c| (c.0.to_string(), c.1.to_string()));
            vec![i.to_string(), c0, c1, v.to_string()]
        });
        write_rows(p, &["run", "class_a", "class_b", "value"], rows)?;
    }
    Ok(object([
        ("value", num(est.value)),
        ("mode", json!(mode)),
        ("n_classes", json!(n_classes)),
        ("runs", json!(est.runs)),
        ("m_used", json!(est.m_used)),
        ("per_run_values", nums(&est.per_run_values)),
        ("infinite_runs", json!(est.infinite_runs)),
        ("argmax_pair", json!([est.argmax_pair.0, est.argmax_pair.1])),
        ("run_classes", json!(est.run_classes)),
        ("seed", json!(est.seed)),
    ]))
}

// ---- scaling ----

fn fit(a: &FitArgs) -> Result<Value> {
    let records = read_scaling_csv(&a.records)?;
    let groups: Vec<(Option<String>, Vec<ScalingRecord>)> = match &a.group_by_column {
        Some(col) => group_records(&records, col)?.into_iter().map(|(k, v)| (Some(k), v)).collect(),
        None => vec![(None, records)],
    };
    let mut fits = Vec::new();
    let mut csv_rows = Vec::new();
    for (group, recs) in &groups {
        let f = fit_model(model(a.model), recs)?;
        let per_record: Vec<Value> = recs
            .iter()
            .zip(&f.residuals)
            .map(|(r, res)| json!({ "dataset": r.dataset, "N": r.n, "residual": res }))
            .collect();
        for (r, res) in recs.iter().zip(&f.residuals) {
            csv_rows.push(vec![group.clone().unwrap_or_default(), r.dataset.clone(), r.n.to_string(), res.to_string()]);
        }
        fits.push(json!({
            "group": group,
            "model": f.model,
            "offset": f.offset,
            "sse": f.sse,
            "n_records": f.n_records,
            "residuals": per_record,
        }));
    }
    if let Some(p) = &a.csv_out {
        write_rows(p, &["group", "dataset", "N", "residual"], csv_rows)?;
    }
    Ok(json!({ "fits": fits }))
}

fn lratio(a: &LratioArgs) -> Result<Value> {
    let records = read_scaling_csv(&a.records)?;
    let fa = fit_model_a(&records)?;
    let fb = fit_model_b(&records)?;
    let ln_r = log_likelihood_ratio(&fa, &fb)?;
    let preferred = if ln_r > 0.0 {
        "A_with_KF"
    } else if ln_r < 0.0 {
        "B_without_KF"
    } else {
        "neither"
    };
    Ok(json!({
        "log_r": ln_r,
        "log10_r": ln_r / std::f64::consts::LN_10,
        "preferred": preferred,
        "offset_a": fa.offset,
        "offset_b": fb.offset,
        "sse_a": fa.sse,
        "sse_b": fb.sse,
        "n_records": fa.n_records,
    }))
}

fn rank(a: &RankTasksArgs) -> Result<Value> {
    let tasks = a
        .tasks
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let (name, value) = match t.split_once('=') {
                Some((n, v)) => (n.to_owned(), v),
                None => (format!("task{}", i + 1), t.as_str()),
            };
            let k_f = value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("cannot parse label sharpness in {t:?}")))?;
            Ok((name, k_f))
        })
        .collect::<Result<Vec<_>>>()?;
    let ranking = rank_tasks(&tasks)?;
    let order: Vec<&str> = ranking.order.iter().map(|t| t.name.as_str()).collect();
    Ok(json!({ "ordering": order, "tasks": ranking.order, "ratios": ranking.ratios }))
}

// ---- synth ----

fn synth_params(a: &SynthArgs) -> Value {
    json!({
        "kind": match a.kind {
            KindArg::Hypercube => "hypercube",
            KindArg::Hypersphere => "hypersphere",
            KindArg::SineLift => "sine_lift",
        },
        "d": a.d,
        "n": a.n,
        "points": a.points,
        "embedding": match a.embedding {
            EmbeddingArg::AxisAligned => "axis_aligned",
            EmbeddingArg::RandomOrthogonal => "random_orthogonal",
        },
        "seed": a.seed,
        "output": path(&a.output),
        "dtype": dtype_name(a.dtype),
        "labels": a.labels.as_deref().map(path),
        "margin": a.margin,
    })
}

fn synth(a: &SynthArgs) -> Result<Value> {
    let spec = ManifoldSpec {
        intrinsic_dim: a.d,
        ambient_dim: a.n,
        kind: match a.kind {
            KindArg::Hypercube => ManifoldKind::Hypercube,
            KindArg::Hypersphere => ManifoldKind::Hypersphere,
            KindArg::SineLift => ManifoldKind::SineLift,
        },
        embedding: match a.embedding {
            EmbeddingArg::AxisAligned => Embedding::AxisAligned,
            EmbeddingArg::RandomOrthogonal => Embedding::RandomOrthogonal,
        },
        n_points: a.points,
        seed: a.seed,
    };
    let points = sample_manifold(&spec)?;
    let Some(labels_path) = &a.labels else {
        write_ipmx(&points, &a.output, dtype(a.dtype))?;
        return Ok(json!({ "rows": points.rows(), "cols": points.cols() }));
    };

    // Split at the median projection onto the all-ones direction.
    let normal = vec![1.0 / (a.n as f64).sqrt(); a.n];
    let mut proj: Vec<f64> = points.iter_rows().map(|r| r.iter().zip(&normal).map(|(x, w)| x * w).sum()).collect();
    proj.sort_by(f64::total_cmp);
    let threshold = proj[(proj.len() - 1) / 2];
    let labeled = label_halfspace(&points, &normal, threshold, a.margin)?;
    write_ipmx(labeled.data.points(), &a.output, dtype(a.dtype))?;
    write_labels_csv(labeled.data.labels(), labels_path)?;
    let ones = labeled.data.labels().iter().filter(|&&l| l == 1).count();
    Ok(json!({
        "rows": labeled.data.len(),
        "cols": points.cols(),
        "threshold": threshold,
        "removed": points.rows() - labeled.data.len(),
        "class_counts": { "0": labeled.data.len() - ones, "1": ones },
    }))
}

fn synth_records(a: &SynthRecordsArgs) -> Result<Value> {
    let mut specs = Vec::new();
    for &n in &a.sizes {
        for &d_data in &a.d_data {
            for &k_f in &a.k_f {
                specs.push(RecordSpec { n, d_data, k_f });
            }
        }
    }
    let records = synth_scaling_records(a.a_true, &specs, a.noise_sd, a.seed)?;
    for (i, r) in records.iter().enumerate() {
        if !(r.n >= 2 && r.d_data > 0.0 && r.k_f > 0.0) {
            return Err(Error::InvalidSpec(format!("record {i} has N < 2 or nonpositive d_data or k_f")));
        }
    }
    write_scaling_csv(&records, &a.output)?;
    Ok(json!({ "n_records": records.len() }))
}

// ---- knn / convert ----

fn knn(a: &KnnArgs) -> Result<Value> {
    let points = read_ipmx(&a.input)?;
    let table = knn_l2(&points, a.k)?;
    let n = table.n();
    if let Some(p) = &a.csv_out {
        let rows = (0..n).flat_map(|i| {
            let t = &table;
            (0..t.k()).map(move |j| {
                vec![i.to_string(), (j + 1).to_string(), t.neighbors(i)[j].to_string(), t.distances(i)[j].to_string()]
            })
        });
        write_rows(p, &["point", "rank", "neighbor", "distance"], rows)?;
        return Ok(json!({ "n": n, "k": table.k() }));
    }
    let neighbors: Vec<&[usize]> = (0..n).map(|i| table.neighbors(i)).collect();
    let distances: Vec<&[f64]> = (0..n).map(|i| table.distances(i)).collect();
    Ok(json!({ "n": n, "k": table.k(), "neighbors": neighbors, "distances": distances }))
}

fn convert(a: &ConvertArgs) -> Result<Value> {
    let (th, tw) = (a.resize[0], a.resize[1]);
    let mut data = Vec::new();
    let mut channels = None;
    for p in &a.images {
        let (img, dims) = read_image_pnm(p)?;
        if *channels.get_or_insert(dims.channels) != dims.channels {
            return Err(Error::ImageSizeMismatch {
                expected: th * tw * channels.unwrap(),
                found: th * tw * dims.channels,
            });
        }
        data.extend(preprocess(img.as_slice(), dims, th, tw)?.into_vec());
    }
    let cols = th * tw * channels.unwrap_or(1);
    let m = Matrix::new(a.images.len(), cols, data)?;
    write_ipmx(&m, &a.output, dtype(a.dtype))?;
    Ok(json!({ "rows": m.rows(), "cols": m.cols(), "channels": channels }))
}
