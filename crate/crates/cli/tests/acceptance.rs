//! Acceptance criteria, run in order on one thread so the timed ones see an
//! otherwise idle machine. Prints one `[PASS]` / `[FAIL]` line per criterion
//! and exits nonzero if any failed.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::SQRT_2;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use common::{brute_knn, exhaustive_sharpness, random_matrix, rel_close};
use datadim_core::id::{mle_id, twonn_id};
use datadim_core::knn::knn_l2;
use datadim_core::scaling::{
    fit_model_a, fit_model_b, fit_model_repr, log_likelihood_ratio, model_a_basis, model_b_basis, pearson_r,
    rank_tasks, robustness_lower_bound,
};
use datadim_core::sharpness::label_sharpness;
use datadim_core::synth::{sample_manifold, synth_scaling_records, RecordSpec};
use datadim_core::{
    rng_from_seed, Embedding, LabeledDataset, ManifoldKind, ManifoldSpec, Matrix, ScalingRecord, TwoNnVariant,
};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

// Written as a negation so that a NaN comparison fails the check.
macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn collinear() -> Matrix {
    Matrix::from_rows(&[[0.0], [1.0], [3.0]]).unwrap()
}

fn c1_mle_fixture() -> Outcome {
    let want = 3.0 / (2.0 * 3f64.ln());
    let m = collinear();
    let t = Instant::now();
    let got = mle_id(&m, 2).unwrap().value;
    let first = t.elapsed();
    check!((got - want).abs() <= 1e-9, "got {got}, want {want}");
    check!(first < Duration::from_millis(1), "first call took {first:?}");
    Ok(format!("{got:.12} in {first:?}"))
}

fn c2_twonn_fixture() -> Outcome {
    let want = 3.0 / 9f64.ln();
    let got = twonn_id(&collinear(), 0.0, TwoNnVariant::ClosedForm).unwrap().value;
    check!((got - want).abs() <= 1e-9, "got {got}, want {want}");
    Ok(format!("{got:.12}"))
}

fn c3_manifold_recovery() -> Outcome {
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    let mut slowest = Duration::ZERO;
    for d in [2usize, 4, 8] {
        let (mut mle, mut twonn) = (0.0, 0.0);
        for seed in 0..5 {
            let spec = ManifoldSpec {
                intrinsic_dim: d,
                ambient_dim: 64,
                kind: ManifoldKind::Hypercube,
                embedding: Embedding::RandomOrthogonal,
                n_points: 2000,
                seed,
            };
            let t = Instant::now();
            let (a, b) = single_threaded(|| {
                let m = sample_manifold(&spec).unwrap();
                (mle_id(&m, 20).unwrap().value, twonn_id(&m, 0.1, TwoNnVariant::LinearFit).unwrap().value)
            });
            slowest = slowest.max(t.elapsed());
            mle += a / 5.0;
            twonn += b / 5.0;
        }
        let df = d as f64;
        if (mle - df).abs() > 0.15 * df {
            failures.push(format!("d={d}: MLE mean {mle:.4} outside ±15%"));
        }
        if (twonn - df).abs() > 0.20 * df {
            failures.push(format!("d={d}: TwoNN mean {twonn:.4} outside ±20%"));
        }
        lines.push(format!("d={d} mle={mle:.4} twonn={twonn:.4}"));
    }
    if slowest >= Duration::from_secs(10) {
        failures.push(format!("slowest cloud took {slowest:?}"));
    }
    let summary = format!("{}; slowest cloud {slowest:.2?}", lines.join(", "));
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", failures.join("; ")))
    }
}

fn c4_knn_oracle() -> Outcome {
    let mut rng = rng_from_seed(2024);
    let mut largest = (0, 0);
    for inst in 0..100u64 {
        let n_rows = rng.random_range(2..=1000usize);
        let cols = (2f64.powf(rng.random_range(0.0..=12.0))).round() as usize;
        let k = rng.random_range(1..n_rows.min(32));
        let m = random_matrix(n_rows, cols.max(1), 7000 + inst);
        let fast = knn_l2(&m, k).unwrap();
        let slow = brute_knn(&m, k);
        for (i, want) in slow.iter().enumerate() {
            for (a, b) in fast.distances(i).iter().zip(want) {
                check!(rel_close(*a, *b, 1e-9), "instance {inst} ({n_rows}x{cols}, k={k}) row {i}: {a} vs {b}");
            }
        }
        if n_rows * cols > largest.0 * largest.1 {
            largest = (n_rows, cols);
        }
    }
    Ok(format!("100 instances, largest {}x{}", largest.0, largest.1))
}

fn c5_sharpness_oracle() -> Outcome {
    let mut rng = rng_from_seed(55);
    for inst in 0..50u64 {
        let n_rows = rng.random_range(2..=300usize);
        let cols = rng.random_range(1..=40usize);
        let m = random_matrix(n_rows, cols, 9000 + inst);
        let mut labels: Vec<u64> = (0..n_rows).map(|_| rng.random_range(0..2)).collect();
        labels[0] = 0;
        labels[n_rows - 1] = 1;
        let want = exhaustive_sharpness(&m, &labels);
        let data = LabeledDataset::new(m, labels).unwrap();
        let got = label_sharpness(&data, n_rows, inst).unwrap().value;
        check!(got.to_bits() == want.to_bits(), "instance {inst} ({n_rows}x{cols}): {got} vs {want}");
    }
    Ok("50 clouds, bitwise equal".into())
}

fn c6_invariance() -> Outcome {
    let mut worst: f64 = 0.0;
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    for inst in 0..20u64 {
        let spec = ManifoldSpec {
            intrinsic_dim: 2 + (inst as usize % 4),
            ambient_dim: 12,
            kind: [ManifoldKind::Hypercube, ManifoldKind::Hypersphere, ManifoldKind::SineLift][inst as usize % 3],
            embedding: Embedding::RandomOrthogonal,
            n_points: 300,
            seed: inst,
        };
        let m = sample_manifold(&spec).unwrap();
        let sums: Vec<f64> = m.iter_rows().map(|r| r.iter().sum()).collect();
        let mut sorted = sums.clone();
        sorted.sort_by(f64::total_cmp);
        let labels: Vec<u64> = sums.iter().map(|s| u64::from(*s > sorted[sorted.len() / 2])).collect();
        let n = m.rows();
        let base = (
            mle_id(&m, 20).unwrap().value,
            twonn_id(&m, 0.1, TwoNnVariant::LinearFit).unwrap().value,
            label_sharpness(&LabeledDataset::new(m.clone(), labels.clone()).unwrap(), n, 1).unwrap().value,
        );
        for alpha in [0.1, 3.0, 100.0] {
            let s = m.scaled(alpha).unwrap();
            let kf = label_sharpness(&LabeledDataset::new(s.clone(), labels.clone()).unwrap(), n, 1).unwrap().value;
            for (e, label) in [
                (rel(mle_id(&s, 20).unwrap().value, base.0), "MLE"),
                (rel(twonn_id(&s, 0.1, TwoNnVariant::LinearFit).unwrap().value, base.1), "TwoNN"),
                (rel(kf, base.2 / alpha), "K_F"),
            ] {
                check!(e <= 1e-9, "cloud {inst}, alpha {alpha}: {label} off by {e:e}");
                worst = worst.max(e);
            }
        }
        let dup = m.stack_copies(1);
        let kf = label_sharpness(&LabeledDataset::new(dup.clone(), labels).unwrap(), n, 1).unwrap().value;
        for (e, label) in [
            (rel(mle_id(&dup, 20).unwrap().value, base.0), "MLE"),
            (rel(twonn_id(&dup, 0.1, TwoNnVariant::LinearFit).unwrap().value, base.1), "TwoNN"),
            (rel(kf, base.2 / SQRT_2), "K_F"),
        ] {
            check!(e <= 1e-9, "cloud {inst}, duplicated channels: {label} off by {e:e}");
            worst = worst.max(e);
        }
    }
    Ok(format!("20 clouds, worst relative error {worst:.2e}"))
}

fn random_records(rng: &mut datadim_core::Rng, count: usize) -> Vec<ScalingRecord> {
    (0..count)
        .map(|i| {
            let mut r = ScalingRecord::new(
                format!("r{i}"),
                rng.random_range(100..100_000),
                rng.random_range(2.0..60.0),
                10f64.powf(rng.random_range(-6.0..-2.0)),
                10f64.powf(rng.random_range(-3.0..0.5)),
            );
            r.d_repr = Some(rng.random_range(2.0..40.0));
            r
        })
        .collect()
}

fn c7_fit_optimality() -> Outcome {
    let mut rng = rng_from_seed(77);
    let mut worst_lr: f64 = 0.0;
    for set in 0..100 {
        let n = rng.random_range(2..40);
        let recs = random_records(&mut rng, n);
        let repr_basis = |r: &ScalingRecord| r.loss.ln() + (r.n as f64).ln() / r.d_repr.unwrap();
        let fits = [
            (fit_model_a(&recs).unwrap(), model_a_basis as fn(&ScalingRecord) -> f64),
            (fit_model_b(&recs).unwrap(), model_b_basis),
            (fit_model_repr(&recs).unwrap(), repr_basis),
        ];
        for (fit, basis) in &fits {
            let sse_at = |c: f64| recs.iter().map(|r| (basis(r) - c).powi(2)).sum::<f64>();
            for step in 1..=10 {
                let delta = 1e-3 * step as f64 / 10.0;
                for c in [fit.offset - delta, fit.offset + delta] {
                    check!(sse_at(c) > fit.sse, "set {set} {:?}: offset {c} beats {}", fit.model, fit.offset);
                }
            }
        }
        let lr = log_likelihood_ratio(&fits[0].0, &fits[1].0).unwrap();
        let e = (lr - (fits[1].0.sse - fits[0].0.sse) / 2.0).abs();
        check!(e <= 1e-12, "set {set}: log R off by {e:e}");
        worst_lr = worst_lr.max(e);
    }
    let specs: Vec<RecordSpec> = (0..30)
        .map(|i| RecordSpec { n: 200 + 150 * i, d_data: 5.0 + (i % 7) as f64, k_f: 1e-4 * (1 + i % 3) as f64 })
        .collect();
    for a_true in [-3.0, 0.0, 0.7, 4.2] {
        let got = fit_model_a(&synth_scaling_records(a_true, &specs, 0.0, 1).unwrap()).unwrap().offset;
        check!((got - a_true).abs() <= 1e-12, "a_true {a_true} recovered as {got}");
    }
    Ok(format!("100 sets, grid ±1e-3 beaten, log R worst {worst_lr:.1e}, a_true recovered"))
}

fn c8_lratio_sign() -> Outcome {
    let sizes = [500, 750, 1000, 1250, 1500, 1750];
    let specs: Vec<RecordSpec> = (0..60)
        .map(|i| RecordSpec {
            n: sizes[i % 6],
            d_data: 8.0 + (i / 6 % 5) as f64 * 4.0,
            k_f: if i % 2 == 0 { 1e-4 } else { 2.5e-4 },
        })
        .collect();
    let positive = (0..100u64)
        .filter(|&seed| {
            let recs = synth_scaling_records(0.5, &specs, 0.1, seed).unwrap();
            log_likelihood_ratio(&fit_model_a(&recs).unwrap(), &fit_model_b(&recs).unwrap()).unwrap() > 0.0
        })
        .count();
    check!(positive >= 95, "log R > 0 in only {positive}/100 seeds");
    Ok(format!("log R > 0 in {positive}/100 seeds"))
}

fn c9_task_ranking() -> Outcome {
    let r = rank_tasks(&[("task1".into(), 2.1e-4), ("task2".into(), 1.45e-4)]).unwrap();
    let order: Vec<&str> = r.order.iter().map(|t| t.name.as_str()).collect();
    check!(order == ["task1", "task2"], "order {order:?}");
    let ratio = r.ratios[0].ratio;
    check!((ratio - 1.448).abs() <= 1e-3, "ratio {ratio}");
    Ok(format!("order {order:?}, ratio {ratio:.4}"))
}

fn c10_pearson() -> Outcome {
    let r = pearson_r(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap().r;
    check!((r - 0.5).abs() <= 1e-12, "fixture r = {r}");
    let mut rng = rng_from_seed(10);
    let mut worst: f64 = 0.0;
    for v in 0..100 {
        let n = rng.random_range(3..200);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * rng.random_range(-1.0..1.0) + rng.random_range(-3.0..3.0)).collect();
        let (a, b, c, d) = (
            rng.random_range(0.1..10.0) * if rng.random() { 1.0 } else { -1.0 },
            rng.random_range(-50.0..50.0),
            rng.random_range(0.1..10.0),
            rng.random_range(-50.0..50.0),
        );
        let base = pearson_r(&xs, &ys).unwrap().r;
        let xs2: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let ys2: Vec<f64> = ys.iter().map(|y| c * y + d).collect();
        let moved = pearson_r(&xs2, &ys2).unwrap().r;
        let e = (moved - a.signum() * base).abs();
        check!(e <= 1e-12, "vector {v}: affine map moved r by {e:e}");
        worst = worst.max(e);
    }
    Ok(format!("fixture r = {r}, 100 affine maps, worst {worst:.1e}"))
}

fn c11_robustness() -> Outcome {
    let fixture = robustness_lower_bound(SQRT_2, 1.0).unwrap().lower_bound;
    check!(fixture == 1.0, "fixture gave {fixture}");
    let mut rng = rng_from_seed(11);
    for i in 0..100 {
        let m = rng.random_range(0.0..100.0);
        let k = 10f64.powf(rng.random_range(-3.0..3.0));
        let half = robustness_lower_bound(m, k / 2.0).unwrap().lower_bound;
        let full = robustness_lower_bound(m, k).unwrap().lower_bound;
        check!(half == 2.0 * full, "input {i}: R(m, k/2) = {half}, 2 R(m, k) = {}", 2.0 * full);
    }
    Ok("fixture 1.0, homogeneity exact on 100 inputs".into())
}

fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    Some(line.split_whitespace().nth(1)?.parse::<u64>().ok()? * 1024)
}

fn c12_performance() -> Outcome {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let m = random_matrix(2000, 50176, 12);
    let mut runs = Vec::new();
    for workers in [1, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
        let t = Instant::now();
        let table = pool.install(|| knn_l2(&m, 20).unwrap());
        runs.push((workers, t.elapsed(), table));
    }
    let peak = peak_rss_bytes().unwrap_or(0);
    let times: Vec<String> = runs.iter().map(|(w, t, _)| format!("{w}w {t:.1?}")).collect();
    let detail = format!("{cores} core(s) available; {}; peak RSS {:.2} GB", times.join(", "), peak as f64 / 1e9);
    let first = &runs[0].2;
    for (w, _, table) in &runs[1..] {
        let same = table.all_distances().iter().zip(first.all_distances()).all(|(a, b)| a.to_bits() == b.to_bits())
            && (0..first.n()).all(|i| table.neighbors(i) == first.neighbors(i));
        check!(same, "{w}-worker result differs from 1 worker; {detail}");
    }
    let slowest = runs.iter().map(|r| r.1).max().unwrap();
    check!(slowest < Duration::from_secs(60), "slowest run {slowest:?}; {detail}");
    check!(peak > 0 && peak < 8_000_000_000, "peak memory {peak} bytes; {detail}");
    Ok(detail)
}

fn c13_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_datadim")).arg("--json").args(args).current_dir(d).output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
        out.stdout
    };
    let commands: &[&[&str]] = &[
        &[
            "synth",
            "--kind",
            "sine-lift",
            "--d",
            "3",
            "--n",
            "10",
            "--points",
            "400",
            "--seed",
            "5",
            "--output",
            "s.ipmx",
            "--labels",
            "s.csv",
            "--margin",
            "0.01",
        ],
        &[
            "synth-records",
            "--a-true",
            "0.3",
            "--noise-sd",
            "0.1",
            "--sizes",
            "500,2000",
            "--d-data",
            "6,12",
            "--k-f",
            "1e-4,2.5e-4",
            "--seed",
            "8",
            "--output",
            "r.csv",
        ],
        &["id", "--input", "s.ipmx", "--repeats", "5", "--seed", "3"],
        &["id", "--input", "s.ipmx", "--estimator", "twonn", "--repeats", "4", "--seed", "3"],
        &["sharpness", "--input", "s.ipmx", "--labels", "s.csv", "--m", "100", "--seed", "2"],
        &["sharpness", "--input", "s.ipmx", "--labels", "s.csv", "--m", "100", "--runs", "6", "--seed", "2"],
        &["sharpness", "--input", "s.ipmx", "--labels", "s.csv", "--m", "100", "--multiclass", "--seed", "2"],
        &["fit", "--records", "r.csv", "--group-by-column", "dataset"],
        &["lratio", "--records", "r.csv"],
        &["knn", "--input", "s.ipmx", "--k", "4"],
    ];
    for args in commands {
        let outputs: Vec<(Vec<u8>, Vec<u8>)> = (0..3)
            .map(|_| {
                let stdout = run(args);
                let file = if args[0] == "synth" { std::fs::read(d.join("s.ipmx")).unwrap() } else { Vec::new() };
                (stdout, file)
            })
            .collect();
        check!(outputs.iter().all(|o| *o == outputs[0]), "{} differs between runs", args.join(" "));
    }
    Ok(format!("{} commands, 3 runs each, byte-identical", commands.len()))
}

fn main() {
    let criteria: [Criterion; 13] = [
        (1, "MLE hand fixture", c1_mle_fixture),
        (2, "TwoNN closed-form fixture", c2_twonn_fixture),
        (3, "synthetic-manifold recovery", c3_manifold_recovery),
        (4, "knn oracle equivalence", c4_knn_oracle),
        (5, "sharpness exhaustive oracle", c5_sharpness_oracle),
        (6, "invariance suite", c6_invariance),
        (7, "fit optimality", c7_fit_optimality),
        (8, "likelihood-ratio sign", c8_lratio_sign),
        (9, "task ranking", c9_task_ranking),
        (10, "Pearson", c10_pearson),
        (11, "robustness bound", c11_robustness),
        (12, "knn performance", c12_performance),
        (13, "CLI determinism", c13_determinism),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, name, f) in criteria {
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] criterion {n:>2} {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] criterion {n:>2} {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
