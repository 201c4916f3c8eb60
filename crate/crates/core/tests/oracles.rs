mod common;

use common::*;
use datadim_core::id::{mle_id, twonn_id};
use datadim_core::knn::{knn_l2, pairwise_l2};
use datadim_core::sharpness::{label_sharpness, multiclass_sharpness, paired_run_plan, paired_sharpness};
use datadim_core::synth::label_halfspace;
use datadim_core::{rng_from_seed, LabeledDataset, Matrix, TwoNnVariant};
use rand::Rng;

#[test]
fn knn_matches_brute_force_500_points() {
    let m = random_matrix(500, 32, 2024);
    let table = knn_l2(&m, 20).unwrap();
    let oracle = brute_knn(&m, 20);
    for (i, want) in oracle.iter().enumerate() {
        for (got, want) in table.distances(i).iter().zip(want) {
            assert!(rel_close(*got, *want, 1e-12), "row {i}: {got} vs {want}");
        }
    }
}

#[test]
fn pairwise_matches_double_loop() {
    let m = random_matrix(200, 17, 5);
    let got = pairwise_l2(&m).unwrap();
    let want = brute_pairwise(&m);
    assert_eq!(got.len(), 200 * 199 / 2);
    for (g, w) in got.iter().zip(&want) {
        assert!(rel_close(*g, *w, 1e-12));
    }
}

#[test]
fn mle_matches_direct_formula() {
    for seed in 0..5 {
        let m = random_matrix(150 + 10 * seed as usize, 6, seed);
        let got = mle_id(&m, 20).unwrap().value;
        assert!(rel_close(got, direct_mle(&m, 20), 1e-10), "seed {seed}");
    }
}

#[test]
fn twonn_closed_form_matches_direct_ratios() {
    let m = random_matrix(300, 5, 77);
    let t = brute_knn(&m, 2);
    let mut mu: Vec<f64> = t.iter().map(|r| r[1] / r[0]).collect();
    mu.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let kept = &mu[..300 - 30];
    let want = kept.len() as f64 / kept.iter().map(|m| m.ln()).sum::<f64>();
    let got = twonn_id(&m, 0.1, TwoNnVariant::ClosedForm).unwrap();
    assert!(rel_close(got.value, want, 1e-10));
    assert_eq!(got.n_discarded, 30);
}

#[test]
fn sharpness_four_point_fixture_and_oracle() {
    let m = Matrix::from_rows(&[[0.0, 0.0], [0.0, 2.0], [0.5, 0.0], [5.0, 5.0]]).unwrap();
    let labels = vec![0, 0, 1, 1];
    assert_eq!(exhaustive_sharpness(&m, &labels), 2.0);
    let d = LabeledDataset::new(m, labels).unwrap();
    for m_samples in [4, 10, 1000] {
        assert_eq!(label_sharpness(&d, m_samples, 0).unwrap().value, 2.0);
    }
}

#[test]
fn halfspace_labeling_full_enumeration() {
    let pts = random_matrix(500, 6, 31);
    let normal = [0.3, -1.0, 0.5, 0.0, 2.0, 0.1];
    let h = label_halfspace(&pts, &normal, 0.1, 0.05).unwrap();
    let n = h.data.len();
    let want = exhaustive_sharpness(h.data.points(), h.data.labels());
    let got = label_sharpness(&h.data, n, 8).unwrap();
    assert_eq!(got.value, want);
    assert_eq!(got.m_used, n);
    // Margin guarantee: every cross-class pair is at least 2 * margin / |normal| apart.
    let norm = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(1.0 / want >= 2.0 * 0.05 / norm - 1e-12);
}

#[test]
fn multiclass_matches_exhaustive_indicator() {
    let mut rng = rng_from_seed(3);
    let m = random_matrix(120, 4, 3);
    let labels: Vec<u64> = (0..120).map(|_| rng.random_range(0..4)).collect();
    let want = exhaustive_sharpness(&m, &labels);
    let d = LabeledDataset::new(m, labels).unwrap();
    assert_eq!(multiclass_sharpness(&d, 120, 1).unwrap().value, want);
}

#[test]
fn binary_multiclass_agree_on_same_samples() {
    let mut rng = rng_from_seed(12);
    let m = random_matrix(400, 3, 12);
    let labels: Vec<u64> = (0..400).map(|_| rng.random_range(0..2)).collect();
    let d = LabeledDataset::new(m, labels).unwrap();
    for seed in 0..5 {
        let a = label_sharpness(&d, 100, seed).unwrap();
        let b = multiclass_sharpness(&d, 100, seed).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.argmax_pair, b.argmax_pair);
    }
}

#[test]
fn paired_runs_match_per_pair_oracle() {
    let m = random_matrix(90, 3, 21);
    let labels: Vec<u64> = (0..90).map(|i| (i % 3) as u64 * 10).collect();
    let d = LabeledDataset::new(m.clone(), labels.clone()).unwrap();
    let classes = d.classes();
    let runs = 7;
    let est = paired_sharpness(&d, 1000, runs, 99).unwrap();
    let plan = paired_run_plan(classes.len(), runs, 99);
    let mut want = Vec::new();
    for p in &plan {
        let rows: Vec<usize> =
            (0..90).filter(|&i| labels[i] == classes[p.first] || labels[i] == classes[p.second]).collect();
        let sub = m.select_rows(&rows).unwrap();
        let sub_labels: Vec<u64> = rows.iter().map(|&i| labels[i]).collect();
        want.push(exhaustive_sharpness(&sub, &sub_labels));
    }
    assert_eq!(est.per_run_values, want);
    let mean = want.iter().sum::<f64>() / runs as f64;
    assert!(rel_close(est.value, mean, 1e-15));
}

#[test]
fn paired_with_sampling_reuses_subseeds() {
    let mut rng = rng_from_seed(5);
    let m = random_matrix(300, 4, 5);
    let labels: Vec<u64> = (0..300).map(|_| rng.random_range(0..2)).collect();
    let d = LabeledDataset::new(m, labels).unwrap();
    let est = paired_sharpness(&d, 50, 4, 17).unwrap();
    for (p, v) in paired_run_plan(2, 4, 17).iter().zip(&est.per_run_values) {
        assert_eq!(label_sharpness(&d, 50, p.subseed).unwrap().value, *v);
    }
    let single = paired_sharpness(&d, 50, 1, 17).unwrap();
    assert_eq!(single.value, single.per_run_values[0]);
}
