//! Acceptance suite. Each test prints one `[PASS]` / `[FAIL]` line and then
//! asserts, so `cargo test --test acceptance -- --nocapture` doubles as a
//! scoreboard.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use dfdetect::data::{class_weight, materialize, synth_dataset, Example, Label, Normalization, Split, SynthConfig};
use dfdetect::ensemble::{fuse, ScoreSet};
use dfdetect::metrics::{auc, auc_ratio, eer, render_table_row, roc_curve, AucRatio, TableRow};
use dfdetect::model::{build_model, count_params, render_profile_row, BackboneSpec, CountMode, ProfileRecord};
use dfdetect::train::{fit, loss_gradient, weighted_bce, TrainConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(id: &str, title: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] {id} {title}: {detail}");
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn split_xy(examples: &[Example]) -> (Vec<&[f64]>, Vec<Label>) {
    (
        examples.iter().map(|e| e.input.as_slice()).collect(),
        examples.iter().map(|e| e.label).collect(),
    )
}

#[test]
fn ac1_metric_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xac1);
    let (mut auc_err, mut eer_err) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let (scores, labels) = common::tied_score_set(&mut rng, 200);
        let curve = roc_curve(&scores, &labels).unwrap();
        auc_err = auc_err.max((auc(&curve) - common::pairwise_auc(&scores, &labels)).abs());
        let oracle = common::grid_eer(&scores, &labels, -0.001, 1.001, 100_000);
        eer_err = eer_err.max((eer(&curve) - oracle).abs());
    }
    let elapsed = start.elapsed();
    let pass = auc_err <= 1e-12 && eer_err <= 1e-3 && elapsed < Duration::from_secs(10);
    verdict(
        "AC-1",
        "metric oracle equivalence",
        pass,
        format!("max auc err {auc_err:.1e} (<=1e-12), max eer err {eer_err:.1e} (<=1e-3), {}", secs(elapsed)),
    );
    assert!(auc_err <= 1e-12);
    assert!(eer_err <= 1e-3);
    assert!(elapsed < Duration::from_secs(10));
}

#[test]
fn ac2_hand_verified_auc() {
    let labels = [Label::Real, Label::Real, Label::Fake, Label::Fake];
    let curve = roc_curve(&[0.1, 0.4, 0.35, 0.8], &labels).unwrap();
    let ratio = auc_ratio(&curve);
    let value = auc(&curve);
    let pass = value == 0.75 && ratio == AucRatio { num: 6, den: 8 };
    verdict("AC-2", "hand-verified AUC", pass, format!("auc {value} ({}/{})", ratio.num, ratio.den));
    assert_eq!(value, 0.75);
    assert_eq!(ratio.num * 4, ratio.den * 3);
}

#[test]
fn ac3_gradient_correctness() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut max_params = 0;
    for seed in 0..20 {
        let (model, batch, labels, w_real) = common::random_instance(seed);
        max_params = max_params.max(count_params(&model, CountMode::All));
        let analytic = loss_gradient(&model, &batch, &labels, w_real).unwrap().grads;
        let numeric = common::finite_difference_grads(&model, &batch, &labels, w_real, 1e-5);
        worst = worst.max(common::max_relative_error(&analytic, &numeric, 1e-8));
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-5 && max_params <= 500 && elapsed < Duration::from_secs(30);
    verdict(
        "AC-3",
        "gradient correctness",
        pass,
        format!("max rel err {worst:.2e} (<=1e-5) over 20 models, largest {max_params} params, {}", secs(elapsed)),
    );
    assert!(max_params <= 500);
    assert!(worst <= 1e-5);
    assert!(elapsed < Duration::from_secs(30));
}

#[test]
fn ac4_weighted_loss_fidelity() {
    let w = class_weight(42690, 219470).unwrap();
    let w_err = (w - 219470.0 / 42690.0).abs();
    let cases: [(&[f64], &[Label], f64, f64); 3] = [
        (&[0.5, 0.5], &[Label::Real, Label::Fake], 1.0, std::f64::consts::LN_2),
        (
            &[0.9, 0.2],
            &[Label::Fake, Label::Real],
            5.141,
            0.5 * (-(0.9f64).ln() - 5.141 * (0.8f64).ln()),
        ),
        (&[1.0 - 1e-4], &[Label::Fake], 1.0, -(1.0f64 - 1e-4).ln()),
    ];
    let mut loss_err = 0.0f64;
    for (scores, labels, w_real, expect) in cases {
        loss_err = loss_err.max((weighted_bce(scores, labels, w_real).unwrap() - expect).abs());
    }
    let pass = w_err <= 1e-9 && w.to_string().starts_with("5.141") && loss_err <= 1e-12;
    verdict(
        "AC-4",
        "weighted-loss fidelity",
        pass,
        format!("class_weight {w:.9} (err {w_err:.1e}), max loss err {loss_err:.1e} (<=1e-12)"),
    );
    assert!(w_err <= 1e-9);
    assert!(loss_err <= 1e-12);
}

#[test]
fn ac5_ensemble_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac5);
    let mut failures = 0;
    for trial in 0..1000 {
        let k = rng.random_range(1..=6);
        let n = rng.random_range(1..=40);
        let ids: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
        let members: Vec<ScoreSet> = (0..k)
            .map(|m| {
                let scores = ids.iter().map(|id| {
                    let v = match rng.random_range(0..10) {
                        0 => 0.0,
                        1 => 1.0,
                        _ => rng.random::<f64>(),
                    };
                    (id.clone(), v)
                });
                ScoreSet::new(format!("m{m}"), scores).unwrap()
            })
            .collect();
        let fused = fuse(&members).unwrap();

        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        let permuted = fuse(&shuffled).unwrap();
        let permutation_ok = ids.iter().all(|id| fused.scores[id].to_bits() == permuted.scores[id].to_bits());

        let copies = vec![members[0].clone(); k];
        let same = fuse(&copies).unwrap();
        let idempotent_ok = ids.iter().all(|id| same.scores[id].to_bits() == members[0].scores()[id].to_bits());

        let convex_ok = ids.iter().all(|id| {
            let vals: Vec<f64> = members.iter().map(|m| m.scores()[id]).collect();
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            lo <= fused.scores[id] && fused.scores[id] <= hi
        });

        if !(permutation_ok && idempotent_ok && convex_ok) {
            failures += 1;
            eprintln!("trial {trial}: perm {permutation_ok} idem {idempotent_ok} convex {convex_ok}");
        }
    }
    verdict(
        "AC-5",
        "ensemble invariants",
        failures == 0,
        format!("{failures} of 1000 member sets violate permutation/idempotence/convexity"),
    );
    assert_eq!(failures, 0);
}

fn train_member(train: &[Example], val: &[Example], seed: u64, dim: usize) -> dfdetect::model::ClassifierModel {
    let model = build_model(&BackboneSpec::toy_mlp(dim, 16, seed), 16, seed + 1).unwrap();
    let cfg = TrainConfig {
        learning_rate: 1e-3,
        max_epochs: 30,
        seed: seed + 2,
        ..TrainConfig::default()
    };
    fit(&model, train, val, &cfg).unwrap().best
}

#[test]
fn ac6_ensemble_beats_members() {
    let start = Instant::now();
    let norm = Normalization::default();
    let (mut above_mean, mut near_max) = (0, 0);
    let mut worst_margin = f64::INFINITY;
    for trial in 0..50u64 {
        let cfg = SynthConfig {
            seed: 1000 + trial,
            n_real: 400,
            n_fake: 2000,
            dim: 8,
            separation: 2.0,
            label_noise: 0.1,
            ..SynthConfig::default()
        };
        let manifest = synth_dataset(&cfg).unwrap();
        let shape = [1, 1, cfg.dim];
        let train = materialize(&manifest, Split::Train, shape, &norm).unwrap();
        let val = materialize(&manifest, Split::Val, shape, &norm).unwrap();
        let test = materialize(&manifest, Split::Test, shape, &norm).unwrap();
        let (inputs, labels) = split_xy(&test);

        let mut members = Vec::new();
        let mut member_aucs = Vec::new();
        for k in 0..3 {
            let model = train_member(&train, &val, trial * 10 + k, cfg.dim);
            let scores = model.forward(&inputs).unwrap();
            member_aucs.push(auc(&roc_curve(&scores, &labels).unwrap()));
            let set = ScoreSet::new(
                model.model_id(),
                test.iter().map(|e| e.sample_id.clone()).zip(scores),
            )
            .unwrap();
            members.push(set);
        }
        let fused = fuse(&members).unwrap();
        let fused_scores: Vec<f64> = test.iter().map(|e| fused.scores[&e.sample_id]).collect();
        let fused_auc = auc(&roc_curve(&fused_scores, &labels).unwrap());

        let mean = member_aucs.iter().sum::<f64>() / 3.0;
        let max = member_aucs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        above_mean += (fused_auc >= mean) as usize;
        near_max += (fused_auc >= max - 0.02) as usize;
        worst_margin = worst_margin.min(fused_auc - (max - 0.02));
    }
    let elapsed = start.elapsed();
    let pass = above_mean >= 45 && near_max == 50 && elapsed < Duration::from_secs(300);
    verdict(
        "AC-6",
        "ensemble outperforms members",
        pass,
        format!(
            "fused >= member mean in {above_mean}/50 (need 45), >= max-0.02 in {near_max}/50 (min slack {worst_margin:.4}), {}",
            secs(elapsed)
        ),
    );
    assert!(above_mean >= 45);
    assert_eq!(near_max, 50);
    assert!(elapsed < Duration::from_secs(300));
}

#[test]
fn ac7_training_convergence() {
    let cfg = SynthConfig {
        seed: 7,
        n_real: 200,
        n_fake: 1000,
        dim: 8,
        separation: 6.0,
        ..SynthConfig::default()
    };
    let manifest = synth_dataset(&cfg).unwrap();
    let norm = Normalization::default();
    let train = materialize(&manifest, Split::Train, [1, 1, 8], &norm).unwrap();
    let val = materialize(&manifest, Split::Val, [1, 1, 8], &norm).unwrap();

    let model = build_model(&BackboneSpec::toy_mlp(8, 16, 7), 16, 8).unwrap();
    let tc = TrainConfig {
        learning_rate: 1e-3,
        max_epochs: 30,
        seed: 9,
        ..TrainConfig::default()
    };
    let result = fit(&model, &train, &val, &tc).unwrap();
    let best = result.best_epoch.map(|e| result.stats[e].val_auc).unwrap_or(f64::NAN);

    let features: Vec<Vec<f64>> = train.iter().map(|e| e.input.clone()).collect();
    let (_, train_labels) = split_xy(&train);
    let w = common::lda_direction(&features, &train_labels);
    let (val_inputs, val_labels) = split_xy(&val);
    let oracle_scores: Vec<f64> = val_inputs.iter().map(|x| common::dot(&w, x)).collect();
    let oracle = common::pairwise_auc(&oracle_scores, &val_labels);

    let pass = best >= 0.99 && best >= oracle - 0.02 && result.stats.len() <= 30;
    verdict(
        "AC-7",
        "training convergence",
        pass,
        format!(
            "best val auc {best:.4} at epoch {:?} (>=0.99), oracle {oracle:.4} (gap {:.4} <= 0.02)",
            result.best_epoch,
            oracle - best
        ),
    );
    assert!(best >= 0.99);
    assert!(best >= oracle - 0.02);
}

#[test]
fn ac8_table_fixtures() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let table2 = std::fs::read_to_string(golden.join("table2_ensemble_row.txt")).unwrap();
    let table1 = std::fs::read_to_string(golden.join("table1_densenet121_row.txt")).unwrap();

    let row = TableRow {
        f1_real: 71.2,
        f1_fake: 89.3,
        accuracy: 84.4,
        eer: 9.0,
        auc: 96.8,
    };
    let rendered2 = render_table_row("AIMv2 + DINOv2 + ViT-L/14", &row) + "\n";
    let record = ProfileRecord {
        model_id: "densenet121".into(),
        param_count: 8_000_000,
        inference_ms: 9.2,
        size_mb: 33.0,
        rep_ms: vec![9.2],
    };
    let rendered1 = render_profile_row("DenseNet121", &record) + "\n";

    let pass = rendered2 == table2 && rendered1 == table1;
    verdict(
        "AC-8",
        "table fixtures",
        pass,
        format!("{:?} / {:?}", rendered2.trim_end(), rendered1.trim_end()),
    );
    assert_eq!(rendered2, table2);
    assert_eq!(rendered1, table1);
}

const TRAIN_CONFIG: &str = r#"
[model]
head_hidden = 8
backbone = { kind = "toy_mlp", input_shape = [1, 1, 8], embed_dim = 8 }

[train]
learning_rate = 1e-3
max_epochs = 4
batch_size = 16
"#;

/// One full CLI pass with `root` as working directory and relative paths
/// throughout, so the recorded config is identical between passes. Returns
/// the profile output lines that do not carry latency.
fn cli_pipeline(root: &Path) -> Vec<String> {
    std::fs::create_dir_all(root).unwrap();
    std::fs::write(root.join("run.toml"), TRAIN_CONFIG).unwrap();
    let cli = |args: &[&str]| common::cli_ok_in(root, args);

    cli(&["synth", "--seed", "5", "--n-real", "60", "--n-fake", "240", "--label-noise", "0.05", "--out-dir", "data"]);
    for (seed, run) in [("11", "run_a"), ("12", "run_b")] {
        let ckpt = format!("{run}/best.ckpt.json");
        let scores = format!("{run}/scores.csv");
        let report = format!("{run}/report.txt");
        cli(&["train", "--config", "run.toml", "--seed", seed, "--manifest", "data/manifest.txt", "--out-dir", run]);
        cli(&["predict", "--checkpoint", &ckpt, "--manifest", "data/manifest.txt", "--out", &scores]);
        cli(&["eval", "--scores", &scores, "--manifest", "data/manifest.txt", "--out", &report]);
    }
    cli(&["fuse", "run_a/scores.csv", "run_b/scores.csv", "--out", "fused.csv"]);
    cli(&["eval", "--scores", "fused.csv", "--manifest", "data/manifest.txt", "--out", "fused_report.txt"]);
    let profile = cli(&["profile", "--checkpoint", "run_a/best.ckpt.json", "--reps", "3"]);
    profile
        .lines()
        .filter(|l| l.starts_with("param_count") || l.starts_with("size_mb") || l.starts_with("model_id"))
        .map(str::to_string)
        .collect()
}

#[test]
fn ac9_cli_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let first = cli_pipeline(&tmp.path().join("first"));
    let second = cli_pipeline(&tmp.path().join("second"));

    let artifacts = [
        "data/manifest.txt",
        "run_a/best.ckpt.json",
        "run_a/final.ckpt.json",
        "run_a/stats.jsonl",
        "run_a/config.toml",
        "run_a/scores.csv",
        "run_a/report.txt",
        "run_b/best.ckpt.json",
        "run_b/scores.csv",
        "run_b/report.txt",
        "fused.csv",
        "fused_report.txt",
    ];
    let mut differing = Vec::new();
    for rel in artifacts {
        let a = std::fs::read(tmp.path().join("first").join(rel)).unwrap();
        let b = std::fs::read(tmp.path().join("second").join(rel)).unwrap();
        if a != b {
            differing.push(rel);
        }
    }
    // the two members must actually differ, or fusion proves nothing
    let a = std::fs::read(tmp.path().join("first/run_a/scores.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("first/run_b/scores.csv")).unwrap();
    let members_differ = a != b;

    let pass = differing.is_empty() && first == second && members_differ;
    verdict(
        "AC-9",
        "determinism",
        pass,
        format!(
            "{} artifacts compared, differing: {differing:?}, profile fields equal: {}",
            artifacts.len(),
            first == second
        ),
    );
    assert!(differing.is_empty(), "differing artifacts: {differing:?}");
    assert_eq!(first, second);
    assert!(members_differ);
}
