//! Shared oracles for the integration tests. Each oracle is written
//! independently of the library code path it checks.
#![allow(dead_code)]

use std::path::Path;

use dfdetect::data::Label;
use dfdetect::model::{build_model, BackboneSpec, ClassifierModel};
use dfdetect::train::weighted_bce;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tie-corrected pairwise AUC: P(fake > real) + 0.5 P(fake == real).
pub fn pairwise_auc(scores: &[f64], labels: &[Label]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, li) in labels.iter().enumerate() {
        if !li.is_fake() {
            continue;
        }
        for (j, lj) in labels.iter().enumerate() {
            if lj.is_fake() {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// `(fpr, fnr)` at one threshold by direct counting.
pub fn rates_at(scores: &[f64], labels: &[Label], t: f64) -> (f64, f64) {
    let (mut fp, mut fnn, mut nr, mut nf) = (0usize, 0usize, 0usize, 0usize);
    for (s, l) in scores.iter().zip(labels) {
        if l.is_fake() {
            nf += 1;
            if *s < t {
                fnn += 1;
            }
        } else {
            nr += 1;
            if *s >= t {
                fp += 1;
            }
        }
    }
    (fp as f64 / nr as f64, fnn as f64 / nf as f64)
}

/// EER from `n` evenly spaced thresholds over `[lo, hi]`, scanned from high
/// to low. Returns the value where `fpr - fnr` changes sign, linearly
/// interpolated between the two bracketing grid operating points.
pub fn grid_eer(scores: &[f64], labels: &[Label], lo: f64, hi: f64, n: usize) -> f64 {
    let mut real: Vec<f64> = Vec::new();
    let mut fake: Vec<f64> = Vec::new();
    for (s, l) in scores.iter().zip(labels) {
        if l.is_fake() {
            fake.push(*s);
        } else {
            real.push(*s);
        }
    }
    real.sort_by(f64::total_cmp);
    fake.sort_by(f64::total_cmp);
    // counts of scores strictly below t
    let below = |v: &[f64], t: f64| v.partition_point(|&s| s < t);
    let rates = |t: f64| {
        let fp = real.len() - below(&real, t);
        let fnn = below(&fake, t);
        (fp as f64 / real.len() as f64, fnn as f64 / fake.len() as f64)
    };
    let mut prev = (0.0, 1.0);
    let mut closest = (f64::INFINITY, 0.0);
    for k in 0..n {
        let t = hi - (hi - lo) * k as f64 / (n - 1) as f64;
        let cur = rates(t);
        let d0 = prev.0 - prev.1;
        let d1 = cur.0 - cur.1;
        if d1.abs() < closest.0 {
            closest = (d1.abs(), cur.0);
        }
        if d1 == 0.0 {
            return cur.0;
        }
        if d0 < 0.0 && d1 > 0.0 {
            let w = -d0 / (d1 - d0);
            return prev.0 + w * (cur.0 - prev.0);
        }
        prev = cur;
    }
    closest.1
}

/// Scores on a 1/1000 lattice with a few forced tie groups, plus labels
/// with both classes present.
pub fn tied_score_set(rng: &mut ChaCha8Rng, max_n: usize) -> (Vec<f64>, Vec<Label>) {
    let n = rng.random_range(2..=max_n);
    let mut scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..=1000) as f64 / 1000.0).collect();
    let groups = rng.random_range(1..=4);
    for _ in 0..groups {
        let v = scores[rng.random_range(0..n)];
        let size = rng.random_range(2..=(n / 4).max(2));
        for _ in 0..size {
            scores[rng.random_range(0..n)] = v;
        }
    }
    let p_fake = rng.random_range(0.1..0.9);
    let mut labels: Vec<Label> = (0..n)
        .map(|_| if rng.random_bool(p_fake) { Label::Fake } else { Label::Real })
        .collect();
    labels[0] = Label::Real;
    labels[1] = Label::Fake;
    (scores, labels)
}

/// Max over entries of `|a - b| / max(|a|, |b|, floor)`.
pub fn max_relative_error(a: &[Vec<f64>], b: &[Vec<f64>], floor: f64) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// Closed-form Gaussian discriminant direction `w = S^-1 (mu_fake - mu_real)`
/// with pooled covariance `S`, fit on `(features, labels)`.
pub fn lda_direction(features: &[Vec<f64>], labels: &[Label]) -> Vec<f64> {
    let d = features[0].len();
    let mut mean = [nalgebra::DVector::zeros(d), nalgebra::DVector::zeros(d)];
    let mut count = [0.0f64; 2];
    for (x, l) in features.iter().zip(labels) {
        let c = l.is_fake() as usize;
        mean[c] += nalgebra::DVector::from_column_slice(x);
        count[c] += 1.0;
    }
    for c in 0..2 {
        mean[c] /= count[c];
    }
    let mut cov = nalgebra::DMatrix::zeros(d, d);
    for (x, l) in features.iter().zip(labels) {
        let r = nalgebra::DVector::from_column_slice(x) - &mean[l.is_fake() as usize];
        cov += &r * r.transpose();
    }
    cov /= count[0] + count[1] - 2.0;
    let w = cov.lu().solve(&(&mean[1] - &mean[0])).expect("pooled covariance is singular");
    w.iter().copied().collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Central finite differences of the weighted loss over every trainable entry.
pub fn finite_difference_grads(
    model: &ClassifierModel,
    batch: &[Vec<f64>],
    labels: &[Label],
    w_real: f64,
    h: f64,
) -> Vec<Vec<f64>> {
    let loss = |m: &ClassifierModel| weighted_bce(&m.forward(batch).unwrap(), labels, w_real).unwrap();
    let mut probe = model.clone();
    let mut out = Vec::new();
    for pi in 0..model.params().len() {
        let mut g = vec![0.0; model.params()[pi].len()];
        if model.params()[pi].trainable {
            for (k, gk) in g.iter_mut().enumerate() {
                let orig = probe.params()[pi].data[k];
                probe.params_mut()[pi].data[k] = orig + h;
                let up = loss(&probe);
                probe.params_mut()[pi].data[k] = orig - h;
                let down = loss(&probe);
                probe.params_mut()[pi].data[k] = orig;
                *gk = (up - down) / (2.0 * h);
            }
        }
        out.push(g);
    }
    out
}

/// Random small model and batch, both classes present. Returns
/// `(model, batch, labels, w_real)`.
pub fn random_instance(seed: u64) -> (ClassifierModel, Vec<Vec<f64>>, Vec<Label>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = if seed.is_multiple_of(2) {
        let dim = rng.random_range(2..=8);
        BackboneSpec::toy_mlp(dim, rng.random_range(2..=8), rng.random())
    } else {
        let shape = [rng.random_range(2..=4), rng.random_range(2..=4), rng.random_range(1..=3)];
        BackboneSpec::toy_conv(shape, rng.random_range(2..=5), rng.random())
    };
    let hidden = rng.random_range(2..=10);
    let mut model = build_model(&spec, hidden, rng.random()).unwrap();
    // move biases off zero so every array gets a generic gradient
    for p in model.params_mut() {
        for v in &mut p.data {
            *v += rng.random_range(-0.3..0.3);
        }
    }
    let n = rng.random_range(3..=8);
    let batch: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..spec.input_len()).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let mut labels: Vec<Label> = (0..n)
        .map(|_| if rng.random_bool(0.5) { Label::Fake } else { Label::Real })
        .collect();
    labels[0] = Label::Real;
    labels[1] = Label::Fake;
    let w_real = rng.random_range(1.0..6.0);
    (model, batch, labels, w_real)
}
/// Run the CLI and return `(exit code, stdout, stderr)`.
pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    run_cli_in(Path::new("."), args)
}

/// Like [`run_cli`] with `dir` as the working directory.
pub fn run_cli_in(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_dfdetect"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("failed to spawn dfdetect");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// Run the CLI and panic with its stderr unless it exits 0.
pub fn cli_ok(args: &[&str]) -> String {
    cli_ok_in(Path::new("."), args)
}

pub fn cli_ok_in(dir: &Path, args: &[&str]) -> String {
    let (code, stdout, stderr) = run_cli_in(dir, args);
    assert_eq!(code, 0, "dfdetect {args:?} failed: {stderr}");
    stdout
}
