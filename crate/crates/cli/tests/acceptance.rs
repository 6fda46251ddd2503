//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 1-8 and the protocol checks of 10 are binding; a failure there
//! makes the process exit nonzero. The corpus replications (9 and the score
//! targets of 10) only run when the real data is supplied:
//!
//! - `TDSL_LIAR_DIR`: directory with `train.tsv`, `valid.tsv`, `test.tsv`
//! - `TDSL_PHEME_PATH`: normalized PHEME JSONL file
//! - `TDSL_ACCEPTANCE_FULL=1`: also run the full-length LIAR replication

mod common;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdsl::corpus::{build_vocab, loeo_folds, parse_liar, parse_pheme, synthetic_separable};
use tdsl::engine::{conv2d_forward, maxpool2d_forward, mse_consistency, softmax_cross_entropy};
use tdsl::eval::{binary_metrics, confusion, macro_metrics, run_loeo, ConfusionCounts};
use tdsl::model::{self, Mode, TdslParams};
use tdsl::train::{accuracy, batch_loss, rampup_weight, train};
use tdsl::{Class, ModelConfig, Split, Tensor, TrainConfig};

type Outcome = Result<String, String>;

/// Name, whether it is binding, and the check.
type Criterion = (&'static str, bool, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_s: u64, detail: String) -> Outcome {
    ensure(
        elapsed <= Duration::from_secs(limit_s),
        format!("{detail}; {:.1}s (limit {limit_s}s)", elapsed.as_secs_f64()),
    )
}

fn uniform(r: &mut ChaCha8Rng, shape: &[usize], bound: f64) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| r.gen_range(-bound..bound)).collect()).unwrap()
}

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / (a.abs() + n.abs()).max(1e-6)
}

// ---------------------------------------------------------------- 1

fn scalar_loss(params: &TdslParams, ids: &[usize], y: usize, w: f64) -> f64 {
    let out = model::forward(params, ids, Mode::Infer).unwrap();
    let c = out.z.len() as f64;
    softmax_cross_entropy(&out.z, y).unwrap().0 + w * mse_consistency(&out.z, &out.z_prime).unwrap().0 / c
}

fn gradient_fidelity() -> Outcome {
    let start = Instant::now();
    let config = ModelConfig::new(20, 6, 8).with_filters(4, 4);
    let (h, w) = (1e-6, 0.7);
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for seed in 0..2u64 {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let mut params = TdslParams::zeros(config).unwrap();
        for t in params.tensors_mut() {
            *t = uniform(&mut r, t.shape(), 0.3);
        }
        let ids: Vec<usize> = (0..config.max_len).map(|_| r.gen_range(0..config.vocab_size)).collect();
        let y = r.gen_range(0..2);

        let out = model::forward(&params, &ids, Mode::Infer).unwrap();
        let c = out.z.len() as f64;
        let (_, g_ce) = softmax_cross_entropy(&out.z, y).unwrap();
        let (_, g_z, g_zp) = mse_consistency(&out.z, &out.z_prime).unwrap();
        let grad_z: Vec<f64> = g_ce.data().iter().zip(g_z.data()).map(|(a, b)| a + w * b / c).collect();
        let grad_zp: Vec<f64> = g_zp.data().iter().map(|b| w * b / c).collect();
        let mut grads = params.zeros_like();
        model::backward(&params, out.trace, &Tensor::from_vec(grad_z), &Tensor::from_vec(grad_zp), &mut grads).unwrap();

        for (k, g) in grads.tensors().iter().enumerate() {
            for i in 0..g.len() {
                let mut p = params.clone();
                let orig = p.tensors()[k].data()[i];
                p.tensors_mut()[k].data_mut()[i] = orig + h;
                let up = scalar_loss(&p, &ids, y, w);
                p.tensors_mut()[k].data_mut()[i] = orig - h;
                let down = scalar_loss(&p, &ids, y, w);
                worst = worst.max(rel_err(g.data()[i], (up - down) / (2.0 * h)));
                checked += 1;
            }
        }
    }
    let detail = format!("max relative error {worst:.2e} over {checked} parameters");
    ensure(worst < 1e-4, detail.clone()).and_then(|d| within(start.elapsed(), 60, d))
}

// ---------------------------------------------------------------- 2

fn conv_oracle(x: &Tensor, k: &Tensor, b: &Tensor) -> Vec<f64> {
    let &[h, w, cin] = x.shape() else { unreachable!() };
    let &[f, _, _, cout] = k.shape() else { unreachable!() };
    let before = (f - 1) as isize / 2;
    let mut out = Vec::new();
    for y in 0..h as isize {
        for xx in 0..w as isize {
            for co in 0..cout {
                let mut s = b.data()[co];
                for dy in 0..f {
                    for dx in 0..f {
                        let (iy, ix) = (y + dy as isize - before, xx + dx as isize - before);
                        if iy < 0 || ix < 0 || iy >= h as isize || ix >= w as isize {
                            continue;
                        }
                        for ci in 0..cin {
                            let xv = x.data()[(iy as usize * w + ix as usize) * cin + ci];
                            s += xv * k.data()[((dy * f + dx) * cin + ci) * cout + co];
                        }
                    }
                }
                out.push(s.max(0.0));
            }
        }
    }
    out
}

fn pool_oracle(x: &Tensor) -> Vec<f64> {
    let &[h, w, c] = x.shape() else { unreachable!() };
    let mut out = Vec::new();
    for oy in 0..h.div_ceil(2) {
        for ox in 0..w.div_ceil(2) {
            for ch in 0..c {
                let mut m = f64::NEG_INFINITY;
                for y in 2 * oy..(2 * oy + 2).min(h) {
                    for xx in 2 * ox..(2 * ox + 2).min(w) {
                        m = m.max(x.data()[(y * w + xx) * c + ch]);
                    }
                }
                out.push(m);
            }
        }
    }
    out
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let n = 100;
    let mut conv_err = 0.0f64;
    let mut pool_err = 0.0f64;
    for seed in 0..n {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (h, w, cin, f, cout) = (r.gen_range(1..9), r.gen_range(1..9), r.gen_range(1..4), r.gen_range(1..6), r.gen_range(1..5));
        let x = uniform(&mut r, &[h, w, cin], 1.0);
        let k = uniform(&mut r, &[f, f, cin, cout], 1.0);
        let b = uniform(&mut r, &[cout], 1.0);
        let out = conv2d_forward(&x, &k, &b).unwrap().0;
        let oracle = conv_oracle(&x, &k, &b);
        if out.len() != oracle.len() {
            return Err(format!("conv instance {seed}: {} outputs, oracle {}", out.len(), oracle.len()));
        }
        conv_err = out.data().iter().zip(&oracle).map(|(a, o)| (a - o).abs()).fold(conv_err, f64::max);

        let shape = [r.gen_range(1..10), r.gen_range(1..10), r.gen_range(1..4)];
        let x = uniform(&mut r, &shape, 1.0);
        let out = maxpool2d_forward(&x).unwrap().0;
        let oracle = pool_oracle(&x);
        if out.len() != oracle.len() {
            return Err(format!("pool instance {seed}: {} outputs, oracle {}", out.len(), oracle.len()));
        }
        pool_err = out.data().iter().zip(&oracle).map(|(a, o)| (a - o).abs()).fold(pool_err, f64::max);
    }

    let mut count_mismatch = 0;
    let mut metric_mismatch = 0;
    for seed in 0..n {
        let mut r = ChaCha8Rng::seed_from_u64(10_000 + seed);
        let len = r.gen_range(1..50);
        let mut pick = || if r.gen_bool(0.5) { Class::Fake } else { Class::True };
        let gold: Vec<Class> = (0..len).map(|_| pick()).collect();
        let pred: Vec<Class> = (0..len).map(|_| pick()).collect();
        let pos = if seed % 2 == 0 { Class::Fake } else { Class::True };
        let c = confusion(&pred, &gold, pos).unwrap();
        let mut brute = ConfusionCounts { tp: 0, fp: 0, fn_: 0, tn: 0, positive_class: pos };
        for (p, g) in pred.iter().zip(&gold) {
            match (*p == pos, *g == pos) {
                (true, true) => brute.tp += 1,
                (true, false) => brute.fp += 1,
                (false, true) => brute.fn_ += 1,
                (false, false) => brute.tn += 1,
            }
        }
        if (c.tp, c.fp, c.fn_, c.tn) != (brute.tp, brute.fp, brute.fn_, brute.tn) {
            count_mismatch += 1;
        }
        let m = binary_metrics(&c);
        let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let (p, rc) = (div(brute.tp, brute.tp + brute.fp), div(brute.tp, brute.tp + brute.fn_));
        let f = if p + rc == 0.0 { 0.0 } else { 2.0 * p * rc / (p + rc) };
        let acc = div(brute.tp + brute.tn, len);
        if (m.accuracy, m.precision, m.recall, m.fscore) != (acc, p, rc, f) {
            metric_mismatch += 1;
        }
    }
    let detail = format!(
        "{n} instances each; conv max abs diff {conv_err:.1e}, pool {pool_err:.1e}, \
         {count_mismatch} count and {metric_mismatch} metric mismatches"
    );
    ensure(conv_err <= 1e-12 && pool_err <= 1e-12 && count_mismatch == 0 && metric_mismatch == 0, detail)
        .and_then(|d| within(start.elapsed(), 30, d))
}

// ---------------------------------------------------------------- 3

fn loss_identities() -> Outcome {
    let config = ModelConfig::new(20, 6, 8).with_filters(4, 4);
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let mut params = TdslParams::zeros(config).unwrap();
    for t in params.tensors_mut() {
        *t = uniform(&mut r, t.shape(), 0.3);
    }
    let ids: Vec<usize> = (0..8).map(|i| (i * 7) % 20).collect();
    let out = model::forward(&params, &ids, Mode::Infer).unwrap();
    let (z, zp) = (vec![out.z.clone(), out.z.clone()], vec![out.z_prime.clone(), out.z_prime.clone()]);

    let (a, _, _) = batch_loss(&z, &zp, &[Some(0), None], &[true, false], 0.0, 2).unwrap();
    let (b, _, _) = batch_loss(&z, &zp, &[None, None], &[false, false], 0.6, 2).unwrap();
    let mut twin = params.clone();
    twin.unsup = twin.sup.clone();
    let t = model::forward(&twin, &ids, Mode::Infer).unwrap();
    let (c, _, _) = batch_loss(&[t.z], &[t.z_prime], &[Some(1)], &[true], 1.0, 2).unwrap();

    let zero = Tensor::from_vec(vec![0.0, 0.0]);
    let shifted = Tensor::from_vec(vec![-1.0, 0.0]);
    let (d, _, _) = batch_loss(
        &[zero.clone(), zero],
        &[shifted.clone(), shifted],
        &[Some(0), None],
        &[true, false],
        1.0,
        2,
    )
    .unwrap();
    let sup_err = (d.supervised - std::f64::consts::LN_2 / 2.0).abs();
    let unsup_err = (d.unsupervised - 0.5).abs();

    let detail = format!(
        "(a) total-sup {:.1e} (b) sup {} (c) unsup {} (d) |sup-ln2/2| {sup_err:.1e} |unsup-0.5| {unsup_err:.1e}",
        a.total - a.supervised,
        b.supervised,
        c.unsupervised
    );
    ensure(
        a.total == a.supervised && b.supervised == 0.0 && c.unsupervised == 0.0 && sup_err <= 1e-12 && unsup_err <= 1e-12,
        detail,
    )
}

// ---------------------------------------------------------------- 4

fn ramp_up() -> Outcome {
    let w_max = 1.0;
    let w1 = rampup_weight(1, 80, w_max) / w_max;
    let wt = rampup_weight(80, 80, w_max);
    let ws: Vec<f64> = (1..=200).map(|t| rampup_weight(t, 80, w_max)).collect();
    let monotone = ws.windows(2).all(|p| p[1] >= p[0]);
    let scaled = rampup_weight(80, 80, 2.5) == 2.5;
    ensure(
        (w1 - 0.00763).abs() <= 1e-5 && wt == w_max && monotone && scaled,
        format!("w(1)/w_max = {w1:.6}, w(80) = {wt}, monotone over 1..200: {monotone}"),
    )
}

// ---------------------------------------------------------------- 5

fn metric_reproduction() -> Outcome {
    // F of the published precision and recall, through the same code path
    // as evaluation: counts with exactly that precision and recall.
    let (tp, fp, fn_) = (8357 * 9994, 1643 * 9994, 8357 * 6);
    let c = ConfusionCounts { tp, fp, fn_, tn: 0, positive_class: Class::Fake };
    let m = binary_metrics(&c);
    let f_err = (m.fscore - 0.9102).abs();

    let report = |f: f64| tdsl::eval::MetricsReport { fscore: f, ..binary_metrics(&c) };
    let mf = macro_metrics(&[report(0.2), report(0.4)]).unwrap().macro_f;
    ensure(
        f_err <= 5e-4 && mf == 0.3,
        format!("P {:.4} R {:.4} F {:.4} (|F-0.9102| {f_err:.1e}); MacroF {{0.2, 0.4}} = {mf}", m.precision, m.recall, m.fscore),
    )
}

// ---------------------------------------------------------------- 6

fn corpus_fixtures() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let paths = write_liar_corpus(dir.path(), 1);
    let splits = [Split::Train, Split::Validation, Split::Test];
    let mut liar = Vec::new();
    for (p, s) in paths.iter().zip(splits) {
        liar.push(parse_liar(p, s).map_err(|e| e.to_string())?.n_total());
    }
    let liar_ok = liar == [10_269, 1_284, 1_283];

    let path = dir.path().join("pheme.jsonl");
    write_pheme(&path, &PHEME_EVENTS, 2);
    let pheme = parse_pheme(&path).map_err(|e| e.to_string())?;
    let [fake, truth] = pheme.class_counts();
    let totals_ok = (pheme.n_total(), fake, truth) == (92_499, 27_992, 64_507);
    let counts = pheme.event_counts();
    let events_ok = counts.len() == 5
        && PHEME_EVENTS.iter().all(|&(ev, n, f, t)| {
            counts.iter().any(|(e, total, c)| e == ev && *total == n && c[Class::Fake.index()] == f && c[Class::True.index()] == t)
        });
    ensure(
        liar_ok && totals_ok && events_ok,
        format!(
            "LIAR {}/{}/{}; PHEME {}/{fake}/{truth}, per-event counts {}",
            liar[0],
            liar[1],
            liar[2],
            pheme.n_total(),
            if events_ok { "match" } else { "differ" }
        ),
    )
}

// ---------------------------------------------------------------- 7

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    write_liar(&dir.path().join("train.tsv"), 300, 1);
    write_liar(&dir.path().join("test.tsv"), 80, 2);
    let run = |out: &str| -> Result<PathBuf, String> {
        let mut args = vec!["train", "--train-path", "train.tsv", "--test-path", "test.tsv", "--out-dir", out, "--seed", "17"];
        args.extend_from_slice(TINY);
        let o = tdsl(&args, dir.path());
        if !o.status.success() {
            return Err(format!("tdsl train failed: {}", String::from_utf8_lossy(&o.stderr)));
        }
        Ok(dir.path().join(out))
    };
    let (a, b) = (run("a")?, run("b")?);
    let same = |f: &str| std::fs::read(a.join(f)).ok() == std::fs::read(b.join(f)).ok() && a.join(f).is_file();
    let (ckpt, metrics) = (same("checkpoint.bin"), same("metrics.json"));
    ensure(ckpt && metrics, format!("checkpoint identical: {ckpt}, metrics identical: {metrics}"))
}

// ---------------------------------------------------------------- 8

fn synthetic_learnability() -> Outcome {
    let start = Instant::now();
    let config = TrainConfig {
        epochs: 30,
        ramp_epochs: 30,
        batch_size: 16,
        learning_rate: 1e-3,
        embed_dim: 8,
        max_len: 8,
        labeled_ratio: 1.0,
        shared_filters: 4,
        path_filters: 4,
        seed: 11,
        ..TrainConfig::default()
    };
    let raw = synthetic_separable(200, 6, 5).map_err(|e| e.to_string())?;
    let vocab = build_vocab(&[&raw], 1).map_err(|e| e.to_string())?;
    let data = raw.encode(&vocab, config.max_len).map_err(|e| e.to_string())?;
    let (params, history) = train(&config, vocab.len(), &data, None).map_err(|e| e.to_string())?;
    let acc = accuracy(&params, &data).map_err(|e| e.to_string())?.unwrap_or(0.0);
    ensure(acc >= 0.95, format!("training accuracy {acc:.4} after {} epochs", history.len()))
        .and_then(|d| within(start.elapsed(), 120, d))
}

// ---------------------------------------------------------------- 9

fn metrics_of(path: &Path) -> Result<serde_json::Value, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_slice(&bytes).map_err(|e| e.to_string())
}

fn liar_replication() -> Outcome {
    let Some(dir) = std::env::var_os("TDSL_LIAR_DIR").map(PathBuf::from) else {
        return Err("not run: set TDSL_LIAR_DIR to the LIAR corpus directory".into());
    };
    let out = tempfile::tempdir().unwrap();
    let p = |f: &str| dir.join(f).display().to_string();
    let (train_p, valid_p, test_p) = (p("train.tsv"), p("valid.tsv"), p("test.tsv"));
    let run_dir = out.path().join("reduced").display().to_string();
    let base = [
        "--dataset", "liar", "--train-path", &train_p, "--valid-path", &valid_p, "--test-path", &test_p, "--labeled-ratio", "0.1",
    ];
    let start = Instant::now();
    let mut args = vec!["train", "--epochs", "50", "--embed-dim", "64", "--max-len", "32", "--out-dir", &run_dir];
    args.extend_from_slice(&base);
    let o = tdsl(&args, out.path());
    if !o.status.success() {
        return Err(format!("reduced run failed: {}", String::from_utf8_lossy(&o.stderr)));
    }
    let m = metrics_of(&Path::new(&run_dir).join("metrics.json"))?;
    let f = m["test"]["fscore"].as_f64().unwrap_or(0.0);
    let c = &m["test"]["counts"];
    let (n_fake, n) = (
        c["tp"].as_f64().unwrap_or(0.0) + c["fn"].as_f64().unwrap_or(0.0),
        m["test"]["n_examples"].as_f64().unwrap_or(1.0),
    );
    let p_major = n_fake / n;
    let f_major = 2.0 * p_major / (p_major + 1.0);
    let mut detail = format!(
        "reduced profile F {f:.4} vs majority-Fake F {f_major:.4} in {:.0}s",
        start.elapsed().as_secs_f64()
    );
    let mut ok = f > f_major && start.elapsed() <= Duration::from_secs(30 * 60);

    if std::env::var("TDSL_ACCEPTANCE_FULL").is_ok_and(|v| v == "1") {
        let sweep_dir = out.path().join("full").display().to_string();
        let mut args = vec!["sweep", "--embed-dim", "128", "--n-runs", "5", "--out-dir", &sweep_dir];
        args.extend_from_slice(&base);
        let o = tdsl(&args, out.path());
        if !o.status.success() {
            return Err(format!("full run failed: {}", String::from_utf8_lossy(&o.stderr)));
        }
        let mut rdr = csv::Reader::from_path(Path::new(&sweep_dir).join("sweep.csv")).map_err(|e| e.to_string())?;
        let accs: Vec<f64> = rdr
            .deserialize::<std::collections::HashMap<String, String>>()
            .filter_map(|r| r.ok()?.get("accuracy")?.parse().ok())
            .collect();
        let mean = 100.0 * accs.iter().sum::<f64>() / accs.len().max(1) as f64;
        ok &= accs.len() == 5 && (mean - 82.52).abs() <= 5.0;
        detail += &format!("; 5-run accuracy {mean:.2}% (target 82.52 +- 5)");
    } else {
        detail += "; full replication not run (TDSL_ACCEPTANCE_FULL=1)";
    }
    ensure(ok, detail)
}

// ---------------------------------------------------------------- 10

fn loeo_integrity() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pheme.jsonl");
    write_pheme(&path, &PHEME_EVENTS, 3);
    let data = parse_pheme(&path).map_err(|e| e.to_string())?;
    let folds = loeo_folds(&data).map_err(|e| e.to_string())?;
    let mut leaked = 0usize;
    let mut covered = 0usize;
    for fold in &folds {
        let train_ids: std::collections::HashSet<&str> = fold.train.examples().iter().map(|e| e.id.as_str()).collect();
        leaked += fold.test.examples().iter().filter(|e| train_ids.contains(e.id.as_str())).count();
        leaked += fold.train.examples().iter().filter(|e| e.event.as_deref() == Some(fold.event.as_str())).count();
        covered += fold.test.n_total();
        if fold.train.n_total() + fold.test.n_total() != data.n_total() {
            return Err(format!("fold {} does not partition the corpus", fold.event));
        }
    }

    let small = dir.path().join("small.jsonl");
    write_small_pheme(&small, 24, 4);
    let config = TrainConfig {
        epochs: 2,
        ramp_epochs: 2,
        batch_size: 16,
        embed_dim: 6,
        max_len: 8,
        labeled_ratio: 0.3,
        shared_filters: 3,
        path_filters: 3,
        ..TrainConfig::default()
    };
    let report = run_loeo(&config, &parse_pheme(&small).map_err(|e| e.to_string())?, 1, Class::Fake).map_err(|e| e.to_string())?;
    let accs: Vec<f64> = report.folds.iter().map(|f| f.report.accuracy).collect();
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    let gap = (report.macro_metrics.macro_a - mean).abs();
    ensure(
        folds.len() == 5 && leaked == 0 && covered == data.n_total() && gap <= 1e-12 && accs.len() == 5,
        format!("{} folds, {leaked} leaked ids over {covered} test examples; |MacroA - mean| {gap:.1e}", folds.len()),
    )
}

fn pheme_targets() -> Outcome {
    let Some(path) = std::env::var_os("TDSL_PHEME_PATH") else {
        return Err("not run: set TDSL_PHEME_PATH to the normalized PHEME file".into());
    };
    let out = tempfile::tempdir().unwrap();
    let path = path.to_string_lossy().into_owned();
    let run_dir = out.path().join("loeo").display().to_string();
    let o = tdsl(
        &["loeo", "--dataset", "pheme", "--pheme-path", &path, "--labeled-ratio", "0.01", "--out-dir", &run_dir],
        out.path(),
    );
    if !o.status.success() {
        return Err(format!("loeo failed: {}", String::from_utf8_lossy(&o.stderr)));
    }
    let m = metrics_of(&Path::new(&run_dir).join("macro.json"))?;
    let macro_a = 100.0 * m["macro"]["macro_a"].as_f64().unwrap_or(0.0);
    ensure((macro_a - 56.19).abs() <= 5.0, format!("MacroA at 1% labels {macro_a:.2}% (target 56.19 +- 5)"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("1", true, gradient_fidelity),
        ("2", true, oracle_equivalence),
        ("3", true, loss_identities),
        ("4", true, ramp_up),
        ("5", true, metric_reproduction),
        ("6", true, corpus_fixtures),
        ("7", true, determinism),
        ("8", true, synthetic_learnability),
        ("9", false, liar_replication),
        ("10", true, loeo_integrity),
        ("10 (tracked)", false, pheme_targets),
    ];
    let mut binding_failed = false;
    for (name, binding, check) in criteria {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let (verdict, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        let kind = if binding { "" } else { " [tracked]" };
        println!("criterion {name}: {verdict}{kind} - {detail}");
        binding_failed |= binding && outcome.is_err();
    }
    if binding_failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
