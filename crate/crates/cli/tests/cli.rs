use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hybridaug::io::{load_image, save_image, save_labels};
use hybridaug::metrics::CORRUPTIONS;
use hybridaug::{AugmentConfig, ImageTensor, LabeledBatch};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybridaug"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn noise(seed: u64, h: usize, w: usize, c: usize) -> ImageTensor {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    ImageTensor::from_fn(h, w, c, |_, _, _| r.random::<f32>()).unwrap()
}

fn image_dir(root: &Path, ext: &str, n: usize) -> (PathBuf, PathBuf) {
    let dir = root.join("in");
    fs::create_dir_all(&dir).unwrap();
    let mut labels = Vec::new();
    for i in 0..n {
        let name = format!("img{i:02}");
        save_image(&noise(i as u64, 8, 8, 3), &dir.join(format!("{name}.{ext}")), 0.0).unwrap();
        labels.push((name, (i % 3) as i64));
    }
    let csv = root.join("labels.csv");
    save_labels(labels.iter().map(|(n, l)| (n.as_str(), *l)), &csv).unwrap();
    (dir, csv)
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (
                path.file_name().unwrap().to_str().unwrap().to_owned(),
                fs::read(&path).unwrap(),
            )
        })
        .collect();
    entries.sort();
    entries
}

#[test]
fn decompose_constant_image_has_zero_high_band() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("c.png");
    save_image(&ImageTensor::filled(9, 9, 3, 0.4).unwrap(), &input, 0.0).unwrap();
    let (lf, hf) = (dir.path().join("lf.png"), dir.path().join("hf.png"));
    let o = run(&["decompose", "--input", p(&input), "--out-lf", p(&lf), "--out-hf", p(&hf)]);
    assert!(o.status.success());
    let norm: f64 = stdout(&o).trim().strip_prefix("hf_l2_norm ").unwrap().parse().unwrap();
    assert!(norm.abs() <= 1e-6);
    // HF is stored with a +0.5 display offset.
    let shown = load_image(&hf).unwrap();
    assert!(shown.data().iter().all(|&v| (v - 128.0 / 255.0).abs() < 1e-6));
}

#[test]
fn decompose_hat_outputs_reconstruct_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.hat");
    let x = noise(1, 11, 7, 3);
    save_image(&x, &input, 0.0).unwrap();
    let (lf, hf) = (dir.path().join("lf.hat"), dir.path().join("hf.hat"));
    let o = run(&[
        "decompose", "--input", p(&input), "--out-lf", p(&lf), "--out-hf", p(&hf), "--sigma", "1.5",
        "--kernel-size", "5",
    ]);
    assert!(o.status.success());
    let sum = load_image(&lf).unwrap().add(&load_image(&hf).unwrap());
    for (a, b) in sum.data().iter().zip(x.data()) {
        assert!((a - b).abs() <= 1e-6);
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.hat");
    save_image(&noise(1, 4, 4, 1), &input, 0.0).unwrap();
    let out = |n: &str| dir.path().join(n);
    let o = run(&[
        "decompose", "--input", p(&input), "--out-lf", p(&out("a.hat")), "--out-hf", p(&out("b.hat")),
        "--kernel-size", "4",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["augment", "--mode", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    let o = run(&["toy-train", "--augment", "apr_s"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.png");
    let o = run(&[
        "decompose", "--input", p(&missing), "--out-lf", p(&dir.path().join("a.png")), "--out-hf",
        p(&dir.path().join("b.png")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.png"));
}

fn augment_args<'a>(mode: &'a str, input: &'a Path, labels: &'a Path, out: &'a Path) -> Vec<&'a str> {
    vec![
        "augment", "--mode", mode, "--input-dir", p(input), "--labels", p(labels), "--output-dir", p(out),
    ]
}

#[test]
fn augment_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (input, labels) = image_dir(dir.path(), "png", 7);
    let mut trees = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let mut args = augment_args("ha_pp_ps", &input, &labels, &out);
        args.extend(["--seed", "11", "--batch", "3"]);
        assert!(run(&args).status.success());
        trees.push(tree(&out));
    }
    assert_eq!(trees[0], trees[1]);
    assert_eq!(trees[0].len(), 8);
    assert!(trees[0].iter().any(|(n, _)| n == "aug_img00.png"));
    let csv = String::from_utf8(trees[0].iter().find(|(n, _)| n == "labels.csv").unwrap().1.clone()).unwrap();
    assert!(csv.starts_with("image_id,label\naug_img00,0\naug_img01,1\n"));

    let out = dir.path().join("c");
    let mut args = augment_args("ha_pp_ps", &input, &labels, &out);
    args.extend(["--seed", "12", "--batch", "3"]);
    assert!(run(&args).status.success());
    assert_ne!(tree(&out), trees[0]);
}

#[test]
fn augment_with_zero_probabilities_copies_images() {
    let dir = tempfile::tempdir().unwrap();
    let (input, labels) = image_dir(dir.path(), "png", 4);
    let out = dir.path().join("out");
    let mut args = augment_args("ha_pp_ps", &input, &labels, &out);
    args.extend(["--p-paired", "0", "--p-single", "0"]);
    assert!(run(&args).status.success());
    for i in 0..4 {
        let original = fs::read(input.join(format!("img{i:02}.png"))).unwrap();
        assert_eq!(fs::read(out.join(format!("aug_img{i:02}.png"))).unwrap(), original);
    }
}

#[test]
fn augment_matches_library_on_two_images() {
    let dir = tempfile::tempdir().unwrap();
    let (input, labels) = image_dir(dir.path(), "hat", 2);
    let out = dir.path().join("out");
    let mut args = augment_args("ha_p", &input, &labels, &out);
    args.extend(["--p-paired", "1", "--p-single", "0", "--seed", "3"]);
    assert!(run(&args).status.success());

    let images: Vec<_> = (0..2).map(|i| load_image(&input.join(format!("img{i:02}.hat"))).unwrap()).collect();
    let cfg = AugmentConfig {
        p_paired: 1.0,
        p_single: 0.0,
        seed: 3,
        ..AugmentConfig::default()
    };
    let batch = LabeledBatch::new(images, vec![0, 1]).unwrap();
    let want = hybridaug::hybrid::augment_batch(&batch, "ha_p", &cfg, 0).unwrap();
    for i in 0..2 {
        let got = load_image(&out.join(format!("aug_img{i:02}.hat"))).unwrap();
        assert_eq!(&got, &want.images()[i]);
    }
}

#[test]
fn augment_failure_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let (input, labels) = image_dir(dir.path(), "png", 3);
    save_labels([("img00", 0), ("img01", 1)], &labels).unwrap();
    let out = dir.path().join("out");
    let o = run(&augment_args("ha_s", &input, &labels, &out));
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    let leftovers: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with(".hybridaug"))
        .collect();
    assert!(leftovers.is_empty());

    fs::create_dir(&out).unwrap();
    fs::write(out.join("keep.txt"), "x").unwrap();
    image_dir(dir.path(), "png", 3);
    assert_eq!(run(&augment_args("ha_s", &input, &labels, &out)).status.code(), Some(1));
    assert_eq!(tree(&out).len(), 1);
}

#[test]
fn augment_reads_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let (input, labels) = image_dir(dir.path(), "png", 3);
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"p_paired": 0.0, "p_single": 0.0}"#).unwrap();
    let out = dir.path().join("out");
    let mut args = augment_args("ha_p", &input, &labels, &out);
    args.extend(["--config", p(&cfg)]);
    assert!(run(&args).status.success());
    assert_eq!(
        fs::read(out.join("aug_img01.png")).unwrap(),
        fs::read(input.join("img01.png")).unwrap()
    );
}

struct MceFixture {
    _dir: tempfile::TempDir,
    pred: PathBuf,
    truth: PathBuf,
    reference: PathBuf,
    report: PathBuf,
}

/// Ten images; predictions for `corruptions` get `wrong(c, s)` of them wrong.
fn mce_fixture(corruptions: &[&str], reference: &str, wrong: impl Fn(usize, u8) -> usize) -> MceFixture {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let truth = root.join("truth.csv");
    let mut t = String::from("image_id,label\n");
    for i in 0..10 {
        t.push_str(&format!("im{i},{}\n", i % 2));
    }
    fs::write(&truth, t).unwrap();
    let pred = root.join("pred");
    for (ci, c) in corruptions.iter().enumerate() {
        fs::create_dir_all(pred.join(c)).unwrap();
        for s in 1..=5u8 {
            let bad = wrong(ci, s);
            let mut text = String::from("image_id,true_label,pred_label\n");
            for i in 0..10 {
                let label = (i % 2) as i64;
                let pred_label = if i < bad { 1 - label } else { label };
                text.push_str(&format!("im{i},{label},{pred_label}\n"));
            }
            fs::write(pred.join(c).join(format!("{s}.csv")), text).unwrap();
        }
    }
    let reference_path = root.join("reference.csv");
    fs::write(&reference_path, reference).unwrap();
    MceFixture {
        pred,
        truth,
        reference: reference_path,
        report: root.join("report.json"),
        _dir: dir,
    }
}

fn run_mce(f: &MceFixture) -> Output {
    run(&[
        "metrics-mce", "--pred-dir", p(&f.pred), "--truth", p(&f.truth), "--reference", p(&f.reference),
        "--report", p(&f.report),
    ])
}

fn reference_table(corruptions: &[&str], error: impl Fn(usize, u8) -> f64) -> String {
    let mut text = String::from("corruption,severity,error\n");
    for (ci, c) in corruptions.iter().enumerate() {
        for s in 1..=5u8 {
            text.push_str(&format!("{c},{s},{}\n", error(ci, s)));
        }
    }
    text
}

#[test]
fn mce_of_the_reference_profile_is_one_hundred() {
    let names: Vec<&str> = CORRUPTIONS.iter().map(|(n, _)| *n).collect();
    let wrong = |c: usize, s: u8| (c + s as usize) % 10 + 1;
    let reference = reference_table(&names, |c, s| wrong(c, s) as f64 / 10.0);
    let f = mce_fixture(&names, &reference, wrong);
    let o = run_mce(&f);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().any(|l| l == "mCE 100.0"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&f.report).unwrap()).unwrap();
    assert!((report["mce"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn mce_of_perfect_predictions_is_zero() {
    let names: Vec<&str> = CORRUPTIONS.iter().map(|(n, _)| *n).collect();
    let f = mce_fixture(&names, &reference_table(&names, |_, _| 0.5), |_, _| 0);
    let o = run_mce(&f);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "mCE 0.0"));
}

#[test]
fn mce_single_corruption_ratio() {
    // Model errors 0.1..0.5 sum to 1.5; reference errors sum to 2.0.
    let f = mce_fixture(&["fog"], &reference_table(&["fog"], |_, _| 0.4), |_, s| s as usize);
    let o = run_mce(&f);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "fog CE 75.0"), "{out}");
    assert!(out.lines().any(|l| l == "mCE 75.0"));
}

#[test]
fn mce_missing_severity_is_reported() {
    let f = mce_fixture(&["fog"], &reference_table(&["fog"], |_, _| 0.4), |_, _| 1);
    fs::remove_file(f.pred.join("fog").join("4.csv")).unwrap();
    let o = run_mce(&f);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("fog/4.csv"), "{err}");
    assert!(!f.report.exists());
}

fn write_scores(dir: &Path, name: &str, scores: &[f64]) -> PathBuf {
    let path = dir.join(name);
    let text: String = scores.iter().map(|s| format!("{s}\n")).collect();
    fs::write(&path, format!("score\n{text}")).unwrap();
    path
}

#[test]
fn auroc_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases: [(&[f64], &[f64], &str); 3] = [
        (&[0.9, 0.8], &[0.1, 0.2], "AUROC 100.0"),
        (&[0.5, 0.3], &[0.5, 0.3], "AUROC 50.0"),
        (&[0.9, 0.4], &[0.6, 0.1], "AUROC 75.0"),
    ];
    for (id, ood, want) in cases {
        let a = write_scores(d, "id.csv", id);
        let b = write_scores(d, "ood.csv", ood);
        let o = run(&["metrics-auroc", "--id-scores", p(&a), "--ood-scores", p(&b)]);
        assert!(o.status.success());
        assert_eq!(stdout(&o).trim(), want);
    }
    let empty = write_scores(d, "empty.csv", &[]);
    let a = write_scores(d, "id.csv", &[1.0]);
    let o = run(&["metrics-auroc", "--id-scores", p(&a), "--ood-scores", p(&empty)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn toy_train_without_augmentation_omits_ha_fields() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = run(&["toy-train", "--augment", "none", "--seeds", "1", "--report", p(&report)]);
    assert!(o.status.success());
    let text = fs::read_to_string(&report).unwrap();
    assert!(!text.contains("_ha"));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["augment"], "none");
    assert!(v["mean_clean_acc_baseline"].as_f64().unwrap() > 0.5);
    assert_eq!(stdout(&o).lines().count(), 2);

    let again = dir.path().join("r2.json");
    assert!(run(&["toy-train", "--augment", "none", "--seeds", "1", "--report", p(&again)]).status.success());
    assert_eq!(text, fs::read_to_string(&again).unwrap());
}
