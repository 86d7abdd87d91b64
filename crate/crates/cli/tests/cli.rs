use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn stixels(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stixels"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn synth(dir: &Path, width: usize, height: usize, frames: u64) {
    let out = stixels(&[
        "synth",
        "-o",
        dir.to_str().unwrap(),
        "--frames",
        &frames.to_string(),
        "--width",
        &width.to_string(),
        "--height",
        &height.to_string(),
        "--seed",
        "5",
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
}

fn columns_in(path: &Path) -> BTreeSet<usize> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("frame"))
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.pgm");
    let out_file = dir.path().join("out.txt");
    let out = stixels(&[
        "estimate",
        missing.to_str().unwrap(),
        "-o",
        out_file.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(
        text(&out.stderr).contains("nope.pgm"),
        "{}",
        text(&out.stderr)
    );
}

#[test]
fn unknown_config_key_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "c_bic = 4\nc_bicc = 5\n").unwrap();
    let out = stixels(&[
        "bench",
        "--config",
        cfg.to_str().unwrap(),
        "--width",
        "20",
        "--height",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = text(&out.stderr);
    assert!(err.contains("c_bicc") && err.contains("line 2"), "{err}");
}

#[test]
fn stixel_width_sets_column_count() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 40, 30, 1);
    let frame = dir.path().join("frames/frame_0000.pgm");
    for (s, cols) in [("1", 40), ("5", 8), ("7", 5)] {
        let out_file = dir.path().join(format!("s{s}.txt"));
        let out = stixels(&[
            "estimate",
            frame.to_str().unwrap(),
            "-o",
            out_file.to_str().unwrap(),
            "--config",
            dir.path().join("scene.cfg").to_str().unwrap(),
            "--stixel_width",
            s,
        ]);
        assert!(out.status.success(), "{}", text(&out.stderr));
        assert_eq!(columns_in(&out_file), (0..cols).collect());
    }
}

#[test]
fn synth_estimate_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 120, 60, 3);
    let pred = dir.path().join("pred.txt");
    let overlays = dir.path().join("overlays");
    let out = stixels(&[
        "estimate",
        dir.path().join("frames").to_str().unwrap(),
        "-o",
        pred.to_str().unwrap(),
        "--config",
        dir.path().join("scene.cfg").to_str().unwrap(),
        "--overlay-dir",
        overlays.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stdout).starts_with("3 frames"));
    assert!(overlays.join("frame_0002.ppm").exists());

    let out = stixels(&[
        "eval",
        "--gt",
        dir.path().join("gt.txt").to_str().unwrap(),
        "--pred",
        pred.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let report = text(&out.stdout);
    assert!(report.contains("frames               3"), "{report}");
    assert!(report.contains("detection rate"));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 200, 80, 4);
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let pred = dir.path().join(format!("pred_{threads}.txt"));
        let out = stixels(&[
            "estimate",
            dir.path().join("frames").to_str().unwrap(),
            "-o",
            pred.to_str().unwrap(),
            "--config",
            dir.path().join("scene.cfg").to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(out.status.success(), "{}", text(&out.stderr));
        outputs.push(fs::read(pred).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn bad_flag_value_exits_with_one() {
    let out = stixels(&["bench", "--c_bic", "-3", "--width", "20", "--height", "20"]);
    assert_eq!(out.status.code(), Some(1), "{}", text(&out.stderr));
}
