//! End-to-end CLI behaviour through the compiled binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vtgrasp_core::common::SensorUnit;
use vtgrasp_core::image::TactileFrame;
use vtgrasp_core::pnm;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vtgrasp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn write_ppm_frames(dir: &Path, values: [[u8; 3]; 4]) -> Vec<PathBuf> {
    values
        .iter()
        .enumerate()
        .map(|(i, rgb)| {
            let frame = TactileFrame::filled(240, 320, *rgb, i as u64 * 33, SensorUnit::A);
            let path = dir.join(format!("frame{i}.ppm"));
            pnm::write_ppm_file(&path, &frame).unwrap();
            path
        })
        .collect()
}

#[test]
fn filter_of_identical_frames_prints_zero_brightness() {
    let dir = tempfile::tempdir().unwrap();
    let frames = write_ppm_frames(dir.path(), [[90, 85, 100]; 4]);
    let out_dir = dir.path().join("out");
    let output = bin()
        .arg("filter")
        .arg("--frames")
        .args(&frames)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert_eq!(stdout(&output).trim(), "brightness 0");
    // The written evidence image is all black.
    let psi = pnm::read_pgm_file(out_dir.join("psi.pgm")).unwrap();
    assert!(psi.data().iter().all(|&v| v == 0));
}

#[test]
fn detect_slip_flags_a_changed_window() {
    let dir = tempfile::tempdir().unwrap();
    // Last frame much brighter: the whole image is evidence.
    let frames = write_ppm_frames(dir.path(), [[20; 3], [20; 3], [20; 3], [220; 3]]);
    let output = bin()
        .arg("detect-slip")
        .arg("--frames")
        .args(&frames)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.lines().any(|l| l == "label 1"), "{text}");
}

#[test]
fn grasp_sim_replays_a_recorded_stream() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.csv");
    fs::write(
        &scores,
        "iteration,score_a,score_b\n0,0,0\n1,0,0\n2,1,1\n3,1,1\n4,1,1\n",
    )
    .unwrap();
    let out_dir = dir.path().join("run");
    let output = bin()
        .args(["grasp-sim", "--scores"])
        .arg(&scores)
        .args(["--count", "3", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("outcome Grasped"), "{text}");
    assert!(text.contains("final_step 2"), "{text}");
    let trace = fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,label_A,label_B,fused,gripper_step,event"));
    assert!(trace.trim_end().ends_with("4,1,1,1,2,grasped"));
}

#[test]
fn eval_metrics_ap_reproduces_the_hand_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt.csv");
    let pred = dir.path().join("pred.csv");
    fs::write(
        &gt,
        "image_id,class,confidence,x,y,w,h\ni1,plastic,0,0,0,4,4\ni2,plastic,0,0,0,4,4\n",
    )
    .unwrap();
    fs::write(
        &pred,
        "image_id,class,confidence,x,y,w,h\n\
         i1,plastic,0.9,0,0,4,4\ni3,plastic,0.8,0,0,4,4\ni2,plastic,0.7,0,0,4,4\n",
    )
    .unwrap();
    let output = bin()
        .args(["eval-metrics", "ap", "--ground-truth"])
        .arg(&gt)
        .arg("--predictions")
        .arg(&pred)
        .args(["--thresholds", "0.5"])
        .output()
        .unwrap();
    assert!(output.status.success());
    // 5/6 = 0.833333...
    assert_eq!(stdout(&output).trim(), "AP@0.5 0.833333");
}

#[test]
fn eval_metrics_csr_reproduces_rate_tables() {
    let dir = tempfile::tempdir().unwrap();
    let episodes = dir.path().join("episodes.csv");
    let mut text = String::from("environment,class,attempt,success,failure_stage\n");
    for i in 0..20 {
        let success = i < 17;
        text.push_str(&format!(
            "grass,metal,1,{},{}\n",
            success as u8,
            if success { "none" } else { "detection" }
        ));
    }
    fs::write(&episodes, text).unwrap();
    let output = bin()
        .args(["eval-metrics", "csr", "--episodes"])
        .arg(&episodes)
        .args(["--by", "environment"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("grass,17,20,0.85"), "{text}");
    assert!(text.contains("first_attempt_rate 0.85"), "{text}");
}

#[test]
fn run_episode_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    for out in [&out1, &out2] {
        let output = bin()
            .args(["--seed", "7", "--out"])
            .arg(out)
            .args(["run-episode", "--class", "cardboard"])
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "{}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
    let mut names: Vec<_> = fs::read_dir(&out1)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.iter().any(|n| n == "trace.csv"));
    assert!(names.iter().any(|n| n == "events.csv"));
    assert!(names.iter().any(|n| n == "summary.csv"));
    for name in names {
        let a = fs::read(out1.join(&name)).unwrap();
        let b = fs::read(out2.join(&name)).unwrap();
        assert_eq!(a, b, "file {name:?} differs between identical runs");
    }
}

#[test]
fn usage_errors_exit_one_data_errors_exit_two() {
    let unknown_flag = run(&["--definitely-not-a-flag"]);
    assert_eq!(unknown_flag.status.code(), Some(1));

    let missing_out = run(&["run-episode", "--class", "plastic"]);
    assert_eq!(missing_out.status.code(), Some(1));

    let missing_file = run(&["eval-metrics", "csr", "--episodes", "/no/such/file.csv"]);
    assert_eq!(missing_file.status.code(), Some(2));

    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn detect_slip_cnn_without_scores_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let frames = write_ppm_frames(dir.path(), [[90; 3]; 4]);
    let output = bin()
        .arg("detect-slip")
        .arg("--frames")
        .args(&frames)
        .args(["--method", "cnn"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}
