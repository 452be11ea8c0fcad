//! `vtgrasp`: filter tactile windows, run slip detection, simulate grasps
//! and episodes, reproduce the desk-scale experiments, and evaluate metric
//! files.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use vtgrasp_core::classifiers::{slip_detect, ClassifierConfig, OracleProvider, SlipMethod};
use vtgrasp_core::common::{ObjectClass, SensorUnit};
use vtgrasp_core::controller::{grasp_contact_loop, release_loop, ControllerConfig, PhaseTask};
use vtgrasp_core::metrics::{
    accuracy, average_precision, confusion_matrix, csr, files as metric_files, first_attempt_rate,
    iou, BoxRegion, CsrGroupBy, MaskRegion, Region,
};
use vtgrasp_core::pnm;
use vtgrasp_core::tactile::{brightness, filter_image, FilterConfig, FrameSequence};
use vtgrasp_harness::episode::{run_episode, write_run_dir};
use vtgrasp_harness::experiments::{
    experiment_contact_sweep, experiment_slip_accuracy, experiment_slip_compensation, HoldOutcome,
    SlipCompensationRun,
};
use vtgrasp_harness::scenario::ScenarioConfig;
use vtgrasp_harness::scripted::ScriptedFrameSource;

#[derive(Parser)]
#[command(name = "vtgrasp", version, about = "Visual-tactile grasping toolkit")]
struct Cli {
    /// Seed override for deterministic runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter a 4-frame PPM window into the binary evidence image.
    Filter(FilterArgs),
    /// Classify a 4-frame PPM window as slip or stable.
    DetectSlip(DetectSlipArgs),
    /// Run one controller phase from a recorded score stream.
    GraspSim(GraspSimArgs),
    /// Run one full pickup episode into an output directory.
    RunEpisode(RunEpisodeArgs),
    /// Reproduce a desk-scale experiment.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Evaluate metric files (AP, IoU, accuracy, confusion, CSR).
    #[command(subcommand)]
    EvalMetrics(EvalCommand),
}

#[derive(Args)]
struct FilterArgs {
    /// Exactly four PPM frames, oldest first.
    #[arg(long, num_args = 4, required = true)]
    frames: Vec<PathBuf>,
    #[arg(long, default_value_t = 25)]
    threshold: u8,
    #[arg(long, default_value_t = 5)]
    kernel_size: usize,
}

#[derive(Args)]
struct DetectSlipArgs {
    #[arg(long, num_args = 4, required = true)]
    frames: Vec<PathBuf>,
    #[arg(long, value_parser = parse_method, default_value = "brightness")]
    method: SlipMethod,
    /// Detection threshold for the chosen method.
    #[arg(long)]
    threshold: Option<f64>,
    /// Recorded score table for the cnn method (`image_id,score`).
    #[arg(long)]
    scores: Option<PathBuf>,
}

#[derive(Args)]
struct GraspSimArgs {
    /// Score stream CSV: `iteration,score_a,score_b`.
    #[arg(long)]
    scores: PathBuf,
    #[arg(long, value_parser = parse_task, default_value = "grasp")]
    task: PhaseTask,
    /// Consecutive contact detections required to declare the grasp.
    #[arg(long, default_value_t = 3)]
    count: u32,
    #[arg(long, default_value_t = 255)]
    max_steps: u32,
    /// Gripper step at entry.
    #[arg(long, default_value_t = 0)]
    start_step: u32,
}

#[derive(Args)]
struct RunEpisodeArgs {
    /// Object class when no scenario file is given.
    #[arg(long, value_parser = parse_class)]
    class: Option<ObjectClass>,
    #[arg(long, default_value_t = 1)]
    attempt: u32,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Slip detections during a lift, with and without compensation.
    SlipComp(SlipCompArgs),
    /// Minimal contact-detection counts per object class.
    ContactSweep(ContactSweepArgs),
    /// Slip-detection accuracy over the scripted instability fixture.
    SlipAccuracy(SlipAccuracyArgs),
}

#[derive(Args)]
struct SlipCompArgs {
    /// `on`, `off` or `both`.
    #[arg(long, default_value = "both")]
    compensation: String,
}

#[derive(Args)]
struct ContactSweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![1u32, 2, 3, 4, 5])]
    counts: Vec<u32>,
}

#[derive(Args)]
struct SlipAccuracyArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![5.0, 10.0, 15.0])]
    thresholds: Vec<f64>,
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Interpolated average precision per class and threshold.
    Ap(ApArgs),
    /// IoU of two boxes or two masks.
    Iou(IouArgs),
    /// Accuracy of a labeled score file at a threshold.
    Accuracy(AccuracyArgs),
    /// Confusion matrix from (true,predicted) label pairs.
    Confusion(ConfusionArgs),
    /// Collection success rate tables from an episode file.
    Csr(CsrArgs),
}

#[derive(Args)]
struct ApArgs {
    #[arg(long)]
    ground_truth: PathBuf,
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 0.75, 0.9])]
    thresholds: Vec<f64>,
    /// Evaluate mask IoU from the `mask_path` column instead of boxes.
    #[arg(long)]
    masks: bool,
}

#[derive(Args)]
struct IouArgs {
    /// Box as `x,y,w,h`.
    #[arg(long, conflicts_with_all = ["mask_a", "mask_b"], requires = "box_b")]
    box_a: Option<String>,
    #[arg(long)]
    box_b: Option<String>,
    /// PGM mask path (nonzero = object).
    #[arg(long, requires = "mask_b")]
    mask_a: Option<PathBuf>,
    #[arg(long)]
    mask_b: Option<PathBuf>,
}

#[derive(Args)]
struct AccuracyArgs {
    /// Labeled score file: `image_id,score,label`.
    #[arg(long)]
    scores: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
}

#[derive(Args)]
struct ConfusionArgs {
    /// CSV with header `true,predicted`.
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, value_delimiter = ',')]
    classes: Option<Vec<String>>,
}

#[derive(Args)]
struct CsrArgs {
    /// Episode file: `environment,class,attempt,success,failure_stage`.
    #[arg(long)]
    episodes: PathBuf,
    /// `environment`, `class`, `module` or `all`.
    #[arg(long, default_value = "all")]
    by: String,
}

fn parse_method(s: &str) -> Result<SlipMethod, String> {
    match s {
        "brightness" => Ok(SlipMethod::Brightness),
        "cnn" => Ok(SlipMethod::Cnn),
        other => Err(format!("unknown method `{other}` (brightness|cnn)")),
    }
}

fn parse_task(s: &str) -> Result<PhaseTask, String> {
    match s {
        "grasp" => Ok(PhaseTask::Grasp),
        "release" => Ok(PhaseTask::Release),
        other => Err(format!("unknown task `{other}` (grasp|release)")),
    }
}

fn parse_class(s: &str) -> Result<ObjectClass, String> {
    s.parse()
}

enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(err: anyhow::Error) -> Self {
        CliError::Data(err)
    }
}

fn data_err(err: impl Into<anyhow::Error>) -> CliError {
    CliError::Data(err.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let _ = err.print();
            return if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn load_scenario(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn require_out(cli: &Cli) -> Result<&Path, CliError> {
    cli.out
        .as_deref()
        .ok_or_else(|| CliError::Usage("this command needs --out <dir>".into()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Filter(args) => cmd_filter(&cli, args),
        Command::DetectSlip(args) => cmd_detect_slip(args),
        Command::GraspSim(args) => cmd_grasp_sim(&cli, args),
        Command::RunEpisode(args) => cmd_run_episode(&cli, args),
        Command::Experiment(cmd) => cmd_experiment(&cli, cmd),
        Command::EvalMetrics(cmd) => cmd_eval(&cli, cmd),
    }
}

fn read_window(paths: &[PathBuf]) -> anyhow::Result<FrameSequence> {
    let mut frames = Vec::with_capacity(paths.len());
    for (i, path) in paths.iter().enumerate() {
        let frame = pnm::read_ppm_file(path, i as u64 * 33, SensorUnit::A)
            .with_context(|| format!("reading frame `{}`", path.display()))?;
        frames.push(frame);
    }
    FrameSequence::from_rgb(&frames).context("assembling the frame window")
}

fn cmd_filter(cli: &Cli, args: &FilterArgs) -> Result<(), CliError> {
    let seq = read_window(&args.frames)?;
    let cfg = FilterConfig {
        binarize_threshold: args.threshold,
        kernel: vtgrasp_core::image::KernelSpec {
            shape: vtgrasp_core::image::KernelShape::Square,
            size: args.kernel_size,
        },
        sequence_len: 4,
    };
    let psi = filter_image(&seq, &cfg).map_err(data_err)?;
    let value = brightness(&psi).map_err(data_err)?;
    if let Some(out) = &cli.out {
        fs::create_dir_all(out).map_err(data_err)?;
        pnm::write_binary_pgm_file(out.join("psi.pgm"), &psi)
            .map_err(|e| CliError::Data(anyhow::anyhow!("writing psi: {e}")))?;
    }
    println!("brightness {value}");
    Ok(())
}

fn cmd_detect_slip(args: &DetectSlipArgs) -> Result<(), CliError> {
    let seq = read_window(&args.frames)?;
    let mut cfg = ClassifierConfig::default();
    if let Some(threshold) = args.threshold {
        match args.method {
            SlipMethod::Brightness => cfg.slip_threshold_brightness = threshold,
            SlipMethod::Cnn => cfg.slip_threshold_cnn = threshold,
        }
    }
    let oracle = match (&args.scores, args.method) {
        (Some(path), SlipMethod::Cnn) => Some(
            OracleProvider::from_csv_path(SensorUnit::A, path)
                .map_err(|e| CliError::Data(anyhow::anyhow!("score table: {e}")))?,
        ),
        (None, SlipMethod::Cnn) => {
            return Err(CliError::Usage(
                "the cnn method needs --scores <table.csv>".into(),
            ))
        }
        _ => None,
    };
    let filter = FilterConfig::default();
    let label = slip_detect(
        &seq,
        args.method,
        oracle
            .as_ref()
            .map(|o| o as &dyn vtgrasp_core::classifiers::SlipScoreProvider),
        &cfg,
        &filter,
    )
    .map_err(|e| CliError::Data(anyhow::anyhow!("slip detection: {e}")))?;
    let psi = filter_image(&seq, &filter).map_err(data_err)?;
    let value = brightness(&psi).map_err(data_err)?;
    println!("label {}", label.as_u8());
    println!("brightness {value}");
    Ok(())
}

fn read_score_stream(path: &Path) -> anyhow::Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading score stream `{}`", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "iteration,score_a,score_b" => {}
        _ => anyhow::bail!("score stream must start with `iteration,score_a,score_b`"),
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        anyhow::ensure!(fields.len() == 3, "line {}: expected 3 columns", idx + 1);
        a.push(
            fields[1]
                .trim()
                .parse()
                .with_context(|| format!("line {}", idx + 1))?,
        );
        b.push(
            fields[2]
                .trim()
                .parse()
                .with_context(|| format!("line {}", idx + 1))?,
        );
    }
    Ok((a, b))
}

fn cmd_grasp_sim(cli: &Cli, args: &GraspSimArgs) -> Result<(), CliError> {
    let (scores_a, scores_b) = read_score_stream(&args.scores)?;
    let provider_a = OracleProvider::from_scores(SensorUnit::A, &scores_a);
    let provider_b = OracleProvider::from_scores(SensorUnit::B, &scores_b);
    let mut source_a = ScriptedFrameSource::new(SensorUnit::A);
    let mut source_b = ScriptedFrameSource::new(SensorUnit::B);
    let mut gripper =
        vtgrasp_core::controller::Gripper::new(args.max_steps, 140.0).at_step(args.start_step);
    let cfg = ControllerConfig {
        contact_count_threshold: args.count,
        max_loop_iterations: args.max_steps + 16,
        task: args.task,
    };
    let classifier = ClassifierConfig::default();
    let result = match args.task {
        PhaseTask::Grasp => grasp_contact_loop(
            &mut source_a,
            &mut source_b,
            &provider_a,
            &provider_b,
            &mut gripper,
            &cfg,
            &classifier,
        ),
        PhaseTask::Release => release_loop(
            &mut source_a,
            &mut source_b,
            &provider_a,
            &provider_b,
            &mut gripper,
            &cfg,
            &classifier,
        ),
    }
    .map_err(|e| CliError::Data(anyhow::anyhow!("controller: {e}")))?;
    println!("outcome {:?}", result.outcome);
    println!("steps_taken {}", result.steps_taken);
    println!(
        "final_step {}",
        vtgrasp_core::controller::GripperDrive::step(&gripper)
    );
    if let Some(out) = &cli.out {
        fs::create_dir_all(out).map_err(data_err)?;
        let mut buf = Vec::new();
        result.write_trace_csv(&mut buf).map_err(data_err)?;
        fs::write(out.join("trace.csv"), buf).map_err(data_err)?;
    }
    Ok(())
}

fn cmd_run_episode(cli: &Cli, args: &RunEpisodeArgs) -> Result<(), CliError> {
    let out = require_out(cli)?.to_path_buf();
    let mut cfg = match (&cli.config, args.class) {
        (Some(path), _) => ScenarioConfig::load(path)?,
        (None, Some(class)) => ScenarioConfig::for_class(class),
        (None, None) => ScenarioConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let artifacts = run_episode(&cfg, args.attempt)?;
    write_run_dir(&out, &cfg, &artifacts)?;
    println!(
        "outcome {}",
        if artifacts.outcome.success {
            "success"
        } else {
            "failure"
        }
    );
    println!("failure_stage {}", artifacts.outcome.failure_stage);
    println!("slip_events {}", artifacts.slip_events);
    Ok(())
}

fn write_timeline(dir: &Path, run: &SlipCompensationRun) -> anyhow::Result<()> {
    let name = if run.compensation {
        "timeline_on.csv"
    } else {
        "timeline_off.csv"
    };
    let mut buf = Vec::new();
    writeln!(buf, "window,t_ms,slip_detected,cumulative,gripper_step")?;
    for p in &run.timeline {
        writeln!(
            buf,
            "{},{},{},{},{}",
            p.window, p.t_ms, p.slip_detected as u8, p.cumulative, p.gripper_step
        )?;
    }
    fs::write(dir.join(name), buf)?;
    Ok(())
}

fn cmd_experiment(cli: &Cli, cmd: &ExperimentCommand) -> Result<(), CliError> {
    match cmd {
        ExperimentCommand::SlipComp(args) => {
            let cfg = load_scenario(cli)?;
            let out = require_out(cli)?.to_path_buf();
            fs::create_dir_all(&out).map_err(data_err)?;
            let modes: Vec<bool> = match args.compensation.as_str() {
                "on" => vec![true],
                "off" => vec![false],
                "both" => vec![true, false],
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown compensation mode `{other}` (on|off|both)"
                    )))
                }
            };
            for compensation in modes {
                let run = experiment_slip_compensation(&cfg, compensation)?;
                write_timeline(&out, &run)?;
                let outcome = match run.outcome {
                    HoldOutcome::Retained => "retained".to_string(),
                    HoldOutcome::Fell { window } => format!("fell@window{window}"),
                };
                println!(
                    "compensation={} slip_events={} outcome={}",
                    if run.compensation { "on" } else { "off" },
                    run.slip_events,
                    outcome
                );
            }
            Ok(())
        }
        ExperimentCommand::ContactSweep(args) => {
            let seed = cli.seed.unwrap_or(1);
            let out = require_out(cli)?.to_path_buf();
            fs::create_dir_all(&out).map_err(data_err)?;
            let report = experiment_contact_sweep(seed, &args.counts)?;
            let mut buf = Vec::new();
            writeln!(buf, "class,count,slip_events,fell,grasp_step,touch_step")
                .map_err(data_err)?;
            for row in &report.rows {
                writeln!(
                    buf,
                    "{},{},{},{},{},{}",
                    row.class,
                    row.count,
                    row.slip_events,
                    row.fell as u8,
                    row.grasp_step,
                    row.touch_step
                )
                .map_err(data_err)?;
            }
            fs::write(out.join("sweep.csv"), buf).map_err(data_err)?;
            for (class, minimal) in &report.minimal_stable {
                match minimal {
                    Some(count) => println!("{class} minimal_stable_count {count}"),
                    None => println!("{class} minimal_stable_count none"),
                }
            }
            Ok(())
        }
        ExperimentCommand::SlipAccuracy(args) => {
            let seed = cli.seed.unwrap_or(1);
            let report = experiment_slip_accuracy(seed, &args.thresholds);
            for unit in &report.per_unit {
                for r in &unit.results {
                    println!(
                        "unit={} threshold={} accuracy={:.3} detected={}/{} false_positives={}",
                        unit.unit,
                        r.threshold,
                        r.accuracy,
                        r.detected,
                        r.instabilities,
                        r.false_positives
                    );
                }
            }
            println!(
                "windows={} mean_ms={:.3} median_ms={:.3}",
                report.windows_evaluated, report.mean_window_ms, report.median_window_ms
            );
            if let Some(out) = &cli.out {
                fs::create_dir_all(out).map_err(data_err)?;
                let mut buf = Vec::new();
                writeln!(
                    buf,
                    "unit,threshold,detected,instabilities,false_positives,accuracy"
                )
                .map_err(data_err)?;
                for unit in &report.per_unit {
                    for r in &unit.results {
                        writeln!(
                            buf,
                            "{},{},{},{},{},{:.4}",
                            unit.unit,
                            r.threshold,
                            r.detected,
                            r.instabilities,
                            r.false_positives,
                            r.accuracy
                        )
                        .map_err(data_err)?;
                    }
                }
                fs::write(out.join("accuracy.csv"), buf).map_err(data_err)?;
            }
            Ok(())
        }
    }
}

fn parse_box(text: &str) -> Result<Region, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::Usage(format!("box `{text}` must be x,y,w,h")));
    }
    let mut nums = [0.0f64; 4];
    for (slot, part) in nums.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|e| CliError::Usage(format!("box `{text}`: {e}")))?;
    }
    BoxRegion::new(nums[0], nums[1], nums[2], nums[3])
        .map(Region::Box)
        .map_err(|e| CliError::Data(anyhow::anyhow!("box `{text}`: {e}")))
}

fn read_mask_region(path: &Path) -> Result<Region, CliError> {
    let img = pnm::read_pgm_file(path)
        .map_err(|e| CliError::Data(anyhow::anyhow!("mask `{}`: {e}", path.display())))?;
    MaskRegion::from_gray(&img)
        .map(Region::Mask)
        .map_err(|e| CliError::Data(anyhow::anyhow!("mask `{}`: {e}", path.display())))
}

fn cmd_eval(cli: &Cli, cmd: &EvalCommand) -> Result<(), CliError> {
    match cmd {
        EvalCommand::Ap(args) => {
            let dets = metric_files::read_detections(&args.predictions, args.masks)
                .map_err(|e| CliError::Data(anyhow::anyhow!("predictions: {e}")))?;
            let gts = metric_files::read_ground_truths(&args.ground_truth, args.masks)
                .map_err(|e| CliError::Data(anyhow::anyhow!("ground truth: {e}")))?;
            let mut classes: Vec<String> = gts.iter().map(|g| g.class.clone()).collect();
            classes.sort();
            classes.dedup();
            if classes.is_empty() {
                return Err(CliError::Data(anyhow::anyhow!(
                    "ground truth file contains no annotations"
                )));
            }
            let mut rows = Vec::new();
            for &threshold in &args.thresholds {
                let mut per_class = Vec::new();
                for class in &classes {
                    let class_dets: Vec<_> =
                        dets.iter().filter(|d| &d.class == class).cloned().collect();
                    let class_gts: Vec<_> =
                        gts.iter().filter(|g| &g.class == class).cloned().collect();
                    let ap = average_precision(&class_dets, &class_gts, threshold)
                        .map_err(|e| CliError::Data(anyhow::anyhow!("AP: {e}")))?;
                    per_class.push(ap);
                    rows.push((class.clone(), threshold, ap));
                }
                let overall = per_class.iter().sum::<f64>() / per_class.len() as f64;
                rows.push(("overall".to_string(), threshold, overall));
                println!("AP@{threshold} {overall:.6}");
            }
            if let Some(out) = &cli.out {
                fs::create_dir_all(out).map_err(data_err)?;
                let mut buf = Vec::new();
                metric_files::write_ap_report(&mut buf, &rows)
                    .map_err(|e| CliError::Data(anyhow::anyhow!("report: {e}")))?;
                fs::write(out.join("ap_report.csv"), buf).map_err(data_err)?;
            }
            Ok(())
        }
        EvalCommand::Iou(args) => {
            let (a, b) = match (&args.box_a, &args.box_b, &args.mask_a, &args.mask_b) {
                (Some(a), Some(b), None, None) => (parse_box(a)?, parse_box(b)?),
                (None, None, Some(a), Some(b)) => (read_mask_region(a)?, read_mask_region(b)?),
                _ => {
                    return Err(CliError::Usage(
                        "give either --box-a/--box-b or --mask-a/--mask-b".into(),
                    ))
                }
            };
            let value = iou(&a, &b).map_err(|e| CliError::Data(anyhow::anyhow!("iou: {e}")))?;
            println!("iou {value}");
            Ok(())
        }
        EvalCommand::Accuracy(args) => {
            let counts = metric_files::read_labeled_scores(&args.scores, args.threshold)
                .map_err(|e| CliError::Data(anyhow::anyhow!("scores: {e}")))?;
            let value =
                accuracy(&counts).map_err(|e| CliError::Data(anyhow::anyhow!("accuracy: {e}")))?;
            println!(
                "tp {} tn {} fp {} fn {}",
                counts.true_pos, counts.true_neg, counts.false_pos, counts.false_neg
            );
            println!("accuracy {value:.6}");
            Ok(())
        }
        EvalCommand::Confusion(args) => {
            let text = fs::read_to_string(&args.pairs).map_err(data_err)?;
            let mut lines = text.lines().enumerate();
            match lines.next() {
                Some((_, header)) if header.trim() == "true,predicted" => {}
                _ => {
                    return Err(CliError::Data(anyhow::anyhow!(
                        "pairs file must start with `true,predicted`"
                    )))
                }
            }
            let mut pairs = Vec::new();
            for (idx, line) in lines {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let (t, p) = line.split_once(',').ok_or_else(|| {
                    CliError::Data(anyhow::anyhow!("line {}: expected 2 columns", idx + 1))
                })?;
                pairs.push((t.trim().to_string(), p.trim().to_string()));
            }
            let classes = match &args.classes {
                Some(classes) => classes.clone(),
                None => {
                    let mut all: Vec<String> = pairs
                        .iter()
                        .flat_map(|(t, p)| [t.clone(), p.clone()])
                        .collect();
                    all.sort();
                    all.dedup();
                    all
                }
            };
            let matrix = confusion_matrix(&pairs, &classes)
                .map_err(|e| CliError::Data(anyhow::anyhow!("confusion: {e}")))?;
            println!("classes,{}", matrix.classes.join(","));
            for (class, row) in matrix.classes.iter().zip(&matrix.counts) {
                let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
                println!("{class},{}", cells.join(","));
            }
            Ok(())
        }
        EvalCommand::Csr(args) => {
            let episodes = metric_files::read_episodes(&args.episodes)
                .map_err(|e| CliError::Data(anyhow::anyhow!("episodes: {e}")))?;
            let groups: Vec<(CsrGroupBy, &str)> = match args.by.as_str() {
                "environment" => vec![(CsrGroupBy::Environment, "environment")],
                "class" => vec![(CsrGroupBy::Class, "class")],
                "module" => vec![(CsrGroupBy::Module, "module")],
                "all" => vec![
                    (CsrGroupBy::Environment, "environment"),
                    (CsrGroupBy::Class, "class"),
                    (CsrGroupBy::Module, "module"),
                ],
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown grouping `{other}` (environment|class|module|all)"
                    )))
                }
            };
            for (group_by, label) in groups {
                let rows = csr(&episodes, group_by);
                let mut buf = Vec::new();
                metric_files::write_csr_table(&mut buf, label, &rows)
                    .map_err(|e| CliError::Data(anyhow::anyhow!("table: {e}")))?;
                print!("{}", String::from_utf8_lossy(&buf));
            }
            if let Some(rate) = first_attempt_rate(&episodes) {
                println!("first_attempt_rate {rate:.2}");
            }
            Ok(())
        }
    }
}
