//! Deterministic episode simulation: detection fixture, grasp geometry,
//! and the three tactile control phases running against a simulated object.
//!
//! The world advances only when the controller samples a sensor, one frame
//! per contact-loop iteration and one 4-frame window per slip-loop
//! iteration, so a fixed seed reproduces every byte of output.

use std::cell::RefCell;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::rc::Rc;

use vtgrasp_core::classifiers::SyntheticContactProvider;
use vtgrasp_core::common::SensorUnit;
use vtgrasp_core::controller::{
    grasp_contact_loop, grasp_slip_loop, release_loop, ControllerConfig, FrameSource,
    GraspPhaseResult, Gripper, GripperDrive, GripperError, PhaseOutcome, PhaseTask, PoseSource,
    SequenceSource, SlipControl, SourceError, TraceRow, Waypoint,
};
use vtgrasp_core::geometry::{
    camera_to_base, check_workspace, compute_grasp, mask_depth_coverage, segment_cloud,
    GeometryError, GraspCandidate,
};
use vtgrasp_core::image::TactileFrame;
use vtgrasp_core::metrics::{EpisodeOutcome, FailureStage};
use vtgrasp_core::pnm;
use vtgrasp_core::tactile::{filter_image, FrameSequence};

use crate::scenario::ScenarioConfig;
use crate::stream::{render_cylinder_fixture, BlobPose, CylinderFixture, FrameSynth};

/// One bookkeeping event of a simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRow {
    pub tick: u64,
    pub window: u64,
    pub kind: String,
    pub detail: String,
}

/// Simulated world shared between the sensor taps and the gripper port.
pub(crate) struct Sim {
    synth_a: FrameSynth,
    synth_b: FrameSynth,
    pub(crate) gripper: Gripper,
    blob: BlobPose,
    burst_shift: f64,
    burst_period: u64,
    touch_step: u32,
    required_hold_step: u32,
    transient_len: u32,
    transient_triggers: Vec<(u32, bool)>,
    fall_threshold: u32,
    segments: Vec<(String, u64)>,
    release_tag: String,

    tick: u64,
    pub(crate) window: u64,
    transient_remaining: u32,
    in_slip_phase: bool,
    pub(crate) fallen: bool,
    uncompensated: u32,
    step_at_last_burst: Option<u32>,
    last_burst_window: Option<u64>,
    blob_offset: f64,
    blob_dir: f64,
    cached_frames: Option<(TactileFrame, TactileFrame)>,
    cached_windows: Option<(FrameSequence, FrameSequence)>,
    pub(crate) events: Vec<EventRow>,
    pub(crate) snapshots: Vec<(String, FrameSequence)>,
    pub(crate) slip_bursts: u32,
}

impl Sim {
    pub(crate) fn new(cfg: &ScenarioConfig, touch_step: u32) -> Self {
        let required = (touch_step + cfg.object.hold_margin_steps).min(cfg.gripper.max_steps);
        let triggers = cfg
            .object
            .transient_offsets
            .iter()
            .map(|&off| (touch_step.saturating_sub(off), false))
            .collect();
        Self {
            synth_a: FrameSynth::new(cfg.seed, SensorUnit::A, &cfg.stream),
            synth_b: FrameSynth::new(cfg.seed, SensorUnit::B, &cfg.stream),
            gripper: Gripper::new(cfg.gripper.max_steps, cfg.gripper.max_opening_mm),
            blob: BlobPose::contact(cfg.stream.blob_radius_px, cfg.stream.blob_intensity),
            burst_shift: cfg.stream.burst_shift_px,
            burst_period: cfg.stream.burst_period_windows,
            touch_step,
            required_hold_step: required,
            transient_len: cfg.object.transient_len(),
            transient_triggers: triggers,
            fall_threshold: cfg.object.fall_threshold,
            segments: cfg
                .waypoints
                .iter()
                .map(|w| (w.tag.clone(), w.windows))
                .collect(),
            release_tag: cfg.release_waypoint(),
            tick: 0,
            window: 0,
            transient_remaining: 0,
            in_slip_phase: false,
            fallen: false,
            uncompensated: 0,
            step_at_last_burst: None,
            last_burst_window: None,
            blob_offset: 0.0,
            blob_dir: 1.0,
            cached_frames: None,
            cached_windows: None,
            events: Vec::new(),
            snapshots: Vec::new(),
            slip_bursts: 0,
        }
    }

    pub(crate) fn total_windows(&self) -> u64 {
        self.segments.iter().map(|(_, w)| w).sum()
    }

    /// No-contact reference frame used to build the synthetic providers.
    pub(crate) fn reference_frame(&self, unit: SensorUnit) -> TactileFrame {
        match unit {
            SensorUnit::A => self.synth_a.frame(0, None),
            SensorUnit::B => self.synth_b.frame(0, None),
        }
    }

    fn push_event(&mut self, kind: &str, detail: String) {
        self.events.push(EventRow {
            tick: self.tick,
            window: self.window,
            kind: kind.to_string(),
            detail,
        });
    }

    /// Advances one contact-phase frame for both units.
    fn contact_tick(&mut self) {
        self.tick += 1;
        let step = self.gripper.step();
        for i in 0..self.transient_triggers.len() {
            let (trigger, fired) = self.transient_triggers[i];
            if !fired && step == trigger && step < self.touch_step {
                self.transient_triggers[i].1 = true;
                self.transient_remaining = self.transient_len;
                self.push_event("transient", format!("step={step}"));
            }
        }
        let mut show = step >= self.touch_step && !self.fallen;
        if self.transient_remaining > 0 {
            show = true;
            self.transient_remaining -= 1;
        }
        let blob = show.then_some(self.blob);
        self.cached_frames = Some((
            self.synth_a.frame(self.tick, blob.as_ref()),
            self.synth_b.frame(self.tick, blob.as_ref()),
        ));
    }

    fn latest_frame(&mut self, unit: SensorUnit) -> TactileFrame {
        if unit == SensorUnit::A || self.cached_frames.is_none() {
            self.contact_tick();
        }
        let (a, b) = self.cached_frames.as_ref().expect("frames just generated");
        match unit {
            SensorUnit::A => a.clone(),
            SensorUnit::B => b.clone(),
        }
    }

    /// Advances one slip-phase window (4 frames) for both units.
    fn slip_window(&mut self) {
        self.window += 1;
        self.in_slip_phase = true;
        let w = self.window;
        let step = self.gripper.step();
        let insecure = !self.fallen && step < self.required_hold_step;
        let due = match self.last_burst_window {
            Some(last) => w - last >= self.burst_period,
            None => w >= self.burst_period,
        };
        let burst = insecure && due;
        let mut falls = false;
        if burst {
            self.uncompensated = match self.step_at_last_burst {
                Some(prev) if step > prev => 1,
                Some(_) => self.uncompensated + 1,
                None => 1,
            };
            self.step_at_last_burst = Some(step);
            self.last_burst_window = Some(w);
            self.slip_bursts += 1;
            self.push_event(
                "burst",
                format!("step={step} uncompensated={}", self.uncompensated),
            );
            if self.uncompensated >= self.fall_threshold {
                falls = true;
            }
        }

        let start = self.blob_offset;
        let delta = if burst {
            self.blob_dir * self.burst_shift
        } else {
            0.0
        };
        let mut frames_a = Vec::with_capacity(4);
        let mut frames_b = Vec::with_capacity(4);
        let mut stamps = Vec::with_capacity(4);
        for i in 0..4 {
            self.tick += 1;
            let offset = start + delta * (i as f64 / 3.0);
            let blob = (!self.fallen).then(|| self.blob.shifted(offset, 0.0));
            frames_a.push(self.synth_a.frame(self.tick, blob.as_ref()));
            frames_b.push(self.synth_b.frame(self.tick, blob.as_ref()));
            stamps.push(frames_a[i].timestamp_ms);
        }
        if burst {
            self.blob_offset += delta;
            self.blob_dir = -self.blob_dir;
        }
        let seq_a = FrameSequence::from_rgb(&frames_a).expect("windows are well-formed");
        let seq_b = FrameSequence::from_rgb(&frames_b).expect("windows are well-formed");
        if w == 1 {
            self.snapshots.push(("first_a".into(), seq_a.clone()));
            self.snapshots.push(("first_b".into(), seq_b.clone()));
        }
        if burst && self.slip_bursts == 1 {
            self.snapshots.push(("burst_a".into(), seq_a.clone()));
            self.snapshots.push(("burst_b".into(), seq_b.clone()));
        }
        self.cached_windows = Some((seq_a, seq_b));
        if falls {
            self.fallen = true;
            self.push_event(
                "fall",
                format!("after {} uncompensated bursts", self.uncompensated),
            );
        }
    }

    fn latest_window(&mut self, unit: SensorUnit) -> FrameSequence {
        if unit == SensorUnit::A || self.cached_windows.is_none() {
            self.slip_window();
        }
        let (a, b) = self.cached_windows.as_ref().expect("window just generated");
        match unit {
            SensorUnit::A => a.clone(),
            SensorUnit::B => b.clone(),
        }
    }

    /// Waypoint the robot is at, judged from the window clock.
    fn waypoint(&self) -> Waypoint {
        if !self.in_slip_phase {
            return Waypoint::new("grasp");
        }
        let mut boundary = 0;
        for (tag, windows) in &self.segments {
            boundary += windows;
            if self.window <= boundary {
                return Waypoint::new(tag.clone());
            }
        }
        Waypoint::new(self.release_tag.clone())
    }
}

pub(crate) struct SimCell(pub(crate) Rc<RefCell<Sim>>);

impl SimCell {
    pub(crate) fn new(sim: Sim) -> Self {
        Self(Rc::new(RefCell::new(sim)))
    }

    pub(crate) fn frame_tap(&self, unit: SensorUnit) -> FrameTap {
        FrameTap {
            sim: self.0.clone(),
            unit,
        }
    }

    pub(crate) fn window_tap(&self, unit: SensorUnit) -> WindowTap {
        WindowTap {
            sim: self.0.clone(),
            unit,
        }
    }

    pub(crate) fn gripper_tap(&self) -> GripperTap {
        GripperTap {
            sim: self.0.clone(),
        }
    }

    pub(crate) fn pose_tap(&self) -> PoseTap {
        PoseTap {
            sim: self.0.clone(),
        }
    }
}

pub(crate) struct FrameTap {
    sim: Rc<RefCell<Sim>>,
    unit: SensorUnit,
}

impl FrameSource for FrameTap {
    fn latest(&mut self) -> Result<TactileFrame, SourceError> {
        Ok(self.sim.borrow_mut().latest_frame(self.unit))
    }
}

pub(crate) struct WindowTap {
    sim: Rc<RefCell<Sim>>,
    unit: SensorUnit,
}

impl SequenceSource for WindowTap {
    fn latest_window(&mut self) -> Result<FrameSequence, SourceError> {
        Ok(self.sim.borrow_mut().latest_window(self.unit))
    }
}

pub(crate) struct GripperTap {
    sim: Rc<RefCell<Sim>>,
}

impl GripperDrive for GripperTap {
    fn step(&self) -> u32 {
        self.sim.borrow().gripper.step()
    }

    fn max_steps(&self) -> u32 {
        self.sim.borrow().gripper.max_steps()
    }

    fn opening_mm(&self) -> f64 {
        self.sim.borrow().gripper.opening_mm()
    }

    fn close_one(&mut self) -> Result<(), GripperError> {
        self.sim.borrow_mut().gripper.close_one()
    }

    fn open_one(&mut self) -> Result<(), GripperError> {
        self.sim.borrow_mut().gripper.open_one()
    }
}

pub(crate) struct PoseTap {
    sim: Rc<RefCell<Sim>>,
}

impl PoseSource for PoseTap {
    fn current_waypoint(&mut self) -> Waypoint {
        self.sim.borrow().waypoint()
    }
}

/// Everything a finished episode leaves behind.
pub struct EpisodeArtifacts {
    pub outcome: EpisodeOutcome,
    pub grasp: Option<GraspCandidate>,
    pub traces: Vec<(String, GraspPhaseResult)>,
    pub events: Vec<EventRow>,
    pub snapshots: Vec<(String, FrameSequence)>,
    pub summary: Vec<(String, String)>,
    pub fixture: Option<CylinderFixture>,
    pub slip_events: u32,
}

/// Gate on the detection reconstruction: at least this fraction of masked
/// pixels must carry a valid depth return.
pub const MIN_VALID_DEPTH_FRACTION: f64 = 0.5;

/// Staging offset above the grasp point, metres.
pub const PRE_POSITION_OFFSET_M: f64 = 0.1;

/// Gripper step at which the jaws first meet an object of the given width.
pub fn touch_step_for_opening(opening_mm: f64, max_steps: u32, max_opening_mm: f64) -> u32 {
    let frac = 1.0 - (opening_mm / max_opening_mm).clamp(0.0, 1.0);
    ((max_steps as f64) * frac).ceil().min(max_steps as f64) as u32
}

/// Runs one full pickup attempt. Module faults become failure stages; the
/// function only errors on unusable configuration.
pub fn run_episode(cfg: &ScenarioConfig, attempt: u32) -> anyhow::Result<EpisodeArtifacts> {
    let mut summary: Vec<(String, String)> = vec![
        ("seed".into(), cfg.seed.to_string()),
        ("class".into(), cfg.object.class.to_string()),
        ("environment".into(), cfg.environment.to_string()),
        ("attempt".into(), attempt.to_string()),
    ];
    let artifacts = |outcome: EpisodeOutcome,
                     grasp: Option<GraspCandidate>,
                     traces: Vec<(String, GraspPhaseResult)>,
                     events: Vec<EventRow>,
                     snapshots: Vec<(String, FrameSequence)>,
                     fixture: Option<CylinderFixture>,
                     slip_events: u32,
                     mut summary: Vec<(String, String)>| {
        summary.push((
            "outcome".into(),
            if outcome.success {
                "success"
            } else {
                "failure"
            }
            .into(),
        ));
        summary.push(("failure_stage".into(), outcome.failure_stage.to_string()));
        summary.push(("slip_events".into(), slip_events.to_string()));
        EpisodeArtifacts {
            outcome,
            grasp,
            traces,
            events,
            snapshots,
            summary,
            fixture,
            slip_events,
        }
    };
    let fail = |stage: FailureStage| {
        EpisodeOutcome::new(cfg.environment, cfg.object.class, attempt, false, stage)
            .expect("failure stage is consistent")
    };

    // Detection stage: fixture files stand in for the segmentation network.
    let fixture = match &cfg.fixtures {
        Some(paths) => CylinderFixture {
            mask: pnm::read_pgm_file(&paths.mask)
                .map_err(|e| anyhow::anyhow!("mask fixture: {e}"))?,
            depth: pnm::read_depth_pgm_file(&paths.depth)
                .map_err(|e| anyhow::anyhow!("depth fixture: {e}"))?,
        },
        None => render_cylinder_fixture(cfg.object.width_mm(), &cfg.camera, &cfg.faults, cfg.seed),
    };
    let (masked, valid) = mask_depth_coverage(&fixture.mask, &fixture.depth)
        .map_err(|e| anyhow::anyhow!("fixture dimensions: {e}"))?;
    summary.push(("masked_pixels".into(), masked.to_string()));
    summary.push(("valid_depth_pixels".into(), valid.to_string()));
    if masked == 0 {
        summary.push(("note".into(), "detection produced an empty mask".into()));
        return Ok(artifacts(
            fail(FailureStage::Detection),
            None,
            vec![],
            vec![],
            vec![],
            Some(fixture),
            0,
            summary,
        ));
    }
    if (valid as f64 / masked as f64) < MIN_VALID_DEPTH_FRACTION {
        summary.push((
            "note".into(),
            "reconstruction too sparse for grasp estimation".into(),
        ));
        return Ok(artifacts(
            fail(FailureStage::RgbdReconstruction),
            None,
            vec![],
            vec![],
            vec![],
            Some(fixture),
            0,
            summary,
        ));
    }

    // Geometry stage.
    let ee = cfg.camera.ee_pose()?;
    let hand_eye = cfg.camera.hand_eye_transform()?;
    let cloud = match segment_cloud(
        &fixture.mask,
        &fixture.depth,
        &cfg.camera.intrinsics,
        cfg.object.class,
        "fixture",
    ) {
        Ok(cloud) => cloud,
        Err(_) => {
            summary.push(("note".into(), "segmentation produced no points".into()));
            return Ok(artifacts(
                fail(FailureStage::RgbdReconstruction),
                None,
                vec![],
                vec![],
                vec![],
                Some(fixture),
                0,
                summary,
            ));
        }
    };
    let base_points: Vec<_> = cloud
        .points
        .iter()
        .map(|p| camera_to_base(p, &ee, &hand_eye))
        .collect();
    let grasp = match compute_grasp(&base_points, cfg.gripper.max_opening_mm) {
        Ok(grasp) => grasp,
        Err(err) => {
            let stage = match err {
                GeometryError::TooFewPoints { .. } | GeometryError::EmptyCloud => {
                    FailureStage::RgbdReconstruction
                }
                _ => FailureStage::GraspPoints,
            };
            summary.push(("note".into(), format!("grasp estimation failed: {err}")));
            return Ok(artifacts(
                fail(stage),
                None,
                vec![],
                vec![],
                vec![],
                Some(fixture),
                0,
                summary,
            ));
        }
    };
    let midpoint = grasp.midpoint();
    summary.push((
        "grasp_p1_m".into(),
        format!(
            "{:.4} {:.4} {:.4}",
            grasp.p1.0.x, grasp.p1.0.y, grasp.p1.0.z
        ),
    ));
    summary.push((
        "grasp_p2_m".into(),
        format!(
            "{:.4} {:.4} {:.4}",
            grasp.p2.0.x, grasp.p2.0.y, grasp.p2.0.z
        ),
    ));
    summary.push((
        "grasp_opening_mm".into(),
        format!("{:.1}", grasp.opening_required_mm),
    ));
    summary.push((
        "pre_position_m".into(),
        format!(
            "{:.4} {:.4} {:.4}",
            midpoint.0.x,
            midpoint.0.y,
            midpoint.0.z + PRE_POSITION_OFFSET_M
        ),
    ));
    if !check_workspace(&midpoint, &cfg.camera.workspace) {
        summary.push(("note".into(), "grasp point outside the workspace".into()));
        return Ok(artifacts(
            fail(FailureStage::GraspPoints),
            Some(grasp),
            vec![],
            vec![],
            vec![],
            Some(fixture),
            0,
            summary,
        ));
    }

    // Tactile phases.
    let touch_step = touch_step_for_opening(
        grasp.opening_required_mm,
        cfg.gripper.max_steps,
        cfg.gripper.max_opening_mm,
    );
    summary.push(("touch_step".into(), touch_step.to_string()));
    let cell = SimCell::new(Sim::new(cfg, touch_step));
    let provider_a = SyntheticContactProvider::new(cell.0.borrow().reference_frame(SensorUnit::A));
    let provider_b = SyntheticContactProvider::new(cell.0.borrow().reference_frame(SensorUnit::B));
    let mut traces = Vec::new();

    let grasp_cfg = ControllerConfig {
        contact_count_threshold: cfg.contact_count(),
        max_loop_iterations: cfg.max_loop_iterations(),
        task: PhaseTask::Grasp,
    };
    let contact_result = grasp_contact_loop(
        &mut cell.frame_tap(SensorUnit::A),
        &mut cell.frame_tap(SensorUnit::B),
        &provider_a,
        &provider_b,
        &mut cell.gripper_tap(),
        &grasp_cfg,
        &cfg.classifier,
    )?;
    let contact_ok = contact_result.outcome == PhaseOutcome::Grasped;
    summary.push(("grasp_steps".into(), contact_result.steps_taken.to_string()));
    traces.push(("contact".to_string(), contact_result));
    if !contact_ok {
        let sim = cell.0.borrow();
        summary.push(("note".into(), "contact was never confirmed".into()));
        return Ok(artifacts(
            fail(FailureStage::ContactDetection),
            Some(grasp),
            traces,
            sim.events.clone(),
            sim.snapshots.clone(),
            Some(fixture),
            0,
            summary,
        ));
    }

    let total_windows = cell.0.borrow().total_windows();
    let slip_cfg = ControllerConfig {
        contact_count_threshold: cfg.contact_count(),
        max_loop_iterations: cfg.max_loop_iterations().max(total_windows as u32 + 16),
        task: PhaseTask::Grasp,
    };
    let release_target = Waypoint::new(cfg.release_waypoint());
    let slip_result = grasp_slip_loop(
        &mut cell.window_tap(SensorUnit::A),
        &mut cell.window_tap(SensorUnit::B),
        &mut cell.gripper_tap(),
        &slip_cfg,
        &SlipControl {
            method: cfg.classifier.slip_method,
            classifier: &cfg.classifier,
            filter: &cfg.filter,
            provider_a: None,
            provider_b: None,
        },
        &mut cell.pose_tap(),
        &release_target,
    )?;
    let slip_ok = slip_result.outcome == PhaseOutcome::Grasped;
    let slip_events = slip_result.slip_events;
    traces.push(("slip".to_string(), slip_result));
    let fell = cell.0.borrow().fallen;
    if !slip_ok || fell {
        let sim = cell.0.borrow();
        summary.push((
            "note".into(),
            if fell {
                "object fell during transport".into()
            } else {
                "slip compensation fault".into()
            },
        ));
        return Ok(artifacts(
            fail(FailureStage::ContactDetection),
            Some(grasp),
            traces,
            sim.events.clone(),
            sim.snapshots.clone(),
            Some(fixture),
            slip_events,
            summary,
        ));
    }

    let release_cfg = ControllerConfig {
        contact_count_threshold: 1,
        max_loop_iterations: cfg.max_loop_iterations(),
        task: PhaseTask::Release,
    };
    let release_result = release_loop(
        &mut cell.frame_tap(SensorUnit::A),
        &mut cell.frame_tap(SensorUnit::B),
        &provider_a,
        &provider_b,
        &mut cell.gripper_tap(),
        &release_cfg,
        &cfg.classifier,
    )?;
    let released = release_result.outcome == PhaseOutcome::Released;
    summary.push((
        "release_steps".into(),
        release_result.steps_taken.to_string(),
    ));
    traces.push(("release".to_string(), release_result));

    let sim = cell.0.borrow();
    let outcome = if released {
        EpisodeOutcome::new(
            cfg.environment,
            cfg.object.class,
            attempt,
            true,
            FailureStage::None,
        )
        .expect("success outcome is consistent")
    } else {
        summary.push(("note".into(), "release never completed".into()));
        fail(FailureStage::ContactDetection)
    };
    Ok(artifacts(
        outcome,
        Some(grasp),
        traces,
        sim.events.clone(),
        sim.snapshots.clone(),
        Some(fixture),
        slip_events,
        summary,
    ))
}

/// Runs a list of scenarios; faults become failed episodes, never aborts.
pub fn run_batch(scenarios: &[(ScenarioConfig, u32)]) -> anyhow::Result<Vec<EpisodeOutcome>> {
    scenarios
        .iter()
        .map(|(cfg, attempt)| Ok(run_episode(cfg, *attempt)?.outcome))
        .collect()
}

/// Writes the run directory: `trace.csv`, `events.csv`, `summary.csv`,
/// filtered-image snapshots and the detection fixtures.
pub fn write_run_dir<P: AsRef<Path>>(
    dir: P,
    cfg: &ScenarioConfig,
    artifacts: &EpisodeArtifacts,
) -> anyhow::Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;

    let mut trace = Vec::new();
    writeln!(trace, "iteration,label_A,label_B,fused,gripper_step,event")?;
    let mut offset = 0u32;
    for (_phase, result) in &artifacts.traces {
        for row in &result.trace {
            writeln!(trace, "{}", trace_line(row, offset))?;
        }
        offset += result.trace.len() as u32;
    }
    fs::write(dir.join("trace.csv"), trace)?;

    let mut events = Vec::new();
    writeln!(events, "tick,window,kind,detail")?;
    for row in &artifacts.events {
        writeln!(
            events,
            "{},{},{},{}",
            row.tick, row.window, row.kind, row.detail
        )?;
    }
    fs::write(dir.join("events.csv"), events)?;

    let mut summary = Vec::new();
    writeln!(summary, "key,value")?;
    for (key, value) in &artifacts.summary {
        writeln!(summary, "{key},{value}")?;
    }
    fs::write(dir.join("summary.csv"), summary)?;

    for (label, seq) in &artifacts.snapshots {
        let psi =
            filter_image(seq, &cfg.filter).map_err(|e| anyhow::anyhow!("snapshot filter: {e}"))?;
        pnm::write_binary_pgm_file(dir.join(format!("psi_{label}.pgm")), &psi)
            .map_err(|e| anyhow::anyhow!("writing snapshot: {e}"))?;
    }
    if let Some(fixture) = &artifacts.fixture {
        pnm::write_pgm_file(dir.join("mask.pgm"), &fixture.mask)
            .map_err(|e| anyhow::anyhow!("writing mask: {e}"))?;
        pnm::write_depth_pgm_file(dir.join("depth.pgm"), &fixture.depth)
            .map_err(|e| anyhow::anyhow!("writing depth: {e}"))?;
    }
    Ok(())
}

fn trace_line(row: &TraceRow, offset: u32) -> String {
    let fmt = |l: Option<bool>| match l {
        Some(true) => "1",
        Some(false) => "0",
        None => "",
    };
    format!(
        "{},{},{},{},{},{}",
        row.iteration + offset,
        fmt(row.label_a),
        fmt(row.label_b),
        fmt(row.fused),
        row.gripper_step,
        row.event
    )
}
