//! Closed-loop grasp, release and slip-compensation controllers.
//!
//! Each loop samples the latest frame (or 4-frame window) from the two
//! fingertip sensors once per motor step, classifies, fuses the per-unit
//! labels (AND for contact, OR for slip) and commands the gripper by exactly
//! one step. The controller is a single sequential state machine; sensor
//! sources may be fed concurrently under a latest-snapshot contract (see
//! [`snapshot`]).

pub mod snapshot;

use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

use crate::classifiers::{
    contact_classify, fuse_contact, fuse_slip, slip_detect, ClassifierConfig, ClassifierError,
    ContactScoreProvider, Label, SlipMethod, SlipScoreProvider,
};
use crate::image::TactileFrame;
use crate::tactile::{FilterConfig, FrameSequence};

/// Stepwise model of a two-finger gripper. Step 0 is fully open; the opening
/// width shrinks affinely to 0 mm at `max_steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gripper {
    step: u32,
    max_steps: u32,
    max_opening_mm: f64,
}

pub const DEFAULT_MAX_STEPS: u32 = 255;
pub const DEFAULT_MAX_OPENING_MM: f64 = 140.0;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum GripperError {
    #[error("gripper is already fully closed")]
    FullyClosed,
    #[error("gripper is already fully open")]
    FullyOpen,
}

impl Default for Gripper {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_STEPS, DEFAULT_MAX_OPENING_MM)
    }
}

impl Gripper {
    pub fn new(max_steps: u32, max_opening_mm: f64) -> Self {
        assert!(max_steps > 0, "gripper needs at least one step");
        Self {
            step: 0,
            max_steps,
            max_opening_mm,
        }
    }

    pub fn at_step(mut self, step: u32) -> Self {
        assert!(step <= self.max_steps);
        self.step = step;
        self
    }
}

/// Actuator port used by the control loops. One command moves the motor by
/// exactly one step.
pub trait GripperDrive {
    fn step(&self) -> u32;
    fn max_steps(&self) -> u32;
    fn opening_mm(&self) -> f64;
    fn close_one(&mut self) -> Result<(), GripperError>;
    fn open_one(&mut self) -> Result<(), GripperError>;
}

impl GripperDrive for Gripper {
    fn step(&self) -> u32 {
        self.step
    }

    fn max_steps(&self) -> u32 {
        self.max_steps
    }

    fn opening_mm(&self) -> f64 {
        self.max_opening_mm * (1.0 - self.step as f64 / self.max_steps as f64)
    }

    fn close_one(&mut self) -> Result<(), GripperError> {
        if self.step >= self.max_steps {
            return Err(GripperError::FullyClosed);
        }
        self.step += 1;
        Ok(())
    }

    fn open_one(&mut self) -> Result<(), GripperError> {
        if self.step == 0 {
            return Err(GripperError::FullyOpen);
        }
        self.step -= 1;
        Ok(())
    }
}

/// Which phase a controller configuration drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseTask {
    Grasp,
    Release,
}

/// Loop parameters. `contact_count_threshold` is the number of consecutive
/// fused contact detections required before the grasp is declared stable.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub contact_count_threshold: u32,
    pub max_loop_iterations: u32,
    pub task: PhaseTask,
}

impl ControllerConfig {
    /// Grasp-phase config with the default iteration bound for the gripper.
    pub fn grasp(max_steps: u32) -> Self {
        Self {
            contact_count_threshold: 3,
            max_loop_iterations: max_steps + 16,
            task: PhaseTask::Grasp,
        }
    }

    pub fn release(max_steps: u32) -> Self {
        Self {
            contact_count_threshold: 1,
            max_loop_iterations: max_steps + 16,
            task: PhaseTask::Release,
        }
    }

    fn validate(&self, max_steps: u32, expected: PhaseTask) -> Result<(), ControllerError> {
        if self.task != expected {
            return Err(ControllerError::TaskMismatch {
                expected,
                got: self.task,
            });
        }
        if self.contact_count_threshold == 0 {
            return Err(ControllerError::InvalidConfig(
                "contact_count_threshold must be >= 1".into(),
            ));
        }
        if self.max_loop_iterations <= max_steps {
            return Err(ControllerError::InvalidConfig(format!(
                "max_loop_iterations ({}) must exceed gripper max_steps ({max_steps})",
                self.max_loop_iterations
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ControllerError {
    #[error("invalid controller config: {0}")]
    InvalidConfig(String),
    #[error("config task {got:?} does not match loop task {expected:?}")]
    TaskMismatch { expected: PhaseTask, got: PhaseTask },
}

/// How a control phase ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseOutcome {
    Grasped,
    Released,
    /// The gripper reached its last step without the loop condition being
    /// met: no contact during grasp, or no compensation headroom left during
    /// slip control.
    FaultFullyClosedNoContact,
    /// A provider or sensor source failed; surfaced instead of acting on a
    /// silent default label.
    FaultProvider,
    Timeout,
}

/// Per-iteration action recorded in the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    None,
    Close,
    Open,
    Grasped,
    Released,
    Compensate,
    FaultFullyClosed,
    FaultProvider,
    Timeout,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TraceEvent::None => "",
            TraceEvent::Close => "close",
            TraceEvent::Open => "open",
            TraceEvent::Grasped => "grasped",
            TraceEvent::Released => "released",
            TraceEvent::Compensate => "compensate",
            TraceEvent::FaultFullyClosed => "fault_fully_closed",
            TraceEvent::FaultProvider => "fault_provider",
            TraceEvent::Timeout => "timeout",
        };
        f.write_str(s)
    }
}

/// One controller iteration: per-unit labels, fused label, gripper step after
/// acting, and the action taken. Labels are absent when a fault preempted
/// classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRow {
    pub iteration: u32,
    pub label_a: Option<bool>,
    pub label_b: Option<bool>,
    pub fused: Option<bool>,
    pub gripper_step: u32,
    pub event: TraceEvent,
}

/// Outcome of one control phase, with full bookkeeping for experiment plots.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspPhaseResult {
    pub outcome: PhaseOutcome,
    /// Motor steps commanded during the phase.
    pub steps_taken: u32,
    pub slip_events: u32,
    pub trace: Vec<TraceRow>,
}

impl GraspPhaseResult {
    /// Writes the trace in the export format
    /// `iteration,label_A,label_B,fused,gripper_step,event`.
    pub fn write_trace_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "iteration,label_A,label_B,fused,gripper_step,event")?;
        for row in &self.trace {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                row.iteration,
                fmt_label(row.label_a),
                fmt_label(row.label_b),
                fmt_label(row.fused),
                row.gripper_step,
                row.event
            )?;
        }
        Ok(())
    }
}

fn fmt_label(l: Option<bool>) -> &'static str {
    match l {
        Some(true) => "1",
        Some(false) => "0",
        None => "",
    }
}

#[derive(Debug, Error)]
pub enum SourceError {
    #[error("no data available from source")]
    Empty,
    #[error("source failure: {0}")]
    Failure(String),
}

/// Supplies the freshest frame from one sensor unit. Reads must not block on
/// the producer.
pub trait FrameSource {
    fn latest(&mut self) -> Result<TactileFrame, SourceError>;
}

/// Supplies the freshest 4-frame window from one sensor unit.
pub trait SequenceSource {
    fn latest_window(&mut self) -> Result<FrameSequence, SourceError>;
}

/// Waypoint tag along the pick-and-place trajectory.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Waypoint(pub String);

impl Waypoint {
    pub fn new(tag: impl Into<String>) -> Self {
        Waypoint(tag.into())
    }
}

impl fmt::Display for Waypoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Reports the waypoint the robot is currently at.
pub trait PoseSource {
    fn current_waypoint(&mut self) -> Waypoint;
}

/// True iff the robot is at the container release waypoint.
pub fn check_robot_in_release_pose(pose: &mut dyn PoseSource, target: &Waypoint) -> bool {
    pose.current_waypoint() == *target
}

/// Slip-detection wiring for the compensation loop.
pub struct SlipControl<'a> {
    pub method: SlipMethod,
    pub classifier: &'a ClassifierConfig,
    pub filter: &'a FilterConfig,
    pub provider_a: Option<&'a dyn SlipScoreProvider>,
    pub provider_b: Option<&'a dyn SlipScoreProvider>,
}

fn is_fault(err: &ClassifierError) -> PhaseOutcome {
    // Every classification failure maps to the provider fault: acting on a
    // default label instead would close the gripper onto nothing.
    let _ = err;
    PhaseOutcome::FaultProvider
}

/// Grasp phase: close one step per iteration while fused contact is 0;
/// declare the grasp stable after `contact_count_threshold` consecutive
/// positive fused detections.
///
/// The caller asserts that the robot is already in the grasp pose.
pub fn grasp_contact_loop(
    source_a: &mut dyn FrameSource,
    source_b: &mut dyn FrameSource,
    provider_a: &dyn ContactScoreProvider,
    provider_b: &dyn ContactScoreProvider,
    gripper: &mut dyn GripperDrive,
    cfg: &ControllerConfig,
    classifier: &ClassifierConfig,
) -> Result<GraspPhaseResult, ControllerError> {
    cfg.validate(gripper.max_steps(), PhaseTask::Grasp)?;
    let mut trace = Vec::new();
    let mut steps_taken = 0;
    let mut consecutive = 0;
    for iteration in 0..cfg.max_loop_iterations {
        let labels = classify_pair(source_a, source_b, provider_a, provider_b, classifier);
        let (label_a, label_b, fused) = match labels {
            Ok(v) => v,
            Err(outcome) => {
                trace.push(TraceRow {
                    iteration,
                    label_a: None,
                    label_b: None,
                    fused: None,
                    gripper_step: gripper.step(),
                    event: TraceEvent::FaultProvider,
                });
                return Ok(GraspPhaseResult {
                    outcome,
                    steps_taken,
                    slip_events: 0,
                    trace,
                });
            }
        };
        let mut event = TraceEvent::None;
        if fused.positive {
            consecutive += 1;
            if consecutive >= cfg.contact_count_threshold {
                event = TraceEvent::Grasped;
            }
        } else {
            consecutive = 0;
            if gripper.close_one().is_err() {
                event = TraceEvent::FaultFullyClosed;
            } else {
                steps_taken += 1;
                event = TraceEvent::Close;
            }
        }
        trace.push(TraceRow {
            iteration,
            label_a: Some(label_a.positive),
            label_b: Some(label_b.positive),
            fused: Some(fused.positive),
            gripper_step: gripper.step(),
            event,
        });
        match event {
            TraceEvent::Grasped => {
                return Ok(GraspPhaseResult {
                    outcome: PhaseOutcome::Grasped,
                    steps_taken,
                    slip_events: 0,
                    trace,
                })
            }
            TraceEvent::FaultFullyClosed => {
                return Ok(GraspPhaseResult {
                    outcome: PhaseOutcome::FaultFullyClosedNoContact,
                    steps_taken,
                    slip_events: 0,
                    trace,
                })
            }
            _ => {}
        }
    }
    Ok(timeout_result(trace, steps_taken, 0))
}

/// Release phase: open one step per iteration while fused contact is 1;
/// terminate released on the first fused 0.
pub fn release_loop(
    source_a: &mut dyn FrameSource,
    source_b: &mut dyn FrameSource,
    provider_a: &dyn ContactScoreProvider,
    provider_b: &dyn ContactScoreProvider,
    gripper: &mut dyn GripperDrive,
    cfg: &ControllerConfig,
    classifier: &ClassifierConfig,
) -> Result<GraspPhaseResult, ControllerError> {
    cfg.validate(gripper.max_steps(), PhaseTask::Release)?;
    let mut trace = Vec::new();
    let mut steps_taken = 0;
    for iteration in 0..cfg.max_loop_iterations {
        let labels = classify_pair(source_a, source_b, provider_a, provider_b, classifier);
        let (label_a, label_b, fused) = match labels {
            Ok(v) => v,
            Err(outcome) => {
                trace.push(TraceRow {
                    iteration,
                    label_a: None,
                    label_b: None,
                    fused: None,
                    gripper_step: gripper.step(),
                    event: TraceEvent::FaultProvider,
                });
                return Ok(GraspPhaseResult {
                    outcome,
                    steps_taken,
                    slip_events: 0,
                    trace,
                });
            }
        };
        let event = if fused.positive {
            if gripper.open_one().is_err() {
                // Cannot open further with contact still present.
                TraceEvent::Timeout
            } else {
                steps_taken += 1;
                TraceEvent::Open
            }
        } else {
            TraceEvent::Released
        };
        trace.push(TraceRow {
            iteration,
            label_a: Some(label_a.positive),
            label_b: Some(label_b.positive),
            fused: Some(fused.positive),
            gripper_step: gripper.step(),
            event,
        });
        match event {
            TraceEvent::Released => {
                return Ok(GraspPhaseResult {
                    outcome: PhaseOutcome::Released,
                    steps_taken,
                    slip_events: 0,
                    trace,
                })
            }
            TraceEvent::Timeout => {
                return Ok(GraspPhaseResult {
                    outcome: PhaseOutcome::Timeout,
                    steps_taken,
                    slip_events: 0,
                    trace,
                })
            }
            _ => {}
        }
    }
    Ok(timeout_result(trace, steps_taken, 0))
}

/// Transport phase: per iteration, run slip detection on the latest window
/// from each unit, fuse with OR, and close one step on slip. Exits when the
/// robot reaches the release waypoint.
///
/// The caller asserts that the object is grasped on entry.
pub fn grasp_slip_loop(
    source_a: &mut dyn SequenceSource,
    source_b: &mut dyn SequenceSource,
    gripper: &mut dyn GripperDrive,
    cfg: &ControllerConfig,
    slip: &SlipControl<'_>,
    pose: &mut dyn PoseSource,
    release_target: &Waypoint,
) -> Result<GraspPhaseResult, ControllerError> {
    cfg.validate(gripper.max_steps(), PhaseTask::Grasp)?;
    let mut trace = Vec::new();
    let mut steps_taken = 0;
    let mut slip_events = 0;
    for iteration in 0..cfg.max_loop_iterations {
        let labels = detect_pair(source_a, source_b, slip);
        let (label_a, label_b, fused) = match labels {
            Ok(v) => v,
            Err(outcome) => {
                trace.push(TraceRow {
                    iteration,
                    label_a: None,
                    label_b: None,
                    fused: None,
                    gripper_step: gripper.step(),
                    event: TraceEvent::FaultProvider,
                });
                return Ok(GraspPhaseResult {
                    outcome,
                    steps_taken,
                    slip_events,
                    trace,
                });
            }
        };
        let mut event = TraceEvent::None;
        if fused.positive {
            slip_events += 1;
            if gripper.close_one().is_err() {
                event = TraceEvent::FaultFullyClosed;
            } else {
                steps_taken += 1;
                event = TraceEvent::Compensate;
            }
        }
        trace.push(TraceRow {
            iteration,
            label_a: Some(label_a.positive),
            label_b: Some(label_b.positive),
            fused: Some(fused.positive),
            gripper_step: gripper.step(),
            event,
        });
        if event == TraceEvent::FaultFullyClosed {
            return Ok(GraspPhaseResult {
                outcome: PhaseOutcome::FaultFullyClosedNoContact,
                steps_taken,
                slip_events,
                trace,
            });
        }
        if check_robot_in_release_pose(pose, release_target) {
            return Ok(GraspPhaseResult {
                outcome: PhaseOutcome::Grasped,
                steps_taken,
                slip_events,
                trace,
            });
        }
    }
    Ok(timeout_result(trace, steps_taken, slip_events))
}

fn timeout_result(trace: Vec<TraceRow>, steps_taken: u32, slip_events: u32) -> GraspPhaseResult {
    GraspPhaseResult {
        outcome: PhaseOutcome::Timeout,
        steps_taken,
        slip_events,
        trace,
    }
}

fn classify_pair(
    source_a: &mut dyn FrameSource,
    source_b: &mut dyn FrameSource,
    provider_a: &dyn ContactScoreProvider,
    provider_b: &dyn ContactScoreProvider,
    classifier: &ClassifierConfig,
) -> Result<(Label, Label, Label), PhaseOutcome> {
    let frame_a = source_a.latest().map_err(|_| PhaseOutcome::FaultProvider)?;
    let frame_b = source_b.latest().map_err(|_| PhaseOutcome::FaultProvider)?;
    let label_a = contact_classify(&frame_a, provider_a, classifier).map_err(|e| is_fault(&e))?;
    let label_b = contact_classify(&frame_b, provider_b, classifier).map_err(|e| is_fault(&e))?;
    let fused = fuse_contact(label_a, label_b).map_err(|e| is_fault(&e))?;
    Ok((label_a, label_b, fused))
}

fn detect_pair(
    source_a: &mut dyn SequenceSource,
    source_b: &mut dyn SequenceSource,
    slip: &SlipControl<'_>,
) -> Result<(Label, Label, Label), PhaseOutcome> {
    let seq_a = source_a
        .latest_window()
        .map_err(|_| PhaseOutcome::FaultProvider)?;
    let seq_b = source_b
        .latest_window()
        .map_err(|_| PhaseOutcome::FaultProvider)?;
    let label_a = slip_detect(
        &seq_a,
        slip.method,
        slip.provider_a,
        slip.classifier,
        slip.filter,
    )
    .map_err(|e| is_fault(&e))?;
    let label_b = slip_detect(
        &seq_b,
        slip.method,
        slip.provider_b,
        slip.classifier,
        slip.filter,
    )
    .map_err(|e| is_fault(&e))?;
    let fused = fuse_slip(label_a, label_b).map_err(|e| is_fault(&e))?;
    Ok((label_a, label_b, fused))
}
