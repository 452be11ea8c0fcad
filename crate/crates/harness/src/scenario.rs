//! Scenario configuration: everything a deterministic episode needs, as a
//! TOML file with nested sections. Every field has a default, so a scenario
//! file only overrides what it cares about.

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use vtgrasp_core::classifiers::ClassifierConfig;
use vtgrasp_core::common::ObjectClass;
use vtgrasp_core::geometry::{CameraIntrinsics, Workspace};
use vtgrasp_core::metrics::Environment;
use vtgrasp_core::tactile::FilterConfig;

/// Simulated object: width plus the slip-behaviour proxies. Width and
/// transient length fall back to per-class values when left unset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectSpec {
    pub class: ObjectClass,
    pub width_mm: Option<f64>,
    /// Closing steps needed beyond first contact before the hold is secure;
    /// heavier objects need more. 0 means the object never slips.
    pub hold_margin_steps: u32,
    /// Length in frames of the spurious contact runs produced by elastomer
    /// hysteresis while closing.
    pub transient_len: Option<u32>,
    /// How many steps before the touch step each hysteresis run fires.
    pub transient_offsets: Vec<u32>,
    /// Uncompensated slip bursts before the object falls.
    pub fall_threshold: u32,
}

impl Default for ObjectSpec {
    fn default() -> Self {
        Self::for_class(ObjectClass::Cardboard)
    }
}

impl ObjectSpec {
    pub fn for_class(class: ObjectClass) -> Self {
        Self {
            class,
            width_mm: None,
            hold_margin_steps: 1,
            transient_len: None,
            transient_offsets: vec![40, 15],
            fall_threshold: 3,
        }
    }

    pub fn width_mm(&self) -> f64 {
        self.width_mm.unwrap_or(match self.class {
            ObjectClass::Cardboard => 80.0,
            ObjectClass::Plastic => 70.0,
            ObjectClass::Metal => 66.0,
            ObjectClass::Glass => 74.0,
        })
    }

    pub fn transient_len(&self) -> u32 {
        // Glass weighs more: hysteresis transients last longer.
        self.transient_len.unwrap_or(match self.class {
            ObjectClass::Glass => 3,
            _ => 2,
        })
    }
}

/// Contact detections required per class before the grasp counts as stable.
pub fn default_contact_count(class: ObjectClass) -> u32 {
    match class {
        ObjectClass::Glass => 4,
        _ => 3,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
#[derive(Default)]
pub struct ControllerParams {
    /// Consecutive fused contact detections before the grasp is declared;
    /// defaults to the per-class value when absent.
    pub contact_count_threshold: Option<u32>,
    pub max_loop_iterations: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GripperParams {
    pub max_steps: u32,
    pub max_opening_mm: f64,
}

impl Default for GripperParams {
    fn default() -> Self {
        Self {
            max_steps: 255,
            max_opening_mm: 140.0,
        }
    }
}

/// Synthetic tactile stream calibration. The burst translation is sized so
/// genuine slip evidence lands well above the brightness threshold of 10
/// while sensor noise stays below the binarisation threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StreamParams {
    pub noise_amplitude: u8,
    pub frame_interval_ms: u64,
    /// Contact blob radius in pixels.
    pub blob_radius_px: f64,
    /// Added to every channel inside the blob.
    pub blob_intensity: i16,
    /// Blob translation within one slip-burst window.
    pub burst_shift_px: f64,
    /// Windows between slip bursts while the hold is insecure.
    pub burst_period_windows: u64,
}

impl Default for StreamParams {
    fn default() -> Self {
        Self {
            noise_amplitude: 5,
            frame_interval_ms: 33,
            blob_radius_px: 60.0,
            blob_intensity: 100,
            burst_shift_px: 30.0,
            burst_period_windows: 15,
        }
    }
}

/// One slip-phase trajectory segment, measured in 4-frame control windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointSpec {
    pub tag: String,
    pub windows: u64,
}

fn default_waypoints() -> Vec<WaypointSpec> {
    vec![
        WaypointSpec {
            tag: "lift".into(),
            windows: 60,
        },
        WaypointSpec {
            tag: "transport".into(),
            windows: 40,
        },
    ]
}

/// Optional explicit detection fixture files (PGM mask + 16-bit PGM depth).
/// When absent the episode synthesises both from the object spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixturePaths {
    pub mask: String,
    pub depth: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct FaultInjection {
    /// Fraction of masked depth pixels replaced by invalid (0) returns.
    pub invalid_depth_fraction: f64,
    /// Replace the detection mask with an empty one.
    pub corrupt_mask: bool,
}

/// Camera mounting: intrinsics, hand-eye matrix and the end-effector pose
/// held during detection, plus the reachable workspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraConfig {
    pub intrinsics: CameraIntrinsics,
    /// Row-major 4x4 camera-to-end-effector transform.
    pub hand_eye: [[f64; 4]; 4],
    /// End-effector rotation (row-major) and translation in the base frame.
    pub ee_rotation: [[f64; 3]; 3],
    pub ee_translation: [f64; 3],
    pub workspace: Workspace,
}

impl CameraConfig {
    /// Loads a standalone calibration file: intrinsics, row-major 4x4
    /// hand-eye matrix, detection pose and workspace rectangle as TOML.
    pub fn load<P: AsRef<Path>>(path: P) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path.as_ref())
            .with_context(|| format!("reading calibration `{}`", path.as_ref().display()))?;
        let cfg: CameraConfig = toml::from_str(&text)
            .with_context(|| format!("parsing calibration `{}`", path.as_ref().display()))?;
        cfg.ee_pose()?;
        cfg.hand_eye_transform()?;
        Ok(cfg)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> anyhow::Result<()> {
        let text = toml::to_string_pretty(self).context("serialising calibration")?;
        fs::write(path.as_ref(), text)
            .with_context(|| format!("writing calibration `{}`", path.as_ref().display()))?;
        Ok(())
    }

    pub fn ee_pose(&self) -> anyhow::Result<vtgrasp_core::geometry::EndEffectorPose> {
        let rot = vtgrasp_core::geometry::Mat3::from_rows(
            self.ee_rotation[0],
            self.ee_rotation[1],
            self.ee_rotation[2],
        );
        let t = vtgrasp_core::geometry::Vec3::new(
            self.ee_translation[0],
            self.ee_translation[1],
            self.ee_translation[2],
        );
        vtgrasp_core::geometry::EndEffectorPose::new(rot, t)
            .map_err(|e| anyhow::anyhow!("invalid end-effector pose: {e}"))
    }

    pub fn hand_eye_transform(&self) -> anyhow::Result<vtgrasp_core::geometry::HandEyeTransform> {
        vtgrasp_core::geometry::HandEyeTransform::from_matrix(&self.hand_eye)
            .map_err(|e| anyhow::anyhow!("invalid hand-eye transform: {e}"))
    }
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            intrinsics: CameraIntrinsics::new(600.0, 600.0, 320.0, 240.0, 640, 480)
                .expect("default intrinsics are valid"),
            hand_eye: [
                [1.0, 0.0, 0.0, 0.0],
                [0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
            ],
            // Camera points live in the permuted frame produced by
            // deprojection: x forward (depth), y image-right, z image-down.
            // The detection pose looks horizontally along base +x with
            // image-right along -y and image-down along -z.
            ee_rotation: [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]],
            ee_translation: [0.0, 0.0, 0.25],
            workspace: Workspace::standard(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub environment: Environment,
    pub object: ObjectSpec,
    pub filter: FilterConfig,
    pub classifier: ClassifierConfig,
    pub controller: ControllerParams,
    pub gripper: GripperParams,
    pub stream: StreamParams,
    pub waypoints: Vec<WaypointSpec>,
    pub fixtures: Option<FixturePaths>,
    pub faults: FaultInjection,
    pub camera: CameraConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            environment: Environment::Tiled,
            object: ObjectSpec::default(),
            filter: FilterConfig::default(),
            classifier: ClassifierConfig::default(),
            controller: ControllerParams::default(),
            gripper: GripperParams::default(),
            stream: StreamParams::default(),
            waypoints: default_waypoints(),
            fixtures: None,
            faults: FaultInjection::default(),
            camera: CameraConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn for_class(class: ObjectClass) -> Self {
        Self {
            object: ObjectSpec::for_class(class),
            ..Self::default()
        }
    }

    pub fn contact_count(&self) -> u32 {
        self.controller
            .contact_count_threshold
            .unwrap_or_else(|| default_contact_count(self.object.class))
    }

    pub fn max_loop_iterations(&self) -> u32 {
        self.controller
            .max_loop_iterations
            .unwrap_or(self.gripper.max_steps + 16)
    }

    /// The container waypoint where the object is released.
    pub fn release_waypoint(&self) -> String {
        format!("container_{}", self.object.class)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path.as_ref())
            .with_context(|| format!("reading scenario `{}`", path.as_ref().display()))?;
        let cfg: ScenarioConfig = toml::from_str(&text)
            .with_context(|| format!("parsing scenario `{}`", path.as_ref().display()))?;
        cfg.classifier
            .validate()
            .map_err(|e| anyhow::anyhow!("invalid classifier config: {e}"))?;
        Ok(cfg)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> anyhow::Result<()> {
        let text = toml::to_string_pretty(self).context("serialising scenario")?;
        fs::write(path.as_ref(), text)
            .with_context(|| format!("writing scenario `{}`", path.as_ref().display()))?;
        Ok(())
    }
}
