//! Binary contact and slip classifiers.
//!
//! Classification is a threshold over a score in [0,1]. Scores come from
//! pluggable [`providers`] so recorded model outputs or synthetic stand-ins
//! can drive the control loops without bundling trained networks. All
//! threshold comparisons are inclusive (`>=`).

pub mod providers;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::common::SensorUnit;
use crate::image::{ImageError, NormalizedFrame, TactileFrame};
use crate::tactile::{brightness, filter_image, FilterConfig, FrameSequence};

pub use providers::{
    ContactScoreProvider, OracleProvider, ProviderError, SlipScoreProvider,
    SyntheticContactProvider,
};

/// Which binary question a label answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Contact,
    Slip,
}

/// Binary classification outcome. `positive` means contact or slip; the
/// negative class is no-contact or stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Label {
    pub task: Task,
    pub positive: bool,
}

impl Label {
    pub fn contact(positive: bool) -> Self {
        Self {
            task: Task::Contact,
            positive,
        }
    }

    pub fn slip(positive: bool) -> Self {
        Self {
            task: Task::Slip,
            positive,
        }
    }

    pub fn as_u8(self) -> u8 {
        self.positive as u8
    }
}

/// Slip classifier backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlipMethod {
    Brightness,
    Cnn,
}

/// Classifier thresholds. Contact thresholds are per sensor unit and shared
/// between grasp and release phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub contact_threshold_a: f64,
    pub contact_threshold_b: f64,
    pub slip_method: SlipMethod,
    pub slip_threshold_brightness: f64,
    pub slip_threshold_cnn: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            contact_threshold_a: 0.5,
            contact_threshold_b: 0.5,
            slip_method: SlipMethod::Brightness,
            slip_threshold_brightness: 10.0,
            slip_threshold_cnn: 0.5,
        }
    }
}

impl ClassifierConfig {
    pub fn contact_threshold(&self, unit: SensorUnit) -> f64 {
        match unit {
            SensorUnit::A => self.contact_threshold_a,
            SensorUnit::B => self.contact_threshold_b,
        }
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        for (name, t) in [
            ("contact_threshold_a", self.contact_threshold_a),
            ("contact_threshold_b", self.contact_threshold_b),
            ("slip_threshold_cnn", self.slip_threshold_cnn),
        ] {
            if !(0.0..=1.0).contains(&t) {
                return Err(ClassifierError::InvalidConfig(format!(
                    "{name} must lie in [0,1], got {t}"
                )));
            }
        }
        if self.slip_threshold_brightness < 0.0 || self.slip_threshold_brightness > 255.0 {
            return Err(ClassifierError::InvalidConfig(format!(
                "slip_threshold_brightness must lie in [0,255], got {}",
                self.slip_threshold_brightness
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("provider unit {provider} does not match input unit {input}")]
    UnitMismatch {
        provider: SensorUnit,
        input: SensorUnit,
    },
    #[error("fusion requires two labels of the same task")]
    TaskMismatch,
    #[error("slip method cnn requires a score provider")]
    MissingProvider,
    #[error("provider returned score {0} outside [0,1]")]
    ScoreOutOfRange(f64),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("invalid classifier config: {0}")]
    InvalidConfig(String),
}

/// Divides every channel by 255, the preprocessing applied before learned
/// scorers see a frame.
pub fn normalize_input(frame: &TactileFrame) -> NormalizedFrame {
    NormalizedFrame {
        width: frame.width(),
        height: frame.height(),
        data: frame.data().iter().map(|&v| v as f32 / 255.0).collect(),
    }
}

fn checked_score(score: f64) -> Result<f64, ClassifierError> {
    if !(0.0..=1.0).contains(&score) {
        return Err(ClassifierError::ScoreOutOfRange(score));
    }
    Ok(score)
}

/// Scores a frame with the unit's contact provider and thresholds it.
///
/// Provider failures surface as errors, never as a silent no-contact label:
/// defaulting to 0 would close the gripper onto nothing.
pub fn contact_classify(
    frame: &TactileFrame,
    provider: &dyn ContactScoreProvider,
    cfg: &ClassifierConfig,
) -> Result<Label, ClassifierError> {
    if provider.unit() != frame.unit {
        return Err(ClassifierError::UnitMismatch {
            provider: provider.unit(),
            input: frame.unit,
        });
    }
    let score = checked_score(provider.score(frame)?)?;
    Ok(Label::contact(score >= cfg.contact_threshold(frame.unit)))
}

/// AND fusion of the two per-unit contact labels.
pub fn fuse_contact(a: Label, b: Label) -> Result<Label, ClassifierError> {
    if a.task != Task::Contact || b.task != Task::Contact {
        return Err(ClassifierError::TaskMismatch);
    }
    Ok(Label::contact(a.positive && b.positive))
}

/// OR fusion of the two per-unit slip labels.
pub fn fuse_slip(a: Label, b: Label) -> Result<Label, ClassifierError> {
    if a.task != Task::Slip || b.task != Task::Slip {
        return Err(ClassifierError::TaskMismatch);
    }
    Ok(Label::slip(a.positive || b.positive))
}

/// Runs the filter pipeline on the window and classifies the result.
///
/// With the brightness method the label is `brightness(psi) >= threshold`;
/// with the cnn method a provider scores the filtered image. The window id
/// passed to slip providers is the last frame timestamp rendered in decimal.
pub fn slip_detect(
    seq: &FrameSequence,
    method: SlipMethod,
    provider: Option<&dyn SlipScoreProvider>,
    cfg: &ClassifierConfig,
    filter: &FilterConfig,
) -> Result<Label, ClassifierError> {
    let psi = filter_image(seq, filter)?;
    match method {
        SlipMethod::Brightness => {
            let value = brightness(&psi)?;
            Ok(Label::slip(value >= cfg.slip_threshold_brightness))
        }
        SlipMethod::Cnn => {
            let provider = provider.ok_or(ClassifierError::MissingProvider)?;
            if provider.unit() != seq.unit() {
                return Err(ClassifierError::UnitMismatch {
                    provider: provider.unit(),
                    input: seq.unit(),
                });
            }
            let id = seq.last_timestamp().to_string();
            let score = checked_score(provider.score(&id, &psi)?)?;
            Ok(Label::slip(score >= cfg.slip_threshold_cnn))
        }
    }
}
