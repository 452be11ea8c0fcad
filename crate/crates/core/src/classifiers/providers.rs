//! Score providers: the pluggable scoring capability behind the classifiers.
//!
//! A provider maps an input image to a deterministic score in [0,1]. Two
//! implementations ship with the crate: a synthetic contact scorer derived
//! from a no-contact reference frame, and a table-backed oracle that replays
//! recorded model outputs keyed by image id.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::common::SensorUnit;
use crate::image::{ImageError, TactileFrame};
use crate::morphology::FilteredImage;

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("no score recorded for image id `{0}`")]
    UnknownImageId(String),
    #[error("provider failure: {0}")]
    Failure(String),
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// Scores a single tactile frame for contact.
pub trait ContactScoreProvider: Send + Sync {
    fn unit(&self) -> SensorUnit;
    fn score(&self, frame: &TactileFrame) -> Result<f64, ProviderError>;
}

/// Scores a filtered slip-evidence image. `window_id` identifies the window
/// (the last frame timestamp in decimal) so table-backed providers can key
/// on it.
pub trait SlipScoreProvider: Send + Sync {
    fn unit(&self) -> SensorUnit;
    fn score(&self, window_id: &str, psi: &FilteredImage) -> Result<f64, ProviderError>;
}

/// Contact scorer that stands in for a trained model: a logistic mapping of
/// the mean absolute per-pixel difference between the input and a no-contact
/// reference frame.
#[derive(Debug, Clone)]
pub struct SyntheticContactProvider {
    reference: TactileFrame,
    steepness: f64,
    midpoint: f64,
}

impl SyntheticContactProvider {
    pub fn new(reference: TactileFrame) -> Self {
        Self {
            reference,
            steepness: 0.5,
            midpoint: 8.0,
        }
    }

    pub fn with_shape(mut self, steepness: f64, midpoint: f64) -> Self {
        self.steepness = steepness;
        self.midpoint = midpoint;
        self
    }

    /// Mean absolute per-pixel difference across all channels.
    pub fn mean_abs_diff(&self, frame: &TactileFrame) -> Result<f64, ProviderError> {
        if !self.reference.same_dims(frame) {
            return Err(ProviderError::Image(ImageError::DimensionMismatch {
                expected_w: self.reference.width(),
                expected_h: self.reference.height(),
                got_w: frame.width(),
                got_h: frame.height(),
            }));
        }
        let sum: u64 = self
            .reference
            .data()
            .iter()
            .zip(frame.data())
            .map(|(&a, &b)| a.abs_diff(b) as u64)
            .sum();
        Ok(sum as f64 / self.reference.data().len() as f64)
    }
}

impl ContactScoreProvider for SyntheticContactProvider {
    fn unit(&self) -> SensorUnit {
        self.reference.unit
    }

    fn score(&self, frame: &TactileFrame) -> Result<f64, ProviderError> {
        let madiff = self.mean_abs_diff(frame)?;
        Ok(1.0 / (1.0 + (-self.steepness * (madiff - self.midpoint)).exp()))
    }
}

#[derive(Debug, Error)]
pub enum OracleTableError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("score table line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("duplicate image id `{0}` in score table")]
    DuplicateId(String),
    #[error("score table must start with an `image_id,score` header")]
    MissingHeader,
}

/// Table of recorded scores keyed by image id.
///
/// When used as a [`ContactScoreProvider`] the id of a frame is its
/// timestamp rendered in decimal; slip windows use the id passed by the
/// caller. Unknown ids are provider failures, never default labels.
#[derive(Debug, Clone)]
pub struct OracleProvider {
    unit: SensorUnit,
    table: HashMap<String, f64>,
}

impl OracleProvider {
    pub fn new(unit: SensorUnit, table: HashMap<String, f64>) -> Self {
        Self { unit, table }
    }

    /// Parses the CSV interface format: an `image_id,score` header followed
    /// by one row per image; scores must lie in [0,1].
    pub fn from_csv_str(unit: SensorUnit, text: &str) -> Result<Self, OracleTableError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "image_id,score" => {}
            _ => return Err(OracleTableError::MissingHeader),
        }
        let mut table = HashMap::new();
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (id, score_text) =
                line.split_once(',')
                    .ok_or_else(|| OracleTableError::MalformedRow {
                        line: idx + 1,
                        reason: "expected `image_id,score`".into(),
                    })?;
            let score: f64 =
                score_text
                    .trim()
                    .parse()
                    .map_err(|e| OracleTableError::MalformedRow {
                        line: idx + 1,
                        reason: format!("bad score: {e}"),
                    })?;
            if !(0.0..=1.0).contains(&score) {
                return Err(OracleTableError::MalformedRow {
                    line: idx + 1,
                    reason: format!("score {score} outside [0,1]"),
                });
            }
            if table.insert(id.trim().to_string(), score).is_some() {
                return Err(OracleTableError::DuplicateId(id.trim().to_string()));
            }
        }
        Ok(Self { unit, table })
    }

    pub fn from_csv_path<P: AsRef<Path>>(
        unit: SensorUnit,
        path: P,
    ) -> Result<Self, OracleTableError> {
        Self::from_csv_str(unit, &fs::read_to_string(path)?)
    }

    /// Builds a table keyed by frame index (`"0"`, `"1"`, ...), the layout
    /// produced by scripted controller runs.
    pub fn from_scores(unit: SensorUnit, scores: &[f64]) -> Self {
        let table = scores
            .iter()
            .enumerate()
            .map(|(i, &s)| (i.to_string(), s))
            .collect();
        Self { unit, table }
    }

    pub fn score_id(&self, id: &str) -> Result<f64, ProviderError> {
        self.table
            .get(id)
            .copied()
            .ok_or_else(|| ProviderError::UnknownImageId(id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl ContactScoreProvider for OracleProvider {
    fn unit(&self) -> SensorUnit {
        self.unit
    }

    fn score(&self, frame: &TactileFrame) -> Result<f64, ProviderError> {
        self.score_id(&frame.timestamp_ms.to_string())
    }
}

impl SlipScoreProvider for OracleProvider {
    fn unit(&self) -> SensorUnit {
        self.unit
    }

    fn score(&self, window_id: &str, _psi: &FilteredImage) -> Result<f64, ProviderError> {
        self.score_id(window_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> TactileFrame {
        TactileFrame::filled(16, 16, [90, 90, 90], 0, SensorUnit::A)
    }

    #[test]
    fn synthetic_score_on_reference_is_near_zero() {
        let provider = SyntheticContactProvider::new(reference());
        // madiff = 0 -> logistic(-4) ~ 0.018
        let score = provider.score(&reference()).unwrap();
        assert!(score < 0.05, "score {score}");
        assert!((score - 0.01798621).abs() < 1e-6);
    }

    #[test]
    fn synthetic_score_saturates_on_uniform_offset() {
        let provider = SyntheticContactProvider::new(reference());
        let offset = TactileFrame::filled(16, 16, [120, 120, 120], 1, SensorUnit::A);
        // madiff = 30 -> logistic(11) ~ 1
        let score = provider.score(&offset).unwrap();
        assert!(score > 0.99, "score {score}");
    }

    #[test]
    fn synthetic_score_on_half_offset_frame() {
        let provider = SyntheticContactProvider::new(reference());
        let mut frame = reference();
        let half = frame.data().len() / 2;
        for v in &mut frame.data_mut()[..half] {
            *v += 40;
        }
        // madiff = 20 -> logistic(6) ~ 0.9975
        let score = provider.score(&frame).unwrap();
        assert!(score > 0.95, "score {score}");
    }

    #[test]
    fn synthetic_rejects_dimension_mismatch() {
        let provider = SyntheticContactProvider::new(reference());
        let other = TactileFrame::filled(8, 8, [90, 90, 90], 0, SensorUnit::A);
        assert!(provider.score(&other).is_err());
    }

    #[test]
    fn synthetic_score_is_monotone_in_difference() {
        let provider = SyntheticContactProvider::new(reference());
        let mut last = -1.0;
        for offset in 0..=40u8 {
            let frame = TactileFrame::filled(16, 16, [90 + offset; 3], 1, SensorUnit::A);
            let score = provider.score(&frame).unwrap();
            assert!(score >= last);
            last = score;
        }
    }

    #[test]
    fn oracle_lookup_and_unknown_id() {
        let table = "image_id,score\nf001,0.93\nf002,0.10\n";
        let oracle = OracleProvider::from_csv_str(SensorUnit::A, table).unwrap();
        assert_eq!(oracle.score_id("f001").unwrap(), 0.93);
        assert!(matches!(
            oracle.score_id("missing"),
            Err(ProviderError::UnknownImageId(_))
        ));
    }

    #[test]
    fn empty_oracle_fails_every_call() {
        let oracle = OracleProvider::from_csv_str(SensorUnit::B, "image_id,score\n").unwrap();
        assert!(oracle.is_empty());
        assert!(oracle.score_id("anything").is_err());
    }

    #[test]
    fn oracle_rejects_duplicates_and_bad_rows() {
        let dup = "image_id,score\na,0.5\na,0.6\n";
        assert!(matches!(
            OracleProvider::from_csv_str(SensorUnit::A, dup),
            Err(OracleTableError::DuplicateId(_))
        ));
        let bad = "image_id,score\na;0.5\n";
        assert!(matches!(
            OracleProvider::from_csv_str(SensorUnit::A, bad),
            Err(OracleTableError::MalformedRow { .. })
        ));
        let out_of_range = "image_id,score\na,1.5\n";
        assert!(matches!(
            OracleProvider::from_csv_str(SensorUnit::A, out_of_range),
            Err(OracleTableError::MalformedRow { .. })
        ));
        let no_header = "a,0.5\n";
        assert!(matches!(
            OracleProvider::from_csv_str(SensorUnit::A, no_header),
            Err(OracleTableError::MissingHeader)
        ));
    }

    #[test]
    fn oracle_scores_frames_by_timestamp() {
        let oracle = OracleProvider::from_scores(SensorUnit::A, &[0.1, 0.9]);
        let f0 = TactileFrame::filled(2, 2, [0; 3], 0, SensorUnit::A);
        let f1 = TactileFrame::filled(2, 2, [0; 3], 1, SensorUnit::A);
        assert_eq!(ContactScoreProvider::score(&oracle, &f0).unwrap(), 0.1);
        assert_eq!(ContactScoreProvider::score(&oracle, &f1).unwrap(), 0.9);
    }
}
