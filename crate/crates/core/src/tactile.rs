//! Tactile image preprocessing: grayscale conversion, frame differencing,
//! binarisation, morphological cleanup and the brightness statistic.
//!
//! The pipeline distils a short window of tactile frames into a binary
//! slip-evidence image: pixels that changed between the first and last frame
//! of the window survive thresholding and opening; everything else is black.

use serde::{Deserialize, Serialize};

use crate::common::SensorUnit;
use crate::image::{GrayImage, ImageError, KernelSpec, TactileFrame};
use crate::morphology::{open, FilteredImage, StructuringElement};

/// Per-pixel absolute difference between two grayscale frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl DiffImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }
}

/// Ordered grayscale window from a single sensor unit.
///
/// The window length is fixed by configuration (default 4); timestamps must
/// be strictly increasing and all frames share dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSequence {
    frames: Vec<GrayImage>,
    timestamps: Vec<u64>,
    unit: SensorUnit,
}

/// Default window length.
pub const DEFAULT_SEQUENCE_LEN: usize = 4;

impl FrameSequence {
    pub fn new(
        frames: Vec<GrayImage>,
        timestamps: Vec<u64>,
        unit: SensorUnit,
    ) -> Result<Self, ImageError> {
        if frames.is_empty() || frames.len() != timestamps.len() {
            return Err(ImageError::BadSequenceLength {
                expected: timestamps.len().max(1),
                got: frames.len(),
            });
        }
        let (w, h) = (frames[0].width(), frames[0].height());
        for f in &frames[1..] {
            if f.width() != w || f.height() != h {
                return Err(ImageError::DimensionMismatch {
                    expected_w: w,
                    expected_h: h,
                    got_w: f.width(),
                    got_h: f.height(),
                });
            }
        }
        if timestamps.windows(2).any(|p| p[1] <= p[0]) {
            return Err(ImageError::NonMonotonicTimestamps);
        }
        Ok(Self {
            frames,
            timestamps,
            unit,
        })
    }

    /// Builds the window from raw RGB frames, converting each to grayscale.
    pub fn from_rgb(frames: &[TactileFrame]) -> Result<Self, ImageError> {
        if frames.is_empty() {
            return Err(ImageError::BadSequenceLength {
                expected: DEFAULT_SEQUENCE_LEN,
                got: 0,
            });
        }
        let unit = frames[0].unit;
        if frames.iter().any(|f| f.unit != unit) {
            return Err(ImageError::MixedSensorUnits);
        }
        let gray = frames.iter().map(to_grayscale).collect();
        let timestamps = frames.iter().map(|f| f.timestamp_ms).collect();
        Self::new(gray, timestamps, unit)
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[GrayImage] {
        &self.frames
    }

    pub fn first(&self) -> &GrayImage {
        &self.frames[0]
    }

    pub fn last(&self) -> &GrayImage {
        self.frames.last().expect("sequence is non-empty")
    }

    pub fn unit(&self) -> SensorUnit {
        self.unit
    }

    pub fn timestamps(&self) -> &[u64] {
        &self.timestamps
    }

    pub fn last_timestamp(&self) -> u64 {
        *self.timestamps.last().expect("sequence is non-empty")
    }
}

/// Filter pipeline parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    /// Difference values at or above this become white before opening.
    pub binarize_threshold: u8,
    pub kernel: KernelSpec,
    pub sequence_len: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            binarize_threshold: 25,
            kernel: KernelSpec::default(),
            sequence_len: DEFAULT_SEQUENCE_LEN,
        }
    }
}

impl FilterConfig {
    pub fn element(&self) -> Result<StructuringElement, ImageError> {
        StructuringElement::try_from(self.kernel)
    }
}

/// ITU-R 601 luma with round-half-up, computed in integer arithmetic.
pub fn to_grayscale(frame: &TactileFrame) -> GrayImage {
    let mut data = Vec::with_capacity(frame.width() * frame.height());
    for px in frame.data().chunks_exact(3) {
        let v = (299 * px[0] as u32 + 587 * px[1] as u32 + 114 * px[2] as u32 + 500) / 1000;
        data.push(v as u8);
    }
    GrayImage::new(frame.width(), frame.height(), data).expect("length follows from frame")
}

/// Absolute per-pixel difference between the last and first frame of the
/// window. Deformation change is direction-agnostic evidence, so the sign of
/// the subtraction is discarded.
pub fn frame_difference(seq: &FrameSequence) -> DiffImage {
    let first = seq.first();
    let last = seq.last();
    let data = first
        .data()
        .iter()
        .zip(last.data())
        .map(|(&a, &b)| a.abs_diff(b))
        .collect();
    DiffImage {
        width: first.width(),
        height: first.height(),
        data,
    }
}

/// Threshold a difference image into a binary one: `>= threshold` maps to 255.
pub fn binarize(diff: &DiffImage, threshold: u8) -> FilteredImage {
    let data = diff
        .data
        .iter()
        .map(|&v| if v >= threshold { 255 } else { 0 })
        .collect();
    FilteredImage::new(diff.width, diff.height, data).expect("thresholded data is binary")
}

/// Full filter pipeline: difference, binarise, open.
pub fn filter_image(seq: &FrameSequence, cfg: &FilterConfig) -> Result<FilteredImage, ImageError> {
    if seq.len() != cfg.sequence_len {
        return Err(ImageError::BadSequenceLength {
            expected: cfg.sequence_len,
            got: seq.len(),
        });
    }
    let diff = frame_difference(seq);
    let binary = binarize(&diff, cfg.binarize_threshold);
    let se = cfg.element()?;
    Ok(open(&binary, &se))
}

/// Arithmetic mean of all pixel values of a binary image.
pub fn brightness(img: &FilteredImage) -> Result<f64, ImageError> {
    let n = img.width() * img.height();
    if n == 0 {
        return Err(ImageError::Empty);
    }
    let sum: u64 = img.data().iter().map(|&v| v as u64).sum();
    Ok(sum as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray_seq(values: &[u8], w: usize, h: usize) -> FrameSequence {
        let frames = values.iter().map(|&v| GrayImage::filled(w, h, v)).collect();
        let ts = (0..values.len() as u64).map(|i| i * 33).collect();
        FrameSequence::new(frames, ts, SensorUnit::A).unwrap()
    }

    #[test]
    fn grayscale_endpoints_and_fixed_point() {
        let black = TactileFrame::filled(4, 4, [0, 0, 0], 0, SensorUnit::A);
        let white = TactileFrame::filled(4, 4, [255, 255, 255], 0, SensorUnit::A);
        let gray = TactileFrame::filled(4, 4, [100, 100, 100], 0, SensorUnit::A);
        assert!(to_grayscale(&black).data().iter().all(|&v| v == 0));
        assert!(to_grayscale(&white).data().iter().all(|&v| v == 255));
        assert!(to_grayscale(&gray).data().iter().all(|&v| v == 100));
    }

    #[test]
    fn grayscale_rounds_half_up() {
        // 0.299*1 = 0.299 -> 0; 0.299*2 = 0.598 -> 1
        let f1 = TactileFrame::filled(1, 1, [1, 0, 0], 0, SensorUnit::A);
        let f2 = TactileFrame::filled(1, 1, [2, 0, 0], 0, SensorUnit::A);
        assert_eq!(to_grayscale(&f1).data()[0], 0);
        assert_eq!(to_grayscale(&f2).data()[0], 1);
    }

    #[test]
    fn difference_of_identical_frames_is_zero() {
        let seq = gray_seq(&[7, 7, 7, 7], 6, 5);
        assert!(frame_difference(&seq).data().iter().all(|&v| v == 0));
    }

    #[test]
    fn difference_is_absolute_in_both_directions() {
        let up = gray_seq(&[0, 0, 0, 255], 4, 4);
        let down = gray_seq(&[255, 255, 255, 0], 4, 4);
        assert!(frame_difference(&up).data().iter().all(|&v| v == 255));
        assert!(frame_difference(&down).data().iter().all(|&v| v == 255));
    }

    #[test]
    fn sequence_rejects_dimension_mismatch() {
        let frames = vec![GrayImage::filled(4, 4, 0), GrayImage::filled(5, 4, 0)];
        let err = FrameSequence::new(frames, vec![0, 1], SensorUnit::A).unwrap_err();
        assert!(matches!(err, ImageError::DimensionMismatch { .. }));
    }

    #[test]
    fn sequence_rejects_non_monotonic_timestamps() {
        let frames = vec![GrayImage::filled(4, 4, 0), GrayImage::filled(4, 4, 0)];
        let err = FrameSequence::new(frames, vec![5, 5], SensorUnit::A).unwrap_err();
        assert_eq!(err, ImageError::NonMonotonicTimestamps);
    }

    #[test]
    fn filter_of_static_sequence_is_all_black() {
        let seq = gray_seq(&[90, 90, 90, 90], 64, 48);
        let psi = filter_image(&seq, &FilterConfig::default()).unwrap();
        assert!(psi.is_all_black());
        assert_eq!(brightness(&psi).unwrap(), 0.0);
    }

    #[test]
    fn filter_rejects_wrong_window_length() {
        let seq = gray_seq(&[1, 2, 3], 4, 4);
        let err = filter_image(&seq, &FilterConfig::default()).unwrap_err();
        assert!(matches!(
            err,
            ImageError::BadSequenceLength {
                expected: 4,
                got: 3
            }
        ));
    }

    #[test]
    fn noise_below_threshold_is_removed() {
        // +-5 wiggle stays well under the default threshold of 25.
        let seq = gray_seq(&[90, 95, 85, 95], 32, 32);
        let psi = filter_image(&seq, &FilterConfig::default()).unwrap();
        assert!(psi.is_all_black());
    }

    #[test]
    fn brightness_endpoints_and_fraction() {
        assert_eq!(brightness(&FilteredImage::black(10, 10)).unwrap(), 0.0);
        assert_eq!(brightness(&FilteredImage::white(10, 10)).unwrap(), 255.0);
        // Exactly 10% white pixels.
        let mut img = FilteredImage::black(100, 96);
        for i in 0..960 {
            img.set_white(i % 100, i / 100);
        }
        assert_eq!(brightness(&img).unwrap(), 25.5);
    }

    #[test]
    fn brightness_of_empty_image_is_an_error() {
        let img = FilteredImage::new(0, 0, vec![]).unwrap();
        assert_eq!(brightness(&img).unwrap_err(), ImageError::Empty);
    }
}
