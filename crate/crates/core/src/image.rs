//! Raster types used throughout the pipeline.
//!
//! All buffers are row-major with the origin at the top-left pixel.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::common::SensorUnit;

/// Native tactile sensor resolution (width x height).
pub const TACTILE_WIDTH: usize = 240;
pub const TACTILE_HEIGHT: usize = 320;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImageError {
    #[error("dimension mismatch: expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    DimensionMismatch {
        expected_w: usize,
        expected_h: usize,
        got_w: usize,
        got_h: usize,
    },
    #[error("pixel buffer length {got} does not match expected {expected}")]
    BadBufferLength { expected: usize, got: usize },
    #[error("operation requires a non-empty image")]
    Empty,
    #[error("frame sequence must contain {expected} frames, got {got}")]
    BadSequenceLength { expected: usize, got: usize },
    #[error("frame timestamps must be strictly increasing")]
    NonMonotonicTimestamps,
    #[error("frames in a sequence must come from a single sensor unit")]
    MixedSensorUnits,
    #[error("invalid structuring element: {0}")]
    InvalidStructuringElement(&'static str),
    #[error("pixel values must be binary (0 or 255)")]
    NotBinary,
}

/// One RGB frame from a tactile sensor, with capture timestamp and unit id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TactileFrame {
    width: usize,
    height: usize,
    /// Interleaved RGB, `3 * width * height` bytes.
    data: Vec<u8>,
    pub timestamp_ms: u64,
    pub unit: SensorUnit,
}

impl TactileFrame {
    pub fn new(
        width: usize,
        height: usize,
        data: Vec<u8>,
        timestamp_ms: u64,
        unit: SensorUnit,
    ) -> Result<Self, ImageError> {
        let expected = width * height * 3;
        if data.len() != expected {
            return Err(ImageError::BadBufferLength {
                expected,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
            timestamp_ms,
            unit,
        })
    }

    /// Uniform frame, handy for tests and no-contact references.
    pub fn filled(
        width: usize,
        height: usize,
        rgb: [u8; 3],
        timestamp_ms: u64,
        unit: SensorUnit,
    ) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&rgb);
        }
        Self {
            width,
            height,
            data,
            timestamp_ms,
            unit,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn same_dims(&self, other: &TactileFrame) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// 8-bit single-channel image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        if data.len() != width * height {
            return Err(ImageError::BadBufferLength {
                expected: width * height,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }

    pub fn same_dims(&self, other: &GrayImage) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Depth image in millimetres; 0 marks an invalid return.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthImage {
    width: usize,
    height: usize,
    data: Vec<u16>,
}

impl DepthImage {
    pub fn new(width: usize, height: usize, data: Vec<u16>) -> Result<Self, ImageError> {
        if data.len() != width * height {
            return Err(ImageError::BadBufferLength {
                expected: width * height,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u16) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u16] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u16) {
        self.data[y * self.width + x] = value;
    }
}

/// Per-channel [0,1] image produced by input normalisation.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedFrame {
    pub width: usize,
    pub height: usize,
    /// Interleaved RGB, `3 * width * height` values in [0,1].
    pub data: Vec<f32>,
}

/// Shape of the configurable filter kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelShape {
    Square,
    Cross,
}

/// Compact, serialisable description of a structuring element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub shape: KernelShape,
    /// Side length in pixels; must be odd.
    pub size: usize,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self {
            shape: KernelShape::Square,
            size: 5,
        }
    }
}
