//! Building blocks for a visual-tactile grasping pipeline.
//!
//! The crate is organised around the stages of a pick-and-place run:
//!
//! - [`image`] / [`pnm`]: raster types for tactile RGB frames, grayscale and
//!   depth images, plus binary PGM/PPM codecs.
//! - [`tactile`] / [`morphology`]: the frame-difference filter that distils a
//!   4-frame tactile window into a binary slip-evidence image and its
//!   brightness statistic.
//! - [`classifiers`]: threshold-based contact and slip classifiers with
//!   pluggable score providers standing in for trained models.
//! - [`controller`]: closed-loop grasp, release and slip-compensation state
//!   machines driving a stepwise two-finger gripper.
//! - [`geometry`]: depth-pixel deprojection, camera-to-base transforms,
//!   mask-guided cloud segmentation and antipodal grasp-point estimation.
//! - [`metrics`]: IoU, interpolated average precision, accuracy, confusion
//!   matrices and collection-success-rate tables.

pub mod classifiers;
pub mod common;
pub mod controller;
pub mod geometry;
pub mod image;
pub mod metrics;
pub mod morphology;
pub mod pnm;
pub mod tactile;
