//! Detection and collection metrics: IoU, interpolated average precision,
//! accuracy, confusion matrices and collection-success-rate tables.

pub mod files;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::common::ObjectClass;
use crate::image::GrayImage;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("IoU operands must share a representation (both boxes or both masks)")]
    MixedRegionKinds,
    #[error("box sides must be positive")]
    EmptyBox,
    #[error("masks must contain at least one pixel")]
    EmptyMask,
    #[error("average precision is undefined without ground truths")]
    NoGroundTruths,
    #[error("accuracy is undefined for all-zero counts")]
    EmptyCounts,
    #[error("label `{0}` is not in the class set")]
    UnknownLabel(String),
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Axis-aligned box in pixels; `w` and `h` must be positive. Areas are
/// continuous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxRegion {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoxRegion {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self, MetricsError> {
        if w <= 0.0 || h <= 0.0 {
            return Err(MetricsError::EmptyBox);
        }
        Ok(Self { x, y, w, h })
    }

    // Area and intersection are both computed from edge differences so that
    // identical boxes produce bit-identical areas and IoU exactly 1.
    fn area(&self) -> f64 {
        ((self.x + self.w) - self.x) * ((self.y + self.h) - self.y)
    }

    fn intersection_area(&self, other: &BoxRegion) -> f64 {
        let ix = (self.x + self.w).min(other.x + other.w) - self.x.max(other.x);
        let iy = (self.y + self.h).min(other.y + other.h) - self.y.max(other.y);
        if ix <= 0.0 || iy <= 0.0 {
            0.0
        } else {
            ix * iy
        }
    }
}

/// Binary pixel mask; IoU on masks counts pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskRegion {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl MaskRegion {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, MetricsError> {
        if bits.len() != width * height || !bits.iter().any(|&b| b) {
            return Err(MetricsError::EmptyMask);
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Nonzero pixels of a grayscale image become mask pixels.
    pub fn from_gray(img: &GrayImage) -> Result<Self, MetricsError> {
        Self::new(
            img.width(),
            img.height(),
            img.data().iter().map(|&v| v != 0).collect(),
        )
    }

    fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    fn intersection_count(&self, other: &MaskRegion) -> usize {
        // Masks may come from different image sizes; overlap the common area.
        let w = self.width.min(other.width);
        let h = self.height.min(other.height);
        let mut count = 0;
        for y in 0..h {
            for x in 0..w {
                if self.bits[y * self.width + x] && other.bits[y * other.width + x] {
                    count += 1;
                }
            }
        }
        count
    }
}

/// Either representation of a detection region.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Box(BoxRegion),
    Mask(MaskRegion),
}

/// Intersection-over-union of two regions of the same kind.
pub fn iou(a: &Region, b: &Region) -> Result<f64, MetricsError> {
    match (a, b) {
        (Region::Box(a), Region::Box(b)) => {
            let inter = a.intersection_area(b);
            let union = a.area() + b.area() - inter;
            Ok(inter / union)
        }
        (Region::Mask(a), Region::Mask(b)) => {
            let inter = a.intersection_count(b);
            let union = a.count() + b.count() - inter;
            Ok(inter as f64 / union as f64)
        }
        _ => Err(MetricsError::MixedRegionKinds),
    }
}

/// One scored detection.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedDetection {
    pub image_id: String,
    pub class: String,
    pub confidence: f64,
    pub region: Region,
}

/// One annotated ground-truth region.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub image_id: String,
    pub class: String,
    pub region: Region,
}

/// Interpolated average precision at one IoU threshold.
///
/// Detections are ranked by confidence (ties keep input order) and matched
/// greedily: each detection takes the highest-IoU unmatched ground truth of
/// its image with IoU at or above the threshold. The PR curve is summed as
/// recall increments weighted by the right-continuous precision envelope.
pub fn average_precision(
    detections: &[RankedDetection],
    ground_truths: &[GroundTruth],
    iou_threshold: f64,
) -> Result<f64, MetricsError> {
    if ground_truths.is_empty() {
        return Err(MetricsError::NoGroundTruths);
    }
    let hits = match_detections(detections, ground_truths, iou_threshold)?;

    // Cumulative PR points in rank order.
    let total_gt = ground_truths.len() as f64;
    let mut tp = 0usize;
    let mut recalls = Vec::with_capacity(hits.len());
    let mut precisions = Vec::with_capacity(hits.len());
    for (rank, &hit) in hits.iter().enumerate() {
        if hit {
            tp += 1;
        }
        recalls.push(tp as f64 / total_gt);
        precisions.push(tp as f64 / (rank + 1) as f64);
    }

    // Right-continuous precision envelope, built once by a reverse cumulative
    // maximum, then summed over recall increments.
    let mut envelope = precisions.clone();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for i in 0..recalls.len() {
        if recalls[i] > prev_recall {
            ap += (recalls[i] - prev_recall) * envelope[i];
            prev_recall = recalls[i];
        }
    }
    Ok(ap)
}

/// Greedy matching; returns per-detection TP flags in rank order.
fn match_detections(
    detections: &[RankedDetection],
    ground_truths: &[GroundTruth],
    iou_threshold: f64,
) -> Result<Vec<bool>, MetricsError> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| {
        detections[b]
            .confidence
            .partial_cmp(&detections[a].confidence)
            .expect("finite confidences")
    });

    let mut gt_by_image: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, gt) in ground_truths.iter().enumerate() {
        gt_by_image.entry(gt.image_id.as_str()).or_default().push(i);
    }
    let mut matched = vec![false; ground_truths.len()];
    let mut hits = Vec::with_capacity(detections.len());
    for &det_idx in &order {
        let det = &detections[det_idx];
        let mut best: Option<(f64, usize)> = None;
        if let Some(candidates) = gt_by_image.get(det.image_id.as_str()) {
            for &gt_idx in candidates {
                if matched[gt_idx] || ground_truths[gt_idx].class != det.class {
                    continue;
                }
                let overlap = iou(&det.region, &ground_truths[gt_idx].region)?;
                if overlap >= iou_threshold && best.is_none_or(|(b, _)| overlap > b) {
                    best = Some((overlap, gt_idx));
                }
            }
        }
        match best {
            Some((_, gt_idx)) => {
                matched[gt_idx] = true;
                hits.push(true);
            }
            None => hits.push(false),
        }
    }
    Ok(hits)
}

/// Binary confusion tallies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub true_neg: u64,
    pub false_pos: u64,
    pub false_neg: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_pos + self.true_neg + self.false_pos + self.false_neg
    }
}

/// `(TP + TN) / (TP + TN + FP + FN)`.
pub fn accuracy(c: &ConfusionCounts) -> Result<f64, MetricsError> {
    let total = c.total();
    if total == 0 {
        return Err(MetricsError::EmptyCounts);
    }
    Ok((c.true_pos + c.true_neg) as f64 / total as f64)
}

/// Multi-class confusion matrix; rows are true labels, columns predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn get(&self, true_class: &str, predicted: &str) -> Option<u64> {
        let i = self.classes.iter().position(|c| c == true_class)?;
        let j = self.classes.iter().position(|c| c == predicted)?;
        Some(self.counts[i][j])
    }

    pub fn row_sum(&self, true_class: &str) -> Option<u64> {
        let i = self.classes.iter().position(|c| c == true_class)?;
        Some(self.counts[i].iter().sum())
    }

    pub fn is_diagonal(&self) -> bool {
        self.counts
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, &v)| i == j || v == 0))
    }
}

/// Counts (true, predicted) label pairs over a fixed class set.
pub fn confusion_matrix(
    pairs: &[(String, String)],
    classes: &[String],
) -> Result<ConfusionMatrix, MetricsError> {
    let index: HashMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let mut counts = vec![vec![0u64; classes.len()]; classes.len()];
    for (truth, predicted) in pairs {
        let i = *index
            .get(truth.as_str())
            .ok_or_else(|| MetricsError::UnknownLabel(truth.clone()))?;
        let j = *index
            .get(predicted.as_str())
            .ok_or_else(|| MetricsError::UnknownLabel(predicted.clone()))?;
        counts[i][j] += 1;
    }
    Ok(ConfusionMatrix {
        classes: classes.to_vec(),
        counts,
    })
}

/// Test environments of the outdoor collection runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Environment {
    Tiled,
    StoneSoil,
    Grass,
}

impl Environment {
    pub const ALL: [Environment; 3] = [
        Environment::Tiled,
        Environment::StoneSoil,
        Environment::Grass,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Environment::Tiled => "tiled",
            Environment::StoneSoil => "stone_soil",
            Environment::Grass => "grass",
        }
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Environment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tiled" => Ok(Environment::Tiled),
            "stone_soil" => Ok(Environment::StoneSoil),
            "grass" => Ok(Environment::Grass),
            other => Err(format!("unknown environment `{other}`")),
        }
    }
}

/// Which pipeline stage caused a failed pickup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureStage {
    None,
    RgbdReconstruction,
    ContactDetection,
    GraspPoints,
    Detection,
}

impl FailureStage {
    pub const MODULES: [FailureStage; 4] = [
        FailureStage::RgbdReconstruction,
        FailureStage::ContactDetection,
        FailureStage::GraspPoints,
        FailureStage::Detection,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FailureStage::None => "none",
            FailureStage::RgbdReconstruction => "rgbd_reconstruction",
            FailureStage::ContactDetection => "contact_detection",
            FailureStage::GraspPoints => "grasp_points",
            FailureStage::Detection => "detection",
        }
    }
}

impl fmt::Display for FailureStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FailureStage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(FailureStage::None),
            "rgbd_reconstruction" => Ok(FailureStage::RgbdReconstruction),
            "contact_detection" => Ok(FailureStage::ContactDetection),
            "grasp_points" => Ok(FailureStage::GraspPoints),
            "detection" => Ok(FailureStage::Detection),
            other => Err(format!("unknown failure stage `{other}`")),
        }
    }
}

/// One pickup attempt record.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutcome {
    pub environment: Environment,
    pub class: ObjectClass,
    pub attempt: u32,
    pub success: bool,
    pub failure_stage: FailureStage,
}

impl EpisodeOutcome {
    pub fn new(
        environment: Environment,
        class: ObjectClass,
        attempt: u32,
        success: bool,
        failure_stage: FailureStage,
    ) -> Result<Self, MetricsError> {
        if success != (failure_stage == FailureStage::None) {
            return Err(MetricsError::Parse {
                line: 0,
                reason: "failure_stage must be none exactly when the episode succeeded".into(),
            });
        }
        Ok(Self {
            environment,
            class,
            attempt,
            success,
            failure_stage,
        })
    }
}

/// Grouping key for collection-success-rate tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsrGroupBy {
    Environment,
    Class,
    /// Per-module rate: successes are all episodes that did not fail in that
    /// module.
    Module,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrRow {
    pub group: String,
    pub successes: u64,
    pub attempts: u64,
    pub rate: f64,
}

/// Collection success rate per group. Groups with no episodes are omitted;
/// rows follow a fixed group order so output is deterministic.
pub fn csr(outcomes: &[EpisodeOutcome], group_by: CsrGroupBy) -> Vec<CsrRow> {
    let mut rows = Vec::new();
    match group_by {
        CsrGroupBy::Environment => {
            for env in Environment::ALL {
                let slice: Vec<_> = outcomes.iter().filter(|o| o.environment == env).collect();
                if let Some(row) = rate_row(env.to_string(), &slice) {
                    rows.push(row);
                }
            }
        }
        CsrGroupBy::Class => {
            for class in ObjectClass::ALL {
                let slice: Vec<_> = outcomes.iter().filter(|o| o.class == class).collect();
                if let Some(row) = rate_row(class.to_string(), &slice) {
                    rows.push(row);
                }
            }
        }
        CsrGroupBy::Module => {
            if outcomes.is_empty() {
                return rows;
            }
            let attempts = outcomes.len() as u64;
            for stage in FailureStage::MODULES {
                let failures = outcomes.iter().filter(|o| o.failure_stage == stage).count() as u64;
                rows.push(CsrRow {
                    group: stage.to_string(),
                    successes: attempts - failures,
                    attempts,
                    rate: (attempts - failures) as f64 / attempts as f64,
                });
            }
        }
    }
    rows
}

fn rate_row(group: String, outcomes: &[&EpisodeOutcome]) -> Option<CsrRow> {
    if outcomes.is_empty() {
        return None;
    }
    let attempts = outcomes.len() as u64;
    let successes = outcomes.iter().filter(|o| o.success).count() as u64;
    Some(CsrRow {
        group,
        successes,
        attempts,
        rate: successes as f64 / attempts as f64,
    })
}

/// Success rate over first attempts only; `None` when there are none.
pub fn first_attempt_rate(outcomes: &[EpisodeOutcome]) -> Option<f64> {
    let firsts: Vec<_> = outcomes.iter().filter(|o| o.attempt == 1).collect();
    if firsts.is_empty() {
        return None;
    }
    let successes = firsts.iter().filter(|o| o.success).count();
    Some(successes as f64 / firsts.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boxed(x: f64, y: f64, w: f64, h: f64) -> Region {
        Region::Box(BoxRegion::new(x, y, w, h).unwrap())
    }

    #[test]
    fn iou_of_identical_and_disjoint_boxes() {
        let a = boxed(0.0, 0.0, 4.0, 4.0);
        assert_eq!(iou(&a, &a).unwrap(), 1.0);
        let b = boxed(10.0, 10.0, 4.0, 4.0);
        assert_eq!(iou(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn iou_partial_overlap_is_exact() {
        let a = boxed(0.0, 0.0, 2.0, 2.0);
        let b = boxed(1.0, 0.0, 2.0, 2.0);
        // intersection 2, union 6
        assert!((iou(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn iou_rejects_mixed_kinds() {
        let a = boxed(0.0, 0.0, 2.0, 2.0);
        let m = Region::Mask(MaskRegion::new(2, 2, vec![true, false, false, true]).unwrap());
        assert!(matches!(iou(&a, &m), Err(MetricsError::MixedRegionKinds)));
    }

    #[test]
    fn mask_iou_counts_pixels() {
        let a = Region::Mask(MaskRegion::new(2, 2, vec![true, true, false, false]).unwrap());
        let b = Region::Mask(MaskRegion::new(2, 2, vec![true, false, true, false]).unwrap());
        // intersection 1, union 3
        assert!((iou(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    fn det(image: &str, confidence: f64, region: Region) -> RankedDetection {
        RankedDetection {
            image_id: image.into(),
            class: "plastic".into(),
            confidence,
            region,
        }
    }

    fn gt(image: &str, region: Region) -> GroundTruth {
        GroundTruth {
            image_id: image.into(),
            class: "plastic".into(),
            region,
        }
    }

    #[test]
    fn perfect_detector_scores_one() {
        let gts = vec![
            gt("i1", boxed(0.0, 0.0, 4.0, 4.0)),
            gt("i2", boxed(0.0, 0.0, 4.0, 4.0)),
        ];
        let dets = vec![
            det("i1", 0.9, boxed(0.0, 0.0, 4.0, 4.0)),
            det("i2", 0.8, boxed(0.0, 0.0, 4.0, 4.0)),
        ];
        assert_eq!(average_precision(&dets, &gts, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn no_matching_detections_scores_zero() {
        let gts = vec![gt("i1", boxed(0.0, 0.0, 4.0, 4.0))];
        let dets = vec![det("i1", 0.9, boxed(40.0, 40.0, 4.0, 4.0))];
        assert_eq!(average_precision(&dets, &gts, 0.5).unwrap(), 0.0);
        assert_eq!(average_precision(&[], &gts, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn ranked_tp_fp_tp_fixture_gives_five_sixths() {
        let gts = vec![
            gt("i1", boxed(0.0, 0.0, 4.0, 4.0)),
            gt("i2", boxed(0.0, 0.0, 4.0, 4.0)),
        ];
        let dets = vec![
            det("i1", 0.9, boxed(0.0, 0.0, 4.0, 4.0)), // TP
            det("i3", 0.8, boxed(0.0, 0.0, 4.0, 4.0)), // FP (no gt in image)
            det("i2", 0.7, boxed(0.0, 0.0, 4.0, 4.0)), // TP
        ];
        let ap = average_precision(&dets, &gts, 0.5).unwrap();
        assert!((ap - 5.0 / 6.0).abs() < 1e-12, "ap {ap}");
    }

    #[test]
    fn ap_requires_ground_truths() {
        let dets = vec![det("i1", 0.9, boxed(0.0, 0.0, 4.0, 4.0))];
        assert!(matches!(
            average_precision(&dets, &[], 0.5),
            Err(MetricsError::NoGroundTruths)
        ));
    }

    #[test]
    fn duplicate_detections_of_one_gt_count_once() {
        let gts = vec![gt("i1", boxed(0.0, 0.0, 4.0, 4.0))];
        let dets = vec![
            det("i1", 0.9, boxed(0.0, 0.0, 4.0, 4.0)),
            det("i1", 0.8, boxed(0.1, 0.0, 4.0, 4.0)),
        ];
        // Second detection is an FP; AP = 1.0 (full recall at precision 1).
        assert_eq!(average_precision(&dets, &gts, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_endpoints_and_errors() {
        let perfect = ConfusionCounts {
            true_pos: 5,
            true_neg: 5,
            ..Default::default()
        };
        assert_eq!(accuracy(&perfect).unwrap(), 1.0);
        let wrong = ConfusionCounts {
            false_pos: 1,
            false_neg: 1,
            ..Default::default()
        };
        assert_eq!(accuracy(&wrong).unwrap(), 0.0);
        assert!(matches!(
            accuracy(&ConfusionCounts::default()),
            Err(MetricsError::EmptyCounts)
        ));
    }

    #[test]
    fn accuracy_is_invariant_under_class_swap() {
        let c = ConfusionCounts {
            true_pos: 7,
            true_neg: 3,
            false_pos: 2,
            false_neg: 5,
        };
        let swapped = ConfusionCounts {
            true_pos: c.true_neg,
            true_neg: c.true_pos,
            false_pos: c.false_neg,
            false_neg: c.false_pos,
        };
        assert_eq!(accuracy(&c).unwrap(), accuracy(&swapped).unwrap());
    }

    fn class_names() -> Vec<String> {
        ObjectClass::ALL.iter().map(|c| c.to_string()).collect()
    }

    #[test]
    fn all_correct_pairs_build_a_diagonal_matrix() {
        let pairs: Vec<_> = class_names().into_iter().map(|c| (c.clone(), c)).collect();
        let m = confusion_matrix(&pairs, &class_names()).unwrap();
        assert!(m.is_diagonal());
        assert_eq!(m.row_sum("plastic"), Some(1));
    }

    #[test]
    fn single_confusion_is_off_diagonal() {
        let pairs = vec![("plastic".to_string(), "glass".to_string())];
        let m = confusion_matrix(&pairs, &class_names()).unwrap();
        assert_eq!(m.get("plastic", "glass"), Some(1));
        assert_eq!(m.get("plastic", "plastic"), Some(0));
        assert!(!m.is_diagonal());
    }

    #[test]
    fn confusion_matrix_is_order_invariant() {
        let mut pairs = vec![
            ("plastic".to_string(), "glass".to_string()),
            ("metal".to_string(), "metal".to_string()),
            ("glass".to_string(), "glass".to_string()),
            ("plastic".to_string(), "plastic".to_string()),
        ];
        let m1 = confusion_matrix(&pairs, &class_names()).unwrap();
        pairs.reverse();
        let m2 = confusion_matrix(&pairs, &class_names()).unwrap();
        assert_eq!(m1, m2);
    }

    #[test]
    fn unknown_labels_are_rejected() {
        let pairs = vec![("wood".to_string(), "plastic".to_string())];
        assert!(matches!(
            confusion_matrix(&pairs, &class_names()),
            Err(MetricsError::UnknownLabel(_))
        ));
    }

    pub(crate) fn episode(
        environment: Environment,
        class: ObjectClass,
        attempt: u32,
        success: bool,
        stage: FailureStage,
    ) -> EpisodeOutcome {
        EpisodeOutcome::new(environment, class, attempt, success, stage).unwrap()
    }

    #[test]
    fn csr_first_attempt_rate_matches_tallies() {
        let mut outcomes = Vec::new();
        for i in 0..60 {
            outcomes.push(episode(
                Environment::Tiled,
                ObjectClass::Plastic,
                1,
                i < 48,
                if i < 48 {
                    FailureStage::None
                } else {
                    FailureStage::GraspPoints
                },
            ));
        }
        assert_eq!(first_attempt_rate(&outcomes), Some(0.8));
    }

    #[test]
    fn csr_group_slices() {
        let mut outcomes = Vec::new();
        for i in 0..20 {
            outcomes.push(episode(
                Environment::Grass,
                ObjectClass::Metal,
                1,
                i < 17,
                if i < 17 {
                    FailureStage::None
                } else {
                    FailureStage::ContactDetection
                },
            ));
        }
        for i in 0..15 {
            outcomes.push(episode(
                Environment::Tiled,
                ObjectClass::Glass,
                1,
                i < 9,
                if i < 9 {
                    FailureStage::None
                } else {
                    FailureStage::Detection
                },
            ));
        }
        let by_env = csr(&outcomes, CsrGroupBy::Environment);
        let grass = by_env.iter().find(|r| r.group == "grass").unwrap();
        assert_eq!((grass.successes, grass.attempts), (17, 20));
        assert_eq!(grass.rate, 0.85);
        // stone_soil has no episodes and is omitted.
        assert!(by_env.iter().all(|r| r.group != "stone_soil"));

        let by_class = csr(&outcomes, CsrGroupBy::Class);
        let glass = by_class.iter().find(|r| r.group == "glass").unwrap();
        assert_eq!((glass.successes, glass.attempts), (9, 15));
        assert_eq!(glass.rate, 0.6);

        let by_module = csr(&outcomes, CsrGroupBy::Module);
        let detection = by_module.iter().find(|r| r.group == "detection").unwrap();
        assert_eq!(detection.attempts, 35);
        assert_eq!(detection.successes, 29);
    }

    #[test]
    fn csr_rates_stay_in_unit_interval() {
        let outcomes = vec![
            episode(
                Environment::Tiled,
                ObjectClass::Plastic,
                1,
                true,
                FailureStage::None,
            ),
            episode(
                Environment::Tiled,
                ObjectClass::Plastic,
                2,
                false,
                FailureStage::Detection,
            ),
        ];
        for group_by in [
            CsrGroupBy::Environment,
            CsrGroupBy::Class,
            CsrGroupBy::Module,
        ] {
            for row in csr(&outcomes, group_by) {
                assert!((0.0..=1.0).contains(&row.rate));
            }
        }
    }

    #[test]
    fn outcome_stage_consistency_is_enforced() {
        assert!(EpisodeOutcome::new(
            Environment::Tiled,
            ObjectClass::Plastic,
            1,
            true,
            FailureStage::Detection
        )
        .is_err());
        assert!(EpisodeOutcome::new(
            Environment::Tiled,
            ObjectClass::Plastic,
            1,
            false,
            FailureStage::None
        )
        .is_err());
    }
}
