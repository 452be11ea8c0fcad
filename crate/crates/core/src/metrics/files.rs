//! CSV interfaces of the metrics module.
//!
//! Detections and ground truths share one layout:
//! `image_id,class,confidence,x,y,w,h[,mask_path]`. The confidence column is
//! ignored for ground truths; when `mask_path` is present and mask mode is
//! requested, the region is read from the referenced PGM (nonzero = object).
//! Episode files carry `environment,class,attempt,success,failure_stage`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::pnm;

use super::{
    BoxRegion, ConfusionCounts, CsrRow, EpisodeOutcome, GroundTruth, MaskRegion, MetricsError,
    RankedDetection, Region,
};

const REGION_HEADER: &str = "image_id,class,confidence,x,y,w,h";

fn parse_region(
    fields: &[&str],
    line: usize,
    base_dir: &Path,
    use_masks: bool,
) -> Result<Region, MetricsError> {
    if use_masks {
        let mask_path =
            fields
                .get(7)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| MetricsError::Parse {
                    line,
                    reason: "mask mode requires a mask_path column".into(),
                })?;
        let img =
            pnm::read_pgm_file(base_dir.join(mask_path)).map_err(|e| MetricsError::Parse {
                line,
                reason: format!("mask `{mask_path}`: {e}"),
            })?;
        Ok(Region::Mask(MaskRegion::from_gray(&img)?))
    } else {
        let mut nums = [0.0f64; 4];
        for (slot, idx) in nums.iter_mut().zip(3..7) {
            let text = fields.get(idx).ok_or_else(|| MetricsError::Parse {
                line,
                reason: "expected x,y,w,h columns".into(),
            })?;
            *slot = text.trim().parse().map_err(|e| MetricsError::Parse {
                line,
                reason: format!("bad number `{text}`: {e}"),
            })?;
        }
        Ok(Region::Box(BoxRegion::new(
            nums[0], nums[1], nums[2], nums[3],
        )?))
    }
}

fn parse_rows(
    text: &str,
    base_dir: &Path,
    use_masks: bool,
) -> Result<Vec<(String, String, f64, Region)>, MetricsError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim().starts_with(REGION_HEADER) => {}
        _ => {
            return Err(MetricsError::Parse {
                line: 1,
                reason: format!("expected header `{REGION_HEADER}[,mask_path]`"),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() < 7 {
            return Err(MetricsError::Parse {
                line,
                reason: "expected at least 7 columns".into(),
            });
        }
        let confidence: f64 = fields[2].trim().parse().unwrap_or(0.0);
        let region = parse_region(&fields, line, base_dir, use_masks)?;
        rows.push((
            fields[0].trim().to_string(),
            fields[1].trim().to_string(),
            confidence,
            region,
        ));
    }
    Ok(rows)
}

pub fn read_detections<P: AsRef<Path>>(
    path: P,
    use_masks: bool,
) -> Result<Vec<RankedDetection>, MetricsError> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let rows = parse_rows(&fs::read_to_string(path)?, base, use_masks)?;
    Ok(rows
        .into_iter()
        .map(|(image_id, class, confidence, region)| RankedDetection {
            image_id,
            class,
            confidence,
            region,
        })
        .collect())
}

pub fn read_ground_truths<P: AsRef<Path>>(
    path: P,
    use_masks: bool,
) -> Result<Vec<GroundTruth>, MetricsError> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let rows = parse_rows(&fs::read_to_string(path)?, base, use_masks)?;
    Ok(rows
        .into_iter()
        .map(|(image_id, class, _confidence, region)| GroundTruth {
            image_id,
            class,
            region,
        })
        .collect())
}

pub fn read_episodes<P: AsRef<Path>>(path: P) -> Result<Vec<EpisodeOutcome>, MetricsError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "environment,class,attempt,success,failure_stage" => {
        }
        _ => {
            return Err(MetricsError::Parse {
                line: 1,
                reason: "expected header `environment,class,attempt,success,failure_stage`".into(),
            })
        }
    }
    let mut episodes = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 5 {
            return Err(MetricsError::Parse {
                line,
                reason: "expected 5 columns".into(),
            });
        }
        let parse_err = |reason: String| MetricsError::Parse { line, reason };
        let environment = fields[0].trim().parse().map_err(parse_err)?;
        let class = fields[1].trim().parse().map_err(parse_err)?;
        let attempt: u32 = fields[2]
            .trim()
            .parse()
            .map_err(|e| parse_err(format!("bad attempt: {e}")))?;
        let success = match fields[3].trim() {
            "1" | "true" => true,
            "0" | "false" => false,
            other => return Err(parse_err(format!("bad success flag `{other}`"))),
        };
        let stage = fields[4].trim().parse().map_err(parse_err)?;
        episodes.push(
            EpisodeOutcome::new(environment, class, attempt, success, stage).map_err(|e| {
                MetricsError::Parse {
                    line,
                    reason: e.to_string(),
                }
            })?,
        );
    }
    Ok(episodes)
}

/// Writes the per-(class, threshold) AP report plus overall rows.
pub fn write_ap_report<W: Write>(
    w: &mut W,
    rows: &[(String, f64, f64)],
) -> Result<(), MetricsError> {
    writeln!(w, "class,iou_threshold,ap")?;
    for (class, threshold, ap) in rows {
        writeln!(w, "{class},{threshold},{ap:.6}")?;
    }
    Ok(())
}

/// Writes a CSR table; rates are printed at two decimals, the table layout
/// of the collection reports.
pub fn write_csr_table<W: Write>(
    w: &mut W,
    group_label: &str,
    rows: &[CsrRow],
) -> Result<(), MetricsError> {
    writeln!(w, "{group_label},successes,attempts,rate")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{:.2}",
            row.group, row.successes, row.attempts, row.rate
        )?;
    }
    Ok(())
}

/// Labeled score file: `image_id,score,label` with label in {0,1}. Thresholds
/// the scores and tallies the confusion counts.
pub fn read_labeled_scores<P: AsRef<Path>>(
    path: P,
    threshold: f64,
) -> Result<ConfusionCounts, MetricsError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "image_id,score,label" => {}
        _ => {
            return Err(MetricsError::Parse {
                line: 1,
                reason: "expected header `image_id,score,label`".into(),
            })
        }
    }
    let mut counts = ConfusionCounts::default();
    for (idx, raw) in lines {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 3 {
            return Err(MetricsError::Parse {
                line,
                reason: "expected 3 columns".into(),
            });
        }
        let score: f64 = fields[1].trim().parse().map_err(|e| MetricsError::Parse {
            line,
            reason: format!("bad score: {e}"),
        })?;
        let label = match fields[2].trim() {
            "1" => true,
            "0" => false,
            other => {
                return Err(MetricsError::Parse {
                    line,
                    reason: format!("bad label `{other}`"),
                })
            }
        };
        let predicted = score >= threshold;
        match (label, predicted) {
            (true, true) => counts.true_pos += 1,
            (false, false) => counts.true_neg += 1,
            (false, true) => counts.false_pos += 1,
            (true, false) => counts.false_neg += 1,
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{accuracy, average_precision};

    #[test]
    fn detection_csv_round_trip_through_ap() {
        let dir = std::env::temp_dir().join("vtgrasp_metrics_csv_test");
        fs::create_dir_all(&dir).unwrap();
        let pred = dir.join("pred.csv");
        let gt = dir.join("gt.csv");
        fs::write(
            &gt,
            "image_id,class,confidence,x,y,w,h\n\
             i1,plastic,0,0,0,4,4\n\
             i2,plastic,0,0,0,4,4\n",
        )
        .unwrap();
        fs::write(
            &pred,
            "image_id,class,confidence,x,y,w,h\n\
             i1,plastic,0.9,0,0,4,4\n\
             i3,plastic,0.8,0,0,4,4\n\
             i2,plastic,0.7,0,0,4,4\n",
        )
        .unwrap();
        let dets = read_detections(&pred, false).unwrap();
        let gts = read_ground_truths(&gt, false).unwrap();
        let ap = average_precision(&dets, &gts, 0.5).unwrap();
        assert!((ap - 5.0 / 6.0).abs() < 1e-12);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn malformed_detection_rows_are_reported_with_line_numbers() {
        let dir = std::env::temp_dir().join("vtgrasp_metrics_badcsv_test");
        fs::create_dir_all(&dir).unwrap();
        let pred = dir.join("pred.csv");
        fs::write(
            &pred,
            "image_id,class,confidence,x,y,w,h\ni1,plastic,0.9,0,0\n",
        )
        .unwrap();
        match read_detections(&pred, false) {
            Err(MetricsError::Parse { line: 2, .. }) => {}
            other => panic!("expected parse error on line 2, got {other:?}"),
        }
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn labeled_scores_produce_confusion_counts() {
        let dir = std::env::temp_dir().join("vtgrasp_metrics_scores_test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("scores.csv");
        fs::write(
            &path,
            "image_id,score,label\na,0.9,1\nb,0.4,0\nc,0.6,0\nd,0.2,1\n",
        )
        .unwrap();
        let counts = read_labeled_scores(&path, 0.5).unwrap();
        assert_eq!(
            counts,
            ConfusionCounts {
                true_pos: 1,
                true_neg: 1,
                false_pos: 1,
                false_neg: 1,
            }
        );
        assert_eq!(accuracy(&counts).unwrap(), 0.5);
        fs::remove_dir_all(&dir).ok();
    }
}
