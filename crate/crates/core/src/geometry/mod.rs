//! Grasp geometry: pixel deprojection, camera-to-base transforms, masked
//! cloud segmentation, grasp-point estimation and the workspace check.
//!
//! Units follow the sensor conventions: depth pixels carry millimetres, 3D
//! points are metres. The millimetre-to-metre conversion happens once, at the
//! deprojection boundary.

pub mod grasp;
pub mod linalg;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::common::ObjectClass;
use crate::image::{DepthImage, GrayImage};

pub use grasp::{compute_grasp, GraspCandidate, DEFAULT_MAX_OPENING_MM, MIN_CLOUD_POINTS};
pub use linalg::{Iso3, Mat3, Vec3};

/// Residual allowed when validating rotation blocks.
pub const RIGIDITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid camera intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("depth value must be positive (0 marks an invalid return)")]
    InvalidDepth,
    #[error("pixel ({x}, {y}) lies outside the {width}x{height} image")]
    PixelOutOfBounds {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },
    #[error("rotation block is not a proper rotation (residual {residual:.3e})")]
    NonRigid { residual: f64 },
    #[error("homogeneous transform must end with row [0 0 0 1]")]
    BadHomogeneousRow,
    #[error("mask and depth dimensions differ")]
    MaskDepthMismatch,
    #[error("segmentation produced an empty cloud")]
    EmptyCloud,
    #[error("grasp estimation needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("cloud moments are rank-deficient; no grasp plane")]
    DegenerateGeometry,
    #[error("object is too wide to grasp: needs {required_mm:.1} mm, max {max_mm:.1} mm")]
    ObjectTooWide { required_mm: f64, max_mm: f64 },
    #[error("malformed XYZ row at line {line}")]
    BadXyzRow { line: usize },
}

/// Pinhole camera intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: usize,
        height: usize,
    ) -> Result<Self, GeometryError> {
        if fx <= 0.0 || fy <= 0.0 {
            return Err(GeometryError::InvalidIntrinsics(
                "focal lengths must be positive".into(),
            ));
        }
        if cx < 0.0 || cx >= width as f64 || cy < 0.0 || cy >= height as f64 {
            return Err(GeometryError::InvalidIntrinsics(
                "principal point must lie inside the image".into(),
            ));
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }
}

/// A depth pixel: image coordinates plus depth in millimetres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelDepth {
    pub x: f64,
    pub y: f64,
    pub depth_mm: f64,
}

/// Point in the camera frame, metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPoint(pub Vec3);

/// Point in the robot-base frame, metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasePoint(pub Vec3);

/// End-effector pose from forward kinematics: orientation and position of
/// the flange in the base frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndEffectorPose {
    iso: Iso3,
}

impl EndEffectorPose {
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self, GeometryError> {
        check_rotation(&rotation)?;
        Ok(Self {
            iso: Iso3::new(rotation, translation),
        })
    }

    pub fn identity() -> Self {
        Self {
            iso: Iso3::IDENTITY,
        }
    }

    pub fn iso(&self) -> Iso3 {
        self.iso
    }
}

/// Fixed rigid transform from the camera frame to the end-effector frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandEyeTransform {
    iso: Iso3,
}

impl HandEyeTransform {
    /// Builds from a row-major 4x4 homogeneous matrix.
    pub fn from_matrix(rows: &[[f64; 4]; 4]) -> Result<Self, GeometryError> {
        let bottom = rows[3];
        if bottom != [0.0, 0.0, 0.0, 1.0] {
            return Err(GeometryError::BadHomogeneousRow);
        }
        let rotation = Mat3::from_rows(
            [rows[0][0], rows[0][1], rows[0][2]],
            [rows[1][0], rows[1][1], rows[1][2]],
            [rows[2][0], rows[2][1], rows[2][2]],
        );
        check_rotation(&rotation)?;
        let translation = Vec3::new(rows[0][3], rows[1][3], rows[2][3]);
        Ok(Self {
            iso: Iso3::new(rotation, translation),
        })
    }

    pub fn identity() -> Self {
        Self {
            iso: Iso3::IDENTITY,
        }
    }

    pub fn iso(&self) -> Iso3 {
        self.iso
    }

    /// Row-major 4x4 matrix form, the calibration-file layout.
    pub fn to_matrix(&self) -> [[f64; 4]; 4] {
        let r = self.iso.rotation.m;
        let t = self.iso.translation;
        [
            [r[0][0], r[0][1], r[0][2], t.x],
            [r[1][0], r[1][1], r[1][2], t.y],
            [r[2][0], r[2][1], r[2][2], t.z],
            [0.0, 0.0, 0.0, 1.0],
        ]
    }
}

fn check_rotation(r: &Mat3) -> Result<(), GeometryError> {
    let residual = r.orthonormal_residual();
    if residual > RIGIDITY_TOLERANCE {
        return Err(GeometryError::NonRigid { residual });
    }
    let det_residual = (r.det() - 1.0).abs();
    if det_residual > RIGIDITY_TOLERANCE {
        return Err(GeometryError::NonRigid {
            residual: det_residual,
        });
    }
    Ok(())
}

/// Axis permutation applied after back-projection so the depth axis maps to
/// the camera-frame x axis: rows [0 0 1], [1 0 0], [0 1 0].
const DEPTH_PERMUTATION: Mat3 = Mat3 {
    m: [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
};

/// Back-projects one depth pixel into the camera frame.
///
/// The pixel ray is scaled by the depth, permuted so depth lands on x, and
/// converted from millimetres to metres.
pub fn deproject(p: &PixelDepth, k: &CameraIntrinsics) -> Result<CameraPoint, GeometryError> {
    if p.depth_mm <= 0.0 {
        return Err(GeometryError::InvalidDepth);
    }
    if p.x < 0.0 || p.y < 0.0 || p.x >= k.width as f64 || p.y >= k.height as f64 {
        return Err(GeometryError::PixelOutOfBounds {
            x: p.x,
            y: p.y,
            width: k.width,
            height: k.height,
        });
    }
    let ray = Vec3::new(
        (p.x - k.cx) / k.fx * p.depth_mm,
        (p.y - k.cy) / k.fy * p.depth_mm,
        p.depth_mm,
    );
    let mm = DEPTH_PERMUTATION.mul_vec(ray);
    Ok(CameraPoint(mm.scale(1e-3)))
}

/// Inverse of [`deproject`]: recovers the pixel coordinates and depth of a
/// camera-frame point.
pub fn project(c: &CameraPoint, k: &CameraIntrinsics) -> Result<PixelDepth, GeometryError> {
    let mm = c.0.scale(1e3);
    let ray = DEPTH_PERMUTATION.transpose().mul_vec(mm);
    if ray.z <= 0.0 {
        return Err(GeometryError::InvalidDepth);
    }
    Ok(PixelDepth {
        x: ray.x / ray.z * k.fx + k.cx,
        y: ray.y / ray.z * k.fy + k.cy,
        depth_mm: ray.z,
    })
}

/// Chains the camera point through the hand-eye transform and the
/// end-effector pose into the base frame.
pub fn camera_to_base(
    c: &CameraPoint,
    ee: &EndEffectorPose,
    hand_eye: &HandEyeTransform,
) -> BasePoint {
    BasePoint(ee.iso().compose(hand_eye.iso()).apply(c.0))
}

/// Point cloud of one detected object, in the camera frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedCloud {
    pub points: Vec<CameraPoint>,
    pub class_label: ObjectClass,
    pub mask_id: String,
}

impl SegmentedCloud {
    pub fn to_base(&self, ee: &EndEffectorPose, hand_eye: &HandEyeTransform) -> Vec<BasePoint> {
        let chain = ee.iso().compose(hand_eye.iso());
        self.points
            .iter()
            .map(|p| BasePoint(chain.apply(p.0)))
            .collect()
    }
}

/// Deprojects every masked pixel with a valid depth return. Pixels with
/// depth 0 are dropped; an all-invalid mask is an error.
pub fn segment_cloud(
    mask: &GrayImage,
    depth: &DepthImage,
    k: &CameraIntrinsics,
    class_label: ObjectClass,
    mask_id: impl Into<String>,
) -> Result<SegmentedCloud, GeometryError> {
    if mask.width() != depth.width() || mask.height() != depth.height() {
        return Err(GeometryError::MaskDepthMismatch);
    }
    let mut points = Vec::new();
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) == 0 {
                continue;
            }
            let d = depth.get(x, y);
            if d == 0 {
                continue;
            }
            let pixel = PixelDepth {
                x: x as f64,
                y: y as f64,
                depth_mm: d as f64,
            };
            points.push(deproject(&pixel, k)?);
        }
    }
    if points.is_empty() {
        return Err(GeometryError::EmptyCloud);
    }
    Ok(SegmentedCloud {
        points,
        class_label,
        mask_id: mask_id.into(),
    })
}

/// Number of masked pixels and how many of them carried a valid depth.
/// Drives the reconstruction-quality gate in episode runs.
pub fn mask_depth_coverage(
    mask: &GrayImage,
    depth: &DepthImage,
) -> Result<(usize, usize), GeometryError> {
    if mask.width() != depth.width() || mask.height() != depth.height() {
        return Err(GeometryError::MaskDepthMismatch);
    }
    let mut masked = 0;
    let mut valid = 0;
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) != 0 {
                masked += 1;
                if depth.get(x, y) != 0 {
                    valid += 1;
                }
            }
        }
    }
    Ok((masked, valid))
}

/// Writes points as ASCII XYZ rows (`x y z`, metres, one point per line).
pub fn write_xyz<W: std::io::Write>(w: &mut W, points: &[Vec3]) -> std::io::Result<()> {
    for p in points {
        writeln!(w, "{} {} {}", p.x, p.y, p.z)?;
    }
    Ok(())
}

/// Reads an ASCII XYZ cloud; blank lines and `#` comments are skipped.
pub fn read_xyz<R: std::io::BufRead>(r: R) -> Result<Vec<Vec3>, GeometryError> {
    let mut points = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line.map_err(|_| GeometryError::BadXyzRow { line: idx + 1 })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let mut next = || -> Result<f64, GeometryError> {
            fields
                .next()
                .and_then(|f| f.parse().ok())
                .filter(|v: &f64| v.is_finite())
                .ok_or(GeometryError::BadXyzRow { line: idx + 1 })
        };
        points.push(Vec3::new(next()?, next()?, next()?));
    }
    Ok(points)
}

/// Axis-aligned reachable region of the robot, metres, closed on all faces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl Workspace {
    /// 600 x 500 mm work area in front of the robot with a half-metre height
    /// band.
    pub fn standard() -> Self {
        Self {
            x_min: 0.2,
            x_max: 0.8,
            y_min: -0.25,
            y_max: 0.25,
            z_min: -0.05,
            z_max: 0.45,
        }
    }
}

/// True iff the point lies inside the workspace (boundary included).
pub fn check_workspace(p: &BasePoint, ws: &Workspace) -> bool {
    let v = p.0;
    v.x >= ws.x_min
        && v.x <= ws.x_max
        && v.y >= ws.y_min
        && v.y <= ws.y_max
        && v.z >= ws.z_min
        && v.z <= ws.z_max
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deproject_unit_intrinsics_principal_ray() {
        let k = CameraIntrinsics::new(1.0, 1.0, 0.0, 0.0, 4, 4).unwrap();
        let p = PixelDepth {
            x: 0.0,
            y: 0.0,
            depth_mm: 1.0,
        };
        let c = deproject(&p, &k).unwrap();
        // 1 mm along the permuted depth axis.
        assert!((c.0 - Vec3::new(1e-3, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn deproject_principal_point_gives_pure_depth() {
        let k = CameraIntrinsics::new(600.0, 600.0, 320.0, 240.0, 640, 480).unwrap();
        let p = PixelDepth {
            x: 320.0,
            y: 240.0,
            depth_mm: 500.0,
        };
        let c = deproject(&p, &k).unwrap();
        assert!((c.0 - Vec3::new(0.5, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn deproject_off_axis_pixel_matches_hand_computation() {
        // Pixel 600 px right of centre at 600 mm: ray x = 600, permuted into
        // the camera y axis.
        let k = CameraIntrinsics::new(600.0, 600.0, 320.0, 240.0, 1280, 480).unwrap();
        let p = PixelDepth {
            x: 920.0,
            y: 240.0,
            depth_mm: 600.0,
        };
        let c = deproject(&p, &k).unwrap();
        assert!((c.0 - Vec3::new(0.6, 0.6, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn deproject_rejects_invalid_depth_and_bounds() {
        let k = CameraIntrinsics::new(600.0, 600.0, 320.0, 240.0, 640, 480).unwrap();
        let zero = PixelDepth {
            x: 10.0,
            y: 10.0,
            depth_mm: 0.0,
        };
        assert!(matches!(
            deproject(&zero, &k),
            Err(GeometryError::InvalidDepth)
        ));
        let outside = PixelDepth {
            x: 700.0,
            y: 10.0,
            depth_mm: 100.0,
        };
        assert!(matches!(
            deproject(&outside, &k),
            Err(GeometryError::PixelOutOfBounds { .. })
        ));
    }

    #[test]
    fn intrinsics_validation() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 0.0, 0.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 4.0, 0.0, 4, 4).is_err());
    }

    #[test]
    fn camera_to_base_identity_chain_is_identity() {
        let c = CameraPoint(Vec3::new(0.1, 0.2, 0.3));
        let b = camera_to_base(
            &c,
            &EndEffectorPose::identity(),
            &HandEyeTransform::identity(),
        );
        assert!((b.0 - c.0).norm() < 1e-15);
    }

    #[test]
    fn camera_to_base_pure_translation() {
        let ee = EndEffectorPose::new(Mat3::IDENTITY, Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let b = camera_to_base(&CameraPoint(Vec3::ZERO), &ee, &HandEyeTransform::identity());
        assert!((b.0 - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn camera_to_base_rotation_about_z() {
        let ee = EndEffectorPose::new(
            Mat3::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), std::f64::consts::FRAC_PI_2),
            Vec3::ZERO,
        )
        .unwrap();
        let b = camera_to_base(
            &CameraPoint(Vec3::new(1.0, 0.0, 0.0)),
            &ee,
            &HandEyeTransform::identity(),
        );
        assert!((b.0 - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn non_rigid_inputs_are_rejected_at_construction() {
        let scaled = Mat3::from_rows([2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]);
        assert!(matches!(
            EndEffectorPose::new(scaled, Vec3::ZERO),
            Err(GeometryError::NonRigid { .. })
        ));
        // Reflection: orthonormal but det = -1.
        let reflect = Mat3::from_rows([-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]);
        assert!(matches!(
            EndEffectorPose::new(reflect, Vec3::ZERO),
            Err(GeometryError::NonRigid { .. })
        ));
        let bad_row = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0, 1.0],
        ];
        assert!(matches!(
            HandEyeTransform::from_matrix(&bad_row),
            Err(GeometryError::BadHomogeneousRow)
        ));
    }

    #[test]
    fn segment_cloud_single_pixel_and_drop_rule() {
        let k = CameraIntrinsics::new(600.0, 600.0, 320.0, 240.0, 640, 480).unwrap();
        let mut mask = GrayImage::filled(640, 480, 0);
        let mut depth = DepthImage::filled(640, 480, 0);
        mask.set(320, 240, 255);
        depth.set(320, 240, 500);
        let cloud = segment_cloud(&mask, &depth, &k, ObjectClass::Plastic, "m0").unwrap();
        assert_eq!(cloud.points.len(), 1);

        // Add 4 more masked pixels, 2 of them with invalid depth.
        for (i, x) in [100usize, 101, 102, 103].iter().enumerate() {
            mask.set(*x, 100, 255);
            if i < 2 {
                depth.set(*x, 100, 400);
            }
        }
        let cloud = segment_cloud(&mask, &depth, &k, ObjectClass::Plastic, "m0").unwrap();
        assert_eq!(cloud.points.len(), 3);
    }

    #[test]
    fn segment_cloud_of_invalid_depths_is_an_error() {
        let k = CameraIntrinsics::new(600.0, 600.0, 320.0, 240.0, 640, 480).unwrap();
        let mask = GrayImage::filled(640, 480, 255);
        let depth = DepthImage::filled(640, 480, 0);
        assert!(matches!(
            segment_cloud(&mask, &depth, &k, ObjectClass::Glass, "m"),
            Err(GeometryError::EmptyCloud)
        ));
    }

    #[test]
    fn segmented_plane_fits_a_plane_exactly() {
        // Flat depth: every deprojected point has the same camera-x (depth),
        // so the least-squares plane residual is zero.
        let k = CameraIntrinsics::new(600.0, 600.0, 320.0, 240.0, 640, 480).unwrap();
        let mask = GrayImage::filled(640, 480, 255);
        let depth = DepthImage::filled(640, 480, 700);
        let cloud = segment_cloud(&mask, &depth, &k, ObjectClass::Cardboard, "plane").unwrap();
        let mean_x = cloud.points.iter().map(|p| p.0.x).sum::<f64>() / cloud.points.len() as f64;
        let rms = (cloud
            .points
            .iter()
            .map(|p| (p.0.x - mean_x).powi(2))
            .sum::<f64>()
            / cloud.points.len() as f64)
            .sqrt();
        assert!(rms < 1e-9, "rms {rms}");
    }

    #[test]
    fn xyz_cloud_round_trips() {
        let points = vec![
            Vec3::new(0.1, -0.2, 0.3),
            Vec3::new(1.5, 0.0, -2.25),
            Vec3::new(0.0, 0.0, 0.0),
        ];
        let mut buf = Vec::new();
        write_xyz(&mut buf, &points).unwrap();
        let back = read_xyz(&buf[..]).unwrap();
        assert_eq!(back, points);

        let with_comments = b"# cloud\n0.5 0.5 0.5\n\n1 2 3\n";
        let parsed = read_xyz(&with_comments[..]).unwrap();
        assert_eq!(parsed.len(), 2);

        let malformed = b"0.5 0.5\n";
        assert!(matches!(
            read_xyz(&malformed[..]),
            Err(GeometryError::BadXyzRow { line: 1 })
        ));
    }

    #[test]
    fn workspace_check_is_inclusive() {
        let ws = Workspace::standard();
        assert!(check_workspace(&BasePoint(Vec3::new(0.5, 0.0, 0.2)), &ws));
        assert!(!check_workspace(&BasePoint(Vec3::new(1.8, 0.0, 0.2)), &ws));
        // Exactly on the boundary counts as inside.
        assert!(check_workspace(&BasePoint(Vec3::new(0.8, 0.25, 0.45)), &ws));
        assert!(check_workspace(
            &BasePoint(Vec3::new(0.2, -0.25, -0.05)),
            &ws
        ));
    }
}
