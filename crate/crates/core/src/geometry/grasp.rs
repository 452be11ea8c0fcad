//! Antipodal grasp-point estimation on a segmented cloud.
//!
//! The procedure is a 3-DoF top-down concretization: second-moment analysis
//! finds the principal axes, a thin slab through the centroid perpendicular
//! to the major axis isolates a cross-section, and the contact pair is the
//! extremal pair of slab points along the minor axis.

use super::linalg::{symmetric_eigen3, Mat3, Vec3};
use super::{BasePoint, GeometryError};

/// Maximum jaw span of the gripper in millimetres.
pub const DEFAULT_MAX_OPENING_MM: f64 = 140.0;

/// Minimum cloud size accepted by [`compute_grasp`].
pub const MIN_CLOUD_POINTS: usize = 50;

/// Slab half-width as a fraction of the major-axis extent.
const SLAB_FRACTION: f64 = 0.05;

/// Eigenvalue ratio below which the cloud is treated as rank-deficient.
const RANK_EPSILON: f64 = 1e-12;

/// A contact pair in the base frame with a top-down approach direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspCandidate {
    pub p1: BasePoint,
    pub p2: BasePoint,
    /// Unit approach direction; world vertical, pointing down.
    pub approach: Vec3,
    pub opening_required_mm: f64,
}

impl GraspCandidate {
    pub fn midpoint(&self) -> BasePoint {
        BasePoint((self.p1.0 + self.p2.0).scale(0.5))
    }
}

/// Computes the grasp pair for a base-frame cloud.
///
/// Fails on clouds below [`MIN_CLOUD_POINTS`], on rank-deficient moment
/// matrices, and when the extremal pair exceeds the jaw span.
pub fn compute_grasp(
    points: &[BasePoint],
    max_opening_mm: f64,
) -> Result<GraspCandidate, GeometryError> {
    if points.len() < MIN_CLOUD_POINTS {
        return Err(GeometryError::TooFewPoints {
            needed: MIN_CLOUD_POINTS,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let centroid = points
        .iter()
        .fold(Vec3::ZERO, |acc, p| acc + p.0)
        .scale(1.0 / n);

    // Second central moments.
    let mut cov = [[0.0f64; 3]; 3];
    for p in points {
        let d = p.0 - centroid;
        let v = [d.x, d.y, d.z];
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] += v[i] * v[j];
            }
        }
    }
    for row in cov.iter_mut() {
        for cell in row.iter_mut() {
            *cell /= n;
        }
    }
    let (eigenvalues, axes) = symmetric_eigen3(Mat3 { m: cov });
    if eigenvalues[0] <= 0.0 || eigenvalues[1] <= RANK_EPSILON * eigenvalues[0] {
        return Err(GeometryError::DegenerateGeometry);
    }
    let major = axes.column(0);
    let middle = axes.column(1);
    let minor = axes.column(2);

    // Slab through the centroid, perpendicular to the major axis.
    let projections: Vec<f64> = points.iter().map(|p| (p.0 - centroid).dot(major)).collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &t in &projections {
        lo = lo.min(t);
        hi = hi.max(t);
    }
    let half_width = SLAB_FRACTION * (hi - lo);

    // Slab candidates: (index, minor projection, |major proj|, |middle proj|).
    let mut slab: Vec<(usize, f64, f64, f64)> = Vec::new();
    for (idx, (p, &t)) in points.iter().zip(&projections).enumerate() {
        if t.abs() > half_width {
            continue;
        }
        let d = p.0 - centroid;
        slab.push((idx, d.dot(minor), t.abs(), d.dot(middle).abs()));
    }
    if slab.len() < 2 {
        return Err(GeometryError::DegenerateGeometry);
    }

    // First contact: minimal minor projection; ties prefer points closest to
    // the cutting plane, then closest to the middle axis, so the contact
    // stays centred on the cross-section.
    let &(lo_idx, ..) = slab
        .iter()
        .min_by(|a, b| {
            (a.1, a.2, a.3)
                .partial_cmp(&(b.1, b.2, b.3))
                .expect("finite projections")
        })
        .expect("slab is non-empty");
    // Opposing contact: maximal minor projection; ties prefer the point most
    // nearly antipodal to the first (smallest displacement perpendicular to
    // the minor axis).
    let p_lo = points[lo_idx].0;
    let &(hi_idx, ..) = slab
        .iter()
        .max_by(|a, b| {
            let perp = |c: &(usize, f64, f64, f64)| {
                let delta = points[c.0].0 - p_lo;
                let along = delta.dot(minor);
                delta.dot(delta) - along * along
            };
            (a.1, -a.2, -perp(a))
                .partial_cmp(&(b.1, -b.2, -perp(b)))
                .expect("finite projections")
        })
        .expect("slab is non-empty");
    if lo_idx == hi_idx {
        return Err(GeometryError::DegenerateGeometry);
    }

    let p1 = points[lo_idx];
    let p2 = points[hi_idx];
    let opening_required_mm = (p2.0 - p1.0).norm() * 1e3;
    if opening_required_mm > max_opening_mm {
        return Err(GeometryError::ObjectTooWide {
            required_mm: opening_required_mm,
            max_mm: max_opening_mm,
        });
    }
    Ok(GraspCandidate {
        p1,
        p2,
        approach: Vec3::new(0.0, 0.0, -1.0),
        opening_required_mm,
    })
}
