//! Synthetic tactile frames and detection fixtures.
//!
//! Frames are a pure function of (seed, unit, frame index, blob pose):
//! a per-unit base tint, uniform sensor noise regenerated every frame, and
//! an optional elliptical contact blob. Noise is sized to vanish under the
//! filter pipeline's binarisation threshold, so the filtered image is
//! determined by the blob geometry alone.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vtgrasp_core::common::SensorUnit;
use vtgrasp_core::geometry::linalg::{Mat3, Vec3};
use vtgrasp_core::geometry::CameraIntrinsics;
use vtgrasp_core::image::{DepthImage, GrayImage, TactileFrame, TACTILE_HEIGHT, TACTILE_WIDTH};

use crate::scenario::{CameraConfig, FaultInjection, StreamParams};

/// Elliptical contact blob: centre, semi-axes and orientation in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobPose {
    pub cx: f64,
    pub cy: f64,
    pub a: f64,
    pub b: f64,
    pub angle: f64,
    pub intensity: i16,
}

impl BlobPose {
    /// Circular contact patch at the sensor centre.
    pub fn contact(radius: f64, intensity: i16) -> Self {
        Self {
            cx: TACTILE_WIDTH as f64 / 2.0,
            cy: TACTILE_HEIGHT as f64 / 2.0,
            a: radius,
            b: radius,
            angle: 0.0,
            intensity,
        }
    }

    pub fn shifted(mut self, dx: f64, dy: f64) -> Self {
        self.cx += dx;
        self.cy += dy;
        self
    }

    pub fn rotated(mut self, delta: f64) -> Self {
        self.angle += delta;
        self
    }
}

/// Deterministic frame generator for one sensor unit.
#[derive(Debug, Clone)]
pub struct FrameSynth {
    pub unit: SensorUnit,
    seed: u64,
    base_rgb: [u8; 3],
    noise_amplitude: u8,
    frame_interval_ms: u64,
}

impl FrameSynth {
    pub fn new(seed: u64, unit: SensorUnit, params: &StreamParams) -> Self {
        // The two hand-made units differ in illumination tint.
        let base_rgb = match unit {
            SensorUnit::A => [95, 85, 105],
            SensorUnit::B => [88, 92, 100],
        };
        Self {
            unit,
            seed,
            base_rgb,
            noise_amplitude: params.noise_amplitude,
            frame_interval_ms: params.frame_interval_ms,
        }
    }

    fn frame_rng(&self, index: u64) -> ChaCha8Rng {
        // splitmix-style mixing keeps frames independent and random-access.
        let mut key = self
            .seed
            .wrapping_mul(0x9E3779B97F4A7C15)
            .wrapping_add(index)
            .wrapping_add(match self.unit {
                SensorUnit::A => 0x517CC1B727220A95,
                SensorUnit::B => 0x2545F4914F6CDD1D,
            });
        key ^= key >> 30;
        key = key.wrapping_mul(0xBF58476D1CE4E5B9);
        key ^= key >> 27;
        ChaCha8Rng::seed_from_u64(key)
    }

    /// Renders frame `index`; timestamps advance by the frame interval.
    pub fn frame(&self, index: u64, blob: Option<&BlobPose>) -> TactileFrame {
        let (w, h) = (TACTILE_WIDTH, TACTILE_HEIGHT);
        let mut noise = vec![0u8; w * h];
        self.frame_rng(index).fill_bytes(&mut noise);
        let amp = self.noise_amplitude as i16;
        let span = (2 * amp + 1) as u16;
        let mut data = Vec::with_capacity(w * h * 3);
        for &n in &noise {
            let offset = (n as u16 % span) as i16 - amp;
            for c in 0..3 {
                data.push((self.base_rgb[c] as i16 + offset).clamp(0, 255) as u8);
            }
        }
        let mut frame = TactileFrame::new(w, h, data, index * self.frame_interval_ms, self.unit)
            .expect("length follows from dimensions");
        if let Some(blob) = blob {
            draw_blob(&mut frame, blob);
        }
        frame
    }
}

fn draw_blob(frame: &mut TactileFrame, blob: &BlobPose) {
    let (w, h) = (frame.width() as isize, frame.height() as isize);
    let reach = blob.a.max(blob.b) + 1.0;
    let x0 = ((blob.cx - reach).floor() as isize).max(0);
    let x1 = ((blob.cx + reach).ceil() as isize).min(w - 1);
    let y0 = ((blob.cy - reach).floor() as isize).max(0);
    let y1 = ((blob.cy + reach).ceil() as isize).min(h - 1);
    let (sin, cos) = blob.angle.sin_cos();
    let data = frame.data_mut();
    for y in y0..=y1 {
        for x in x0..=x1 {
            let dx = x as f64 - blob.cx;
            let dy = y as f64 - blob.cy;
            let u = cos * dx + sin * dy;
            let v = -sin * dx + cos * dy;
            if (u / blob.a).powi(2) + (v / blob.b).powi(2) <= 1.0 {
                let i = (y * w + x) as usize * 3;
                for c in 0..3 {
                    data[i + c] = (data[i + c] as i16 + blob.intensity).clamp(0, 255) as u8;
                }
            }
        }
    }
}

/// Synthetic detection fixture: mask and depth of a standing cylinder seen
/// from the detection pose.
///
/// The depth map encodes a completed reconstruction: pixels alternate
/// between the near and far cylinder surface, so the deprojected cloud
/// covers the whole shell the way a fused multi-view cloud would. A
/// single-view half shell would under-span the true object width.
pub struct CylinderFixture {
    pub mask: GrayImage,
    pub depth: DepthImage,
}

/// Cylinder placement in the base frame shared by fixtures and episodes.
pub const CYLINDER_AXIS_X: f64 = 0.5;
pub const CYLINDER_AXIS_Y: f64 = 0.0;
pub const CYLINDER_Z_MIN: f64 = 0.06;

/// Height grows with width so the vertical extent stays the major axis of
/// the second-moment analysis for any graspable width.
pub fn cylinder_height_m(width_mm: f64) -> f64 {
    1.5 * width_mm * 1e-3
}

pub fn render_cylinder_fixture(
    width_mm: f64,
    camera: &CameraConfig,
    faults: &FaultInjection,
    seed: u64,
) -> CylinderFixture {
    let k: &CameraIntrinsics = &camera.intrinsics;
    let rot = Mat3::from_rows(
        camera.ee_rotation[0],
        camera.ee_rotation[1],
        camera.ee_rotation[2],
    );
    let he = Mat3::from_rows(
        [
            camera.hand_eye[0][0],
            camera.hand_eye[0][1],
            camera.hand_eye[0][2],
        ],
        [
            camera.hand_eye[1][0],
            camera.hand_eye[1][1],
            camera.hand_eye[1][2],
        ],
        [
            camera.hand_eye[2][0],
            camera.hand_eye[2][1],
            camera.hand_eye[2][2],
        ],
    );
    let cam_rot = rot * he;
    let cam_pos = Vec3::new(
        camera.ee_translation[0] + camera.hand_eye[0][3],
        camera.ee_translation[1] + camera.hand_eye[1][3],
        camera.ee_translation[2] + camera.hand_eye[2][3],
    );

    let radius = width_mm / 2.0 * 1e-3;
    let mut mask = GrayImage::filled(k.width, k.height, 0);
    let mut depth = DepthImage::filled(k.width, k.height, 0);
    let mut fault_rng = ChaCha8Rng::seed_from_u64(seed ^ 0xD1F1_D1F1);
    let mut fault_noise = vec![0u8; k.width * k.height];
    fault_rng.fill_bytes(&mut fault_noise);

    for py in 0..k.height {
        for px in 0..k.width {
            // Pixel ray in the permuted camera frame (depth on x), scaled so
            // the optical-axis component is 1; the ray parameter is then the
            // stored z-depth.
            let dir_cam = Vec3::new(1.0, (px as f64 - k.cx) / k.fx, (py as f64 - k.cy) / k.fy);
            let dir = cam_rot.mul_vec(dir_cam);
            // Intersect with the infinite vertical cylinder.
            let ox = cam_pos.x - CYLINDER_AXIS_X;
            let oy = cam_pos.y - CYLINDER_AXIS_Y;
            let a = dir.x * dir.x + dir.y * dir.y;
            let b = 2.0 * (ox * dir.x + oy * dir.y);
            let c = ox * ox + oy * oy - radius * radius;
            let disc = b * b - 4.0 * a * c;
            if disc < 0.0 || a == 0.0 {
                continue;
            }
            let sqrt_disc = disc.sqrt();
            let t_near = (-b - sqrt_disc) / (2.0 * a);
            let t_far = (-b + sqrt_disc) / (2.0 * a);
            // Alternate surfaces to emulate the fused reconstruction.
            let t = if (px + py) % 2 == 0 { t_near } else { t_far };
            if t <= 0.0 {
                continue;
            }
            let hit_z = cam_pos.z + t * dir.z;
            let z_max = CYLINDER_Z_MIN + cylinder_height_m(width_mm);
            if !(CYLINDER_Z_MIN..=z_max).contains(&hit_z) {
                continue;
            }
            mask.set(px, py, 255);
            let idx = py * k.width + px;
            let dropped = (fault_noise[idx] as f64 / 255.0) < faults.invalid_depth_fraction;
            if !dropped {
                let depth_mm = (t * 1e3).round().clamp(1.0, 65535.0) as u16;
                depth.set(px, py, depth_mm);
            }
        }
    }
    if faults.corrupt_mask {
        mask = GrayImage::filled(k.width, k.height, 0);
    }
    CylinderFixture { mask, depth }
}
