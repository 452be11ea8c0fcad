//! Minimal fixed-size linear algebra for the geometry pipeline.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        if n == 0.0 {
            Vec3::ZERO
        } else {
            self.scale(1.0 / n)
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub fn from_rows(r0: [f64; 3], r1: [f64; 3], r2: [f64; 3]) -> Self {
        Self { m: [r0, r1, r2] }
    }

    pub fn transpose(self) -> Mat3 {
        let m = self.m;
        Mat3::from_rows(
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        )
    }

    pub fn mul_vec(self, v: Vec3) -> Vec3 {
        Vec3::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y + self.m[0][2] * v.z,
            self.m[1][0] * v.x + self.m[1][1] * v.y + self.m[1][2] * v.z,
            self.m[2][0] * v.x + self.m[2][1] * v.y + self.m[2][2] * v.z,
        )
    }

    pub fn column(self, j: usize) -> Vec3 {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    pub fn det(self) -> f64 {
        let m = self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Rodrigues rotation about a (non-zero) axis.
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Mat3 {
        let a = axis.normalized();
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Mat3::from_rows(
            [
                t * a.x * a.x + c,
                t * a.x * a.y - s * a.z,
                t * a.x * a.z + s * a.y,
            ],
            [
                t * a.x * a.y + s * a.z,
                t * a.y * a.y + c,
                t * a.y * a.z - s * a.x,
            ],
            [
                t * a.x * a.z - s * a.y,
                t * a.y * a.z + s * a.x,
                t * a.z * a.z + c,
            ],
        )
    }

    /// Largest entry of |R^T R - I|, the orthonormality residual.
    pub fn orthonormal_residual(self) -> f64 {
        let gram = self.transpose() * self;
        let mut max = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                max = max.max((gram.m[i][j] - target).abs());
            }
        }
        max
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * rhs.m[k][j]).sum();
            }
        }
        Mat3 { m: out }
    }
}

/// Rigid transform: rotation followed by translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Iso3 {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl Iso3 {
    pub const IDENTITY: Iso3 = Iso3 {
        rotation: Mat3::IDENTITY,
        translation: Vec3::ZERO,
    };

    pub fn new(rotation: Mat3, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn apply(self, p: Vec3) -> Vec3 {
        self.rotation.mul_vec(p) + self.translation
    }

    pub fn compose(self, inner: Iso3) -> Iso3 {
        Iso3 {
            rotation: self.rotation * inner.rotation,
            translation: self.rotation.mul_vec(inner.translation) + self.translation,
        }
    }

    pub fn inverse(self) -> Iso3 {
        let rt = self.rotation.transpose();
        Iso3 {
            rotation: rt,
            translation: -rt.mul_vec(self.translation),
        }
    }
}

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching unit eigenvectors
/// as columns of the returned matrix.
#[allow(clippy::needless_range_loop)] // indexed form mirrors the two-sided rotation
pub fn symmetric_eigen3(m: Mat3) -> ([f64; 3], Mat3) {
    let mut a = m.m;
    let mut v = Mat3::IDENTITY.m;
    for _ in 0..64 {
        // Largest off-diagonal element.
        let (mut p, mut q, mut max) = (0usize, 1usize, a[0][1].abs());
        for (i, j) in [(0usize, 2usize), (1, 2)] {
            if a[i][j].abs() > max {
                max = a[i][j].abs();
                p = i;
                q = j;
            }
        }
        if max < 1e-14 {
            break;
        }
        let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        // Apply the rotation on both sides.
        for k in 0..3 {
            let akp = a[k][p];
            let akq = a[k][q];
            a[k][p] = c * akp - s * akq;
            a[k][q] = s * akp + c * akq;
        }
        for k in 0..3 {
            let apk = a[p][k];
            let aqk = a[q][k];
            a[p][k] = c * apk - s * aqk;
            a[q][k] = s * apk + c * aqk;
        }
        for row in v.iter_mut() {
            let vp = row[p];
            let vq = row[q];
            row[p] = c * vp - s * vq;
            row[q] = s * vp + c * vq;
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).expect("finite eigenvalues"));
    let values = [
        a[order[0]][order[0]],
        a[order[1]][order[1]],
        a[order[2]][order[2]],
    ];
    let vm = Mat3 { m: v };
    let mut cols = [[0.0; 3]; 3];
    for (slot, &idx) in order.iter().enumerate() {
        let col = vm.column(idx);
        cols[0][slot] = col.x;
        cols[1][slot] = col.y;
        cols[2][slot] = col.z;
    }
    (values, Mat3 { m: cols })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_about_z_moves_x_to_y() {
        let r = Mat3::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), std::f64::consts::FRAC_PI_2);
        let p = r.mul_vec(Vec3::new(1.0, 0.0, 0.0));
        assert!((p - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
        assert!(r.orthonormal_residual() < 1e-12);
        assert!((r.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compose_then_inverse_is_identity() {
        let a = Iso3::new(
            Mat3::from_axis_angle(Vec3::new(1.0, 2.0, 3.0), 0.7),
            Vec3::new(0.1, -0.4, 2.0),
        );
        let p = Vec3::new(0.3, 0.2, -1.0);
        let round = a.inverse().apply(a.apply(p));
        assert!((round - p).norm() < 1e-12);
    }

    #[test]
    fn eigen_recovers_diagonal_matrix() {
        let m = Mat3::from_rows([3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]);
        let (vals, vecs) = symmetric_eigen3(m);
        assert_eq!(vals, [3.0, 2.0, 1.0]);
        // Eigenvector of the largest value is +-x.
        assert!((vecs.column(0).x.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_diagonalizes_random_symmetric_matrices() {
        let mut seed = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        for _ in 0..200 {
            let (a, b, c, d, e, f) = (next(), next(), next(), next(), next(), next());
            let m = Mat3::from_rows([a, d, e], [d, b, f], [e, f, c]);
            let (vals, vecs) = symmetric_eigen3(m);
            assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
            assert!(vecs.orthonormal_residual() < 1e-9);
            for (k, &val) in vals.iter().enumerate() {
                let v = vecs.column(k);
                let residual = m.mul_vec(v) - v.scale(val);
                assert!(residual.norm() < 1e-9, "residual {}", residual.norm());
            }
        }
    }
}
