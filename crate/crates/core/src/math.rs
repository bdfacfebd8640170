//! Double-precision 3-vector / 3×3 matrix algebra and Classical Rodrigues
//! Parameter (Gibbs vector) kinematics.
//!
//! Everything is written entry-wise over row-major storage so that the
//! fixed-point datapath in [`crate::fixedpoint`] can mirror the same
//! operation order.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Default scale-relative tolerance for [`mat3_inverse`].
pub const DEFAULT_SINGULAR_TOL: f64 = 1e-12;

/// Orthogonality tolerance accepted by [`inverse_cayley`].
pub const ROTATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub const fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    pub const fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(&self, o: &Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn scale(&self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }

    /// `self · otherᵀ`
    pub fn outer(&self, o: &Vec3) -> Mat3 {
        let a = self.to_array();
        let b = o.to_array();
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = a[i] * b[j];
            }
        }
        m
    }

    pub fn normalized(&self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(1.0 / n))
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        match i {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        self.scale(k)
    }
}

/// Row-major 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub const fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Mat3(rows)
    }

    pub fn diag(d: [f64; 3]) -> Self {
        let mut m = Mat3::ZERO;
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3::from_array(self.0[i])
    }

    pub fn col(&self, j: usize) -> Vec3 {
        Vec3::new(self.0[0][j], self.0[1][j], self.0[2][j])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    pub fn scale(&self, k: f64) -> Mat3 {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|v| *v *= k);
        m
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }

    pub fn matmul(&self, o: &Mat3) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += self.0[i][k] * o.0[k][j];
                }
                m.0[i][j] = acc;
            }
        }
        m
    }

    /// Signed cofactor `(-1)^(i+j) · minor(i, j)`.
    pub fn cofactor(&self, i: usize, j: usize) -> f64 {
        let (r0, r1) = others(i);
        let (c0, c1) = others(j);
        let a = &self.0;
        let minor = a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
        if (i + j).is_multiple_of(2) {
            minor
        } else {
            -minor
        }
    }

    /// Transposed cofactor matrix.
    pub fn adjugate(&self) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[j][i] = self.cofactor(i, j);
            }
        }
        m
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> f64 {
        (0..3).map(|k| self.0[0][k] * self.cofactor(0, k)).sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..3).all(|i| (0..3).all(|j| (self.0[i][j] - self.0[j][i]).abs() <= tol))
    }

    /// Eigenvalues of a symmetric matrix in descending order (closed-form
    /// trigonometric solution). Only the upper triangle is read.
    pub fn symmetric_eigenvalues(&self) -> [f64; 3] {
        let a = &self.0;
        let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if p1 == 0.0 {
            let mut d = [a[0][0], a[1][1], a[2][2]];
            d.sort_by(|x, y| y.total_cmp(x));
            return d;
        }
        let q = self.trace() / 3.0;
        let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let mut b = *self;
        for i in 0..3 {
            b.0[i][i] -= q;
        }
        // symmetrize from the upper triangle
        b.0[1][0] = b.0[0][1];
        b.0[2][0] = b.0[0][2];
        b.0[2][1] = b.0[1][2];
        let r = (b.scale(1.0 / p).det() / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let e2 = 3.0 * q - e1 - e3;
        [e1, e2, e3]
    }

    /// Spectral condition number of a symmetric positive semi-definite
    /// matrix; infinite when the smallest eigenvalue is not positive.
    pub fn spd_condition_number(&self) -> f64 {
        let [hi, _, lo] = self.symmetric_eigenvalues();
        if lo <= 0.0 || !lo.is_finite() {
            f64::INFINITY
        } else {
            hi / lo
        }
    }
}

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut m = self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] += o.0[i][j];
            }
        }
        m
    }
}

impl AddAssign for Mat3 {
    fn add_assign(&mut self, o: Mat3) {
        *self = *self + o;
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        self + o.scale(-1.0)
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        self.matmul(&o)
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        self.mul_vec(&v)
    }
}

/// Classical Rodrigues Parameters: `q = tan(θ/2)·axis`.
///
/// Singular at θ = 180°, where `|q|` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Crp(pub Vec3);

impl Crp {
    pub const ZERO: Crp = Crp(Vec3::ZERO);

    pub const fn new(q1: f64, q2: f64, q3: f64) -> Self {
        Crp(Vec3::new(q1, q2, q3))
    }

    /// CRP for a rotation of `angle` radians about `axis` (normalized here).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Option<Crp> {
        axis.normalized().map(|u| Crp(u.scale((angle / 2.0).tan())))
    }

    pub fn vector(&self) -> Vec3 {
        self.0
    }

    /// Rotation angle in radians, in `[0, π)`.
    pub fn angle(&self) -> f64 {
        2.0 * self.0.norm().atan()
    }

    pub fn to_rotation(&self) -> Mat3 {
        cayley(self)
    }
}

/// `[v×]`, the cross-product matrix: `skew(v)·w = v × w`.
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3([[0.0, -v.z, v.y], [v.z, 0.0, -v.x], [-v.y, v.x, 0.0]])
}

/// `R = (I + Q)⁻¹ (I − Q)` with `Q = [q×]`.
///
/// `det(I + Q) = 1 + |q|²`, so the inverse always exists.
pub fn cayley(q: &Crp) -> Mat3 {
    let qm = skew(&q.0);
    let i_plus = Mat3::IDENTITY + qm;
    let i_minus = Mat3::IDENTITY - qm;
    let det = 1.0 + q.0.norm_squared();
    i_plus.adjugate().scale(1.0 / det).matmul(&i_minus)
}

/// Recovers the CRP of a proper rotation via `Q = (I − R)(I + R)⁻¹`.
pub fn inverse_cayley(r: &Mat3) -> Result<Crp> {
    let residual = (r.transpose().matmul(r) - Mat3::IDENTITY).max_abs();
    let det = r.det();
    if !(residual <= ROTATION_TOL) || !((det - 1.0).abs() <= ROTATION_TOL) {
        return Err(Error::NotARotation { residual, det });
    }
    let i_plus = Mat3::IDENTITY + *r;
    let det_plus = i_plus.det();
    if det_plus < 1e-9 {
        return Err(Error::SingularRotation {
            det_i_plus_r: det_plus,
        });
    }
    let qm = (Mat3::IDENTITY - *r).matmul(&i_plus.adjugate().scale(1.0 / det_plus));
    let q = &qm.0;
    // Q is skew up to rounding; average the two copies of each component.
    Ok(Crp::new(
        0.5 * (q[2][1] - q[1][2]),
        0.5 * (q[0][2] - q[2][0]),
        0.5 * (q[1][0] - q[0][1]),
    ))
}

/// Adjugate inverse with the default scale-relative singularity tolerance.
pub fn mat3_inverse(a: &Mat3) -> Result<Mat3> {
    mat3_inverse_with_tol(a, DEFAULT_SINGULAR_TOL)
}

/// Adjugate inverse; singular when `|det| <= tol · max|a_ij|³`.
pub fn mat3_inverse_with_tol(a: &Mat3, tol: f64) -> Result<Mat3> {
    let det = a.det();
    let scale = a.max_abs().powi(3);
    if !det.is_finite() || det.abs() <= tol * scale {
        return Err(Error::SingularMatrix { det });
    }
    Ok(a.adjugate().scale(1.0 / det))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Mat3, b: &Mat3, tol: f64) -> bool {
        (*a - *b).max_abs() <= tol
    }

    #[test]
    fn skew_examples() {
        assert_eq!(skew(&Vec3::ZERO), Mat3::ZERO);
        let e3 = Vec3::new(0.0, 0.0, 1.0);
        assert_eq!(skew(&e3) * Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0));
        let v = skew(&Vec3::new(1.0, 2.0, 3.0)) * Vec3::new(4.0, 5.0, 6.0);
        assert_eq!(v, Vec3::new(-3.0, 6.0, -3.0));
    }

    #[test]
    fn cayley_examples() {
        assert!(close(&cayley(&Crp::ZERO), &Mat3::IDENTITY, 0.0));
        let r = cayley(&Crp::new(0.0, 0.0, 1.0));
        let expected = Mat3::from_rows([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(close(&r, &expected, 1e-15), "{r:?}");
        assert!(close(&(r.transpose() * r), &Mat3::IDENTITY, 1e-15));
    }

    #[test]
    fn cayley_matches_closed_form() {
        // R = ((1 - qᵀq) I + 2 q qᵀ - 2 [q×]) / (1 + qᵀq)
        let q = Vec3::new(0.3, -1.2, 2.5);
        let qq = q.norm_squared();
        let oracle = (Mat3::IDENTITY.scale(1.0 - qq) + q.outer(&q).scale(2.0) - skew(&q).scale(2.0))
            .scale(1.0 / (1.0 + qq));
        assert!(close(&cayley(&Crp(q)), &oracle, 1e-14));
    }

    #[test]
    fn inverse_cayley_examples() {
        assert_eq!(inverse_cayley(&Mat3::IDENTITY).unwrap(), Crp::ZERO);
        let q = Crp::new(0.1, -0.2, 0.3);
        let back = inverse_cayley(&cayley(&q)).unwrap();
        assert!((back.0 - q.0).norm_inf() < 1e-12);
        let half_turn = Mat3::diag([1.0, -1.0, -1.0]);
        assert!(matches!(inverse_cayley(&half_turn), Err(Error::SingularRotation { .. })));
    }

    #[test]
    fn inverse_cayley_rejects_non_rotation() {
        let reflect = Mat3::diag([1.0, 1.0, -1.0]);
        assert!(matches!(inverse_cayley(&reflect), Err(Error::NotARotation { .. })));
        let sheared = Mat3::from_rows([[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(matches!(inverse_cayley(&sheared), Err(Error::NotARotation { .. })));
    }

    #[test]
    fn mat3_inverse_examples() {
        assert_eq!(mat3_inverse(&Mat3::IDENTITY).unwrap(), Mat3::IDENTITY);
        let inv = mat3_inverse(&Mat3::diag([2.0, 4.0, 8.0])).unwrap();
        assert_eq!(inv, Mat3::diag([0.5, 0.25, 0.125]));
        let rank2 = Mat3::from_rows([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]]);
        match mat3_inverse(&rank2) {
            Err(Error::SingularMatrix { det }) => assert_eq!(det, 0.0),
            other => panic!("expected SingularMatrix, got {other:?}"),
        }
        assert!(mat3_inverse(&Mat3::ZERO).is_err());
    }

    #[test]
    fn mat3_inverse_is_scale_relative() {
        let a = Mat3::from_rows([[2.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 4.0]]);
        for k in [1e-8, 1.0, 1e8] {
            let s = a.scale(k);
            let inv = mat3_inverse(&s).unwrap();
            assert!(close(&(s * inv), &Mat3::IDENTITY, 1e-10));
        }
    }

    #[test]
    fn eigenvalues_of_known_matrices() {
        let e = Mat3::diag([1.0, 5.0, 3.0]).symmetric_eigenvalues();
        assert_eq!(e, [5.0, 3.0, 1.0]);
        // [[2,1,0],[1,2,0],[0,0,7]] has eigenvalues 7, 3, 1
        let m = Mat3::from_rows([[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 7.0]]);
        let e = m.symmetric_eigenvalues();
        for (got, want) in e.iter().zip([7.0, 3.0, 1.0]) {
            assert!((got - want).abs() < 1e-12, "{e:?}");
        }
        assert!((m.spd_condition_number() - 7.0).abs() < 1e-12);
        assert!(Mat3::diag([1.0, 1.0, 0.0]).spd_condition_number().is_infinite());
    }

    #[test]
    fn from_axis_angle() {
        let q = Crp::from_axis_angle(Vec3::new(0.0, 0.0, 2.0), 0.02).unwrap();
        assert_eq!(q, Crp::new(0.0, 0.0, 0.01_f64.tan()));
        assert!((q.angle() - 0.02).abs() < 1e-15);
        assert!(Crp::from_axis_angle(Vec3::ZERO, 1.0).is_none());
    }
}
