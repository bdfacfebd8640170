//! Double-precision linear translation and attitude estimation.
//!
//! The attitude is solved from the centroid-aligned 3×3 weighted normal
//! equations
//!
//! ```text
//! N = Σⱼ wⱼ (sⱼᵀsⱼ I − sⱼsⱼᵀ)      r = Σⱼ wⱼ (sⱼ × yⱼ)      q̂ = −N⁻¹ r
//! ```
//!
//! with `sⱼ = δbⱼ + δaⱼ`, `yⱼ = δbⱼ − δaⱼ` and `wⱼ = 1/σⱼ²`. Translation
//! follows from the centroids, `t̂ = b̄ − R(q̂)·ā`. A direct 6×6 solve over
//! `[q; t*]` is kept alongside as an independent check of the reduction.

use nalgebra::{Matrix3x6, Matrix6, Vector6};

use crate::error::{Error, Result};
use crate::fixedpoint::{self, ScaleMode};
use crate::math::{cayley, mat3_inverse, skew, Crp, Mat3, Vec3};

/// Normal matrices worse conditioned than this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Central-difference step for the translation Jacobian.
pub const JACOBIAN_STEP: f64 = 1e-6;

/// One matched point pair observed in two successive frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub a: Vec3,
    pub b: Vec3,
    /// Measurement noise standard deviation (meters).
    pub sigma: f64,
}

impl Correspondence {
    pub fn new(a: Vec3, b: Vec3, sigma: f64) -> Result<Self> {
        let c = Correspondence { a, b, sigma };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::InvalidCorrespondence("non-finite coordinate".into()));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidCorrespondence(format!(
                "sigma must be positive and finite, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    pub fn weight(&self) -> f64 {
        1.0 / (self.sigma * self.sigma)
    }
}

/// Rigid transform `b = R(q)·a + t`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub q: Crp,
    pub t: Vec3,
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        q: Crp::ZERO,
        t: Vec3::ZERO,
    };

    pub fn new(q: Crp, t: Vec3) -> Self {
        Pose { q, t }
    }

    pub fn rotation(&self) -> Mat3 {
        cayley(&self.q)
    }

    pub fn apply(&self, a: &Vec3) -> Vec3 {
        self.rotation() * *a + self.t
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Pose) -> Result<Pose> {
        let r = self.rotation() * first.rotation();
        Ok(Pose {
            q: crate::math::inverse_cayley(&r)?,
            t: self.rotation() * first.t + self.t,
        })
    }
}

/// Centroid-aligned measurement pair for one correspondence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaPair {
    /// `δb + δa`
    pub s: Vec3,
    /// `δb − δa`
    pub y: Vec3,
    /// `1/σ²`
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSet {
    pub pairs: Vec<DeltaPair>,
    pub a_bar: Vec3,
    pub b_bar: Vec3,
}

impl DeltaSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Root-mean-square of the per-pair σ.
    pub fn sigma_rms(&self) -> f64 {
        let n = self.pairs.len() as f64;
        (self.pairs.iter().map(|p| 1.0 / p.weight).sum::<f64>() / n).sqrt()
    }
}

/// Which solver produced an [`EstimateResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodTag {
    ClosedForm3x3,
    Joint6x6,
    FixedPoint,
}

impl MethodTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodTag::ClosedForm3x3 => "closed_form_3x3",
            MethodTag::Joint6x6 => "joint_6x6",
            MethodTag::FixedPoint => "fixed_point",
        }
    }
}

/// Solver selection for [`estimate_pose`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    ClosedForm3x3,
    Joint6x6,
    FixedPoint(ScaleMode),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub q_hat: Crp,
    pub t_hat: Vec3,
    pub r_hat: Mat3,
    /// `HᵀΣ⁻¹H` for the attitude (marginal information for the 6×6 path).
    pub info_matrix: Mat3,
    pub condition_number: f64,
    pub method_tag: MethodTag,
    pub saturation_events: u64,
    pub a_bar: Vec3,
    pub n: usize,
    pub sigma_rms: f64,
}

impl EstimateResult {
    pub fn pose(&self) -> Pose {
        Pose::new(self.q_hat, self.t_hat)
    }

    /// Attitude covariance `N⁻¹`.
    pub fn attitude_covariance(&self) -> Result<Mat3> {
        attitude_covariance(&self.info_matrix)
    }

    /// First-order translation covariance.
    pub fn translation_covariance(&self) -> Result<Mat3> {
        let p_q = self.attitude_covariance()?;
        Ok(translation_covariance(
            &p_q,
            &self.q_hat,
            &self.a_bar,
            self.n,
            self.sigma_rms,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeSolution {
    pub q_hat: Crp,
    pub info_matrix: Mat3,
    pub condition_number: f64,
}

pub fn build_deltas(correspondences: &[Correspondence]) -> Result<DeltaSet> {
    let n = correspondences.len();
    if n < 3 {
        return Err(Error::TooFewCorrespondences(n));
    }
    for c in correspondences {
        c.validate()?;
    }
    let inv_n = 1.0 / n as f64;
    let mut a_sum = Vec3::ZERO;
    let mut b_sum = Vec3::ZERO;
    for c in correspondences {
        a_sum += c.a;
        b_sum += c.b;
    }
    let a_bar = a_sum * inv_n;
    let b_bar = b_sum * inv_n;
    let pairs = correspondences
        .iter()
        .map(|c| {
            let da = c.a - a_bar;
            let db = c.b - b_bar;
            DeltaPair {
                s: db + da,
                y: db - da,
                weight: c.weight(),
            }
        })
        .collect();
    Ok(DeltaSet {
        pairs,
        a_bar,
        b_bar,
    })
}

/// Weighted normal matrix `N` and right-hand side `r = Σ w (s × y)`,
/// accumulated in ascending index order.
pub fn normal_equations(deltas: &DeltaSet) -> (Mat3, Vec3) {
    let mut n_mat = Mat3::ZERO;
    let mut rhs = Vec3::ZERO;
    for p in &deltas.pairs {
        let term = Mat3::IDENTITY.scale(p.s.norm_squared()) - p.s.outer(&p.s);
        n_mat += term.scale(p.weight);
        rhs += p.s.cross(&p.y) * p.weight;
    }
    (n_mat, rhs)
}

pub fn solve_attitude(deltas: &DeltaSet) -> Result<AttitudeSolution> {
    if deltas.len() < 3 {
        return Err(Error::TooFewCorrespondences(deltas.len()));
    }
    let (n_mat, rhs) = normal_equations(deltas);
    let condition = n_mat.spd_condition_number();
    if !(condition <= MAX_CONDITION) {
        return Err(Error::DegenerateGeometry { condition });
    }
    let inv = mat3_inverse(&n_mat).map_err(|_| Error::DegenerateGeometry { condition })?;
    Ok(AttitudeSolution {
        q_hat: Crp(-(inv * rhs)),
        info_matrix: n_mat,
        condition_number: condition,
    })
}

pub fn recover_translation(q_hat: &Crp, deltas: &DeltaSet) -> Vec3 {
    deltas.b_bar - cayley(q_hat) * deltas.a_bar
}

/// Joint 6×6 result: attitude, translation, and the marginal attitude
/// information (Schur complement of the translation block).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointSolution {
    pub q_hat: Crp,
    pub t_hat: Vec3,
    pub info_matrix: Mat3,
    pub condition_number: f64,
}

/// Weighted least squares on `εᵢ = [νᵢ×] q + t*` with `νᵢ = bᵢ + aᵢ`,
/// `εᵢ = bᵢ − aᵢ`, then `t̂ = (I + Q̂)⁻¹ t̂*`.
pub fn solve_joint_6x6(correspondences: &[Correspondence]) -> Result<JointSolution> {
    let n = correspondences.len();
    if n < 3 {
        return Err(Error::TooFewCorrespondences(n));
    }
    let mut normal = Matrix6::<f64>::zeros();
    let mut rhs = Vector6::<f64>::zeros();
    for c in correspondences {
        c.validate()?;
        let nu = c.b + c.a;
        let eps = c.b - c.a;
        let sk = skew(&nu);
        let mut design = Matrix3x6::<f64>::zeros();
        for i in 0..3 {
            for j in 0..3 {
                design[(i, j)] = sk.0[i][j];
            }
            design[(i, 3 + i)] = 1.0;
        }
        let e = nalgebra::Vector3::new(eps.x, eps.y, eps.z);
        let w = c.weight();
        normal += design.transpose() * design * w;
        rhs += design.transpose() * e * w;
    }

    let eig = normal.symmetric_eigenvalues();
    let (lo, hi) = eig
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::DegenerateGeometry { condition });
    }
    let chol = normal
        .cholesky()
        .ok_or(Error::DegenerateGeometry { condition })?;
    let x = chol.solve(&rhs);
    let q_hat = Crp::new(x[0], x[1], x[2]);
    let t_star = Vec3::new(x[3], x[4], x[5]);
    let i_plus_q = Mat3::IDENTITY + skew(&q_hat.0);
    let t_hat = mat3_inverse(&i_plus_q)? * t_star;

    let qq = normal.fixed_view::<3, 3>(0, 0).into_owned();
    let qt = normal.fixed_view::<3, 3>(0, 3).into_owned();
    let tt = normal.fixed_view::<3, 3>(3, 3).into_owned();
    let tt_inv = tt
        .try_inverse()
        .ok_or(Error::DegenerateGeometry { condition })?;
    let schur = qq - qt * tt_inv * qt.transpose();
    let mut info = Mat3::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            info.0[i][j] = schur[(i, j)];
        }
    }
    Ok(JointSolution {
        q_hat,
        t_hat,
        info_matrix: info,
        condition_number: condition,
    })
}

/// Runs the full pipeline through the selected solver.
pub fn estimate_pose(correspondences: &[Correspondence], method: &Method) -> Result<EstimateResult> {
    let deltas = build_deltas(correspondences)?;
    match method {
        Method::ClosedForm3x3 => {
            let sol = solve_attitude(&deltas)?;
            Ok(EstimateResult {
                q_hat: sol.q_hat,
                t_hat: recover_translation(&sol.q_hat, &deltas),
                r_hat: cayley(&sol.q_hat),
                info_matrix: sol.info_matrix,
                condition_number: sol.condition_number,
                method_tag: MethodTag::ClosedForm3x3,
                saturation_events: 0,
                a_bar: deltas.a_bar,
                n: deltas.len(),
                sigma_rms: deltas.sigma_rms(),
            })
        }
        Method::Joint6x6 => {
            let sol = solve_joint_6x6(correspondences)?;
            Ok(EstimateResult {
                q_hat: sol.q_hat,
                t_hat: sol.t_hat,
                r_hat: cayley(&sol.q_hat),
                info_matrix: sol.info_matrix,
                condition_number: sol.condition_number,
                method_tag: MethodTag::Joint6x6,
                saturation_events: 0,
                a_bar: deltas.a_bar,
                n: deltas.len(),
                sigma_rms: deltas.sigma_rms(),
            })
        }
        Method::FixedPoint(mode) => fixedpoint::fx_estimate_pose(&deltas, mode),
    }
}

/// `P_q = N⁻¹`.
pub fn attitude_covariance(info_matrix: &Mat3) -> Result<Mat3> {
    mat3_inverse(info_matrix)
}

/// Per-axis `3·sqrt(diag(P))`.
pub fn three_sigma(cov: &Mat3) -> Vec3 {
    Vec3::new(
        3.0 * cov.0[0][0].max(0.0).sqrt(),
        3.0 * cov.0[1][1].max(0.0).sqrt(),
        3.0 * cov.0[2][2].max(0.0).sqrt(),
    )
}

/// `P_t = J P_q Jᵀ + (σ̄²/n)(I + R̂R̂ᵀ)` with `J = ∂(b̄ − R(q)ā)/∂q` by
/// central differences at `q̂`.
pub fn translation_covariance(
    p_q: &Mat3,
    q_hat: &Crp,
    a_bar: &Vec3,
    n: usize,
    sigma_bar: f64,
) -> Mat3 {
    let mut jac = Mat3::ZERO;
    for k in 0..3 {
        let mut plus = q_hat.0;
        let mut minus = q_hat.0;
        plus[k] += JACOBIAN_STEP;
        minus[k] -= JACOBIAN_STEP;
        let d = (cayley(&Crp(minus)) * *a_bar - cayley(&Crp(plus)) * *a_bar)
            * (1.0 / (2.0 * JACOBIAN_STEP));
        for i in 0..3 {
            jac.0[i][k] = d[i];
        }
    }
    let r = cayley(q_hat);
    let centroid = (Mat3::IDENTITY + r * r.transpose()).scale(sigma_bar * sigma_bar / n as f64);
    jac * *p_q * jac.transpose() + centroid
}
