use crate::error::{Error, Result};
use crate::estimator::Pose;
use crate::math::{Crp, Vec3};

/// Constant-rate approach trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryConfig {
    pub n_frames: usize,
    /// m/s
    pub linear_velocity: Vec3,
    pub angular_velocity_axis: Vec3,
    /// rad/s
    pub angular_rate: f64,
    /// s
    pub frame_dt: f64,
    /// Maps world coordinates into frame 0.
    pub initial_pose: Pose,
}

impl Default for TrajectoryConfig {
    /// 25 frames at 1 Hz; translation along x and z, rotation about z.
    fn default() -> Self {
        TrajectoryConfig {
            n_frames: 25,
            linear_velocity: Vec3::new(2.0, 0.0, 1.5),
            angular_velocity_axis: Vec3::new(0.0, 0.0, 1.0),
            angular_rate: 0.02,
            frame_dt: 1.0,
            initial_pose: Pose::IDENTITY,
        }
    }
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_frames < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 frames, got {}",
                self.n_frames
            )));
        }
        if !(self.frame_dt > 0.0) || !self.frame_dt.is_finite() {
            return Err(Error::InvalidConfig(format!("frame_dt must be > 0, got {}", self.frame_dt)));
        }
        if !self.linear_velocity.is_finite() || !self.angular_rate.is_finite() {
            return Err(Error::InvalidConfig("non-finite velocity".into()));
        }
        if self.angular_velocity_axis.normalized().is_none() || !self.angular_velocity_axis.is_finite() {
            return Err(Error::InvalidConfig("angular velocity axis must be nonzero".into()));
        }
        if (self.angular_rate * self.frame_dt).abs() >= std::f64::consts::PI {
            return Err(Error::InvalidConfig(
                "per-frame rotation must stay below a half turn".into(),
            ));
        }
        Ok(())
    }

    /// Constant frame-to-frame motion: `q = tan(ω·dt/2)·axis`, `t = v·dt`.
    pub fn relative_pose(&self) -> Result<Pose> {
        self.validate()?;
        let q = Crp::from_axis_angle(self.angular_velocity_axis, self.angular_rate * self.frame_dt)
            .ok_or_else(|| Error::InvalidConfig("zero rotation axis".into()))?;
        Ok(Pose::new(q, self.linear_velocity * self.frame_dt))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// World → frame k, for k in `0..n_frames`.
    pub absolute: Vec<Pose>,
    /// Frame k → frame k+1, for k in `0..n_frames-1`.
    pub relative: Vec<Pose>,
}

pub fn generate_trajectory(config: &TrajectoryConfig) -> Result<Trajectory> {
    let rel = config.relative_pose()?;
    let mut absolute = Vec::with_capacity(config.n_frames);
    absolute.push(config.initial_pose);
    for k in 1..config.n_frames {
        let next = rel.compose(&absolute[k - 1])?;
        absolute.push(next);
    }
    Ok(Trajectory {
        absolute,
        relative: vec![rel; config.n_frames - 1],
    })
}
