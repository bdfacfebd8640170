//! Synthetic TRN data: a constant-rate approach trajectory over a seeded
//! crater field, with noisy frame-to-frame 3D correspondences. Also reads
//! and writes the line-oriented correspondence and truth files.

mod files;
mod terrain;
mod trajectory;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::estimator::{Correspondence, Pose};
use crate::math::Vec3;

pub use files::{
    ingest_correspondences, ingest_truth, parse_correspondences, parse_truth, write_correspondences,
    write_truth, CORR_HEADER, TRUTH_HEADER,
};
pub use terrain::{Crater, Terrain, TerrainConfig};
pub use trajectory::{generate_trajectory, Trajectory, TrajectoryConfig};

/// σ attached to correspondences of a noise-free scenario. The estimator
/// needs σ > 0; with uniform σ its value does not affect the estimate.
pub const NOMINAL_SIGMA: f64 = 1.0;

/// Rejection-sampling attempts allowed per requested point.
const MAX_ATTEMPTS_PER_POINT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaModel {
    Constant,
    /// `σⱼ = σ · ‖aⱼ‖ / reference_range`
    RangeScaled { reference_range: f64 },
}

/// One frame-to-frame step: `b = R·a + t` maps frame k into frame k+1.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFrame {
    pub frame_index: usize,
    pub truth_pose: Option<Pose>,
    pub correspondences: Vec<Correspondence>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingConfig {
    pub n_points: usize,
    /// Per-axis noise standard deviation (m).
    pub sigma: f64,
    pub sigma_model: SigmaModel,
    /// Full cone angle of the sensor, boresight along −z.
    pub fov_deg: f64,
    /// Points closer than this to the sensor are discarded (m).
    pub min_range: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            n_points: 100,
            sigma: 0.02,
            sigma_model: SigmaModel::Constant,
            fov_deg: 60.0,
            min_range: 1.0,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_points == 0 {
            return Err(Error::InvalidConfig("n_points must be positive".into()));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidConfig(format!("sigma must be ≥ 0, got {}", self.sigma)));
        }
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return Err(Error::InvalidConfig(format!("fov must be in (0, 180), got {}", self.fov_deg)));
        }
        if !(self.min_range >= 0.0) || !self.min_range.is_finite() {
            return Err(Error::InvalidConfig("min_range must be ≥ 0".into()));
        }
        if let SigmaModel::RangeScaled { reference_range } = self.sigma_model {
            if !(reference_range > 0.0) || !reference_range.is_finite() {
                return Err(Error::InvalidConfig("reference_range must be > 0".into()));
            }
        }
        Ok(())
    }

    fn visible(&self, p: &Vec3) -> bool {
        let depth = -p.z;
        let half = (self.fov_deg / 2.0).to_radians();
        depth > 0.0 && p.norm() >= self.min_range && p.x.hypot(p.y) <= half.tan() * depth
    }
}

/// Samples `n_points` terrain points seen from the frame whose world→frame
/// pose is `view`, keeps those also visible after `truth`, and perturbs the
/// second observation with per-axis Gaussian noise.
pub fn sample_correspondences(
    terrain: &Terrain,
    view: &Pose,
    truth: &Pose,
    sampling: &SamplingConfig,
    seed: u64,
    stream: u64,
) -> Result<Vec<Correspondence>> {
    sampling.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);

    // sensor position and footprint in world coordinates
    let r_view = view.rotation();
    let eye = -(r_view.transpose() * view.t);
    let altitude = eye.z + terrain.config().base_depth + terrain.max_relief();
    if !(altitude > 0.0) {
        return Err(Error::InvalidConfig("sensor is below the terrain".into()));
    }
    let half_width = altitude * (sampling.fov_deg / 2.0).to_radians().tan() * 1.2;

    let mut out = Vec::with_capacity(sampling.n_points);
    let mut attempts = 0usize;
    while out.len() < sampling.n_points {
        attempts += 1;
        if attempts > MAX_ATTEMPTS_PER_POINT * sampling.n_points {
            return Err(Error::InvalidConfig(format!(
                "only {} of {} points visible in both frames",
                out.len(),
                sampling.n_points
            )));
        }
        let x = eye.x + rng.random_range(-half_width..=half_width);
        let y = eye.y + rng.random_range(-half_width..=half_width);
        let a = view.apply(&terrain.point(x, y));
        let b_true = truth.apply(&a);
        if !sampling.visible(&a) || !sampling.visible(&b_true) {
            continue;
        }
        let sigma = match sampling.sigma_model {
            SigmaModel::Constant => sampling.sigma,
            SigmaModel::RangeScaled { reference_range } => sampling.sigma * a.norm() / reference_range,
        };
        let b = if sigma > 0.0 {
            let normal = Normal::new(0.0, sigma)
                .map_err(|e| Error::InvalidConfig(format!("noise model: {e}")))?;
            b_true + Vec3::new(normal.sample(&mut rng), normal.sample(&mut rng), normal.sample(&mut rng))
        } else {
            b_true
        };
        let reported = if sigma > 0.0 { sigma } else { NOMINAL_SIGMA };
        out.push(Correspondence::new(a, b, reported)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub trajectory: TrajectoryConfig,
    pub terrain: TerrainConfig,
    pub sampling: SamplingConfig,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let terrain = TerrainConfig::default();
        ScenarioConfig {
            seed: terrain.seed,
            trajectory: TrajectoryConfig::default(),
            terrain,
            sampling: SamplingConfig::default(),
        }
    }
}

/// One frame per relative pose; frame k uses RNG stream k of `seed`.
pub fn generate_scenario(config: &ScenarioConfig) -> Result<Vec<ScenarioFrame>> {
    let trajectory = generate_trajectory(&config.trajectory)?;
    let terrain = Terrain::generate(&config.terrain)?;
    trajectory
        .relative
        .iter()
        .enumerate()
        .map(|(k, rel)| {
            let correspondences = sample_correspondences(
                &terrain,
                &trajectory.absolute[k],
                rel,
                &config.sampling,
                config.seed,
                k as u64,
            )?;
            Ok(ScenarioFrame {
                frame_index: k,
                truth_pose: Some(*rel),
                correspondences,
            })
        })
        .collect()
}
