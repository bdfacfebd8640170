//! Seeded synthetic heightfield: a flat plane below the sensor with
//! Gaussian craters and bilinearly interpolated grid roughness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crater {
    pub center: [f64; 2],
    pub depth: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerrainConfig {
    /// Side length of the square patch centered on the world origin (m).
    pub extent: f64,
    /// Grid spacing of the roughness lattice (m).
    pub resolution: f64,
    /// Distance of the reference plane below the world origin (m).
    pub base_depth: f64,
    /// Peak amplitude of the grid roughness (m).
    pub roughness: f64,
    pub craters: Vec<Crater>,
    pub seed: u64,
}

impl Default for TerrainConfig {
    fn default() -> Self {
        TerrainConfig {
            extent: 600.0,
            resolution: 2.0,
            base_depth: 100.0,
            roughness: 0.5,
            craters: vec![
                Crater {
                    center: [-20.0, 10.0],
                    depth: 12.0,
                    radius: 25.0,
                },
                Crater {
                    center: [-60.0, -30.0],
                    depth: 6.0,
                    radius: 12.0,
                },
                Crater {
                    center: [15.0, -25.0],
                    depth: 4.0,
                    radius: 8.0,
                },
            ],
            seed: 7,
        }
    }
}

impl TerrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.extent > 0.0
            && self.resolution > 0.0
            && self.resolution <= self.extent
            && self.base_depth > 0.0
            && self.roughness >= 0.0
            && [self.extent, self.resolution, self.base_depth, self.roughness]
                .iter()
                .all(|v| v.is_finite());
        if !ok {
            return Err(Error::InvalidConfig(format!("invalid terrain: {self:?}")));
        }
        if (self.extent / self.resolution) > 4096.0 {
            return Err(Error::InvalidConfig("terrain grid exceeds 4096 cells per side".into()));
        }
        for c in &self.craters {
            if !(c.radius > 0.0) || !c.depth.is_finite() || !c.center.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidConfig(format!("invalid crater: {c:?}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Terrain {
    config: TerrainConfig,
    cells: usize,
    noise: Vec<f64>,
}

impl Terrain {
    pub fn generate(config: &TerrainConfig) -> Result<Self> {
        config.validate()?;
        let cells = (config.extent / config.resolution).ceil() as usize;
        let nodes = (cells + 1) * (cells + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let noise = (0..nodes).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Ok(Terrain {
            config: config.clone(),
            cells,
            noise,
        })
    }

    pub fn config(&self) -> &TerrainConfig {
        &self.config
    }

    fn node(&self, i: usize, j: usize) -> f64 {
        self.noise[j * (self.cells + 1) + i]
    }

    fn roughness(&self, x: f64, y: f64) -> f64 {
        let half = self.config.extent / 2.0;
        let max = self.cells as f64;
        let gx = ((x + half) / self.config.resolution).clamp(0.0, max);
        let gy = ((y + half) / self.config.resolution).clamp(0.0, max);
        let i = (gx.floor() as usize).min(self.cells - 1);
        let j = (gy.floor() as usize).min(self.cells - 1);
        let fx = gx - i as f64;
        let fy = gy - j as f64;
        let top = self.node(i, j) * (1.0 - fx) + self.node(i + 1, j) * fx;
        let bottom = self.node(i, j + 1) * (1.0 - fx) + self.node(i + 1, j + 1) * fx;
        top * (1.0 - fy) + bottom * fy
    }

    /// World z of the surface at (x, y).
    pub fn height(&self, x: f64, y: f64) -> f64 {
        let craters: f64 = self
            .config
            .craters
            .iter()
            .map(|c| {
                let r2 = (x - c.center[0]).powi(2) + (y - c.center[1]).powi(2);
                -c.depth * (-r2 / (2.0 * c.radius * c.radius)).exp()
            })
            .sum();
        -self.config.base_depth + craters + self.config.roughness * self.roughness(x, y)
    }

    pub fn point(&self, x: f64, y: f64) -> Vec3 {
        Vec3::new(x, y, self.height(x, y))
    }

    /// Deepest the surface can reach below the reference plane.
    pub fn max_relief(&self) -> f64 {
        self.config.craters.iter().map(|c| c.depth.abs()).sum::<f64>() + self.config.roughness
    }
}
