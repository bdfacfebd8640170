//! Run configuration: flags, then a flat `key = value` file, then the
//! `OLTAE_OUT` environment variable (output directory only), then defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use oltae::fixedpoint::{ScaleKind, ScaleMode};
use oltae::scenario::{SamplingConfig, ScenarioConfig, SigmaModel, TerrainConfig, TrajectoryConfig};
use oltae::Error;

pub const OUT_ENV: &str = "OLTAE_OUT";

pub const KEYS: &[&str] = &[
    "seed",
    "frames",
    "points",
    "sigma",
    "sigma_model",
    "fov_deg",
    "path",
    "scale_mode",
    "alpha",
    "beta",
    "max_dev_percent",
    "baseline",
    "candidate",
    "frame",
    "format",
    "input",
    "out",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverPath {
    Double,
    Fixed,
    Hwsim,
    All,
}

impl SolverPath {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverPath::Double => "double",
            SolverPath::Fixed => "fixed",
            SolverPath::Hwsim => "hwsim",
            SolverPath::All => "all",
        }
    }

    pub fn expand(&self) -> Vec<SolverPath> {
        match self {
            SolverPath::All => vec![SolverPath::Double, SolverPath::Fixed, SolverPath::Hwsim],
            p => vec![*p],
        }
    }
}

impl FromStr for SolverPath {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "double" => Ok(SolverPath::Double),
            "fixed" => Ok(SolverPath::Fixed),
            "hwsim" => Ok(SolverPath::Hwsim),
            "all" => Ok(SolverPath::All),
            other => Err(Error::InvalidConfig(format!("unknown path `{other}`"))),
        }
    }
}

/// Raw string values by key, lowest precedence first.
#[derive(Debug, Default, Clone)]
pub struct Layers {
    pub file: BTreeMap<String, String>,
    pub flags: BTreeMap<String, String>,
}

impl Layers {
    fn get(&self, key: &str) -> Option<&str> {
        self.flags
            .get(key)
            .or_else(|| self.file.get(key))
            .map(String::as_str)
    }
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, Error> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: i + 1,
                column: 1,
                message: "expected `key = value`".into(),
            });
        };
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(Error::Parse {
                line: i + 1,
                column: 1,
                message: format!("unknown key `{k}`"),
            });
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn load_config_file(path: &Path) -> Result<BTreeMap<String, String>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_config_text(&text)
}

/// Fully resolved parameters shared by all subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub frames: usize,
    pub points: usize,
    pub sigma: f64,
    pub sigma_model: String,
    pub fov_deg: f64,
    pub path: SolverPath,
    pub scale_mode: ScaleKind,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub max_dev_percent: f64,
    pub baseline: SolverPath,
    pub candidate: SolverPath,
    pub frame: usize,
    pub format: String,
    pub input: PathBuf,
    pub out: PathBuf,
}

fn parsed<T: FromStr>(layers: &Layers, key: &str, default: T) -> Result<T, Error> {
    match layers.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("invalid value for {key}: `{v}`"))),
    }
}

fn optional<T: FromStr>(layers: &Layers, key: &str) -> Result<Option<T>, Error> {
    layers
        .get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| Error::InvalidConfig(format!("invalid value for {key}: `{v}`")))
        })
        .transpose()
}

impl RunConfig {
    pub fn resolve(layers: &Layers, env_out: Option<String>) -> Result<Self, Error> {
        let defaults = ScenarioConfig::default();
        let out = match layers.get("out") {
            Some(v) => PathBuf::from(v),
            None => PathBuf::from(env_out.unwrap_or_else(|| "oltae-out".into())),
        };
        let input = layers.get("input").map_or_else(|| out.clone(), PathBuf::from);
        let alpha = optional(layers, "alpha")?;
        let beta = optional(layers, "beta")?;
        let scale_mode = match layers.get("scale_mode") {
            Some(v) => v.parse()?,
            None if alpha.is_some() || beta.is_some() => ScaleKind::Manual,
            None => ScaleKind::AutoPow2,
        };
        let path: SolverPath = parsed(layers, "path", SolverPath::All)?;
        let baseline: SolverPath = parsed(layers, "baseline", SolverPath::Double)?;
        let candidate: SolverPath = parsed(layers, "candidate", SolverPath::Fixed)?;
        if baseline == SolverPath::All || candidate == SolverPath::All {
            return Err(Error::InvalidConfig("compare needs two concrete paths".into()));
        }
        let cfg = RunConfig {
            seed: parsed(layers, "seed", defaults.seed)?,
            frames: parsed(layers, "frames", defaults.trajectory.n_frames)?,
            points: parsed(layers, "points", defaults.sampling.n_points)?,
            sigma: parsed(layers, "sigma", defaults.sampling.sigma)?,
            sigma_model: parsed(layers, "sigma_model", "constant".to_string())?,
            fov_deg: parsed(layers, "fov_deg", defaults.sampling.fov_deg)?,
            path,
            scale_mode,
            alpha,
            beta,
            max_dev_percent: parsed(layers, "max_dev_percent", 7.0)?,
            baseline,
            candidate,
            frame: parsed(layers, "frame", 0)?,
            format: parsed(layers, "format", "csv".to_string())?,
            input,
            out,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Error> {
        if self.max_dev_percent.is_nan() || self.max_dev_percent < 0.0 {
            return Err(Error::InvalidConfig("max_dev_percent must be ≥ 0".into()));
        }
        if !matches!(self.format.as_str(), "csv" | "plotdata") {
            return Err(Error::InvalidConfig(format!("unknown format `{}`", self.format)));
        }
        self.sigma_model()?;
        self.scale()?;
        Ok(())
    }

    pub fn sigma_model(&self) -> Result<SigmaModel, Error> {
        match self.sigma_model.as_str() {
            "constant" => Ok(SigmaModel::Constant),
            "range" => Ok(SigmaModel::RangeScaled {
                reference_range: 100.0,
            }),
            other => Err(Error::InvalidConfig(format!("unknown sigma_model `{other}`"))),
        }
    }

    pub fn scale(&self) -> Result<ScaleMode, Error> {
        match self.scale_mode {
            ScaleKind::AutoPow2 => Ok(ScaleMode::AutoPow2),
            ScaleKind::Manual => match (self.alpha, self.beta) {
                (Some(alpha), Some(beta)) => {
                    oltae::ScaleConfig::manual(alpha, beta)?;
                    Ok(ScaleMode::Manual { alpha, beta })
                }
                _ => Err(Error::InvalidConfig("manual scaling needs both alpha and beta".into())),
            },
        }
    }

    pub fn scenario(&self) -> Result<ScenarioConfig, Error> {
        Ok(ScenarioConfig {
            trajectory: TrajectoryConfig {
                n_frames: self.frames,
                ..TrajectoryConfig::default()
            },
            terrain: TerrainConfig {
                seed: self.seed,
                ..TerrainConfig::default()
            },
            sampling: SamplingConfig {
                n_points: self.points,
                sigma: self.sigma,
                sigma_model: self.sigma_model()?,
                fov_deg: self.fov_deg,
                ..SamplingConfig::default()
            },
            seed: self.seed,
        })
    }

    /// `key = value` lines accepted back by `--config`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("seed", self.seed.to_string());
        kv("frames", self.frames.to_string());
        kv("points", self.points.to_string());
        kv("sigma", format!("{:?}", self.sigma));
        kv("sigma_model", self.sigma_model.clone());
        kv("fov_deg", format!("{:?}", self.fov_deg));
        kv("path", self.path.as_str().into());
        kv("scale_mode", self.scale_mode.to_string());
        if let Some(a) = self.alpha {
            kv("alpha", format!("{a:?}"));
        }
        if let Some(b) = self.beta {
            kv("beta", format!("{b:?}"));
        }
        kv("max_dev_percent", format!("{:?}", self.max_dev_percent));
        kv("baseline", self.baseline.as_str().into());
        kv("candidate", self.candidate.as_str().into());
        kv("frame", self.frame.to_string());
        kv("format", self.format.clone());
        kv("input", self.input.display().to_string());
        kv("out", self.out.display().to_string());
        out
    }
}
