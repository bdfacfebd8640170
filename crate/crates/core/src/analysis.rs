//! Double-vs-fixed comparison, truth errors against predicted 3σ bands,
//! and report files.
//!
//! State order everywhere is `[q1, q2, q3, t1, t2, t3]`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::estimator::{three_sigma, EstimateResult, Pose};
use crate::math::{Crp, Vec3};

/// Denominator floor for relative deviations of near-zero states.
pub const EPS_FLOOR: f64 = 1e-6;

/// Motion-induced states of the default trajectory: q3, t1, t3.
pub const MOTION_STATES: [usize; 3] = [2, 3, 5];

pub const STATE_NAMES: [&str; 6] = ["q1", "q2", "q3", "t1", "t2", "t3"];

pub fn state_vector(q: &Crp, t: &Vec3) -> [f64; 6] {
    [q.0.x, q.0.y, q.0.z, t.x, t.y, t.z]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelDev {
    pub percent: [f64; 6],
    /// The floor replaced `|x_dp|` in the denominator.
    pub floor_limited: [bool; 6],
}

/// `100·|fx − dp| / max(|dp|, ε_floor)` per state.
pub fn relative_deviation_states(dp: &[f64; 6], fx: &[f64; 6]) -> RelDev {
    let mut percent = [0.0; 6];
    let mut floor_limited = [false; 6];
    for i in 0..6 {
        let den = dp[i].abs();
        floor_limited[i] = den < EPS_FLOOR;
        percent[i] = 100.0 * (fx[i] - dp[i]).abs() / den.max(EPS_FLOOR);
    }
    RelDev {
        percent,
        floor_limited,
    }
}

pub fn relative_deviation(dp: &EstimateResult, fx: &EstimateResult) -> RelDev {
    relative_deviation_states(
        &state_vector(&dp.q_hat, &dp.t_hat),
        &state_vector(&fx.q_hat, &fx.t_hat),
    )
}

/// Fraction of per-axis samples with `|error| ≤ bound`.
pub fn coverage_check(errors: &[Vec3], sigma3: &[Vec3]) -> Result<f64> {
    if errors.len() != sigma3.len() {
        return Err(Error::LengthMismatch {
            left: errors.len(),
            right: sigma3.len(),
        });
    }
    if errors.is_empty() {
        return Ok(1.0);
    }
    let inside = errors
        .iter()
        .zip(sigma3)
        .flat_map(|(e, b)| (0..3).map(move |k| e[k].abs() <= b[k]))
        .filter(|&ok| ok)
        .count();
    Ok(inside as f64 / (3 * errors.len()) as f64)
}

/// One row of the comparison. Unknown truth is stored as NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameReport {
    pub frame_index: usize,
    pub q_true: Crp,
    pub q_dp: Crp,
    pub q_fx: Crp,
    pub t_true: Vec3,
    pub t_dp: Vec3,
    pub t_fx: Vec3,
    pub sigma3_q: Vec3,
    pub sigma3_t: Vec3,
    pub rel_dev_percent: [f64; 6],
    pub saturation_count: u64,
}

impl FrameReport {
    /// Bands come from the double-precision result's covariance.
    pub fn from_estimates(
        frame_index: usize,
        truth: Option<Pose>,
        dp: &EstimateResult,
        fx: &EstimateResult,
    ) -> Result<Self> {
        let truth = truth.unwrap_or(Pose::new(
            Crp(Vec3::new(f64::NAN, f64::NAN, f64::NAN)),
            Vec3::new(f64::NAN, f64::NAN, f64::NAN),
        ));
        Ok(FrameReport {
            frame_index,
            q_true: truth.q,
            q_dp: dp.q_hat,
            q_fx: fx.q_hat,
            t_true: truth.t,
            t_dp: dp.t_hat,
            t_fx: fx.t_hat,
            sigma3_q: three_sigma(&dp.attitude_covariance()?),
            sigma3_t: three_sigma(&dp.translation_covariance()?),
            rel_dev_percent: relative_deviation(dp, fx).percent,
            saturation_count: fx.saturation_events,
        })
    }

    pub fn has_truth(&self) -> bool {
        self.q_true.0.is_finite() && self.t_true.is_finite()
    }

    pub fn error_q(&self) -> Vec3 {
        self.q_dp.0 - self.q_true.0
    }

    pub fn error_t(&self) -> Vec3 {
        self.t_dp - self.t_true
    }

    pub fn floor_limited(&self) -> [bool; 6] {
        let dp = state_vector(&self.q_dp, &self.t_dp);
        dp.map(|x| x.abs() < EPS_FLOOR)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// Over the selected motion states.
    pub max_rel_dev_percent: f64,
    /// Per state, over all frames.
    pub max_rel_dev_by_state: [f64; 6],
    pub motion_states: Vec<usize>,
    /// `None` when no frame carries truth.
    pub coverage_fraction_q: Option<f64>,
    pub coverage_fraction_t: Option<f64>,
    pub n_frames: usize,
    pub total_saturations: u64,
}

impl RunSummary {
    pub fn from_reports(reports: &[FrameReport], motion_states: &[usize]) -> Result<Self> {
        if reports.is_empty() {
            return Err(Error::NothingToReport);
        }
        if motion_states.is_empty() || motion_states.iter().any(|&i| i >= 6) {
            return Err(Error::InvalidConfig(format!("invalid state mask {motion_states:?}")));
        }
        let mut by_state = [0.0_f64; 6];
        for r in reports {
            for i in 0..6 {
                by_state[i] = by_state[i].max(r.rel_dev_percent[i]);
            }
        }
        let max = motion_states.iter().map(|&i| by_state[i]).fold(0.0, f64::max);
        let with_truth: Vec<_> = reports.iter().filter(|r| r.has_truth()).collect();
        let (cov_q, cov_t) = if with_truth.is_empty() {
            (None, None)
        } else {
            let eq: Vec<_> = with_truth.iter().map(|r| r.error_q()).collect();
            let bq: Vec<_> = with_truth.iter().map(|r| r.sigma3_q).collect();
            let et: Vec<_> = with_truth.iter().map(|r| r.error_t()).collect();
            let bt: Vec<_> = with_truth.iter().map(|r| r.sigma3_t).collect();
            (Some(coverage_check(&eq, &bq)?), Some(coverage_check(&et, &bt)?))
        };
        Ok(RunSummary {
            max_rel_dev_percent: max,
            max_rel_dev_by_state: by_state,
            motion_states: motion_states.to_vec(),
            coverage_fraction_q: cov_q,
            coverage_fraction_t: cov_t,
            n_frames: reports.len(),
            total_saturations: reports.iter().map(|r| r.saturation_count).sum(),
        })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let mask: Vec<_> = self.motion_states.iter().map(|&i| STATE_NAMES[i]).collect();
        let _ = writeln!(out, "n_frames = {}", self.n_frames);
        let _ = writeln!(out, "motion_states = {}", mask.join(","));
        let _ = writeln!(out, "max_rel_dev_percent = {}", num(self.max_rel_dev_percent));
        for (name, v) in STATE_NAMES.iter().zip(self.max_rel_dev_by_state) {
            let _ = writeln!(out, "max_rel_dev_percent_{name} = {}", num(v));
        }
        let fmt = |c: Option<f64>| c.map_or("n/a".to_string(), |v| format!("{v:.6}"));
        let _ = writeln!(out, "coverage_fraction_q = {}", fmt(self.coverage_fraction_q));
        let _ = writeln!(out, "coverage_fraction_t = {}", fmt(self.coverage_fraction_t));
        let _ = writeln!(out, "total_saturations = {}", self.total_saturations);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    PlotData,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "plotdata" => Ok(ReportFormat::PlotData),
            other => Err(Error::InvalidConfig(format!("unknown report format `{other}`"))),
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_header() -> String {
    let mut cols = vec!["frame".to_string()];
    for (kind, n) in [("q", "true"), ("q", "dp"), ("q", "fx"), ("t", "true"), ("t", "dp"), ("t", "fx")] {
        cols.extend((1..=3).map(|i| format!("{kind}{i}_{n}")));
    }
    cols.extend((1..=3).map(|i| format!("sigma3_q{i}")));
    cols.extend((1..=3).map(|i| format!("sigma3_t{i}")));
    cols.extend(STATE_NAMES.iter().map(|s| format!("rel_dev_{s}")));
    cols.push("saturation_count".into());
    cols.join(",")
}

pub fn render_csv(reports: &[FrameReport]) -> String {
    let mut out = csv_header();
    out.push('\n');
    for r in reports {
        let mut vals: Vec<f64> = Vec::with_capacity(30);
        for v in [r.q_true.0, r.q_dp.0, r.q_fx.0, r.t_true, r.t_dp, r.t_fx, r.sigma3_q, r.sigma3_t] {
            vals.extend(v.to_array());
        }
        vals.extend(r.rel_dev_percent);
        let fields: Vec<_> = vals.into_iter().map(num).collect();
        let _ = writeln!(out, "{},{},{}", r.frame_index, fields.join(","), r.saturation_count);
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<FrameReport>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == csv_header() => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: "unexpected report header".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let n = i + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 32 {
            return Err(Error::Parse {
                line: n,
                column: 1,
                message: format!("expected 32 columns, found {}", fields.len()),
            });
        }
        let bad = |col: usize| Error::Parse {
            line: n,
            column: col + 1,
            message: format!("invalid value `{}`", fields[col]),
        };
        let frame_index = fields[0].parse().map_err(|_| bad(0))?;
        let saturation_count = fields[31].parse().map_err(|_| bad(31))?;
        let mut v = [0.0; 30];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = fields[k + 1].parse().map_err(|_| bad(k + 1))?;
        }
        let v3 = |k: usize| Vec3::new(v[k], v[k + 1], v[k + 2]);
        out.push(FrameReport {
            frame_index,
            q_true: Crp(v3(0)),
            q_dp: Crp(v3(3)),
            q_fx: Crp(v3(6)),
            t_true: v3(9),
            t_dp: v3(12),
            t_fx: v3(15),
            sigma3_q: v3(18),
            sigma3_t: v3(21),
            rel_dev_percent: [v[24], v[25], v[26], v[27], v[28], v[29]],
            saturation_count,
        });
    }
    Ok(out)
}

fn plot_estimates(reports: &[FrameReport]) -> String {
    let mut out = String::from("# frame q1_true q2_true q3_true q1_dp q2_dp q3_dp q1_fx q2_fx q3_fx t1_true t2_true t3_true t1_dp t2_dp t3_dp t1_fx t2_fx t3_fx\n");
    for r in reports {
        let mut vals = Vec::new();
        for v in [r.q_true.0, r.q_dp.0, r.q_fx.0, r.t_true, r.t_dp, r.t_fx] {
            vals.extend(v.to_array().map(num));
        }
        let _ = writeln!(out, "{} {}", r.frame_index, vals.join(" "));
    }
    out
}

fn plot_errors(reports: &[FrameReport]) -> String {
    let mut out = String::from("# frame eq1 eq2 eq3 sigma3_q1 sigma3_q2 sigma3_q3 et1 et2 et3 sigma3_t1 sigma3_t2 sigma3_t3\n");
    for r in reports {
        let mut vals = Vec::new();
        for v in [r.error_q(), r.sigma3_q, r.error_t(), r.sigma3_t] {
            vals.extend(v.to_array().map(num));
        }
        let _ = writeln!(out, "{} {}", r.frame_index, vals.join(" "));
    }
    out
}

fn plot_reldev(reports: &[FrameReport]) -> String {
    let mut out = String::from("# frame rel_dev_q1 rel_dev_q2 rel_dev_q3 rel_dev_t1 rel_dev_t2 rel_dev_t3 floor_mask\n");
    for r in reports {
        let vals: Vec<_> = r.rel_dev_percent.iter().map(|v| num(*v)).collect();
        let mask: String = r.floor_limited().iter().map(|&f| if f { '1' } else { '0' }).collect();
        let _ = writeln!(out, "{} {} {}", r.frame_index, vals.join(" "), mask);
    }
    out
}

/// Writes `report.csv`, or `estimates.dat`, `errors.dat` and `reldev.dat`.
pub fn emit_report(reports: &[FrameReport], format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    if reports.is_empty() {
        return Err(Error::NothingToReport);
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files: Vec<(&str, String)> = match format {
        ReportFormat::Csv => vec![("report.csv", render_csv(reports))],
        ReportFormat::PlotData => vec![
            ("estimates.dat", plot_estimates(reports)),
            ("errors.dat", plot_errors(reports)),
            ("reldev.dat", plot_reldev(reports)),
        ],
    };
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
