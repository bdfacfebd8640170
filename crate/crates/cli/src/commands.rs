use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use oltae::analysis::{
    emit_report, parse_csv, relative_deviation_states, state_vector, FrameReport, ReportFormat,
    RunSummary, MOTION_STATES,
};
use oltae::estimator::{
    attitude_covariance, build_deltas, estimate_pose, normal_equations, recover_translation,
    three_sigma, translation_covariance, DeltaSet, Method,
};
use oltae::fixedpoint::{dequantize_vec, fx_estimate_attitude, quantize_terms, FxStatus, ScaleConfig, ScaleMode};
use oltae::hwsim::{core_run_traced, CycleModel, RegisterFile};
use oltae::scenario::{
    generate_scenario, ingest_correspondences, ingest_truth, write_correspondences, write_truth, ScenarioFrame,
};
use oltae::{Crp, Error, Pose, Vec3};

use crate::config::{RunConfig, SolverPath};
use crate::results::{self, EstimateRow};
use crate::CliError;

pub const FRAMES_FILE: &str = "frames.corr";
pub const TRUTH_FILE: &str = "truth.txt";

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    }
    std::fs::write(path, body).map_err(|e| io(path, e))
}

fn io(path: &Path, source: std::io::Error) -> CliError {
    CliError::Core(Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Prints the resolved configuration and stores it next to the outputs.
pub fn echo_config(cfg: &RunConfig, command: &str) -> Result<PathBuf, CliError> {
    let body = cfg.render();
    println!("# resolved configuration ({command})");
    print!("{body}");
    let path = cfg.out.join(format!("{command}.config"));
    write_file(&path, &body)?;
    Ok(path)
}

pub fn generate(cfg: &RunConfig) -> Result<(), CliError> {
    let frames = generate_scenario(&cfg.scenario()?)?;
    write_file(&cfg.out.join(FRAMES_FILE), &write_correspondences(&frames))?;
    write_file(&cfg.out.join(TRUTH_FILE), &write_truth(&frames))?;
    let n: usize = frames.iter().map(|f| f.correspondences.len()).sum();
    println!("wrote {} frames ({n} correspondences) to {}", frames.len(), cfg.out.display());
    Ok(())
}

fn load_truth(dir: &Path) -> Result<Option<std::collections::HashMap<usize, Pose>>, CliError> {
    let path = dir.join(TRUTH_FILE);
    if path.exists() {
        Ok(Some(ingest_truth(&path)?))
    } else {
        Ok(None)
    }
}

fn bands(deltas: &DeltaSet, q_hat: &Crp) -> Result<(Vec3, Vec3), Error> {
    let (info, _) = normal_equations(deltas);
    let p_q = attitude_covariance(&info)?;
    let p_t = translation_covariance(&p_q, q_hat, &deltas.a_bar, deltas.len(), deltas.sigma_rms());
    Ok((three_sigma(&p_q), three_sigma(&p_t)))
}

/// Fixed-point attitude words and status, from either implementation.
fn fixed_words(deltas: &DeltaSet, scales: &ScaleConfig, hardware: bool) -> Result<([i32; 3], u64, Option<u64>), Error> {
    if hardware {
        let mut status = FxStatus::default();
        let terms = quantize_terms(deltas, scales, &mut status);
        let run = core_run_traced(&RegisterFile::load(&terms), CycleModel::default())?;
        Ok((
            run.q_prime.map(|v| v.raw()),
            status.saturation_count + run.saturation_count as u64,
            Some(run.report.modeled_cycles),
        ))
    } else {
        let att = fx_estimate_attitude(deltas, scales)?;
        Ok((att.q_prime.map(|v| v.raw()), att.status.saturation_count, None))
    }
}

pub fn estimate_frame(frame: &ScenarioFrame, path: SolverPath, scale: &ScaleMode) -> Result<EstimateRow, Error> {
    let deltas = build_deltas(&frame.correspondences)?;
    match path {
        SolverPath::Double => {
            let est = estimate_pose(&frame.correspondences, &Method::ClosedForm3x3)?;
            let (sigma3_q, sigma3_t) = bands(&deltas, &est.q_hat)?;
            Ok(EstimateRow {
                frame: frame.frame_index,
                q: est.q_hat,
                t: est.t_hat,
                sigma3_q,
                sigma3_t,
                saturation_count: 0,
                q_raw: None,
                scales: None,
                modeled_cycles: None,
            })
        }
        SolverPath::Fixed | SolverPath::Hwsim => {
            let scales = ScaleConfig::resolve(scale, &deltas)?;
            let (raw, saturations, cycles) = fixed_words(&deltas, &scales, path == SolverPath::Hwsim)?;
            let words = raw.map(oltae::Fixed32::from_raw);
            let q = Crp(dequantize_vec(&words) * (scales.alpha / scales.beta));
            let (sigma3_q, sigma3_t) = bands(&deltas, &q)?;
            Ok(EstimateRow {
                frame: frame.frame_index,
                q,
                t: recover_translation(&q, &deltas),
                sigma3_q,
                sigma3_t,
                saturation_count: saturations,
                q_raw: Some(raw),
                scales: Some((scales.alpha, scales.beta)),
                modeled_cycles: cycles,
            })
        }
        SolverPath::All => unreachable!("expanded by the caller"),
    }
}

fn estimates_path(dir: &Path, path: SolverPath) -> PathBuf {
    dir.join(format!("estimates_{}.csv", path.as_str()))
}

pub fn estimate(cfg: &RunConfig) -> Result<(), CliError> {
    let frames = ingest_correspondences(cfg.input.join(FRAMES_FILE))?;
    let truth = load_truth(&cfg.input)?;
    let scale = cfg.scale()?;
    let mut raws: Vec<(SolverPath, Vec<Option<[i32; 3]>>)> = Vec::new();
    for path in cfg.path.expand() {
        let rows = frames
            .par_iter()
            .map(|f| {
                estimate_frame(f, path, &scale).map_err(|source| CliError::Frame {
                    frame: f.frame_index,
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let out = estimates_path(&cfg.out, path);
        write_file(&out, &results::render(&rows))?;
        let sat: u64 = rows.iter().map(|r| r.saturation_count).sum();
        let mut line = format!("{}: {} frames -> {}", path.as_str(), rows.len(), out.display());
        if let Some(truth) = &truth {
            let (mut eq, mut et) = (0.0_f64, 0.0_f64);
            for r in &rows {
                if let Some(p) = truth.get(&r.frame) {
                    eq = eq.max((r.q.0 - p.q.0).norm_inf());
                    et = et.max((r.t - p.t).norm_inf());
                }
            }
            let _ = write!(line, "; max truth error q {eq:.3e}, t {et:.3e}");
        }
        if path != SolverPath::Double {
            let _ = write!(line, "; saturations {sat}");
        }
        println!("{line}");
        raws.push((path, rows.iter().map(|r| r.q_raw).collect()));
    }
    let fixed = raws.iter().find(|(p, _)| *p == SolverPath::Fixed);
    let hw = raws.iter().find(|(p, _)| *p == SolverPath::Hwsim);
    if let (Some((_, a)), Some((_, b))) = (fixed, hw) {
        if let Some(k) = a.iter().zip(b).position(|(x, y)| x != y) {
            return Err(CliError::BitMismatch {
                frame: frames[k].frame_index,
            });
        }
        println!("fixed and hwsim raw outputs identical on {} frames", a.len());
    }
    Ok(())
}

fn frame_reports(
    base: &[EstimateRow],
    cand: &[EstimateRow],
    truth: Option<&std::collections::HashMap<usize, Pose>>,
) -> Result<Vec<FrameReport>, Error> {
    if base.len() != cand.len() {
        return Err(Error::LengthMismatch {
            left: base.len(),
            right: cand.len(),
        });
    }
    let nan = Vec3::new(f64::NAN, f64::NAN, f64::NAN);
    base.iter()
        .zip(cand)
        .map(|(b, c)| {
            if b.frame != c.frame {
                return Err(Error::InvalidConfig(format!(
                    "frame {} compared against frame {}",
                    b.frame, c.frame
                )));
            }
            let truth = truth.and_then(|t| t.get(&b.frame)).copied();
            Ok(FrameReport {
                frame_index: b.frame,
                q_true: truth.map_or(Crp(nan), |p| p.q),
                q_dp: b.q,
                q_fx: c.q,
                t_true: truth.map_or(nan, |p| p.t),
                t_dp: b.t,
                t_fx: c.t,
                sigma3_q: b.sigma3_q,
                sigma3_t: b.sigma3_t,
                rel_dev_percent: relative_deviation_states(&state_vector(&b.q, &b.t), &state_vector(&c.q, &c.t)).percent,
                saturation_count: c.saturation_count,
            })
        })
        .collect()
}

fn finish_summary(cfg: &RunConfig, reports: &[FrameReport]) -> Result<RunSummary, CliError> {
    let summary = RunSummary::from_reports(reports, &MOTION_STATES)?;
    let body = summary.render();
    write_file(&cfg.out.join("summary.txt"), &body)?;
    print!("{body}");
    Ok(summary)
}

pub fn compare(cfg: &RunConfig) -> Result<(), CliError> {
    let base = results::read(&estimates_path(&cfg.input, cfg.baseline))?;
    let cand = results::read(&estimates_path(&cfg.input, cfg.candidate))?;
    let truth = load_truth(&cfg.input)?;
    let reports = frame_reports(&base, &cand, truth.as_ref())?;
    println!("comparing {} (candidate) against {} (baseline)", cfg.candidate.as_str(), cfg.baseline.as_str());
    for format in [ReportFormat::Csv, ReportFormat::PlotData] {
        for p in emit_report(&reports, format, &cfg.out)? {
            println!("wrote {}", p.display());
        }
    }
    let summary = finish_summary(cfg, &reports)?;
    if summary.max_rel_dev_percent > cfg.max_dev_percent {
        return Err(CliError::Threshold {
            max: summary.max_rel_dev_percent,
            limit: cfg.max_dev_percent,
        });
    }
    Ok(())
}

pub fn report(cfg: &RunConfig) -> Result<(), CliError> {
    let path = cfg.input.join("report.csv");
    let text = std::fs::read_to_string(&path).map_err(|e| io(&path, e))?;
    let reports = parse_csv(&text)?;
    let format: ReportFormat = cfg.format.parse()?;
    for p in emit_report(&reports, format, &cfg.out)? {
        println!("wrote {}", p.display());
    }
    finish_summary(cfg, &reports)?;
    Ok(())
}

pub fn hwsim_trace(cfg: &RunConfig) -> Result<(), CliError> {
    let frames = ingest_correspondences(cfg.input.join(FRAMES_FILE))?;
    let frame = frames
        .iter()
        .find(|f| f.frame_index == cfg.frame)
        .ok_or_else(|| Error::InvalidConfig(format!("no frame {} in input", cfg.frame)))?;
    let with_frame = |source| CliError::Frame {
        frame: cfg.frame,
        source,
    };
    let deltas = build_deltas(&frame.correspondences).map_err(with_frame)?;
    let scales = ScaleConfig::resolve(&cfg.scale()?, &deltas).map_err(with_frame)?;
    let mut status = FxStatus::default();
    let terms = quantize_terms(&deltas, &scales, &mut status);
    let run = core_run_traced(&RegisterFile::load(&terms), CycleModel::default()).map_err(with_frame)?;

    let mut body = String::new();
    let _ = writeln!(body, "# frame {} n {} alpha {:?} beta {:?}", cfg.frame, terms.len(), scales.alpha, scales.beta);
    for entry in &run.trace {
        let _ = writeln!(body, "{entry}");
    }
    let r = run.report;
    let _ = writeln!(
        body,
        "# q_raw {} {} {} saturations {} mac_ops {} divides {} modeled_cycles {}",
        run.q_prime[0].raw(),
        run.q_prime[1].raw(),
        run.q_prime[2].raw(),
        run.saturation_count as u64 + status.saturation_count,
        r.mac_ops,
        r.divides,
        r.modeled_cycles
    );
    let path = cfg.out.join(format!("hwsim_trace_{}.txt", cfg.frame));
    write_file(&path, &body)?;
    println!(
        "frame {}: {} transactions, {} mac ops, {} divides, {} modeled cycles -> {}",
        cfg.frame,
        run.trace.len(),
        r.mac_ops,
        r.divides,
        r.modeled_cycles,
        path.display()
    );
    Ok(())
}
