//! Line-oriented text formats.
//!
//! Correspondences:
//! ```text
//! oltae-corr v1
//! # comment
//! frame 0
//! ax ay az bx by bz sigma
//! ```
//! Truth poses:
//! ```text
//! oltae-truth v1
//! frame q1 q2 q3 t1 t2 t3
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimator::{Correspondence, Pose};
use crate::math::{Crp, Vec3};

use super::ScenarioFrame;

pub const CORR_HEADER: &str = "oltae-corr v1";
pub const TRUTH_HEADER: &str = "oltae-truth v1";

/// 17 significant digits, enough for an exact `f64` roundtrip.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Non-blank, non-comment lines with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        (!l.trim().is_empty()).then_some((i + 1, l))
    })
}

/// Whitespace-separated tokens with their 1-based column.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, tok)| (line[..byte].chars().count() + 1, tok))
        .collect()
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_floats(line: usize, toks: &[(usize, &str)], expected: usize, what: &str) -> Result<Vec<f64>> {
    if toks.len() != expected {
        let column = toks.get(expected).or(toks.last()).map_or(1, |t| t.0);
        return Err(parse_err(
            line,
            column,
            format!("expected {expected} fields for {what}, found {}", toks.len()),
        ));
    }
    toks.iter()
        .map(|&(col, t)| {
            t.parse::<f64>()
                .map_err(|_| parse_err(line, col, format!("invalid number `{t}`")))
        })
        .collect()
}

fn parse_frame_index(line: usize, toks: &[(usize, &str)]) -> Result<usize> {
    match toks {
        [_, (col, k)] => k
            .parse()
            .map_err(|_| parse_err(line, *col, format!("invalid frame index `{k}`"))),
        _ => Err(parse_err(line, 1, "expected `frame <k>`")),
    }
}

fn check_header(text: &str, header: &str) -> Result<Vec<(usize, String)>> {
    let mut lines = content_lines(text).map(|(n, l)| (n, l.trim().to_string()));
    match lines.next() {
        None => Err(parse_err(0, 0, "no frames")),
        Some((n, l)) if l != header => Err(parse_err(n, 1, format!("expected header `{header}`"))),
        Some(_) => Ok(lines.collect()),
    }
}

pub fn parse_correspondences(text: &str) -> Result<Vec<ScenarioFrame>> {
    let body = check_header(text, CORR_HEADER)?;
    let mut frames: Vec<ScenarioFrame> = Vec::new();
    let mut seen_frames = HashSet::new();
    let mut seen_pairs: HashSet<[u64; 6]> = HashSet::new();
    for (n, line) in &body {
        let toks = tokens(line);
        if toks[0].1 == "frame" {
            let k = parse_frame_index(*n, &toks)?;
            if !seen_frames.insert(k) {
                return Err(Error::Validation {
                    line: *n,
                    reason: format!("frame {k} appears twice"),
                });
            }
            frames.push(ScenarioFrame {
                frame_index: k,
                truth_pose: None,
                correspondences: Vec::new(),
            });
            seen_pairs.clear();
            continue;
        }
        let Some(frame) = frames.last_mut() else {
            return Err(parse_err(*n, 1, "record before the first `frame` line"));
        };
        let v = parse_floats(*n, &toks, 7, "a correspondence")?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation {
                line: *n,
                reason: "non-finite value".into(),
            });
        }
        if !(v[6] > 0.0) {
            return Err(Error::Validation {
                line: *n,
                reason: format!("sigma must be > 0, got {}", v[6]),
            });
        }
        let key = [v[0], v[1], v[2], v[3], v[4], v[5]].map(f64::to_bits);
        if !seen_pairs.insert(key) {
            return Err(Error::Validation {
                line: *n,
                reason: "duplicate correspondence within frame".into(),
            });
        }
        frame.correspondences.push(Correspondence {
            a: Vec3::new(v[0], v[1], v[2]),
            b: Vec3::new(v[3], v[4], v[5]),
            sigma: v[6],
        });
    }
    if frames.is_empty() {
        return Err(parse_err(body.last().map_or(0, |l| l.0), 0, "no frames"));
    }
    Ok(frames)
}

pub fn ingest_correspondences(path: impl AsRef<Path>) -> Result<Vec<ScenarioFrame>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_correspondences(&text)
}

pub fn write_correspondences(frames: &[ScenarioFrame]) -> String {
    let mut out = String::new();
    out.push_str(CORR_HEADER);
    out.push('\n');
    out.push_str("# ax ay az bx by bz sigma\n");
    for f in frames {
        let _ = writeln!(out, "frame {}", f.frame_index);
        for c in &f.correspondences {
            let fields = [c.a.x, c.a.y, c.a.z, c.b.x, c.b.y, c.b.z, c.sigma].map(num);
            let _ = writeln!(out, "{}", fields.join(" "));
        }
    }
    out
}

pub fn parse_truth(text: &str) -> Result<HashMap<usize, Pose>> {
    let body = check_header(text, TRUTH_HEADER)?;
    let mut out = HashMap::new();
    for (n, line) in &body {
        let toks = tokens(line);
        if toks.len() != 7 {
            return Err(parse_err(*n, 1, format!("expected 7 fields, found {}", toks.len())));
        }
        let k: usize = toks[0]
            .1
            .parse()
            .map_err(|_| parse_err(*n, 1, format!("invalid frame index `{}`", toks[0].1)))?;
        let v = parse_floats(*n, &toks[1..], 6, "a pose")?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation {
                line: *n,
                reason: "non-finite value".into(),
            });
        }
        let pose = Pose::new(Crp::new(v[0], v[1], v[2]), Vec3::new(v[3], v[4], v[5]));
        if out.insert(k, pose).is_some() {
            return Err(Error::Validation {
                line: *n,
                reason: format!("frame {k} appears twice"),
            });
        }
    }
    Ok(out)
}

pub fn ingest_truth(path: impl AsRef<Path>) -> Result<HashMap<usize, Pose>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_truth(&text)
}

pub fn write_truth(frames: &[ScenarioFrame]) -> String {
    let mut out = String::new();
    out.push_str(TRUTH_HEADER);
    out.push('\n');
    out.push_str("# frame q1 q2 q3 t1 t2 t3\n");
    for f in frames {
        if let Some(p) = f.truth_pose {
            let fields = [p.q.0.x, p.q.0.y, p.q.0.z, p.t.x, p.t.y, p.t.z].map(num);
            let _ = writeln!(out, "{} {}", f.frame_index, fields.join(" "));
        }
    }
    out
}
