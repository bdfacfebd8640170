//! Per-path estimate files (`estimates_<path>.csv`).

use std::fmt::Write as _;
use std::path::Path;

use oltae::{Crp, Error, Vec3};

pub const HEADER: &str = "frame,q1,q2,q3,t1,t2,t3,sigma3_q1,sigma3_q2,sigma3_q3,\
sigma3_t1,sigma3_t2,sigma3_t3,saturation_count,q_raw1,q_raw2,q_raw3,alpha,beta,modeled_cycles";

const NA: &str = "-";

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub frame: usize,
    pub q: Crp,
    pub t: Vec3,
    pub sigma3_q: Vec3,
    pub sigma3_t: Vec3,
    pub saturation_count: u64,
    /// Pre-rescale Q15.16 words, fixed-point paths only.
    pub q_raw: Option<[i32; 3]>,
    pub scales: Option<(f64, f64)>,
    pub modeled_cycles: Option<u64>,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or(NA.to_string(), |v| v.to_string())
}

pub fn render(rows: &[EstimateRow]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in rows {
        let mut f = vec![r.frame.to_string()];
        for v in [r.q.0, r.t, r.sigma3_q, r.sigma3_t] {
            f.extend(v.to_array().map(num));
        }
        f.push(r.saturation_count.to_string());
        for k in 0..3 {
            f.push(opt(r.q_raw.map(|q| q[k])));
        }
        f.push(opt(r.scales.map(|s| num(s.0))));
        f.push(opt(r.scales.map(|s| num(s.1))));
        f.push(opt(r.modeled_cycles));
        let _ = writeln!(out, "{}", f.join(","));
    }
    out
}

pub fn parse(text: &str, path: &Path) -> Result<Vec<EstimateRow>, Error> {
    let err = |line: usize, column: usize, message: String| Error::Parse {
        line,
        column,
        message: format!("{}: {message}", path.display()),
    };
    let mut lines = text.lines().enumerate();
    if lines.next().map(|(_, h)| h.trim()) != Some(HEADER) {
        return Err(err(1, 1, "unexpected header".into()));
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let n = i + 1;
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 20 {
            return Err(err(n, 1, format!("expected 20 columns, found {}", f.len())));
        }
        let bad = |c: usize| err(n, c + 1, format!("invalid value `{}`", f[c]));
        let float = |c: usize| f[c].parse::<f64>().map_err(|_| bad(c));
        let v3 = |c: usize| -> Result<Vec3, Error> { Ok(Vec3::new(float(c)?, float(c + 1)?, float(c + 2)?)) };
        let maybe = |c: usize| f[c] != NA;
        let q_raw = if maybe(14) {
            let mut q = [0i32; 3];
            for k in 0..3 {
                q[k] = f[14 + k].parse().map_err(|_| bad(14 + k))?;
            }
            Some(q)
        } else {
            None
        };
        rows.push(EstimateRow {
            frame: f[0].parse().map_err(|_| bad(0))?,
            q: Crp(v3(1)?),
            t: v3(4)?,
            sigma3_q: v3(7)?,
            sigma3_t: v3(10)?,
            saturation_count: f[13].parse().map_err(|_| bad(13))?,
            q_raw,
            scales: if maybe(17) { Some((float(17)?, float(18)?)) } else { None },
            modeled_cycles: if maybe(19) { Some(f[19].parse().map_err(|_| bad(19))?) } else { None },
        });
    }
    Ok(rows)
}

pub fn read(path: &Path) -> Result<Vec<EstimateRow>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let rows = vec![
            EstimateRow {
                frame: 0,
                q: Crp::new(0.1, -0.2, 1.0 / 3.0),
                t: Vec3::new(2.0, 0.0, 1.5),
                sigma3_q: Vec3::new(1e-5, 2e-5, 3e-5),
                sigma3_t: Vec3::new(0.01, 0.02, 0.03),
                saturation_count: 0,
                q_raw: None,
                scales: None,
                modeled_cycles: None,
            },
            EstimateRow {
                frame: 1,
                q: Crp::new(0.0, 0.0, 0.01),
                t: Vec3::new(-1.0, 1e-300, 7.0),
                sigma3_q: Vec3::new(1.0, 1.0, 1.0),
                sigma3_t: Vec3::new(1.0, 1.0, 1.0),
                saturation_count: 4,
                q_raw: Some([-5, 0, i32::MAX]),
                scales: Some((0.125, 64.0)),
                modeled_cycles: Some(1234),
            },
        ];
        let p = Path::new("x.csv");
        assert_eq!(parse(&render(&rows), p).unwrap(), rows);
        assert!(parse("frame\n", p).is_err());
    }
}
