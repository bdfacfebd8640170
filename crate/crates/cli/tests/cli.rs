use std::path::Path;
use std::process::{Command, Output};

fn oltae(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oltae"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("OLTAE_OUT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

/// Data rows of a CSV as split fields.
fn rows(p: &Path) -> Vec<Vec<String>> {
    read(p)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn small(dir: &Path, extra: &[&str]) {
    let mut args = vec!["generate", "--frames", "6", "--points", "40", "--seed", "11"];
    args.extend_from_slice(extra);
    let o = oltae(&args, dir);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn generate_writes_frames_truth_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = oltae(&["generate", "--frames", "25", "--seed", "7", "--points", "20"], dir.path());
    assert_eq!(code(&o), 0);
    let corr = read(&dir.path().join("frames.corr"));
    assert!(corr.starts_with("oltae-corr v1\n"));
    assert_eq!(corr.lines().filter(|l| l.starts_with("frame ")).count(), 24);
    let truth = read(&dir.path().join("truth.txt"));
    assert_eq!(truth.lines().filter(|l| !l.starts_with('#')).count(), 25);
    let echoed = read(&dir.path().join("generate.config"));
    assert!(echoed.contains("seed = 7\n") && echoed.contains("frames = 25\n"));
    assert!(String::from_utf8_lossy(&o.stdout).contains("seed = 7"));
}

#[test]
fn generate_rejects_single_frame() {
    let dir = tempfile::tempdir().unwrap();
    let o = oltae(&["generate", "--frames", "1"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 2 frames"));
}

#[test]
fn generate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    small(a.path(), &[]);
    small(b.path(), &[]);
    for f in ["frames.corr", "truth.txt"] {
        assert_eq!(read(&a.path().join(f)), read(&b.path().join(f)), "{f}");
    }
    let c = tempfile::tempdir().unwrap();
    let o = oltae(&["generate", "--frames", "6", "--points", "40", "--seed", "12"], c.path());
    assert_eq!(code(&o), 0);
    assert_ne!(read(&a.path().join("frames.corr")), read(&c.path().join("frames.corr")));
}

#[test]
fn noise_free_double_path_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    small(dir.path(), &["--sigma", "0"]);
    let o = oltae(&["estimate", "--path", "double"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let truth: Vec<Vec<f64>> = read(&dir.path().join("truth.txt"))
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("oltae"))
        .map(|l| l.split_whitespace().skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    let est = rows(&dir.path().join("estimates_double.csv"));
    assert_eq!(est.len(), truth.len());
    for (row, t) in est.iter().zip(&truth) {
        for k in 0..6 {
            let v: f64 = row[1 + k].parse().unwrap();
            assert!((v - t[k]).abs() < 1e-9, "state {k}: {v} vs {}", t[k]);
        }
    }
}

#[test]
fn all_paths_agree_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    small(dir.path(), &[]);
    let o = oltae(&["estimate", "--path", "all"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("raw outputs identical"));
    let fixed = rows(&dir.path().join("estimates_fixed.csv"));
    let hw = rows(&dir.path().join("estimates_hwsim.csv"));
    assert_eq!(fixed.len(), 5);
    for (a, b) in fixed.iter().zip(&hw) {
        assert_eq!(a[14..17], b[14..17]);
        assert_ne!(a[14], "-");
    }
    let double = rows(&dir.path().join("estimates_double.csv"));
    assert_eq!(double[0][14], "-");
}

#[test]
fn missing_input_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = oltae(&["estimate"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("frames.corr"));
}

#[test]
fn degenerate_input_is_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let corr = "oltae-corr v1\nframe 0\n0 0 0 0 0 0 1\n1 0 0 1 0 0 1\n2 0 0 2 0 0 1\n3 0 0 3 0 0 1\n";
    std::fs::write(dir.path().join("frames.corr"), corr).unwrap();
    let o = oltae(&["estimate", "--path", "double"], dir.path());
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("frame 0"));
}

#[test]
fn compare_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    small(dir.path(), &[]);
    assert_eq!(code(&oltae(&["estimate"], dir.path())), 0);

    let o = oltae(&["compare"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["report.csv", "estimates.dat", "errors.dat", "reldev.dat", "summary.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert_eq!(rows(&dir.path().join("report.csv")).len(), 5);

    let o = oltae(&["compare", "--max-dev-percent", "0.001"], dir.path());
    assert_eq!(code(&o), 4);

    let o = oltae(&["compare", "--baseline", "fixed", "--candidate", "hwsim"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(read(&dir.path().join("summary.txt")).contains("max_rel_dev_percent = 0.0000000000000000e0"));
}

#[test]
fn config_file_and_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.config");
    std::fs::write(&cfg, "# test\nseed = 3\nframes = 3\npoints = 25\n").unwrap();
    let o = oltae(&["generate", "--config", cfg.to_str().unwrap(), "--frames", "4"], dir.path());
    assert_eq!(code(&o), 0);
    let corr = read(&dir.path().join("frames.corr"));
    assert_eq!(corr.lines().filter(|l| l.starts_with("frame ")).count(), 3);
    let echoed = read(&dir.path().join("generate.config"));
    assert!(echoed.contains("seed = 3\n") && echoed.contains("frames = 4\n"));

    std::fs::write(&cfg, "speed = 3\n").unwrap();
    let o = oltae(&["generate", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn echoed_config_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    small(dir.path(), &[]);
    assert_eq!(code(&oltae(&["estimate", "--path", "all"], dir.path())), 0);
    let first: Vec<_> = ["double", "fixed", "hwsim"]
        .iter()
        .map(|p| read(&dir.path().join(format!("estimates_{p}.csv"))))
        .collect();
    let echoed = dir.path().join("estimate.config");
    let o = oltae(&["estimate", "--config", echoed.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0);
    for (p, before) in ["double", "fixed", "hwsim"].iter().zip(first) {
        assert_eq!(read(&dir.path().join(format!("estimates_{p}.csv"))), before);
    }
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_oltae"))
        .args(["generate", "--frames", "2", "--points", "10"])
        .env("OLTAE_OUT", &target)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(target.join("frames.corr").exists());
}

#[test]
fn hwsim_trace_and_report() {
    let dir = tempfile::tempdir().unwrap();
    small(dir.path(), &[]);
    let o = oltae(&["hwsim-trace", "--frame", "2"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let trace = read(&dir.path().join("hwsim_trace_2.txt"));
    let lines: Vec<_> = trace.lines().collect();
    assert_eq!(lines[1], "W 0x02 COUNT    0x00000028");
    assert!(lines.contains(&"S IDLE -> COMPUTE"));
    assert!(lines.contains(&"S COMPUTE -> DONE"));
    assert!(lines.contains(&"S DONE -> IDLE"));
    assert_eq!(lines.iter().filter(|l| l.starts_with("W 0x03")).count(), 40 * 7);

    assert_eq!(code(&oltae(&["hwsim-trace", "--frame", "99"], dir.path())), 2);

    assert_eq!(code(&oltae(&["estimate"], dir.path())), 0);
    assert_eq!(code(&oltae(&["compare"], dir.path())), 0);
    let plots = dir.path().join("plots");
    let o = Command::new(env!("CARGO_BIN_EXE_oltae"))
        .args(["report", "--format", "plotdata", "--input"])
        .arg(dir.path())
        .arg("--out")
        .arg(&plots)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&plots.join("reldev.dat")).lines().count(), 6);
}
