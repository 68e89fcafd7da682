use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn angcorr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_angcorr"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Non-comment CSV rows after the header.
fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn broken_exponential_spectrum_oscillates() {
    let dir = tempfile::tempdir().unwrap();
    let o = angcorr(
        dir.path(),
        &[
            "--out-dir",
            "out",
            "transform",
            "--model",
            "c2",
            "--ell-max",
            "2000",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("first peaks at"));
    let spectrum = dir.path().join("out/spectrum.csv");
    assert_eq!(rows(&spectrum).len(), 2001);
    let o = angcorr(
        dir.path(),
        &["--out-dir", "out", "analyze", "--input", "out/spectrum.csv"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("oscillation_detected=true"),
        "{}",
        stdout(&o)
    );
    let report = fs::read_to_string(dir.path().join("out/peaks.csv")).unwrap();
    assert!(report.contains("# input=spectrum.csv"));
    assert!(report.contains("location,height,prominence"));
}

#[test]
fn double_exponential_spectrum_does_not() {
    let dir = tempfile::tempdir().unwrap();
    let o = angcorr(
        dir.path(),
        &["transform", "--model", "c1", "--output", "c1.csv"],
    );
    assert_eq!(o.status.code(), Some(0));
    let o = angcorr(dir.path(), &["analyze", "--input", "c1.csv"]);
    assert!(stdout(&o).contains("oscillation_detected=false"));
}

#[test]
fn constant_spectrum_has_no_peaks() {
    let dir = tempfile::tempdir().unwrap();
    let body: String = std::iter::once("ell_or_k,value\n".to_string())
        .chain((0..100).map(|l| format!("{l},1.5\n")))
        .collect();
    fs::write(dir.path().join("flat.csv"), body).unwrap();
    let o = angcorr(dir.path(), &["analyze", "--input", "flat.csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("n_peaks=0 oscillation_detected=false"));
}

#[test]
fn synthesis_and_transform_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cl: Vec<f64> = (0..=32)
        .map(|l| 1.0 / (1.0 + l as f64).powf(1.5) + 0.01 * (l % 3) as f64)
        .collect();
    let body: String = std::iter::once("ell_or_k,value\n".to_string())
        .chain(cl.iter().enumerate().map(|(l, c)| format!("{l},{c}\n")))
        .collect();
    fs::write(dir.path().join("band.csv"), body).unwrap();
    let o = angcorr(
        dir.path(),
        &[
            "transform",
            "--mode",
            "synthesis",
            "--input",
            "band.csv",
            "--theta-points",
            "4001",
            "--output",
            "corr.csv",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = angcorr(
        dir.path(),
        &[
            "transform",
            "--input",
            "corr.csv",
            "--ell-max",
            "32",
            "--output",
            "back.csv",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let back = rows(&dir.path().join("back.csv"));
    for (c, row) in cl.iter().zip(&back) {
        let v: f64 = row[1].parse().unwrap();
        assert!((v - c).abs() <= 1e-8 * c.abs(), "{v} vs {c}");
    }
}

#[test]
fn mc_is_reproducible_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let o = angcorr(
            dir.path(),
            &[
                "--seed",
                "42",
                "--threads",
                threads,
                "mc",
                "--case",
                "b",
                "--realizations",
                "6",
                "--output",
                name,
            ],
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read(dir.path().join(name)).unwrap()
    };
    let a = run("1", "a.csv");
    assert_eq!(a, run("1", "b.csv"));
    assert_eq!(a, run("8", "c.csv"));
    let text = String::from_utf8(a).unwrap();
    assert!(
        text.contains("# seed=42\n")
            && text.contains("# n_c=80\n")
            && text.contains("# realizations=6\n")
    );
    assert!(text.contains("theta_deg,mean,rms,n_pairs"));
    assert!(!text.contains("threads"));
}

#[test]
fn single_realization_leaves_rms_empty() {
    let dir = tempfile::tempdir().unwrap();
    let o = angcorr(
        dir.path(),
        &["mc", "--realizations", "1", "--output", "one.csv"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(rows(&dir.path().join("one.csv"))
        .iter()
        .all(|r| r[2].is_empty()));
}

#[test]
fn infeasible_packing_is_a_computation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = angcorr(dir.path(), &["mc", "--case", "b", "--n-c", "100000"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("packing"));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(angcorr(dir.path(), &["bogus"]).status.code(), Some(1));
    assert_eq!(
        angcorr(dir.path(), &["mc", "--radius", "abc"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        angcorr(dir.path(), &["toy1", "--case", "z"]).status.code(),
        Some(1)
    );
    assert_eq!(angcorr(dir.path(), &["transform"]).status.code(), Some(1));
    let o = angcorr(
        dir.path(),
        &[
            "toy2",
            "--variant",
            "distance",
            "--r-min",
            "5",
            "--r-max",
            "5",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(angcorr(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_csv_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.csv"),
        "# x=1\nell_or_k,value\n0,1\n1,oops\n",
    )
    .unwrap();
    let o = angcorr(dir.path(), &["analyze", "--input", "bad.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.conf"),
        "# ensemble\nn_c = 40\nrealizations = 2\nseed = 5\nhard_core = true\n",
    )
    .unwrap();
    let o = angcorr(
        dir.path(),
        &[
            "--config", "run.conf", "mc", "--n-p", "50", "--output", "m.csv",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("m.csv")).unwrap();
    for line in [
        "# n_c=40",
        "# n_p=50",
        "# seed=5",
        "# hard_core=true",
        "# realizations=2",
    ] {
        assert!(text.contains(line), "{line}");
    }
    fs::write(dir.path().join("typo.conf"), "n_cc = 40\n").unwrap();
    let o = angcorr(dir.path(), &["--config", "typo.conf", "mc"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("n_cc"));
}

#[test]
fn toy1_flattens_to_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let o = angcorr(
        dir.path(),
        &[
            "toy1",
            "--case",
            "a",
            "--theta-max",
            "5deg",
            "--theta-points",
            "10",
            "--output",
            "a.csv",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let level: f64 = stdout(&o)
        .lines()
        .find_map(|l| l.strip_prefix("uncorrelated large-separation level "))
        .unwrap()
        .parse()
        .unwrap();
    let table = rows(&dir.path().join("a.csv"));
    for row in &table[table.len() - 3..] {
        let v: f64 = row[1].parse().unwrap();
        assert!((v - level).abs() < 1e-4 * level, "{v} vs {level}");
    }
    let first: f64 = table[0][1].parse().unwrap();
    assert!(first > 1.5 * level);
}

#[test]
fn toy2_writes_three_files_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = angcorr(dir.path(), &["--gnuplot", "toy2", "--variant", "distance"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("oscillation_detected=true"));
    for f in [
        "toy2_distance_correlation.csv",
        "toy2_distance_spectrum.csv",
        "toy2_distance_peaks.csv",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert!(dir.path().join("toy2_distance_spectrum.gp").exists());
}
