use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn uvnlos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uvnlos")).args(args).output().expect("binary runs")
}

fn config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.cfg");
    fs::write(&p, text).unwrap();
    p
}

const SHAPES: &str = "[turbulence]\nshapes = 6.99, 1.05, 4.59, 1.23\n";

#[test]
fn empty_grid_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &format!("{SHAPES}[snr]\ngrid =\n"));
    let out = dir.path().join("ber.csv");
    let o = uvnlos(&["ber-sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read_to_string(out).unwrap(),
        "cn2,snr_db,scheme,method,error_rate,trunc_bound,stderr,out_of_range,error\r\n"
    );
}

#[test]
fn config_errors_exit_2_before_computing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    for text in [
        format!("{SHAPES}[snr]\ngrid = 0, 40, 1\n[modulation]\nschemes = bpsk, 16qam\n"),
        format!("{SHAPES}[penalty]\ntargets = 0.6\n"),
        "[geometry]\nwobble = 3\n".to_string(),
    ] {
        let cfg = config(dir.path(), &text);
        let o = uvnlos(&["ber-sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert!(!out.exists());
    }
    let o = uvnlos(&["channel", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        &format!("{SHAPES}[snr]\ngrid = 10, 30, 10\n[modulation]\nschemes = bpsk, ncfsk\n[mc]\nsamples = 20000\nstreams = 8\n"),
    );
    let run = |jobs: &str, seed: &str| {
        let o = uvnlos(&["mc", "--config", cfg.to_str().unwrap(), "--jobs", jobs, "--seed", seed]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        o.stdout
    };
    let a = run("1", "5");
    assert_eq!(a, run("4", "5"));
    assert_ne!(a, run("4", "6"));
}

#[test]
fn numeric_failures_keep_rows_and_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // 100 samples cannot produce 100 expected errors.
    let cfg = config(dir.path(), &format!("{SHAPES}[snr]\ngrid = 20\n[modulation]\nschemes = bpsk\n[methods]\nlist = meijer, mc:100\n"));
    let o = uvnlos(&["ber-sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].ends_with(",false,") && rows[2].contains("insufficient samples"));
}

#[test]
fn channel_and_svg_outputs() {
    let o = uvnlos(&["channel"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').take(8).map(|c| c.parse().unwrap()).collect();
    // Default geometry and turbulence.
    assert!((row[4] / 6.99 - 1.0).abs() < 0.02 && (row[5] / 1.05 - 1.0).abs() < 0.02);

    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &format!("{SHAPES}[snr]\ngrid = 0, 30, 10\n"));
    let o = uvnlos(&["ber-sweep", "--config", cfg.to_str().unwrap(), "--format", "svg"]);
    assert!(o.status.success());
    let svg = String::from_utf8(o.stdout).unwrap();
    assert!(svg.starts_with("<svg") && svg.matches("<polyline").count() == 4);
    assert_eq!(uvnlos(&["channel", "--format", "svg"]).status.code(), Some(2));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(root).unwrap() {
        let p = entry.unwrap().path();
        let text = fs::read_to_string(&p).unwrap();
        uvnlos::scenario::RunConfig::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        n += 1;
    }
    assert!(n >= 5);
}

#[test]
fn ellipse_sweep_peaks_at_equal_paths() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/ellipse_long.cfg");
    let o = uvnlos(&["geom-sweep", "--config", root.to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let (angle, _) = text
        .lines()
        .skip(1)
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[1].parse::<f64>().unwrap(), c[12].parse::<f64>().unwrap())
        })
        .fold((0.0, 0.0), |best, p| if p.1 > best.1 { p } else { best });
    assert!((angle - 30.0).abs() < 1e-9);
}
