//! End-to-end runs of the `qtn` binary on small configurations.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn qtn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtn")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run_ok(config: &Path, out: &Path, extra: &[&str]) {
    let mut args = vec!["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = qtn(&args);
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn minimal_analytic_config_gives_cubic_law() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "a.toml", "route = \"analytic\"\n[model]\ndim = 1\n");
    let out = tmp.path().join("out");
    run_ok(&cfg, &out, &[]);
    let csv = std::fs::read_to_string(out.join("msd.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,msd"));
    assert!(!csv.contains('\r'));
    let fit = json(&out.join("fit.json"));
    let e = fit["exponent"].as_f64().unwrap();
    assert!((e - 3.0).abs() < 0.05, "exponent {e}");
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["seed"], 1);
    assert!(manifest["config"].as_str().unwrap().contains("route = \"analytic\""));
}

#[test]
fn vanishing_potential_is_ballistic_on_both_spaces() {
    let tmp = tempfile::tempdir().unwrap();
    let c = write_config(tmp.path(), "c.toml", "route = \"analytic\"\n[model]\nv0 = 0.0\n");
    run_ok(&c, &tmp.path().join("c"), &[]);
    let e = json(&tmp.path().join("c/fit.json"))["exponent"].as_f64().unwrap();
    assert!((e - 2.0).abs() < 0.02, "continuum exponent {e}");

    let l = write_config(
        tmp.path(),
        "l.toml",
        "route = \"evolve\"\n[model]\nspace = \"lattice\"\nv0 = 0.0\n[initial]\nkind = \"point\"\n",
    );
    run_ok(&l, &tmp.path().join("l"), &[]);
    let e = json(&tmp.path().join("l/fit.json"))["exponent"].as_f64().unwrap();
    assert!((e - 2.0).abs() < 0.02, "lattice exponent {e}");
}

#[test]
fn lattice_compare_reports_max_deviation() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "route = \"compare\"\n[model]\nspace = \"lattice\"\n[correlation]\nkind = \"lattice-table\"\nvalues = [0.0, 0.5, 1.0, 0.5, 0.0]\n[initial]\nkind = \"point\"\n[time]\nt_max = 50.0\n[fit]\nwindow = [10.0, 50.0]\n",
    );
    let out = tmp.path().join("out");
    run_ok(&cfg, &out, &[]);
    let report = json(&out.join("report.json"));
    let dev = report["pointwise"][0]["max_rel_deviation"].as_f64().unwrap();
    assert!(dev < 1e-4, "max rel deviation {dev}");
    assert_eq!(report["exponents"].as_array().unwrap().len(), 2);
    assert!(out.join("ratios_evolve_lattice-law.csv").exists());
}

#[test]
fn config_errors_exit_2_with_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", "route = \"analytic\"\n[model]\ndim = 1\nhbarr = 2.0\n");
    let o = qtn(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.toml:4"), "{err}");

    let o = qtn(&["analytic-msd"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "dt.toml",
        "route = \"evolve\"\n[model]\nspace = \"lattice\"\n[initial]\nkind = \"point\"\n[time]\ndt = 0.5\n",
    );
    let o = qtn(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

const SMALL_MC: &str = "route = \"mc\"\nseed = 7\n[grid]\npoints = 128\nlength = 32.0\n[mc]\nn_traj = 16\n[time]\nt_max = 1.0\ndt = 0.02\n[fit]\nwindow = [0.2, 1.0]\n";

#[test]
fn csv_outputs_are_byte_identical_across_runs_and_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "mc.toml", SMALL_MC);
    run_ok(&cfg, &tmp.path().join("a"), &["--threads", "1"]);
    run_ok(&cfg, &tmp.path().join("b"), &["--threads", "3"]);
    run_ok(&cfg, &tmp.path().join("c"), &[]);
    let a = std::fs::read(tmp.path().join("a/ensemble.csv")).unwrap();
    assert_eq!(a, std::fs::read(tmp.path().join("b/ensemble.csv")).unwrap());
    assert_eq!(a, std::fs::read(tmp.path().join("c/ensemble.csv")).unwrap());
    let header = String::from_utf8_lossy(&a).lines().next().unwrap().to_string();
    assert_eq!(header, "t,msd,stderr,energy");

    // The seed flag changes the ensemble.
    run_ok(&cfg, &tmp.path().join("d"), &["--seed", "8"]);
    assert_ne!(a, std::fs::read(tmp.path().join("d/ensemble.csv")).unwrap());
}

#[test]
fn manifest_reruns_the_experiment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "mc.toml", SMALL_MC);
    run_ok(&cfg, &tmp.path().join("a"), &["--seed", "11"]);
    let manifest = json(&tmp.path().join("a/manifest.json"));
    let replay = write_config(tmp.path(), "replay.toml", manifest["config"].as_str().unwrap());
    run_ok(&replay, &tmp.path().join("b"), &[]);
    assert_eq!(
        std::fs::read(tmp.path().join("a/ensemble.csv")).unwrap(),
        std::fs::read(tmp.path().join("b/ensemble.csv")).unwrap()
    );
}

#[test]
fn fit_and_plot_subcommands() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "a.toml", "route = \"analytic\"\n");
    let out = tmp.path().join("a");
    run_ok(&cfg, &out, &[]);
    let csv = out.join("msd.csv");
    let o = qtn(&["fit", "--input", csv.to_str().unwrap(), "--window", "10", "100"]);
    assert!(o.status.success());
    let fit: Value = serde_json::from_slice(&o.stdout).unwrap();
    let e = fit["exponent"].as_f64().unwrap();

    let short = tmp.path().join("short.csv");
    std::fs::write(&short, "t,msd\n1,1\n2,4\n").unwrap();
    let plots = tmp.path().join("p");
    let o = qtn(&[
        "plot",
        "--input",
        csv.to_str().unwrap(),
        "--out",
        plots.to_str().unwrap(),
        "--window",
        "10",
        "100",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = std::fs::read_to_string(plots.join("plot.svg")).unwrap();
    assert!(svg.contains(&format!("slope = {e:.4}")));
    assert!(plots.join("plot.dat").exists() && plots.join("manifest.json").exists());

    let o = qtn(&[
        "plot",
        "--input",
        csv.to_str().unwrap(),
        "--input",
        short.to_str().unwrap(),
        "--out",
        plots.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let dat = std::fs::read_to_string(plots.join("plot.dat")).unwrap();
    assert!(dat.lines().last().unwrap().ends_with("NA NA"));
}
