use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use covariant_bohm::cli::{exit, SUMMARY_HEADER};
use covariant_bohm::config::{Layout, PlotSpec};
use covariant_bohm::covariance::sample_std;
use covariant_bohm::integrator::{integrate, Scheme};
use covariant_bohm::output::{emit_svg, read_trajectory_csv, trajectory_csv};
use covariant_bohm::wavefield::{ground_excited_pair, ConfigPoint};
use tempfile::TempDir;

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn covbohm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covbohm")).args(args).output().unwrap()
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    covbohm(&args)
}

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("run.conf");
    fs::write(&path, text).unwrap();
    path
}

fn code(o: &Output) -> u8 {
    o.status.code().unwrap() as u8
}

const BASE: &str = "\
[model]
width = pi
mass = 1
modes = 1, 2

[initial]
point = 1.0, 1.0, 2.0, 0.0

[integration]
epsilon = 0.01
steps = 100
";

#[test]
fn fig1_velocities_vanish() {
    let tmp = TempDir::new().unwrap();
    let o = run("simulate", &bundled("fig1.conf"), tmp.path(), &[]);
    assert_eq!(code(&o), exit::SUCCESS, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    assert!(text.starts_with("# model.width = "));
    let records = read_trajectory_csv(&text).unwrap();
    assert_eq!(records.len(), 501);
    for r in &records {
        assert!(r.v1.abs() < 1e-10 && r.v2.abs() < 1e-10);
        assert!((r.q.t1 - r.q.t2).abs() < 1e-10);
    }
    assert!(tmp.path().join("trajectory.svg").exists());
}

#[test]
fn fig2_times_drift_apart() {
    let tmp = TempDir::new().unwrap();
    let o = run("simulate", &bundled("fig2.conf"), tmp.path(), &[]);
    assert_eq!(code(&o), exit::SUCCESS);
    let records = read_trajectory_csv(&fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap()).unwrap();
    let gaps: Vec<f64> = records.iter().map(|r| r.q.t1 - r.q.t2).collect();
    assert!(sample_std(&gaps) > 1e-4);
}

#[test]
fn zero_epsilon_is_rejected_without_output() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, &BASE.replace("epsilon = 0.01", "epsilon = 0"));
    let out = tmp.path().join("out");
    let o = run("simulate", &cfg, &out, &[]);
    assert_eq!(code(&o), exit::CONFIG);
    let msg = String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("integration.epsilon") && msg.contains("line 10"), "{msg}");
    assert!(!out.exists());
}

#[test]
fn unknown_key_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, &format!("{BASE}stepz = 4\n"));
    let o = run("simulate", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(code(&o), exit::CONFIG);
    assert!(String::from_utf8_lossy(&o.stderr).contains("integration.stepz"));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let tmp = TempDir::new().unwrap();
    let o = run("simulate", &tmp.path().join("nope.conf"), tmp.path(), &[]);
    assert_eq!(code(&o), exit::IO);
}

#[test]
fn node_start_exits_with_node_code() {
    let tmp = TempDir::new().unwrap();
    // Mode 2 vanishes at the centre of the well.
    let cfg = write_config(
        &tmp,
        &BASE.replace("modes = 1, 2", "modes = 2, 2").replace("1.0, 1.0, 2.0, 0.0", "pi/2, 0, pi/2, 0"),
    );
    let out = tmp.path().join("out");
    let o = run("simulate", &cfg, &out, &[]);
    assert_eq!(code(&o), exit::NODE_ABORT, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn exit_code_matches_recorded_termination() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        &BASE
            .replace("1.0, 1.0, 2.0, 0.0", "0.05, 1.0, 3.0, 0.0")
            .replace("steps = 100", "steps = 2000")
            .replace("epsilon = 0.01", "epsilon = 0.2"),
    );
    let o = run("simulate", &cfg, tmp.path(), &[]);
    let text = fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    let tag = text.lines().find_map(|l| l.strip_prefix("# termination = ")).unwrap();
    assert_eq!(exit::for_termination(tag.parse().unwrap()), code(&o));
}

#[test]
fn exit_codes_are_distinct() {
    use covariant_bohm::integrator::Termination::*;
    let mut codes = vec![exit::IO, exit::CONFIG, exit::COMPARISON];
    codes.extend([Completed, NodeAbort, DegenerateAbort, BoundaryAbort].map(exit::for_termination));
    assert_eq!(codes, [1, 2, 6, 0, 3, 4, 5]);
}

#[test]
fn scheme_override_is_echoed() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, BASE);
    let o = run("simulate", &cfg, tmp.path(), &["--scheme", "euler"]);
    assert_eq!(code(&o), exit::SUCCESS);
    let text = fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    assert!(text.contains("# integration.scheme = euler"));
    assert!(text.contains("# scheme = euler"));
    let bad = run("simulate", &cfg, tmp.path(), &["--scheme", "rk4"]);
    assert_ne!(code(&bad), exit::SUCCESS);
}

#[test]
fn boosted_simulation_runs_in_the_moving_frame() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, &format!("{BASE}\n[boost]\nvelocity = 0.5\n"));
    let o = run("simulate", &cfg, tmp.path(), &[]);
    assert_eq!(code(&o), exit::SUCCESS);
    let records = read_trajectory_csv(&fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap()).unwrap();
    let first = records[0].q;
    let alpha = covariant_bohm::minkowski::rapidity_from_velocity(0.5).unwrap();
    assert!(first.max_abs_diff(&ConfigPoint::new(1.0, 1.0, 2.0, 0.0).boosted(alpha)) < 1e-15);
}

fn ensemble_config(dir: &TempDir, count: usize, weighting: &str) -> PathBuf {
    write_config(
        dir,
        &format!(
            "[integration]\nepsilon = 0.01\nsteps = 50\n\n[ensemble]\ncount = {count}\nweighting = {weighting}\nseed = 5\n"
        ),
    )
}

fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            out.extend(tree(&p));
        } else {
            out.push((p.strip_prefix(dir).unwrap_or(&p).to_path_buf(), fs::read(&p).unwrap()));
        }
    }
    out.sort();
    out
}

#[test]
fn seeded_ensembles_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = ensemble_config(&tmp, 4, "uniform");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&run("ensemble", &cfg, &a, &[])), exit::SUCCESS);
    assert_eq!(code(&run("ensemble", &cfg, &b, &[])), exit::SUCCESS);
    let (ta, tb) = (tree(&a), tree(&b));
    assert_eq!(ta.len(), 5);
    assert_eq!(ta, tb);

    let c = tmp.path().join("c");
    assert_eq!(code(&run("ensemble", &cfg, &c, &["--seed", "6"])), exit::SUCCESS);
    let summary_a = fs::read_to_string(a.join("summary.csv")).unwrap();
    let summary_c = fs::read_to_string(c.join("summary.csv")).unwrap();
    assert_ne!(summary_a, summary_c);
    assert!(summary_c.contains("# ensemble.seed = 6"));
}

fn summary_rows(dir: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(dir.join("summary.csv")).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some(SUMMARY_HEADER));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn uniform_ensemble_has_one_row_per_member() {
    let tmp = TempDir::new().unwrap();
    let cfg = ensemble_config(&tmp, 100, "uniform");
    let out = tmp.path().join("out");
    assert_eq!(code(&run("ensemble", &cfg, &out, &[])), exit::SUCCESS);
    let rows = summary_rows(&out);
    assert_eq!(rows.len(), 100);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), 12);
        assert_eq!(row[0], k.to_string());
        assert_eq!(row[1], "uniform");
        assert_eq!(row[3].parse::<f64>().unwrap(), 0.0);
        assert_eq!(row[5].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn eigenvalue_ensemble_records_its_weighting() {
    let tmp = TempDir::new().unwrap();
    let cfg = ensemble_config(&tmp, 100, "eigenvalue");
    let out = tmp.path().join("out");
    assert_eq!(code(&run("ensemble", &cfg, &out, &[])), exit::SUCCESS);
    let rows = summary_rows(&out);
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r[1] == "eigenvalue" && r[6] == "completed"));
    assert!(fs::read_to_string(out.join("summary.csv")).unwrap().contains("# ensemble.weighting = eigenvalue"));
    assert_eq!(fs::read_dir(out.join("members")).unwrap().count(), 100);
}

#[test]
fn ensemble_without_section_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, BASE);
    let out = tmp.path().join("out");
    assert_eq!(code(&run("ensemble", &cfg, &out, &[])), exit::CONFIG);
    assert!(!out.exists());
}

#[test]
fn identity_boost_reports_zero_deviation() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, &format!("{BASE}\n[boost]\nrapidity = 0\n"));
    let o = run("covariance", &cfg, tmp.path(), &[]);
    assert_eq!(code(&o), exit::SUCCESS, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("comparison.csv")).unwrap();
    assert!(text.contains("# max_deviation = 0.0000000000000000e0"));
    let mut rows = 0;
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!((cells[2], cells[3]), (0.0, 0.0));
        rows += 1;
    }
    assert_eq!(rows, 101);
    assert!(!tmp.path().join("convergence.csv").exists());
}

#[test]
fn covariance_without_boost_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, BASE);
    let out = tmp.path().join("out");
    let o = run("covariance", &cfg, &out, &[]);
    assert_eq!(code(&o), exit::CONFIG);
    assert!(String::from_utf8_lossy(&o.stderr).contains("boost"));
    assert!(!out.exists());
}

#[test]
fn convergence_file_has_header_and_footer() {
    let tmp = TempDir::new().unwrap();
    let o = run("covariance", &bundled("covariance.conf"), tmp.path(), &[]);
    assert_eq!(code(&o), exit::SUCCESS, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("convergence.csv")).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "epsilon,max_deviation");
    assert_eq!(body.len(), 4);
    assert!(text.lines().last().unwrap().starts_with("# fitted_order = "));
}

#[test]
fn indivisible_step_list_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        &format!("{BASE}\n[boost]\nvelocity = 0.3\n\n[covariance]\nepsilons = 0.3, 0.2, 0.1\ntotal_proper_time = 1\n"),
    );
    let out = tmp.path().join("out");
    assert_eq!(code(&run("covariance", &cfg, &out, &[])), exit::CONFIG);
    assert!(!out.exists());
}

#[test]
fn csv_round_trip_reproduces_records() {
    let model = ground_excited_pair(std::f64::consts::PI, 1.0).unwrap();
    let traj = integrate(&model, &ConfigPoint::new(1.0, 1.0, 2.0, 0.0), 0.01, 300, Scheme::Midpoint).unwrap();
    let back = read_trajectory_csv(&trajectory_csv(&traj, &[])).unwrap();
    assert_eq!(back.len(), traj.records.len());
    for (a, b) in back.iter().zip(&traj.records) {
        let (x, y) = (
            [a.sigma, a.v1, a.v2, a.lambda1, a.lambda2],
            [b.sigma, b.v1, b.v2, b.lambda1, b.lambda2],
        );
        assert!(x.iter().zip(&y).all(|(p, q)| (p - q).abs() <= 1e-12 * (1.0 + q.abs())));
        assert!(a.q.max_abs_diff(&b.q) <= 1e-12);
    }
}

/// `(step, y)` of every label drawn for `particle`.
fn label_heights(svg: &str, particle: &str) -> Vec<(usize, f64)> {
    let doc = roxmltree::Document::parse(svg).unwrap();
    let group = doc
        .descendants()
        .find(|n| n.attribute("data-particle") == Some(particle))
        .unwrap();
    group
        .children()
        .filter(|n| n.attribute("class") == Some("label"))
        .map(|n| (n.attribute("data-step").unwrap().parse().unwrap(), n.attribute("y").unwrap().parse().unwrap()))
        .collect()
}

#[test]
fn fig1_labels_sit_at_equal_heights() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&run("simulate", &bundled("fig1.conf"), tmp.path(), &[])), exit::SUCCESS);
    let svg = fs::read_to_string(tmp.path().join("trajectory.svg")).unwrap();
    assert!(!svg.contains("href"));
    let (a, b) = (label_heights(&svg, "1"), label_heights(&svg, "2"));
    assert_eq!(a.len(), 51);
    assert_eq!(a, b);
}

#[test]
fn fig2_labels_sit_at_unequal_heights() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&run("simulate", &bundled("fig2.conf"), tmp.path(), &[])), exit::SUCCESS);
    let svg = fs::read_to_string(tmp.path().join("trajectory.svg")).unwrap();
    let (a, b) = (label_heights(&svg, "1"), label_heights(&svg, "2"));
    assert_eq!(a.len(), b.len());
    assert!(a.iter().zip(&b).all(|(x, y)| x.0 == y.0));
    assert!(a.iter().zip(&b).filter(|(x, y)| (x.1 - y.1).abs() > 1.0).count() > 40);
}

#[test]
fn shared_layout_and_stride() {
    let model = ground_excited_pair(std::f64::consts::PI, 1.0).unwrap();
    let traj = integrate(&model, &ConfigPoint::new(1.0, 1.0, 2.0, 0.0), 0.01, 100, Scheme::Euler).unwrap();
    let svg = emit_svg(
        &traj,
        &PlotSpec {
            stride: 25,
            layout: Layout::Shared,
            width: 400.0,
            height: 300.0,
        },
    );
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    assert_eq!(root.attribute("width"), Some("400"));
    assert_eq!(label_heights(&svg, "1").len(), 5);
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polyline")).count(), 2);
}
