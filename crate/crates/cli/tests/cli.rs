use std::fs;
use std::path::Path;
use std::process::Command;

use accel_cli::config::{ExperimentConfig, Method, OptimumSource};
use accel_cli::runner::{certify_record_rows, run_experiment};
use accel_cli::suite::{run_suite, SuiteCase};
use accel_cli::{CliError, SolverSpec};
use accel_core::bench::{ProblemKind, ProblemSpec};
use accel_core::trace::read_trace_csv;
use accel_core::StoppingRule;

const ITEM_QUAD: &str = r#"
[problem]
kind = "quad"
seed = 3

[solver]
method = "item"

[stop]
max_iter = 5000
eps_rel = 1e-3
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_accel"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn item_run_reaches_the_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(ITEM_QUAD).unwrap();
    let (out, files) = run_experiment(&cfg, dir.path()).unwrap();
    let rows = read_trace_csv(fs::File::open(&files.trace).unwrap()).unwrap();
    assert_eq!(rows.len(), out.record.iterations + 1);
    assert!(rows.windows(2).all(|w| w[1].k == w[0].k + 1));
    let d0 = rows[0].dist_sq.unwrap();
    let last = rows.last().unwrap().dist_sq.unwrap();
    assert!(last < 1e-6 * d0, "{last} vs {d0}");
    assert!(rows[..rows.len() - 1].iter().all(|r| r.dist_sq.unwrap() >= 1e-6 * d0));
    assert_eq!(out.summary.iterations_to_threshold, Some(rows.last().unwrap().k));
    assert!(out.summary.passed());
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(&files.summary).unwrap()).unwrap();
    assert_eq!(summary["solver"], "item");
    assert!(summary["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn same_config_gives_identical_csv() {
    let text = ITEM_QUAD.replace("kind = \"quad\"", "kind = \"spl\"");
    let cfg = ExperimentConfig::from_toml(&text).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let fa = run_experiment(&cfg, a.path()).unwrap().1;
    let fb = run_experiment(&cfg, b.path()).unwrap().1;
    assert_eq!(fs::read(fa.trace).unwrap(), fs::read(fb.trace).unwrap());
}

#[test]
fn mismatched_solver_is_a_config_error() {
    let text = ITEM_QUAD.replace("kind = \"quad\"", "kind = \"en\"");
    assert!(matches!(ExperimentConfig::from_toml(&text), Err(CliError::Config(_))));
    let text = ITEM_QUAD.replace("method = \"item\"", "method = \"acgm\"");
    assert!(matches!(ExperimentConfig::from_toml(&text), Err(CliError::Config(_))));
}

#[test]
fn config_validation() {
    let bad = [
        ITEM_QUAD.replace("eps_rel = 1e-3", "eps_rel = 1.5"),
        ITEM_QUAD.replace("seed = 3", "seed = 3\ncolour = 1"),
        ITEM_QUAD.replace("method = \"item\"", "method = \"item\"\nalpha = 0.5"),
        ITEM_QUAD.replace("method = \"item\"", "method = \"item\"\na1 = 1.0"),
        ITEM_QUAD.to_string() + "\n[known_optimum]\nsource = \"none\"\n",
        ITEM_QUAD.to_string() + "\n[known_optimum]\nsource = \"file\"\n",
    ];
    for text in &bad {
        assert!(matches!(ExperimentConfig::from_toml(text), Err(CliError::Config(_))), "{text}");
    }
    let ok = ITEM_QUAD.replace("method = \"item\"", "method = \"ogmm\"\nbase = \"tmm\"\na1 = 2.0\n[solver.memory]\nm_max = 4");
    let cfg = ExperimentConfig::from_toml(&ok).unwrap();
    assert_eq!(cfg.solver.memory_config().m_max, 4);
    assert_eq!(cfg.solver.ogm_config().unwrap().a1, 2.0);
    assert_eq!(cfg.known_optimum.source, OptimumSource::Auto);
}

#[test]
fn eacgm_alpha_settings() {
    let base = "[problem]\nkind = \"en\"\nn = 30\n[stop]\nmax_iter = 5\n[solver]\nmethod = \"eacgm\"\n";
    let cfg = ExperimentConfig::from_toml(&(base.to_string() + "alpha = \"from_ll\"\nl_l_ratio = 0.1\n")).unwrap();
    let e = cfg.solver.eacgm_config(Some(50.0)).unwrap();
    assert_eq!(e.l_l, 5.0);
    let cfg = ExperimentConfig::from_toml(&(base.to_string() + "alpha = 0.25\n")).unwrap();
    assert_eq!(cfg.solver.label(), "eacgm-0.25");
    for extra in ["alpha = \"fast\"\n", "alpha = 1.5\n", "l_l = 1.0\nl_l_ratio = 0.1\n", "r_d = 2.0\n"] {
        assert!(ExperimentConfig::from_toml(&(base.to_string() + extra)).is_err(), "{extra}");
    }
}

#[test]
fn dampening_one_is_reported_not_asserted() {
    let text = "[problem]\nkind = \"en\"\n[solver]\nmethod = \"eacgm\"\nalpha = 1.0\n[stop]\nmax_iter = 400\n";
    let cfg = ExperimentConfig::from_toml(text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (out, _) = run_experiment(&cfg, dir.path()).unwrap();
    let s = &out.summary;
    assert!(!s.certificates_asserted);
    assert!(s.passed());
    let gaps = s.certificates.get("gap_increment_nonnegative").unwrap();
    assert_eq!(gaps.rows_checked, 400);
    let min_gap = out.record.rows.iter().filter_map(|r| r.gap_increment).fold(f64::INFINITY, f64::min);
    println!("alpha = 1: smallest gap increment {min_gap:e}, gap check passed = {:?}", gaps.passed);

    let safe = text.replace("alpha = 1.0", "alpha = \"from_ll\"\nl_l_ratio = 0.1");
    let cfg = ExperimentConfig::from_toml(&safe).unwrap();
    let (out, _) = run_experiment(&cfg, dir.path()).unwrap();
    assert!(out.summary.certificates_asserted);
    assert!(out.summary.certificates.all_passed(), "{}", out.summary.certificates);
}

#[test]
fn certify_round_trip_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.toml", ITEM_QUAD);
    let cfg = ExperimentConfig::load(&config).unwrap();
    let files = run_experiment(&cfg, dir.path()).unwrap().1;
    let rows = read_trace_csv(fs::File::open(&files.trace).unwrap()).unwrap();
    let (report, asserted) = certify_record_rows(&cfg, &rows).unwrap();
    assert!(asserted && report.all_passed(), "{report}");

    let status = bin().args(["certify", "--trace"]).arg(&files.trace).arg("--config").arg(&config).output().unwrap().status;
    assert_eq!(status.code(), Some(0));

    // Inflate one A value in the CSV.
    let text = fs::read_to_string(&files.trace).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut fields: Vec<String> = lines[20].split(',').map(String::from).collect();
    let a: f64 = fields[1].parse().unwrap();
    fields[1] = format!("{:.16e}", a * 1.001);
    lines[20] = fields.join(",");
    let bad = write(dir.path(), "bad.csv", &(lines.join("\n") + "\n"));
    let out = bin().args(["certify", "--trace"]).arg(&bad).arg("--config").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let line = stdout.lines().find(|l| l.starts_with("weights_accumulate")).unwrap();
    assert!(line.contains("FAIL") && line.contains("worst_k=20"), "{line}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = bin().args(["run", "--config"]).arg(dir.path().join("nope.toml")).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.toml"));

    let mismatch = write(dir.path(), "m.toml", &ITEM_QUAD.replace("kind = \"quad\"", "kind = \"enlr\""));
    let out = bin().args(["run", "--config"]).arg(&mismatch).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let ok = write(dir.path(), "ok.toml", ITEM_QUAD);
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["run", "--config"])
        .arg(&ok)
        .args(["--seed", "9", "--max-iter", "7", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 9);
    assert_eq!(summary["iterations"], 7);

    let table = bin().args(["table2", "--ql", "0.01,0", "--ratios", "0.1"]).output().unwrap();
    assert_eq!(table.status.code(), Some(0));
    let text = String::from_utf8_lossy(&table.stdout);
    assert!(text.contains("0.9337") && text.contains("1.3617") && text.contains("1.4142"), "{text}");
    let bad = bin().args(["table2", "--ql", "2"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    let usage = bin().args(["run", "--bogus"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(1));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn gnuplot_stub_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(&(ITEM_QUAD.to_string() + "\n[outputs]\ntrace_csv = \"t/q.csv\"\ngnuplot = true\n")).unwrap();
    let files = run_experiment(&cfg, dir.path()).unwrap().1;
    let gp = fs::read_to_string(files.gnuplot.unwrap()).unwrap();
    assert!(gp.contains("'q.csv'") && gp.contains("dist_sq"));
}

#[test]
fn small_suite_runs_in_parallel() {
    let dir = tempfile::tempdir().unwrap();
    let mut en = ProblemSpec::desk(ProblemKind::En, 1);
    en.n = Some(40);
    let mut quad = ProblemSpec::desk(ProblemKind::Quad, 0);
    quad.n = Some(30);
    let stop = StoppingRule { max_iter: 20_000, eps_rel: Some(1e-4), grad_tol: None };
    let cases = vec![
        SuiteCase { problem: quad, solvers: vec![SolverSpec::new(Method::Item), SolverSpec { base: Some(Method::Item), ..SolverSpec::new(Method::Ogmm) }], stop },
        SuiteCase { problem: en, solvers: vec![SolverSpec::new(Method::Acgm), SolverSpec::eacgm(0.7542)], stop },
    ];
    let report = run_suite(&cases, dir.path(), Some(2)).unwrap();
    assert_eq!(report.runs.len(), 4);
    assert!(report.passed(), "{}", report.render());
    assert!(report.runs.iter().all(|r| r.trace.as_ref().is_some_and(|t| t.exists())));
    assert!(dir.path().join("summary.json").exists());
    assert_eq!(report.orderings.len(), 2);
}
