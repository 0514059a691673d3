use hodge_curves::config::RunConfig;
use hodge_curves::curve::examples::{fermat, nodal_cubic};
use hodge_curves::report::{CommandResult, Report, Status};
use hodge_curves::C64;
use std::path::Path;
use std::process::Command;

fn write_config(dir: &Path, cfg: &RunConfig) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, cfg.to_json()).unwrap();
    path
}

fn run(args: &[&str], config: &Path, out: &Path) -> (i32, Report) {
    let status = Command::new(env!("CARGO_BIN_EXE_hodge-curves"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap();
    let name = args[0];
    let report = Report::from_json(&std::fs::read_to_string(out.join(format!("{name}.json"))).unwrap()).unwrap();
    (status.status.code().unwrap(), report)
}

fn fermat_config() -> RunConfig {
    let mut cfg = RunConfig::new(fermat(3));
    cfg.forms = vec!["omega_bar 1".parse().unwrap()];
    cfg.options.probes = 6;
    cfg
}

#[test]
fn validate_reports_bad_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(nodal_cubic());
    let (code, report) = run(&["validate"], &write_config(dir.path(), &cfg), dir.path());
    assert_eq!((code, report.status), (0, Status::Ok));
    assert_eq!(report.schema, 1);

    cfg.curve.nodes = vec![[C64::new(1.0, 0.0), C64::new(0.1, 0.0), C64::default()]];
    cfg.curve.normalization = None;
    let (code, report) = run(&["validate"], &write_config(dir.path(), &cfg), dir.path());
    assert_eq!(code, 2);
    assert_eq!(report.error.unwrap().kind, "NodeCheckFailed");
    assert!(matches!(report.result, Some(CommandResult::Validate(ref v)) if !v.nodes[0].ok));
}

#[test]
fn unreadable_config_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(&path, r#"{"schema": 1, "curve": {"polynomial": [[1, 1, 0, 1, 0]]}, "options": {"fd_step": -1}}"#).unwrap();
    let (code, report) = run(&["basis"], &path, dir.path());
    assert_eq!(code, 2);
    assert_eq!(report.error.unwrap().kind, "Config");
}

#[test]
fn decompose_omega_bar_on_fermat_cubic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fermat_config();
    let (code, report) = run(&["decompose", "--debug-dumps"], &write_config(dir.path(), &cfg), dir.path());
    assert_eq!(code, 0, "{:?}", report.error);
    let Some(CommandResult::Decompose(d)) = report.result else { panic!("no decomposition") };
    let row = &d.forms[0];
    assert_eq!(row.h1_coefficients.len(), 1);
    assert!((row.h1_coefficients[0] - 1.0).norm() < 1e-3, "{:?}", row.h1_coefficients);
    assert!(row.homotopy_residual <= 3e-2);
    assert_eq!(d.class_rank, 1);

    let probes = std::fs::read_to_string(dir.path().join("decompose_form0.csv")).unwrap();
    assert!(probes.starts_with("chart,x_re,x_im"));
    assert_eq!(probes.lines().count(), 7);
    let samples = std::fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    assert!(samples.starts_with("chart,w1_re,w1_im,sheet,w2_re,w2_im,weight"));
}

#[test]
fn threshold_breaches_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = fermat_config();
    cfg.options.residual_threshold = 1e-12;
    let (code, report) = run(&["decompose", "--seed", "4"], &write_config(dir.path(), &cfg), dir.path());
    assert_eq!(code, 3);
    assert_eq!(report.seed, 4);
    assert!(report.breaches.iter().any(|b| b.field == "decompose.forms[0].homotopy_residual"));
}

#[test]
fn calibration_is_deterministic_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &RunConfig::new(fermat(3)));
    let cache = dir.path().join("cache.json");
    let cache = cache.to_str().unwrap();
    let (a_dir, b_dir) = (dir.path().join("a"), dir.path().join("b"));
    let (code_a, a) = run(&["calibrate", "--cache", cache], &cfg, &a_dir);
    let (code_b, b) = run(&["calibrate", "--cache", cache], &cfg, &b_dir);
    assert_eq!((code_a, code_b), (0, 0));
    assert_eq!(a.numerics(), b.numerics());
    assert!(std::path::Path::new(cache).exists());

    // Far too coarse for the constants to agree across test forms.
    let (code, report) = run(&["calibrate", "--cache", cache, "--grid-scale", "0.25"], &cfg, &dir.path().join("c"));
    assert_eq!(code, 4);
    assert_eq!(report.error.unwrap().kind, "CalibrationInconsistent");
}

#[test]
fn cech_reports_repeat_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(nodal_cubic());
    cfg.forms = vec!["dbar_of bump(0.4+0.3i, 0.5)".parse().unwrap()];
    let path = write_config(dir.path(), &cfg);
    let (_, a) = run(&["cech"], &path, &dir.path().join("a"));
    let (code, b) = run(&["cech"], &path, &dir.path().join("b"));
    assert_eq!(code, 0, "{:?}", b.error);
    assert_eq!(a.numerics().to_json(), b.numerics().to_json());
    let Some(CommandResult::Cech(c)) = b.result else { panic!("no cech result") };
    assert_eq!((c.rank, c.rank_back), (0, 0));
}
