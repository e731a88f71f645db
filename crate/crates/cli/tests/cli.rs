use std::path::Path;
use std::process::{Command, Output};

fn longmem(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_longmem"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_edm_writes_rows_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = longmem(
        dir.path(),
        &["simulate", "--dgp", "edm", "--d", "0.3", "--length", "100", "--seed", "1", "-o", "x.csv"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("x.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# dgp=edm d=0.3"));
    assert_eq!(lines.next(), Some("value"));
    assert_eq!(lines.count(), 100);
    let m = manifest(&dir.path().join("x.csv.manifest.json"));
    assert_eq!(m["subcommand"], "simulate");
    assert_eq!(m["seeds"][0], 1);
    assert_eq!(m["outputs"][0], "x.csv");
}

#[test]
fn simulate_to_stdout_writes_default_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = longmem(dir.path(), &["simulate", "--dgp", "csa", "--d", "0.2", "--length", "50", "--seed", "4"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 52);
    assert!(dir.path().join("simulate.manifest.json").exists());
}

#[test]
fn mcs_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut panel = String::from("A,B,C\n");
    for t in 0..40 {
        let x = t as f64;
        panel.push_str(&format!("{},{},{}\n", 1.0 + (x * 0.7).sin().abs(), 1.2 + (x * 1.3).cos().abs(), 3.0 + (x * 0.2).sin()));
    }
    std::fs::write(dir.path().join("panel.csv"), panel).unwrap();
    let run = |name: &str| {
        let out = longmem(
            dir.path(),
            &["mcs", "--losses", "panel.csv", "--alpha", "0.05", "--seed", "7", "-o", name],
        );
        assert!(out.status.success(), "{}", stderr(&out));
        std::fs::read(dir.path().join(name)).unwrap()
    };
    let a = run("a.csv");
    let b = run("b.csv");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("model,in_mcs,p_value,elimination_step"));
    assert!(text.lines().any(|l| l.starts_with("C,0,")), "{text}");
}

#[test]
fn missing_input_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = longmem(dir.path(), &["fit", "--model", "FI(d)", "--input", "absent.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with("error: io: "), "{err}");
    assert!(err.contains("absent.csv"), "{err}");
    let m = manifest(&dir.path().join("fit.manifest.json"));
    assert!(m["error"].as_str().unwrap().contains("absent.csv"));
}

#[test]
fn unknown_flag_prints_usage_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = longmem(dir.path(), &["simulate", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("Usage:"));
}

#[test]
fn domain_error_has_machine_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let out = longmem(dir.path(), &["simulate", "--dgp", "arfima", "--d", "0.6", "--length", "10", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error: domain: "), "{}", stderr(&out));
}

#[test]
fn fit_forecast_memest_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let sim = longmem(
        dir.path(),
        &["simulate", "--dgp", "arfima", "--d", "0.3", "--length", "600", "--seed", "9", "-o", "s.csv"],
    );
    assert!(sim.status.success());

    let fit = longmem(dir.path(), &["fit", "--model", "FI(d)", "--input", "s.csv"]);
    assert!(fit.status.success(), "{}", stderr(&fit));
    let report = String::from_utf8_lossy(&fit.stdout);
    assert!(report.contains("model: FI(d)") && report.contains("bic: "), "{report}");

    let fc = longmem(dir.path(), &["forecast", "--model", "AR(2)", "--input", "s.csv", "--h", "7", "-o", "f.csv"]);
    assert!(fc.status.success(), "{}", stderr(&fc));
    let text = std::fs::read_to_string(dir.path().join("f.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "step,forecast");
    assert_eq!(rows.len(), 8);

    for method in ["gph", "lw", "mle"] {
        let me = longmem(dir.path(), &["memest", "--method", method, "--input", "s.csv"]);
        assert!(me.status.success(), "{method}: {}", stderr(&me));
        let out = String::from_utf8_lossy(&me.stdout).into_owned();
        let d: f64 = out.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert!((d - 0.3).abs() < 0.2, "{method}: {d}");
    }
}

#[test]
fn experiment_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("exp.toml"),
        "dgp = \"arfima\"\nd_grid = [0.2]\nt = 300\nhorizons = [5, 20]\nreplications = 2\n\
         models = [\"FI(d)\", \"AR(1)\", \"I(1)\"]\nboot_replications = 500\nseed = 11\n",
    )
    .unwrap();
    let out = longmem(dir.path(), &["experiment", "--config", "exp.toml", "--out-dir", "out"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = std::fs::read_to_string(dir.path().join("out/table_arfima_d0.2.csv")).unwrap();
    assert!(table.starts_with("model,RMAD_h5,MCS_h5,RMAD_h20,MCS_h20"), "{table}");
    assert_eq!(table.lines().count(), 4);
    let m = manifest(&dir.path().join("out/manifest.json"));
    assert_eq!(m["seeds"][0], 11);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 3);
}

#[test]
fn experiment_rejects_unknown_key() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "dgp = \"edm\"\nwibble = 3\n").unwrap();
    let out = longmem(dir.path(), &["experiment", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error: config: "), "{}", stderr(&out));
}

#[test]
fn rv_study_on_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/rv_fixture.csv");
    std::fs::write(
        dir.path().join("rv.toml"),
        "first_window_end = \"2002-03-01\"\nlast_window_end = \"2002-03-05\"\nhorizons = [5, 22]\n\
         models = [\"FI(d)\", \"ARMA(1,1)\", \"I(1)\"]\nboot_replications = 500\n",
    )
    .unwrap();
    let out = longmem(
        dir.path(),
        &["rv-study", "--input", fixture.to_str().unwrap(), "--config", "rv.toml", "--out-dir", "rv"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let groups = std::fs::read_to_string(dir.path().join("rv/groups.csv")).unwrap();
    assert!(groups.starts_with("group,h_5,h_22\nARFIMA,"), "{groups}");
    let m = manifest(&dir.path().join("rv/manifest.json"));
    assert_eq!(m["config"]["windows"], 3);
}
