use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ocokit(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ocokit"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("OCOKIT_OUT")
        .output()
        .expect("spawn ocokit")
}

fn tmp(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("ocokit-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn instance(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name).to_string_lossy().into_owned()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn strongly_convex_quadratic_stream_meets_its_bound() {
    let d = tmp("sc");
    let o = ocokit(&["oco", "run", "--regime", "strongly-convex", "--T", "100", "--instance", &instance("quadratic_stream.json"), "--bound-check"], &d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&d);
    let realized = r["realized"].as_f64().unwrap();
    let bound = r["bound"].as_f64().unwrap();
    assert!(realized <= bound + 1e-6);
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
    let csv = std::fs::read_to_string(d.join("trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 101);
}

#[test]
fn reruns_write_identical_traces() {
    let (a, b) = (tmp("rerun-a"), tmp("rerun-b"));
    let args = ["oco", "run", "--regime", "saddle-smooth", "--T", "60", "--seed", "3", "--dump-iterates"];
    assert!(ocokit(&args, &a).status.success());
    assert!(ocokit(&args, &b).status.success());
    for f in ["trace.csv", "iterates.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(report(&a)["config_hash"], report(&b)["config_hash"]);
}

#[test]
fn config_hash_tracks_arguments() {
    let (a, b) = (tmp("hash-a"), tmp("hash-b"));
    assert!(ocokit(&["oco", "run", "--regime", "smooth", "--T", "20"], &a).status.success());
    assert!(ocokit(&["oco", "run", "--regime", "smooth", "--T", "21"], &b).status.success());
    assert_ne!(report(&a)["config_hash"], report(&b)["config_hash"]);
}

#[test]
fn planted_robust_instances_get_their_verdicts() {
    for (file, verdict) in [("ro_planted_feasible.json", "feasible"), ("ro_planted_infeasible.json", "infeasible")] {
        let d = tmp(file);
        let o = ocokit(&["ro", "solve", "--instance", &instance(file)], &d);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let r = report(&d);
        assert_eq!(r["solve"]["run"]["verdict"]["outcome"].as_str().map(str::to_lowercase).as_deref(), Some(verdict), "{r}");
    }
}

#[test]
fn inconclusive_verdict_exits_two() {
    let d = tmp("inconclusive");
    let o = ocokit(&["ro", "solve", "--planted", "feasible", "--eps", "0.001", "--horizon", "2", "--no-doubling", "--seed", "5"], &d);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn malformed_instance_reports_location() {
    let d = tmp("bad");
    std::fs::create_dir_all(&d).unwrap();
    let f = d.join("bad.json");
    std::fs::write(&f, "{\"m\": 2,\n \"n\": \"five\"}").unwrap();
    let o = ocokit(&["ro", "solve", "--instance", f.to_str().unwrap()], &d);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("`n`"), "{err}");
}

#[test]
fn rates_table_has_one_row_per_level() {
    let d = tmp("rates");
    let o = ocokit(&["oco", "rates", "--regime", "strongly-convex", "--T0", "32", "--levels", "3"], &d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(d.join("rate_table.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "T,realized,bound,ratio_to_prev");
    assert_eq!(rows.len(), 4);
    for t in [32, 64, 128] {
        assert!(d.join(format!("T{t}")).join("trace.csv").exists());
    }
}

#[test]
fn jeo_run_with_stream_file() {
    let d = tmp("jeo");
    let o = ocokit(
        &["jeo", "run", "--instance", &instance("jeo_squared.json"), "--stream", "file", "--stream-file", &instance("stream_from_g.json"), "--regime", "strongly-convex", "--horizon", "80"],
        &d,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.join("trace.csv")).unwrap();
    assert!(csv.starts_with("t,u_dist,gap_partial,regret_partial\n"));
    assert_eq!(csv.lines().count(), 81);
}

#[test]
fn regime_mismatch_is_an_error() {
    let d = tmp("mismatch");
    let o = ocokit(&["oco", "run", "--regime", "smooth", "--T", "10", "--instance", &instance("sign_games.json")], &d);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}
