use std::path::Path;
use std::process::{Command, Output};

fn projflow(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projflow"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn min_values(csv: &str) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn presets_lists_the_registry() {
    let tmp = tempfile::tempdir().unwrap();
    let o = projflow(&["presets"], tmp.path());
    assert_eq!(code(&o), 0);
    for id in [
        "torus-hym-flat",
        "torus-kr-flat",
        "curve-hym-semipositive",
        "cp1-kr",
        "torus-finsler-semipositive",
        "torus-maxprinciple",
    ] {
        assert!(stdout(&o).contains(id), "{id} missing");
    }
}

#[test]
fn flat_kahler_ricci_run_completes_with_zero_minimum() {
    let tmp = tempfile::tempdir().unwrap();
    let o = projflow(
        &[
            "run",
            "--preset",
            "torus-kr-flat",
            "--t-end",
            "0.5",
            "--out",
            "kr",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dir = tmp.path().join("kr");
    for f in ["config.json", "monitor.csv", "final.snap", "summary.json"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.join("monitor.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "t,min_value,argmin_index,field_scale,dt"
    );
    assert!(min_values(&csv).iter().all(|v| v.abs() < 1e-12));
    assert_eq!(summary(&dir)["stop_reason"], "completed");
}

#[test]
fn fubini_study_collapse_is_a_numeric_halt_near_one_half() {
    let tmp = tempfile::tempdir().unwrap();
    let o = projflow(
        &[
            "run",
            "--preset",
            "cp1-kr",
            "--t-end",
            "0.6",
            "--monitor-every",
            "2500",
            "--out",
            "cp1",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let s = summary(&tmp.path().join("cp1"));
    assert_eq!(s["stop_reason"], "collapse");
    let t = s["stop_time"].as_f64().unwrap();
    assert!((t - 0.5).abs() <= 0.02, "collapse at {t}");
    assert!(stderr(&o).contains("grid index"), "{}", stderr(&o));
}

#[test]
fn config_problems_exit_with_the_config_code() {
    let tmp = tempfile::tempdir().unwrap();
    let o = projflow(&["run", "--config", "missing.cfg"], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("missing.cfg"));

    let o = projflow(&["run", "--preset", "no-such-preset"], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("no-such-preset"));

    let o = projflow(
        &["run", "--preset", "torus-hym-flat", "--dt", "1"],
        tmp.path(),
    );
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("dt"));

    let o = projflow(
        &["run", "--preset", "torus-hym-flat", "--scheme", "rk5"],
        tmp.path(),
    );
    assert_eq!(code(&o), 2);

    let o = projflow(&["run"], tmp.path());
    assert_eq!(code(&o), 2);
}

fn write_config(dir: &Path, preset: &str, edit: impl Fn(&mut serde_json::Value)) -> String {
    let o = projflow(
        &[
            "run", "--preset", preset, "--t-end", "0.01", "--out", "base",
        ],
        dir,
    );
    assert_eq!(code(&o), 0);
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("base/config.json")).unwrap())
            .unwrap();
    edit(&mut v);
    std::fs::write(
        dir.join("edited.json"),
        serde_json::to_string_pretty(&v).unwrap(),
    )
    .unwrap();
    "edited.json".into()
}

#[test]
fn config_files_reject_unknown_keys_and_versions() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(tmp.path(), "torus-hym-flat", |v| {
        v["time_step"] = serde_json::json!(0.1);
    });
    let o = projflow(&["run", "--config", &path], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("time_step"), "{}", stderr(&o));

    let path = write_config(tmp.path(), "torus-hym-flat", |v| {
        v["schema_version"] = serde_json::json!(99)
    });
    let o = projflow(&["run", "--config", &path], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("schema_version"));
}

#[test]
fn positivity_violation_has_its_own_exit_code() {
    // The flat Kahler-Ricci minimum at t = 0 is a round-off -4e-17, which breaches a 1e-30 tolerance.
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(tmp.path(), "torus-kr-flat", |v| {
        v["tolerance"]["positivity"] = serde_json::json!(1e-30)
    });
    let o = projflow(&["run", "--config", &path, "--out", "strict"], tmp.path());
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(stderr(&o).contains("grid index"));
    assert_eq!(
        summary(&tmp.path().join("strict"))["positivity_violation"],
        true
    );
}

#[test]
fn a_run_directory_config_reproduces_its_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let o = projflow(
        &[
            "run",
            "--preset",
            "curve-hym-semipositive",
            "--seed",
            "7",
            "--scheme",
            "euler",
            "--dt",
            "1e-3",
            "--t-end",
            "0.05",
            "--monitor-every",
            "10",
            "--out",
            "a",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = projflow(
        &["run", "--config", "a/config.json", "--out", "b"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0);
    let read = |d: &str| std::fs::read_to_string(tmp.path().join(d).join("monitor.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_eq!(read("a").lines().count(), 1 + 6);
    let cfg: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("a/config.json")).unwrap())
            .unwrap();
    assert_eq!(cfg["scheme"], "euler");
    assert_eq!(summary(&tmp.path().join("b"))["seed"], 7);
}

#[test]
fn identity_suite_passes_and_fails_on_broken_pseudoconvexity() {
    let tmp = tempfile::tempdir().unwrap();
    let o = projflow(&["suite", "identities"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));

    let o = projflow(&["suite", "identities", "--epsilon", "0.5"], tmp.path());
    assert_eq!(code(&o), 5);
    let row = stdout(&o)
        .lines()
        .find(|l| l.starts_with("pseudoconvexity [perturbed"))
        .unwrap()
        .to_string();
    assert!(row.contains("FAIL"), "{row}");
    assert!(stderr(&o).contains("pseudoconvexity"));

    assert_eq!(code(&projflow(&["suite", "nonsense"], tmp.path())), 2);
}

#[test]
fn positivity_and_reduction_suites_pass() {
    let tmp = tempfile::tempdir().unwrap();
    for id in ["positivity", "reductions"] {
        let o = projflow(&["suite", id], tmp.path());
        assert_eq!(code(&o), 0, "{id}:\n{}", stdout(&o));
    }
}

#[test]
fn plots_are_deterministic_and_check_the_schema() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&projflow(
            &[
                "run",
                "--preset",
                "curve-hym-mixed",
                "--t-end",
                "0.1",
                "--out",
                "m"
            ],
            tmp.path()
        )),
        0
    );
    let o = projflow(&["plot", "m/monitor.csv", "--out", "one.svg"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        code(&projflow(
            &["plot", "m/monitor.csv", "--out", "two.svg"],
            tmp.path()
        )),
        0
    );
    let one = std::fs::read(tmp.path().join("one.svg")).unwrap();
    assert_eq!(one, std::fs::read(tmp.path().join("two.svg")).unwrap());
    let text = String::from_utf8(one).unwrap();
    assert!(
        text.starts_with("<svg") && text.contains("polyline") && text.contains("tolerance band")
    );

    std::fs::write(
        tmp.path().join("bad.csv"),
        "t,value,argmin_index,field_scale,dt\n0,1,0,1,0.1\n",
    )
    .unwrap();
    let o = projflow(&["plot", "bad.csv"], tmp.path());
    assert_eq!(code(&o), 6);
    assert!(stderr(&o).contains("min_value"));

    assert_eq!(code(&projflow(&["plot", "absent.csv"], tmp.path())), 1);
}
