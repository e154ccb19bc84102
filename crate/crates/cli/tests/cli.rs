use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn combpulse(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_combpulse"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn entries(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

const VALID: &str = r#"{
    "name": "cloud",
    "modulation": {"frequency_hz": 30e6, "index": {"optimal_for": 2}},
    "route": {"kind": "exact", "resonance": {"harmonic": 2},
              "filter": {"gamma_hz": 3e6, "alpha_l": 5}},
    "grid": {"periods": 2, "samples_per_period": 1000}
}"#;

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("scenario.json");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn list_is_sorted_and_annotated() {
    let tmp = TempDir::new().unwrap();
    let out = combpulse(&["list"], tmp.path());
    assert!(out.status.success());
    let text = stdout(&out);
    let names: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(names.len(), 29);
    assert_eq!(names[..4], ["fig1a", "fig1b", "fig1c", "fig2a"]);
    assert!(names.contains(&"fig8") && names.contains(&"stark300"));
    let line = |name: &str| {
        text.lines()
            .find(|l| l.starts_with(&format!("{name} ")))
            .unwrap()
            .to_string()
    };
    assert!(line("fig11b").contains("αL=1.3e5"));
    assert!(line("fig6a").contains("Ω/2π=10 GHz"));
    assert_eq!(stdout(&combpulse(&["list"], tmp.path())), text);
}

#[test]
fn run_writes_trace_and_report() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), VALID);
    let out = combpulse(&["run", config.to_str().unwrap(), "--out", "results"], tmp.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("2 per bunch"), "{}", stdout(&out));

    let results = tmp.path().join("results");
    assert_eq!(entries(&results), ["cloud.csv", "cloud.json"]);
    let csv = fs::read_to_string(results.join("cloud.csv")).unwrap();
    assert_eq!(
        csv.lines().next(),
        Some("t_seconds,intensity_norm,re_envelope,im_envelope")
    );
    assert_eq!(csv.lines().count(), 2002);

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(results.join("cloud.json")).unwrap()).unwrap();
    assert!(report["code_version"].as_str().unwrap().starts_with("combpulse "));
    assert_eq!(report["scenario"]["name"], "cloud");
    assert_eq!(report["bunch_summary"]["pulses_per_bunch"], 2);
    assert_eq!(report["route"]["kind"], "exact");
    assert!(report["report"]["pulses"].as_array().unwrap().len() >= 2);
}

#[test]
fn negative_gamma_exits_2_without_files() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), &VALID.replace("3e6", "-3e6"));
    let out = combpulse(&["run", config.to_str().unwrap(), "--out", "results"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("route.filter.gamma_hz"), "{}", stderr(&out));
    assert!(!tmp.path().join("results").exists());
    assert_eq!(entries(tmp.path()), ["scenario.json"]);
}

#[test]
fn schema_violations_exit_2_and_name_the_field() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        (
            VALID.replace("\"alpha_l\": 5", "\"alpha_l\": 5, \"colour\": 1"),
            "colour",
        ),
        (VALID.replace("\"periods\": 2", "\"periods\": -2"), "grid.periods"),
        (VALID.replace("\"kind\": \"exact\"", "\"kind\": \"magic\""), "magic"),
        (VALID.replace("\"grid\"", "\"gird\""), "gird"),
        ("{ not json".to_string(), "schema violation"),
    ];
    for (text, needle) in cases {
        let config = write_config(tmp.path(), &text);
        let out = combpulse(&["run", config.to_str().unwrap()], tmp.path());
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(stderr(&out).contains(needle), "{needle}: {}", stderr(&out));
        assert_eq!(entries(tmp.path()), ["scenario.json"]);
    }
    let out = combpulse(&["run", "missing.json"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_convergence_exits_3_with_achieved_tolerance() {
    let tmp = TempDir::new().unwrap();
    let exact = VALID.replace(
        "\"alpha_l\": 5}",
        "\"alpha_l\": 5}, \"convergence\": {\"tolerance\": 1e-30, \"max_refinements\": 2}",
    );
    let series = VALID
        .replace("\"kind\": \"exact\"", "\"kind\": \"sideband\"")
        .replace(
            "\"filter\": {\"gamma_hz\": 3e6, \"alpha_l\": 5}",
            "\"filter\": {\"kind\": \"lorentzian\", \"gamma_hz\": 3e6, \"alpha_l\": 5}, \"shells\": {\"auto\": {\"tolerance\": 1e-200}}",
        );
    for text in [exact, series] {
        let config = write_config(tmp.path(), &text);
        let out = combpulse(&["run", config.to_str().unwrap()], tmp.path());
        assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
        let err = stderr(&out);
        assert!(err.contains("achieved") || err.contains("still changed"), "{err}");
        assert_eq!(entries(tmp.path()), ["scenario.json"]);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    for dir in ["a", "b"] {
        assert!(combpulse(&["preset", "fig2c", "--out", dir], tmp.path())
            .status
            .success());
    }
    let single = Command::new(env!("CARGO_BIN_EXE_combpulse"))
        .args(["preset", "fig2c", "--out", "c"])
        .env("COMBPULSE_THREADS", "1")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(single.status.success());
    let names = entries(&tmp.path().join("a"));
    assert_eq!(
        names,
        ["fig2c.csv", "fig2c.ideal.csv", "fig2c.json", "fig2c.series.csv"]
    );
    for name in &names {
        let a = fs::read(tmp.path().join("a").join(name)).unwrap();
        for other in ["b", "c"] {
            assert_eq!(
                a,
                fs::read(tmp.path().join(other).join(name)).unwrap(),
                "{other}/{name}"
            );
        }
    }
}

#[test]
fn printed_preset_config_reproduces_the_preset() {
    let tmp = TempDir::new().unwrap();
    let printed = combpulse(&["config", "fig10d"], tmp.path());
    assert!(printed.status.success());
    fs::write(tmp.path().join("fig10d.json.in"), &printed.stdout).unwrap();
    assert!(combpulse(&["run", "fig10d.json.in", "--out", "from_file"], tmp.path())
        .status
        .success());
    assert!(combpulse(&["preset", "fig10d", "--out", "from_preset"], tmp.path())
        .status
        .success());
    for name in ["fig10d.csv", "fig10d.json"] {
        assert_eq!(
            fs::read(tmp.path().join("from_file").join(name)).unwrap(),
            fs::read(tmp.path().join("from_preset").join(name)).unwrap(),
        );
    }
}

#[test]
fn grid_overrides_apply() {
    let tmp = TempDir::new().unwrap();
    let out = combpulse(
        &[
            "--samples-per-period",
            "400",
            "preset",
            "fig1b",
            "--periods",
            "3",
            "--out",
            "o",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(tmp.path().join("o/fig1b.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3 * 400 + 2);
    let phase = fs::read_to_string(tmp.path().join("o/fig1b.phase.csv")).unwrap();
    assert_eq!(phase.lines().next(), Some("t_seconds,psi_rad"));
    assert_eq!(phase.lines().count(), 3 * 400 + 2);

    let coarse = combpulse(
        &["--samples-per-period", "10", "preset", "fig1b", "--out", "p"],
        tmp.path(),
    );
    assert_eq!(coarse.status.code(), Some(2));
    assert!(stderr(&coarse).contains("grid.samples_per_period"));
    assert!(!tmp.path().join("p").exists());
}

#[test]
fn batch_mode_runs_every_preset() {
    let tmp = TempDir::new().unwrap();
    let out = combpulse(&["preset", "--all-presets", "--out", "all"], tmp.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let names = entries(&tmp.path().join("all"));
    let listed = stdout(&combpulse(&["list"], tmp.path()));
    for preset in listed.lines().map(|l| l.split_whitespace().next().unwrap()) {
        assert!(names.contains(&format!("{preset}.csv")), "{preset}");
        assert!(names.contains(&format!("{preset}.json")), "{preset}");
    }
    assert!(names.contains(&"fig9c.single.csv".to_string()));
}

#[test]
fn bad_invocations_exit_2() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(combpulse(&["preset", "fig99"], tmp.path()).status.code(), Some(2));
    assert_eq!(combpulse(&["preset"], tmp.path()).status.code(), Some(2));
    let threads = Command::new(env!("CARGO_BIN_EXE_combpulse"))
        .args(["preset", "fig1a"])
        .env("COMBPULSE_THREADS", "zero")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
    assert!(stderr(&threads).contains("COMBPULSE_THREADS"));
    assert!(entries(tmp.path()).is_empty());
}
