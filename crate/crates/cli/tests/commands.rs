use std::path::Path;
use std::process::{Command, Output};

use fadeopt::space::ParameterSpace;
use fadeopt::surrogate::{synthetic_ozonation, Dataset};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fadeopt"))
        .args(args)
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn short_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("c.toml");
    std::fs::write(&path, format!("seed = 3\n[loop]\nsteps = 300\n[baselines.nsga2]\ngenerations = 3\n[baselines.mopso]\niterations = 3\n{extra}")).unwrap();
    p(&path).to_string()
}

#[test]
fn train_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "[loop.extra]\n");
    // unknown keys are fatal, with one line on stderr
    let bad = run(&["train", "--config", &cfg, "--out", p(&dir.path().join("x"))]);
    assert!(!bad.status.success());
    let err = String::from_utf8(bad.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");

    let cfg = short_config(dir.path(), "");
    let out = dir.path().join("run");
    let ok = run(&["train", "--config", &cfg, "--out", p(&out)]);
    assert!(ok.status.success());
    let stdout = String::from_utf8(ok.stdout).unwrap();
    assert!(stdout.contains("best state") && stdout.contains("k/s"));
    for f in ["log.csv", "best.json", "checkpoint.json", "config.toml"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(!out.join(".fadeopt.lock").exists());
    let rows = std::fs::read_to_string(out.join("log.csv"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(rows, 301);
    // the recorded config reproduces the run
    let again = dir.path().join("again");
    assert!(run(&[
        "train",
        "--config",
        p(&out.join("config.toml")),
        "--out",
        p(&again),
        "--quiet"
    ])
    .status
    .success());
    assert_eq!(
        std::fs::read(out.join("log.csv")).unwrap(),
        std::fs::read(again.join("log.csv")).unwrap()
    );
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(&["train", "--config", &cfg, "--out", p(&a), "--quiet"])
        .status
        .success());
    assert!(run(&[
        "train",
        "--config",
        &cfg,
        "--seed",
        "4",
        "--out",
        p(&b),
        "--quiet"
    ])
    .status
    .success());
    assert_ne!(
        std::fs::read(a.join("log.csv")).unwrap(),
        std::fs::read(b.join("log.csv")).unwrap()
    );
    let recorded = std::fs::read_to_string(b.join("config.toml")).unwrap();
    assert!(recorded.contains("seed = 4"));
}

#[test]
fn locked_output_directory_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("busy");
    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(out.join(".fadeopt.lock"), "1").unwrap();
    let r = run(&["brute-force", "--out", p(&out)]);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("in use"));
}

#[test]
fn simulated_data_matches_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for f in [&a, &b] {
        assert!(run(&[
            "simulate-data",
            "--count",
            "129",
            "--seed",
            "5",
            "--out",
            p(f),
            "--quiet"
        ])
        .status
        .success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let data = Dataset::load(&a, 4).unwrap();
    assert_eq!(data.len(), 129);
    let space = ParameterSpace::ozonation();
    for (x, y) in data.inputs.iter().zip(&data.outputs) {
        space.state(x.clone()).unwrap();
        let clean = synthetic_ozonation(&[x[0], x[1], x[2], x[3]]);
        assert_eq!(y.as_slice(), clean.as_slice());
    }
}

#[test]
fn forest_config_trains_from_generated_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    assert!(run(&[
        "simulate-data",
        "--count",
        "80",
        "--out",
        p(&data),
        "--quiet"
    ])
    .status
    .success());
    let cfg = short_config(
        dir.path(),
        "[model]\nkind = \"forest\"\ndata = \"data.csv\"\ntrees = 10\n",
    );
    let out = dir.path().join("forest-run");
    let r = run(&["train", "--config", &cfg, "--out", p(&out), "--quiet"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    // compare refits the recorded model and rechecks the stored best state
    let c = run(&["compare", p(&out)]);
    assert!(c.status.success(), "{}", String::from_utf8_lossy(&c.stderr));
}

#[test]
fn compare_tabulates_and_checks_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "");
    let names = ["marl", "nsga2", "mopso", "bf"];
    let runs: Vec<_> = names.iter().map(|n| dir.path().join(n)).collect();
    assert!(
        run(&["train", "--config", &cfg, "--out", p(&runs[0]), "--quiet"])
            .status
            .success()
    );
    assert!(run(&[
        "baseline",
        "nsga2",
        "--config",
        &cfg,
        "--out",
        p(&runs[1]),
        "--quiet"
    ])
    .status
    .success());
    assert!(run(&[
        "baseline",
        "mopso",
        "--config",
        &cfg,
        "--out",
        p(&runs[2]),
        "--quiet"
    ])
    .status
    .success());
    assert!(run(&[
        "brute-force",
        "--config",
        &cfg,
        "--out",
        p(&runs[3]),
        "--quiet"
    ])
    .status
    .success());
    let history = std::fs::read_to_string(runs[1].join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 1 + 4);
    assert!(history.lines().last().unwrap().starts_with("3,200,"));

    let single = dir.path().join("single.csv");
    assert!(
        run(&["compare", p(&runs[0]), "--out", p(&single), "--quiet"])
            .status
            .success()
    );
    assert_eq!(std::fs::read_to_string(&single).unwrap().lines().count(), 2);

    let table = dir.path().join("all.csv");
    let mut args = vec!["compare"];
    args.extend(runs.iter().map(|r| p(r)));
    args.extend(["--out", p(&table)]);
    let out = run(&args);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().next().unwrap().contains("target"));
    assert_eq!(std::fs::read_to_string(&table).unwrap().lines().count(), 5);

    // brute force is stable and a lower bound
    let bf2 = dir.path().join("bf2");
    assert!(
        run(&["brute-force", "--config", &cfg, "--out", p(&bf2), "--quiet"])
            .status
            .success()
    );
    assert_eq!(
        std::fs::read(runs[3].join("best.json")).unwrap(),
        std::fs::read(bf2.join("best.json")).unwrap()
    );

    // tampering with a stored result is detected
    let best = runs[1].join("best.json");
    let tampered = std::fs::read_to_string(&best).unwrap().replacen(
        "\"summed_error\": ",
        "\"summed_error\": 1",
        1,
    );
    std::fs::write(&best, tampered).unwrap();
    assert!(!run(&["compare", p(&runs[1])]).status.success());
    assert!(!run(&["compare", p(&dir.path().join("missing"))])
        .status
        .success());
}

#[test]
fn enumeration_cap_comes_from_the_environment() {
    let r = Command::new(env!("CARGO_BIN_EXE_fadeopt"))
        .args(["brute-force", "--quiet"])
        .env("FADEOPT_MAX_GRID", "1000")
        .output()
        .unwrap();
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("cap"));
    let ok = Command::new(env!("CARGO_BIN_EXE_fadeopt"))
        .args(["brute-force", "--quiet"])
        .env("FADEOPT_MAX_GRID", "40000")
        .output()
        .unwrap();
    assert!(ok.status.success());
}
