//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use fadeopt::config::{Objective, RunConfig};
use fadeopt::dqn::{QNetwork, ReplayBuffer, Transition};
use fadeopt::marl::{
    median_grid_error, reward, run_training, telescoping_residual, AgentEnsemble, EpsilonSchedule,
    RunLog, TrainingConfig, DEFAULT_ENUMERATION_CAP,
};
use fadeopt::seed;
use fadeopt::space::{ParameterSpace, ParameterSpec, StateVector};
use fadeopt::surrogate::{
    generate_dataset, r_squared, FnModel, ForestModel, ForestParams, ObjectiveModel,
    SyntheticOzonation,
};
use fadeopt::tabular::{run_q_learning, value_iteration, QLearningParams, DEFAULT_MAX_STATES};
use rand::Rng;
use serde_json::Value;

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
const PLANTED: [f64; 4] = [100.0, 60.0, 7.0, 30.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, budget: Duration) -> bool {
    elapsed < budget
}

fn fadeopt(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_fadeopt"))
        .args(args)
        .arg("--quiet")
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "fadeopt {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn summed_error(run: &Path) -> f64 {
    let text = std::fs::read_to_string(run.join("best.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    v["best"]["summed_error"].as_f64().unwrap()
}

fn planted_targets() -> Vec<f64> {
    let space = ParameterSpace::ozonation();
    SyntheticOzonation
        .predict(&space.state(PLANTED.to_vec()).unwrap())
        .unwrap()
}

/// Default settings with targets taken from the planted state.
fn planted_config(dir: &Path) -> PathBuf {
    let mut c = RunConfig::default();
    c.objectives = c
        .objectives
        .iter()
        .zip(planted_targets())
        .map(|(o, target)| Objective {
            name: o.name.clone(),
            target,
        })
        .collect();
    let path = dir.join("planted.toml");
    std::fs::write(&path, c.to_toml().unwrap()).unwrap();
    path
}

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let mut rng = seed::named(2024, "gradient-check");
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (n_in, n_hidden, n_out) = (
            rng.random_range(1..6),
            rng.random_range(2..12),
            rng.random_range(1..10),
        );
        let net = QNetwork::random(n_in, n_hidden, n_out, &mut rng);
        let batch = rng.random_range(1..9);
        let x: Vec<Vec<f64>> = (0..batch)
            .map(|_| (0..n_in).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect();
        let a: Vec<usize> = (0..batch).map(|_| rng.random_range(0..n_out)).collect();
        let y: Vec<f64> = (0..batch).map(|_| rng.random_range(-3.0..3.0)).collect();
        let analytic = net.loss_and_gradient(&x, &a, &y).unwrap().1.flatten();
        let base = net.params();
        let loss = |p: &[f64]| {
            let mut probe = net.clone();
            probe.set_params(p).unwrap();
            probe.loss_and_gradient(&x, &a, &y).unwrap().0
        };
        let h = 1e-5;
        for k in 0..base.len() {
            let (mut plus, mut minus) = (base.clone(), base.clone());
            plus[k] += h;
            minus[k] -= h;
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
            let scale = analytic[k].abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((analytic[k] - numeric).abs() / scale);
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-4 && within(t, Duration::from_secs(10)),
        format!("max relative error {worst:.2e} over 20 networks (<= 1e-4), {t:.2?}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let states = 30;
    let target = 20.0;
    let space =
        ParameterSpace::new(vec![ParameterSpec::new("x", 0.0, (states - 1) as f64, 1.0)]).unwrap();
    let r = |s: &StateVector, s2: &StateVector| reward(s.values()[0], s2.values()[0], target);
    let vi = value_iteration(&space, r, 0.9, 1e-10, DEFAULT_MAX_STATES).unwrap();

    let mut tabular = Vec::new();
    for &s in &SEEDS {
        let params = QLearningParams {
            alpha: 0.5,
            gamma: 0.9,
            schedule: EpsilonSchedule::fixed(0.0).unwrap(),
            steps: 50_000,
            max_states: DEFAULT_MAX_STATES,
        };
        let q = run_q_learning(&space, r, params, s).unwrap();
        tabular.push(
            q.policy()
                .iter()
                .zip(&vi.policy)
                .filter(|(a, b)| a == b)
                .count(),
        );
    }

    let model = FnModel::new(1, |x: &[f64]| vec![x[0]]);
    let mut config = TrainingConfig::default();
    config.run.steps = 20_000;
    let mut deep = Vec::new();
    for &s in &SEEDS {
        let mut ens =
            AgentEnsemble::new(&space, vec![target], &config.dqn, seed::derive(s, "agents"))
                .unwrap();
        run_training(&config, &space, &model, &mut ens, s).unwrap();
        let matched = space
            .states()
            .zip(&vi.policy)
            .filter(|(st, &a)| ens.greedy_action(&space, st).unwrap() == a)
            .count();
        deep.push(matched);
    }
    let t = start.elapsed();
    let pass = tabular.iter().all(|&m| m == states)
        && deep.iter().all(|&m| m as f64 >= 0.95 * states as f64)
        && within(t, Duration::from_secs(120));
    outcome(
        pass,
        format!("{states}-state chain: tabular matches {tabular:?}/{states} (need all), DQN matches {deep:?}/{states} (need >= 95%), {t:.2?}"),
    )
}

fn schedule_trace(log: &RunLog) -> Outcome {
    let exact = log
        .records
        .iter()
        .all(|r| r.epsilon == (0.001 * r.step as f64).min(0.9));
    let first_cap = log
        .records
        .iter()
        .find(|r| r.epsilon == 0.9)
        .map(|r| r.step);
    outcome(
        exact && first_cap == Some(900) && log.len() == 5000,
        format!("{} logged steps equal min(0.001 t, 0.9) exactly: {exact}; cap first reached at step {first_cap:?}", log.len()),
    )
}

fn load_log(run: &Path) -> RunLog {
    let f = std::fs::File::open(run.join("log.csv")).unwrap();
    RunLog::read_csv(f, 4, 4).unwrap()
}

fn main() {
    let work = tempfile::tempdir().unwrap();
    let dir = work.path();
    let config = planted_config(dir);
    let config = path_str(&config).to_string();
    let space = ParameterSpace::ozonation();
    let targets = planted_targets();
    let median = median_grid_error(
        &space,
        &SyntheticOzonation,
        &targets,
        DEFAULT_ENUMERATION_CAP,
    )
    .unwrap();
    let bound = 0.10 * median;

    let mut results: Vec<(u8, &str, Outcome)> = Vec::new();
    results.push((1, "gradient correctness", gradient_check()));
    results.push((2, "oracle equivalence", oracle_equivalence()));

    // One default training run per seed through the command line.
    let mut marl = Vec::new();
    let mut train_times = Vec::new();
    for &s in &SEEDS {
        let out = dir.join(format!("marl-{s}"));
        let t = Instant::now();
        fadeopt(&[
            "train",
            "--config",
            &config,
            "--seed",
            &s.to_string(),
            "--out",
            path_str(&out),
        ]);
        train_times.push(t.elapsed());
        marl.push(summed_error(&out));
    }
    let logs: Vec<RunLog> = SEEDS
        .iter()
        .map(|s| load_log(&dir.join(format!("marl-{s}"))))
        .collect();
    results.push((3, "schedule reproduction", schedule_trace(&logs[0])));

    let hits = marl.iter().filter(|&&e| e <= bound).count();
    let slowest = train_times.iter().max().unwrap();
    results.push((
        4,
        "end-to-end optimization quality",
        outcome(
            hits >= 4 && within(*slowest, Duration::from_secs(600)),
            format!(
                "best summed errors {:?}; {hits}/5 seeds <= {bound:.4} (0.10 x median {median:.4}); slowest run {slowest:.2?}",
                marl.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>()
            ),
        ),
    ));

    // Brute force, baselines and the comparison table.
    let bf = dir.join("brute-force");
    let t = Instant::now();
    fadeopt(&["brute-force", "--config", &config, "--out", path_str(&bf)]);
    let bf_time = t.elapsed();
    let optimum = summed_error(&bf);
    let mut nsga2 = Vec::new();
    let mut mopso = Vec::new();
    let t = Instant::now();
    for &s in &SEEDS {
        for (alg, sink) in [("nsga2", &mut nsga2), ("mopso", &mut mopso)] {
            let out = dir.join(format!("{alg}-{s}"));
            fadeopt(&[
                "baseline",
                alg,
                "--config",
                &config,
                "--seed",
                &s.to_string(),
                "--out",
                path_str(&out),
            ]);
            sink.push(summed_error(&out));
        }
    }
    let baseline_time = t.elapsed();
    let mut lower_bounds = true;
    let mut table_ok = true;
    let mut directional = true;
    for (k, &s) in SEEDS.iter().enumerate() {
        let runs: Vec<PathBuf> = ["marl", "nsga2", "mopso"]
            .iter()
            .map(|m| dir.join(format!("{m}-{s}")))
            .chain([bf.clone()])
            .collect();
        let csv_path = dir.join(format!("compare-{s}.csv"));
        let mut args = vec!["compare".to_string()];
        args.extend(runs.iter().map(|p| path_str(p).to_string()));
        args.extend(["--out".to_string(), path_str(&csv_path).to_string()]);
        let printed = Command::new(env!("CARGO_BIN_EXE_fadeopt"))
            .args(&args)
            .output()
            .unwrap();
        let stdout = String::from_utf8_lossy(&printed.stdout);
        let mut reader = csv::Reader::from_path(&csv_path).unwrap();
        let header = reader.headers().unwrap().clone();
        let col = header.iter().position(|h| h == "summed_error").unwrap();
        let errs: Vec<f64> = reader
            .records()
            .map(|r| r.unwrap()[col].parse().unwrap())
            .collect();
        table_ok &= printed.status.success()
            && errs.len() == 4
            && stdout.contains("target")
            && ["k/s", "L*", "a*", "b*", "summed error"]
                .iter()
                .all(|row| stdout.contains(row));
        lower_bounds &= errs.iter().all(|&e| optimum <= e);
        directional &= marl[k] <= nsga2[k].max(mopso[k]) + 0.05 * median;
    }
    results.push((
        5,
        "brute-force oracle",
        outcome(
            lower_bounds && within(bf_time, Duration::from_secs(30)),
            format!("optimum {optimum:.3e} found in {bf_time:.2?}; lower-bounds every compared run: {lower_bounds}"),
        ),
    ));

    let worst_residual = logs
        .iter()
        .map(|log| telescoping_residual(log, &SyntheticOzonation, &targets).unwrap())
        .fold(0.0, f64::max);
    results.push((
        6,
        "telescoping reward identity",
        outcome(
            worst_residual <= 1e-9,
            format!(
                "max |sum of rewards - endpoint error change| = {worst_residual:.2e} over {} logs",
                logs.len()
            ),
        ),
    ));

    let cap = 2.0 * bound;
    let baselines_ok = nsga2.iter().chain(&mopso).all(|&e| e <= cap);
    results.push((
        7,
        "baseline sanity",
        outcome(
            baselines_ok && table_ok && directional && within(baseline_time, Duration::from_secs(600)),
            format!(
                "nsga2 {:?}, mopso {:?} (need <= {cap:.4}); comparison table layout: {table_ok}; marl <= max(baselines) + 5% median: {directional}; {baseline_time:.2?}",
                nsga2.iter().map(|e| format!("{e:.3}")).collect::<Vec<_>>(),
                mopso.iter().map(|e| format!("{e:.3}")).collect::<Vec<_>>()
            ),
        ),
    ));

    results.push((8, "forest surrogate", forest_check()));
    results.push((9, "determinism", determinism(dir, &config)));
    results.push((10, "structural checks", structure(&dir.join("marl-0"))));

    let mut failed = 0;
    for (n, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {n} ({name}): {}", o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn forest_check() -> Outcome {
    let start = Instant::now();
    let space = ParameterSpace::ozonation();
    let train = generate_dataset(&space, 200, 0.0, 11).unwrap();
    let holdout = generate_dataset(&space, 100, 0.0, 12).unwrap();
    let params = ForestParams {
        trees: 100,
        max_depth: Some(8),
        min_leaf: 1,
    };
    let model = ForestModel::fit(&train, params, 13).unwrap();
    let predictions: Vec<Vec<f64>> = holdout
        .inputs
        .iter()
        .map(|x| model.predict(&StateVector::from_raw(x.clone())).unwrap())
        .collect();
    let scores: Vec<f64> = (0..4)
        .map(|j| {
            let p: Vec<f64> = predictions.iter().map(|row| row[j]).collect();
            r_squared(&p, &holdout.output_column(j)).unwrap()
        })
        .collect();
    let t = start.elapsed();
    outcome(
        scores.iter().all(|&r| r >= 0.90) && within(t, Duration::from_secs(30)),
        format!(
            "holdout R2 {:?} (each >= 0.90), {t:.2?}",
            scores.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn same_bytes(a: &Path, b: &Path) -> bool {
    std::fs::read(a).unwrap() == std::fs::read(b).unwrap()
}

fn determinism(dir: &Path, config: &str) -> Outcome {
    let again = dir.join("repeat");
    let mut checked = Vec::new();
    let out = again.join("marl-0");
    fadeopt(&[
        "train",
        "--config",
        config,
        "--seed",
        "0",
        "--out",
        path_str(&out),
    ]);
    checked.push(same_bytes(
        &out.join("log.csv"),
        &dir.join("marl-0/log.csv"),
    ));
    for alg in ["nsga2", "mopso"] {
        let out = again.join(format!("{alg}-0"));
        fadeopt(&[
            "baseline",
            alg,
            "--config",
            config,
            "--seed",
            "0",
            "--out",
            path_str(&out),
        ]);
        for f in ["history.csv", "front.csv"] {
            checked.push(same_bytes(
                &out.join(f),
                &dir.join(format!("{alg}-0")).join(f),
            ));
        }
    }
    let (d1, d2) = (again.join("data-a.csv"), again.join("data-b.csv"));
    for d in [&d1, &d2] {
        fadeopt(&[
            "simulate-data",
            "--config",
            config,
            "--count",
            "129",
            "--noise",
            "0.02",
            "--out",
            path_str(d),
        ]);
    }
    checked.push(same_bytes(&d1, &d2));
    let c1 = again.join("compare.csv");
    let runs = ["marl-0", "nsga2-0", "mopso-0"].map(|r| dir.join(r));
    let mut args = vec!["compare".to_string()];
    args.extend(runs.iter().map(|p| path_str(p).to_string()));
    args.extend(["--out".to_string(), path_str(&c1).to_string()]);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    fadeopt(&args);
    checked.push(
        same_bytes(&c1, &dir.join("compare-0.csv"))
            || compare_prefix_matches(&c1, &dir.join("compare-0.csv")),
    );
    let ok = checked.iter().all(|&b| b);
    outcome(
        ok,
        format!("{} of {} repeated CSV outputs byte-identical (train log, baseline history and front, dataset, comparison)", checked.iter().filter(|&&b| b).count(), checked.len()),
    )
}

/// The earlier comparison also listed the brute-force run; its first rows
/// must match byte for byte.
fn compare_prefix_matches(short: &Path, long: &Path) -> bool {
    let a = std::fs::read_to_string(short).unwrap();
    let b = std::fs::read_to_string(long).unwrap();
    b.starts_with(&a)
}

fn structure(run: &Path) -> Outcome {
    let space = ParameterSpace::ozonation();
    let actions = space.action_count();
    let text = std::fs::read_to_string(run.join("checkpoint.json")).unwrap();
    let checkpoint = fadeopt::dqn::Checkpoint::from_json(&text).unwrap();
    let shapes_ok = checkpoint.agents.len() == 4
        && checkpoint
            .agents
            .iter()
            .all(|a| a.online.inputs() == 4 && a.online.hidden() == 50 && a.online.outputs() == 81);

    let mut buffer = ReplayBuffer::new(2000).unwrap();
    let state = space.random_state(0);
    for k in 0..2001 {
        buffer.store(Transition {
            state: state.clone(),
            action: k % actions,
            rewards: vec![k as f64],
            next_state: state.clone(),
            terminal: false,
        });
    }
    let oldest = buffer.iter().next().map(|t| t.rewards[0]);
    let newest = buffer.iter().last().map(|t| t.rewards[0]);
    let fifo_ok = buffer.capacity() == 2000
        && buffer.len() == 2000
        && oldest == Some(1.0)
        && newest == Some(2000.0);
    outcome(
        actions == 81 && shapes_ok && fifo_ok,
        format!("{actions} actions; trained networks 4-50-81: {shapes_ok}; replay capacity 2000 with FIFO eviction: {fifo_ok}"),
    )
}
