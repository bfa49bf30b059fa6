use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fadeopt::baselines::{run_mopso, run_nsga2, Individual};
use fadeopt::config::{ModelConfig, RunConfig};
use fadeopt::marl::{
    brute_force_optimum, enumeration_cap, run_training_with_names, AgentEnsemble, Solution,
};
use fadeopt::numfmt;
use fadeopt::surrogate::{generate_dataset, ObjectiveModel};

use crate::output::OutputDir;
use crate::report::{Comparison, RunSummary, SUMMARY};
use crate::{Algorithm, Common};

/// Loaded config plus the directory its relative paths resolve against.
struct Setup {
    config: RunConfig,
    base: PathBuf,
}

impl Setup {
    fn load(common: &Common) -> Result<Self> {
        let (mut config, base) = match &common.config {
            Some(path) => {
                let config = RunConfig::load(path)
                    .with_context(|| format!("invalid config {}", path.display()))?;
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (config, base)
            }
            None => (RunConfig::default(), PathBuf::new()),
        };
        if let Some(seed) = common.seed {
            config.seed = seed;
        }
        Ok(Setup { config, base })
    }

    fn model(&self) -> Result<Box<dyn ObjectiveModel>> {
        self.config
            .build_model(&self.base)
            .context("cannot build the objective model")
    }

    /// The effective config, with data paths made absolute so the copy in
    /// an output directory stands on its own.
    fn record(&self, out: &OutputDir) -> Result<()> {
        let mut c = self.config.clone();
        if let ModelConfig::Forest { data, .. } = &mut c.model {
            let joined = self.base.join(&*data);
            *data = std::path::absolute(&joined).unwrap_or(joined);
        }
        out.write_text("config.toml", &c.to_toml()?)
    }

    fn summary(&self, method: &str, evaluations: usize, best: Solution) -> RunSummary {
        RunSummary {
            method: method.to_string(),
            seed: self.config.seed,
            variables: self.config.space.iter().map(|s| s.name.clone()).collect(),
            objectives: self.config.objective_names(),
            targets: self.config.targets(),
            evaluations,
            best,
        }
    }
}

pub fn train(common: &Common, out: &Path, quiet: bool) -> Result<()> {
    let setup = Setup::load(common)?;
    let out = OutputDir::claim(out)?;
    let c = &setup.config;
    let space = c.parameter_space()?;
    let model = setup.model()?;
    let seeds = c.sub_seeds();
    let mut ensemble = AgentEnsemble::new(&space, c.targets(), &c.dqn, seeds.agents)?;
    let (log, schedule) = run_training_with_names(
        &c.training(),
        &space,
        model.as_ref(),
        &mut ensemble,
        seeds.training,
        Some(c.objective_names()),
    )?;
    setup.record(&out)?;
    let mut w = out.create("log.csv")?;
    log.write_csv(&mut w)?;
    w.flush()?;
    out.write_json(
        "checkpoint.json",
        &ensemble.checkpoint(log.len(), schedule.epsilon()),
    )?;
    let summary = match log.best() {
        Some((state, _)) => setup.summary(
            "marl",
            log.len(),
            Solution::evaluate(model.as_ref(), &c.targets(), state.clone())?,
        ),
        None => bail!("the run has no steps (loop.episodes and loop.steps must be positive)"),
    };
    out.write_json(SUMMARY, &summary)?;
    if !quiet {
        print!("{}", summary.describe());
    }
    Ok(())
}

pub fn simulate_data(
    common: &Common,
    out: &Path,
    count: usize,
    noise: f64,
    quiet: bool,
) -> Result<()> {
    let setup = Setup::load(common)?;
    let space = setup.config.parameter_space()?;
    let data = generate_dataset(&space, count, noise, setup.config.sub_seeds().data)?;
    data.save(out)?;
    if !quiet {
        println!("wrote {} rows to {}", data.len(), out.display());
    }
    Ok(())
}

pub fn baseline(algorithm: Algorithm, common: &Common, out: &Path, quiet: bool) -> Result<()> {
    let setup = Setup::load(common)?;
    let out = OutputDir::claim(out)?;
    let c = &setup.config;
    let space = c.parameter_space()?;
    let model = setup.model()?;
    let targets = c.targets();
    let seeds = c.sub_seeds();
    let (method, per_round, front, best, evaluations, history) = match algorithm {
        Algorithm::Nsga2 => {
            let p = &c.baselines.nsga2;
            let r = run_nsga2(&space, model.as_ref(), &targets, p, seeds.nsga2)?;
            (
                "nsga2",
                p.pop_size,
                r.front,
                r.best,
                r.evaluations,
                r.history,
            )
        }
        Algorithm::Mopso => {
            let p = &c.baselines.mopso;
            let r = run_mopso(&space, model.as_ref(), &targets, p, seeds.mopso)?;
            (
                "mopso",
                p.swarm_size,
                r.archive,
                r.best,
                r.evaluations,
                r.history,
            )
        }
    };
    setup.record(&out)?;
    let mut w = csv::Writer::from_writer(out.create("history.csv")?);
    w.write_record(["round", "evaluations", "best_summed_error"])?;
    for (k, e) in history.iter().enumerate() {
        w.write_record([
            k.to_string(),
            (per_round * (k + 1)).to_string(),
            numfmt::real(*e),
        ])?;
    }
    w.flush()?;
    write_front(&out, c, &front)?;
    let summary = setup.summary(method, evaluations, best);
    out.write_json(SUMMARY, &summary)?;
    if !quiet {
        print!("{}", summary.describe());
    }
    Ok(())
}

fn write_front(out: &OutputDir, c: &RunConfig, front: &[Individual]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out.create("front.csv")?);
    let mut header: Vec<String> = c
        .space
        .iter()
        .map(|s| format!("state_{}", s.name))
        .collect();
    header.extend(c.objectives.iter().map(|o| format!("value_{}", o.name)));
    header.extend(c.objectives.iter().map(|o| format!("error_{}", o.name)));
    w.write_record(&header)?;
    for ind in front {
        let row = ind
            .genome
            .values()
            .iter()
            .chain(&ind.objectives)
            .chain(&ind.errors)
            .map(|&v| numfmt::real(v));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn compare(runs: &[PathBuf], out: Option<&Path>, quiet: bool) -> Result<()> {
    let mut loaded = Vec::with_capacity(runs.len());
    for dir in runs {
        let summary = RunSummary::load(dir)?;
        verify(dir, &summary)?;
        let label = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string());
        loaded.push((label, summary));
    }
    let table = Comparison::new(loaded)?;
    if let Some(path) = out {
        table.write_csv(path)?;
    }
    if !quiet {
        print!("{}", table.render());
    }
    Ok(())
}

/// Re-evaluates a run's best state through the model recorded beside it.
fn verify(dir: &Path, summary: &RunSummary) -> Result<()> {
    let config_path = dir.join("config.toml");
    if !config_path.exists() {
        return Ok(());
    }
    let config = RunConfig::load(&config_path)
        .with_context(|| format!("invalid {}", config_path.display()))?;
    let model = config.build_model(dir)?;
    let again = Solution::evaluate(model.as_ref(), &summary.targets, summary.best.state.clone())?;
    if again != summary.best {
        bail!(
            "{}: stored best solution does not match its model",
            dir.display()
        );
    }
    Ok(())
}

pub fn brute_force(common: &Common, out: Option<&Path>, quiet: bool) -> Result<()> {
    let setup = Setup::load(common)?;
    let out = out.map(OutputDir::claim).transpose()?;
    let c = &setup.config;
    let space = c.parameter_space()?;
    let model = setup.model()?;
    let best = brute_force_optimum(&space, model.as_ref(), &c.targets(), enumeration_cap()?)?;
    let summary = setup.summary("brute-force", space.grid_cardinality() as usize, best);
    if let Some(out) = &out {
        setup.record(out)?;
        out.write_json(SUMMARY, &summary)?;
    }
    if !quiet {
        print!("{}", summary.describe());
    }
    Ok(())
}
