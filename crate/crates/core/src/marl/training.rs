use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dqn::{
    gradient_step, sync_target, AgentCheckpoint, Batch, Checkpoint, QNetwork, ReplayBuffer,
    Transition,
};
use crate::error::{Error, Result};
use crate::numfmt;
use crate::seed;
use crate::space::{ParameterSpace, StateVector};
use crate::surrogate::ObjectiveModel;

use super::schedule::{choose_with, EpsilonSchedule};
use super::select::{max_unilateral_regret, utilitarian_select};

/// Improvement of one objective: `|f_now - p| - |f_next - p|`.
pub fn reward(f_now: f64, f_next: f64, target: f64) -> f64 {
    (f_now - target).abs() - (f_next - target).abs()
}

/// Network and replay hyperparameters shared by every agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DqnParams {
    pub hidden: usize,
    /// Environment steps before the first gradient step.
    pub warmup: usize,
    /// Gradient steps between target-network resets.
    pub sync_every: usize,
    pub buffer: usize,
    pub batch: usize,
    pub learning_rate: f64,
    pub discount: f64,
}

impl Default for DqnParams {
    fn default() -> Self {
        DqnParams {
            hidden: 50,
            warmup: 100,
            sync_every: 5,
            buffer: 2000,
            batch: 32,
            learning_rate: 0.01,
            discount: 0.9,
        }
    }
}

impl DqnParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(format!("dqn: {m}")));
        if self.hidden == 0 {
            return fail("hidden must be >= 1");
        }
        if self.sync_every == 0 {
            return fail("sync_every must be >= 1");
        }
        if self.buffer == 0 || self.batch == 0 {
            return fail("buffer and batch must be >= 1");
        }
        if self.batch > self.buffer {
            return fail("batch cannot exceed buffer");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive");
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return fail("discount must lie in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleParams {
    pub increment: f64,
    pub max: f64,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        ScheduleParams {
            increment: 0.001,
            max: 0.9,
        }
    }
}

impl ScheduleParams {
    pub fn build(&self) -> Result<EpsilonSchedule> {
        EpsilonSchedule::new(self.increment, self.max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoopParams {
    pub episodes: usize,
    pub steps: usize,
    /// Summed absolute error below which a transition counts as terminal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_threshold: Option<f64>,
}

impl Default for LoopParams {
    fn default() -> Self {
        LoopParams {
            episodes: 1,
            steps: 5000,
            stop_threshold: None,
        }
    }
}

/// Everything `run_training` needs besides the space and the model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrainingConfig {
    pub dqn: DqnParams,
    pub schedule: ScheduleParams,
    pub run: LoopParams,
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub online: QNetwork,
    pub target: QNetwork,
}

/// `m` agents, one per objective, sharing one replay pool.
#[derive(Debug, Clone)]
pub struct AgentEnsemble {
    targets: Vec<f64>,
    agents: Vec<Agent>,
    buffer: ReplayBuffer,
    gradient_steps: usize,
}

impl AgentEnsemble {
    /// Randomly initialized agents; agent `i` draws from stream `i` of `seed`.
    pub fn new(
        space: &ParameterSpace,
        targets: Vec<f64>,
        params: &DqnParams,
        seed: u64,
    ) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::Config(
                "at least one objective target is required".into(),
            ));
        }
        params.validate()?;
        let agents = (0..targets.len())
            .map(|i| {
                let mut rng = seed::rng(seed, i as u64);
                let online =
                    QNetwork::random(space.dims(), params.hidden, space.action_count(), &mut rng);
                Agent {
                    target: sync_target(&online),
                    online,
                }
            })
            .collect();
        Ok(AgentEnsemble {
            targets,
            agents,
            buffer: ReplayBuffer::new(params.buffer)?,
            gradient_steps: 0,
        })
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn gradient_steps(&self) -> usize {
        self.gradient_steps
    }

    /// Online Q-values of every agent at `state`.
    pub fn q_values(&self, space: &ParameterSpace, state: &StateVector) -> Result<Vec<Vec<f64>>> {
        let x = space.encode(state);
        self.agents.iter().map(|a| a.online.forward(&x)).collect()
    }

    /// The utilitarian greedy action at `state`.
    pub fn greedy_action(&self, space: &ParameterSpace, state: &StateVector) -> Result<usize> {
        utilitarian_select(&self.q_values(space, state)?, &space.feasible_mask(state))
    }

    pub fn checkpoint(&self, step: usize, epsilon: f64) -> Checkpoint {
        Checkpoint {
            step,
            epsilon,
            agents: self
                .agents
                .iter()
                .map(|a| AgentCheckpoint {
                    online: a.online.clone(),
                    target: a.target.clone(),
                })
                .collect(),
        }
    }

    fn learn(&mut self, batch: &Batch, params: &DqnParams) -> Result<Vec<f64>> {
        let losses = self
            .agents
            .par_iter_mut()
            .enumerate()
            .map(|(i, agent)| {
                let y = batch.td_targets(&agent.target, i, params.discount)?;
                gradient_step(
                    &mut agent.online,
                    &batch.features,
                    &batch.actions,
                    &y,
                    params.learning_rate,
                )
            })
            .collect::<Result<Vec<f64>>>()?;
        self.gradient_steps += 1;
        if self.gradient_steps.is_multiple_of(params.sync_every) {
            for agent in &mut self.agents {
                agent.target = sync_target(&agent.online);
            }
        }
        Ok(losses)
    }
}

/// Worst unilateral Q-regret of the utilitarian action over `states`.
pub fn deviation_check(
    ensemble: &AgentEnsemble,
    states: &[StateVector],
    space: &ParameterSpace,
) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for s in states {
        let q = ensemble.q_values(space, s)?;
        worst = worst.max(max_unilateral_regret(&q, &space.feasible_mask(s))?);
    }
    Ok(worst)
}

/// One row of the training trace.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// 1-based step counter across all episodes.
    pub step: usize,
    /// 1-based episode number.
    pub episode: usize,
    pub epsilon: f64,
    pub action: usize,
    pub state: StateVector,
    pub next_state: StateVector,
    pub rewards: Vec<f64>,
    /// NaN while no gradient step has been taken.
    pub losses: Vec<f64>,
    /// `|f_i(next_state) - p_i|`.
    pub errors: Vec<f64>,
    pub min_errors: Vec<f64>,
    pub summed_error: f64,
    pub min_summed_error: f64,
    pub best_state: StateVector,
}

/// Per-step trace of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub variable_names: Vec<String>,
    pub objective_names: Vec<String>,
    pub records: Vec<StepRecord>,
}

impl RunLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn best(&self) -> Option<(&StateVector, f64)> {
        self.records
            .last()
            .map(|r| (&r.best_state, r.min_summed_error))
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["step", "episode", "epsilon", "action"]
            .map(String::from)
            .to_vec();
        let prefixed = |prefix: &str, names: &[String]| -> Vec<String> {
            names.iter().map(|v| format!("{prefix}{v}")).collect()
        };
        let (vars, objs) = (&self.variable_names, &self.objective_names);
        h.extend(prefixed("state_", vars));
        h.extend(prefixed("next_", vars));
        for p in ["reward_", "loss_", "error_", "min_error_"] {
            h.extend(prefixed(p, objs));
        }
        h.push("summed_error".into());
        h.push("min_summed_error".into());
        h.extend(prefixed("best_", vars));
        h
    }

    /// Writes one row per step; reals carry 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.header())?;
        for r in &self.records {
            let mut row = vec![
                r.step.to_string(),
                r.episode.to_string(),
                numfmt::real(r.epsilon),
                r.action.to_string(),
            ];
            let reals = r
                .state
                .values()
                .iter()
                .chain(r.next_state.values())
                .chain(&r.rewards)
                .chain(&r.losses)
                .chain(&r.errors)
                .chain(&r.min_errors)
                .chain([&r.summed_error, &r.min_summed_error])
                .chain(r.best_state.values());
            row.extend(reals.map(|&v| numfmt::real(v)));
            w.write_record(row)?;
        }
        w.flush().map_err(|e| Error::io("<run log>", e))?;
        Ok(())
    }

    /// Reads a log written by [`write_csv`](Self::write_csv) for a space with
    /// `n` variables and `m` objectives.
    pub fn read_csv<R: Read>(reader: R, n: usize, m: usize) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        let expected = 4 + 3 * n + 4 * m + 2;
        if header.len() != expected {
            return Err(Error::Dataset(format!(
                "run log has {} columns, expected {expected}",
                header.len()
            )));
        }
        let strip = |s: &str, p: &str| s.strip_prefix(p).map(str::to_owned);
        let variable_names = header[4..4 + n]
            .iter()
            .map(|h| strip(h, "state_"))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Dataset("malformed state columns".into()))?;
        let obj_start = 4 + 2 * n;
        let objective_names = header[obj_start..obj_start + m]
            .iter()
            .map(|h| strip(h, "reward_"))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Dataset("malformed reward columns".into()))?;
        let mut records = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let num = |k: usize| -> Result<f64> {
                rec[k]
                    .parse::<f64>()
                    .map_err(|_| Error::Dataset(format!("bad number `{}`", &rec[k])))
            };
            let int = |k: usize| -> Result<usize> {
                rec[k]
                    .parse::<usize>()
                    .map_err(|_| Error::Dataset(format!("bad integer `{}`", &rec[k])))
            };
            let span =
                |from: usize, len: usize| (from..from + len).map(num).collect::<Result<Vec<f64>>>();
            let mut at = 4;
            let mut take = |len: usize| {
                let v = span(at, len);
                at += len;
                v
            };
            let state = StateVector::from_raw(take(n)?);
            let next_state = StateVector::from_raw(take(n)?);
            let rewards = take(m)?;
            let losses = take(m)?;
            let errors = take(m)?;
            let min_errors = take(m)?;
            let sums = take(2)?;
            let best_state = StateVector::from_raw(take(n)?);
            records.push(StepRecord {
                step: int(0)?,
                episode: int(1)?,
                epsilon: num(2)?,
                action: int(3)?,
                state,
                next_state,
                rewards,
                losses,
                errors,
                min_errors,
                summed_error: sums[0],
                min_summed_error: sums[1],
                best_state,
            });
        }
        Ok(RunLog {
            variable_names,
            objective_names,
            records,
        })
    }
}

/// Largest gap, over agents and contiguous trajectory segments, between the
/// summed logged rewards and `|f(s_first) - p| - |f(s_last) - p|`.
pub fn telescoping_residual(
    log: &RunLog,
    model: &dyn ObjectiveModel,
    targets: &[f64],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let mut start = 0;
    let records = &log.records;
    for k in 0..=records.len() {
        let breaks =
            k == records.len() || (k > start && records[k].state != records[k - 1].next_state);
        if !breaks {
            continue;
        }
        if k > start {
            let first = model.predict(&records[start].state)?;
            let last = model.predict(&records[k - 1].next_state)?;
            for (i, &p) in targets.iter().enumerate() {
                let summed: f64 = records[start..k].iter().map(|r| r.rewards[i]).sum();
                let expected = (first[i] - p).abs() - (last[i] - p).abs();
                worst = worst.max((summed - expected).abs());
            }
        }
        start = k;
    }
    Ok(worst)
}

/// Runs the multi-agent DQN loop for `episodes × steps` environment steps.
///
/// Each step: advance ε, pick the utilitarian action (or a random feasible
/// one), move, score every agent by its objective's improvement, store the
/// transition, and after the warm-up take one gradient step per agent on a
/// shared minibatch. Target networks reset every `sync_every` gradient
/// steps. Randomness comes from named sub-streams of `seed`.
pub fn run_training(
    config: &TrainingConfig,
    space: &ParameterSpace,
    model: &dyn ObjectiveModel,
    ensemble: &mut AgentEnsemble,
    seed: u64,
) -> Result<(RunLog, EpsilonSchedule)> {
    run_training_with_names(config, space, model, ensemble, seed, None)
}

/// [`run_training`] with explicit objective names for the log header.
pub fn run_training_with_names(
    config: &TrainingConfig,
    space: &ParameterSpace,
    model: &dyn ObjectiveModel,
    ensemble: &mut AgentEnsemble,
    seed: u64,
    objective_names: Option<Vec<String>>,
) -> Result<(RunLog, EpsilonSchedule)> {
    config.dqn.validate()?;
    let m = ensemble.targets.len();
    if model.objective_count() != m {
        return Err(Error::Config(format!(
            "model predicts {} objectives but {m} targets were given",
            model.objective_count()
        )));
    }
    if let Some(agent) = ensemble.agents.first() {
        if agent.online.inputs() != space.dims() || agent.online.outputs() != space.action_count() {
            return Err(Error::Config(
                "ensemble networks do not match the parameter space".into(),
            ));
        }
    }
    let mut schedule = config.schedule.build()?;
    let mut env_rng = seed::named(seed, "env");
    let mut explore_rng = seed::named(seed, "explore");
    let mut replay_rng = seed::named(seed, "replay");
    let targets = ensemble.targets.clone();
    let errors_of =
        |f: &[f64]| -> Vec<f64> { f.iter().zip(&targets).map(|(v, p)| (v - p).abs()).collect() };

    let mut log = RunLog {
        variable_names: space.specs().iter().map(|s| s.name.clone()).collect(),
        objective_names: objective_names
            .unwrap_or_else(|| (1..=m).map(|i| format!("objective{i}")).collect()),
        records: Vec::with_capacity(config.run.episodes * config.run.steps),
    };
    let mut min_errors = vec![f64::INFINITY; m];
    let mut min_summed = f64::INFINITY;
    let mut best_state: Option<StateVector> = None;
    let mut step = 0usize;

    for episode in 1..=config.run.episodes {
        if config.run.steps == 0 {
            break;
        }
        let mut state = space.random_state_with(&mut env_rng);
        let mut f_now = model.predict(&state)?;
        for _ in 0..config.run.steps {
            step += 1;
            let epsilon = schedule.step();
            let mask = space.feasible_mask(&state);
            let action = choose_with(epsilon, &mask, &mut explore_rng, || {
                ensemble.greedy_action(space, &state)
            })?;
            let next = space.apply(&state, action)?;
            let f_next = model.predict(&next)?;
            let rewards: Vec<f64> = (0..m)
                .map(|i| reward(f_now[i], f_next[i], targets[i]))
                .collect();
            let errors = errors_of(&f_next);
            let summed: f64 = errors.iter().sum();
            let terminal = config.run.stop_threshold.is_some_and(|t| summed < t);

            ensemble.buffer.store(Transition {
                state: state.clone(),
                action,
                rewards: rewards.clone(),
                next_state: next.clone(),
                terminal,
            });

            let losses = if step > config.dqn.warmup && ensemble.buffer.len() >= config.dqn.batch {
                let sampled = ensemble.buffer.sample(config.dqn.batch, &mut replay_rng)?;
                let batch = Batch::encode(sampled, space);
                ensemble.learn(&batch, &config.dqn)?
            } else {
                vec![f64::NAN; m]
            };

            for (lo, e) in min_errors.iter_mut().zip(&errors) {
                *lo = lo.min(*e);
            }
            if summed < min_summed {
                min_summed = summed;
                best_state = Some(next.clone());
            }
            log.records.push(StepRecord {
                step,
                episode,
                epsilon,
                action,
                state: state.clone(),
                next_state: next.clone(),
                rewards,
                losses,
                errors,
                min_errors: min_errors.clone(),
                summed_error: summed,
                min_summed_error: min_summed,
                best_state: best_state.clone().expect("set on first step"),
            });

            if terminal {
                state = space.random_state_with(&mut env_rng);
                f_now = model.predict(&state)?;
            } else {
                state = next;
                f_now = f_next;
            }
        }
    }
    Ok((log, schedule))
}
