use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pareto::{crowding_distance, error_dominates, Individual};
use super::{evaluate_all, initial_levels, BestSoFar};
use crate::error::{Error, Result};
use crate::marl::Solution;
use crate::seed;
use crate::space::{ParameterSpace, StateVector};
use crate::surrogate::ObjectiveModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MopsoParams {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    /// Attraction toward the personal best.
    pub c1: f64,
    /// Attraction toward the archive leader.
    pub c2: f64,
    pub archive_cap: usize,
}

impl Default for MopsoParams {
    /// 50 + 99·50 = 5000 evaluations, the default training run length.
    fn default() -> Self {
        MopsoParams {
            swarm_size: 50,
            iterations: 99,
            inertia: 0.4,
            c1: 1.5,
            c2: 1.5,
            archive_cap: 100,
        }
    }
}

impl MopsoParams {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 2 {
            return Err(Error::Config(format!(
                "mopso: swarm_size must be >= 2, got {}",
                self.swarm_size
            )));
        }
        if self.archive_cap == 0 {
            return Err(Error::Config("mopso: archive_cap must be >= 1".into()));
        }
        for (name, v) in [("inertia", self.inertia), ("c1", self.c1), ("c2", self.c2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "mopso: {name} must be a non-negative number"
                )));
            }
        }
        Ok(())
    }

    pub fn evaluations(&self) -> usize {
        self.swarm_size * (self.iterations + 1)
    }
}

/// A particle moving through grid-level coordinates (level `k` of a
/// variable sits at position `k`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub personal_best: Individual,
    /// Nearest grid point to `position`, as evaluated.
    pub current: Individual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MopsoOutcome {
    pub particles: Vec<Particle>,
    /// Non-dominated error vectors found, at most `archive_cap`.
    pub archive: Vec<Individual>,
    pub best: Solution,
    pub evaluations: usize,
    /// Best summed error so far after initialization and each iteration.
    pub history: Vec<f64>,
}

fn snap(position: &[f64], levels: &[usize]) -> Vec<usize> {
    position
        .iter()
        .zip(levels)
        .map(|(&x, &l)| (x.round().max(0.0) as usize).min(l - 1))
        .collect()
}

fn level_position(space: &ParameterSpace, s: &StateVector) -> Vec<f64> {
    space.levels_of(s).into_iter().map(|l| l as f64).collect()
}

/// Adds `cand` unless something in the archive dominates it or matches its
/// error vector, evicts what it dominates, then prunes the most crowded
/// entries down to `cap`.
fn archive_insert(archive: &mut Vec<Individual>, cand: &Individual, cap: usize) {
    if archive
        .iter()
        .any(|a| a.errors == cand.errors || error_dominates(&a.errors, &cand.errors))
    {
        return;
    }
    archive.retain(|a| !error_dominates(&cand.errors, &a.errors));
    archive.push(cand.clone());
    while archive.len() > cap {
        let d = crowding_distance(
            &archive
                .iter()
                .map(|a| a.errors.as_slice())
                .collect::<Vec<_>>(),
        );
        let worst = (0..d.len())
            .min_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)))
            .expect("archive is non-empty");
        archive.remove(worst);
    }
}

/// A uniformly drawn member of the less crowded half of the archive.
fn pick_leader<'a>(archive: &'a [Individual], rng: &mut ChaCha8Rng) -> &'a Individual {
    let d = crowding_distance(
        &archive
            .iter()
            .map(|a| a.errors.as_slice())
            .collect::<Vec<_>>(),
    );
    let mut order: Vec<usize> = (0..archive.len()).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));
    let half = archive.len().div_ceil(2);
    &archive[order[rng.random_range(0..half)]]
}

/// MOPSO from a random initial swarm.
pub fn run_mopso(
    space: &ParameterSpace,
    model: &dyn ObjectiveModel,
    targets: &[f64],
    params: &MopsoParams,
    seed: u64,
) -> Result<MopsoOutcome> {
    run_mopso_from(space, model, targets, params, None, seed)
}

/// MOPSO, optionally starting particles at `initial` (exactly `swarm_size`
/// states). Initial velocities are zero.
pub fn run_mopso_from(
    space: &ParameterSpace,
    model: &dyn ObjectiveModel,
    targets: &[f64],
    params: &MopsoParams,
    initial: Option<Vec<StateVector>>,
    seed: u64,
) -> Result<MopsoOutcome> {
    params.validate()?;
    let mut rng = seed::named(seed, "mopso");
    let levels = space.levels().to_vec();
    let n = levels.len();
    let genomes = initial_levels(space, initial, params.swarm_size, &mut rng)?;
    let evaluated = evaluate_all(space, model, targets, &genomes)?;
    let mut best = BestSoFar::default();
    best.observe(&evaluated);
    let mut history = vec![best.summed()];
    let mut archive = Vec::new();
    for ind in &evaluated {
        archive_insert(&mut archive, ind, params.archive_cap);
    }
    let mut swarm: Vec<Particle> = genomes
        .iter()
        .zip(evaluated)
        .map(|(g, ind)| Particle {
            position: g.iter().map(|&l| l as f64).collect(),
            velocity: vec![0.0; n],
            personal_best: ind.clone(),
            current: ind,
        })
        .collect();

    for _ in 0..params.iterations {
        for p in &mut swarm {
            let pbest = level_position(space, &p.personal_best.genome);
            let leader = level_position(space, &pick_leader(&archive, &mut rng).genome);
            for j in 0..n {
                let (r1, r2): (f64, f64) = (rng.random(), rng.random());
                p.velocity[j] = params.inertia * p.velocity[j]
                    + params.c1 * r1 * (pbest[j] - p.position[j])
                    + params.c2 * r2 * (leader[j] - p.position[j]);
                let hi = (levels[j] - 1) as f64;
                let x = p.position[j] + p.velocity[j];
                if x < 0.0 || x > hi {
                    p.velocity[j] = 0.0;
                }
                p.position[j] = x.clamp(0.0, hi);
            }
        }
        let snapped: Vec<Vec<usize>> = swarm.iter().map(|p| snap(&p.position, &levels)).collect();
        let evaluated = evaluate_all(space, model, targets, &snapped)?;
        best.observe(&evaluated);
        history.push(best.summed());
        for (p, ind) in swarm.iter_mut().zip(evaluated) {
            archive_insert(&mut archive, &ind, params.archive_cap);
            let replace = if error_dominates(&ind.errors, &p.personal_best.errors) {
                true
            } else if error_dominates(&p.personal_best.errors, &ind.errors) {
                false
            } else {
                rng.random::<bool>()
            };
            if replace {
                p.personal_best = ind.clone();
            }
            p.current = ind;
        }
    }

    Ok(MopsoOutcome {
        particles: swarm,
        archive,
        best: best.solution(),
        evaluations: best.evaluations,
        history,
    })
}
