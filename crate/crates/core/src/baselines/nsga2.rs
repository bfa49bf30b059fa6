use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pareto::{assign_rank_and_crowding, crowding_distance, nondominated_fronts, Individual};
use super::{evaluate_all, initial_levels, BestSoFar};
use crate::error::{Error, Result};
use crate::marl::Solution;
use crate::seed;
use crate::space::{ParameterSpace, StateVector};
use crate::surrogate::ObjectiveModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Nsga2Params {
    pub pop_size: usize,
    pub generations: usize,
    /// Probability that a selected pair is recombined.
    pub p_cross: f64,
    /// Per-variable probability of a ±1 grid step.
    pub p_mut: f64,
}

impl Default for Nsga2Params {
    /// 50 + 99·50 = 5000 evaluations, the default training run length.
    fn default() -> Self {
        Nsga2Params {
            pop_size: 50,
            generations: 99,
            p_cross: 0.9,
            p_mut: 0.25,
        }
    }
}

impl Nsga2Params {
    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 4 || !self.pop_size.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "nsga2: pop_size must be even and >= 4, got {}",
                self.pop_size
            )));
        }
        if !(0.0..=1.0).contains(&self.p_cross) || !(0.0..=1.0).contains(&self.p_mut) {
            return Err(Error::Config(
                "nsga2: p_cross and p_mut must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    pub fn evaluations(&self) -> usize {
        self.pop_size * (self.generations + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nsga2Outcome {
    pub population: Vec<Individual>,
    /// Rank-0 members of the final population.
    pub front: Vec<Individual>,
    /// Lowest summed error over every evaluation.
    pub best: Solution,
    pub evaluations: usize,
    /// Best summed error so far after initialization and each generation.
    pub history: Vec<f64>,
}

/// Indices of the `n` survivors of `pool`: whole fronts in rank order, the
/// last partial front filled by descending crowding distance.
pub fn select_survivors(pool: &[Individual], n: usize) -> Vec<usize> {
    let errors: Vec<&[f64]> = pool.iter().map(|p| p.errors.as_slice()).collect();
    let mut chosen = Vec::with_capacity(n);
    for front in nondominated_fronts(&errors) {
        if chosen.len() + front.len() <= n {
            chosen.extend(front);
            continue;
        }
        let d = crowding_distance(&front.iter().map(|&i| errors[i]).collect::<Vec<_>>());
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));
        chosen.extend(order.into_iter().take(n - chosen.len()).map(|k| front[k]));
        break;
    }
    chosen
}

fn tournament(pop: &[Individual], rng: &mut ChaCha8Rng) -> usize {
    let a = rng.random_range(0..pop.len());
    let b = rng.random_range(0..pop.len());
    let (x, y) = (&pop[a], &pop[b]);
    if y.rank < x.rank || (y.rank == x.rank && y.crowding > x.crowding) {
        b
    } else {
        a
    }
}

fn mutate(genome: &mut [usize], levels: &[usize], p_mut: f64, rng: &mut ChaCha8Rng) {
    for (g, &l) in genome.iter_mut().zip(levels) {
        if rng.random::<f64>() < p_mut {
            *g = if rng.random::<bool>() {
                (*g + 1).min(l - 1)
            } else {
                g.saturating_sub(1)
            };
        }
    }
}

/// NSGA-II from a random initial population.
pub fn run_nsga2(
    space: &ParameterSpace,
    model: &dyn ObjectiveModel,
    targets: &[f64],
    params: &Nsga2Params,
    seed: u64,
) -> Result<Nsga2Outcome> {
    run_nsga2_from(space, model, targets, params, None, seed)
}

/// NSGA-II, optionally seeded with `initial` (exactly `pop_size` states).
pub fn run_nsga2_from(
    space: &ParameterSpace,
    model: &dyn ObjectiveModel,
    targets: &[f64],
    params: &Nsga2Params,
    initial: Option<Vec<StateVector>>,
    seed: u64,
) -> Result<Nsga2Outcome> {
    params.validate()?;
    let mut rng = seed::named(seed, "nsga2");
    let levels = space.levels().to_vec();
    let genomes = initial_levels(space, initial, params.pop_size, &mut rng)?;
    let mut pop = evaluate_all(space, model, targets, &genomes)?;
    let mut best = BestSoFar::default();
    best.observe(&pop);
    let mut history = vec![best.summed()];
    assign_rank_and_crowding(&mut pop);

    for _ in 0..params.generations {
        let mut children = Vec::with_capacity(params.pop_size);
        while children.len() < params.pop_size {
            let mut c1 = space.levels_of(&pop[tournament(&pop, &mut rng)].genome);
            let mut c2 = space.levels_of(&pop[tournament(&pop, &mut rng)].genome);
            if rng.random::<f64>() < params.p_cross {
                for j in 0..levels.len() {
                    if rng.random::<bool>() {
                        std::mem::swap(&mut c1[j], &mut c2[j]);
                    }
                }
            }
            mutate(&mut c1, &levels, params.p_mut, &mut rng);
            mutate(&mut c2, &levels, params.p_mut, &mut rng);
            children.push(c1);
            children.push(c2);
        }
        let offspring = evaluate_all(space, model, targets, &children)?;
        best.observe(&offspring);
        history.push(best.summed());

        let mut pool = pop;
        pool.extend(offspring);
        let keep = select_survivors(&pool, params.pop_size);
        let mut slots: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
        pop = keep
            .into_iter()
            .map(|i| slots[i].take().expect("survivor chosen once"))
            .collect();
        assign_rank_and_crowding(&mut pop);
    }

    let front = pop.iter().filter(|p| p.rank == 0).cloned().collect();
    Ok(Nsga2Outcome {
        population: pop,
        front,
        best: best.solution(),
        evaluations: best.evaluations,
        history,
    })
}
