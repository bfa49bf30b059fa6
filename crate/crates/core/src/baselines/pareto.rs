use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marl::Solution;
use crate::space::StateVector;
use crate::surrogate::ObjectiveModel;

/// `a` Pareto-dominates `b` as error vectors: no worse anywhere, strictly
/// better somewhere.
pub fn error_dominates(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        strict |= x < y;
    }
    strict
}

/// Domination between objective vectors, judged on their distance to `targets`.
pub fn dominates(a: &[f64], b: &[f64], targets: &[f64]) -> bool {
    let err =
        |v: &[f64]| -> Vec<f64> { v.iter().zip(targets).map(|(f, p)| (f - p).abs()).collect() };
    error_dominates(&err(a), &err(b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genome: StateVector,
    pub objectives: Vec<f64>,
    pub errors: Vec<f64>,
    pub rank: usize,
    /// `f64::INFINITY` for boundary members of a front.
    pub crowding: f64,
}

impl Individual {
    pub fn evaluate(
        model: &dyn ObjectiveModel,
        targets: &[f64],
        genome: StateVector,
    ) -> Result<Self> {
        let s = Solution::evaluate(model, targets, genome)?;
        Ok(Individual {
            genome: s.state,
            objectives: s.predictions,
            errors: s.errors,
            rank: 0,
            crowding: 0.0,
        })
    }

    pub fn summed_error(&self) -> f64 {
        self.errors.iter().sum()
    }

    pub fn to_solution(&self) -> Solution {
        Solution {
            state: self.genome.clone(),
            predictions: self.objectives.clone(),
            errors: self.errors.clone(),
            summed_error: self.summed_error(),
        }
    }
}

/// Partition error vectors into non-dominated fronts, returned as indices.
/// Indices within a front are ascending.
pub fn nondominated_fronts(errors: &[&[f64]]) -> Vec<Vec<usize>> {
    let n = errors.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if error_dominates(errors[i], errors[j]) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            } else if error_dominates(errors[j], errors[i]) {
                dominates_list[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Fronts of a population by error vector.
pub fn fast_nondominated_sort(pop: &[Individual]) -> Result<Vec<Vec<usize>>> {
    if pop.is_empty() {
        return Err(Error::Config("cannot sort an empty population".into()));
    }
    let errors: Vec<&[f64]> = pop.iter().map(|p| p.errors.as_slice()).collect();
    Ok(nondominated_fronts(&errors))
}

/// Crowding distance of each point within one front.
///
/// Per objective the front is sorted, both ends get infinity and interior
/// points add the gap between their neighbours divided by the objective's
/// range. A zero range contributes nothing.
pub fn crowding_distance(front: &[&[f64]]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = front[0].len();
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        order.sort_by(|&a, &b| front[a][k].total_cmp(&front[b][k]).then(a.cmp(&b)));
        let lo = front[order[0]][k];
        let hi = front[order[n - 1]][k];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let gap = front[order[w + 1]][k] - front[order[w - 1]][k];
            dist[order[w]] += gap / range;
        }
    }
    dist
}

/// Assigns rank and crowding to every individual.
pub(crate) fn assign_rank_and_crowding(pop: &mut [Individual]) -> Vec<Vec<usize>> {
    let errors: Vec<&[f64]> = pop.iter().map(|p| p.errors.as_slice()).collect();
    let fronts = nondominated_fronts(&errors);
    let crowd: Vec<Vec<f64>> = fronts
        .iter()
        .map(|f| crowding_distance(&f.iter().map(|&i| errors[i]).collect::<Vec<_>>()))
        .collect();
    for (rank, (front, c)) in fronts.iter().zip(crowd).enumerate() {
        for (&i, d) in front.iter().zip(c) {
            pop[i].rank = rank;
            pop[i].crowding = d;
        }
    }
    fronts
}
