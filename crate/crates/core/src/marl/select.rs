use crate::error::{Error, Result};

/// Feasible argmax of `values`, ties to the lowest index.
pub fn feasible_argmax(values: &[f64], mask: &[bool]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, (&v, &ok)) in values.iter().zip(mask).enumerate() {
        if ok && best.is_none_or(|(_, b)| v > b) {
            best = Some((k, v));
        }
    }
    best.map(|(k, _)| k).ok_or(Error::NoFeasibleAction)
}

/// The utilitarian joint action: feasible `argmax_a Σ_i q_i[a]`.
pub fn utilitarian_select(q_per_agent: &[Vec<f64>], mask: &[bool]) -> Result<usize> {
    let sums: Vec<f64> = (0..mask.len())
        .map(|a| q_per_agent.iter().map(|q| q[a]).sum())
        .collect();
    feasible_argmax(&sums, mask)
}

/// Largest gain any single agent could get in its own Q-values by swapping
/// the utilitarian action for another feasible one. Non-positive means no
/// agent prefers to deviate.
pub fn max_unilateral_regret(q_per_agent: &[Vec<f64>], mask: &[bool]) -> Result<f64> {
    let chosen = utilitarian_select(q_per_agent, mask)?;
    Ok(q_per_agent
        .iter()
        .map(|q| {
            let best = q[feasible_argmax(q, mask).expect("mask has a feasible action")];
            best - q[chosen]
        })
        .fold(f64::NEG_INFINITY, f64::max))
}
