//! Entropy of belief networks, empirical entropy of structures fit to data,
//! and the Kullback–Leibler closeness metric.
//!
//! Everything is in nats. A network's entropy decomposes into per-node
//! family terms: each node's conditional entropy for a parent configuration,
//! weighted by the exact probability of that configuration. The empirical
//! variant weights configurations by their data frequencies instead, which
//! is what makes `2·N·ΔH` coincide with the classical G² statistic.

use thiserror::Error;

use crate::estimation::{
    column_map, count_family, estimate_cpt, EstimationError, EstimationMode, FamilyCounts,
};
use crate::inference::{brute_force_joint, marginal_over, InferenceError, MarginalTable};
use crate::model::{BeliefNetwork, CaseDatabase};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EntropyError {
    #[error("family of variable {variable} has no complete rows")]
    EmptyFamily { variable: String },
    #[error("marginal tables have different scopes")]
    ScopeMismatch,
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
}

/// A network's total entropy plus the family contribution of each node.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub total: f64,
    pub per_node: Vec<f64>,
}

/// Entropy in nats of a probability vector, with `0·ln 0 = 0`.
pub fn distribution_entropy(probabilities: &[f64]) -> f64 {
    -probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Exact entropy of the network's joint distribution via the
/// conditional-entropy decomposition.
///
/// Parent-configuration weights come from exact inference, so the result
/// equals the entropy of the full joint table without ever materializing it.
pub fn network_entropy(net: &BeliefNetwork) -> Result<EntropyReport, InferenceError> {
    let mut per_node = Vec::with_capacity(net.num_variables());
    for x in 0..net.num_variables() {
        let cpt = net.cpt(x);
        let contribution = if net.parents(x).is_empty() {
            distribution_entropy(cpt.row(0))
        } else {
            let weights = marginal_over(net, net.parents(x))?;
            weights
                .probabilities()
                .iter()
                .enumerate()
                .map(|(config, &w)| w * distribution_entropy(cpt.row(config)))
                .sum()
        };
        per_node.push(contribution);
    }
    Ok(EntropyReport {
        total: per_node.iter().sum(),
        per_node,
    })
}

/// Entropy computed the expensive way, `−Σ p ln p` over the full joint
/// table. The independent oracle for [`network_entropy`].
pub fn brute_force_entropy(net: &BeliefNetwork) -> Result<f64, InferenceError> {
    let joint = brute_force_joint(net)?;
    Ok(distribution_entropy(joint.probabilities()))
}

/// Family entropy against data: `Σ_π (C(π)/N) · H(p̂(·|π))` where N is the
/// family's complete-row weight and p̂ comes from `estimate_cpt` under
/// `mode`. Zero when the family has no complete rows.
pub fn empirical_family_entropy(counts: &FamilyCounts, mode: EstimationMode) -> f64 {
    let n = counts.total();
    if n <= 0.0 {
        return 0.0;
    }
    let cpt = estimate_cpt(counts, mode);
    counts
        .config_totals()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0.0)
        .map(|(config, &c)| (c / n) * distribution_entropy(cpt.row(config)))
        .sum()
}

/// Empirical entropy of a structure evaluated against a database,
/// family by family. Errors when some family has no complete rows.
pub fn empirical_network_entropy(
    structure: &BeliefNetwork,
    db: &CaseDatabase,
    mode: EstimationMode,
) -> Result<EntropyReport, EntropyError> {
    let columns = column_map(structure, db)?;
    let mut per_node = Vec::with_capacity(structure.num_variables());
    for x in 0..structure.num_variables() {
        let parent_cols: Vec<usize> = structure.parents(x).iter().map(|&p| columns[p]).collect();
        let counts = count_family(db, columns[x], &parent_cols);
        if counts.total() <= 0.0 {
            return Err(EntropyError::EmptyFamily {
                variable: structure.variable(x).name().to_string(),
            });
        }
        per_node.push(empirical_family_entropy(&counts, mode));
    }
    Ok(EntropyReport {
        total: per_node.iter().sum(),
        per_node,
    })
}

/// Kullback–Leibler divergence `Σ p ln(p/q)` between two tables over the
/// same scope, with `0·ln(0/q) = 0`.
///
/// Where `p > 0` meets `q = 0` the divergence is infinite; that is reported
/// as `f64::INFINITY`, not an error.
pub fn kl_divergence(p: &MarginalTable, q: &MarginalTable) -> Result<f64, EntropyError> {
    if p.scope() != q.scope() || p.len() != q.len() {
        return Err(EntropyError::ScopeMismatch);
    }
    let mut total = 0.0;
    for (&pi, &qi) in p.probabilities().iter().zip(q.probabilities()) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Ok(f64::INFINITY);
            }
            total += pi * (pi / qi).ln();
        }
    }
    Ok(total)
}
