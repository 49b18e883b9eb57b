//! Comparison of a learned network against a reference: structural diff,
//! parameter error, and distributional divergence.
//!
//! Networks learned from sampled data may list value labels in a different
//! order than the generating network (labels are collected in order of first
//! appearance), so the parameter and divergence comparisons align values by
//! label before comparing. Variables are matched by name.

use thiserror::Error;

use crate::entropy::{kl_divergence, EntropyError};
use crate::inference::{brute_force_joint, InferenceError, MarginalTable};
use crate::model::{config_from_index, config_index, BeliefNetwork};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompareError {
    #[error("variable sets differ: {0}")]
    VariableMismatch(String),
    #[error("variable {variable}: value label sets differ")]
    LabelMismatch { variable: String },
    #[error("structures differ at variable {variable}")]
    StructureMismatch { variable: String },
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

/// Arc-set difference between two networks over the same variables.
///
/// A pair adjacent in both networks but oppositely oriented counts once as
/// `reversed` (stored in the reference orientation) and is excluded from
/// `missing` and `extra`. All indices refer to the reference network's
/// canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StructuralDiff {
    pub missing: Vec<(usize, usize)>,
    pub extra: Vec<(usize, usize)>,
    pub reversed: Vec<(usize, usize)>,
}

impl StructuralDiff {
    pub fn is_empty(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty() && self.reversed.is_empty()
    }
}

/// Maps each reference variable index to the learned network's index for
/// the same name.
fn index_map(learned: &BeliefNetwork, reference: &BeliefNetwork) -> Result<Vec<usize>, CompareError> {
    if learned.num_variables() != reference.num_variables() {
        return Err(CompareError::VariableMismatch(format!(
            "{} variables vs {}",
            learned.num_variables(),
            reference.num_variables()
        )));
    }
    reference
        .variables()
        .iter()
        .map(|var| {
            learned.var_index(var.name()).ok_or_else(|| {
                CompareError::VariableMismatch(format!(
                    "variable {:?} missing from learned network",
                    var.name()
                ))
            })
        })
        .collect()
}

/// Compares arc sets, matching variables by name.
pub fn structural_diff(
    learned: &BeliefNetwork,
    reference: &BeliefNetwork,
) -> Result<StructuralDiff, CompareError> {
    let to_learned = index_map(learned, reference)?;
    // Learned arcs expressed in the reference index space.
    let mut inverse = vec![0usize; to_learned.len()];
    for (ref_idx, &l_idx) in to_learned.iter().enumerate() {
        inverse[l_idx] = ref_idx;
    }
    let learned_arcs: Vec<(usize, usize)> = learned
        .arcs()
        .into_iter()
        .map(|(f, t)| (inverse[f], inverse[t]))
        .collect();
    let reference_arcs = reference.arcs();

    let mut diff = StructuralDiff::default();
    for &(f, t) in &reference_arcs {
        if learned_arcs.contains(&(f, t)) {
            continue;
        }
        if learned_arcs.contains(&(t, f)) {
            diff.reversed.push((f, t));
        } else {
            diff.missing.push((f, t));
        }
    }
    for &(f, t) in &learned_arcs {
        if !reference_arcs.contains(&(f, t)) && !reference_arcs.contains(&(t, f)) {
            diff.extra.push((f, t));
        }
    }
    diff.missing.sort_unstable();
    diff.extra.sort_unstable();
    diff.reversed.sort_unstable();
    Ok(diff)
}

/// For each variable, the permutation taking learned value indices to
/// reference value indices. Variable order must match by name.
fn label_permutations(
    learned: &BeliefNetwork,
    reference: &BeliefNetwork,
) -> Result<Vec<Vec<usize>>, CompareError> {
    let map = index_map(learned, reference)?;
    if map.iter().enumerate().any(|(i, &j)| i != j) {
        return Err(CompareError::VariableMismatch(
            "variable declaration orders differ".into(),
        ));
    }
    learned
        .variables()
        .iter()
        .zip(reference.variables())
        .map(|(lv, rv)| {
            lv.values()
                .iter()
                .map(|label| {
                    rv.value_index(label).ok_or(CompareError::LabelMismatch {
                        variable: lv.name().to_string(),
                    })
                })
                .collect::<Result<Vec<usize>, _>>()
                .and_then(|perm| {
                    if rv.arity() == lv.arity() {
                        Ok(perm)
                    } else {
                        Err(CompareError::LabelMismatch {
                            variable: lv.name().to_string(),
                        })
                    }
                })
        })
        .collect()
}

/// Largest absolute difference between corresponding CPT entries.
///
/// Requires identical structures (same parent sets per node); parent order
/// and value-label order may differ and are aligned before comparing.
pub fn cpt_max_abs_error(
    learned: &BeliefNetwork,
    reference: &BeliefNetwork,
) -> Result<f64, CompareError> {
    let perms = label_permutations(learned, reference)?;
    let mut max_err: f64 = 0.0;
    for x in 0..learned.num_variables() {
        let lp = learned.parents(x);
        let rp = reference.parents(x);
        let mut ls = lp.to_vec();
        let mut rs = rp.to_vec();
        ls.sort_unstable();
        rs.sort_unstable();
        if ls != rs {
            return Err(CompareError::StructureMismatch {
                variable: learned.variable(x).name().to_string(),
            });
        }

        let l_arities: Vec<usize> = lp.iter().map(|&p| learned.arity(p)).collect();
        let r_arities: Vec<usize> = rp.iter().map(|&p| reference.arity(p)).collect();
        for config in 0..learned.cpt(x).num_rows() {
            let l_digits = config_from_index(config, &l_arities);
            let r_digits: Vec<usize> = rp
                .iter()
                .map(|p| {
                    let pos = lp.iter().position(|q| q == p).unwrap();
                    perms[*p][l_digits[pos]]
                })
                .collect();
            let r_config = config_index(&r_digits, &r_arities);
            let l_row = learned.cpt(x).row(config);
            let r_row = reference.cpt(x).row(r_config);
            for (v, &p) in l_row.iter().enumerate() {
                max_err = max_err.max((p - r_row[perms[x][v]]).abs());
            }
        }
    }
    Ok(max_err)
}

/// `KL(reference ‖ learned)` over the full joint tables: the reference (true)
/// distribution weights the log-ratios. Infinite divergence is reported as
/// `f64::INFINITY`.
pub fn distribution_kl(
    learned: &BeliefNetwork,
    reference: &BeliefNetwork,
) -> Result<f64, CompareError> {
    let perms = label_permutations(learned, reference)?;
    let p = brute_force_joint(reference)?;
    let q = brute_force_joint(learned)?;

    // Re-index the learned joint into the reference's value coordinates.
    let arities = reference.arities();
    let mut inverse: Vec<Vec<usize>> = Vec::with_capacity(perms.len());
    for perm in &perms {
        let mut inv = vec![0usize; perm.len()];
        for (l, &r) in perm.iter().enumerate() {
            inv[r] = l;
        }
        inverse.push(inv);
    }
    let aligned: Vec<f64> = (0..p.len())
        .map(|idx| {
            let r_digits = config_from_index(idx, &arities);
            let l_digits: Vec<usize> = r_digits
                .iter()
                .enumerate()
                .map(|(v, &d)| inverse[v][d])
                .collect();
            q.probabilities()[config_index(&l_digits, &arities)]
        })
        .collect();

    let q_aligned = MarginalTable::new(p.scope().to_vec(), aligned);
    Ok(kl_divergence(&p, &q_aligned)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Cpt, Variable};

    const LN_2: f64 = std::f64::consts::LN_2;

    fn net(name: &str, n: usize, arcs: &[(usize, usize)]) -> BeliefNetwork {
        let vars: Vec<Variable> = (0..n).map(|i| Variable::binary(format!("X{i}"))).collect();
        let mut parents = vec![Vec::new(); n];
        for &(f, t) in arcs {
            parents[t].push(f);
        }
        BeliefNetwork::structure(name, vars, parents).unwrap()
    }

    #[test]
    fn identical_networks_have_empty_diff() {
        let a = net("a", 4, &[(0, 1), (1, 2), (2, 3)]);
        let diff = structural_diff(&a, &a).unwrap();
        assert!(diff.is_empty());
        assert_eq!(cpt_max_abs_error(&a, &a).unwrap(), 0.0);
        assert!(distribution_kl(&a, &a).unwrap().abs() < 1e-12);
    }

    #[test]
    fn reversed_arc_is_counted_once() {
        let reference = net("r", 2, &[(0, 1)]);
        let learned = net("l", 2, &[(1, 0)]);
        let diff = structural_diff(&learned, &reference).unwrap();
        assert_eq!(diff.reversed, vec![(0, 1)]);
        assert!(diff.missing.is_empty());
        assert!(diff.extra.is_empty());
    }

    #[test]
    fn missing_and_extra_swap_under_argument_exchange() {
        let a = net("a", 4, &[(0, 1), (1, 2)]);
        let b = net("b", 4, &[(0, 1), (2, 3)]);
        let ab = structural_diff(&a, &b).unwrap();
        let ba = structural_diff(&b, &a).unwrap();
        assert_eq!(ab.missing, ba.extra);
        assert_eq!(ab.extra, ba.missing);
        assert_eq!(ab.reversed, ba.reversed);
    }

    #[test]
    fn two_missing_two_extra_on_a_46_arc_network() {
        // Chain of 47 nodes: 46 arcs.
        let arcs: Vec<(usize, usize)> = (0..46).map(|i| (i, i + 1)).collect();
        let reference = net("ref", 47, &arcs);
        let mut learned_arcs: Vec<(usize, usize)> = arcs.clone();
        learned_arcs.retain(|&(f, _)| f != 3 && f != 20);
        learned_arcs.push((0, 45));
        learned_arcs.push((5, 30));
        let learned = net("learned", 47, &learned_arcs);
        let diff = structural_diff(&learned, &reference).unwrap();
        assert_eq!(diff.missing.len(), 2);
        assert_eq!(diff.extra.len(), 2);
        assert_eq!(diff.reversed.len(), 0);
    }

    #[test]
    fn variable_mismatch_is_an_error() {
        let a = net("a", 3, &[]);
        let b = net("b", 2, &[]);
        assert!(matches!(
            structural_diff(&a, &b),
            Err(CompareError::VariableMismatch(_))
        ));
    }

    #[test]
    fn perturbed_cell_is_detected() {
        let reference = BeliefNetwork::new(
            "r",
            vec![Variable::binary("A")],
            vec![vec![]],
            vec![Cpt::new(vec![vec![0.5, 0.5]])],
        )
        .unwrap();
        let learned = BeliefNetwork::new(
            "l",
            vec![Variable::binary("A")],
            vec![vec![]],
            vec![Cpt::new(vec![vec![0.47, 0.53]])],
        )
        .unwrap();
        let err = cpt_max_abs_error(&learned, &reference).unwrap();
        assert!(err >= 0.03 - 1e-12);
        assert!(err < 0.031);
    }

    #[test]
    fn structure_mismatch_is_an_error() {
        let a = net("a", 2, &[(0, 1)]);
        let b = net("b", 2, &[]);
        assert!(matches!(
            cpt_max_abs_error(&a, &b),
            Err(CompareError::StructureMismatch { .. })
        ));
    }

    #[test]
    fn label_permutation_is_aligned_before_comparison() {
        let reference = BeliefNetwork::new(
            "r",
            vec![Variable::new("A", ["f", "t"]), Variable::new("B", ["f", "t"])],
            vec![vec![], vec![0]],
            vec![
                Cpt::new(vec![vec![0.7, 0.3]]),
                Cpt::new(vec![vec![0.8, 0.2], vec![0.1, 0.9]]),
            ],
        )
        .unwrap();
        // Same distribution with both vocabularies listed t-first.
        let learned = BeliefNetwork::new(
            "l",
            vec![Variable::new("A", ["t", "f"]), Variable::new("B", ["t", "f"])],
            vec![vec![], vec![0]],
            vec![
                Cpt::new(vec![vec![0.3, 0.7]]),
                Cpt::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]),
            ],
        )
        .unwrap();
        assert!(cpt_max_abs_error(&learned, &reference).unwrap() < 1e-12);
        assert!(distribution_kl(&learned, &reference).unwrap().abs() < 1e-12);
        assert!(structural_diff(&learned, &reference).unwrap().is_empty());
    }

    #[test]
    fn independent_coins_vs_copy_chain_diverge_by_ln_2() {
        let reference = BeliefNetwork::new(
            "chain",
            vec![Variable::binary("A"), Variable::binary("B")],
            vec![vec![], vec![0]],
            vec![
                Cpt::new(vec![vec![0.5, 0.5]]),
                Cpt::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
            ],
        )
        .unwrap();
        let learned = BeliefNetwork::new(
            "coins",
            vec![Variable::binary("A"), Variable::binary("B")],
            vec![vec![], vec![]],
            vec![
                Cpt::new(vec![vec![0.5, 0.5]]),
                Cpt::new(vec![vec![0.5, 0.5]]),
            ],
        )
        .unwrap();
        let kl = distribution_kl(&learned, &reference).unwrap();
        assert!((kl - LN_2).abs() < 1e-12);
    }

    #[test]
    fn kl_is_infinite_when_learned_misses_support() {
        let reference = net("r", 1, &[]);
        let learned = BeliefNetwork::new(
            "l",
            vec![Variable::binary("X0")],
            vec![vec![]],
            vec![Cpt::new(vec![vec![1.0, 0.0]])],
        )
        .unwrap();
        assert_eq!(distribution_kl(&learned, &reference).unwrap(), f64::INFINITY);
    }
}
