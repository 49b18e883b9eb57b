//! Exact marginal probabilities over variable subsets.
//!
//! The workhorse is [`marginal_over`], variable elimination with a
//! min-degree ordering over the moralized ancestor graph. It exists to
//! supply the parent-configuration weights of the network-entropy
//! decomposition, so no evidence conditioning is supported — only prior
//! marginals. [`brute_force_joint`] enumerates the full joint table and
//! serves as the independent correctness oracle for everything else.

use thiserror::Error;

use crate::model::{config_index, BeliefNetwork};

/// Default ceiling on table cells for any single factor or joint table.
pub const DEFAULT_CELL_BUDGET: usize = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InferenceError {
    #[error("factor over {cells} cells exceeds the budget of {budget}")]
    FactorBudget { cells: usize, budget: usize },
    #[error("invalid scope: {0}")]
    InvalidScope(String),
}

/// Exact probabilities over the joint configurations of a variable subset.
///
/// `probabilities` is indexed in mixed-radix order over `scope`, first
/// scope variable most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalTable {
    scope: Vec<usize>,
    probabilities: Vec<f64>,
}

impl MarginalTable {
    pub fn new(scope: Vec<usize>, probabilities: Vec<f64>) -> Self {
        MarginalTable {
            scope,
            probabilities,
        }
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

/// A nonnegative table over a sorted set of variables, mixed-radix indexed.
struct Factor {
    vars: Vec<usize>,
    card: Vec<usize>,
    data: Vec<f64>,
}

impl Factor {
    fn from_cpt(net: &BeliefNetwork, x: usize) -> Factor {
        let mut vars: Vec<usize> = net.parents(x).to_vec();
        vars.push(x);
        vars.sort_unstable();
        let card: Vec<usize> = vars.iter().map(|&v| net.arity(v)).collect();
        let size: usize = card.iter().product();
        let mut data = vec![0.0; size];

        let family: Vec<usize> = net.parents(x).iter().copied().chain([x]).collect();
        let fam_card: Vec<usize> = family.iter().map(|&v| net.arity(v)).collect();
        let mut values = vec![0usize; family.len()];
        loop {
            let row = config_index(&values[..family.len() - 1], &fam_card[..family.len() - 1]);
            let p = net.cpt(x).row(row)[values[family.len() - 1]];
            // Re-index the family assignment under the sorted var order.
            let sorted_values: Vec<usize> = vars
                .iter()
                .map(|v| values[family.iter().position(|f| f == v).unwrap()])
                .collect();
            data[config_index(&sorted_values, &card)] = p;
            if !increment(&mut values, &fam_card) {
                break;
            }
        }
        Factor { vars, card, data }
    }

    fn multiply(&self, other: &Factor, budget: usize) -> Result<Factor, InferenceError> {
        let mut vars = self.vars.clone();
        for &v in &other.vars {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        vars.sort_unstable();
        let card: Vec<usize> = vars
            .iter()
            .map(|v| {
                self.vars
                    .iter()
                    .position(|sv| sv == v)
                    .map(|i| self.card[i])
                    .unwrap_or_else(|| {
                        let i = other.vars.iter().position(|ov| ov == v).unwrap();
                        other.card[i]
                    })
            })
            .collect();
        let size: usize = card.iter().product();
        if size > budget {
            return Err(InferenceError::FactorBudget {
                cells: size,
                budget,
            });
        }

        let mut data = vec![0.0; size];
        let mut values = vec![0usize; vars.len()];
        loop {
            let a = self.project(&vars, &values);
            let b = other.project(&vars, &values);
            data[config_index(&values, &card)] = self.data[a] * other.data[b];
            if !increment(&mut values, &card) {
                break;
            }
        }
        Ok(Factor { vars, card, data })
    }

    /// Flat index of this factor's cell selected by an assignment over a
    /// superset of its variables.
    fn project(&self, sup_vars: &[usize], sup_values: &[usize]) -> usize {
        let mut idx = 0;
        for (i, &v) in self.vars.iter().enumerate() {
            let pos = sup_vars.iter().position(|sv| *sv == v).unwrap();
            idx = idx * self.card[i] + sup_values[pos];
        }
        idx
    }

    fn sum_out(&self, var: usize) -> Factor {
        let pos = self.vars.iter().position(|&v| v == var).unwrap();
        let mut vars = self.vars.clone();
        vars.remove(pos);
        let mut card = self.card.clone();
        card.remove(pos);
        let size: usize = card.iter().product();
        let mut data = vec![0.0; size];

        let mut values = vec![0usize; self.vars.len()];
        loop {
            let mut out_values: Vec<usize> = values.clone();
            out_values.remove(pos);
            data[config_index(&out_values, &card)] +=
                self.data[config_index(&values, &self.card)];
            if !increment(&mut values, &self.card) {
                break;
            }
        }
        Factor { vars, card, data }
    }
}

/// Mixed-radix odometer step; returns false after the last configuration.
fn increment(values: &mut [usize], card: &[usize]) -> bool {
    for i in (0..values.len()).rev() {
        values[i] += 1;
        if values[i] < card[i] {
            return true;
        }
        values[i] = 0;
    }
    false
}

fn check_scope(net: &BeliefNetwork, scope: &[usize]) -> Result<(), InferenceError> {
    if scope.is_empty() {
        return Err(InferenceError::InvalidScope("scope is empty".into()));
    }
    for (k, &v) in scope.iter().enumerate() {
        if v >= net.num_variables() {
            return Err(InferenceError::InvalidScope(format!(
                "variable index {v} out of range"
            )));
        }
        if scope[..k].contains(&v) {
            return Err(InferenceError::InvalidScope(format!(
                "variable {} listed twice",
                net.variable(v).name()
            )));
        }
    }
    Ok(())
}

/// Scope plus all its ancestors; everything else is barren for a prior
/// marginal and can be dropped before elimination.
fn relevant_set(net: &BeliefNetwork, scope: &[usize]) -> Vec<usize> {
    let mut included = vec![false; net.num_variables()];
    let mut stack: Vec<usize> = scope.to_vec();
    while let Some(x) = stack.pop() {
        if included[x] {
            continue;
        }
        included[x] = true;
        stack.extend_from_slice(net.parents(x));
    }
    (0..net.num_variables()).filter(|&x| included[x]).collect()
}

/// Min-degree elimination order over the moralized graph of `relevant`,
/// ties broken by canonical index. Scope variables are never eliminated.
fn min_degree_order(net: &BeliefNetwork, relevant: &[usize], scope: &[usize]) -> Vec<usize> {
    let n = net.num_variables();
    let mut adjacent = vec![vec![false; n]; n];
    for &x in relevant {
        let ps = net.parents(x);
        for &p in ps {
            adjacent[x][p] = true;
            adjacent[p][x] = true;
        }
        for (i, &a) in ps.iter().enumerate() {
            for &b in &ps[i + 1..] {
                adjacent[a][b] = true;
                adjacent[b][a] = true;
            }
        }
    }

    let mut remaining: Vec<usize> = relevant
        .iter()
        .copied()
        .filter(|v| !scope.contains(v))
        .collect();
    let mut alive: Vec<bool> = vec![false; n];
    for &v in relevant {
        alive[v] = true;
    }

    let mut order = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        // `remaining` stays ascending, so the first minimum wins ties.
        let mut best = remaining[0];
        let mut best_degree = usize::MAX;
        for &v in &remaining {
            let degree = (0..n).filter(|&u| alive[u] && adjacent[v][u]).count();
            if degree < best_degree {
                best = v;
                best_degree = degree;
            }
        }
        // Fill in: neighbors of the eliminated node become a clique.
        let neighbors: Vec<usize> = (0..n).filter(|&u| alive[u] && adjacent[best][u]).collect();
        for (i, &a) in neighbors.iter().enumerate() {
            for &b in &neighbors[i + 1..] {
                adjacent[a][b] = true;
                adjacent[b][a] = true;
            }
        }
        alive[best] = false;
        remaining.retain(|&v| v != best);
        order.push(best);
    }
    order
}

/// Exact marginal distribution of the network over `scope`, with the
/// default factor-cell budget.
pub fn marginal_over(net: &BeliefNetwork, scope: &[usize]) -> Result<MarginalTable, InferenceError> {
    marginal_over_with_budget(net, scope, DEFAULT_CELL_BUDGET)
}

pub fn marginal_over_with_budget(
    net: &BeliefNetwork,
    scope: &[usize],
    budget: usize,
) -> Result<MarginalTable, InferenceError> {
    check_scope(net, scope)?;
    let relevant = relevant_set(net, scope);
    let order = min_degree_order(net, &relevant, scope);
    eliminate(net, scope, &relevant, &order, budget)
}

/// Same as [`marginal_over`] but with a caller-supplied elimination order
/// (any permutation of the variables; irrelevant entries are ignored).
/// Exists to let tests assert that the marginal is order-invariant.
pub fn marginal_over_with_order(
    net: &BeliefNetwork,
    scope: &[usize],
    elimination_order: &[usize],
    budget: usize,
) -> Result<MarginalTable, InferenceError> {
    check_scope(net, scope)?;
    let relevant = relevant_set(net, scope);
    let order: Vec<usize> = elimination_order
        .iter()
        .copied()
        .filter(|v| relevant.contains(v) && !scope.contains(v))
        .collect();
    eliminate(net, scope, &relevant, &order, budget)
}

fn eliminate(
    net: &BeliefNetwork,
    scope: &[usize],
    relevant: &[usize],
    order: &[usize],
    budget: usize,
) -> Result<MarginalTable, InferenceError> {
    let mut factors: Vec<Factor> = relevant.iter().map(|&x| Factor::from_cpt(net, x)).collect();

    for &v in order {
        let (with_v, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.vars.contains(&v));
        factors = rest;
        let mut product: Option<Factor> = None;
        for f in with_v {
            product = Some(match product {
                None => f,
                Some(acc) => acc.multiply(&f, budget)?,
            });
        }
        if let Some(p) = product {
            factors.push(p.sum_out(v));
        }
    }

    let mut result = Factor {
        vars: Vec::new(),
        card: Vec::new(),
        data: vec![1.0],
    };
    for f in factors {
        result = result.multiply(&f, budget)?;
    }

    // Reorder from the internal sorted layout to the requested scope order.
    let card: Vec<usize> = scope.iter().map(|&v| net.arity(v)).collect();
    let size: usize = card.iter().product();
    let mut probabilities = vec![0.0; size];
    let mut values = vec![0usize; scope.len()];
    loop {
        let src = result.project(scope, &values);
        probabilities[config_index(&values, &card)] = result.data[src];
        if !increment(&mut values, &card) {
            break;
        }
    }
    Ok(MarginalTable::new(scope.to_vec(), probabilities))
}

/// The full joint table, one entry per assignment in canonical mixed-radix
/// order. Guarded by the default cell budget.
pub fn brute_force_joint(net: &BeliefNetwork) -> Result<MarginalTable, InferenceError> {
    brute_force_joint_with_budget(net, DEFAULT_CELL_BUDGET)
}

pub fn brute_force_joint_with_budget(
    net: &BeliefNetwork,
    budget: usize,
) -> Result<MarginalTable, InferenceError> {
    let arities = net.arities();
    let mut size: usize = 1;
    for &a in &arities {
        size = size.checked_mul(a).unwrap_or(usize::MAX);
        if size > budget {
            return Err(InferenceError::FactorBudget {
                cells: size,
                budget,
            });
        }
    }

    let n = net.num_variables();
    let mut probabilities = Vec::with_capacity(size);
    let mut values = vec![0usize; n];
    loop {
        let mut p = 1.0;
        for x in 0..n {
            p *= net.cpt(x).row(net.parent_config(x, &values))[values[x]];
        }
        probabilities.push(p);
        if !increment(&mut values, &arities) {
            break;
        }
    }
    let scope: Vec<usize> = (0..n).collect();
    Ok(MarginalTable::new(scope, probabilities))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::chain_net;
    use crate::model::{Cpt, Variable};

    #[test]
    fn root_marginal_equals_prior() {
        let net = chain_net();
        let m = marginal_over(&net, &[0]).unwrap();
        assert!((m.probabilities()[0] - 0.7).abs() < 1e-12);
        assert!((m.probabilities()[1] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn child_marginal_is_total_probability() {
        let net = chain_net();
        let m = marginal_over(&net, &[1]).unwrap();
        // P(B=t) = 0.3*0.9 + 0.7*0.2
        assert!((m.probabilities()[1] - 0.41).abs() < 1e-12);
        assert!((m.probabilities()[0] - 0.59).abs() < 1e-12);
    }

    #[test]
    fn full_scope_matches_brute_force() {
        let net = chain_net();
        let m = marginal_over(&net, &[0, 1]).unwrap();
        let joint = brute_force_joint(&net).unwrap();
        for (a, b) in m.probabilities().iter().zip(joint.probabilities()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scope_order_controls_table_layout() {
        let net = chain_net();
        let ab = marginal_over(&net, &[0, 1]).unwrap();
        let ba = marginal_over(&net, &[1, 0]).unwrap();
        // (A=t, B=f) is index 2 in [A,B] layout and index 1 in [B,A] layout.
        assert!((ab.probabilities()[2] - ba.probabilities()[1]).abs() < 1e-15);
    }

    #[test]
    fn single_fair_coin_joint() {
        let net = BeliefNetwork::new(
            "coin",
            vec![Variable::binary("C")],
            vec![vec![]],
            vec![Cpt::new(vec![vec![0.5, 0.5]])],
        )
        .unwrap();
        let joint = brute_force_joint(&net).unwrap();
        assert_eq!(joint.probabilities(), &[0.5, 0.5]);
    }

    #[test]
    fn five_binary_variables_give_32_entries() {
        let vars: Vec<Variable> = (0..5).map(|i| Variable::binary(format!("X{i}"))).collect();
        let net = BeliefNetwork::structure("j", vars, vec![vec![]; 5]).unwrap();
        let joint = brute_force_joint(&net).unwrap();
        assert_eq!(joint.len(), 32);
        let total: f64 = joint.probabilities().iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn budget_exceeded_names_factor_size() {
        let net = chain_net();
        let err = brute_force_joint_with_budget(&net, 2).unwrap_err();
        match err {
            InferenceError::FactorBudget { cells, budget } => {
                assert_eq!(cells, 4);
                assert_eq!(budget, 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(marginal_over_with_budget(&net, &[0, 1], 2).is_err());
    }

    #[test]
    fn invalid_scopes_are_rejected() {
        let net = chain_net();
        assert!(marginal_over(&net, &[]).is_err());
        assert!(marginal_over(&net, &[5]).is_err());
        assert!(marginal_over(&net, &[0, 0]).is_err());
    }
}
