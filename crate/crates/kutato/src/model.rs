//! Core representation of discrete belief networks and case databases.
//!
//! A [`BeliefNetwork`] is a DAG over discrete variables where every node
//! carries a conditional-probability table (one probability row per joint
//! instantiation of its parents). A [`CaseDatabase`] holds weighted, possibly
//! incomplete observation records over the same kind of variables.
//!
//! All types are immutable after construction and safe to share across
//! threads.

use std::collections::BinaryHeap;
use std::fmt;

use thiserror::Error;

/// A discrete variable: a name plus an ordered vocabulary of value labels.
///
/// The position of a label in `values` is the value index used everywhere
/// else (assignments, CPT columns, database cells).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    name: String,
    values: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, values: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Variable {
            name: name.into(),
            values: values.into_iter().map(Into::into).collect(),
        }
    }

    /// Convenience constructor for a two-valued variable labelled `f`/`t`.
    pub fn binary(name: impl Into<String>) -> Self {
        Variable::new(name, ["f", "t"])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    /// Number of values this variable can take.
    pub fn arity(&self) -> usize {
        self.values.len()
    }

    pub fn value_index(&self, label: &str) -> Option<usize> {
        self.values.iter().position(|v| v == label)
    }
}

/// Conditional-probability table for a single node.
///
/// `rows[c]` is the probability vector over the child's values for parent
/// configuration `c`, where configurations are enumerated in mixed-radix
/// order over the parent value indices with the first-listed parent most
/// significant. A root node has exactly one row.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    rows: Vec<Vec<f64>>,
}

impl Cpt {
    pub fn new(rows: Vec<Vec<f64>>) -> Self {
        Cpt { rows }
    }

    /// A table of `num_configs` uniform rows over `arity` values.
    pub fn uniform(num_configs: usize, arity: usize) -> Self {
        let p = 1.0 / arity as f64;
        Cpt {
            rows: vec![vec![p; arity]; num_configs],
        }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, config: usize) -> &[f64] {
        &self.rows[config]
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    fn renormalize(&mut self) {
        for row in &mut self.rows {
            let sum: f64 = row.iter().sum();
            // Rows already summing to 1 at machine precision are left
            // untouched so that serialization round-trips bit for bit.
            if sum > 0.0 && (sum - 1.0).abs() > 1e-12 {
                for p in row.iter_mut() {
                    *p /= sum;
                }
            }
        }
    }
}

/// One value index per network variable, in canonical (declaration) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub values: Vec<usize>,
}

impl Assignment {
    pub fn new(values: Vec<usize>) -> Self {
        Assignment { values }
    }
}

/// Mixed-radix index of a configuration: `values[k]` is the digit for the
/// k-th position and the first position is most significant.
pub fn config_index(values: &[usize], arities: &[usize]) -> usize {
    debug_assert_eq!(values.len(), arities.len());
    let mut idx = 0;
    for (v, a) in values.iter().zip(arities) {
        debug_assert!(v < a);
        idx = idx * a + v;
    }
    idx
}

/// Inverse of [`config_index`].
pub fn config_from_index(mut index: usize, arities: &[usize]) -> Vec<usize> {
    let mut values = vec![0; arities.len()];
    for (slot, a) in values.iter_mut().zip(arities).rev() {
        *slot = index % a;
        index /= a;
    }
    values
}

/// Report of every invariant violation found while validating a network or
/// database. Scanning never stops at the first problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.violations.join("; "))
    }
}

impl std::error::Error for ValidationReport {}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("cycle through variables: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
}

/// A directed acyclic graph of discrete variables with one CPT per node.
///
/// Variable order is the declaration order and is canonical: assignments,
/// joint tables and file serialization all follow it.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefNetwork {
    name: String,
    variables: Vec<Variable>,
    parents: Vec<Vec<usize>>,
    cpts: Vec<Cpt>,
}

impl BeliefNetwork {
    /// Builds a network after checking every structural invariant.
    ///
    /// CPT rows whose sums are within `1e-6` of one are accepted and then
    /// renormalized to sum to one, so downstream arithmetic never sees the
    /// literal round-off of a network file.
    pub fn new(
        name: impl Into<String>,
        variables: Vec<Variable>,
        parents: Vec<Vec<usize>>,
        cpts: Vec<Cpt>,
    ) -> Result<Self, ValidationReport> {
        let mut net = BeliefNetwork {
            name: name.into(),
            variables,
            parents,
            cpts,
        };
        validate_network(&net)?;
        for cpt in &mut net.cpts {
            cpt.renormalize();
        }
        Ok(net)
    }

    /// Builds a network without validation. Intended for tests that need to
    /// construct deliberately invalid inputs.
    pub fn new_unchecked(
        name: impl Into<String>,
        variables: Vec<Variable>,
        parents: Vec<Vec<usize>>,
        cpts: Vec<Cpt>,
    ) -> Self {
        BeliefNetwork {
            name: name.into(),
            variables,
            parents,
            cpts,
        }
    }

    /// A structure-only network: the given graph with uniform CPTs, ready to
    /// be parameterized from data.
    pub fn structure(
        name: impl Into<String>,
        variables: Vec<Variable>,
        parents: Vec<Vec<usize>>,
    ) -> Result<Self, ValidationReport> {
        let cpts = parents
            .iter()
            .enumerate()
            .map(|(x, ps)| {
                let configs: usize = ps.iter().map(|&p| variables[p].arity()).product();
                Cpt::uniform(configs, variables[x].arity())
            })
            .collect();
        BeliefNetwork::new(name, variables, parents, cpts)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, index: usize) -> &Variable {
        &self.variables[index]
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn arity(&self, index: usize) -> usize {
        self.variables[index].arity()
    }

    pub fn arities(&self) -> Vec<usize> {
        self.variables.iter().map(Variable::arity).collect()
    }

    pub fn parents(&self, index: usize) -> &[usize] {
        &self.parents[index]
    }

    pub fn parent_lists(&self) -> &[Vec<usize>] {
        &self.parents
    }

    pub fn cpt(&self, index: usize) -> &Cpt {
        &self.cpts[index]
    }

    /// All arcs as `(from, to)` pairs, sorted.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut arcs: Vec<(usize, usize)> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(to, ps)| ps.iter().map(move |&from| (from, to)))
            .collect();
        arcs.sort_unstable();
        arcs
    }

    pub fn num_arcs(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// Row index into `cpt(x)` selected by a full assignment.
    pub fn parent_config(&self, x: usize, assignment: &[usize]) -> usize {
        let mut idx = 0;
        for &p in &self.parents[x] {
            idx = idx * self.variables[p].arity() + assignment[p];
        }
        idx
    }
}

/// Checks every [`BeliefNetwork`] invariant and reports all violations.
pub fn validate_network(net: &BeliefNetwork) -> Result<(), ValidationReport> {
    let mut violations = Vec::new();
    let n = net.variables.len();

    for (i, var) in net.variables.iter().enumerate() {
        if var.name.is_empty() {
            violations.push(format!("variable {i}: empty name"));
        }
        if var.arity() == 0 {
            violations.push(format!("variable {}: no values (arity 0)", var.name));
        }
        for (k, label) in var.values.iter().enumerate() {
            if var.values[..k].contains(label) {
                violations.push(format!(
                    "variable {}: duplicate value label {label:?}",
                    var.name
                ));
            }
        }
        for other in &net.variables[..i] {
            if other.name == var.name {
                violations.push(format!("duplicate variable name {:?}", var.name));
            }
        }
    }

    if net.parents.len() != n {
        violations.push(format!(
            "parent list count {} does not match variable count {n}",
            net.parents.len()
        ));
    }
    if net.cpts.len() != n {
        violations.push(format!(
            "cpt count {} does not match variable count {n}",
            net.cpts.len()
        ));
    }

    for (x, ps) in net.parents.iter().enumerate().take(n) {
        let name = net.variables[x].name();
        for (k, &p) in ps.iter().enumerate() {
            if p >= n {
                violations.push(format!("variable {name}: parent index {p} out of range"));
            } else if p == x {
                violations.push(format!("variable {name}: is its own parent"));
            } else if ps[..k].contains(&p) {
                violations.push(format!(
                    "variable {name}: duplicate parent {}",
                    net.variables[p].name()
                ));
            }
        }
    }

    // Only meaningful when all parent indices resolved.
    if violations.is_empty() {
        if let Err(ModelError::Cycle(names)) = topological_order(net) {
            violations.push(format!("cycle through variables: {}", names.join(" -> ")));
        }
    }

    for x in 0..n.min(net.cpts.len()) {
        let name = net.variables[x].name();
        let arity = net.variables[x].arity();
        let expected_rows: usize = net
            .parents
            .get(x)
            .map(|ps| {
                ps.iter()
                    .filter(|&&p| p < n)
                    .map(|&p| net.variables[p].arity())
                    .product()
            })
            .unwrap_or(1);
        let cpt = &net.cpts[x];
        if cpt.num_rows() != expected_rows {
            violations.push(format!(
                "variable {name}: cpt has {} rows, expected {expected_rows}",
                cpt.num_rows()
            ));
        }
        for (r, row) in cpt.rows().iter().enumerate() {
            if row.len() != arity {
                violations.push(format!(
                    "variable {name}, row {r}: has {} entries, expected {arity}",
                    row.len()
                ));
                continue;
            }
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p) || p.is_nan()) {
                violations.push(format!(
                    "variable {name}, row {r}: probability outside [0, 1]"
                ));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-6 {
                violations.push(format!("variable {name}, row {r}: row sum {sum} is not 1"));
            }
        }
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(ValidationReport { violations })
    }
}

/// Topological order of the variables, parents before children, ties broken
/// by canonical index.
pub fn topological_order(net: &BeliefNetwork) -> Result<Vec<usize>, ModelError> {
    let n = net.variables.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indegree: Vec<usize> = vec![0; n];
    for (x, ps) in net.parents.iter().enumerate() {
        indegree[x] = ps.len();
        for &p in ps {
            children[p].push(x);
        }
    }

    // Min-heap over ready nodes keeps the tie-break deterministic.
    let mut ready: BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
        .filter(|&x| indegree[x] == 0)
        .map(std::cmp::Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(std::cmp::Reverse(x)) = ready.pop() {
        order.push(x);
        for &c in &children[x] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(std::cmp::Reverse(c));
            }
        }
    }

    if order.len() == n {
        return Ok(order);
    }

    // Walk parent links among the unresolved nodes until one repeats.
    let stuck: Vec<usize> = (0..n).filter(|&x| indegree[x] > 0).collect();
    let mut seen = vec![usize::MAX; n];
    let mut path: Vec<usize> = Vec::new();
    let mut cur = stuck[0];
    loop {
        if seen[cur] != usize::MAX {
            let cycle: Vec<String> = path[seen[cur]..]
                .iter()
                .map(|&x| net.variables[x].name().to_string())
                .collect();
            return Err(ModelError::Cycle(cycle));
        }
        seen[cur] = path.len();
        path.push(cur);
        cur = *net.parents[cur]
            .iter()
            .find(|&&p| indegree[p] > 0)
            .expect("unresolved node must have an unresolved parent");
    }
}

/// Probability of a full assignment: the product over variables of the CPT
/// entry selected by the assignment.
pub fn joint_probability(net: &BeliefNetwork, assignment: &Assignment) -> f64 {
    debug_assert_eq!(assignment.values.len(), net.num_variables());
    let mut p = 1.0;
    for x in 0..net.num_variables() {
        let row = net.cpts[x].row(net.parent_config(x, &assignment.values));
        p *= row[assignment.values[x]];
    }
    p
}

pub const DEFAULT_WEIGHT: f64 = 1.0;

/// A database of cases: weighted rows of value indices over a fixed set of
/// variables, with `None` marking a missing cell.
///
/// Weights default to one per row; fractional weights let an exact joint
/// distribution stand in for an arbitrarily large database.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseDatabase {
    variables: Vec<Variable>,
    rows: Vec<Vec<Option<usize>>>,
    weights: Vec<f64>,
}

impl CaseDatabase {
    pub fn new(
        variables: Vec<Variable>,
        rows: Vec<Vec<Option<usize>>>,
        weights: Vec<f64>,
    ) -> Result<Self, ValidationReport> {
        let mut violations = Vec::new();
        if weights.len() != rows.len() {
            violations.push(format!(
                "{} weights for {} rows",
                weights.len(),
                rows.len()
            ));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != variables.len() {
                violations.push(format!(
                    "row {r}: has {} cells, expected {}",
                    row.len(),
                    variables.len()
                ));
                continue;
            }
            for (v, cell) in row.iter().enumerate() {
                if let Some(idx) = cell {
                    if *idx >= variables[v].arity() {
                        violations.push(format!(
                            "row {r}, variable {}: value index {idx} out of range",
                            variables[v].name()
                        ));
                    }
                }
            }
        }
        for (r, &w) in weights.iter().enumerate() {
            if !(w >= 0.0) || !w.is_finite() {
                violations.push(format!("row {r}: weight {w} is not a nonnegative number"));
            }
        }
        if violations.is_empty() {
            Ok(CaseDatabase {
                variables,
                rows,
                weights,
            })
        } else {
            Err(ValidationReport { violations })
        }
    }

    pub fn with_unit_weights(
        variables: Vec<Variable>,
        rows: Vec<Vec<Option<usize>>>,
    ) -> Result<Self, ValidationReport> {
        let weights = vec![DEFAULT_WEIGHT; rows.len()];
        CaseDatabase::new(variables, rows, weights)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name() == name)
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, index: usize) -> &[Option<usize>] {
        &self.rows[index]
    }

    pub fn rows(&self) -> &[Vec<Option<usize>>] {
        &self.rows
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.weights[index]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total weight over all rows (the effective case count N).
    pub fn n_effective(&self) -> f64 {
        self.weights.iter().sum()
    }
}
