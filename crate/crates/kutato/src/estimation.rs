//! Family counting and conversion of counts into conditional probabilities.
//!
//! A row contributes to a family's counts only when the child and every
//! parent are observed in that row; there is no imputation. Probabilities
//! come out of the counts either by maximum likelihood or under a symmetric
//! Dirichlet prior with one pseudo-count per cell, `(C(x,π)+1)/(C(π)+V)`.

use thiserror::Error;

use crate::model::{config_from_index, config_index, BeliefNetwork, CaseDatabase, Cpt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimationMode {
    /// Symmetric Dirichlet smoothing, one pseudo-count per cell.
    #[default]
    Dirichlet,
    /// Relative frequencies; uniform where a configuration has no data.
    MaximumLikelihood,
}

impl std::fmt::Display for EstimationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EstimationMode::Dirichlet => write!(f, "dirichlet"),
            EstimationMode::MaximumLikelihood => write!(f, "ml"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EstimationError {
    #[error("variable {variable} is not present in the database")]
    MissingVariable { variable: String },
    #[error("variable {variable}: vocabulary mismatch at label {label:?}")]
    VocabularyMismatch { variable: String, label: String },
}

/// Weighted co-occurrence counts for one node family (child plus parents).
///
/// `counts[c][v]` is the total weight of rows with parent configuration `c`
/// and child value `v`; `config_totals[c]` is the row sum.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyCounts {
    child: usize,
    parents: Vec<usize>,
    child_arity: usize,
    parent_arities: Vec<usize>,
    counts: Vec<Vec<f64>>,
    config_totals: Vec<f64>,
}

impl FamilyCounts {
    pub fn child(&self) -> usize {
        self.child
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn child_arity(&self) -> usize {
        self.child_arity
    }

    pub fn parent_arities(&self) -> &[usize] {
        &self.parent_arities
    }

    pub fn counts(&self) -> &[Vec<f64>] {
        &self.counts
    }

    pub fn config_totals(&self) -> &[f64] {
        &self.config_totals
    }

    pub fn num_configs(&self) -> usize {
        self.counts.len()
    }

    /// Total weight across all configurations (the family's effective N).
    pub fn total(&self) -> f64 {
        self.config_totals.iter().sum()
    }

    /// Collapses one parent out of the table by summing over its values.
    ///
    /// The result is exactly what counting the smaller family over the same
    /// row subset would produce, which is what makes the entropy difference
    /// of the two families a G² statistic.
    pub fn marginalize_parent(&self, position: usize) -> FamilyCounts {
        assert!(position < self.parents.len());
        let mut parents = self.parents.clone();
        parents.remove(position);
        let mut parent_arities = self.parent_arities.clone();
        parent_arities.remove(position);

        let num_configs: usize = parent_arities.iter().product();
        let mut counts = vec![vec![0.0; self.child_arity]; num_configs];
        let mut config_totals = vec![0.0; num_configs];
        for (c, row) in self.counts.iter().enumerate() {
            let mut values = config_from_index(c, &self.parent_arities);
            values.remove(position);
            let target = config_index(&values, &parent_arities);
            for (v, &w) in row.iter().enumerate() {
                counts[target][v] += w;
            }
            config_totals[target] += self.config_totals[c];
        }
        FamilyCounts {
            child: self.child,
            parents,
            child_arity: self.child_arity,
            parent_arities,
            counts,
            config_totals,
        }
    }
}

/// Tallies the weighted counts of a child given a parent set.
///
/// A row contributes its weight iff the child and every parent are
/// non-missing in that row.
pub fn count_family(db: &CaseDatabase, child: usize, parents: &[usize]) -> FamilyCounts {
    let child_arity = db.variables()[child].arity();
    let parent_arities: Vec<usize> = parents
        .iter()
        .map(|&p| db.variables()[p].arity())
        .collect();
    let num_configs: usize = parent_arities.iter().product();
    let mut counts = vec![vec![0.0; child_arity]; num_configs];
    let mut config_totals = vec![0.0; num_configs];

    'rows: for (r, row) in db.rows().iter().enumerate() {
        let Some(child_value) = row[child] else {
            continue;
        };
        let mut config = 0usize;
        for (&p, &a) in parents.iter().zip(&parent_arities) {
            match row[p] {
                Some(v) => config = config * a + v,
                None => continue 'rows,
            }
        }
        let w = db.weight(r);
        counts[config][child_value] += w;
        config_totals[config] += w;
    }

    FamilyCounts {
        child,
        parents: parents.to_vec(),
        child_arity,
        parent_arities,
        counts,
        config_totals,
    }
}

/// Turns family counts into a CPT row by row.
pub fn estimate_cpt(counts: &FamilyCounts, mode: EstimationMode) -> Cpt {
    let arity = counts.child_arity as f64;
    let rows = counts
        .counts
        .iter()
        .zip(&counts.config_totals)
        .map(|(row, &total)| match mode {
            EstimationMode::Dirichlet => row
                .iter()
                .map(|&c| (c + 1.0) / (total + arity))
                .collect(),
            EstimationMode::MaximumLikelihood => {
                if total > 0.0 {
                    row.iter().map(|&c| c / total).collect()
                } else {
                    vec![1.0 / arity; counts.child_arity]
                }
            }
        })
        .collect();
    Cpt::new(rows)
}

/// Maps each structure variable to its database column, requiring identical
/// name and value vocabularies.
pub(crate) fn column_map(
    structure: &BeliefNetwork,
    db: &CaseDatabase,
) -> Result<Vec<usize>, EstimationError> {
    structure
        .variables()
        .iter()
        .map(|var| {
            let col = db
                .var_index(var.name())
                .ok_or_else(|| EstimationError::MissingVariable {
                    variable: var.name().to_string(),
                })?;
            let db_var = &db.variables()[col];
            if db_var.values() != var.values() {
                let label = var
                    .values()
                    .iter()
                    .zip(db_var.values())
                    .find(|(a, b)| a != b)
                    .map(|(a, _)| a.clone())
                    .unwrap_or_else(|| {
                        if var.arity() > db_var.arity() {
                            var.values()[db_var.arity()].clone()
                        } else {
                            db_var.values()[var.arity()].clone()
                        }
                    });
                return Err(EstimationError::VocabularyMismatch {
                    variable: var.name().to_string(),
                    label,
                });
            }
            Ok(col)
        })
        .collect()
}

/// Refits every CPT of `structure` from the database, leaving the graph
/// untouched. Input CPTs are ignored.
pub fn fit_parameters(
    structure: &BeliefNetwork,
    db: &CaseDatabase,
    mode: EstimationMode,
) -> Result<BeliefNetwork, EstimationError> {
    let columns = column_map(structure, db)?;
    let cpts: Vec<Cpt> = (0..structure.num_variables())
        .map(|x| {
            let parent_cols: Vec<usize> =
                structure.parents(x).iter().map(|&p| columns[p]).collect();
            let counts = count_family(db, columns[x], &parent_cols);
            estimate_cpt(&counts, mode)
        })
        .collect();
    Ok(BeliefNetwork::new(
        structure.name(),
        structure.variables().to_vec(),
        structure.parent_lists().to_vec(),
        cpts,
    )
    .expect("refit of a valid structure is valid"))
}
