//! Entropy-driven construction of discrete belief networks from case data.
//!
//! The library learns a network in two pieces: a greedy structure search
//! that repeatedly adds the single arc whose entropy drop is least likely
//! under conditional independence (a chi-squared test on `2·N·ΔH`), and a
//! parameter estimator that fills conditional-probability tables from
//! counts, with optional Dirichlet smoothing. Around that core sit exact
//! network-entropy computation, logic sampling for generating case
//! databases from known networks, and learned-vs-reference comparison.
//!
//! Modules:
//! - [`model`]: networks, CPTs, assignments, case databases.
//! - [`inference`]: exact marginals by variable elimination, brute-force joints.
//! - [`estimation`]: family counting and CPT estimation.
//! - [`entropy`]: network entropy (exact and empirical) and KL divergence.
//! - [`learner`]: the greedy search with its significance test.
//! - [`sampling`]: probabilistic logic sampling.
//! - [`evalcmp`]: structural diff, parameter error, distribution divergence.
//! - [`formats`]: the `.bn` network, case CSV, and trace TSV file formats.

pub mod entropy;
pub mod estimation;
pub mod evalcmp;
pub mod formats;
pub mod inference;
pub mod learner;
pub mod model;
pub mod sampling;

pub use entropy::{
    brute_force_entropy, empirical_network_entropy, kl_divergence, network_entropy, EntropyReport,
};
pub use estimation::{count_family, estimate_cpt, fit_parameters, EstimationMode, FamilyCounts};
pub use evalcmp::{cpt_max_abs_error, distribution_kl, structural_diff, StructuralDiff};
pub use inference::{brute_force_joint, marginal_over, InferenceError, MarginalTable};
pub use learner::{
    chi_squared_survival, degrees_of_freedom, evaluate_candidate, kutato_learn,
    CandidateEvaluation, HaltReason, LearnConfig, LearnTrace, VariableOrder,
};
pub use model::{
    joint_probability, topological_order, validate_network, Assignment, BeliefNetwork,
    CaseDatabase, Cpt, ValidationReport, Variable,
};
pub use sampling::{logic_sample, SampleSpec};
