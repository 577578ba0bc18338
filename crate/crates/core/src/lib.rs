//! Proportionally fair allocation of indivisible goods under random
//! additive utilities.
//!
//! The crate provides
//!
//! * the instance model and fairness predicates ([`model`]),
//! * utility distributions, tail margins and seeded sampling ([`distributions`]),
//! * bipartite threshold graphs and Hopcroft-Karp matching ([`matching`]),
//! * the block-matching allocators for `m = k * n` and `m >> n` ([`allocators`]),
//! * exact existence oracles for small instances ([`exact`]),
//! * a reproducible Monte Carlo harness and counterexample generators ([`experiments`]).
//!
//! ```
//! use propfair_core::{margin_for, sample_instance, theorem1_allocate, AllocatorConfig, DistributionSpec};
//!
//! let spec = DistributionSpec::uniform(0.0, 1.0).unwrap();
//! let cfg = AllocatorConfig::new(margin_for(&spec, 0.3).unwrap()).unwrap();
//! let inst = sample_instance(&spec, 30, 60, 7);
//! let outcome = theorem1_allocate(&inst, &cfg).unwrap();
//! if let Some(alloc) = &outcome.allocation {
//!     if outcome.is_success() {
//!         assert!(inst.is_proportional(alloc).unwrap());
//!     }
//! }
//! ```

pub mod allocators;
pub mod distributions;
pub mod exact;
pub mod experiments;
pub mod matching;
pub mod model;

pub use allocators::{
    required_groups, theorem1_allocate, theorem2_allocate, AllocatorConfig, AllocatorError,
    AllocatorOutcome, AllocatorStatus, Diagnostics,
};
pub use distributions::{
    chernoff_bound, margin_for, margin_with_delta, sample_instance, DistributionError,
    DistributionSpec, Margin, UtilityModel, DEFAULT_BETA_FLOOR,
};
pub use exact::{
    exists_proportional, exists_proportional_matching_case, CheckerError, MatchingCaseVerdict,
    SearchLimits, Verdict,
};
pub use experiments::{
    remark1_instance, remark2_instance, run_experiment, wilson_interval, ExperimentConfig,
    ExperimentError, ExperimentSummary, Growth, Regime, SummaryRow, TrialReport,
};
pub use matching::{
    brute_force_matching_size, maximum_matching, threshold_graph, BipartiteGraph, Matching,
    MatchingError,
};
pub use model::{Allocation, Instance, ModelError, FAIRNESS_TOL};
