//! Exact engine for finite statistical experiments: sufficiency,
//! conditionality, ancillarity and likelihood relations between inference
//! bases, their equivalence closure, and explicit witness chains showing
//! that the sufficiency and weak conditionality relations generate the
//! likelihood relation.
//!
//! Also contains the frequentist side calculations that accompany these
//! relations: one-sided binomial and negative-binomial p-values, conditional
//! coverage examples and the most powerful level allocation for a mixture
//! of two normal measuring instruments.

pub mod fixtures;
pub mod freq;
pub mod methods;
pub mod model;
pub mod normal;
pub mod partitions;
pub mod rational;
pub mod relations;
pub mod statistics;
pub mod unionfind;

pub use freq::{
    equal_level_test, example3_coverage, example4_analysis, optimal_mixture_test, AllocationResult, Conditioning,
    FreqError, InstrumentSpec, TwoPointModel, TwoPointReport,
};
pub use methods::{
    audit_sp2_wcp, binom_pvalue, mixture_pvalue, negbinom_pvalue, BinomialSpec, MethodAuditReport, MethodError,
    NegBinomialSpec,
};
pub use model::{
    likelihood_vector, make_mixture, proportionality_constant, validate_experiment, Experiment, InferenceBase,
    LikelihoodVector, MixtureExperiment, ModelError, RawExperiment,
};
pub use rational::Rational;
pub use relations::{
    birnbaum_chain, closure, related, verify_birnbaum, BirnbaumReport, ClosureResult, RelationError, RelationKind,
    Universe, WitnessChain, Witness,
};
pub use statistics::{
    condition, enumerate_ancillaries, is_ancillary, is_sufficient, minimal_sufficient, StatisticPartition,
    StatisticsError,
};
