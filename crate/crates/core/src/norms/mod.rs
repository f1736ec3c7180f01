//! Norms and quasi-norms of rearrangement-invariant spaces, the registry of
//! known inclusions, and ratio reports over function families.

mod eval;
mod registry;
mod report;
mod spec;

pub use eval::{
    check_weight_conditions, conjugate, ggamma_norm, grand_norm, grand_norm_fk, lorentz_maximal_norm,
    lorentz_zygmund_norm, norm_of_rearrangement, space_norm, WeightConditions,
};
pub use registry::embedding_holds;
pub use report::{
    embedding_report, equivalence_report, write_ratio_csv, EmbeddingReport, EquivalenceReport, MemberRatio,
    NormTarget, RatioStats, DEFAULT_EQUIVALENCE_BUDGET,
};
pub use spec::{ext_real, SpaceSpec};
