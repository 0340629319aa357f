//! Exhaustive verification of the constructions, with exact verdicts.

pub mod checks;
pub mod pipeline;
pub mod report;

pub use checks::{
    fat_probability_exact, hoeffding_bound, lemma_case_table, soundness_profile,
    verify_completeness, verify_lemma_cases, verify_soundness_bruteforce, verify_t1_claims,
    SoundnessProfile, T1Options, DEFAULT_ENUM_BUDGET,
};
pub use pipeline::{run_full_pipeline, PipelineGap, PipelineOptions, PipelineRun, PipelineStats};
pub use report::{timed, Bundle, Relation, Verdict, VerificationReport};
