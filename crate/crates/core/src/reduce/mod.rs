//! Constructions: the conjunction lift `T₁`, clause gadgets, the selector
//! tree `L` and its K-copy amplification.

pub mod amplify;
pub mod selector;
pub mod t1;

pub use amplify::{
    amplified_node_estimate, amplify, bernoulli_tail, choose_params, copies_real, threshold_count,
    AmplifierParams, GapSource,
};
pub use selector::{
    assignment_to_partial, build_l, build_lc, count_fat_words, is_fat, partial_to_assignment,
    selector_half_width, FatWordMap, LayoutL,
};
pub use t1::{build_conjunction_tree, build_t1, canonical_m, sr_from_partial, T1Build, T1Meta};
