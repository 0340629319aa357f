//! Exact reasoning about δ-sufficient reasons on decision trees.
//!
//! * [`tree`], [`partial`], [`eval`]: trees, partial inputs and exact
//!   evaluation `T(y)` as a [`DyadicRational`].
//! * [`explain`]: δ-sufficient reason checks and minimum-size search.
//! * [`instance`]: 1-in-k exact hitting set instances.
//! * [`reduce`]: the conjunction lift, clause gadgets, selector tree and
//!   K-copy amplifier.
//! * [`harness`]: exhaustive verification of the constructions' claims.

pub mod dyadic;
pub mod error;
pub mod eval;
pub mod explain;
pub mod format;
pub mod harness;
pub mod instance;
pub mod partial;
pub mod rational;
pub mod reduce;
pub mod scalar;
pub mod tree;

pub use dyadic::DyadicRational;
pub use error::{Error, Result};
pub use eval::{eval_partial, eval_partial_as, eval_partial_bruteforce};
pub use explain::{FeatureSet, SearchOutcome, Threshold};
pub use instance::HittingSetInstance;
pub use partial::{consistent, PartialInput};
pub use scalar::Probability;
pub use tree::{DecisionTree, Node, NodeId, TreeBuilder};

/// Default exact probability scalar.
pub type Prob = DyadicRational;
/// General exact rational, used for thresholds and cross-checks.
pub type Ratio = num_rational::BigRational;
