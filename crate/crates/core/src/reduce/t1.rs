//! The conjunction lift `T₁ = T ∨ (x_{n+1} ∧ … ∧ x_{n+m})`.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::explain::FeatureSet;
use crate::partial::PartialInput;
use crate::tree::{DecisionTree, NodeId, TreeBuilder};

/// Path tree querying `vars` in order; any 0 exits to leaf 0.
pub fn build_conjunction_tree(num_vars: usize, vars: &[usize]) -> Result<DecisionTree> {
    if vars.is_empty() {
        return Err(Error::Domain("conjunction over no variables".into()));
    }
    FeatureSet::new(vars.to_vec(), num_vars)?;
    let mut b = TreeBuilder::new(num_vars);
    let f = b.leaf(false);
    let t = b.leaf(true);
    let root = conjunction_into(&mut b, vars, f, t);
    Ok(b.finish(root))
}

fn conjunction_into(
    b: &mut TreeBuilder,
    vars: &[usize],
    on_zero: NodeId,
    on_one: NodeId,
) -> NodeId {
    vars.iter()
        .rev()
        .fold(on_one, |next, &v| b.inner(v, on_zero, next))
}

/// `⌈(n + log₂(2/ε))^{1/ε}⌉`.
///
/// Exact when `1/ε` is an integer `q` and `2q` is a power of two; otherwise
/// evaluated in `f64`, snapping to the nearest integer when within 1e-9
/// relative distance.
pub fn canonical_m(n: usize, epsilon: &BigRational) -> Result<BigUint> {
    check_epsilon(epsilon)?;
    let inv = epsilon.recip();
    if inv.is_integer() {
        let q = inv.to_integer();
        let two_q: BigUint = (q.clone() * 2u32).to_biguint().expect("positive");
        if two_q.count_ones() == 1 {
            let log = two_q.trailing_zeros().unwrap_or(0);
            let base = BigUint::from(n) + BigUint::from(log);
            let q = q
                .to_u32()
                .ok_or_else(|| Error::budget("canonical m (exponent 1/ε)", q, u32::MAX))?;
            return Ok(base.pow(q));
        }
    }
    let eps = epsilon.to_f64().expect("finite");
    let value = (n as f64 + (2.0 / eps).log2()).powf(1.0 / eps);
    if !value.is_finite() || value > 2f64.powi(60) {
        return Err(Error::budget(
            "canonical m (f64 range)",
            format!("{value:e}"),
            "2^60",
        ));
    }
    let nearest = value.round();
    let m = if (value - nearest).abs() <= 1e-9 * value.max(1.0) {
        nearest
    } else {
        value.ceil()
    };
    Ok(BigUint::from(m as u64))
}

fn check_epsilon(epsilon: &BigRational) -> Result<()> {
    if *epsilon <= BigRational::zero() || *epsilon >= BigRational::one() {
        return Err(Error::Parameter(format!(
            "ε = {epsilon} must lie strictly between 0 and 1"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct T1Meta {
    pub n: usize,
    pub m: usize,
    pub epsilon: String,
    /// Value of the formula for `m`, as a decimal string.
    pub canonical_m: String,
    /// True when `m` equals the formula value.
    pub canonical: bool,
}

#[derive(Clone, Debug)]
pub struct T1Build {
    pub tree: DecisionTree,
    pub meta: T1Meta,
}

/// Default largest `m` the lift will materialise.
pub const DEFAULT_T1_VAR_BUDGET: usize = 1 << 16;

/// Replaces every 0-leaf of `tree` by one shared conjunction over the fresh
/// block `n..n+m`. `m_override` bypasses the formula and marks the result
/// non-canonical unless it happens to coincide.
pub fn build_t1(
    tree: &DecisionTree,
    epsilon: &BigRational,
    m_override: Option<usize>,
    var_budget: usize,
) -> Result<T1Build> {
    check_epsilon(epsilon)?;
    let n = tree.num_vars();
    let formula = canonical_m(n, epsilon);
    let m = match m_override {
        Some(0) => return Err(Error::Parameter("m must be positive".into())),
        Some(m) => m,
        None => {
            let f = formula.clone()?;
            f.to_usize()
                .filter(|&m| m <= var_budget)
                .ok_or_else(|| Error::budget("T1 conjunction block (m)", &f, var_budget))?
        }
    };
    if m > var_budget {
        return Err(Error::budget("T1 conjunction block (m)", m, var_budget));
    }
    let canonical = matches!(&formula, Ok(f) if *f == BigUint::from(m));
    let canonical_m = match formula {
        Ok(f) => f.to_string(),
        Err(e) => format!("unavailable: {e}"),
    };

    let mut b = TreeBuilder::new(n + m);
    let f = b.leaf(false);
    let t = b.leaf(true);
    let block: Vec<usize> = (n..n + m).collect();
    let conj = conjunction_into(&mut b, &block, f, t);
    let root = b.graft(tree, 0, conj, t);
    Ok(T1Build {
        tree: b.finish(root),
        meta: T1Meta {
            n,
            m,
            epsilon: epsilon.to_string(),
            canonical_m,
            canonical,
        },
    })
}

/// Positions set to 1 in a partial input over `{1, ⊥}`.
pub fn sr_from_partial(y: &PartialInput) -> Result<FeatureSet> {
    let mut out = Vec::new();
    for (i, v) in y.values().iter().enumerate() {
        match v {
            Some(true) => out.push(i),
            Some(false) => {
                return Err(Error::Domain(format!(
                    "position {} is 0; expected only 1 or ⊥",
                    i + 1
                )))
            }
            None => {}
        }
    }
    FeatureSet::new(out, y.len())
}

/// The partial input in `{1, ⊥}^n` whose 1-positions are the set bits of `mask`.
pub(crate) fn ones_pattern(n: usize, mask: u64) -> PartialInput {
    PartialInput::new(
        (0..n)
            .map(|i| (mask >> i & 1 == 1).then_some(true))
            .collect(),
    )
}
