//! Exact evaluation of a tree on partial inputs.
//!
//! `T(y)` is the fraction of completions of `y` on which `T` outputs 1.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::dyadic::DyadicRational;
use crate::error::{check_len, Error, Result};
use crate::partial::PartialInput;
use crate::scalar::Probability;
use crate::tree::{DecisionTree, Node, NodeId};

/// Default limit on the number of ⊥ positions the enumeration oracle accepts.
pub const DEFAULT_BRUTEFORCE_CAP: usize = 24;

/// `T(y)` as an exact dyadic rational.
pub fn eval_partial(tree: &DecisionTree, y: &PartialInput) -> Result<DyadicRational> {
    eval_partial_as(tree, y)
}

/// `T(y)` computed in any exact probability scalar.
pub fn eval_partial_as<P: Probability>(tree: &DecisionTree, y: &PartialInput) -> Result<P> {
    check_len(tree.num_vars(), y.len())?;
    if tree.is_read_once_per_path() {
        Ok(eval_read_once(tree, y))
    } else {
        let mut env = vec![None; tree.num_vars()];
        let mut memo = HashMap::new();
        Ok(eval_with_env(tree, y, tree.root(), &mut env, &mut memo))
    }
}

/// Bottom-up over the shared DAG. Valid only when no variable repeats along
/// a path, because then each node's value depends on `y` alone.
fn eval_read_once<P: Probability>(tree: &DecisionTree, y: &PartialInput) -> P {
    let mut value: Vec<Option<P>> = vec![None; tree.nodes().len()];
    for &id in tree.order() {
        let v = match tree.node(id) {
            Node::Leaf(label) => P::from_bit(label),
            Node::Inner { var, zero, one } => {
                let pick = |c: NodeId| value[c.index()].clone().expect("child before parent");
                match y.get(var as usize) {
                    Some(false) => pick(zero),
                    Some(true) => pick(one),
                    None => (pick(zero) + pick(one)).half(),
                }
            }
        };
        value[id.index()] = Some(v);
    }
    value[tree.root().index()].take().expect("root evaluated")
}

type EnvKey = (NodeId, Vec<(u32, bool)>);

/// Top-down with the path environment of variables already branched on.
/// Memoized on the node plus the part of the environment the node can see.
fn eval_with_env<P: Probability>(
    tree: &DecisionTree,
    y: &PartialInput,
    id: NodeId,
    env: &mut Vec<Option<bool>>,
    memo: &mut HashMap<EnvKey, P>,
) -> P {
    let (var, zero, one) = match tree.node(id) {
        Node::Leaf(label) => return P::from_bit(label),
        Node::Inner { var, zero, one } => (var as usize, zero, one),
    };
    if let Some(bit) = y.get(var).or(env[var]) {
        return eval_with_env(tree, y, if bit { one } else { zero }, env, memo);
    }
    let below = tree
        .below(id)
        .expect("environment evaluation needs subtree variable sets");
    let key: EnvKey = (
        id,
        below
            .iter()
            .filter_map(|v| env[v].map(|b| (v as u32, b)))
            .collect(),
    );
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    env[var] = Some(false);
    let v0 = eval_with_env(tree, y, zero, env, memo);
    env[var] = Some(true);
    let v1 = eval_with_env(tree, y, one, env, memo);
    env[var] = None;
    let v = (v0 + v1).half();
    memo.insert(key, v.clone());
    v
}

/// Exact evaluation of a read-once tree in fixed point: values are returned
/// as numerators over `2^depth`, which is exact because a node of height `h`
/// has a value with denominator dividing `2^h`.
///
/// Used by enumeration loops that evaluate the same tree millions of times.
pub(crate) struct FixedEvaluator<'a> {
    tree: &'a DecisionTree,
    one: u128,
}

impl<'a> FixedEvaluator<'a> {
    pub(crate) fn new(tree: &'a DecisionTree) -> Result<Self> {
        if !tree.is_read_once_per_path() {
            return Err(Error::Precondition(
                "fixed-point evaluation needs a read-once tree".into(),
            ));
        }
        if tree.depth() > 120 {
            return Err(Error::budget(
                "fixed-point evaluation (depth)",
                tree.depth(),
                120,
            ));
        }
        Ok(FixedEvaluator {
            tree,
            one: 1u128 << tree.depth(),
        })
    }

    pub(crate) fn exponent(&self) -> u64 {
        self.tree.depth() as u64
    }

    /// Numerator of `T(y)` over `2^depth`; `scratch` is reused between calls.
    pub(crate) fn eval(&self, y: &[Option<bool>], scratch: &mut Vec<u128>) -> u128 {
        scratch.clear();
        scratch.resize(self.tree.nodes().len(), 0);
        for &id in self.tree.order() {
            scratch[id.index()] = match self.tree.node(id) {
                Node::Leaf(label) => label as u128 * self.one,
                Node::Inner { var, zero, one } => match y[var as usize] {
                    Some(false) => scratch[zero.index()],
                    Some(true) => scratch[one.index()],
                    None => (scratch[zero.index()] + scratch[one.index()]) / 2,
                },
            };
        }
        scratch[self.tree.root().index()]
    }

    pub(crate) fn to_dyadic(&self, numerator: u128) -> DyadicRational {
        DyadicRational::new(numerator.into(), self.exponent())
    }
}

/// `T(y)` by enumerating every completion, with the default cap.
pub fn eval_partial_bruteforce(tree: &DecisionTree, y: &PartialInput) -> Result<DyadicRational> {
    eval_partial_bruteforce_capped(tree, y, DEFAULT_BRUTEFORCE_CAP)
}

/// Counts the completions of `y` accepted by `tree` by direct enumeration.
/// Refuses when `y` has more than `cap` undefined positions.
pub fn eval_partial_bruteforce_capped(
    tree: &DecisionTree,
    y: &PartialInput,
    cap: usize,
) -> Result<DyadicRational> {
    check_len(tree.num_vars(), y.len())?;
    let free: Vec<usize> = (0..y.len()).filter(|&i| y.get(i).is_none()).collect();
    if free.len() > cap.min(62) {
        return Err(Error::budget(
            "completion enumeration (undefined positions)",
            free.len(),
            cap,
        ));
    }
    let base: Vec<bool> = y.values().iter().map(|v| v.unwrap_or(false)).collect();
    let total = 1u64 << free.len();
    let count_range = |range: std::ops::Range<u64>| {
        let mut x = base.clone();
        range
            .filter(|&mask| {
                for (bit, &pos) in free.iter().enumerate() {
                    x[pos] = mask >> bit & 1 == 1;
                }
                tree.eval_unchecked(&x)
            })
            .count() as u64
    };
    let count: u64 = if free.len() <= 12 {
        count_range(0..total)
    } else {
        let chunk = 1u64 << 10;
        (0..total / chunk)
            .into_par_iter()
            .map(|c| count_range(c * chunk..(c + 1) * chunk))
            .sum()
    };
    Ok(DyadicRational::from_u64(count, free.len() as u64))
}
