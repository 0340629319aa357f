//! δ-sufficient reasons: checking and minimum-size search.
//!
//! A set `S` of coordinates is a δ-sufficient reason for a complete input
//! `x` under `T` when a uniformly random `z` agreeing with `x` on `S` has
//! `T(z) = T(x)` with probability at least δ.

use std::fmt;

use itertools::Itertools;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::DyadicRational;
use crate::error::{check_len, Error, Result};
use crate::eval::eval_partial;
use crate::partial::PartialInput;
use crate::rational::parse_rational;
use crate::tree::{DecisionTree, Node, NodeId};

/// Sorted set of distinct 0-based coordinates.
///
/// The text form is a comma-separated list of 1-based indices; the empty
/// set renders as the empty string.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(into = "Vec<usize>")]
pub struct FeatureSet(Vec<usize>);

impl FeatureSet {
    pub fn empty() -> Self {
        FeatureSet(Vec::new())
    }

    pub fn full(n: usize) -> Self {
        FeatureSet((0..n).collect())
    }

    /// From 0-based indices; duplicates are rejected.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Domain(format!(
                "coordinate {} listed twice",
                w[0] + 1
            )));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::Domain(format!(
                    "coordinate {} outside 1..={n}",
                    last + 1
                )));
            }
        }
        Ok(FeatureSet(indices))
    }

    pub fn from_one_based(indices: &[usize], n: usize) -> Result<Self> {
        if indices.contains(&0) {
            return Err(Error::Domain("coordinates are 1-based".into()));
        }
        Self::new(indices.iter().map(|i| i - 1).collect(), n)
    }

    /// Parses `"1,3,4"` (1-based). `""` and `"{}"` are the empty set.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let s = s.trim();
        let s = s
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .unwrap_or(s);
        if s.trim().is_empty() {
            return Ok(FeatureSet::empty());
        }
        let mut out = Vec::new();
        let mut column = 1;
        for part in s.split(',') {
            let i: usize = part.trim().parse().map_err(|_| {
                Error::parse(1, column, format!("expected a coordinate, found {part:?}"))
            })?;
            out.push(i);
            column += part.len() + 1;
        }
        Self::from_one_based(&out, n)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// 0-based indices in increasing order.
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    pub fn with(&self, i: usize) -> FeatureSet {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&i) {
            v.insert(pos, i);
        }
        FeatureSet(v)
    }

    pub fn intersect_range(&self, range: std::ops::Range<usize>) -> FeatureSet {
        FeatureSet(
            self.0
                .iter()
                .copied()
                .filter(|i| range.contains(i))
                .collect(),
        )
    }
}

impl From<FeatureSet> for Vec<usize> {
    fn from(s: FeatureSet) -> Self {
        s.one_based()
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.iter().map(|i| i + 1).join(","))
    }
}

/// δ ∈ [0, 1] as an exact reduced rational.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Threshold(BigRational);

impl Threshold {
    pub fn new(value: BigRational) -> Result<Self> {
        if value < BigRational::zero() || value > BigRational::one() {
            return Err(Error::Parameter(format!(
                "threshold {value} outside [0, 1]"
            )));
        }
        Ok(Threshold(value))
    }

    pub fn ratio(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Parameter("zero denominator".into()));
        }
        Self::new(BigRational::new(p.into(), q.into()))
    }

    pub fn one() -> Self {
        Threshold(BigRational::one())
    }

    pub fn from_dyadic(d: &DyadicRational) -> Result<Self> {
        Self::new(d.to_rational())
    }

    /// Accepts `p/q` or an exact decimal.
    pub fn parse(s: &str) -> Result<Self> {
        Self::new(parse_rational(s)?)
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn is_met_by(&self, p: &DyadicRational) -> bool {
        p.cmp_rational(&self.0) != std::cmp::Ordering::Less
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The partial input fixing `x` on `S` and leaving every other coordinate ⊥.
pub fn restriction_of(x: &[bool], s: &FeatureSet) -> Result<PartialInput> {
    if let Some(&last) = s.indices().last() {
        if last >= x.len() {
            return Err(Error::Domain(format!(
                "coordinate {} outside 1..={}",
                last + 1,
                x.len()
            )));
        }
    }
    let mut y = PartialInput::undefined(x.len());
    for &i in s.indices() {
        y.set(i, Some(x[i]));
    }
    Ok(y)
}

/// `Pr[T(z) = T(x)]` for `z` uniform among inputs agreeing with `x` on `S`.
pub fn agreement_probability(
    tree: &DecisionTree,
    x: &[bool],
    s: &FeatureSet,
) -> Result<DyadicRational> {
    let label = tree.eval_complete(x)?;
    let p = eval_partial(tree, &restriction_of(x, s)?)?;
    Ok(if label {
        p
    } else {
        p.one_minus().expect("tree value is a probability")
    })
}

pub fn is_delta_sufficient(
    tree: &DecisionTree,
    x: &[bool],
    s: &FeatureSet,
    delta: &Threshold,
) -> Result<bool> {
    Ok(delta.is_met_by(&agreement_probability(tree, x, s)?))
}

/// The δ = 1 case, decided by walking every path consistent with `x` on `S`
/// and checking that each reachable leaf carries `T(x)`.
pub fn is_sufficient_reason(tree: &DecisionTree, x: &[bool], s: &FeatureSet) -> Result<bool> {
    let label = tree.eval_complete(x)?;
    let y = restriction_of(x, s)?;
    if tree.is_read_once_per_path() {
        let mut seen = vec![false; tree.nodes().len()];
        let mut stack = vec![tree.root()];
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id.index()], true) {
                continue;
            }
            match tree.node(id) {
                Node::Leaf(b) if b != label => return Ok(false),
                Node::Leaf(_) => {}
                Node::Inner { var, zero, one } => match y.get(var as usize) {
                    Some(false) => stack.push(zero),
                    Some(true) => stack.push(one),
                    None => stack.extend([zero, one]),
                },
            }
        }
        Ok(true)
    } else {
        fn walk(
            tree: &DecisionTree,
            y: &PartialInput,
            id: NodeId,
            env: &mut Vec<Option<bool>>,
            label: bool,
        ) -> bool {
            match tree.node(id) {
                Node::Leaf(b) => b == label,
                Node::Inner { var, zero, one } => {
                    let var = var as usize;
                    match y.get(var).or(env[var]) {
                        Some(bit) => walk(tree, y, if bit { one } else { zero }, env, label),
                        None => {
                            env[var] = Some(false);
                            let ok = walk(tree, y, zero, env, label);
                            env[var] = Some(true);
                            let ok = ok && walk(tree, y, one, env, label);
                            env[var] = None;
                            ok
                        }
                    }
                }
            }
        }
        let mut env = vec![None; tree.num_vars()];
        Ok(walk(tree, &y, tree.root(), &mut env, label))
    }
}

/// Limits for [`min_sr_exhaustive`].
#[derive(Clone, Copy, Debug)]
pub struct SearchLimits {
    /// Largest number of candidate coordinates the search accepts.
    pub max_candidates: usize,
    /// Largest number of subsets the search may test.
    pub max_checks: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_candidates: 22,
            max_checks: 1 << 24,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found {
        set: FeatureSet,
        agreement: DyadicRational,
    },
    /// Every set of size at most the cap was tested and none qualifies.
    NoneWithinCap { size_cap: usize },
}

/// Smallest δ-sufficient reason of size at most `size_cap`, ties broken by
/// the lexicographically smallest set.
///
/// Coordinates the tree never queries are skipped: they do not change the
/// agreement probability. No monotonicity in `S` is assumed for δ < 1, so
/// every subset of a given size is examined before moving on.
pub fn min_sr_exhaustive(
    tree: &DecisionTree,
    x: &[bool],
    delta: &Threshold,
    size_cap: usize,
    limits: SearchLimits,
) -> Result<SearchOutcome> {
    check_len(tree.num_vars(), x.len())?;
    if size_cap > tree.num_vars() {
        return Err(Error::Parameter(format!(
            "size cap {size_cap} exceeds the {} coordinates",
            tree.num_vars()
        )));
    }
    let candidates = tree.queried_vars();
    if candidates.len() > limits.max_candidates {
        return Err(Error::budget(
            "exhaustive search (candidate coordinates)",
            candidates.len(),
            limits.max_candidates,
        ));
    }
    let mut checks: u64 = 0;
    for size in 0..=size_cap.min(candidates.len()) {
        let batch = binomial(candidates.len() as u64, size as u64);
        checks = checks.saturating_add(batch);
        if checks > limits.max_checks {
            return Err(Error::budget(
                "exhaustive search (subsets)",
                checks,
                limits.max_checks,
            ));
        }
        let subsets: Vec<Vec<usize>> = candidates.iter().copied().combinations(size).collect();
        let hit = subsets
            .par_iter()
            .map(|c| {
                let s = FeatureSet(c.clone());
                agreement_probability(tree, x, &s).map(|a| (delta.is_met_by(&a), a))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .zip(subsets)
            .find(|((ok, _), _)| *ok);
        if let Some(((_, agreement), set)) = hit {
            return Ok(SearchOutcome::Found {
                set: FeatureSet(set),
                agreement,
            });
        }
    }
    Ok(SearchOutcome::NoneWithinCap { size_cap })
}

/// Greedy heuristic: grow `S` from ∅ by the coordinate that raises the
/// agreement most (smallest index on ties) until δ is met. The result is
/// δ-sufficient but not necessarily minimum.
pub fn min_sr_greedy(
    tree: &DecisionTree,
    x: &[bool],
    delta: &Threshold,
) -> Result<(FeatureSet, DyadicRational)> {
    check_len(tree.num_vars(), x.len())?;
    let mut set = FeatureSet::empty();
    let mut agreement = agreement_probability(tree, x, &set)?;
    let queried = tree.queried_vars();
    let mut remaining: Vec<usize> = queried.clone();
    // unqueried coordinates never change the agreement; last resort only
    remaining.extend((0..tree.num_vars()).filter(|i| !tree.queries(*i)));
    while !delta.is_met_by(&agreement) && !remaining.is_empty() {
        let scored = remaining
            .par_iter()
            .map(|&i| agreement_probability(tree, x, &set.with(i)).map(|a| (i, a)))
            .collect::<Result<Vec<_>>>()?;
        let (pos, (best, best_agreement)) = scored
            .into_iter()
            .enumerate()
            .fold(
                None,
                |acc: Option<(usize, (usize, DyadicRational))>, (pos, cand)| match acc {
                    Some((_, (_, ref a))) if *a >= cand.1 => acc,
                    _ => Some((pos, cand)),
                },
            )
            .expect("remaining is non-empty");
        remaining.remove(pos);
        set = set.with(best);
        agreement = best_agreement;
    }
    Ok((set, agreement))
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exhaustive,
    Greedy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetStatus {
    Ok,
    NoneWithinCap,
    Exceeded,
}

/// Solver output record.
#[derive(Clone, Debug, Serialize)]
pub struct SolverRecord {
    pub set: Option<FeatureSet>,
    pub size: Option<usize>,
    pub agreement: Option<DyadicRational>,
    pub method: Method,
    pub heuristic: bool,
    pub budget_status: BudgetStatus,
}

impl SolverRecord {
    pub fn exhaustive(outcome: &Result<SearchOutcome>) -> Self {
        let (set, agreement, budget_status) = match outcome {
            Ok(SearchOutcome::Found { set, agreement }) => {
                (Some(set.clone()), Some(agreement.clone()), BudgetStatus::Ok)
            }
            Ok(SearchOutcome::NoneWithinCap { .. }) => (None, None, BudgetStatus::NoneWithinCap),
            Err(_) => (None, None, BudgetStatus::Exceeded),
        };
        SolverRecord {
            size: set.as_ref().map(FeatureSet::len),
            set,
            agreement,
            method: Method::Exhaustive,
            heuristic: false,
            budget_status,
        }
    }

    pub fn greedy(set: FeatureSet, agreement: DyadicRational) -> Self {
        SolverRecord {
            size: Some(set.len()),
            set: Some(set),
            agreement: Some(agreement),
            method: Method::Greedy,
            heuristic: true,
            budget_status: BudgetStatus::Ok,
        }
    }
}
