//! K-copy amplification of `L` with a count threshold.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Probability;
use crate::tree::{DecisionTree, NodeId, TreeBuilder};

/// Where the per-copy gap `δ` comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum GapSource {
    Explicit(BigRational),
    /// `1/128`, the bound proved for the all-y-undefined slice.
    Floor,
    /// A gap `7/8 − max_p L(p)` measured by exhaustive maximisation.
    Measured(BigRational),
}

impl GapSource {
    pub fn value(&self) -> BigRational {
        match self {
            GapSource::Explicit(g) | GapSource::Measured(g) => g.clone(),
            GapSource::Floor => BigRational::new(1.into(), 128.into()),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            GapSource::Explicit(_) => "explicit",
            GapSource::Floor => "floor",
            GapSource::Measured(_) => "measured",
        }
    }
}

fn seven_eighths() -> BigRational {
    BigRational::new(7.into(), 8.into())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmplifierParams {
    /// Target gap; absent for hand-picked copy counts.
    #[serde(serialize_with = "ser_opt_ratio")]
    pub kappa: Option<BigRational>,
    #[serde(serialize_with = "ser_opt_ratio")]
    pub gap: Option<BigRational>,
    pub gap_source: Option<&'static str>,
    pub copies: usize,
    /// Accept iff at least this many copies accept.
    pub threshold: usize,
}

fn ser_opt_ratio<S: serde::Serializer>(
    v: &Option<BigRational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.collect_str(r),
        None => s.serialize_none(),
    }
}

impl AmplifierParams {
    /// Hand-picked copy count and threshold.
    pub fn custom(copies: usize, threshold: usize) -> Result<Self> {
        if copies == 0 || threshold > copies {
            return Err(Error::Parameter(format!(
                "need 1 ≤ copies and threshold ≤ copies, got {copies} and {threshold}"
            )));
        }
        Ok(AmplifierParams {
            kappa: None,
            gap: None,
            gap_source: None,
            copies,
            threshold,
        })
    }
}

/// `2 ln(2/κ) / δ²` before rounding.
pub fn copies_real<F: Float>(kappa: F, gap: F) -> F {
    let two = F::one() + F::one();
    two * (two / kappa).ln() / (gap * gap)
}

/// `⌈(7/8 − δ/2)·K⌉`, exactly.
pub fn threshold_count(gap: &BigRational, copies: usize) -> usize {
    let half = BigRational::new(1.into(), 2.into());
    let t =
        ((seven_eighths() - gap * half) * BigRational::from_integer(BigInt::from(copies))).ceil();
    t.to_integer().to_usize().unwrap_or(0)
}

/// `K = ⌈2 ln(2/κ)/δ²⌉` and `t = ⌈(7/8 − δ/2)K⌉`.
///
/// `K` is evaluated in `f64`; a value within 1e-9 relative distance of an
/// integer is snapped to it.
pub fn choose_params(kappa: &BigRational, gap: GapSource) -> Result<AmplifierParams> {
    if *kappa <= BigRational::zero() || *kappa >= BigRational::one() {
        return Err(Error::Parameter(format!(
            "κ = {kappa} must lie strictly between 0 and 1"
        )));
    }
    let delta = gap.value();
    if delta <= BigRational::zero() || delta >= seven_eighths() {
        return Err(Error::Parameter(format!(
            "gap δ = {delta} must lie strictly between 0 and 7/8"
        )));
    }
    let raw = copies_real(
        kappa.to_f64().expect("finite"),
        delta.to_f64().expect("finite"),
    );
    let nearest = raw.round();
    let k = if (raw - nearest).abs() <= 1e-9 * raw.max(1.0) {
        nearest
    } else {
        raw.ceil()
    };
    if !k.is_finite() || k > 1e12 {
        return Err(Error::budget(
            "amplifier copies",
            format!("{raw:e}"),
            "1e12",
        ));
    }
    let copies = (k as usize).max(1);
    Ok(AmplifierParams {
        kappa: Some(kappa.clone()),
        threshold: threshold_count(&delta, copies),
        gap: Some(delta),
        gap_source: Some(gap.label()),
        copies,
    })
}

/// Upper estimate of the arena size of [`amplify`].
pub fn amplified_node_estimate(l: &DecisionTree, copies: usize) -> u128 {
    let states = (copies as u128 + 1) * (copies as u128 + 2) / 2;
    states * l.node_count() as u128
}

pub const DEFAULT_AMPLIFY_NODE_BUDGET: u128 = 1 << 22;

/// `K` copies of `l` on consecutive blocks; accepts iff at least
/// `threshold` copies accept.
///
/// After copy `j` with `c` acceptances so far, every path continues into the
/// same node, so memory is `O(K²·|L|)` while each path still runs all `K`
/// copies.
pub fn amplify(
    l: &DecisionTree,
    params: &AmplifierParams,
    node_budget: u128,
) -> Result<DecisionTree> {
    let k = params.copies;
    let estimate = amplified_node_estimate(l, k);
    if estimate > node_budget {
        return Err(Error::budget(
            "amplified tree (nodes)",
            estimate,
            node_budget,
        ));
    }
    let w = l.num_vars();
    let mut b = TreeBuilder::new(k * w);
    // next[c]: continuation after all later copies, with c acceptances so far
    let mut next: Vec<NodeId> = (0..=k).map(|c| b.leaf(c >= params.threshold)).collect();
    for j in (0..k).rev() {
        next = (0..=j)
            .map(|c| b.graft(l, j * w, next[c], next[c + 1]))
            .collect();
    }
    Ok(b.finish(next[0]))
}

/// Probability that at least `threshold` of independent events with the
/// given probabilities occur.
pub fn bernoulli_tail<P: Probability>(ps: &[P], threshold: usize) -> P {
    // dist[c] = Pr[c successes so far]
    let mut dist: Vec<P> = vec![P::one()];
    for p in ps {
        let q = p.complement();
        let mut nextd = vec![P::zero(); dist.len() + 1];
        for (c, v) in dist.iter().enumerate() {
            nextd[c] = nextd[c].clone() + v.clone() * q.clone();
            nextd[c + 1] = nextd[c + 1].clone() + v.clone() * p.clone();
        }
        dist = nextd;
    }
    dist.into_iter()
        .skip(threshold)
        .fold(P::zero(), |acc, v| acc + v)
}
