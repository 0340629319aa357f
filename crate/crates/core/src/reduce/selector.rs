//! Clause gadgets `L_C`, fat words, and the selector tree `L`.
//!
//! Layout of `L` (0-based): `x` at `0..n`, `y` at `n..n+2l+1`, `z` at
//! `n+2l+1`, for a total width of `n + 2l + 2`.

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::explain::FeatureSet;
use crate::instance::HittingSetInstance;
use crate::partial::PartialInput;
use crate::tree::{DecisionTree, NodeId, TreeBuilder};

/// Largest `l` for which the fat-word table is materialised.
pub const MAX_SELECTOR_L: usize = 12;

pub fn is_fat(word: &[bool]) -> bool {
    2 * word.iter().filter(|&&b| b).count() > word.len()
}

/// Number of fat words of length `len`, by enumeration.
pub fn count_fat_words(len: usize) -> u64 {
    (0..1u64 << len)
        .filter(|w| 2 * w.count_ones() as usize > len)
        .count() as u64
}

/// Smallest `l` with `m ≤ 2^{2l}`.
pub fn selector_half_width(m: usize) -> usize {
    let mut l = 0;
    while (1u128 << (2 * l)) < m as u128 {
        l += 1;
    }
    l
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LayoutL {
    pub n: usize,
    pub l: usize,
    pub m: usize,
    pub k: usize,
}

impl LayoutL {
    pub fn for_instance(inst: &HittingSetInstance) -> Self {
        LayoutL {
            n: inst.num_vars(),
            l: selector_half_width(inst.num_clauses()),
            m: inst.num_clauses(),
            k: inst.width(),
        }
    }

    pub fn word_len(&self) -> usize {
        2 * self.l + 1
    }

    pub fn width(&self) -> usize {
        self.n + 2 * self.l + 2
    }

    /// Position of `y_j` for 0-based `j`.
    pub fn y(&self, j: usize) -> usize {
        self.n + j
    }

    pub fn z(&self) -> usize {
        self.n + 2 * self.l + 1
    }

    pub fn y_range(&self) -> std::ops::Range<usize> {
        self.n..self.n + self.word_len()
    }

    /// Depth of `L`: the selector, then `k` clause variables, then `z`.
    pub fn depth(&self) -> usize {
        self.word_len() + self.k + 1
    }
}

/// Lexicographic fat words of length `2l+1` mapped onto clauses
/// `0..m` by `j ↦ j mod m`.
///
/// Words are read with `y₁` as the most significant bit, so increasing
/// integers are lexicographic order.
#[derive(Clone, Debug)]
pub struct FatWordMap {
    l: usize,
    m: usize,
    /// Indexed by the word as an integer; `None` for thin words.
    clause: Vec<Option<u32>>,
}

impl FatWordMap {
    pub fn new(l: usize, m: usize) -> Result<Self> {
        if l > MAX_SELECTOR_L {
            return Err(Error::budget("fat word table (l)", l, MAX_SELECTOR_L));
        }
        if m == 0 || m as u128 > 1u128 << (2 * l) {
            return Err(Error::Parameter(format!(
                "{m} clauses do not fit 2^{} fat words",
                2 * l
            )));
        }
        let len = 2 * l + 1;
        let mut j = 0usize;
        let clause = (0..1u64 << len)
            .map(|w| {
                (2 * w.count_ones() as usize > len).then(|| {
                    let c = (j % m) as u32;
                    j += 1;
                    c
                })
            })
            .collect();
        Ok(FatWordMap { l, m, clause })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn word_len(&self) -> usize {
        2 * self.l + 1
    }

    /// 0-based clause for word `w` (`y₁` most significant), `None` if thin.
    pub fn clause_of(&self, w: u64) -> Option<usize> {
        self.clause[w as usize].map(|c| c as usize)
    }

    /// Fat words with their clauses, in lexicographic order.
    pub fn fat_words(&self) -> impl Iterator<Item = (u64, usize)> + '_ {
        self.clause
            .iter()
            .enumerate()
            .filter_map(|(w, c)| c.map(|c| (w as u64, c as usize)))
    }

    /// Number of fat words assigned to each clause.
    pub fn preimage_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.m];
        for (_, c) in self.fat_words() {
            counts[c] += 1;
        }
        counts
    }
}

fn check_gadget_positions(num_vars: usize, clause: &[usize], z: usize) -> Result<()> {
    if clause.is_empty() {
        return Err(Error::Domain(
            "clause gadget needs at least one variable".into(),
        ));
    }
    let mut all = clause.to_vec();
    all.push(z);
    FeatureSet::new(all, num_vars).map(|_| ())
}

/// `L_C` over `num_vars` variables: reads every clause variable, then `z`.
/// Accepts iff exactly one clause variable is 0, or all are 1 and `z = 0`.
pub fn build_lc(num_vars: usize, clause: &[usize], z: usize) -> Result<DecisionTree> {
    check_gadget_positions(num_vars, clause, z)?;
    let mut b = TreeBuilder::new(num_vars);
    let root = lc_into(&mut b, clause, z);
    Ok(b.finish(root))
}

/// Nodes are shared by the number of zeros seen so far, capped at 2.
fn lc_into(b: &mut TreeBuilder, clause: &[usize], z: usize) -> NodeId {
    let f = b.leaf(false);
    let t = b.leaf(true);
    let mut next = [b.inner(z, t, f), b.inner(z, t, t), b.inner(z, f, f)];
    for &v in clause.iter().rev() {
        next = [
            b.inner(v, next[1], next[0]),
            b.inner(v, next[2], next[1]),
            b.inner(v, next[2], next[2]),
        ];
    }
    next[0]
}

/// Selector tree `L` for an instance.
///
/// Thin y-words lead to leaf 1; a fat word runs `L_C` for its clause under
/// [`FatWordMap`]. Subtrees are shared.
pub fn build_l(inst: &HittingSetInstance) -> Result<(DecisionTree, LayoutL)> {
    let layout = LayoutL::for_instance(inst);
    let map = FatWordMap::new(layout.l, layout.m)?;
    let mut b = TreeBuilder::new(layout.width());
    let one = b.leaf(true);
    let gadgets: Vec<NodeId> = inst
        .clauses()
        .iter()
        .map(|c| lc_into(&mut b, c, layout.z()))
        .collect();
    let len = layout.word_len();
    // level d holds the subtrees after reading d bits, indexed by prefix
    let mut level: Vec<NodeId> = (0..1u64 << len)
        .map(|w| map.clause_of(w).map_or(one, |c| gadgets[c]))
        .collect();
    for d in (0..len).rev() {
        level = level
            .chunks(2)
            .map(|pair| b.inner(layout.y(d), pair[0], pair[1]))
            .collect();
    }
    Ok((b.finish(level[0]), layout))
}

/// Rules `α_i = 0 ⇒ p_i = 1` and `α_i = 1 ⇒ p_i = ⊥`; `y` and `z` stay ⊥.
pub fn assignment_to_partial(alpha: &[bool], layout: &LayoutL) -> Result<PartialInput> {
    check_len(layout.n, alpha.len())?;
    let mut values = vec![None; layout.width()];
    for (i, &a) in alpha.iter().enumerate() {
        if !a {
            values[i] = Some(true);
        }
    }
    Ok(PartialInput::new(values))
}

/// Inverse of [`assignment_to_partial`] on the x-block.
pub fn partial_to_assignment(p: &PartialInput, layout: &LayoutL) -> Result<Vec<bool>> {
    check_len(layout.width(), p.len())?;
    (0..layout.n)
        .map(|i| match p.get(i) {
            Some(true) => Ok(false),
            None => Ok(true),
            Some(false) => Err(Error::Domain(format!("x{} is 0; expected 1 or ⊥", i + 1))),
        })
        .collect()
}
