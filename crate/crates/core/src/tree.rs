//! Decision trees stored as hash-consed node arenas.
//!
//! Nodes may be shared between several parents, but all semantics are those
//! of the unfolded tree: a node reached along two different paths is
//! evaluated independently on each path.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::One;
use rand::Rng;
use serde::Serialize;

use crate::error::{check_len, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A tree node. Variable indices are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Leaf(bool),
    Inner { var: u32, zero: NodeId, one: NodeId },
}

/// Fixed-width bit set over variable indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct VarSet(Vec<u64>);

impl VarSet {
    pub(crate) fn new(num_vars: usize) -> Self {
        VarSet(vec![0; num_vars.div_ceil(64)])
    }

    pub(crate) fn insert(&mut self, var: usize) {
        self.0[var / 64] |= 1 << (var % 64);
    }

    pub(crate) fn contains(&self, var: usize) -> bool {
        self.0[var / 64] >> (var % 64) & 1 == 1
    }

    pub(crate) fn union_with(&mut self, other: &VarSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= *b;
        }
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64)
                .filter(move |b| bits >> b & 1 == 1)
                .map(move |b| w * 64 + b)
        })
    }
}

#[derive(Clone, Debug)]
pub struct DecisionTree {
    num_vars: usize,
    nodes: Vec<Node>,
    root: NodeId,
    /// Reachable nodes, every child listed before its parents.
    order: Vec<NodeId>,
    depth: usize,
    /// Per-node set of variables queried in the sub-DAG, kept only when some
    /// variable repeats along a path.
    below: Option<Vec<VarSet>>,
    queried: VarSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeReport {
    pub well_formed: bool,
    pub read_once_per_path: bool,
    pub depth: usize,
    #[serde(serialize_with = "serialize_display")]
    pub unfolded_size: BigUint,
    pub node_count: usize,
}

fn serialize_display<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl DecisionTree {
    /// Builds a tree from a raw node table, checking every structural
    /// invariant. The table is kept as given, including unreachable nodes.
    pub fn from_parts(num_vars: usize, nodes: Vec<Node>, root: NodeId) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::Structure("num_vars must be positive".into()));
        }
        if root.index() >= nodes.len() {
            return Err(Error::Structure(format!("root {} is not a node", root.0)));
        }
        for (i, node) in nodes.iter().enumerate() {
            if let Node::Inner { var, zero, one } = *node {
                if var as usize >= num_vars {
                    return Err(Error::Structure(format!(
                        "node {i} queries variable {} but there are {num_vars}",
                        var as usize + 1
                    )));
                }
                for child in [zero, one] {
                    if child.index() >= nodes.len() {
                        return Err(Error::Structure(format!(
                            "node {i} has dangling child {}",
                            child.0
                        )));
                    }
                }
            }
        }
        check_acyclic(&nodes)?;
        let order = post_order(&nodes, root);

        let mut depth = vec![0usize; nodes.len()];
        let mut below: Vec<Option<VarSet>> = vec![None; nodes.len()];
        let mut read_once = true;
        for &id in &order {
            if let Node::Inner { var, zero, one } = nodes[id.index()] {
                depth[id.index()] = 1 + depth[zero.index()].max(depth[one.index()]);
                let mut set = VarSet::new(num_vars);
                for child in [zero, one] {
                    if let Some(child_set) = &below[child.index()] {
                        if child_set.contains(var as usize) {
                            read_once = false;
                        }
                        set.union_with(child_set);
                    }
                }
                set.insert(var as usize);
                below[id.index()] = Some(set);
            }
        }
        let queried = below[root.index()]
            .clone()
            .unwrap_or_else(|| VarSet::new(num_vars));
        let below = if read_once {
            None
        } else {
            Some(
                below
                    .into_iter()
                    .map(|s| s.unwrap_or_else(|| VarSet::new(num_vars)))
                    .collect(),
            )
        };
        Ok(DecisionTree {
            num_vars,
            depth: depth[root.index()],
            nodes,
            root,
            order,
            below,
            queried,
        })
    }

    pub fn leaf(num_vars: usize, label: bool) -> Self {
        let mut b = TreeBuilder::new(num_vars);
        let root = b.leaf(label);
        b.finish(root)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id.index()]
    }

    /// The full node table, reachable or not.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub(crate) fn order(&self) -> &[NodeId] {
        &self.order
    }

    pub(crate) fn below(&self, id: NodeId) -> Option<&VarSet> {
        self.below.as_ref().map(|b| &b[id.index()])
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of nodes reachable from the root.
    pub fn node_count(&self) -> usize {
        self.order.len()
    }

    pub fn is_read_once_per_path(&self) -> bool {
        self.below.is_none()
    }

    /// 0-based indices of every variable the tree actually queries.
    pub fn queried_vars(&self) -> Vec<usize> {
        self.queried.iter().collect()
    }

    pub fn queries(&self, var: usize) -> bool {
        var < self.num_vars && self.queried.contains(var)
    }

    pub fn validate(&self) -> TreeReport {
        let mut size: Vec<BigUint> = vec![BigUint::one(); self.nodes.len()];
        for &id in &self.order {
            if let Node::Inner { zero, one, .. } = self.nodes[id.index()] {
                size[id.index()] = BigUint::one() + &size[zero.index()] + &size[one.index()];
            }
        }
        TreeReport {
            well_formed: true,
            read_once_per_path: self.is_read_once_per_path(),
            depth: self.depth,
            unfolded_size: size[self.root.index()].clone(),
            node_count: self.order.len(),
        }
    }

    /// `T(x)` on a complete input.
    pub fn eval_complete(&self, x: &[bool]) -> Result<bool> {
        check_len(self.num_vars, x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[bool]) -> bool {
        let mut id = self.root;
        loop {
            match self.nodes[id.index()] {
                Node::Leaf(label) => return label,
                Node::Inner { var, zero, one } => {
                    id = if x[var as usize] { one } else { zero };
                }
            }
        }
    }

    /// Same tree with every leaf label complemented.
    pub fn with_flipped_labels(&self) -> DecisionTree {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match *n {
                Node::Leaf(b) => Node::Leaf(!b),
                inner => inner,
            })
            .collect();
        DecisionTree::from_parts(self.num_vars, nodes, self.root)
            .expect("relabelling preserves structure")
    }

    /// Same semantics over a wider variable space.
    pub fn widened(&self, num_vars: usize) -> Result<DecisionTree> {
        if num_vars < self.num_vars {
            return Err(Error::Parameter(format!(
                "cannot narrow a tree over {} variables to {num_vars}",
                self.num_vars
            )));
        }
        DecisionTree::from_parts(num_vars, self.nodes.clone(), self.root)
    }
}

fn check_acyclic(nodes: &[Node]) -> Result<()> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; nodes.len()];
    for start in 0..nodes.len() {
        if state[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, 0u8)];
        state[start] = 1;
        while let Some(&mut (id, ref mut next)) = stack.last_mut() {
            let children = match nodes[id] {
                Node::Leaf(_) => [None, None],
                Node::Inner { zero, one, .. } => [Some(zero.index()), Some(one.index())],
            };
            if (*next as usize) < 2 {
                let child = children[*next as usize];
                *next += 1;
                if let Some(c) = child {
                    match state[c] {
                        0 => {
                            state[c] = 1;
                            stack.push((c, 0));
                        }
                        1 => return Err(Error::Structure(format!("cycle through node {c}"))),
                        _ => {}
                    }
                }
            } else {
                state[id] = 2;
                stack.pop();
            }
        }
    }
    Ok(())
}

/// Reachable nodes in post-order (zero child first). Assumes acyclicity.
fn post_order(nodes: &[Node], root: NodeId) -> Vec<NodeId> {
    let mut seen = vec![false; nodes.len()];
    let mut order = Vec::new();
    let mut stack = vec![(root, false)];
    while let Some((id, expanded)) = stack.pop() {
        if expanded {
            order.push(id);
            continue;
        }
        if seen[id.index()] {
            continue;
        }
        seen[id.index()] = true;
        stack.push((id, true));
        if let Node::Inner { zero, one, .. } = nodes[id.index()] {
            if !seen[one.index()] {
                stack.push((one, false));
            }
            if !seen[zero.index()] {
                stack.push((zero, false));
            }
        }
    }
    order
}

/// Hash-consing arena for constructing trees bottom-up.
#[derive(Debug)]
pub struct TreeBuilder {
    num_vars: usize,
    nodes: Vec<Node>,
    index: HashMap<Node, NodeId>,
}

impl TreeBuilder {
    pub fn new(num_vars: usize) -> Self {
        TreeBuilder {
            num_vars,
            nodes: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Nodes allocated so far, including ones that may end up unreachable.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn intern(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node);
        self.index.insert(node, id);
        id
    }

    pub fn leaf(&mut self, label: bool) -> NodeId {
        self.intern(Node::Leaf(label))
    }

    /// Inner node querying the 0-based `var`.
    ///
    /// Identical children are kept: the node still queries `var`.
    pub fn inner(&mut self, var: usize, zero: NodeId, one: NodeId) -> NodeId {
        assert!(var < self.num_vars, "variable {var} out of range");
        assert!(zero.index() < self.nodes.len() && one.index() < self.nodes.len());
        self.intern(Node::Inner {
            var: var as u32,
            zero,
            one,
        })
    }

    /// Copies the reachable part of `src` into this arena, shifting every
    /// variable by `offset` and sending its 0-leaves to `on_zero` and its
    /// 1-leaves to `on_one`.
    pub fn graft(
        &mut self,
        src: &DecisionTree,
        offset: usize,
        on_zero: NodeId,
        on_one: NodeId,
    ) -> NodeId {
        let mut map: HashMap<NodeId, NodeId> = HashMap::with_capacity(src.order.len());
        for &id in &src.order {
            let new = match src.node(id) {
                Node::Leaf(false) => on_zero,
                Node::Leaf(true) => on_one,
                Node::Inner { var, zero, one } => {
                    self.inner(var as usize + offset, map[&zero], map[&one])
                }
            };
            map.insert(id, new);
        }
        map[&src.root]
    }

    /// Keeps only the nodes reachable from `root`, children first.
    pub fn finish(self, root: NodeId) -> DecisionTree {
        let order = post_order(&self.nodes, root);
        let mut remap = vec![NodeId(u32::MAX); self.nodes.len()];
        let mut nodes = Vec::with_capacity(order.len());
        for (new, &old) in order.iter().enumerate() {
            remap[old.index()] = NodeId(new as u32);
            nodes.push(match self.nodes[old.index()] {
                Node::Inner { var, zero, one } => Node::Inner {
                    var,
                    zero: remap[zero.index()],
                    one: remap[one.index()],
                },
                leaf => leaf,
            });
        }
        let root = remap[root.index()];
        DecisionTree::from_parts(self.num_vars, nodes, root).expect("builder output is well formed")
    }
}

/// Random tree over `num_vars` variables of depth at most `max_depth`.
///
/// With `allow_repeats` a variable may be queried again below itself;
/// otherwise each path queries distinct variables.
pub fn random_tree<R: Rng + ?Sized>(
    rng: &mut R,
    num_vars: usize,
    max_depth: usize,
    allow_repeats: bool,
) -> DecisionTree {
    fn grow<R: Rng + ?Sized>(
        rng: &mut R,
        b: &mut TreeBuilder,
        path: &mut Vec<usize>,
        depth_left: usize,
        allow_repeats: bool,
    ) -> NodeId {
        let n = b.num_vars();
        let free: Vec<usize> = if allow_repeats {
            (0..n).collect()
        } else {
            (0..n).filter(|v| !path.contains(v)).collect()
        };
        // leaf probability grows as the path deepens
        let stop = depth_left == 0 || free.is_empty() || (!path.is_empty() && rng.gen_ratio(1, 4));
        if stop {
            return b.leaf(rng.gen());
        }
        let var = free[rng.gen_range(0..free.len())];
        path.push(var);
        let zero = grow(rng, b, path, depth_left - 1, allow_repeats);
        let one = grow(rng, b, path, depth_left - 1, allow_repeats);
        path.pop();
        b.inner(var, zero, one)
    }

    let mut b = TreeBuilder::new(num_vars);
    let root = grow(rng, &mut b, &mut Vec::new(), max_depth, allow_repeats);
    b.finish(root)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn and2() -> DecisionTree {
        let mut b = TreeBuilder::new(2);
        let f = b.leaf(false);
        let t = b.leaf(true);
        let x2 = b.inner(1, f, t);
        let root = b.inner(0, f, x2);
        b.finish(root)
    }

    pub(crate) fn or2() -> DecisionTree {
        let mut b = TreeBuilder::new(2);
        let f = b.leaf(false);
        let t = b.leaf(true);
        let x2 = b.inner(1, f, t);
        let root = b.inner(0, x2, t);
        b.finish(root)
    }

    #[test]
    fn eval_conjunction() {
        let t = and2();
        assert!(t.eval_complete(&[true, true]).unwrap());
        assert!(!t.eval_complete(&[true, false]).unwrap());
        assert!(!t.eval_complete(&[false, true]).unwrap());
        assert_eq!(
            t.eval_complete(&[true]),
            Err(Error::Shape {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn leaf_tree() {
        let t = DecisionTree::leaf(3, true);
        assert!(t.eval_complete(&[false, true, false]).unwrap());
        let r = t.validate();
        assert_eq!(r.depth, 0);
        assert_eq!(r.node_count, 1);
        assert!(r.read_once_per_path);
    }

    #[test]
    fn builder_shares_identical_nodes() {
        let mut b = TreeBuilder::new(3);
        let f = b.leaf(false);
        let t = b.leaf(true);
        let a = b.inner(2, f, t);
        let c = b.inner(2, f, t);
        assert_eq!(a, c);
        let root = b.inner(0, a, c);
        let tree = b.finish(root);
        assert_eq!(tree.node_count(), 4);
        assert_eq!(tree.validate().unfolded_size, BigUint::from(7u32));
        assert_eq!(tree.depth(), 2);
    }

    #[test]
    fn repeated_variable_is_detected() {
        let mut b = TreeBuilder::new(2);
        let f = b.leaf(false);
        let t = b.leaf(true);
        let inner = b.inner(0, f, t);
        let root = b.inner(0, inner, t);
        let tree = b.finish(root);
        assert!(!tree.validate().read_once_per_path);
        assert!(and2().validate().read_once_per_path);
    }

    #[test]
    fn rejects_cycles_and_dangling() {
        let nodes = vec![
            Node::Inner {
                var: 0,
                zero: NodeId(1),
                one: NodeId(1),
            },
            Node::Inner {
                var: 0,
                zero: NodeId(0),
                one: NodeId(2),
            },
            Node::Leaf(true),
        ];
        assert!(matches!(
            DecisionTree::from_parts(1, nodes, NodeId(0)),
            Err(Error::Structure(_))
        ));
        let dangling = vec![Node::Inner {
            var: 0,
            zero: NodeId(5),
            one: NodeId(5),
        }];
        assert!(DecisionTree::from_parts(1, dangling, NodeId(0)).is_err());
        let bad_var = vec![
            Node::Leaf(false),
            Node::Inner {
                var: 3,
                zero: NodeId(0),
                one: NodeId(0),
            },
        ];
        assert!(DecisionTree::from_parts(2, bad_var, NodeId(1)).is_err());
    }

    #[test]
    fn graft_shifts_and_redirects() {
        let inner = and2();
        let mut b = TreeBuilder::new(4);
        let f = b.leaf(false);
        let t = b.leaf(true);
        // (x3 and x4) with the 0-leaves redirected to 1 and the 1-leaf to 0
        let root = b.graft(&inner, 2, t, f);
        let tree = b.finish(root);
        for bits in 0..16u32 {
            let x: Vec<bool> = (0..4).map(|i| bits >> i & 1 == 1).collect();
            assert_eq!(tree.eval_complete(&x).unwrap(), !(x[2] && x[3]));
        }
    }

    #[test]
    fn flipped_labels_complement_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let t = random_tree(&mut rng, 4, 5, true);
            let f = t.with_flipped_labels();
            for bits in 0..16u32 {
                let x: Vec<bool> = (0..4).map(|i| bits >> i & 1 == 1).collect();
                assert_ne!(t.eval_complete(&x).unwrap(), f.eval_complete(&x).unwrap());
            }
        }
    }

    #[test]
    fn random_trees_respect_depth_and_repeat_flag() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let t = random_tree(&mut rng, 5, 6, false);
            assert!(t.depth() <= 5);
            assert!(t.is_read_once_per_path());
            let r = random_tree(&mut rng, 3, 6, true);
            assert!(r.depth() <= 6);
        }
    }
}
