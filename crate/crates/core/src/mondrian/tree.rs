use rand_chacha::ChaCha8Rng;

use super::bbox::{contains, include, BoundingBox};
use super::sampling::draw_split;
use crate::dataset::{check_point, Dataset};
use crate::error::{Error, Result};

/// Per-tree generator. Its full state is persisted with the model so that
/// a reloaded tree extends exactly like the original would have.
pub type TreeRng = ChaCha8Rng;

/// Index of a node in its tree's arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    const PLACEHOLDER: NodeId = NodeId(u32::MAX);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    fn from_index(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("tree arena exceeds u32 indices"))
    }
}

/// Cut of an internal node. Points with `x[dim] < value` go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub dim: usize,
    pub value: f64,
    pub left: NodeId,
    pub right: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    /// `None` for leaves.
    pub split: Option<Split>,
    /// Split time; `+inf` at leaves.
    pub time: f64,
    pub population: usize,
    pub parent: Option<NodeId>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }
}

/// A node in preorder form, without arena links. Used for persistence and
/// for structural comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub split: Option<(usize, f64)>,
    pub time: f64,
    pub population: usize,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// An iMondrian tree over `d`-dimensional points.
///
/// Nodes live in an arena; bounding boxes are stored flat alongside, `2d`
/// values per node (`min` then `max`).
#[derive(Debug, Clone)]
pub struct Tree {
    d: usize,
    nodes: Vec<Node>,
    bounds: Vec<f64>,
    root: NodeId,
    pub(super) rng: TreeRng,
}

struct Task {
    start: usize,
    end: usize,
    tau_parent: f64,
    link: Option<(NodeId, bool)>,
}

/// Smallest representable time strictly after `parent` when `t` rounds
/// onto it.
pub(super) fn later_than(parent: f64, t: f64) -> f64 {
    if t > parent {
        t
    } else {
        parent.next_up()
    }
}

impl Tree {
    /// Builds a tree over every point of `points`.
    pub fn fit(points: &Dataset, rng: TreeRng) -> Result<Tree> {
        let indices: Vec<usize> = (0..points.len()).collect();
        Self::fit_indices(points, &indices, rng)
    }

    /// Builds a tree over the listed rows of `points`.
    pub fn fit_indices(points: &Dataset, indices: &[usize], rng: TreeRng) -> Result<Tree> {
        Self::fit_with_parent_time(points, indices, 0.0, rng)
    }

    /// Builds a tree whose root split time is drawn after `tau_parent`.
    pub fn fit_with_parent_time(
        points: &Dataset,
        indices: &[usize],
        tau_parent: f64,
        rng: TreeRng,
    ) -> Result<Tree> {
        if indices.is_empty() {
            return Err(Error::Empty("cannot build a tree from no points"));
        }
        let d = points.dim();
        let mut tree = Tree {
            d,
            nodes: Vec::with_capacity(2 * indices.len()),
            bounds: Vec::with_capacity(4 * d * indices.len()),
            root: NodeId(0),
            rng,
        };
        let mut idx = indices.to_vec();
        tree.root = tree.grow(points, &mut idx, tau_parent, None);
        Ok(tree)
    }

    /// Appends the subtree for `idx` to the arena, in preorder, and returns
    /// its root.
    pub(super) fn grow(
        &mut self,
        points: &Dataset,
        idx: &mut [usize],
        tau_parent: f64,
        link: Option<(NodeId, bool)>,
    ) -> NodeId {
        let d = self.d;
        let mut stack = vec![Task {
            start: 0,
            end: idx.len(),
            tau_parent,
            link,
        }];
        let subtree_root = NodeId::from_index(self.nodes.len());

        while let Some(task) = stack.pop() {
            let members = &mut idx[task.start..task.end];
            let id = NodeId::from_index(self.nodes.len());

            let base = self.bounds.len();
            let first = points.row(members[0]);
            self.bounds.extend_from_slice(first);
            self.bounds.extend_from_slice(first);
            let (min, max) = self.bounds[base..].split_at_mut(d);
            for &i in &members[1..] {
                include(min, max, points.row(i));
            }

            let draw = if members.len() > 1 {
                draw_split(min, max, &mut self.rng)
            } else {
                None
            };

            let parent = task.link.map(|(p, right)| {
                let split = self.nodes[p.index()]
                    .split
                    .as_mut()
                    .expect("parent of a grown node is internal");
                if right {
                    split.right = id;
                } else {
                    split.left = id;
                }
                p
            });

            match draw {
                Some(cut) => {
                    let time = later_than(task.tau_parent, task.tau_parent + cut.time_increment);
                    let mut mid = 0;
                    for k in 0..members.len() {
                        if points.row(members[k])[cut.dim] < cut.value {
                            members.swap(mid, k);
                            mid += 1;
                        }
                    }
                    debug_assert!(mid > 0 && mid < members.len());
                    self.nodes.push(Node {
                        split: Some(Split {
                            dim: cut.dim,
                            value: cut.value,
                            left: NodeId::PLACEHOLDER,
                            right: NodeId::PLACEHOLDER,
                        }),
                        time,
                        population: members.len(),
                        parent,
                    });
                    let mid = task.start + mid;
                    stack.push(Task {
                        start: mid,
                        end: task.end,
                        tau_parent: time,
                        link: Some((id, true)),
                    });
                    stack.push(Task {
                        start: task.start,
                        end: mid,
                        tau_parent: time,
                        link: Some((id, false)),
                    });
                }
                // a single point, or duplicates with a zero-volume block
                None => self.nodes.push(Node {
                    split: None,
                    time: f64::INFINITY,
                    population: members.len(),
                    parent,
                }),
            }
        }
        subtree_root
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub(super) fn set_root(&mut self, id: NodeId) {
        self.root = id;
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub(super) fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id.index()]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn internal_count(&self) -> usize {
        self.nodes.len() - self.leaf_count()
    }

    /// Total number of points the tree has absorbed.
    pub fn population(&self) -> usize {
        self.node(self.root).population
    }

    pub fn rng(&self) -> &TreeRng {
        &self.rng
    }

    pub fn node_min(&self, id: NodeId) -> &[f64] {
        let base = 2 * self.d * id.index();
        &self.bounds[base..base + self.d]
    }

    pub fn node_max(&self, id: NodeId) -> &[f64] {
        let base = 2 * self.d * id.index() + self.d;
        &self.bounds[base..base + self.d]
    }

    pub(super) fn node_bounds_mut(&mut self, id: NodeId) -> (&mut [f64], &mut [f64]) {
        let base = 2 * self.d * id.index();
        self.bounds[base..base + 2 * self.d].split_at_mut(self.d)
    }

    pub(super) fn push_node(&mut self, node: Node, min: &[f64], max: &[f64]) -> NodeId {
        let id = NodeId::from_index(self.nodes.len());
        self.nodes.push(node);
        self.bounds.extend_from_slice(min);
        self.bounds.extend_from_slice(max);
        id
    }

    pub fn bbox(&self, id: NodeId) -> BoundingBox {
        BoundingBox {
            min: self.node_min(id).to_vec(),
            max: self.node_max(id).to_vec(),
        }
    }

    /// Number of edges from the root to the leaf `x` routes to.
    pub fn path_length(&self, x: &[f64]) -> Result<usize> {
        check_point(x, self.d)?;
        Ok(self.route(x).1)
    }

    /// Leaf reached by `x`.
    pub fn leaf_for(&self, x: &[f64]) -> Result<NodeId> {
        check_point(x, self.d)?;
        Ok(self.route(x).0)
    }

    /// Routing without validation; `x` must have length `d`.
    pub(crate) fn route(&self, x: &[f64]) -> (NodeId, usize) {
        let mut id = self.root;
        let mut depth = 0;
        while let Some(split) = &self.nodes[id.index()].split {
            id = if x[split.dim] < split.value {
                split.left
            } else {
                split.right
            };
            depth += 1;
        }
        (id, depth)
    }

    /// Node ids in preorder (node, left subtree, right subtree).
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            out.push(id);
            if let Some(split) = &self.nodes[id.index()].split {
                stack.push(split.right);
                stack.push(split.left);
            }
        }
        out
    }

    pub fn to_records(&self) -> Vec<NodeRecord> {
        self.preorder()
            .into_iter()
            .map(|id| {
                let node = self.node(id);
                NodeRecord {
                    split: node.split.map(|s| (s.dim, s.value)),
                    time: node.time,
                    population: node.population,
                    min: self.node_min(id).to_vec(),
                    max: self.node_max(id).to_vec(),
                }
            })
            .collect()
    }

    /// Rebuilds a tree from its preorder records and validates it.
    pub fn from_records(d: usize, records: &[NodeRecord], rng: TreeRng) -> Result<Tree> {
        if d == 0 {
            return Err(Error::Format("tree dimensionality is zero".into()));
        }
        if records.is_empty() {
            return Err(Error::Format("tree has no nodes".into()));
        }
        let mut tree = Tree {
            d,
            nodes: Vec::with_capacity(records.len()),
            bounds: Vec::with_capacity(2 * d * records.len()),
            root: NodeId(0),
            rng,
        };
        // pending child slots, top is filled next: (parent, is_right)
        let mut open: Vec<(NodeId, bool)> = Vec::new();
        for (k, rec) in records.iter().enumerate() {
            if rec.min.len() != d || rec.max.len() != d {
                return Err(Error::Format(format!("node {k} has wrong box width")));
            }
            let parent = if k == 0 {
                None
            } else {
                let (p, right) = open
                    .pop()
                    .ok_or_else(|| Error::Format(format!("node {k} has no open parent slot")))?;
                let id = NodeId::from_index(k);
                let split = tree.nodes[p.index()].split.as_mut().expect("open slots are internal");
                if right {
                    split.right = id;
                } else {
                    split.left = id;
                }
                Some(p)
            };
            let split = match rec.split {
                Some((dim, value)) => {
                    if dim >= d {
                        return Err(Error::Format(format!("node {k} splits dimension {dim}")));
                    }
                    Some(Split {
                        dim,
                        value,
                        left: NodeId::PLACEHOLDER,
                        right: NodeId::PLACEHOLDER,
                    })
                }
                None => None,
            };
            let id = tree.push_node(
                Node {
                    split,
                    time: rec.time,
                    population: rec.population,
                    parent,
                },
                &rec.min,
                &rec.max,
            );
            if split.is_some() {
                open.push((id, true));
                open.push((id, false));
            }
        }
        if !open.is_empty() {
            return Err(Error::Format("preorder node list ends early".into()));
        }
        tree.check_invariants()?;
        Ok(tree)
    }

    /// Checks the structural invariants every batch-built or extended tree
    /// satisfies: proper binary shape, reachability of every arena node,
    /// parent links, strictly increasing split times with `+inf` leaves,
    /// nested boxes, split values inside their box, and population sums.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Invariant(msg));
        let root = self.node(self.root);
        if root.parent.is_some() {
            return fail("root has a parent".into());
        }
        let mut visited = 0usize;
        let mut leaves = 0usize;
        let mut internals = 0usize;
        // (node, parent time)
        let mut stack = vec![(self.root, 0.0f64)];
        while let Some((id, parent_time)) = stack.pop() {
            visited += 1;
            if visited > self.nodes.len() {
                return fail("cycle in node links".into());
            }
            let node = self.node(id);
            let (min, max) = (self.node_min(id), self.node_max(id));
            if min.iter().zip(max).any(|(lo, hi)| lo > hi || lo.is_nan() || hi.is_nan()) {
                return fail(format!("node {} has an inverted box", id.index()));
            }
            if node.time.partial_cmp(&parent_time) != Some(std::cmp::Ordering::Greater) {
                return fail(format!(
                    "node {} time {} not after parent time {parent_time}",
                    id.index(),
                    node.time
                ));
            }
            if node.population == 0 {
                return fail(format!("node {} is empty", id.index()));
            }
            match &node.split {
                None => {
                    leaves += 1;
                    if node.time != f64::INFINITY {
                        return fail(format!("leaf {} has finite time", id.index()));
                    }
                }
                Some(split) => {
                    internals += 1;
                    if !node.time.is_finite() {
                        return fail(format!("internal node {} has infinite time", id.index()));
                    }
                    if !(min[split.dim] <= split.value && split.value <= max[split.dim]) {
                        return fail(format!(
                            "node {} split value {} outside [{}, {}]",
                            id.index(),
                            split.value,
                            min[split.dim],
                            max[split.dim]
                        ));
                    }
                    let mut child_population = 0;
                    for child in [split.left, split.right] {
                        if child.index() >= self.nodes.len() {
                            return fail(format!("node {} has a dangling child", id.index()));
                        }
                        let c = self.node(child);
                        if c.parent != Some(id) {
                            return fail(format!("node {} has a stale parent link", child.index()));
                        }
                        let nested = self.node_min(child).iter().zip(min).all(|(a, b)| a >= b)
                            && self.node_max(child).iter().zip(max).all(|(a, b)| a <= b);
                        if !nested {
                            return fail(format!(
                                "box of node {} escapes its parent {}",
                                child.index(),
                                id.index()
                            ));
                        }
                        child_population += c.population;
                        stack.push((child, node.time));
                    }
                    if child_population != node.population {
                        return fail(format!(
                            "node {} population {} != children total {child_population}",
                            id.index(),
                            node.population
                        ));
                    }
                }
            }
        }
        if visited != self.nodes.len() {
            return fail(format!(
                "{} arena nodes unreachable",
                self.nodes.len() - visited
            ));
        }
        if leaves != internals + 1 {
            return fail(format!("{leaves} leaves but {internals} internal nodes"));
        }
        Ok(())
    }

    /// Every point must route to a leaf whose box contains it.
    pub fn check_routing(&self, points: &Dataset) -> Result<()> {
        for (i, x) in points.rows().enumerate() {
            let (leaf, _) = self.route(x);
            if !contains(self.node_min(leaf), self.node_max(leaf), x) {
                return Err(Error::Invariant(format!(
                    "point {i} routes to leaf {} whose box excludes it",
                    leaf.index()
                )));
            }
        }
        Ok(())
    }
}

/// Structural equality: same shape, bit-identical stored values and
/// generator state, regardless of arena layout.
impl PartialEq for Tree {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.rng == other.rng && self.to_records() == other.to_records()
    }
}
