//! Online extension of a tree by one point.

use super::bbox::include;
use super::sampling::{sample_exponential, sample_half_open, sample_proportional};
use super::tree::{later_than, Node, NodeId, Split, Tree};
use crate::dataset::check_point;
use crate::error::Result;

/// What happened when a point was inserted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    /// A new internal node was placed above `above`, with a fresh leaf for
    /// the point as its other child.
    Spliced {
        internal: NodeId,
        leaf: NodeId,
        above: NodeId,
    },
    /// The point duplicated an existing leaf, whose population grew.
    Absorbed { leaf: NodeId },
}

impl Tree {
    /// Inserts `x` into the tree.
    ///
    /// Descends from the root. At each node the distance of `x` outside the
    /// node's box sets the rate of an exponential clock; if it fires before
    /// the node's own split time, a new cut separating `x` from the node is
    /// spliced in above it. Otherwise the box is widened to cover `x` and
    /// the descent continues along the routing rule.
    pub fn extend(&mut self, x: &[f64]) -> Result<Extension> {
        check_point(x, self.dim())?;
        Ok(self.extend_unchecked(x))
    }

    pub(crate) fn extend_unchecked(&mut self, x: &[f64]) -> Extension {
        let d = self.dim();
        let mut id = self.root();
        let mut tau_parent = 0.0;
        loop {
            let (min, max) = (self.node_min(id), self.node_max(id));
            let rate: f64 = (0..d)
                .map(|j| (min[j] - x[j]).max(0.0) + (x[j] - max[j]).max(0.0))
                .sum();
            if rate > 0.0 {
                let e = sample_exponential(rate, &mut self.rng);
                let time = later_than(tau_parent, tau_parent + e);
                if time < self.node(id).time {
                    return self.splice_above(id, x, time, rate);
                }
            }

            let (min, max) = self.node_bounds_mut(id);
            include(min, max, x);
            let node = self.node_mut(id);
            node.population += 1;
            match node.split {
                Some(split) => {
                    tau_parent = node.time;
                    id = if x[split.dim] < split.value {
                        split.left
                    } else {
                        split.right
                    };
                }
                // only reachable with zero rate: x equals the leaf's point
                None => return Extension::Absorbed { leaf: id },
            }
        }
    }

    fn splice_above(&mut self, above: NodeId, x: &[f64], time: f64, rate: f64) -> Extension {
        let (min, max) = (self.node_min(above).to_vec(), self.node_max(above).to_vec());
        let dim = sample_proportional(
            x.len(),
            rate,
            |j| (min[j] - x[j]).max(0.0) + (x[j] - max[j]).max(0.0),
            &mut self.rng,
        );
        // `dim` has positive deviation, so x lies strictly outside on it
        let point_goes_right = x[dim] > max[dim];
        let value = if point_goes_right {
            sample_half_open(max[dim], x[dim], &mut self.rng)
        } else {
            sample_half_open(x[dim], min[dim], &mut self.rng)
        };

        let old_parent = self.node(above).parent;
        let population = self.node(above).population + 1;
        let (mut hull_min, mut hull_max) = (min, max);
        include(&mut hull_min, &mut hull_max, x);

        let internal = self.push_node(
            Node {
                split: None,
                time,
                population,
                parent: old_parent,
            },
            &hull_min,
            &hull_max,
        );
        let leaf = self.push_node(
            Node {
                split: None,
                time: f64::INFINITY,
                population: 1,
                parent: Some(internal),
            },
            x,
            x,
        );
        let (left, right) = if point_goes_right {
            (above, leaf)
        } else {
            (leaf, above)
        };
        self.node_mut(internal).split = Some(Split {
            dim,
            value,
            left,
            right,
        });
        self.node_mut(above).parent = Some(internal);

        match old_parent {
            None => self.set_root(internal),
            Some(p) => {
                let split = self
                    .node_mut(p)
                    .split
                    .as_mut()
                    .expect("parent is internal");
                if split.left == above {
                    split.left = internal;
                } else {
                    split.right = internal;
                }
            }
        }
        Extension::Spliced {
            internal,
            leaf,
            above,
        }
    }
}
