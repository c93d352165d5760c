//! The iMondrian tree: batch construction on smallest bounding blocks,
//! isolation path lengths, and online extension by splicing.

mod bbox;
mod extend;
mod sampling;
mod tree;

pub use bbox::{smallest_block, BoundingBox};
pub use extend::Extension;
pub use sampling::{sample_exponential, sample_split, SplitDraw};
pub use tree::{Node, NodeId, NodeRecord, Split, Tree, TreeRng};
