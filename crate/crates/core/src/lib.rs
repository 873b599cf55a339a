//! Fusion trees on a word-RAM model.
//!
//! Keys are unsigned words of a runtime width (8, 16, 32 or 64 bits). The
//! pieces build on each other:
//!
//! - [`word`]: bit-level primitives such as `floor(lg x)` and the most
//!   significant differing bit, plus mask builders.
//! - [`trie`]: the compressed binary trie of a key set, its branching
//!   ("relevant") bits, and a two-search rank procedure. It is the
//!   reference the packed code is checked against.
//! - [`sketch`]: order-preserving extraction of the relevant bits, exact
//!   or with a single multiplication.
//! - [`node`]: a fusion node, whose sketches share one packed word so that a
//!   query's rank among the node keys takes a fixed number of word operations.
//! - [`tree`]: fusion nodes as a B-tree, with rank, predecessor, successor
//!   and a sort.
//! - [`btree`]: the classic B-tree with sequential in-node search.
//!
//! Word operations and key comparisons are counted cooperatively through
//! [`Tally`].

pub mod btree;
pub mod counters;
pub mod error;
pub mod node;
pub mod sketch;
pub mod tree;
pub mod trie;
pub mod word;

pub use btree::{btree_sort, btree_sort_counted, BTree};
pub use counters::{OpCounters, Tally};
pub use error::{Error, Result};
pub use node::{CompareTrace, FusionNode, NodeConfig, Probe, SketchNodeWord, DEFAULT_CAP};
pub use sketch::{find_multiplier, Multiplier, Sketch, SketchScheme, Strategy};
pub use tree::{fusion_sort, fusion_sort_counted, fusion_sort_signed, FusionTree, SortStats};
pub use trie::{CompressedTrie, KeySet, RelevantBitSet};
pub use word::{BitIndex, Width, Word};
