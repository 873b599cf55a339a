//! Compressed binary trie over a set of distinct words.
//!
//! Only branching nodes are kept: each internal node records the bit on
//! which its two subtrees differ, and single-child chains are contracted
//! away. This structure is the reference against which the packed,
//! constant-operation node rank is checked.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::word::{raw, BitIndex, Width};

/// Strictly increasing sequence of distinct keys of one width.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeySet {
    keys: Vec<u64>,
    width: Width,
}

impl KeySet {
    /// Sorts `keys`; rejects duplicates and values that do not fit `width`.
    pub fn new(mut keys: Vec<u64>, width: Width) -> Result<KeySet> {
        if let Some(&bad) = keys.iter().find(|&&k| !width.fits(k)) {
            return Err(Error::ValueOutOfRange {
                value: bad,
                width: width.bits(),
            });
        }
        keys.sort_unstable();
        if let Some(pair) = keys.windows(2).find(|p| p[0] == p[1]) {
            return Err(Error::DuplicateKey(pair[0]));
        }
        Ok(KeySet { keys, width })
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.keys
    }

    pub fn width(&self) -> Width {
        self.width
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.keys
    }
}

/// Bit positions at which a trie branches, most significant first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelevantBitSet(Vec<u32>);

impl RelevantBitSet {
    /// Builds the set from arbitrary bit indices, sorting and deduplicating.
    pub fn from_bits(mut bits: Vec<u32>) -> RelevantBitSet {
        bits.sort_unstable_by(|a, b| b.cmp(a));
        bits.dedup();
        RelevantBitSet(bits)
    }

    /// Branching bits of the compressed trie over sorted distinct `keys`.
    /// Adjacent keys split exactly at their most significant differing bit,
    /// so no trie has to be materialized.
    pub fn from_sorted_keys(keys: &[u64]) -> RelevantBitSet {
        RelevantBitSet::from_bits(keys.windows(2).map(|p| raw::delta(p[0], p[1])).collect())
    }

    pub fn bits(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Word with ones exactly at the relevant positions.
    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0, |m, &b| m | 1u64 << b)
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf(u64),
    Branch {
        bit: u32,
        children: [usize; 2],
        leaves: usize,
    },
}

#[derive(Clone, Debug)]
pub struct CompressedTrie {
    width: Width,
    nodes: Vec<Node>,
    root: Option<usize>,
}

impl CompressedTrie {
    pub fn empty(width: Width) -> CompressedTrie {
        CompressedTrie {
            width,
            nodes: Vec::new(),
            root: None,
        }
    }

    pub fn build(keys: &KeySet) -> CompressedTrie {
        let mut trie = CompressedTrie::empty(keys.width());
        if !keys.is_empty() {
            let root = trie.build_range(keys.as_slice());
            trie.root = Some(root);
        }
        trie
    }

    fn build_range(&mut self, keys: &[u64]) -> usize {
        if keys.len() == 1 {
            self.nodes.push(Node::Leaf(keys[0]));
            return self.nodes.len() - 1;
        }
        // The highest bit on which the range disagrees splits it into a
        // 0-prefix run and a 1-prefix run.
        let bit = raw::delta(keys[0], keys[keys.len() - 1]);
        let split = keys.partition_point(|&k| !raw::bit(k, bit));
        let left = self.build_range(&keys[..split]);
        let right = self.build_range(&keys[split..]);
        self.nodes.push(Node::Branch {
            bit,
            children: [left, right],
            leaves: keys.len(),
        });
        self.nodes.len() - 1
    }

    pub fn width(&self) -> Width {
        self.width
    }

    pub fn len(&self) -> usize {
        self.root.map_or(0, |r| self.leaves_under(r))
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    fn leaves_under(&self, node: usize) -> usize {
        match self.nodes[node] {
            Node::Leaf(_) => 1,
            Node::Branch { leaves, .. } => leaves,
        }
    }

    /// Inserts `x`; the only structural change is one new branch node on bit
    /// `delta(x, trs(x))`.
    pub fn insert(&mut self, x: u64) -> Result<()> {
        if !self.width.fits(x) {
            return Err(Error::ValueOutOfRange {
                value: x,
                width: self.width.bits(),
            });
        }
        let Some(root) = self.root else {
            self.nodes.push(Node::Leaf(x));
            self.root = Some(self.nodes.len() - 1);
            return Ok(());
        };
        let (found, _) = self.descend(root, x);
        if found == x {
            return Err(Error::DuplicateKey(x));
        }
        let bit = raw::delta(x, found);

        // Walk again until the first node whose subtree splits below `bit`;
        // the new branch goes directly above it.
        let mut parent: Option<(usize, usize)> = None;
        let mut cur = root;
        loop {
            match self.nodes[cur] {
                Node::Branch {
                    bit: b, children, ..
                } if b > bit => {
                    let side = raw::bit(x, b) as usize;
                    parent = Some((cur, side));
                    cur = children[side];
                }
                _ => break,
            }
        }
        self.nodes.push(Node::Leaf(x));
        let leaf = self.nodes.len() - 1;
        let children = if raw::bit(x, bit) { [cur, leaf] } else { [leaf, cur] };
        let leaves = self.leaves_under(cur) + 1;
        self.nodes.push(Node::Branch {
            bit,
            children,
            leaves,
        });
        let branch = self.nodes.len() - 1;
        match parent {
            None => self.root = Some(branch),
            Some((p, side)) => {
                if let Node::Branch { children, .. } = &mut self.nodes[p] {
                    children[side] = branch;
                }
            }
        }
        // Every ancestor gained one leaf.
        let mut cur = self.root.unwrap_or(branch);
        while cur != branch {
            if let Node::Branch {
                bit: b,
                children,
                leaves,
            } = &mut self.nodes[cur]
            {
                *leaves += 1;
                cur = children[raw::bit(x, *b) as usize];
            }
        }
        Ok(())
    }

    /// Leaf reached from `node` by following `x`'s bit at each branch, with
    /// its index among the leaves in order.
    fn descend(&self, node: usize, x: u64) -> (u64, usize) {
        let mut cur = node;
        let mut index = 0;
        loop {
            match self.nodes[cur] {
                Node::Leaf(key) => return (key, index),
                Node::Branch { bit, children, .. } => {
                    if raw::bit(x, bit) {
                        index += self.leaves_under(children[0]);
                        cur = children[1];
                    } else {
                        cur = children[0];
                    }
                }
            }
        }
    }

    /// The key found by descending with `x`'s bits at each branching node.
    /// It matches `x` on every branching bit of its path, but is not in
    /// general `x`'s predecessor or successor.
    pub fn trs(&self, x: u64) -> Result<u64> {
        self.trs_indexed(x).map(|(k, _)| k)
    }

    /// [`CompressedTrie::trs`] together with the key's position in sorted order.
    pub fn trs_indexed(&self, x: u64) -> Result<(u64, usize)> {
        let root = self.root.ok_or(Error::EmptyTrie)?;
        Ok(self.descend(root, x))
    }

    /// Number of keys `<= x`, by the two-search procedure: locate `trs(x)`,
    /// take the first bit `b'` where it differs from `x`, then search again
    /// with the bits below `b'` saturated toward the side `x` falls on.
    pub fn rank(&self, x: u64) -> usize {
        let Some(root) = self.root else {
            return 0;
        };
        let (found, index) = self.descend(root, x);
        if found == x {
            return index + 1;
        }
        let b = raw::delta(x, found);
        if raw::bit(x, b) {
            // Every key sharing x's prefix above b' has a 0 there; the
            // all-ones probe lands on the largest of them, x's predecessor.
            let (_, pred) = self.descend(root, raw::set_low_bits(x, b));
            pred + 1
        } else {
            let (_, succ) = self.descend(root, raw::clear_low_bits(x, b));
            succ
        }
    }

    pub fn relevant_bits(&self) -> RelevantBitSet {
        RelevantBitSet::from_bits(
            self.nodes_in_preorder()
                .into_iter()
                .filter_map(|n| match self.nodes[n] {
                    Node::Branch { bit, .. } => Some(bit),
                    Node::Leaf(_) => None,
                })
                .collect(),
        )
    }

    pub fn internal_count(&self) -> usize {
        self.nodes_in_preorder()
            .into_iter()
            .filter(|&n| matches!(self.nodes[n], Node::Branch { .. }))
            .count()
    }

    /// Keys in left-to-right leaf order.
    pub fn leaves(&self) -> Vec<u64> {
        self.nodes_in_preorder()
            .into_iter()
            .filter_map(|n| match self.nodes[n] {
                Node::Leaf(k) => Some(k),
                Node::Branch { .. } => None,
            })
            .collect()
    }

    /// Branching bits along the path taken by `x`, from the root down.
    pub fn path_bits(&self, x: u64) -> Vec<u32> {
        let mut bits = Vec::new();
        let mut cur = self.root;
        while let Some(n) = cur {
            match self.nodes[n] {
                Node::Leaf(_) => break,
                Node::Branch { bit, children, .. } => {
                    bits.push(bit);
                    cur = Some(children[raw::bit(x, bit) as usize]);
                }
            }
        }
        bits
    }

    fn nodes_in_preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack: Vec<usize> = self.root.into_iter().collect();
        while let Some(n) = stack.pop() {
            order.push(n);
            if let Node::Branch { children, .. } = self.nodes[n] {
                stack.push(children[1]);
                stack.push(children[0]);
            }
        }
        order
    }

    /// Graphviz rendering: nodes `n<preorder>`, branches labelled `b<i>`,
    /// leaves as zero-padded binary, edges labelled with the bit value.
    pub fn to_dot(&self) -> String {
        let order = self.nodes_in_preorder();
        let mut name = vec![0usize; self.nodes.len()];
        for (i, &n) in order.iter().enumerate() {
            name[n] = i;
        }
        let w = self.width.bits() as usize;
        let mut out = String::from("digraph trie {\n");
        for &n in &order {
            match self.nodes[n] {
                Node::Leaf(k) => {
                    let _ = writeln!(out, "  n{} [shape=box, label=\"{:0w$b}\"];", name[n], k, w = w);
                }
                Node::Branch { bit, children, .. } => {
                    let _ = writeln!(out, "  n{} [shape=circle, label=\"b{}\"];", name[n], bit);
                    for (side, child) in children.iter().enumerate() {
                        let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", name[n], name[*child], side);
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }

    /// Preorder serialization used for structural comparison.
    fn shape(&self) -> Vec<(bool, u64)> {
        self.nodes_in_preorder()
            .into_iter()
            .map(|n| match self.nodes[n] {
                Node::Leaf(k) => (true, k),
                Node::Branch { bit, .. } => (false, bit as u64),
            })
            .collect()
    }
}

impl PartialEq for CompressedTrie {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width && self.shape() == other.shape()
    }
}

impl Eq for CompressedTrie {}

/// Convenience wrapper returning the branching bits as [`BitIndex`] values.
pub fn relevant_bit_indices(trie: &CompressedTrie) -> Vec<BitIndex> {
    trie.relevant_bits().bits().iter().map(|&b| BitIndex(b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: u64 = 0b1101_1111;
    const B: u64 = 0b1110_0000;
    const C: u64 = 0b1110_0001;
    const D: u64 = 0b1111_1110;

    fn trie(keys: &[u64]) -> CompressedTrie {
        CompressedTrie::build(&KeySet::new(keys.to_vec(), Width::W8).unwrap())
    }

    fn scan_rank(keys: &[u64], x: u64) -> usize {
        keys.iter().filter(|&&k| k <= x).count()
    }

    #[test]
    fn two_keys_branch_on_bit_four() {
        let t = trie(&[0b1110_1001, 0b1111_1001]);
        assert_eq!(t.relevant_bits().bits(), &[4]);
        assert_eq!(t.internal_count(), 1);
    }

    #[test]
    fn four_key_example_branches() {
        let t = trie(&[A, B, C, D]);
        assert_eq!((A, B, C, D), (223, 224, 225, 254));
        assert_eq!(t.relevant_bits().bits(), &[5, 4, 0]);
        assert_eq!(t.leaves(), vec![A, B, C, D]);
        assert_eq!(t.trs(0b1110_0111), Ok(C));
        assert_eq!(t.path_bits(0b1110_0111), vec![5, 4, 0]);
        for k in [A, B, C, D] {
            assert_eq!(t.trs(k), Ok(k));
        }
    }

    #[test]
    fn singleton_and_empty() {
        let t = trie(&[42]);
        assert!(t.relevant_bits().is_empty());
        assert_eq!(t.trs(7), Ok(42));
        assert_eq!(t.rank(41), 0);
        assert_eq!(t.rank(42), 1);

        let e = CompressedTrie::empty(Width::W8);
        assert_eq!(e.trs(1), Err(Error::EmptyTrie));
        assert_eq!(e.rank(200), 0);

        let mut e = e;
        e.insert(9).unwrap();
        assert_eq!(e, trie(&[9]));
    }

    #[test]
    fn insert_adds_branch_on_bit_two() {
        let mut t = trie(&[A, B, C, D]);
        let x = 0b1110_0111;
        let before = t.trs(x).unwrap();
        assert_eq!(raw::delta(x, before), 2);
        t.insert(x).unwrap();
        assert_eq!(t.relevant_bits().bits(), &[5, 4, 2, 0]);
        assert_eq!(t.internal_count(), 4);
        assert_eq!(t.leaves(), vec![A, B, C, x, D]);
        // x hangs right of the b2 branch whose other side holds b and c
        assert_eq!(t.path_bits(x), vec![5, 4, 2]);
        assert_eq!(t.path_bits(C), vec![5, 4, 2, 0]);
        assert_eq!(t, trie(&[A, B, C, D, x]));
        assert_eq!(t.insert(x), Err(Error::DuplicateKey(x)));
    }

    #[test]
    fn rank_case_a_and_case_b() {
        let s = [223, 224, 225, 254];
        let t = trie(&s);
        // x[b'] = 1: predecessor found by the OR probe
        assert_eq!(t.rank(231), 3);
        assert_eq!(scan_rank(&s, 231), 3);

        let s = [0b1101_1111, 0b1110_0100, 0b1110_0101, 0b1111_1110];
        let t = trie(&s);
        let x = 0b1110_0001;
        let found = t.trs(x).unwrap();
        let b = raw::delta(x, found);
        assert!(!raw::bit(x, b));
        assert_eq!(raw::clear_low_bits(x, b), 0b1110_0000);
        assert_eq!(t.rank(x), 1);
        assert_eq!(scan_rank(&s, x), 1);
    }

    #[test]
    fn rank_is_exhaustively_correct_on_small_sets() {
        let pool = [0u64, 3, 17, 64, 65, 100, 127, 128, 200, 254, 255];
        for mask in 1u32..(1 << pool.len()) {
            let keys: Vec<u64> = (0..pool.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| pool[i])
                .collect();
            let t = trie(&keys);
            for x in 0..=255 {
                assert_eq!(t.rank(x), scan_rank(&keys, x), "keys {keys:?} x {x}");
            }
        }
    }

    #[test]
    fn dot_export_is_deterministic() {
        let dot = trie(&[A, B, C, D]).to_dot();
        assert!(dot.starts_with("digraph trie {\n"));
        assert!(dot.contains("n0 [shape=circle, label=\"b5\"];"));
        assert!(dot.contains("n0 -> n1 [label=\"0\"];"));
        assert!(dot.contains("n1 [shape=box, label=\"11011111\"];"));
        assert!(dot.contains("label=\"11111110\""));
        assert_eq!(dot, trie(&[D, C, B, A]).to_dot());
    }
}
