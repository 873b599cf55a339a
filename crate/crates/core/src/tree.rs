//! Fusion tree: fusion nodes arranged as a B-tree.
//!
//! Insertion splits full nodes on the way down, so a split never has to
//! propagate back up. Each split rebuilds the two halves and the parent from
//! scratch; nodes are never patched in place. Every internal node records
//! the number of keys below each child, which makes rank exact.

use crate::counters::{OpCounters, Tally};
use crate::error::{Error, Result};
use crate::node::{FusionNode, NodeConfig, Probe};
use crate::word::{Width, Word};

#[derive(Clone, Debug)]
struct TreeNode {
    node: FusionNode,
    /// Multiplicity of each key; 1 unless inserted through the counting path.
    counts: Vec<u32>,
    /// Empty for leaves.
    children: Vec<usize>,
    /// Distinct keys stored below each child.
    sizes: Vec<u64>,
}

impl TreeNode {
    fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    fn subtree_size(&self) -> u64 {
        self.node.len() as u64 + self.sizes.iter().sum::<u64>()
    }
}

/// Aggregate measurements of a sort.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SortStats {
    pub ops: OpCounters,
    pub height: usize,
    pub splits: u64,
}

#[derive(Clone, Debug)]
pub struct FusionTree {
    config: NodeConfig,
    nodes: Vec<TreeNode>,
    root: Option<usize>,
    len: u64,
    height: usize,
    splits: u64,
    path: Vec<(usize, usize)>,
}

impl FusionTree {
    pub fn new(config: NodeConfig) -> FusionTree {
        FusionTree {
            config,
            nodes: Vec::new(),
            root: None,
            len: 0,
            height: 0,
            splits: 0,
            path: Vec::new(),
        }
    }

    pub fn with_width(width: Width) -> FusionTree {
        FusionTree::new(NodeConfig::for_width(width, crate::sketch::Strategy::Multiplicative))
    }

    pub fn config(&self) -> NodeConfig {
        self.config
    }

    /// Number of distinct keys.
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Levels from root to leaves; 0 when empty.
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn splits(&self) -> u64 {
        self.splits
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn check_width(&self, x: u64) -> Result<()> {
        if self.config.key_width.fits(x) {
            Ok(())
        } else {
            Err(Error::ValueOutOfRange {
                value: x,
                width: self.config.key_width.bits(),
            })
        }
    }

    pub fn insert(&mut self, x: u64) -> Result<()> {
        self.insert_with(x, &mut ())
    }

    /// Inserts a distinct key, reporting descent work to `tally`.
    pub fn insert_with<T: Tally>(&mut self, x: u64, tally: &mut T) -> Result<()> {
        self.check_width(x)?;
        if self.search(x) {
            return Err(Error::DuplicateKey(x));
        }
        self.insert_or_count(x, tally).map(|_| ())
    }

    /// Inserts `x`, or bumps its multiplicity if present. Returns whether the
    /// key was new.
    pub fn insert_or_count<T: Tally>(&mut self, x: u64, tally: &mut T) -> Result<bool> {
        self.check_width(x)?;
        let Some(mut cur) = self.root else {
            let node = FusionNode::from_sorted(vec![x], self.config)?;
            self.nodes.push(TreeNode {
                node,
                counts: vec![1],
                children: Vec::new(),
                sizes: Vec::new(),
            });
            self.root = Some(self.nodes.len() - 1);
            self.len = 1;
            self.height = 1;
            return Ok(true);
        };
        if self.nodes[cur].node.len() == self.config.cap {
            cur = self.split_root(cur)?;
        }
        self.path.clear();
        loop {
            match self.nodes[cur].node.probe(x, tally) {
                Probe::Found(i) => {
                    self.nodes[cur].counts[i] += 1;
                    return Ok(false);
                }
                Probe::Child(i) if self.nodes[cur].is_leaf() => {
                    let tn = &mut self.nodes[cur];
                    tn.node = tn.node.node_insert(x)?;
                    tn.counts.insert(i, 1);
                    break;
                }
                Probe::Child(mut i) => {
                    let child = self.nodes[cur].children[i];
                    if self.nodes[child].node.len() == self.config.cap {
                        let median = self.split_child(cur, i)?;
                        if x == median {
                            self.nodes[cur].counts[i] += 1;
                            return Ok(false);
                        }
                        if x > median {
                            i += 1;
                        }
                    }
                    self.path.push((cur, i));
                    cur = self.nodes[cur].children[i];
                }
            }
        }
        for &(n, i) in &self.path {
            self.nodes[n].sizes[i] += 1;
        }
        self.len += 1;
        Ok(true)
    }

    fn split_root(&mut self, root: usize) -> Result<usize> {
        let size = self.nodes[root].subtree_size();
        let placeholder = FusionNode::from_sorted(vec![0], self.config)?;
        self.nodes.push(TreeNode {
            node: placeholder,
            counts: Vec::new(),
            children: vec![root],
            sizes: vec![size],
        });
        let new_root = self.nodes.len() - 1;
        self.root = Some(new_root);
        self.height += 1;
        // The placeholder key is replaced by the promoted median.
        self.split_child_into(new_root, 0, true)?;
        Ok(new_root)
    }

    /// Splits the full child `i` of `parent` around its median, which moves
    /// up into `parent`. Returns the median.
    fn split_child(&mut self, parent: usize, i: usize) -> Result<u64> {
        self.split_child_into(parent, i, false)
    }

    fn split_child_into(&mut self, parent: usize, i: usize, fresh_root: bool) -> Result<u64> {
        self.splits += 1;
        let child = self.nodes[parent].children[i];
        let full = &self.nodes[child];
        let keys = full.node.keys();
        let m = keys.len() / 2;
        let median = keys[m];
        let median_count = full.counts[m];
        let left_keys = keys[..m].to_vec();
        let right_keys = keys[m + 1..].to_vec();
        let right_counts = full.counts[m + 1..].to_vec();
        let (right_children, right_sizes) = if full.is_leaf() {
            (Vec::new(), Vec::new())
        } else {
            (full.children[m + 1..].to_vec(), full.sizes[m + 1..].to_vec())
        };

        let right = TreeNode {
            node: FusionNode::from_sorted(right_keys, self.config)?,
            counts: right_counts,
            children: right_children,
            sizes: right_sizes,
        };
        let right_size = right.subtree_size();
        self.nodes.push(right);
        let right_idx = self.nodes.len() - 1;

        let left = &mut self.nodes[child];
        left.counts.truncate(m);
        if !left.is_leaf() {
            left.children.truncate(m + 1);
            left.sizes.truncate(m + 1);
        }
        left.node = FusionNode::from_sorted(left_keys, self.config)?;
        let left_size = left.subtree_size();

        let p = &mut self.nodes[parent];
        let mut pkeys = if fresh_root { Vec::new() } else { p.node.keys().to_vec() };
        pkeys.insert(i, median);
        if fresh_root {
            p.counts = vec![median_count];
        } else {
            p.counts.insert(i, median_count);
        }
        p.children.insert(i + 1, right_idx);
        p.sizes[i] = left_size;
        p.sizes.insert(i + 1, right_size);
        p.node = FusionNode::from_sorted(pkeys, self.config)?;
        Ok(median)
    }

    pub fn search(&self, x: u64) -> bool {
        self.search_with(x, &mut ())
    }

    /// Membership test; each visited node costs a fixed number of word ops.
    pub fn search_with<T: Tally>(&self, x: u64, tally: &mut T) -> bool {
        let mut cur = self.root;
        while let Some(n) = cur {
            let tn = &self.nodes[n];
            match tn.node.probe(x, tally) {
                Probe::Found(_) => return true,
                Probe::Child(i) => cur = tn.children.get(i).copied(),
            }
        }
        false
    }

    /// Number of distinct keys `<= x`.
    pub fn rank(&self, x: u64) -> u64 {
        let mut rank = 0;
        let mut cur = self.root;
        while let Some(n) = cur {
            let tn = &self.nodes[n];
            match tn.node.probe(x, &mut ()) {
                Probe::Found(i) => {
                    let below: u64 = tn.sizes.iter().take(i + 1).sum();
                    return rank + below + i as u64 + 1;
                }
                Probe::Child(i) => {
                    rank += tn.sizes.iter().take(i).sum::<u64>() + i as u64;
                    cur = tn.children.get(i).copied();
                }
            }
        }
        rank
    }

    /// Largest key `<= x`.
    pub fn predecessor(&self, x: u64) -> Option<u64> {
        let mut best = None;
        let mut cur = self.root;
        while let Some(n) = cur {
            let tn = &self.nodes[n];
            match tn.node.probe(x, &mut ()) {
                Probe::Found(_) => return Some(x),
                Probe::Child(i) => {
                    if i > 0 {
                        best = Some(tn.node.keys()[i - 1]);
                    }
                    cur = tn.children.get(i).copied();
                }
            }
        }
        best
    }

    /// Smallest key `>= x`.
    pub fn successor(&self, x: u64) -> Option<u64> {
        let mut best = None;
        let mut cur = self.root;
        while let Some(n) = cur {
            let tn = &self.nodes[n];
            match tn.node.probe(x, &mut ()) {
                Probe::Found(_) => return Some(x),
                Probe::Child(i) => {
                    if i < tn.node.len() {
                        best = Some(tn.node.keys()[i]);
                    }
                    cur = tn.children.get(i).copied();
                }
            }
        }
        best
    }

    /// Distinct keys in increasing order.
    pub fn in_order(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.len as usize);
        self.walk(|k, _| out.push(k));
        out
    }

    /// Keys in increasing order, each repeated by its multiplicity.
    pub fn in_order_with_counts(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.len as usize);
        self.walk(|k, c| out.extend(std::iter::repeat_n(k, c as usize)));
        out
    }

    fn walk(&self, mut visit: impl FnMut(u64, u32)) {
        let Some(root) = self.root else { return };
        // (node, next slot to emit)
        let mut stack = vec![(root, 0usize)];
        while let Some((n, slot)) = stack.pop() {
            let tn = &self.nodes[n];
            if tn.is_leaf() {
                for (&k, &c) in tn.node.keys().iter().zip(&tn.counts) {
                    visit(k, c);
                }
                continue;
            }
            if slot > 0 {
                visit(tn.node.keys()[slot - 1], tn.counts[slot - 1]);
            }
            if slot + 1 < tn.children.len() {
                stack.push((n, slot + 1));
            }
            stack.push((tn.children[slot], 0));
        }
    }

    /// Keys of every node grouped by depth, left to right.
    pub fn levels(&self) -> Vec<Vec<Vec<u64>>> {
        let mut levels = Vec::new();
        let mut frontier: Vec<usize> = self.root.into_iter().collect();
        while !frontier.is_empty() {
            levels.push(frontier.iter().map(|&n| self.nodes[n].node.keys().to_vec()).collect());
            frontier = frontier.iter().flat_map(|&n| self.nodes[n].children.iter().copied()).collect();
        }
        levels
    }

    /// Depth of every leaf.
    pub fn leaf_depths(&self) -> Vec<usize> {
        let mut depths = Vec::new();
        let mut stack: Vec<(usize, usize)> = self.root.map(|r| (r, 1)).into_iter().collect();
        while let Some((n, d)) = stack.pop() {
            let tn = &self.nodes[n];
            if tn.is_leaf() {
                depths.push(d);
            }
            stack.extend(tn.children.iter().map(|&c| (c, d + 1)));
        }
        depths
    }

    /// Recomputes every child size and checks the ordering invariant.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let Some(root) = self.root else {
            return if self.len == 0 { Ok(()) } else { Err("empty tree with nonzero length".into()) };
        };
        let min_fill = self.config.cap.div_ceil(2).saturating_sub(1).max(1);
        let total = self.check_subtree(root, None, None, min_fill, true)?;
        if total != self.len {
            return Err(format!("length {} but {} keys stored", self.len, total));
        }
        let depths = self.leaf_depths();
        if depths.iter().any(|&d| d != self.height) {
            return Err(format!("leaf depths {depths:?} differ from height {}", self.height));
        }
        Ok(())
    }

    fn check_subtree(
        &self,
        n: usize,
        lo: Option<u64>,
        hi: Option<u64>,
        min_fill: usize,
        is_root: bool,
    ) -> std::result::Result<u64, String> {
        let tn = &self.nodes[n];
        let keys = tn.node.keys();
        if keys.is_empty() || keys.len() > self.config.cap {
            return Err(format!("node {n} holds {} keys", keys.len()));
        }
        if !is_root && keys.len() < min_fill {
            return Err(format!("node {n} underfull with {} keys", keys.len()));
        }
        if lo.is_some_and(|l| keys[0] <= l) || hi.is_some_and(|h| keys[keys.len() - 1] >= h) {
            return Err(format!("node {n} keys {keys:?} escape ({lo:?}, {hi:?})"));
        }
        if tn.counts.len() != keys.len() {
            return Err(format!("node {n} count vector out of step"));
        }
        if tn.is_leaf() {
            return Ok(keys.len() as u64);
        }
        if tn.children.len() != keys.len() + 1 || tn.sizes.len() != tn.children.len() {
            return Err(format!("node {n} has {} children for {} keys", tn.children.len(), keys.len()));
        }
        let mut total = keys.len() as u64;
        for (i, &c) in tn.children.iter().enumerate() {
            let clo = if i == 0 { lo } else { Some(keys[i - 1]) };
            let chi = if i == keys.len() { hi } else { Some(keys[i]) };
            let size = self.check_subtree(c, clo, chi, min_fill, false)?;
            if size != tn.sizes[i] {
                return Err(format!("node {n} child {i} recorded size {} actual {size}", tn.sizes[i]));
            }
            total += size;
        }
        Ok(total)
    }
}

/// Nondecreasing permutation of `input`, built by inserting every distinct
/// key into a fusion tree with multiplicities and reading it back in order.
pub fn fusion_sort(input: &[u64], config: NodeConfig) -> Result<Vec<u64>> {
    fusion_sort_counted(input, config).map(|(out, _)| out)
}

/// [`fusion_sort`] together with descent word-op counts, final height and
/// split count.
pub fn fusion_sort_counted(input: &[u64], config: NodeConfig) -> Result<(Vec<u64>, SortStats)> {
    let mut tree = FusionTree::new(config);
    let mut ops = OpCounters::new();
    for &x in input {
        tree.insert_or_count(x, &mut ops)?;
    }
    let stats = SortStats {
        ops,
        height: tree.height(),
        splits: tree.splits(),
    };
    Ok((tree.in_order_with_counts(), stats))
}

/// Sorts signed `width`-bit integers through the order-preserving unsigned
/// mapping.
pub fn fusion_sort_signed(input: &[i64], config: NodeConfig) -> Result<Vec<i64>> {
    let width = config.key_width;
    let mapped = input
        .iter()
        .map(|&v| Word::from_signed(v, width).map(Word::value))
        .collect::<Result<Vec<u64>>>()?;
    let sorted = fusion_sort(&mapped, config)?;
    Ok(sorted
        .into_iter()
        .map(|u| Word::wrapping(u, width).to_signed())
        .collect())
}
