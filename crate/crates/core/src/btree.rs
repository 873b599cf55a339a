//! Plain B-tree with sequential in-node search, used as the comparison
//! baseline. Splitting follows the same top-down median rule as
//! [`crate::tree::FusionTree`], so both produce the same node layout for the
//! same insertion order.

use crate::counters::{OpCounters, Tally};
use crate::error::{Error, Result};
use crate::tree::SortStats;

#[derive(Clone, Debug, Default)]
struct BNode {
    keys: Vec<u64>,
    counts: Vec<u32>,
    children: Vec<usize>,
}

impl BNode {
    fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Sequential scan: `Ok(i)` if `keys[i] == x`, else `Err(child)`.
    fn scan<T: Tally>(&self, x: u64, tally: &mut T) -> std::result::Result<usize, usize> {
        for (i, &k) in self.keys.iter().enumerate() {
            tally.key_compares(1);
            if x <= k {
                return if x == k { Ok(i) } else { Err(i) };
            }
        }
        Err(self.keys.len())
    }
}

#[derive(Clone, Debug)]
pub struct BTree {
    cap: usize,
    nodes: Vec<BNode>,
    root: Option<usize>,
    len: u64,
    height: usize,
    splits: u64,
}

impl BTree {
    /// B-tree whose nodes hold at most `cap` keys (`cap + 1` children).
    pub fn new(cap: usize) -> Result<BTree> {
        if cap < 2 {
            return Err(Error::InvalidConfig(format!("B-tree capacity {cap} is below 2")));
        }
        Ok(BTree {
            cap,
            nodes: Vec::new(),
            root: None,
            len: 0,
            height: 0,
            splits: 0,
        })
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn splits(&self) -> u64 {
        self.splits
    }

    pub fn bt_insert(&mut self, x: u64) -> Result<()> {
        if self.bt_search(x) {
            return Err(Error::DuplicateKey(x));
        }
        self.insert_or_count(x, &mut ());
        Ok(())
    }

    /// Inserts `x` or bumps its multiplicity. Returns whether it was new.
    pub fn insert_or_count<T: Tally>(&mut self, x: u64, tally: &mut T) -> bool {
        let Some(mut cur) = self.root else {
            self.nodes.push(BNode {
                keys: vec![x],
                counts: vec![1],
                children: Vec::new(),
            });
            self.root = Some(self.nodes.len() - 1);
            self.len = 1;
            self.height = 1;
            return true;
        };
        if self.nodes[cur].keys.len() == self.cap {
            self.nodes.push(BNode {
                keys: Vec::new(),
                counts: Vec::new(),
                children: vec![cur],
            });
            cur = self.nodes.len() - 1;
            self.root = Some(cur);
            self.height += 1;
            self.split_child(cur, 0);
        }
        loop {
            match self.nodes[cur].scan(x, tally) {
                Ok(i) => {
                    self.nodes[cur].counts[i] += 1;
                    return false;
                }
                Err(i) if self.nodes[cur].is_leaf() => {
                    let n = &mut self.nodes[cur];
                    n.keys.insert(i, x);
                    n.counts.insert(i, 1);
                    self.len += 1;
                    return true;
                }
                Err(mut i) => {
                    let child = self.nodes[cur].children[i];
                    if self.nodes[child].keys.len() == self.cap {
                        let median = self.split_child(cur, i);
                        tally.key_compares(1);
                        if x == median {
                            self.nodes[cur].counts[i] += 1;
                            return false;
                        }
                        if x > median {
                            i += 1;
                        }
                    }
                    cur = self.nodes[cur].children[i];
                }
            }
        }
    }

    /// Moves the median of full child `i` into `parent`, splitting the rest
    /// into two nodes.
    fn split_child(&mut self, parent: usize, i: usize) -> u64 {
        self.splits += 1;
        let child = self.nodes[parent].children[i];
        let full = &mut self.nodes[child];
        let m = full.keys.len() / 2;
        let right = BNode {
            keys: full.keys.split_off(m + 1),
            counts: full.counts.split_off(m + 1),
            children: if full.is_leaf() { Vec::new() } else { full.children.split_off(m + 1) },
        };
        let median = full.keys.pop().expect("full node has a median");
        let median_count = full.counts.pop().expect("full node has a median count");
        self.nodes.push(right);
        let right_idx = self.nodes.len() - 1;
        let p = &mut self.nodes[parent];
        p.keys.insert(i, median);
        p.counts.insert(i, median_count);
        p.children.insert(i + 1, right_idx);
        median
    }

    pub fn bt_search(&self, x: u64) -> bool {
        self.bt_search_with(x, &mut ())
    }

    pub fn bt_search_with<T: Tally>(&self, x: u64, tally: &mut T) -> bool {
        let mut cur = self.root;
        while let Some(n) = cur {
            let node = &self.nodes[n];
            match node.scan(x, tally) {
                Ok(_) => return true,
                Err(i) => cur = node.children.get(i).copied(),
            }
        }
        false
    }

    pub fn bt_in_order(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.len as usize);
        self.walk(&mut |k, _| out.push(k));
        out
    }

    pub fn in_order_with_counts(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.len as usize);
        self.walk(&mut |k, c| out.extend(std::iter::repeat_n(k, c as usize)));
        out
    }

    fn walk(&self, visit: &mut impl FnMut(u64, u32)) {
        if let Some(root) = self.root {
            self.walk_from(root, visit);
        }
    }

    fn walk_from(&self, n: usize, visit: &mut impl FnMut(u64, u32)) {
        let node = &self.nodes[n];
        for i in 0..node.keys.len() {
            if let Some(&c) = node.children.get(i) {
                self.walk_from(c, visit);
            }
            visit(node.keys[i], node.counts[i]);
        }
        if let Some(&c) = node.children.get(node.keys.len()) {
            self.walk_from(c, visit);
        }
    }

    /// Keys of every node grouped by depth, left to right.
    pub fn levels(&self) -> Vec<Vec<Vec<u64>>> {
        let mut levels = Vec::new();
        let mut frontier: Vec<usize> = self.root.into_iter().collect();
        while !frontier.is_empty() {
            levels.push(frontier.iter().map(|&n| self.nodes[n].keys.clone()).collect());
            frontier = frontier.iter().flat_map(|&n| self.nodes[n].children.iter().copied()).collect();
        }
        levels
    }

    /// Checks ordering, fill and equal leaf depth.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let Some(root) = self.root else { return Ok(()) };
        let min_fill = self.cap.div_ceil(2).saturating_sub(1).max(1);
        let mut leaf_depth = None;
        let count = self.check_from(root, None, None, 1, min_fill, &mut leaf_depth)?;
        if count != self.len {
            return Err(format!("length {} but {count} keys stored", self.len));
        }
        if leaf_depth != Some(self.height) {
            return Err(format!("leaf depth {leaf_depth:?} but height {}", self.height));
        }
        Ok(())
    }

    fn check_from(
        &self,
        n: usize,
        lo: Option<u64>,
        hi: Option<u64>,
        depth: usize,
        min_fill: usize,
        leaf_depth: &mut Option<usize>,
    ) -> std::result::Result<u64, String> {
        let node = &self.nodes[n];
        let k = &node.keys;
        if k.is_empty() || k.len() > self.cap || (depth > 1 && k.len() < min_fill) {
            return Err(format!("node {n} holds {} keys", k.len()));
        }
        if k.windows(2).any(|p| p[0] >= p[1])
            || lo.is_some_and(|l| k[0] <= l)
            || hi.is_some_and(|h| k[k.len() - 1] >= h)
        {
            return Err(format!("node {n} out of order: {k:?}"));
        }
        if node.is_leaf() {
            if leaf_depth.get_or_insert(depth) != &depth {
                return Err(format!("leaf {n} at depth {depth}"));
            }
            return Ok(k.len() as u64);
        }
        if node.children.len() != k.len() + 1 {
            return Err(format!("node {n} has {} children", node.children.len()));
        }
        let mut total = k.len() as u64;
        for (i, &c) in node.children.iter().enumerate() {
            let clo = if i == 0 { lo } else { Some(k[i - 1]) };
            let chi = k.get(i).copied().or(hi);
            total += self.check_from(c, clo, chi, depth + 1, min_fill, leaf_depth)?;
        }
        Ok(total)
    }
}

/// Insert-all then in-order traversal, restoring duplicates.
pub fn btree_sort(input: &[u64], cap: usize) -> Result<Vec<u64>> {
    btree_sort_counted(input, cap).map(|(v, _)| v)
}

pub fn btree_sort_counted(input: &[u64], cap: usize) -> Result<(Vec<u64>, SortStats)> {
    let mut tree = BTree::new(cap)?;
    let mut ops = OpCounters::new();
    for &x in input {
        tree.insert_or_count(x, &mut ops);
    }
    let stats = SortStats {
        ops,
        height: tree.height(),
        splits: tree.splits(),
    };
    Ok((tree.in_order_with_counts(), stats))
}
