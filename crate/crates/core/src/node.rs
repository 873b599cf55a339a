//! A fusion node: a handful of sorted keys plus one packed word holding all
//! of their sketches, which lets a query's rank among the keys be computed
//! with a constant number of word operations.

use std::fmt::Write as _;

use crate::counters::Tally;
use crate::error::{Error, Result};
use crate::sketch::{SketchScheme, Strategy};
use crate::trie::{KeySet, RelevantBitSet};
use crate::word::{raw, Width};

/// Default node capacity for 64-bit packing: 7 blocks of at most 7 bits.
pub const DEFAULT_CAP: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeConfig {
    /// Maximum keys per node.
    pub cap: usize,
    pub strategy: Strategy,
    pub key_width: Width,
    /// Width of the word holding the packed sketches and the products that
    /// build them.
    pub pack_width: Width,
}

impl NodeConfig {
    /// Checks that `cap` exact sketch blocks (at most `cap` bits each) fit
    /// the packing word and that keys are no wider than it.
    pub fn new(key_width: Width, cap: usize, strategy: Strategy, pack_width: Width) -> Result<NodeConfig> {
        if cap == 0 {
            return Err(Error::InvalidConfig("node capacity must be at least 1".into()));
        }
        if cap * cap > pack_width.bits() as usize {
            return Err(Error::InvalidConfig(format!(
                "{cap} blocks of {cap} bits do not fit a {pack_width}-bit word"
            )));
        }
        if key_width > pack_width {
            return Err(Error::InvalidConfig(format!(
                "{key_width}-bit keys are wider than the {pack_width}-bit packing word"
            )));
        }
        Ok(NodeConfig {
            cap,
            strategy,
            key_width,
            pack_width,
        })
    }

    /// Largest capacity whose exact sketches fit a `pack_width` word.
    pub fn max_cap(pack_width: Width) -> usize {
        (pack_width.bits() as f64).sqrt() as usize
    }

    /// Default configuration for `key_width`-bit keys packed in a 64-bit
    /// word, with the capacity capped at [`DEFAULT_CAP`].
    pub fn for_width(key_width: Width, strategy: Strategy) -> NodeConfig {
        NodeConfig {
            cap: DEFAULT_CAP,
            strategy,
            key_width,
            pack_width: Width::W64,
        }
    }
}

impl Default for NodeConfig {
    fn default() -> Self {
        NodeConfig::for_width(Width::W64, Strategy::Multiplicative)
    }
}

/// `1 sk(s_1) 1 sk(s_2) ... 1 sk(s_t)`, with `s_1` in the most significant
/// block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SketchNodeWord {
    pub packed: u64,
    /// Separator bit plus payload.
    pub block_size: u32,
    pub blocks: u32,
}

impl SketchNodeWord {
    /// Payload of block `i`, counting from the most significant block.
    pub fn payload(&self, i: usize) -> u64 {
        let shift = (self.blocks - 1 - i as u32) * self.block_size;
        (self.packed >> shift) & raw::low_mask(self.block_size - 1) >> 1
    }

    pub fn separator(&self, i: usize) -> bool {
        let shift = (self.blocks - 1 - i as u32) * self.block_size;
        raw::bit(self.packed, shift + self.block_size - 1)
    }
}

/// Intermediate words of one parallel comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompareTrace {
    pub sketch: u64,
    pub query_word: u64,
    pub difference: u64,
    pub masked: u64,
    pub msb: Option<u32>,
    /// Number of keys whose sketch is below the query's.
    pub sketch_rank: usize,
}

/// Outcome of locating a query inside one node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Probe {
    /// The query is the key at this index.
    Found(usize),
    /// The query is absent; this many keys are smaller.
    Child(usize),
}

#[derive(Clone, Debug)]
pub struct FusionNode {
    keys: Vec<u64>,
    scheme: SketchScheme,
    word: SketchNodeWord,
    config: NodeConfig,
    unit: u64,
    leading: u64,
}

impl FusionNode {
    pub fn build(keys: &KeySet, config: NodeConfig) -> Result<FusionNode> {
        if keys.width() != config.key_width {
            return Err(Error::WidthMismatch(keys.width().bits(), config.key_width.bits()));
        }
        FusionNode::from_sorted(keys.as_slice().to_vec(), config)
    }

    /// Builds from keys already strictly increasing and within the key width.
    pub(crate) fn from_sorted(keys: Vec<u64>, config: NodeConfig) -> Result<FusionNode> {
        let t = keys.len();
        if t == 0 {
            return Err(Error::EmptyTrie);
        }
        if t > config.cap {
            return Err(Error::CapacityExceeded { cap: config.cap, len: t });
        }
        debug_assert!(keys.windows(2).all(|p| p[0] < p[1]));

        // Branching bits of the keys' compressed trie.
        let relevant = RelevantBitSet::from_sorted_keys(&keys);
        let max_padded = config.pack_width.bits() / t as u32 - 1;
        let scheme = SketchScheme::new(relevant, config.strategy, config.pack_width, max_padded);
        let block_size = scheme.payload_length() + 1;
        debug_assert!(block_size * t as u32 <= config.pack_width.bits());

        let separator = 1u64 << (block_size - 1);
        let packed = keys.iter().fold(0u64, |w, &k| {
            (w << block_size) | separator | scheme.sketch_bits(k, &mut ())
        });
        let blocks = t as u32;
        Ok(FusionNode {
            keys,
            scheme,
            word: SketchNodeWord {
                packed,
                block_size,
                blocks,
            },
            config,
            unit: raw::block_bases(block_size, blocks),
            leading: raw::block_leading_bits(block_size, blocks),
        })
    }

    pub fn keys(&self) -> &[u64] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn scheme(&self) -> &SketchScheme {
        &self.scheme
    }

    pub fn node_word(&self) -> SketchNodeWord {
        self.word
    }

    pub fn config(&self) -> NodeConfig {
        self.config
    }

    /// `0 sk(x)` repeated in every block, built with one multiplication.
    pub fn make_query_word(&self, x: u64) -> u64 {
        self.scheme.sketch_bits(x, &mut ()).wrapping_mul(self.unit)
    }

    /// Number of keys whose sketch is strictly below `sketch`.
    ///
    /// Each block of `w_node - w_x` keeps its leading 1 exactly when the key's
    /// sketch is at least `sketch`; separator bits absorb the borrows. The
    /// highest surviving leading bit marks the first such key.
    #[inline]
    fn count_below<T: Tally>(&self, sketch: u64, tally: &mut T) -> usize {
        // mul, sub, and, zero test, msb, div, sub
        tally.word_ops(7);
        let query = sketch.wrapping_mul(self.unit);
        let masked = self.word.packed.wrapping_sub(query) & self.leading;
        if masked == 0 {
            return self.keys.len();
        }
        self.keys.len() - 1 - (raw::msb(masked) / self.word.block_size) as usize
    }

    /// Number of keys whose sketch is at most `sketch`.
    #[inline]
    fn count_at_most<T: Tally>(&self, sketch: u64, tally: &mut T) -> usize {
        // An all-ones sketch carries into the separator position; each
        // block then subtracts to its own payload with a clear leading bit,
        // so every key counts.
        tally.word_ops(1);
        self.count_below(sketch + 1, tally)
    }

    /// All intermediate words of the parallel comparison for `x`.
    pub fn compare_trace(&self, x: u64) -> CompareTrace {
        let sketch = self.scheme.sketch_bits(x, &mut ());
        let query_word = sketch.wrapping_mul(self.unit);
        let difference = self.word.packed.wrapping_sub(query_word);
        let masked = difference & self.leading;
        let msb = (masked != 0).then(|| raw::msb(masked));
        CompareTrace {
            sketch,
            query_word,
            difference,
            masked,
            msb,
            sketch_rank: self.count_below(sketch, &mut ()),
        }
    }

    /// `|{i : sk(s_i) < sk(x)}|`.
    pub fn parallel_compare(&self, x: u64) -> usize {
        self.parallel_compare_counted(x, &mut ())
    }

    pub fn parallel_compare_counted<T: Tally>(&self, x: u64, tally: &mut T) -> usize {
        let sketch = self.scheme.sketch_bits(x, tally);
        self.count_below(sketch, tally)
    }

    /// A key sharing the longest possible prefix with `x`, found among the
    /// two sketch-order neighbours of `x`, with its index.
    #[inline]
    fn closest<T: Tally>(&self, x: u64, below: usize, tally: &mut T) -> (u64, usize) {
        // two xors and a compare
        tally.word_ops(3);
        let t = self.keys.len();
        if below == t {
            return (self.keys[t - 1], t - 1);
        }
        if below > 0 && x ^ self.keys[below - 1] < x ^ self.keys[below] {
            return (self.keys[below - 1], below - 1);
        }
        (self.keys[below], below)
    }

    /// The node key reached by `x`'s relevant bits: a key agreeing with `x`
    /// on every bit above `delta(x, key)` for the largest such agreement.
    pub fn node_trs(&self, x: u64) -> u64 {
        if self.keys.len() == 1 {
            return self.keys[0];
        }
        let below = self.parallel_compare(x);
        self.closest(x, below, &mut ()).0
    }

    /// Locates `x` among the node's keys with a fixed number of word
    /// operations per code path.
    pub fn probe<T: Tally>(&self, x: u64, tally: &mut T) -> Probe {
        if self.keys.len() == 1 {
            tally.key_compares(1);
            let k = self.keys[0];
            return match x.cmp(&k) {
                std::cmp::Ordering::Equal => Probe::Found(0),
                std::cmp::Ordering::Less => Probe::Child(0),
                std::cmp::Ordering::Greater => Probe::Child(1),
            };
        }
        let below = self.parallel_compare_counted(x, tally);
        let (found, index) = self.closest(x, below, tally);
        tally.word_ops(1);
        if found == x {
            return Probe::Found(index);
        }
        // xor, msb
        tally.word_ops(2);
        let b = raw::delta(x, found);
        // shr, and; then mask build and apply
        tally.word_ops(4);
        if raw::bit(x, b) {
            // Keys sharing x's prefix above b all have a 0 at b: saturating
            // the low bits reaches past the largest of them.
            let probe = raw::set_low_bits(x, b);
            let sketch = self.scheme.sketch_bits(probe, tally);
            Probe::Child(self.count_at_most(sketch, tally))
        } else {
            let probe = raw::clear_low_bits(x, b);
            let sketch = self.scheme.sketch_bits(probe, tally);
            Probe::Child(self.count_below(sketch, tally))
        }
    }

    /// `|{s in keys : s <= x}|`.
    pub fn node_rank(&self, x: u64) -> usize {
        self.node_rank_counted(x, &mut ())
    }

    pub fn node_rank_counted<T: Tally>(&self, x: u64, tally: &mut T) -> usize {
        match self.probe(x, tally) {
            Probe::Found(i) => i + 1,
            Probe::Child(i) => i,
        }
    }

    /// Index of the child subtree whose key range contains `x`.
    pub fn child_index(&self, x: u64) -> Result<usize> {
        match self.probe(x, &mut ()) {
            Probe::Found(_) => Err(Error::KeyPresent(x)),
            Probe::Child(i) => Ok(i),
        }
    }

    /// Rebuilds the node with `x` added.
    pub fn node_insert(&self, x: u64) -> Result<FusionNode> {
        if !self.config.key_width.fits(x) {
            return Err(Error::ValueOutOfRange {
                value: x,
                width: self.config.key_width.bits(),
            });
        }
        let pos = match self.keys.binary_search(&x) {
            Ok(_) => return Err(Error::DuplicateKey(x)),
            Err(pos) => pos,
        };
        if self.keys.len() >= self.config.cap {
            return Err(Error::NodeFull(self.keys.len()));
        }
        let mut keys = Vec::with_capacity(self.keys.len() + 1);
        keys.extend_from_slice(&self.keys[..pos]);
        keys.push(x);
        keys.extend_from_slice(&self.keys[pos..]);
        FusionNode::from_sorted(keys, self.config)
    }

    /// Text dump laid out like a hand-worked parallel comparison.
    pub fn debug_dump(&self) -> String {
        let kw = self.config.key_width.bits() as usize;
        let plen = self.scheme.payload_length() as usize;
        let mut out = String::new();
        let bits: Vec<String> = self.scheme.relevant_bits().bits().iter().map(|b| format!("b{b}")).collect();
        let _ = writeln!(out, "relevant bits: {}", if bits.is_empty() { "-".into() } else { bits.join(" ") });
        match self.scheme.multiplier() {
            Some(m) => {
                let _ = writeln!(
                    out,
                    "sketch: multiplicative (multiplier {:#x}, shift {}, padded length {})",
                    m.multiplier, m.shift, m.padded_length
                );
            }
            None if self.scheme.fell_back() => out.push_str("sketch: exact (multiplier search fell back)\n"),
            None => out.push_str("sketch: exact\n"),
        }
        for (i, &k) in self.keys.iter().enumerate() {
            let sk = self.word.payload(i);
            let _ = writeln!(
                out,
                "s{} = {:0kw$b} ({k})  sketch {}",
                i + 1,
                k,
                fmt_bits(sk, plen),
                kw = kw
            );
        }
        let _ = writeln!(out, "w_node = {} = {}", self.format_blocks(self.word.packed), self.word.packed);
        out
    }

    /// Node-word-shaped binary rendering, one space between separator and
    /// payload and between blocks.
    pub fn format_blocks(&self, word: u64) -> String {
        let r = self.word.block_size;
        (0..self.word.blocks)
            .rev()
            .map(|blk| {
                let block = (word >> (blk * r)) & raw::low_mask(r - 1);
                let sep = block >> (r - 1);
                let payload = fmt_bits(block & (raw::low_mask(r - 1) >> 1), (r - 1) as usize);
                if payload.is_empty() {
                    format!("{sep}")
                } else {
                    format!("{sep} {payload}")
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn fmt_bits(x: u64, len: usize) -> String {
    if len == 0 {
        String::new()
    } else {
        format!("{:0len$b}", x, len = len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counters::OpCounters;
    use crate::trie::CompressedTrie;
    use rand::{Rng, SeedableRng};

    const KEYS: [u64; 4] = [223, 224, 225, 254];

    fn exact16() -> NodeConfig {
        NodeConfig::new(Width::W8, 4, Strategy::Exact, Width::W16).unwrap()
    }

    fn node(keys: &[u64], config: NodeConfig) -> FusionNode {
        FusionNode::build(&KeySet::new(keys.to_vec(), config.key_width).unwrap(), config).unwrap()
    }

    #[test]
    fn worked_example_words() {
        let n = node(&KEYS, exact16());
        let w = n.node_word();
        assert_eq!((w.packed, w.block_size, w.blocks), (48350, 4, 4));
        assert_eq!(n.make_query_word(231), 21845);
        let trace = n.compare_trace(231);
        assert_eq!(trace.sketch, 0b101);
        assert_eq!(trace.difference, 26505);
        assert_eq!(trace.masked, 136);
        assert_eq!(trace.msb, Some(7));
        assert_eq!(trace.sketch_rank, 2);
        assert_eq!(n.node_trs(231), 225);
        assert_eq!(n.node_rank(231), 3);
        assert_eq!(n.format_blocks(w.packed), "1 011 1 100 1 101 1 110");
    }

    #[test]
    fn singleton_node() {
        let n = node(&[77], NodeConfig::for_width(Width::W8, Strategy::Multiplicative));
        let w = n.node_word();
        assert_eq!((w.packed, w.block_size), (1, 1));
        assert_eq!(n.node_rank(76), 0);
        assert_eq!(n.node_rank(77), 1);
        assert_eq!(n.node_rank(200), 1);
        assert_eq!(n.node_trs(3), 77);
        assert_eq!(n.child_index(77), Err(Error::KeyPresent(77)));
        assert_eq!(n.child_index(78), Ok(1));
    }

    #[test]
    fn query_word_examples() {
        let n = node(&KEYS, exact16());
        // sketch 000 for any x with zero relevant bits
        assert_eq!(n.make_query_word(0b1100_1110), 0);
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..200 {
            let x: u64 = rng.gen_range(0..256);
            let sk = n.scheme().sketch(x).bits;
            let looped = (0..4).fold(0u64, |w, _| (w << 4) | sk);
            assert_eq!(n.make_query_word(x), looped);
        }
    }

    #[test]
    fn extremes_and_child_index() {
        let n = node(&KEYS, exact16());
        assert_eq!(n.parallel_compare(0), 0);
        assert_eq!(n.child_index(0), Ok(0));
        assert_eq!(n.child_index(255), Ok(4));
        assert_eq!(n.child_index(224), Err(Error::KeyPresent(224)));
        for x in 226..254 {
            assert_eq!(n.child_index(x), Ok(3));
        }
        for k in KEYS {
            assert_eq!(n.node_trs(k), k);
        }
    }

    #[test]
    fn insert_gains_relevant_bit() {
        let n = node(&KEYS, NodeConfig::for_width(Width::W8, Strategy::Exact));
        let m = n.node_insert(0b1110_0111).unwrap();
        assert_eq!(m.scheme().relevant_bits().bits(), &[5, 4, 2, 0]);
        assert_eq!(m.keys(), &[223, 224, 225, 231, 254]);
        assert_eq!(n.node_insert(224).unwrap_err(), Error::DuplicateKey(224));

        let one = node(&[0b1010], NodeConfig::for_width(Width::W8, Strategy::Exact));
        let two = one.node_insert(0b1000).unwrap();
        assert_eq!(two.scheme().relevant_bits().bits(), &[1]);

        let full = node(&[1, 2, 3, 4], exact16());
        assert_eq!(full.node_insert(5).unwrap_err(), Error::NodeFull(4));
    }

    #[test]
    fn capacity_and_config_errors() {
        assert!(NodeConfig::new(Width::W64, 9, Strategy::Exact, Width::W64).is_err());
        assert!(NodeConfig::new(Width::W64, 0, Strategy::Exact, Width::W64).is_err());
        assert!(NodeConfig::new(Width::W32, 4, Strategy::Exact, Width::W16).is_err());
        assert_eq!(NodeConfig::max_cap(Width::W64), 8);
        assert_eq!(NodeConfig::max_cap(Width::W16), 4);
        let set = KeySet::new(vec![1, 2, 3, 4, 5], Width::W8).unwrap();
        assert_eq!(
            FusionNode::build(&set, exact16()).unwrap_err(),
            Error::CapacityExceeded { cap: 4, len: 5 }
        );
    }

    #[test]
    fn relevant_bits_match_trie() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..500 {
            let keys: Vec<u64> = (0..7).map(|_| rng.gen()).collect();
            let set = KeySet::new(keys, Width::W64).unwrap();
            let n = FusionNode::build(&set, NodeConfig::default()).unwrap();
            let trie = CompressedTrie::build(&set);
            assert_eq!(n.scheme().relevant_bits(), &trie.relevant_bits());
        }
    }

    #[test]
    fn payloads_follow_key_order_and_separators_hold() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for strategy in [Strategy::Exact, Strategy::Multiplicative] {
            for _ in 0..500 {
                let t = rng.gen_range(1..=7);
                let keys: Vec<u64> = (0..t).map(|_| rng.gen()).collect();
                let Ok(set) = KeySet::new(keys, Width::W64) else { continue };
                let n = FusionNode::build(&set, NodeConfig::for_width(Width::W64, strategy)).unwrap();
                let w = n.node_word();
                for i in 0..n.len() {
                    assert!(w.separator(i));
                    assert_eq!(w.payload(i), n.scheme().sketch(n.keys()[i]).bits);
                    if i > 0 {
                        assert!(w.payload(i - 1) < w.payload(i));
                    }
                }
            }
        }
    }

    #[test]
    fn op_count_is_fixed_per_path() {
        let n = node(&KEYS, NodeConfig::for_width(Width::W8, Strategy::Multiplicative));
        assert!(n.scheme().is_multiplicative());
        let mut equal = OpCounters::new();
        n.node_rank_counted(225, &mut equal);
        let mut case_a = OpCounters::new();
        n.node_rank_counted(231, &mut case_a);
        assert!(equal.word_ops < case_a.word_ops);
        assert!(case_a.word_ops <= 40);
        assert_eq!(case_a.key_compares, 0);
    }
}
