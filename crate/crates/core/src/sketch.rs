//! Order-preserving sketches: a key reduced to its relevant bits.
//!
//! Two realizations share one contract. The exact sketch gathers the bits
//! one at a time. The multiplicative sketch masks the relevant bits, moves
//! them with a single multiplication to increasing target positions, and
//! masks the targets out. Zero gaps may remain between targets, which keeps
//! comparisons intact.

use crate::counters::Tally;
use crate::error::{Error, Result};
use crate::trie::{CompressedTrie, RelevantBitSet};
use crate::word::Width;

/// Largest relevant-bit count whose multiplier is verified exhaustively.
const EXHAUSTIVE_CHECK_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Exact,
    /// Multiplicative, falling back to exact when no multiplier fits.
    Multiplicative,
}

/// Packed relevant bits of one key, low-aligned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Sketch {
    pub bits: u64,
    pub length: u32,
}

/// Parameters of a multiplicative sketch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Multiplier {
    pub multiplier: u64,
    /// Ones at the positions the relevant bits land on after multiplying.
    pub target_mask: u64,
    /// Lowest target position.
    pub shift: u32,
    /// Span from lowest to highest target, inclusive.
    pub padded_length: u32,
}

impl Multiplier {
    #[inline]
    fn apply(&self, masked: u64) -> u64 {
        (masked.wrapping_mul(self.multiplier) & self.target_mask) >> self.shift
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchScheme {
    relevant: RelevantBitSet,
    mask: u64,
    multiplier: Option<Multiplier>,
    fell_back: bool,
}

impl SketchScheme {
    pub fn exact(relevant: RelevantBitSet) -> SketchScheme {
        let mask = relevant.mask();
        SketchScheme {
            relevant,
            mask,
            multiplier: None,
            fell_back: false,
        }
    }

    /// Scheme over `relevant` for products computed in a `width`-bit word.
    /// With [`Strategy::Multiplicative`] the scheme uses a multiplier whose
    /// padded length is at most `max_padded`, or falls back to exact and
    /// records the fallback.
    pub fn new(relevant: RelevantBitSet, strategy: Strategy, width: Width, max_padded: u32) -> SketchScheme {
        let mut scheme = SketchScheme::exact(relevant);
        if strategy == Strategy::Multiplicative && !scheme.relevant.is_empty() {
            match find_multiplier_within(&scheme.relevant, width, max_padded) {
                Ok(m) => scheme.multiplier = Some(m),
                Err(_) => scheme.fell_back = true,
            }
        }
        scheme
    }

    /// Scheme for the key set stored in `trie`, with the default padded
    /// length bound of `r'^2`.
    pub fn from_trie(trie: &CompressedTrie, strategy: Strategy) -> Result<SketchScheme> {
        if trie.is_empty() {
            return Err(Error::EmptyTrie);
        }
        let relevant = trie.relevant_bits();
        let r = relevant.len() as u32;
        Ok(SketchScheme::new(relevant, strategy, Width::W64, r * r))
    }

    pub fn relevant_bits(&self) -> &RelevantBitSet {
        &self.relevant
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn multiplier(&self) -> Option<&Multiplier> {
        self.multiplier.as_ref()
    }

    pub fn is_multiplicative(&self) -> bool {
        self.multiplier.is_some()
    }

    /// True when a multiplicative scheme was requested but none was found.
    pub fn fell_back(&self) -> bool {
        self.fell_back
    }

    /// Bits per sketch under the active strategy.
    pub fn payload_length(&self) -> u32 {
        match &self.multiplier {
            Some(m) => m.padded_length,
            None => self.relevant.len() as u32,
        }
    }

    pub fn sketch_exact(&self, x: u64) -> Sketch {
        Sketch {
            bits: self.exact_bits(x, &mut ()),
            length: self.relevant.len() as u32,
        }
    }

    pub fn sketch_approx(&self, x: u64) -> Result<Sketch> {
        let m = self.multiplier.as_ref().ok_or(Error::SchemeNotMultiplicative)?;
        Ok(Sketch {
            bits: m.apply(x & self.mask),
            length: m.padded_length,
        })
    }

    /// Sketch under the active strategy.
    pub fn sketch(&self, x: u64) -> Sketch {
        Sketch {
            bits: self.sketch_bits(x, &mut ()),
            length: self.payload_length(),
        }
    }

    #[inline]
    pub(crate) fn sketch_bits<T: Tally>(&self, x: u64, tally: &mut T) -> u64 {
        match &self.multiplier {
            Some(m) => {
                // and, mul, and, shr
                tally.word_ops(4);
                m.apply(x & self.mask)
            }
            None => self.exact_bits(x, tally),
        }
    }

    fn exact_bits<T: Tally>(&self, x: u64, tally: &mut T) -> u64 {
        let bits = self.relevant.bits();
        // shr, and, shl, or per bit
        tally.word_ops(4 * bits.len() as u64);
        bits.iter().fold(0, |s, &b| s << 1 | (x >> b) & 1)
    }
}

/// Multiplier for `relevant` with the padded length bounded by `r'^2`.
pub fn find_multiplier(relevant: &RelevantBitSet, width: Width) -> Result<Multiplier> {
    let r = relevant.len() as u32;
    find_multiplier_within(relevant, width, r * r)
}

/// Greedy search for a multiplier moving the relevant bits of a `width`-bit
/// word to strictly decreasing target positions (in relevant-bit order)
/// whose span is at most `max_padded`.
///
/// The multiplier is a sum of powers `2^m`. Every product bit `i + m` that
/// stays inside the word must be distinct, so the product is a plain OR of
/// shifted copies and never carries. Bits are placed from the most
/// significant down, each at the highest free target below the previous
/// one, reusing an existing shift when possible. The top bit's shift is
/// varied and the most compact outcome kept.
pub fn find_multiplier_within(relevant: &RelevantBitSet, width: Width, max_padded: u32) -> Result<Multiplier> {
    let bits = relevant.bits();
    let fail = || Error::NoValidMultiplier(bits.to_vec());
    if bits.is_empty() || bits[0] >= width.bits() {
        return Err(fail());
    }
    let r = bits.len() as u32;
    let word_mask = width.mask();
    let mask = relevant.mask();

    let mut best: Option<Multiplier> = None;
    for top_shift in 0..width.bits() - bits[0] {
        let Some(found) = place_greedily(bits, mask, word_mask, top_shift) else {
            continue;
        };
        if best.is_none_or(|b| found.padded_length < b.padded_length) {
            best = Some(found);
            if found.padded_length == r {
                break;
            }
        }
    }
    let best = best.filter(|m| m.padded_length <= max_padded).ok_or_else(fail)?;
    if bits.len() <= EXHAUSTIVE_CHECK_LIMIT && !verify_order(bits, mask, &best) {
        return Err(fail());
    }
    Ok(best)
}

fn place_greedily(bits: &[u32], mask: u64, word_mask: u64, top_shift: u32) -> Option<Multiplier> {
    let mut multiplier = 1u64 << top_shift;
    let mut occupied = (mask << top_shift) & word_mask;
    let mut target = bits[0] + top_shift;
    let mut target_mask = 1u64 << target;
    for &bit in &bits[1..] {
        let placed = (bit..target).rev().find_map(|t| {
            let shift = t - bit;
            if multiplier >> shift & 1 == 1 {
                return Some((t, 0));
            }
            let images = (mask << shift) & word_mask;
            (images & occupied == 0).then_some((t, shift + 1))
        });
        let (t, new_shift) = placed?;
        if new_shift > 0 {
            let shift = new_shift - 1;
            multiplier |= 1u64 << shift;
            occupied |= (mask << shift) & word_mask;
        }
        target = t;
        target_mask |= 1u64 << t;
    }
    let top = bits[0] + top_shift;
    Some(Multiplier {
        multiplier,
        target_mask,
        shift: target,
        padded_length: top - target + 1,
    })
}

/// Checks that every assignment of the relevant bits maps to a sketch that
/// is strictly increasing in the assignment's value.
fn verify_order(bits: &[u32], mask: u64, m: &Multiplier) -> bool {
    let r = bits.len();
    let mut prev: Option<u64> = None;
    for pattern in 0u64..1 << r {
        let x = bits
            .iter()
            .enumerate()
            .fold(0u64, |x, (j, &b)| x | ((pattern >> (r - 1 - j)) & 1) << b);
        let s = m.apply(x & mask);
        if prev.is_some_and(|p| p >= s) {
            return false;
        }
        prev = Some(s);
    }
    true
}

/// Deposits the low `bits.len()` bits of `pattern` onto the relevant
/// positions, most significant first. Inverse of the exact sketch.
pub fn deposit(relevant: &RelevantBitSet, pattern: u64) -> u64 {
    let bits = relevant.bits();
    let r = bits.len();
    bits.iter()
        .enumerate()
        .fold(0u64, |x, (j, &b)| x | ((pattern >> (r - 1 - j)) & 1) << b)
}

/// Whether consecutive sketches of sorted keys strictly increase.
pub fn preserves_order(scheme: &SketchScheme, sorted_keys: &[u64]) -> bool {
    sorted_keys
        .windows(2)
        .all(|p| scheme.sketch(p[0]).bits < scheme.sketch(p[1]).bits)
}
