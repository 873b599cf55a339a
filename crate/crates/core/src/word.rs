//! Word-RAM primitives over words of a runtime-selected width.
//!
//! The checked API works on [`Word`] values that carry their width, so the
//! 8- and 16-bit worked examples go through the same code as 64-bit keys.
//! The [`raw`] module holds the unchecked `u64` kernels the node and tree
//! code use on their hot paths.

use std::fmt;

use crate::error::{Error, Result};

/// Bit width of a word. Only the machine widths 8, 16, 32 and 64 exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Width(u32);

impl Width {
    pub const W8: Width = Width(8);
    pub const W16: Width = Width(16);
    pub const W32: Width = Width(32);
    pub const W64: Width = Width(64);

    pub fn new(bits: u32) -> Result<Width> {
        match bits {
            8 | 16 | 32 | 64 => Ok(Width(bits)),
            other => Err(Error::InvalidWidth(other)),
        }
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    /// All-ones word of this width.
    #[inline]
    pub fn mask(self) -> u64 {
        u64::MAX >> (64 - self.0)
    }

    #[inline]
    pub fn fits(self, value: u64) -> bool {
        value & !self.mask() == 0
    }

    fn check_index(self, index: u32) -> Result<()> {
        if index < self.0 {
            Ok(())
        } else {
            Err(Error::IndexOutOfWidth {
                index,
                width: self.0,
            })
        }
    }
}

impl TryFrom<u32> for Width {
    type Error = Error;

    fn try_from(bits: u32) -> Result<Width> {
        Width::new(bits)
    }
}

impl fmt::Display for Width {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Position of a bit, 0 being the least significant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitIndex(pub u32);

impl BitIndex {
    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for BitIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

/// An unsigned integer tied to a width; the value never exceeds `2^width - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    value: u64,
    width: Width,
}

impl Word {
    pub fn new(value: u64, width: Width) -> Result<Word> {
        if width.fits(value) {
            Ok(Word { value, width })
        } else {
            Err(Error::ValueOutOfRange {
                value,
                width: width.bits(),
            })
        }
    }

    /// Reduces `value` modulo `2^width`.
    pub fn wrapping(value: u64, width: Width) -> Word {
        Word {
            value: value & width.mask(),
            width,
        }
    }

    /// Maps a signed `width`-bit integer to an unsigned word with the same
    /// order by flipping the sign bit.
    pub fn from_signed(value: i64, width: Width) -> Result<Word> {
        let bits = width.bits();
        let lo = -(1i128 << (bits - 1));
        let hi = (1i128 << (bits - 1)) - 1;
        if (value as i128) < lo || (value as i128) > hi {
            return Err(Error::ValueOutOfRange {
                value: value as u64,
                width: bits,
            });
        }
        let sign = 1u64 << (bits - 1);
        Ok(Word::wrapping((value as u64) ^ sign, width))
    }

    /// Inverse of [`Word::from_signed`].
    pub fn to_signed(self) -> i64 {
        let bits = self.width.bits();
        let flipped = self.value ^ (1u64 << (bits - 1));
        // sign-extend from `bits`
        ((flipped << (64 - bits)) as i64) >> (64 - bits)
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn width(self) -> Width {
        self.width
    }

    pub fn bit(self, index: BitIndex) -> Result<bool> {
        self.width.check_index(index.0)?;
        Ok(raw::bit(self.value, index.0))
    }

    fn same_width(self, other: Word) -> Result<()> {
        if self.width == other.width {
            Ok(())
        } else {
            Err(Error::WidthMismatch(self.width.bits(), other.width.bits()))
        }
    }
}

impl fmt::Binary for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0w$b}", self.value, w = self.width.bits() as usize)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// `floor(lg x)`: the index of the most significant set bit.
pub fn msb(x: Word) -> Result<BitIndex> {
    if x.value == 0 {
        return Err(Error::ZeroWord);
    }
    Ok(BitIndex(raw::msb(x.value)))
}

/// Most significant bit position at which `s1` and `s2` differ,
/// `floor(lg(s1 XOR s2))`.
pub fn delta(s1: Word, s2: Word) -> Result<BitIndex> {
    s1.same_width(s2)?;
    if s1.value == s2.value {
        return Err(Error::EqualWords);
    }
    Ok(BitIndex(raw::delta(s1.value, s2.value)))
}

/// `2^(b+1) - 1`: bits `b..=0` set.
pub fn trailing_ones_mask(b: BitIndex, width: Width) -> Result<Word> {
    width.check_index(b.0)?;
    Ok(Word {
        value: raw::low_mask(b.0),
        width,
    })
}

/// `x` with bits `b..=0` forced to zero.
pub fn clear_low_bits(x: Word, b: BitIndex) -> Result<Word> {
    x.width.check_index(b.0)?;
    Ok(Word {
        value: raw::clear_low_bits(x.value, b.0),
        width: x.width,
    })
}

/// `x` with bits `b..=0` forced to one.
pub fn set_low_bits(x: Word, b: BitIndex) -> Result<Word> {
    x.width.check_index(b.0)?;
    Ok(Word {
        value: raw::set_low_bits(x.value, b.0),
        width: x.width,
    })
}

/// One bit at the top of each of `block_count` contiguous blocks of
/// `block_size` bits, starting from bit 0.
pub fn block_leading_bits_mask(block_size: u32, block_count: u32, width: Width) -> Result<Word> {
    let overflow = Error::Overflow {
        block_size,
        blocks: block_count,
        width: width.bits(),
    };
    let total = block_size.checked_mul(block_count).ok_or(overflow.clone())?;
    if block_size == 0 || total > width.bits() {
        return Err(overflow);
    }
    Ok(Word {
        value: raw::block_leading_bits(block_size, block_count),
        width,
    })
}

/// Unchecked kernels on `u64`. Callers guarantee the preconditions that the
/// checked API verifies.
pub mod raw {
    const DEBRUIJN: u64 = 0x03f7_9d71_b4cb_0a89;

    const fn debruijn_table() -> [u8; 64] {
        // Indexed by the top six bits of `(2^(k+1) - 1) * DEBRUIJN`.
        let mut table = [0u8; 64];
        let mut k = 0;
        while k < 64 {
            let smeared = if k == 63 { u64::MAX } else { (1u64 << (k + 1)) - 1 };
            table[(smeared.wrapping_mul(DEBRUIJN) >> 58) as usize] = k as u8;
            k += 1;
        }
        table
    }

    static DEBRUIJN_TABLE: [u8; 64] = debruijn_table();

    /// Index of the highest set bit via the hardware leading-zero count.
    #[inline]
    pub fn msb(x: u64) -> u32 {
        debug_assert!(x != 0);
        63 - x.leading_zeros()
    }

    /// Portable reference for [`msb`]: smear the top bit downwards, then one
    /// multiplication by a de Bruijn constant and a table lookup.
    #[inline]
    pub fn msb_debruijn(mut x: u64) -> u32 {
        debug_assert!(x != 0);
        x |= x >> 1;
        x |= x >> 2;
        x |= x >> 4;
        x |= x >> 8;
        x |= x >> 16;
        x |= x >> 32;
        DEBRUIJN_TABLE[(x.wrapping_mul(DEBRUIJN) >> 58) as usize] as u32
    }

    #[inline]
    pub fn delta(a: u64, b: u64) -> u32 {
        msb(a ^ b)
    }

    #[inline]
    pub fn bit(x: u64, i: u32) -> bool {
        (x >> i) & 1 == 1
    }

    /// `2^(b+1) - 1` without overflowing at `b = 63`.
    #[inline]
    pub fn low_mask(b: u32) -> u64 {
        debug_assert!(b < 64);
        u64::MAX >> (63 - b)
    }

    #[inline]
    pub fn clear_low_bits(x: u64, b: u32) -> u64 {
        x & !low_mask(b)
    }

    #[inline]
    pub fn set_low_bits(x: u64, b: u32) -> u64 {
        x | low_mask(b)
    }

    /// Ones at the lowest bit of each block: the repeating unit that copies a
    /// block-sized value into every block with one multiplication.
    #[inline]
    pub fn block_bases(block_size: u32, block_count: u32) -> u64 {
        let mut unit = 0u64;
        for i in 0..block_count {
            unit |= 1u64 << (i * block_size);
        }
        unit
    }

    #[inline]
    pub fn block_leading_bits(block_size: u32, block_count: u32) -> u64 {
        block_bases(block_size, block_count) << (block_size - 1)
    }
}
