use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unsupported word width {0}; expected one of 8, 16, 32, 64")]
    InvalidWidth(u32),
    #[error("value {value:#x} does not fit in {width} bits")]
    ValueOutOfRange { value: u64, width: u32 },
    #[error("operands have different widths ({0} and {1})")]
    WidthMismatch(u32, u32),
    #[error("the logarithm of zero is undefined")]
    ZeroWord,
    #[error("words are equal; no differing bit exists")]
    EqualWords,
    #[error("bit index {index} is outside a {width}-bit word")]
    IndexOutOfWidth { index: u32, width: u32 },
    #[error("{blocks} blocks of {block_size} bits exceed a {width}-bit word")]
    Overflow {
        block_size: u32,
        blocks: u32,
        width: u32,
    },
    #[error("key {0:#x} is already present")]
    DuplicateKey(u64),
    #[error("operation requires a non-empty trie")]
    EmptyTrie,
    #[error("no order-preserving multiplier found for relevant bits {0:?}")]
    NoValidMultiplier(Vec<u32>),
    #[error("sketch scheme has no multiplicative parameters")]
    SchemeNotMultiplicative,
    #[error("node capacity {cap} exceeded by {len} keys")]
    CapacityExceeded { cap: usize, len: usize },
    #[error("node is full ({0} keys); split before inserting")]
    NodeFull(usize),
    #[error("key {0:#x} is stored in this node")]
    KeyPresent(u64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
