use std::ops::AddAssign;

/// Sink for cooperative operation counting.
///
/// Instrumented code reports word operations and full-key comparisons
/// through this trait. `()` discards everything, so uninstrumented calls
/// compile down to the bare kernel.
pub trait Tally {
    fn word_ops(&mut self, n: u64);
    fn key_compares(&mut self, n: u64);
}

impl Tally for () {
    #[inline(always)]
    fn word_ops(&mut self, _: u64) {}
    #[inline(always)]
    fn key_compares(&mut self, _: u64) {}
}

/// Exact tallies of primitive word operations and full-key comparisons.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounters {
    pub word_ops: u64,
    pub key_compares: u64,
}

impl OpCounters {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Tally for OpCounters {
    #[inline(always)]
    fn word_ops(&mut self, n: u64) {
        self.word_ops += n;
    }
    #[inline(always)]
    fn key_compares(&mut self, n: u64) {
        self.key_compares += n;
    }
}

impl AddAssign for OpCounters {
    fn add_assign(&mut self, rhs: OpCounters) {
        self.word_ops += rhs.word_ops;
        self.key_compares += rhs.key_compares;
    }
}
