//! Timed, verified sorting runs and CSV output.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use fusion_core::{btree_sort_counted, fusion_sort_counted, NodeConfig, OpCounters, SortStats, Strategy, Width};

use crate::error::{BenchError, Result};
use crate::generate::{generate, Distribution};
use crate::mergesort::merge_sort;

pub const CSV_HEADER: &str = "algo,n,seed,dist,width,cap,trial,wall_time_ns,word_ops,key_compares,height,splits";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algo {
    Fusion,
    Btree,
    Mergesort,
    Stdsort,
}

impl Algo {
    pub const ALL: [Algo; 4] = [Algo::Fusion, Algo::Btree, Algo::Mergesort, Algo::Stdsort];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Fusion => "fusion",
            Algo::Btree => "btree",
            Algo::Mergesort => "mergesort",
            Algo::Stdsort => "stdsort",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| BenchError::InvalidConfig(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BenchConfig {
    pub algo: Algo,
    pub n: usize,
    pub seed: u64,
    pub dist: Distribution,
    pub width: Width,
    pub cap: usize,
    pub trials: usize,
    pub strategy: Strategy,
}

impl BenchConfig {
    pub fn new(algo: Algo, n: usize, seed: u64, dist: Distribution, width: Width) -> BenchConfig {
        BenchConfig {
            algo,
            n,
            seed,
            dist,
            width,
            cap: fusion_core::DEFAULT_CAP,
            trials: 1,
            strategy: Strategy::Multiplicative,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(BenchError::InvalidConfig("trials must be at least 1".into()));
        }
        self.node_config()?;
        if self.cap < 2 {
            return Err(BenchError::InvalidConfig("cap must be at least 2".into()));
        }
        Ok(())
    }

    pub fn node_config(&self) -> Result<NodeConfig> {
        Ok(NodeConfig::new(self.width, self.cap, self.strategy, Width::W64)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchRecord {
    pub config: BenchConfig,
    /// Label for the input column; the distribution name or "file".
    pub source: String,
    pub trial: usize,
    pub wall_time_ns: u128,
    pub word_ops: u64,
    pub key_compares: u64,
    pub height: usize,
    pub splits: u64,
    pub verified: bool,
}

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        let c = &self.config;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            c.algo,
            c.n,
            c.seed,
            self.source,
            c.width.bits(),
            c.cap,
            self.trial,
            self.wall_time_ns,
            self.word_ops,
            self.key_compares,
            self.height,
            self.splits
        )
    }
}

/// Sorts `keys` once with `algo`, returning output and counters.
pub fn sort_with(config: &BenchConfig, keys: &[u64]) -> Result<(Vec<u64>, SortStats)> {
    Ok(match config.algo {
        Algo::Fusion => fusion_sort_counted(keys, config.node_config()?)?,
        Algo::Btree => btree_sort_counted(keys, config.cap)?,
        Algo::Mergesort => {
            let mut ops = OpCounters::new();
            let out = merge_sort(keys, &mut ops);
            (out, SortStats { ops, ..SortStats::default() })
        }
        Algo::Stdsort => {
            let mut out = keys.to_vec();
            out.sort_unstable();
            (out, SortStats::default())
        }
    })
}

/// Generates the configured input and runs every trial on it.
pub fn run(config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    config.validate()?;
    let keys = generate(config.dist, config.n, config.seed, config.width)?;
    run_keys(config, &keys, config.dist.name())
}

/// Runs every trial on `keys`; fails without records if any output is wrong.
pub fn run_keys(config: &BenchConfig, keys: &[u64], source: &str) -> Result<Vec<BenchRecord>> {
    config.validate()?;
    if let Some(&k) = keys.iter().find(|&&k| !config.width.fits(k)) {
        return Err(BenchError::InvalidConfig(format!("key {k} exceeds {} bits", config.width)));
    }
    let mut reference = keys.to_vec();
    reference.sort();
    let mut records = Vec::with_capacity(config.trials);
    for trial in 0..config.trials {
        let start = Instant::now();
        let (out, stats) = sort_with(config, keys)?;
        let wall_time_ns = start.elapsed().as_nanos();
        if let Some(index) = first_difference(&out, &reference) {
            return Err(BenchError::VerificationFailed {
                algo: config.algo.to_string(),
                index,
            });
        }
        records.push(BenchRecord {
            config: *config,
            source: source.to_string(),
            trial,
            wall_time_ns,
            word_ops: stats.ops.word_ops,
            key_compares: stats.ops.key_compares,
            height: stats.height,
            splits: stats.splits,
            verified: true,
        });
    }
    Ok(records)
}

fn first_difference(a: &[u64], b: &[u64]) -> Option<usize> {
    a.iter()
        .zip(b)
        .position(|(x, y)| x != y)
        .or_else(|| (a.len() != b.len()).then(|| a.len().min(b.len())))
}

pub fn median_time_ns(records: &[BenchRecord]) -> Option<u128> {
    let mut times: Vec<u128> = records.iter().map(|r| r.wall_time_ns).collect();
    times.sort_unstable();
    times.get(times.len() / 2).copied()
}

pub fn write_csv<W: Write>(mut out: W, records: &[BenchRecord], header: bool) -> Result<()> {
    if header {
        writeln!(out, "{CSV_HEADER}")?;
    }
    for r in records.iter().filter(|r| r.verified) {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mergesort_run_verifies() {
        let mut c = BenchConfig::new(Algo::Mergesort, 1000, 1, Distribution::Uniform, Width::W64);
        c.trials = 3;
        let recs = run(&c).unwrap();
        assert_eq!(recs.len(), 3);
        assert!(recs.iter().all(|r| r.verified && r.key_compares > 0));
        assert!(median_time_ns(&recs).is_some());
    }

    #[test]
    fn counters_are_deterministic() {
        let c = BenchConfig::new(Algo::Fusion, 2000, 9, Distribution::Clustered, Width::W32);
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!((a[0].word_ops, a[0].height, a[0].splits), (b[0].word_ops, b[0].height, b[0].splits));
        assert!(a[0].word_ops > 0);
    }

    #[test]
    fn bad_configs() {
        let mut c = BenchConfig::new(Algo::Btree, 10, 1, Distribution::Uniform, Width::W64);
        c.trials = 0;
        assert!(run(&c).is_err());
        c.trials = 1;
        c.cap = 9;
        assert!(run(&c).is_err());
        c.cap = 1;
        assert!(run(&c).is_err());
        c.cap = 7;
        assert!(run_keys(&BenchConfig { width: Width::W8, ..c }, &[256], "file").is_err());
    }

    #[test]
    fn csv_rows_match_header() {
        let c = BenchConfig::new(Algo::Btree, 100, 2, Distribution::Duplicates, Width::W16);
        let recs = run(&c).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &recs, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let row = lines.next().unwrap();
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
        assert!(row.starts_with("btree,100,2,duplicates,16,7,0,"));
    }

    #[test]
    fn difference_detection() {
        assert_eq!(first_difference(&[1, 2], &[1, 2]), None);
        assert_eq!(first_difference(&[1, 3], &[1, 2]), Some(1));
        assert_eq!(first_difference(&[1], &[1, 2]), Some(1));
    }
}
