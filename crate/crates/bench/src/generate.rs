//! Deterministic key generators.

use std::fmt;
use std::str::FromStr;

use fusion_core::Width;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{BenchError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Distribution {
    Uniform,
    /// Strictly increasing.
    Sorted,
    /// Strictly decreasing.
    Reverse,
    /// Tight groups around a few random centres.
    Clustered,
    /// Drawn from a universe of `ceil(n / 10)` values.
    Duplicates,
}

impl Distribution {
    pub const ALL: [Distribution; 5] = [
        Distribution::Uniform,
        Distribution::Sorted,
        Distribution::Reverse,
        Distribution::Clustered,
        Distribution::Duplicates,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Distribution::Uniform => "uniform",
            Distribution::Sorted => "sorted",
            Distribution::Reverse => "reverse",
            Distribution::Clustered => "clustered",
            Distribution::Duplicates => "duplicates",
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Distribution {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        Distribution::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| BenchError::InvalidConfig(format!("unknown distribution {s:?}")))
    }
}

/// `n` keys of `width` bits; identical for identical arguments.
pub fn generate(dist: Distribution, n: usize, seed: u64, width: Width) -> Result<Vec<u64>> {
    let mask = width.mask();
    let mut rng = StdRng::seed_from_u64(seed);
    let keys = match dist {
        Distribution::Uniform => (0..n).map(|_| rng.gen::<u64>() & mask).collect(),
        Distribution::Sorted | Distribution::Reverse => {
            let universe = mask as u128 + 1;
            if n as u128 > universe {
                return Err(BenchError::InvalidConfig(format!(
                    "{n} distinct keys do not fit {width} bits"
                )));
            }
            // One key per equal-width stripe keeps the sequence strictly increasing.
            let stripe = if n == 0 { 1 } else { universe / n as u128 };
            let mut keys: Vec<u64> = (0..n as u128)
                .map(|i| (i * stripe + rng.gen_range(0..stripe)) as u64)
                .collect();
            if dist == Distribution::Reverse {
                keys.reverse();
            }
            keys
        }
        Distribution::Clustered => {
            let centres: Vec<u64> = (0..(n / 1000).max(1)).map(|_| rng.gen::<u64>() & mask).collect();
            let spread = mask >> (3 * width.bits() / 4);
            (0..n)
                .map(|_| {
                    let c = centres[rng.gen_range(0..centres.len())];
                    c.wrapping_add(rng.gen_range(0..=spread)) & mask
                })
                .collect()
        }
        Distribution::Duplicates => {
            let universe: Vec<u64> = (0..n.div_ceil(10).max(1)).map(|_| rng.gen::<u64>() & mask).collect();
            (0..n).map(|_| universe[rng.gen_range(0..universe.len())]).collect()
        }
    };
    Ok(keys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn sorted_is_strictly_increasing() {
        let k = generate(Distribution::Sorted, 5, 1, Width::W8).unwrap();
        assert!(k.windows(2).all(|p| p[0] < p[1]));
        let full = generate(Distribution::Sorted, 256, 1, Width::W8).unwrap();
        assert_eq!(full, (0..256).collect::<Vec<u64>>());
        assert!(generate(Distribution::Sorted, 257, 1, Width::W8).is_err());
        let r = generate(Distribution::Reverse, 1000, 4, Width::W64).unwrap();
        assert!(r.windows(2).all(|p| p[0] > p[1]));
    }

    #[test]
    fn same_seed_same_keys() {
        for d in Distribution::ALL {
            assert_eq!(
                generate(d, 500, 42, Width::W32).unwrap(),
                generate(d, 500, 42, Width::W32).unwrap()
            );
        }
        assert_ne!(
            generate(Distribution::Uniform, 50, 1, Width::W64).unwrap(),
            generate(Distribution::Uniform, 50, 2, Width::W64).unwrap()
        );
    }

    #[test]
    fn keys_fit_width() {
        for d in Distribution::ALL {
            for w in [Width::W8, Width::W16, Width::W32] {
                let n = if w == Width::W8 { 200 } else { 2000 };
                assert!(generate(d, n, 3, w).unwrap().iter().all(|&k| w.fits(k)));
            }
        }
    }

    #[test]
    fn duplicates_use_a_tenth_of_n_values() {
        let k = generate(Distribution::Duplicates, 10_000, 5, Width::W64).unwrap();
        let distinct: HashSet<u64> = k.iter().copied().collect();
        assert!(distinct.len() <= 1000);
        assert!(distinct.len() > 900);
    }

    #[test]
    fn uniform_passes_a_loose_ks_check() {
        let n = 1_000_000;
        let mut k = generate(Distribution::Uniform, n, 11, Width::W64).unwrap();
        k.sort_unstable();
        let d = k
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let cdf = v as f64 / u64::MAX as f64;
                (cdf - i as f64 / n as f64).abs().max((cdf - (i + 1) as f64 / n as f64).abs())
            })
            .fold(0.0f64, f64::max);
        // Critical value at alpha = 0.001 is about 1.95 / sqrt(n).
        assert!(d < 1.95 / (n as f64).sqrt(), "KS statistic {d}");
    }

    #[test]
    fn parses_names() {
        assert_eq!("clustered".parse::<Distribution>().unwrap(), Distribution::Clustered);
        assert!("gaussian".parse::<Distribution>().is_err());
    }
}
