//! Input generation, verified sorting runs, key files and the worked
//! example trace behind the `bench` binary.

pub mod demo;
pub mod error;
pub mod generate;
pub mod keyfile;
pub mod mergesort;
pub mod run;

pub use demo::{demo_dot, demo_walkthrough};
pub use error::{BenchError, Result};
pub use generate::{generate, Distribution};
pub use mergesort::merge_sort;
pub use run::{run, run_keys, Algo, BenchConfig, BenchRecord, CSV_HEADER};
