use std::process::Command;

use fusion_bench::keyfile;
use fusion_bench::run::sort_with;
use fusion_bench::{generate, Algo, BenchConfig, Distribution, CSV_HEADER};
use fusion_core::Width;
use proptest::prelude::*;

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bench"))
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("fusion-bench-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn csv_to_stdout() {
    let out = bench()
        .args(["--algo", "btree", "--n", "500", "--dist", "clustered", "--trials", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("btree,500,1,clustered,64,7,1,"));
}

#[test]
fn csv_file_appends_with_one_header() {
    let path = tmp("runs.csv");
    let _ = std::fs::remove_file(&path);
    for algo in ["fusion", "mergesort"] {
        let status = bench()
            .args(["--algo", algo, "--n", "300", "--csv"])
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.matches("algo,").count(), 1);
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn demo_and_dot() {
    let dot = tmp("trie.dot");
    let out = bench().arg("--demo").arg("--dot").arg(&dot).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("= 26505"));
    assert!(text.contains("= 136"));
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));
}

#[test]
fn key_file_round_trip_through_cli() {
    let bin = tmp("keys.bin");
    let status = bench()
        .args(["--algo", "stdsort", "--n", "200", "--width", "16", "--keys-out"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let data = std::fs::read(&bin).unwrap();
    assert_eq!(keyfile::read_any(&data, Width::W16).unwrap(), generate(Distribution::Uniform, 200, 1, Width::W16).unwrap());

    let out = bench()
        .args(["--algo", "fusion", "--width", "16", "--input"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("fusion,200,1,file,16,"));
}

#[test]
fn bad_arguments_fail() {
    for args in [
        &["--width", "12"][..],
        &["--cap", "9"],
        &["--trials", "0"],
        &["--algo", "quicksort"],
        &["--dist", "sorted", "--width", "8", "--n", "300"],
    ] {
        let out = bench().args(args).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
    }
}

#[test]
fn fusion_and_btree_agree_on_every_distribution() {
    for dist in Distribution::ALL {
        for width in [Width::W16, Width::W64] {
            let keys = generate(dist, 5_000, 77, width).unwrap();
            let f = sort_with(&BenchConfig::new(Algo::Fusion, 5_000, 77, dist, width), &keys).unwrap();
            let b = sort_with(&BenchConfig::new(Algo::Btree, 5_000, 77, dist, width), &keys).unwrap();
            assert_eq!(f.0, b.0);
            assert_eq!(f.1.height, b.1.height);
            assert_eq!(f.1.splits, b.1.splits);
        }
    }
}

proptest! {
    #[test]
    fn key_files_round_trip(keys in proptest::collection::vec(any::<u64>(), 0..300), w in 0usize..4) {
        let width = [Width::W8, Width::W16, Width::W32, Width::W64][w];
        let keys: Vec<u64> = keys.into_iter().map(|k| k & width.mask()).collect();
        let mut bin = Vec::new();
        keyfile::write_binary(&mut bin, &keys, width).unwrap();
        prop_assert_eq!(bin.len(), 9 + keys.len() * width.bits() as usize / 8);
        prop_assert_eq!(keyfile::read_any(&bin, width).unwrap(), keys.clone());
        let mut text = Vec::new();
        keyfile::write_text(&mut text, &keys).unwrap();
        prop_assert_eq!(keyfile::read_any(&text, width).unwrap(), keys);
    }
}
