use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fusion_bench::run::{median_time_ns, write_csv};
use fusion_bench::{demo_dot, demo_walkthrough, generate, keyfile, run_keys, Algo, BenchConfig, Distribution};
use fusion_core::{Strategy, Width};

/// Sort integers with a fusion tree and baselines, verifying every output.
#[derive(Parser, Debug)]
#[command(name = "bench", version)]
struct Args {
    #[arg(long, default_value = "fusion", value_parser = parse::<Algo>)]
    algo: Algo,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "uniform", value_parser = parse::<Distribution>)]
    dist: Distribution,
    #[arg(long, default_value_t = 64)]
    width: u32,
    #[arg(long, default_value_t = fusion_core::DEFAULT_CAP)]
    cap: usize,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Use exact sketches instead of multiplicative ones.
    #[arg(long)]
    exact: bool,
    /// Append CSV rows here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Sort keys read from a text or binary key file instead of generating them.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write the generated keys out (binary if the name ends in .bin).
    #[arg(long)]
    keys_out: Option<PathBuf>,
    /// Print the four-key walkthrough and exit.
    #[arg(long)]
    demo: bool,
    /// Write the walkthrough's compressed trie as DOT.
    #[arg(long)]
    dot: Option<PathBuf>,
}

fn parse<T: std::str::FromStr<Err = fusion_bench::BenchError>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: fusion_bench::BenchError| e.to_string())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match real_main(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn real_main(args: Args) -> fusion_bench::Result<()> {
    if args.demo || args.dot.is_some() {
        if args.demo {
            print!("{}", demo_walkthrough()?);
        }
        if let Some(path) = &args.dot {
            fs::write(path, demo_dot()?)?;
        }
        return Ok(());
    }

    let width = Width::new(args.width)?;
    let config = BenchConfig {
        algo: args.algo,
        n: args.n,
        seed: args.seed,
        dist: args.dist,
        width,
        cap: args.cap,
        trials: args.trials,
        strategy: if args.exact { Strategy::Exact } else { Strategy::Multiplicative },
    };
    config.validate()?;

    let (keys, source) = match &args.input {
        Some(path) => (keyfile::read_any(&fs::read(path)?, width)?, "file".to_string()),
        None => (generate(config.dist, config.n, config.seed, width)?, config.dist.to_string()),
    };
    let config = BenchConfig { n: keys.len(), ..config };
    if let Some(path) = &args.keys_out {
        let out = BufWriter::new(File::create(path)?);
        if path.extension().is_some_and(|e| e == "bin") {
            keyfile::write_binary(out, &keys, width)?;
        } else {
            keyfile::write_text(out, &keys)?;
        }
    }

    let records = run_keys(&config, &keys, &source)?;
    match &args.csv {
        Some(path) => {
            let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
            let file = fs::OpenOptions::new().create(true).append(true).open(path)?;
            write_csv(BufWriter::new(file), &records, fresh)?;
        }
        None => write_csv(io::stdout().lock(), &records, true)?,
    }
    if let Some(ns) = median_time_ns(&records) {
        writeln!(
            io::stderr(),
            "{} n={} median {:.3} ms over {} trial(s)",
            config.algo,
            config.n,
            ns as f64 / 1e6,
            records.len()
        )?;
    }
    Ok(())
}
