//! Command line front end: `run` drives Monte Carlo experiments from a
//! config file, `gen-code` constructs LDPC codes, `selftest` exercises the
//! numeric kernels against their oracles.

mod selftest;

use clap::{Parser, Subcommand};
use phasemix_core::harness::{parse_config, run_experiment, Algorithm};
use phasemix_core::ldpc::{peg_construct, write_alist, PegConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "phasemix", version, about = "Joint LDPC decoding under strong phase noise: Tikhonov-mixture detector, discrete-phase and single-component baselines, Monte Carlo PER harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file.
    Run {
        /// Path to the key-value config file.
        config: PathBuf,
        /// Override the experiment seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the algorithm (multi_hyp | dp | barb).
        #[arg(long)]
        algo: Option<String>,
        /// Override the SNR grid, comma separated dB values.
        #[arg(long)]
        snr: Option<String>,
        /// Override the CSV output directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override the worker thread count (1 = bitwise-reproducible mode).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Construct a seeded variable-regular LDPC code and write it as alist.
    GenCode {
        /// Codeword length in bits.
        #[arg(long)]
        n: usize,
        /// Code rate (checks = n·(1−rate), must be integral).
        #[arg(long, default_value_t = 0.75)]
        rate: f64,
        /// Variable node degree.
        #[arg(long, default_value_t = 3)]
        var_degree: usize,
        /// Construction seed; nearby seeds are tried if the matrix comes out
        /// rank deficient.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output alist path.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run the built-in oracle and property checks.
    Selftest,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, seed, algo, snr, out_dir, threads } => {
            run_cmd(config, seed, algo, snr, out_dir, threads)
        }
        Command::GenCode { n, rate, var_degree, seed, out } => {
            gen_code_cmd(n, rate, var_degree, seed, out)
        }
        Command::Selftest => selftest::run(),
    }
}

fn run_cmd(
    config_path: PathBuf,
    seed: Option<u64>,
    algo: Option<String>,
    snr: Option<String>,
    out_dir: Option<PathBuf>,
    threads: Option<usize>,
) -> ExitCode {
    let text = match std::fs::read_to_string(&config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(a) = &algo {
        match Algorithm::from_name(a) {
            Some(alg) => cfg.algorithm = alg,
            None => {
                eprintln!("error: unknown algorithm `{a}` (multi_hyp | dp | barb)");
                return ExitCode::from(2);
            }
        }
    }
    if let Some(s) = &snr {
        match s.split(',').map(|v| v.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>() {
            Ok(grid) if !grid.is_empty() => cfg.snr_grid_db = grid,
            _ => {
                eprintln!("error: bad --snr list `{s}`");
                return ExitCode::from(2);
            }
        }
    }
    if let Some(d) = out_dir {
        cfg.out_dir = Some(d);
    }
    if let Some(t) = threads {
        cfg.threads = t;
    }

    eprintln!(
        "running {} over {} SNR point(s), seed {}, threads {}",
        cfg.algorithm.name(),
        cfg.snr_grid_db.len(),
        cfg.seed,
        cfg.threads
    );
    let stats = match run_experiment(&cfg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    println!("snr_db      per          ber        frames  errors   time_s");
    for p in &stats.points {
        println!(
            "{:>6.2}  {:>10.3e}  {:>10.3e}  {:>6}  {:>6}  {:>7.1}",
            p.snr_db,
            p.per(),
            p.ber(),
            p.frames,
            p.frame_errors,
            p.wall_time_s
        );
        if !p.gamma.is_empty() {
            let gammas: Vec<String> =
                p.gamma.iter().map(|g| format!("{:.2}", g.mean())).collect();
            println!("        gamma(i): {}", gammas.join(" "));
        }
    }
    if let Some(dir) = &cfg.out_dir {
        eprintln!("reports written to {}", dir.display());
    }
    ExitCode::SUCCESS
}

fn gen_code_cmd(n: usize, rate: f64, var_degree: usize, seed: u64, out: PathBuf) -> ExitCode {
    for attempt in 0..16 {
        let try_seed = seed + attempt;
        let cfg = match PegConfig::from_rate(n, rate, var_degree, try_seed) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        };
        match peg_construct(&cfg) {
            Ok(code) => {
                if let Err(e) = std::fs::write(&out, write_alist(&code)) {
                    eprintln!("error: cannot write {}: {e}", out.display());
                    return ExitCode::from(1);
                }
                println!(
                    "wrote {}: n={} k={} checks={} rate={:.4} var_degree={} seed={}",
                    out.display(),
                    code.n(),
                    code.k(),
                    code.num_checks(),
                    code.rate(),
                    var_degree,
                    try_seed
                );
                return ExitCode::SUCCESS;
            }
            Err(e) => {
                eprintln!("seed {try_seed}: {e}; retrying");
            }
        }
    }
    eprintln!("error: no full-rank construction found in 16 seed attempts");
    ExitCode::from(1)
}
