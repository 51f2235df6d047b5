use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use airs_experiments::{resolve_out_dir, run, write_outputs, Command, ScenarioConfig};

#[derive(Parser)]
#[command(name = "airs", version, about = "Weighted sum-rate sweeps for active-IRS aided uplink/downlink")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Single user, WSR versus total element count.
    SingleNSweep(Common),
    /// Single user, WSR versus DL weight.
    SingleEpsSweep(Common),
    /// DL element share versus total element count for several weights.
    AllocCurve(Common),
    /// Multi-user, user-adaptive beamforming versus element count.
    MuAdaptive(Common),
    /// Multi-user, static beamforming versus element count.
    MuStatic(Common),
    /// UL/DL rate region of the static designs.
    RateRegion(Common),
    /// Runs the full reference-check suite.
    Selftest(Common),
}

#[derive(Args)]
struct Common {
    /// `key = value` config file overlaid on the command defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides AIRS_OUT_DIR and the config).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, value_name = "N", default_value_t = 1)]
    parallel: usize,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<bool> {
    let cli = Cli::parse();
    let (cmd, common) = match cli.command {
        Cmd::SingleNSweep(c) => (Command::SingleNSweep, c),
        Cmd::SingleEpsSweep(c) => (Command::SingleEpsSweep, c),
        Cmd::AllocCurve(c) => (Command::AllocCurve, c),
        Cmd::MuAdaptive(c) => (Command::MuAdaptive, c),
        Cmd::MuStatic(c) => (Command::MuStatic, c),
        Cmd::RateRegion(c) => (Command::RateRegion, c),
        Cmd::Selftest(c) => (Command::Selftest, c),
    };
    let text = match &common.config {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::new(),
    };
    let mut cfg = ScenarioConfig::parse(cmd, &text)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let dir = resolve_out_dir(common.out.as_deref(), &cfg);
    cfg.out_dir = dir.clone();

    let out = run(cmd, &cfg, common.parallel)?;
    let paths = write_outputs(&out, &dir)?;
    for c in &out.checks {
        let verdict = if c.passed && c.within_time() { "PASS" } else { "FAIL" };
        println!(
            "{verdict} [{:>2}] {} (metric {:.3e}, threshold {:.3e}, {:.1} s) {}",
            c.id,
            c.name,
            c.metric,
            c.threshold,
            c.elapsed.as_secs_f64(),
            c.detail
        );
    }
    let failed: Vec<_> = out.records.iter().filter(|r| !r.ok()).collect();
    for r in &failed {
        if let Err(e) = &r.outcome {
            eprintln!("row failed: {} grid {} drop {}: {e}", r.scheme, r.grid_index, r.drop);
        }
    }
    println!(
        "wrote {} ({} rows, {} failed) and {}",
        paths.csv.display(),
        out.records.len(),
        failed.len(),
        paths.manifest.display()
    );
    Ok(out.all_ok())
}
