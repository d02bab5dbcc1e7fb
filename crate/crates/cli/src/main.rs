use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hybridbeam::sim::{self, trace, versus, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "hybridbeam",
    version,
    about = "Energy-efficient hybrid beamforming with per-converter bit allocation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo sweep; writes records.csv and summary.csv.
    Run(Common),
    /// Per-iteration ADMM NMSE for each antenna count; writes trace.csv.
    Trace(Common),
    /// Proposed design against the exhaustive bit search; writes
    /// bruteforce_trials.csv and bruteforce_summary.csv.
    Bruteforce(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment description (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Overrides `base_seed`.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Overrides `trials`.
    #[arg(long, value_name = "N")]
    trials: Option<u64>,
    /// Worker threads; defaults to one per core.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

impl Common {
    fn prepare(&self) -> Result<ExperimentConfig> {
        if let Some(n) = self.threads {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the worker pool")?;
        }
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            cfg.base_seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        cfg.validate()?;
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        Ok(cfg)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn written(path: &Path) {
    log::info!("wrote {}", path.display());
}

fn cmd_run(args: &Common) -> Result<()> {
    let cfg = args.prepare()?;
    let records = sim::run(&cfg)?;
    let summary = sim::aggregate(&records);
    let (rp, sp) = (args.path("records.csv"), args.path("summary.csv"));
    sim::write_csv(&rp, &records)?;
    written(&rp);
    sim::write_csv(&sp, &summary)?;
    written(&sp);

    for (i, p) in cfg.points().iter().enumerate() {
        let d = p.dims;
        let parts: Vec<String> = summary
            .iter()
            .filter(|r| r.point == i)
            .map(|r| {
                format!(
                    "{} ee={:.4} se={:.3} bits={:.2}/{:.2}",
                    r.scheme, r.ee_mean, r.se_mean, r.bits_t_mean, r.bits_r_mean
                )
            })
            .collect();
        println!(
            "snr={} γT={} γR={} N={}x{} L={}x{} | {}",
            p.snr_db,
            p.gamma_t,
            p.gamma_r,
            d.n_t,
            d.n_r,
            d.l_t,
            d.l_r,
            parts.join(" | ")
        );
    }
    Ok(())
}

fn cmd_trace(args: &Common) -> Result<()> {
    let cfg = args.prepare()?;
    let rows = trace::convergence_trace(&cfg)?;
    let path = args.path("trace.csv");
    sim::write_csv(&path, &rows)?;
    written(&path);
    for r in rows.iter().filter(|r| r.iteration == cfg.admm.max_iters) {
        println!("{:?} N={} nmse after {} iterations: {:.2} dB", r.side, r.n_antennas, r.iteration, r.nmse_db);
    }
    Ok(())
}

fn cmd_bruteforce(args: &Common) -> Result<()> {
    let cfg = args.prepare()?;
    let (trials, summary) = versus::compare(&cfg)?;
    let (tp, sp) = (args.path("bruteforce_trials.csv"), args.path("bruteforce_summary.csv"));
    sim::write_csv(&tp, &trials)?;
    written(&tp);
    sim::write_csv(&sp, &summary)?;
    written(&sp);
    for s in &summary {
        println!(
            "snr={} L={}x{} proposed ee={:.4} brute-force ee={:.4} gap={:.4} ({:.1}%)",
            s.snr_db,
            s.l_t,
            s.l_r,
            s.ee_proposed_mean,
            s.ee_bruteforce_mean,
            s.gap_mean,
            100.0 * s.relative_gap
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HYBRIDBEAM_LOG", "warn")).init();
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Trace(a) => cmd_trace(a),
        Command::Bruteforce(a) => cmd_bruteforce(a),
    }
}
