//! `vcot`: sample refinement trajectories with a bandit, distil them into a
//! reward–policy model, and run model-guided prompt refinement.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "vcot", version, about = "Bandit-sampled visual reasoning traces and reward-policy distillation")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Thresholds {
    /// Context stabilisation distance.
    #[arg(long)]
    pub delta_s: Option<f64>,
    /// Step reward change below which a trajectory stops.
    #[arg(long)]
    pub delta_r: Option<f64>,
    /// Change of the running mean episode reward below which sampling stops.
    #[arg(long)]
    pub eps_r: Option<f64>,
    /// Frobenius change of the transition posterior below which sampling stops.
    #[arg(long)]
    pub eps_p: Option<f64>,
    #[arg(long)]
    pub h_max: Option<usize>,
    #[arg(long)]
    pub e_max: Option<usize>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Write a list of random scenes (and optionally their images).
    GenScenes {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also render each scene to a binary PPM in this directory.
        #[arg(long)]
        ppm_dir: Option<PathBuf>,
    },
    /// Sample trajectories for every scene with a bandit policy.
    Sample {
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// ucb, random, greedy or eps.
        #[arg(long)]
        policy: Option<String>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        w_gt: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        thresholds: Thresholds,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the reward-policy model on a sampled dataset.
    TrainRm {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        hidden: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Per-epoch losses as JSON.
        #[arg(long)]
        loss_out: Option<PathBuf>,
    },
    /// Refine prompts with a trained model and record the traces.
    Infer {
        /// Model weights; not needed for `--mode random`.
        #[arg(long)]
        rm: Option<PathBuf>,
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// policy, reward, hybrid, or random (model-free baseline).
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        w_gt: Option<f64>,
        /// Detector noise stream (and the random baseline's choices).
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        thresholds: Thresholds,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trace_out: PathBuf,
    },
    /// Compare exploration strategies on a scene set.
    EvalExploration {
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Comma-separated policies.
        #[arg(long, default_value = "ucb,eps,greedy,random")]
        strategies: String,
        /// Comma-separated seeds.
        #[arg(long, default_value = "0,1,2,3,4")]
        seeds: String,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        w_gt: Option<f64>,
        #[command(flatten)]
        thresholds: Thresholds,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        report: PathBuf,
    },
    /// Print the trajectories and posteriors of a dataset.
    Inspect {
        #[arg(long)]
        data: PathBuf,
        /// Show at most this many images.
        #[arg(long)]
        limit: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
