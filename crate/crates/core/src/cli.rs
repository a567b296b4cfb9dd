//! Command-line front end. The `vascflow` binary only calls [`dispatch`].
//!
//! Exit codes: 0 success, 1 usage error, 2 validation error (bad config,
//! missing or malformed file, incompatible model), 3 runtime instability.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::boundary::{read_proxies, write_proxies, ProxySet};
use crate::config::Config;
use crate::driver::{
    bench, build_scene, build_scene_with_proxies, capture_dataset, compare_runs, dataset_scenes, read_run_dir, run,
    sample_vessel, timing_model, BenchRow, DensityProbe, RunMode, RunOptions,
};
use crate::exec::Exec;
use crate::kernel::SphKernels;
use crate::nn::Network;
use crate::trainer::{train_baseline_bp, train_pcnet, FrameDataset, RolloutRestart};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INSTABILITY: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "vascflow",
    version,
    about = "Blood flow in deformable-wall vessels: SPH solver and learned surrogate"
)]
pub struct Cli {
    /// Worker threads; overrides `run.threads`. 1 is bitwise deterministic.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample the vessel wall into weighted proxy particles.
    SampleBoundary {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one simulation and write every frame.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "physics")]
        mode: RunMode,
        #[arg(long)]
        frames: usize,
        #[arg(long)]
        out: PathBuf,
        /// Trained model, required for `--mode pcnet`.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Proxy file from `sample-boundary` instead of resampling the wall.
        #[arg(long)]
        proxies: Option<PathBuf>,
    },
    /// Run physics for every configured column height and record a dataset.
    Capture {
        #[arg(long)]
        config: PathBuf,
        /// Frames per sequence; defaults to `dataset.frames`.
        #[arg(long)]
        frames: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a model to a captured dataset.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Correction period in frames.
        #[arg(long, default_value_t = 5)]
        period: usize,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        momentum: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Where correction rollouts start: `sequence` or `period`.
        #[arg(long)]
        rollout_from: Option<RolloutRestart>,
        /// Plain backpropagation without corrections.
        #[arg(long)]
        baseline_bp: bool,
    },
    /// Roll a model out and compare it with a reference run.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        frames: usize,
        #[arg(long)]
        report: PathBuf,
    },
    /// Time physics against the learned model, one row per config.
    Bench {
        #[arg(long, required = true)]
        config: Vec<PathBuf>,
        #[arg(long)]
        frames: usize,
        #[arg(long)]
        report: PathBuf,
        /// Trained model; without one a free-fall network of the configured
        /// size is timed.
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

/// Parse `args` (program name first), run the command and return the exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).try_init();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Instability { .. } | Error::Divergence(_) => EXIT_INSTABILITY,
        _ => EXIT_VALIDATION,
    }
}

fn load_config(path: &Path, threads: Option<usize>) -> Result<Config> {
    let mut config = Config::load(path)?;
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::Config("--threads must be >= 1".into()));
        }
        config.run.threads = t;
    }
    Ok(config)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::SampleBoundary { config, out } => {
            let config = load_config(config, cli.threads)?;
            let kernels = SphKernels::new(config.sph.h, config.sph.kernels)?;
            let proxies = ProxySet::from_positions(sample_vessel(&config)?, &kernels, config.fluid.rest_density)?;
            write_proxies(out, &proxies.positions, &proxies.weights)?;
            println!("{} proxy particles -> {}", proxies.len(), out.display());
            Ok(EXIT_OK)
        }
        Command::Simulate {
            config,
            mode,
            frames,
            out,
            model,
            proxies,
        } => {
            let config = load_config(config, cli.threads)?;
            let exec = Exec::with_threads(config.run.threads)?;
            let scene = match proxies {
                Some(p) => {
                    let (positions, weights) = read_proxies(p)?;
                    build_scene_with_proxies(
                        &config,
                        ProxySet::from_weights(positions, weights, config.fluid.rest_density)?,
                    )?
                }
                None => build_scene(&config)?,
            };
            let net = model.as_deref().map(Network::load).transpose()?;
            let mut opts = RunOptions::new(&exec);
            opts.out_dir = Some(out);
            let result = run(&scene, *mode, *frames, net.as_ref(), &opts)?;
            write_text(&out.join("metrics.csv"), &result.metrics.to_csv())?;
            println!(
                "{} frames of {} fluid / {} proxy particles, {:.4} s/frame -> {}",
                result.metrics.frames.len() - 1,
                scene.fluid_len(),
                scene.proxy_len(),
                result.metrics.mean_seconds(),
                out.display()
            );
            Ok(truncation_code(result.metrics.truncated))
        }
        Command::Capture { config, frames, out } => {
            let config = load_config(config, cli.threads)?;
            let frames = frames.unwrap_or(config.dataset.frames);
            if frames < 2 {
                return Err(Error::Config("capture needs at least 2 frames".into()));
            }
            capture(&config, frames, out)
        }
        Command::Train {
            dataset,
            out,
            period,
            epochs,
            lr,
            momentum,
            seed,
            rollout_from,
            baseline_bp,
        } => {
            let data = FrameDataset::read(dataset)?;
            let mut tc = data.meta.config.training.clone();
            tc.period = Some(*period);
            if let Some(v) = epochs {
                tc.epochs = *v;
            }
            if let Some(v) = lr {
                tc.learning_rate = *v;
            }
            if let Some(v) = momentum {
                tc.momentum = *v;
            }
            if let Some(v) = seed {
                tc.seed = *v;
            }
            if let Some(v) = rollout_from {
                tc.rollout_restart = *v;
            }
            let exec = Exec::with_threads(cli.threads.unwrap_or(data.meta.config.run.threads))?;
            let (net, report) = if *baseline_bp {
                train_baseline_bp(&data, &tc, &exec)?
            } else {
                train_pcnet(&data, &tc, &exec)?
            };
            net.save(out)?;
            println!(
                "{} samples, {} corrections ({} skipped), final loss {:.6} -> {}",
                report.plain_samples + report.corrected_samples,
                report.corrections,
                report.skipped_corrections,
                report.epoch_losses.last().copied().unwrap_or(f64::NAN),
                out.display()
            );
            Ok(EXIT_OK)
        }
        Command::Eval {
            config,
            model,
            reference,
            frames,
            report,
        } => {
            let config = load_config(config, cli.threads)?;
            let exec = Exec::with_threads(config.run.threads)?;
            let scene = build_scene(&config)?;
            let net = Network::load(model)?;
            let mass = scene.initial.mass.first().copied().unwrap_or(0.0);
            let reference = read_run_dir(reference, mass)?;
            if reference.is_empty() {
                return Err(Error::invalid("reference directory holds no frames"));
            }
            let mut opts = RunOptions::new(&exec);
            opts.keep_states = true;
            opts.density_metrics = false;
            let result = run(&scene, RunMode::Pcnet, *frames, Some(&net), &opts)?;
            let probe = DensityProbe::new(&scene, &exec)?;
            let comparison = compare_runs(&reference, &result.states, Some(&probe))?;
            write_text(report, &comparison.to_csv())?;
            if let Some(last) = comparison.frames.last() {
                println!(
                    "frame {}: mean position error {:.6}, max {:.6} -> {}",
                    last.frame,
                    last.mean_position_error,
                    last.max_position_error,
                    report.display()
                );
            }
            Ok(truncation_code(result.metrics.truncated))
        }
        Command::Bench {
            config,
            frames,
            report,
            model,
        } => {
            let net = model.as_deref().map(Network::load).transpose()?;
            let mut text = format!("{}\n", BenchRow::CSV_HEADER);
            for path in config {
                let config = load_config(path, cli.threads)?;
                let exec = Exec::with_threads(config.run.threads)?;
                let scene = build_scene(&config)?;
                let row = match &net {
                    Some(net) => bench(&scene, *frames, net, &exec)?,
                    None => bench(&scene, *frames, &timing_model(&scene)?, &exec)?,
                };
                println!("{}", row.to_csv_line());
                text.push_str(&row.to_csv_line());
                text.push('\n');
            }
            write_text(report, &text)?;
            Ok(EXIT_OK)
        }
    }
}

fn truncation_code(t: Option<crate::stepper::Truncation>) -> i32 {
    match t {
        Some(t) => {
            eprintln!(
                "run stopped: frame {} is non-finite at particle {}",
                t.frame, t.particle
            );
            EXIT_INSTABILITY
        }
        None => EXIT_OK,
    }
}

fn capture(config: &Config, frames: usize, out: &Path) -> Result<i32> {
    let exec = Exec::with_threads(config.run.threads)?;
    let scenes = dataset_scenes(config)?;
    let (summary, captures) = capture_dataset(config, &scenes, frames, out, &exec)?;
    for (k, (scene, c)) in scenes.iter().zip(&captures).enumerate() {
        println!(
            "sequence {k}: {} particles, {} sample frames{}",
            scene.fluid_len(),
            c.sample_frames,
            if c.truncated.is_some() { " (truncated)" } else { "" }
        );
    }
    println!(
        "{} sequences, {} records, sha256 {} -> {}",
        summary.sequences,
        summary.records,
        summary.digest,
        out.display()
    );
    Ok(if captures.iter().any(|c| c.truncated.is_some()) {
        EXIT_INSTABILITY
    } else {
        EXIT_OK
    })
}
