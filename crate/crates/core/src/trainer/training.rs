use std::sync::Arc;

use super::dataset::FrameDataset;
use super::rollout::{rollout_last, state_features, LearnedStepper};
use super::{RolloutRestart, TrainConfig};
use crate::boundary::ProxySet;
use crate::driver::sample_vessel;
use crate::exec::Exec;
use crate::features::{BinningSpec, FeatureVector, FEATURE_LEN};
use crate::grid::NeighborGrid;
use crate::kernel::SphKernels;
use crate::nn::{ModelMeta, Network, Normalization, Sgd};
use crate::{Error, Result, Vec3};

/// What the trainer did, in order. Frames are 1-based positions within a
/// sequence: frame `i` is sample frame `i - 1`.
#[derive(Clone, Copy, Debug)]
pub enum TrainEvent<'a> {
    /// Supervised samples of frame `frame` were trained.
    Plain {
        epoch: usize,
        sequence: usize,
        frame: usize,
    },
    /// A correction at frame `frame`: the rollout started at `start` and ran
    /// `steps` frames; each predicted feature vector was paired with the
    /// physics target of `frame`.
    Corrected {
        epoch: usize,
        sequence: usize,
        frame: usize,
        start: usize,
        steps: usize,
        features: &'a [FeatureVector],
        targets: &'a [[f32; 3]],
    },
    /// The correction rollout diverged; no corrected samples.
    Skipped {
        epoch: usize,
        sequence: usize,
        frame: usize,
    },
}

pub trait TrainObserver {
    fn event(&mut self, event: &TrainEvent<'_>);
}

impl TrainObserver for () {
    fn event(&mut self, _: &TrainEvent<'_>) {}
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    /// Mean pre-update loss of the supervised samples, per epoch.
    pub epoch_losses: Vec<f64>,
    pub plain_samples: usize,
    pub corrected_samples: usize,
    pub corrections: usize,
    pub skipped_corrections: usize,
}

/// Everything rollouts need besides the network.
#[derive(Clone, Debug)]
pub struct RolloutContext {
    pub proxies: Arc<ProxySet>,
    pub proxy_grid: NeighborGrid,
    pub spec: BinningSpec,
    pub time_step: f64,
    pub mass: f64,
}

impl RolloutContext {
    /// Rebuild the vessel described by the dataset's configuration.
    pub fn for_dataset(dataset: &FrameDataset) -> Result<Self> {
        let config = &dataset.meta.config;
        let kernels = SphKernels::new(config.sph.h, config.sph.kernels)?;
        let proxies = ProxySet::from_positions(sample_vessel(config)?, &kernels, config.fluid.rest_density)?;
        Self::new(
            Arc::new(proxies),
            config.binning()?,
            config.sph.h,
            config.fluid.time_step,
            dataset.meta.particle_mass(),
        )
    }

    pub fn new(proxies: Arc<ProxySet>, spec: BinningSpec, h: f64, time_step: f64, mass: f64) -> Result<Self> {
        let proxy_grid = NeighborGrid::new(Vec::new(), Arc::new(proxies.positions.clone()), h)?;
        Ok(Self {
            proxies,
            proxy_grid,
            spec,
            time_step,
            mass,
        })
    }

    pub fn stepper<'a>(&'a self, net: &'a Network) -> LearnedStepper<'a> {
        LearnedStepper {
            net,
            proxy_positions: &self.proxies.positions,
            spec: self.spec,
            time_step: self.time_step,
        }
    }
}

/// Z-score statistics of every supervised sample in the dataset.
pub fn fit_normalization(dataset: &FrameDataset) -> Result<(Normalization, Normalization)> {
    let frames = || dataset.sequences.iter().flat_map(|s| &s.frames);
    let input = Normalization::fit(
        FEATURE_LEN,
        frames().flat_map(|f| &f.features).map(|v| v.map(f64::from)),
    )?;
    let output = Normalization::fit(3, frames().flat_map(|f| &f.target).map(|v| v.map(f64::from)))?;
    Ok((input, output))
}

/// Train with periodic corrections as configured. `config.period = None`
/// gives plain backpropagation on adjacent-frame pairs.
pub fn train(
    dataset: &FrameDataset,
    config: &TrainConfig,
    context: &RolloutContext,
    exec: &Exec,
    observer: &mut dyn TrainObserver,
) -> Result<(Network, TrainReport)> {
    config.validate()?;
    if dataset.records() == 0 {
        return Err(Error::invalid("dataset has no samples"));
    }
    let meta_config = &dataset.meta.config;
    let mut net = Network::init(&meta_config.network.layer_sizes(), config.seed)?;
    let (input, output) = fit_normalization(dataset)?;
    net.set_normalization(input, output)?;
    net.meta = Some(ModelMeta {
        h: meta_config.sph.h,
        time_step: meta_config.fluid.time_step,
        rest_density: meta_config.fluid.rest_density,
        sound_speed: meta_config.fluid.sound_speed,
        speed_cap: context.spec.speed_cap(),
        bins: context.spec.bins() as u32,
    });

    let mut opt = Sgd::new(config.learning_rate, config.momentum)?;
    let mut report = TrainReport::default();
    for epoch in 0..config.epochs {
        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;
        for (s, seq) in dataset.sequences.iter().enumerate() {
            for i in 1..=seq.frames.len() {
                let frame = &seq.frames[i - 1];
                for p in 0..frame.len() {
                    let target = frame.target(p);
                    loss_sum += opt.step(&mut net, &frame.feature(p), target.as_slice())?;
                    loss_count += 1;
                }
                report.plain_samples += frame.len();
                observer.event(&TrainEvent::Plain {
                    epoch,
                    sequence: s,
                    frame: i,
                });

                let Some(a) = config.period else { continue };
                if i % a != 0 {
                    continue;
                }
                let start = match config.rollout_restart {
                    RolloutRestart::SequenceStart => 1,
                    RolloutRestart::PeriodStart => i + 1 - a,
                };
                let steps = i - start;
                let initial = seq.frames[start - 1].state(context.mass);
                let stepper = context.stepper(&net);
                let (predicted, truncated) = rollout_last(&stepper, &initial, &context.proxy_grid, steps, exec)?;
                if truncated.is_some() {
                    report.skipped_corrections += 1;
                    observer.event(&TrainEvent::Skipped {
                        epoch,
                        sequence: s,
                        frame: i,
                    });
                    continue;
                }
                let features = state_features(&predicted, &context.proxy_grid, context.spec, exec)?;
                observer.event(&TrainEvent::Corrected {
                    epoch,
                    sequence: s,
                    frame: i,
                    start,
                    steps,
                    features: &features,
                    targets: &frame.target,
                });
                for (p, f) in features.iter().enumerate() {
                    let target = frame.target(p);
                    opt.step(&mut net, f.as_slice(), target.as_slice())?;
                }
                report.corrections += 1;
                report.corrected_samples += features.len();
            }
        }
        let mean = loss_sum / loss_count.max(1) as f64;
        log::info!("epoch {epoch}: mean loss {mean:.6}");
        report.epoch_losses.push(mean);
    }
    net.quantize_params();
    Ok((net, report))
}

/// Periodic-corrected training.
pub fn train_pcnet(dataset: &FrameDataset, config: &TrainConfig, exec: &Exec) -> Result<(Network, TrainReport)> {
    let context = RolloutContext::for_dataset(dataset)?;
    train(dataset, config, &context, exec, &mut ())
}

/// The same pipeline with corrections disabled.
pub fn train_baseline_bp(dataset: &FrameDataset, config: &TrainConfig, exec: &Exec) -> Result<(Network, TrainReport)> {
    let context = RolloutContext::for_dataset(dataset)?;
    train(dataset, &config.baseline(), &context, exec, &mut ())
}

/// Mean per-particle position error between two equally sized states.
pub fn mean_position_error(a: &[Vec3], b: &[Vec3]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).sum::<f64>() / a.len() as f64
}
