use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use super::frame_io::{frame_path, write_frame, Manifest, MANIFEST_NAME};
use super::Scene;
use crate::exec::Exec;
use crate::grid::{NeighborGrid, NeighborLists};
use crate::nn::{ModelMeta, Network};
use crate::physics::PhysicsModel;
use crate::state::FluidState;
use crate::stepper::{run_frames, FrameStepper, Truncation};
use crate::trainer::LearnedStepper;
use crate::{Error, Result};

/// Acceleration source of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    Physics,
    Pcnet,
}

impl FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "physics" => Ok(RunMode::Physics),
            "pcnet" => Ok(RunMode::Pcnet),
            other => Err(Error::invalid(format!("unknown mode {other:?} (physics or pcnet)"))),
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunMode::Physics => "physics",
            RunMode::Pcnet => "pcnet",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrameMetrics {
    pub frame: usize,
    /// Time to produce this frame from the previous one (0 for frame 0).
    pub seconds: f64,
    /// `mean(rho) / rho0 - 1`.
    pub mean_density_error: f64,
    /// Mean of `|rho - rho0| / rho0`.
    pub mean_density_deviation: f64,
    /// Max of `|rho - rho0| / rho0`.
    pub max_density_deviation: f64,
    pub max_speed: f64,
    pub kinetic_energy: f64,
    /// Index-matched position error against a reference run.
    pub mean_position_error: Option<f64>,
    pub max_position_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunMetrics {
    pub mode: RunMode,
    pub fluid_particles: usize,
    pub proxy_particles: usize,
    pub frames: Vec<FrameMetrics>,
    pub truncated: Option<Truncation>,
}

impl RunMetrics {
    /// Mean per-frame time over the produced frames.
    pub fn mean_seconds(&self) -> f64 {
        let produced = &self.frames[1.min(self.frames.len())..];
        if produced.is_empty() {
            return 0.0;
        }
        produced.iter().map(|f| f.seconds).sum::<f64>() / produced.len() as f64
    }

    /// Mean of `f` over frames `from..=to` that exist.
    pub fn mean_over(&self, from: usize, to: usize, f: impl Fn(&FrameMetrics) -> f64) -> Option<f64> {
        let picked: Vec<f64> = self
            .frames
            .iter()
            .filter(|m| m.frame >= from && m.frame <= to)
            .map(f)
            .collect();
        (!picked.is_empty()).then(|| picked.iter().sum::<f64>() / picked.len() as f64)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "frame,seconds,mean_density_error,mean_density_deviation,max_density_deviation,max_speed,kinetic_energy,mean_position_error,max_position_error\n",
        );
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for m in &self.frames {
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{:e},{:e},{},{}\n",
                m.frame,
                m.seconds,
                m.mean_density_error,
                m.mean_density_deviation,
                m.max_density_deviation,
                m.max_speed,
                m.kinetic_energy,
                opt(m.mean_position_error),
                opt(m.max_position_error)
            ));
        }
        out
    }
}

/// Per-run switches.
pub struct RunOptions<'a> {
    pub exec: &'a Exec,
    /// Write frame files and a manifest here.
    pub out_dir: Option<&'a Path>,
    /// Keep every state in memory.
    pub keep_states: bool,
    /// Compute density metrics (outside the timed section).
    pub density_metrics: bool,
    /// Frames to measure position error against.
    pub reference: Option<&'a [FluidState]>,
}

impl<'a> RunOptions<'a> {
    pub fn new(exec: &'a Exec) -> Self {
        Self {
            exec,
            out_dir: None,
            keep_states: false,
            density_metrics: true,
            reference: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub metrics: RunMetrics,
    /// All frames, initial included, when requested.
    pub states: Vec<FluidState>,
    pub last: FluidState,
}

/// Settings a model must have been trained under to drive `scene`.
pub fn scene_model_meta(scene: &Scene) -> Result<ModelMeta> {
    let c = &scene.config;
    let spec = c.binning()?;
    Ok(ModelMeta {
        h: c.sph.h,
        time_step: c.fluid.time_step,
        rest_density: c.fluid.rest_density,
        sound_speed: c.fluid.sound_speed,
        speed_cap: spec.speed_cap(),
        bins: spec.bins() as u32,
    })
}

/// Refuse models trained under different settings.
pub fn check_model(scene: &Scene, net: &Network) -> Result<()> {
    let meta = net
        .meta
        .as_ref()
        .ok_or_else(|| Error::Incompatible("model carries no training metadata".into()))?;
    if let Some(diff) = meta.mismatch(&scene_model_meta(scene)?) {
        return Err(Error::Incompatible(format!(
            "model was trained with different settings ({diff})"
        )));
    }
    if net.input_len() != crate::features::FEATURE_LEN || net.output_len() != 3 {
        return Err(Error::Incompatible(format!(
            "model layer sizes {:?} do not fit",
            net.sizes()
        )));
    }
    Ok(())
}

fn frame_metrics(
    frame: usize,
    state: &FluidState,
    lists: &NeighborLists,
    physics: &PhysicsModel,
    opts: &RunOptions<'_>,
) -> FrameMetrics {
    let mut m = FrameMetrics {
        frame,
        max_speed: state.velocity.iter().map(|v| v.norm()).fold(0.0, f64::max),
        kinetic_energy: state.kinetic_energy(),
        ..Default::default()
    };
    if opts.density_metrics && !state.is_empty() {
        let rho0 = physics.constants.rest_density;
        let rho = physics.densities(state, lists, opts.exec);
        let n = rho.len() as f64;
        m.mean_density_error = rho.iter().sum::<f64>() / n / rho0 - 1.0;
        let dev = rho.iter().map(|r| (r - rho0).abs() / rho0);
        m.mean_density_deviation = dev.clone().sum::<f64>() / n;
        m.max_density_deviation = dev.fold(0.0, f64::max);
    }
    if let Some(reference) = opts.reference.and_then(|r| r.get(frame)) {
        if reference.len() == state.len() && !state.is_empty() {
            let errors = reference
                .position
                .iter()
                .zip(&state.position)
                .map(|(a, b)| (a - b).norm());
            m.mean_position_error = Some(errors.clone().sum::<f64>() / state.len() as f64);
            m.max_position_error = Some(errors.fold(0.0, f64::max));
        }
    }
    m
}

/// Simulate `frames` frames of `scene` with the chosen acceleration source.
pub fn run(
    scene: &Scene,
    mode: RunMode,
    frames: usize,
    model: Option<&Network>,
    opts: &RunOptions<'_>,
) -> Result<RunResult> {
    let physics = scene.physics_model()?;
    let learned;
    let stepper: &dyn FrameStepper = match mode {
        RunMode::Physics => &physics,
        RunMode::Pcnet => {
            let net = model.ok_or_else(|| Error::invalid("pcnet mode needs a model"))?;
            check_model(scene, net)?;
            learned = LearnedStepper {
                net,
                proxy_positions: &scene.proxies.positions,
                spec: scene.config.binning()?,
                time_step: scene.config.fluid.time_step,
            };
            &learned
        }
    };
    let proxy_grid = NeighborGrid::new(Vec::new(), Arc::new(scene.proxies.positions.clone()), scene.kernels.h())?;
    if let Some(dir) = opts.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }

    let mut metrics = Vec::with_capacity(frames + 1);
    // seconds[k] is the time spent producing frame k.
    let mut seconds = vec![0.0];
    let mut states = Vec::new();
    let outcome = run_frames(stepper, &scene.initial, &proxy_grid, frames, opts.exec, |t| {
        metrics.push(frame_metrics(t.frame, t.state, t.lists, &physics, opts));
        seconds.push(t.seconds);
        if let Some(dir) = opts.out_dir {
            write_frame(&frame_path(dir, t.frame), t.frame, t.state)?;
        }
        if opts.keep_states {
            states.push(t.state.clone());
        }
        Ok(())
    })?;
    let last_index = outcome.frames;
    let grid = proxy_grid.rebuild_fluid(outcome.last.position.clone())?;
    metrics.truncate(last_index);
    metrics.push(frame_metrics(
        last_index,
        &outcome.last,
        &grid.neighbor_lists(),
        &physics,
        opts,
    ));
    for m in &mut metrics {
        m.seconds = seconds.get(m.frame).copied().unwrap_or(0.0);
    }
    if let Some(dir) = opts.out_dir {
        write_frame(&frame_path(dir, last_index), last_index, &outcome.last)?;
    }
    if opts.keep_states {
        states.push(outcome.last.clone());
    }

    if let Some(dir) = opts.out_dir {
        let mut manifest = Manifest::default();
        manifest
            .set("config_hash", scene.config.hash())
            .set("seed", scene.config.run.seed)
            .set("mode", mode)
            .set("frames", last_index)
            .set("fluid_particles", scene.fluid_len())
            .set("proxy_particles", scene.proxy_len())
            .set(
                "model_hash",
                model
                    .filter(|_| mode == RunMode::Pcnet)
                    .map_or("none".to_string(), |m| m.hash()),
            );
        if let Some(t) = outcome.truncated {
            manifest
                .set("truncated_at_frame", t.frame)
                .set("truncated_particle", t.particle);
        }
        manifest.write(&dir.join(MANIFEST_NAME))?;
    }

    Ok(RunResult {
        metrics: RunMetrics {
            mode,
            fluid_particles: scene.fluid_len(),
            proxy_particles: scene.proxy_len(),
            frames: metrics,
            truncated: outcome.truncated,
        },
        states,
        last: outcome.last,
    })
}

/// One timing row in the layout of the classic physics-vs-learned table.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub fluid_particles: usize,
    pub proxy_particles: usize,
    pub physics_seconds: f64,
    pub pcnet_seconds: f64,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str =
        "blood particles,proxy particles,all particles,physics s/frame,data-driven s/frame,speed-up";

    pub fn speedup(&self) -> f64 {
        self.physics_seconds / self.pcnet_seconds
    }

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{:.3}",
            self.fluid_particles,
            self.proxy_particles,
            self.fluid_particles + self.proxy_particles,
            self.physics_seconds,
            self.pcnet_seconds,
            self.speedup()
        )
    }
}

/// Time both acceleration sources on the same scene.
pub fn bench(scene: &Scene, frames: usize, model: &Network, exec: &Exec) -> Result<BenchRow> {
    let mut opts = RunOptions::new(exec);
    opts.density_metrics = false;
    let physics = run(scene, RunMode::Physics, frames, None, &opts)?;
    let pcnet = run(scene, RunMode::Pcnet, frames, Some(model), &opts)?;
    Ok(BenchRow {
        fluid_particles: scene.fluid_len(),
        proxy_particles: scene.proxy_len(),
        physics_seconds: physics.metrics.mean_seconds(),
        pcnet_seconds: pcnet.metrics.mean_seconds(),
    })
}

/// Untrained network for timing runs: the output layer is zeroed and the
/// output mean set to gravity, so every particle free-falls. It costs the
/// same per frame as a trained model of the configured size.
pub fn timing_model(scene: &Scene) -> Result<Network> {
    let sizes = scene.config.network.layer_sizes();
    let mut net = Network::init(&sizes, scene.config.run.seed)?;
    let (n_in, n_out) = (sizes[sizes.len() - 2], sizes[sizes.len() - 1]);
    let total = net.params().len();
    net.params_mut()[total - (n_in * n_out + n_out)..].fill(0.0);
    let mut output = crate::nn::Normalization::identity(n_out);
    output.mean = scene.config.fluid.gravity.to_vec();
    net.set_normalization(crate::nn::Normalization::identity(sizes[0]), output)?;
    net.meta = Some(scene_model_meta(scene)?);
    Ok(net)
}
