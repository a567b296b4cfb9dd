//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fail.
//!
//! `ACCEPTANCE_ONLY=1,4,8` runs a subset. Criteria 9-12 take several
//! minutes each on one core.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use vascflow::boundary::ProxySet;
use vascflow::config::Config;
use vascflow::driver::{
    bench, build_scene, capture_dataset, compare_runs, dataset_scenes, run, BenchRow, RunMode, RunOptions, Scene,
};
use vascflow::exec::Exec;
use vascflow::features::{BinningSpec, FeatureExtractor, FeatureScratch, FEATURE_LEN};
use vascflow::grid::build_grid;
use vascflow::kernel::{kernel_grad, kernel_w, KernelFamily, KernelPair, KernelParams, SphKernels};
use vascflow::nn::{Network, Normalization, Scratch};
use vascflow::physics::{casson_viscosity, FidelitySwitches, FluidConstants, PhysicsModel};
use vascflow::state::FluidState;
use vascflow::trainer::{
    train, train_baseline_bp, train_pcnet, DatasetReader, FrameDataset, RolloutContext, RolloutRestart, SampleFrame,
    TrainConfig, TrainEvent, TrainObserver,
};
use vascflow::Vec3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn scratch_dir() -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Models trained for criterion 9, reused by 10 and 12.
#[derive(Default)]
struct Shared {
    pcnet: Vec<Network>,
    baseline: Vec<Network>,
}

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
const HELD_OUT_HEIGHT: f64 = 0.27;
const ROLLOUT_FRAMES: usize = 50;

fn desk_config() -> Config {
    Config::load(&config_path("desk.toml")).unwrap()
}

fn desk_training() -> TrainConfig {
    TrainConfig {
        rollout_restart: RolloutRestart::PeriodStart,
        ..desk_config().training
    }
}

impl Shared {
    fn ensure_trained(&mut self) {
        if !self.pcnet.is_empty() {
            return;
        }
        let mut config = desk_config();
        config.dataset.frames = 300;
        let exec = Exec::sequential();
        let path = scratch_dir().join("desk300.bfds");
        let scenes = dataset_scenes(&config).unwrap();
        let t = Instant::now();
        capture_dataset(&config, &scenes, config.dataset.frames, &path, &exec).unwrap();
        eprintln!("  captured 5 x 300 frames in {:.0} s", t.elapsed().as_secs_f64());
        let data = FrameDataset::read(&path).unwrap();
        std::fs::remove_file(&path).ok();
        for seed in SEEDS {
            let tc = TrainConfig {
                seed,
                ..desk_training()
            };
            let t = Instant::now();
            self.pcnet.push(train_pcnet(&data, &tc, &exec).unwrap().0);
            self.baseline.push(train_baseline_bp(&data, &tc, &exec).unwrap().0);
            eprintln!("  seed {seed} trained in {:.0} s", t.elapsed().as_secs_f64());
        }
    }
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, extent: f64) -> Vec<Vec3> {
    (0..n)
        .map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen()) * extent)
        .collect()
}

fn brute_force(points: &[Vec3], p: &Vec3, h: f64, skip: Option<usize>) -> Vec<u32> {
    (0..points.len())
        .filter(|&j| Some(j) != skip && (points[j] - p).norm() < h)
        .map(|j| j as u32)
        .collect()
}

fn c1_neighbors(_: &mut Shared) -> Outcome {
    let t = Instant::now();
    let h = 0.1;
    let mut mismatches = 0;
    let mut pairs = 0;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fluid = random_points(&mut rng, 2000, 1.0);
        let proxy = random_points(&mut rng, 500, 1.0);
        let lists = build_grid(&fluid, &proxy, h).unwrap().neighbor_lists();
        for (i, p) in fluid.iter().enumerate() {
            let f = brute_force(&fluid, p, h, Some(i));
            let s = brute_force(&proxy, p, h, None);
            pairs += f.len() + s.len();
            if lists.fluid(i) != f.as_slice() || lists.proxy(i) != s.as_slice() {
                mismatches += 1;
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < 5.0,
        format!("20 scenes x 2000 particles, {pairs} pairs, {mismatches} mismatched lists, {secs:.2} s"),
    )
}

fn c2_kernels(_: &mut Shared) -> Outcome {
    let h = 0.05;
    let mut worst_integral: f64 = 0.0;
    let mut worst_grad: f64 = 0.0;
    for family in [KernelFamily::Poly6, KernelFamily::Spiky] {
        let p = KernelParams::new(h, family).unwrap();
        // Midpoint rule on a Cartesian grid over the bounding cube.
        let n = 120;
        let step = 2.0 * h / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let r = Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * step - Vec3::repeat(h);
                    sum += kernel_w(&r, &p);
                }
            }
        }
        worst_integral = worst_integral.max((sum * step.powi(3) - 1.0).abs());

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let eps = 1e-7 * h;
        for _ in 0..1000 {
            let dir = Vec3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5).normalize();
            let r = dir * (h * rng.gen_range(0.01..0.99));
            let g = kernel_grad(&r, &p);
            let fd = Vec3::from_fn(|a, _| {
                let e = Vec3::from_fn(|b, _| if a == b { eps } else { 0.0 });
                (kernel_w(&(r + e), &p) - kernel_w(&(r - e), &p)) / (2.0 * eps)
            });
            worst_grad = worst_grad.max((g - fd).norm() / g.norm());
        }
    }
    outcome(
        worst_integral < 0.01 && worst_grad < 1e-4,
        format!("max |integral - 1| = {worst_integral:.2e}, max gradient relative error = {worst_grad:.2e}"),
    )
}

fn c3_casson(_: &mut Shared) -> Outcome {
    let newtonian = FluidConstants {
        yield_stress: 0.0,
        ..FluidConstants::default()
    };
    let eta = newtonian.plastic_viscosity();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let exact = (0..100).all(|_| casson_viscosity(10f64.powf(rng.gen_range(-12.0..6.0)), &newtonian) == eta);
    let casson = FluidConstants::default();
    let low = (casson_viscosity(1e-16, &casson) - eta).abs() / eta;
    let finite = std::iter::once(0.0)
        .chain((0..=2200).map(|k| 10f64.powf(-16.0 + k as f64 * 0.01)))
        .all(|d| casson_viscosity(d, &casson).is_finite());
    outcome(
        exact && low < 1e-2 && finite,
        format!("yield 0 exact: {exact}; |nu(1e-16) - eta| / eta = {low:.2e}; finite on [0, 1e6]: {finite}"),
    )
}

fn c4_momentum(_: &mut Shared) -> Outcome {
    let c = FluidConstants {
        gravity: [0.0; 3],
        ..FluidConstants::default()
    };
    let (h, d) = (0.05, 0.025);
    let kernels = SphKernels::new(h, KernelPair::default()).unwrap();
    let model = PhysicsModel::new(
        kernels,
        c.clone(),
        FidelitySwitches::default(),
        Arc::new(ProxySet::default()),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut position = Vec::new();
    for i in 0..10 {
        for j in 0..10 {
            for k in 0..10 {
                position.push(Vec3::new(i as f64, j as f64, k as f64) * d);
            }
        }
    }
    let n = position.len();
    let mut state = FluidState {
        position,
        velocity: (0..n)
            .map(|_| Vec3::new(0.2, 0.1, -0.1) + Vec3::new(rng.gen(), rng.gen(), rng.gen()) * 0.2)
            .collect(),
        acceleration: vec![Vec3::zeros(); n],
        mass: vec![c.rest_density * d * d * d; n],
    };
    let exec = Exec::sequential();
    let p0 = state.total_momentum();
    for frame in 0..100 {
        let lists = build_grid(&state.position, &[], h).unwrap().neighbor_lists();
        state = model.step(&state, &lists, frame, &exec).unwrap();
    }
    let drift = (state.total_momentum() - p0).norm() / p0.norm();
    outcome(
        drift < 1e-6,
        format!("{n} particles, 100 steps, relative momentum drift {drift:.2e}"),
    )
}

fn c5_ballistic(_: &mut Shared) -> Outcome {
    let c = FluidConstants::default();
    let h = 0.05;
    let kernels = SphKernels::new(h, KernelPair::default()).unwrap();
    let model = PhysicsModel::new(
        kernels,
        c.clone(),
        FidelitySwitches::default(),
        Arc::new(ProxySet::default()),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // Particles spaced well beyond h feel gravity only.
    let x0: Vec<Vec3> = (0..8).map(|k| Vec3::new(k as f64 * 10.0 + 1.0, 2.0, 50.0)).collect();
    let v0: Vec<Vec3> = (0..8)
        .map(|_| {
            Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..5.0),
            )
        })
        .collect();
    let mut state = FluidState {
        position: x0.clone(),
        velocity: v0.clone(),
        acceleration: vec![Vec3::zeros(); 8],
        mass: vec![1e-3; 8],
    };
    let exec = Exec::sequential();
    for frame in 0..100 {
        let lists = build_grid(&state.position, &[], h).unwrap().neighbor_lists();
        state = model.step(&state, &lists, frame, &exec).unwrap();
    }
    let t = 100.0 * c.time_step;
    let g = c.gravity();
    let worst = (0..8)
        .map(|i| {
            let x = x0[i] + v0[i] * t + g * (0.5 * t * t);
            let v = v0[i] + g * t;
            ((state.position[i] - x).norm() / x.norm()).max((state.velocity[i] - v).norm() / v.norm())
        })
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-10,
        format!("max relative error after 100 steps {worst:.2e}"),
    )
}

fn c6_gradient(_: &mut Shared) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut net = Network::init(&[23, 5, 5, 5, 3], 6).unwrap();
    for p in net.params_mut() {
        *p += rng.gen_range(-0.1..0.1);
    }
    net.set_normalization(
        Normalization {
            mean: (0..23).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            std: (0..23).map(|_| rng.gen_range(0.5..2.0)).collect(),
        },
        Normalization {
            mean: vec![0.0, 0.0, -9.81],
            std: vec![3.0, 3.0, 4.0],
        },
    )
    .unwrap();
    let x: Vec<f64> = (0..23).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let t: Vec<f64> = (0..3).map(|_| rng.gen_range(-15.0..5.0)).collect();
    let mut grad = Vec::new();
    net.gradient(&x, &t, &mut Scratch::default(), &mut grad).unwrap();
    let eps = 1e-6;
    let mut worst: f64 = 0.0;
    for k in 0..grad.len() {
        let mut plus = net.clone();
        plus.params_mut()[k] += eps;
        let mut minus = net.clone();
        minus.params_mut()[k] -= eps;
        let fd = (plus.loss(&x, &t).unwrap() - minus.loss(&x, &t).unwrap()) / (2.0 * eps);
        // Absolute floor for parameters whose gradient is essentially zero.
        worst = worst.max((grad[k] - fd).abs() / grad[k].abs().max(fd.abs()).max(1e-6));
    }
    outcome(
        worst < 1e-4,
        format!("{} parameters, max relative error {worst:.2e}", grad.len()),
    )
}

fn frame_features(state: &FluidState, proxies: &[Vec3], spec: BinningSpec, h: f64) -> Vec<[f64; FEATURE_LEN]> {
    let grid = build_grid(&state.position, proxies, h).unwrap();
    let lists = grid.neighbor_lists();
    let ex = FeatureExtractor {
        state,
        proxy_positions: proxies,
        spec,
    };
    let mut scratch = FeatureScratch::default();
    (0..state.len())
        .map(|i| ex.extract(i, lists.fluid(i), lists.proxy(i), &mut scratch).0)
        .collect()
}

fn c7_invariances(_: &mut Shared) -> Outcome {
    let h = 0.05;
    let spec = BinningSpec::new(10, h, 2.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut translation, mut velocity, mut permutation, mut length) = (0.0f64, 0.0f64, 0usize, 0usize);
    let rel = |a: &[[f64; FEATURE_LEN]], b: &[[f64; FEATURE_LEN]]| {
        a.iter()
            .zip(b)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs() / u.abs().max(1.0)))
            .fold(0.0, f64::max)
    };
    for _ in 0..1000 {
        let n = rng.gen_range(20..80);
        let m = rng.gen_range(0..40);
        let state = FluidState {
            position: random_points(&mut rng, n, 0.15),
            velocity: (0..n)
                .map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen()) - Vec3::repeat(0.5))
                .collect(),
            acceleration: (0..n)
                .map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen()) * 20.0)
                .collect(),
            mass: vec![1.0; n],
        };
        let proxies = random_points(&mut rng, m, 0.15);
        let base = frame_features(&state, &proxies, spec, h);
        length += base.iter().filter(|f| f.len() != FEATURE_LEN).count();

        let shift = Vec3::new(
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        );
        let mut moved = state.clone();
        moved.position.iter_mut().for_each(|p| *p += shift);
        let moved_proxies: Vec<Vec3> = proxies.iter().map(|p| p + shift).collect();
        translation = translation.max(rel(&base, &frame_features(&moved, &moved_proxies, spec, h)));

        let drift = Vec3::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let mut drifting = state.clone();
        drifting.velocity.iter_mut().for_each(|v| *v += drift);
        velocity = velocity.max(rel(&base, &frame_features(&drifting, &proxies, spec, h)));

        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let pick = |v: &Vec<Vec3>| order.iter().map(|&k| v[k]).collect::<Vec<_>>();
        let permuted = FluidState {
            position: pick(&state.position),
            velocity: pick(&state.velocity),
            acceleration: pick(&state.acceleration),
            mass: vec![1.0; n],
        };
        let mut shuffled_proxies = proxies.clone();
        shuffled_proxies.reverse();
        let perm = frame_features(&permuted, &shuffled_proxies, spec, h);
        permutation += order
            .iter()
            .enumerate()
            .filter(|&(new, &old)| perm[new].map(f64::to_bits) != base[old].map(f64::to_bits))
            .count();
    }
    outcome(
        translation <= 1e-9 && velocity <= 1e-9 && permutation == 0 && length == 0,
        format!(
            "1000 frames: translation {translation:.1e}, uniform velocity {velocity:.1e}, \
             {permutation} permutation mismatches, {length} wrong lengths"
        ),
    )
}

/// Events as seen by the trainer, for comparison with the reference.
#[derive(Default)]
struct Recorder {
    plain: Vec<usize>,
    corrected: Vec<(usize, usize, Vec<[u64; FEATURE_LEN]>, Vec<[f32; 3]>)>,
}

impl TrainObserver for Recorder {
    fn event(&mut self, e: &TrainEvent<'_>) {
        match e {
            TrainEvent::Plain { frame, .. } => self.plain.push(*frame),
            TrainEvent::Corrected {
                frame,
                start,
                features,
                targets,
                ..
            } => self.corrected.push((
                *frame,
                *start,
                features.iter().map(|f| f.0.map(f64::to_bits)).collect(),
                targets.to_vec(),
            )),
            TrainEvent::Skipped { frame, .. } => panic!("toy rollout diverged at frame {frame}"),
        }
    }
}

fn widen(v: &[f32; 3]) -> Vec3 {
    Vec3::new(v[0] as f64, v[1] as f64, v[2] as f64)
}

fn sgd(net: &mut Network, x: &[f64], t: &[f64], lr: f64, scratch: &mut Scratch, grad: &mut Vec<f64>) {
    net.gradient(x, t, scratch, grad).unwrap();
    for (p, g) in net.params_mut().iter_mut().zip(grad.iter()) {
        *p -= lr * g;
    }
}

/// Independent implementation of the periodic-corrected schedule on one
/// sequence: supervised update on every frame; on every `a`-th frame, roll
/// the current network out from the first frame to this one and train the
/// predicted features against this frame's physics targets.
fn reference_training(
    frames: &[SampleFrame],
    a: usize,
    sizes: &[usize],
    seed: u64,
    lr: f64,
    norms: (Normalization, Normalization),
    ctx: &RolloutContext,
) -> (Network, Recorder) {
    let mut net = Network::init(sizes, seed).unwrap();
    net.set_normalization(norms.0, norms.1).unwrap();
    let mut scratch = Scratch::default();
    let mut grad = Vec::new();
    let mut rec = Recorder::default();
    for i in 1..=frames.len() {
        let frame = &frames[i - 1];
        for p in 0..frame.len() {
            let x: Vec<f64> = frame.features[p].iter().map(|&v| v as f64).collect();
            sgd(
                &mut net,
                &x,
                widen(&frame.target[p]).as_slice(),
                lr,
                &mut scratch,
                &mut grad,
            );
        }
        rec.plain.push(i);
        if i % a != 0 {
            continue;
        }
        let first = &frames[0];
        let mut x: Vec<Vec3> = first.position.iter().map(widen).collect();
        let mut v: Vec<Vec3> = first.velocity.iter().map(widen).collect();
        let mut acc: Vec<Vec3> = first.acceleration.iter().map(widen).collect();
        let quantize = |u: Vec3| u.map(|c| c as f32 as f64);
        let features_of = |x: &[Vec3], v: &[Vec3], acc: &[Vec3]| {
            let state = FluidState {
                position: x.to_vec(),
                velocity: v.to_vec(),
                acceleration: acc.to_vec(),
                mass: vec![ctx.mass; x.len()],
            };
            frame_features(&state, &ctx.proxies.positions, ctx.spec, ctx.proxy_grid.h())
        };
        for _ in 1..i {
            let feats = features_of(&x, &v, &acc);
            for p in 0..x.len() {
                let a_new = net.predict(&feats[p], &mut scratch).unwrap();
                let v_new = v[p] + a_new * ctx.time_step;
                let x_new = x[p] + (v[p] + v_new) * (0.5 * ctx.time_step);
                x[p] = quantize(x_new);
                v[p] = quantize(v_new);
                acc[p] = quantize(a_new);
            }
        }
        let feats = features_of(&x, &v, &acc);
        for (p, f) in feats.iter().enumerate() {
            sgd(
                &mut net,
                f,
                widen(&frame.target[p]).as_slice(),
                lr,
                &mut scratch,
                &mut grad,
            );
        }
        rec.corrected.push((
            i,
            1,
            feats.iter().map(|f| f.map(f64::to_bits)).collect(),
            frame.target.clone(),
        ));
    }
    net.quantize_params();
    (net, rec)
}

fn c8_periodic_correction(_: &mut Shared) -> Outcome {
    let mut config = Config::load(&config_path("small.toml")).unwrap();
    config.column.height = 0.1;
    config.dataset.column_heights = vec![0.1];
    let exec = Exec::sequential();
    let path = scratch_dir().join("toy.bfds");
    let scenes = dataset_scenes(&config).unwrap();
    capture_dataset(&config, &scenes, 21, &path, &exec).unwrap();
    let data = FrameDataset::read(&path).unwrap();
    std::fs::remove_file(&path).ok();
    let frames = &data.sequences[0].frames;
    let ctx = RolloutContext::for_dataset(&data).unwrap();

    let tc = TrainConfig {
        period: Some(5),
        epochs: 1,
        learning_rate: 1e-3,
        momentum: 0.0,
        seed: 8,
        rollout_restart: RolloutRestart::SequenceStart,
    };
    let mut seen = Recorder::default();
    let (trained, _) = train(&data, &tc, &ctx, &exec, &mut seen).unwrap();

    // The reference fits its own normalization statistics.
    let stats = |pick: &dyn Fn(&SampleFrame, usize) -> Vec<f64>, len: usize| {
        let rows: Vec<Vec<f64>> = frames
            .iter()
            .flat_map(|f| (0..f.len()).map(move |p| pick(f, p)))
            .collect();
        let n = rows.len() as f64;
        let mean: Vec<f64> = (0..len).map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / n).collect();
        let std = (0..len)
            .map(|k| {
                (rows.iter().map(|r| (r[k] - mean[k]).powi(2)).sum::<f64>() / n)
                    .sqrt()
                    .max(1e-8)
            })
            .collect();
        Normalization { mean, std }
    };
    let input = stats(&|f, p| f.features[p].iter().map(|&v| v as f64).collect(), FEATURE_LEN);
    let output = stats(&|f, p| f.target[p].iter().map(|&v| v as f64).collect(), 3);
    let norm_close = |a: &Normalization, b: &Normalization| {
        a.mean
            .iter()
            .chain(&a.std)
            .zip(b.mean.iter().chain(&b.std))
            .all(|(x, y)| (x - y).abs() <= 1e-9 * x.abs().max(1.0))
    };
    let norms_agree = norm_close(&input, &trained.input_norm) && norm_close(&output, &trained.output_norm);
    // Use the trainer's exact statistics so parameter paths can match bitwise.
    let sizes = data.meta.config.network.layer_sizes();
    let (reference, expected) = reference_training(
        frames,
        5,
        &sizes,
        8,
        1e-3,
        (trained.input_norm.clone(), trained.output_norm.clone()),
        &ctx,
    );

    let points: Vec<usize> = seen.corrected.iter().map(|c| c.0).collect();
    let points_match =
        points == expected.corrected.iter().map(|c| c.0).collect::<Vec<_>>() && points == [5, 10, 15, 20];
    let pairings_match = seen.corrected == expected.corrected;
    let plain_match = seen.plain == expected.plain;
    let params_match = trained.params() == reference.params();

    let long = TrainConfig {
        period: Some(25),
        ..tc.clone()
    };
    let (a, _) = train(&data, &long, &ctx, &exec, &mut ()).unwrap();
    let (b, _) = train(&data, &tc.baseline(), &ctx, &exec, &mut ()).unwrap();
    let bitwise = a
        .params()
        .iter()
        .map(|p| p.to_bits())
        .eq(b.params().iter().map(|p| p.to_bits()));

    outcome(
        points_match && pairings_match && plain_match && params_match && norms_agree && bitwise,
        format!(
            "injection points {points:?}; pairings match: {pairings_match}; supervised frames match: {plain_match}; \
             parameters match reference: {params_match}; normalization agrees: {norms_agree}; \
             a > length equals baseline bitwise: {bitwise}"
        ),
    )
}

fn held_out_scene() -> Scene {
    let mut config = desk_config();
    config.column.height = HELD_OUT_HEIGHT;
    build_scene(&config).unwrap()
}

/// Mean over frames 1..=N of the mean per-particle position error.
fn rollout_error(scene: &Scene, reference: &[FluidState], net: &Network, exec: &Exec) -> f64 {
    let mut opts = RunOptions::new(exec);
    opts.keep_states = true;
    opts.density_metrics = false;
    let result = run(scene, RunMode::Pcnet, ROLLOUT_FRAMES, Some(net), &opts).unwrap();
    if result.metrics.truncated.is_some() {
        return f64::INFINITY;
    }
    let cmp = compare_runs(reference, &result.states, None).unwrap();
    cmp.frames[1..].iter().map(|f| f.mean_position_error).sum::<f64>() / ROLLOUT_FRAMES as f64
}

fn c9_rollout_stability(shared: &mut Shared) -> Outcome {
    let t = Instant::now();
    shared.ensure_trained();
    let exec = Exec::sequential();
    let scene = held_out_scene();
    let mut opts = RunOptions::new(&exec);
    opts.keep_states = true;
    let reference = run(&scene, RunMode::Physics, ROLLOUT_FRAMES, None, &opts)
        .unwrap()
        .states;
    let pc: Vec<f64> = shared
        .pcnet
        .iter()
        .map(|n| rollout_error(&scene, &reference, n, &exec))
        .collect();
    let bp: Vec<f64> = shared
        .baseline
        .iter()
        .map(|n| rollout_error(&scene, &reference, n, &exec))
        .collect();
    let (mp, mb) = (median(pc.clone()), median(bp.clone()));
    let fmt = |v: &[f64]| v.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>().join(" ");
    outcome(
        mp <= mb,
        format!(
            "held-out column of {} particles, {ROLLOUT_FRAMES}-frame mean position error: median pcnet {mp:.5} m vs \
             baseline {mb:.5} m (pcnet [{}], baseline [{}]), {:.0} s",
            scene.fluid_len(),
            fmt(&pc),
            fmt(&bp),
            t.elapsed().as_secs_f64()
        ),
    )
}

fn c10_speedup(shared: &mut Shared) -> Outcome {
    shared.ensure_trained();
    let exec = Exec::sequential();
    let scene = build_scene(&Config::load(&config_path("large.toml")).unwrap()).unwrap();
    let row = bench(&scene, 10, &shared.pcnet[0], &exec).unwrap();
    let report = scratch_dir().join("bench.csv");
    std::fs::write(&report, format!("{}\n{}\n", BenchRow::CSV_HEADER, row.to_csv_line())).unwrap();
    outcome(
        row.speedup() >= 2.0,
        format!(
            "{} blood + {} proxy particles: physics {:.4} s/frame, pcnet {:.4} s/frame, speed-up {:.2}x ({})",
            row.fluid_particles,
            row.proxy_particles,
            row.physics_seconds,
            row.pcnet_seconds,
            row.speedup(),
            report.display()
        ),
    )
}

fn c11_capacity(_: &mut Shared) -> Outcome {
    let t = Instant::now();
    let mut config = Config::load(&config_path("large.toml")).unwrap();
    config.dataset.column_heights.clear();
    let exec = Exec::sequential();
    let scenes = dataset_scenes(&config).unwrap();
    let particles = scenes[0].fluid_len();
    let path = scratch_dir().join("large800.bfds");
    let (summary, captures) = capture_dataset(&config, &scenes, 800, &path, &exec).unwrap();

    // Decode every frame and re-encode it by hand.
    let mut reader = DatasetReader::open(&path).unwrap();
    let mut digest = Sha256::new();
    let entry = reader.sequences()[0];
    let first = reader.read_frame(0, 0).unwrap();
    let initial = &scenes[0].initial;
    let frame0 = first.len() == initial.len()
        && (0..first.len()).all(|i| widen(&first.position[i]) == initial.position[i].map(|c| c as f32 as f64));
    for f in 0..entry.frames as usize {
        let frame = reader.read_frame(0, f).unwrap();
        for i in 0..frame.len() {
            let floats = frame.position[i]
                .iter()
                .chain(&frame.velocity[i])
                .chain(&frame.acceleration[i])
                .chain(&frame.features[i])
                .chain(&frame.target[i]);
            for v in floats {
                digest.update(v.to_le_bytes());
            }
        }
    }
    let reencoded = hex::encode(digest.finalize());
    let bytes = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
    std::fs::remove_file(&path).ok();
    let expected = 799 * 16000;
    outcome(
        particles == 16000
            && captures[0].truncated.is_none()
            && summary.records == expected
            && reader.records() == expected
            && reencoded == summary.digest
            && frame0,
        format!(
            "{particles} particles, {} records (expected {expected}), {:.2} GB, decoded digest matches: {}, \
             frame 0 equals initial state: {frame0}, {:.0} s",
            summary.records,
            bytes as f64 / 1e9,
            reencoded == summary.digest,
            t.elapsed().as_secs_f64()
        ),
    )
}

fn c12_density(shared: &mut Shared) -> Outcome {
    shared.ensure_trained();
    let exec = Exec::sequential();
    let scene = build_scene(&desk_config()).unwrap();
    let opts = RunOptions::new(&exec);
    let physics = run(&scene, RunMode::Physics, 200, None, &opts).unwrap().metrics;
    let settled = physics.mean_over(150, 200, |m| m.mean_density_error).unwrap();
    let pcnet = run(&scene, RunMode::Pcnet, 200, Some(&shared.pcnet[0]), &opts)
        .unwrap()
        .metrics;
    let dev = |m: &vascflow::driver::RunMetrics| m.mean_over(0, 200, |f| f.mean_density_deviation).unwrap();
    let (dp, dn) = (dev(&physics), dev(&pcnet));
    outcome(
        settled.abs() <= 0.10 && pcnet.truncated.is_none() && pcnet.frames.len() == 201 && dn <= 2.0 * dp,
        format!(
            "physics mean density over frames 150-200: {:+.2}% of rest; mean |deviation| over 200 frames: \
             physics {:.2}%, pcnet {:.2}%{}",
            100.0 * settled,
            100.0 * dp,
            100.0 * dn,
            if pcnet.truncated.is_some() {
                " (pcnet diverged)"
            } else {
                ""
            }
        ),
    )
}

type Criterion = (usize, &'static str, fn(&mut Shared) -> Outcome);

const CRITERIA: [Criterion; 12] = [
    (1, "neighbor search vs brute force", c1_neighbors),
    (2, "kernel normalization and gradients", c2_kernels),
    (3, "Casson limits", c3_casson),
    (4, "momentum conservation", c4_momentum),
    (5, "ballistic integration", c5_ballistic),
    (6, "network gradient check", c6_gradient),
    (7, "feature invariances", c7_invariances),
    (8, "periodic-corrected schedule", c8_periodic_correction),
    (9, "rollout stability", c9_rollout_stability),
    (10, "speed-up", c10_speedup),
    (11, "dataset capacity", c11_capacity),
    (12, "density plausibility", c12_density),
];

fn main() {
    let only: Option<BTreeSet<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut shared = Shared::default();
    let mut failed = Vec::new();
    for (id, name, check) in CRITERIA {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t = Instant::now();
        let result = check(&mut shared);
        println!(
            "criterion {id:2} {name}: {} ({:.1} s) {}",
            if result.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            result.detail
        );
        if !result.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
