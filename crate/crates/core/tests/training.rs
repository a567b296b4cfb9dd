mod common;

use vascflow::driver::{capture_dataset, dataset_scenes};
use vascflow::exec::Exec;
use vascflow::trainer::{train, FrameDataset, RolloutContext, RolloutRestart, TrainConfig, TrainEvent, TrainObserver};

#[derive(Default)]
struct Log {
    plain: Vec<usize>,
    corrected: Vec<(usize, usize, usize)>,
}

impl TrainObserver for Log {
    fn event(&mut self, e: &TrainEvent<'_>) {
        match *e {
            TrainEvent::Plain { epoch: 0, frame, .. } => self.plain.push(frame),
            TrainEvent::Corrected {
                epoch: 0,
                frame,
                start,
                steps,
                ..
            } => self.corrected.push((frame, start, steps)),
            _ => {}
        }
    }
}

fn dataset(frames: usize) -> FrameDataset {
    let config = common::tiny_config(frames);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.bfds");
    let scenes = dataset_scenes(&config).unwrap();
    capture_dataset(&config, &scenes, frames, &path, &Exec::sequential()).unwrap();
    FrameDataset::read(&path).unwrap()
}

fn config(period: Option<usize>, restart: RolloutRestart) -> TrainConfig {
    TrainConfig {
        period,
        epochs: 1,
        learning_rate: 1e-3,
        rollout_restart: restart,
        ..TrainConfig::default()
    }
}

#[test]
fn corrections_follow_the_period() {
    let data = dataset(13);
    let ctx = RolloutContext::for_dataset(&data).unwrap();
    let mut log = Log::default();
    let (_, report) = train(
        &data,
        &config(Some(4), RolloutRestart::SequenceStart),
        &ctx,
        &Exec::sequential(),
        &mut log,
    )
    .unwrap();
    assert_eq!(log.plain, (1..=12).collect::<Vec<_>>());
    assert_eq!(log.corrected, vec![(4, 1, 3), (8, 1, 7), (12, 1, 11)]);
    assert_eq!(report.corrections, 3);
    assert_eq!(report.corrected_samples, 3 * data.sequences[0].frames[0].len());

    let mut log = Log::default();
    train(
        &data,
        &config(Some(4), RolloutRestart::PeriodStart),
        &ctx,
        &Exec::sequential(),
        &mut log,
    )
    .unwrap();
    assert_eq!(log.corrected, vec![(4, 1, 3), (8, 5, 3), (12, 9, 3)]);
}

#[test]
fn long_period_equals_plain_backprop() {
    let data = dataset(8);
    let ctx = RolloutContext::for_dataset(&data).unwrap();
    let exec = Exec::sequential();
    let (a, _) = train(
        &data,
        &config(Some(50), RolloutRestart::SequenceStart),
        &ctx,
        &exec,
        &mut (),
    )
    .unwrap();
    let (b, report) = train(
        &data,
        &config(None, RolloutRestart::SequenceStart),
        &ctx,
        &exec,
        &mut (),
    )
    .unwrap();
    assert_eq!(report.corrections, 0);
    assert_eq!(
        a.params().iter().map(|p| p.to_bits()).collect::<Vec<_>>(),
        b.params().iter().map(|p| p.to_bits()).collect::<Vec<_>>()
    );
}

#[test]
fn training_is_deterministic_and_carries_metadata() {
    let data = dataset(6);
    let ctx = RolloutContext::for_dataset(&data).unwrap();
    let cfg = config(Some(2), RolloutRestart::SequenceStart);
    let (a, ra) = train(&data, &cfg, &ctx, &Exec::sequential(), &mut ()).unwrap();
    let (b, rb) = train(&data, &cfg, &ctx, &Exec::with_threads(2).unwrap(), &mut ()).unwrap();
    assert_eq!(a.params(), b.params());
    assert_eq!(ra, rb);
    let meta = a.meta.expect("trained models carry metadata");
    assert_eq!(meta.h, data.meta.h);
    assert_eq!(meta.time_step, data.meta.time_step);
    assert!(a.params().iter().all(|p| *p == (*p as f32) as f64));
}

#[test]
fn invalid_training_settings_are_rejected() {
    let data = dataset(3);
    let ctx = RolloutContext::for_dataset(&data).unwrap();
    for cfg in [
        config(Some(1), RolloutRestart::SequenceStart),
        TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        },
        TrainConfig {
            momentum: 1.0,
            ..TrainConfig::default()
        },
    ] {
        assert!(train(&data, &cfg, &ctx, &Exec::sequential(), &mut ()).is_err());
    }
}
