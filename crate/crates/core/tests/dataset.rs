mod common;

use sha2::{Digest, Sha256};
use vascflow::driver::{capture_dataset, dataset_scenes};
use vascflow::exec::Exec;
use vascflow::trainer::{DatasetReader, FrameDataset, RECORD_BYTES, RECORD_FLOATS};
use vascflow::Error;

#[test]
fn record_layout_is_35_floats() {
    assert_eq!(RECORD_FLOATS, 35);
    assert_eq!(RECORD_BYTES, 140);
}

#[test]
fn capture_writes_one_record_per_particle_and_sample_frame() {
    let config = common::tiny_config(12);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.bfds");
    let scenes = dataset_scenes(&config).unwrap();
    let (summary, captures) = capture_dataset(&config, &scenes, 12, &path, &Exec::sequential()).unwrap();
    let n = scenes[0].fluid_len() as u64;
    assert_eq!(summary.records, 11 * n);
    assert_eq!(captures[0].sample_frames, 11);

    let mut reader = DatasetReader::open(&path).unwrap();
    assert_eq!(reader.meta().config, config);
    assert_eq!(reader.summarize().unwrap(), summary);

    // Re-encode every decoded record by hand; the digest must not change.
    let mut digest = Sha256::new();
    for f in 0..11 {
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
    assert_eq!(hex::encode(digest.finalize()), summary.digest);

    // Frame 0 is the initial column; the target of frame n is the
    // acceleration stored with frame n + 1.
    let first = reader.read_frame(0, 0).unwrap();
    let initial = &scenes[0].initial;
    let expected: [f32; 3] = initial.position[0].map(|c| c as f32).into();
    assert_eq!(first.position[0], expected);
    let second = reader.read_frame(0, 1).unwrap();
    assert_eq!(first.target, second.acceleration);
}

#[test]
fn dataset_round_trips_through_memory() {
    let config = common::tiny_config(5);
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.bfds"), dir.path().join("b.bfds"));
    let scenes = dataset_scenes(&config).unwrap();
    let (summary, _) = capture_dataset(&config, &scenes, 5, &a, &Exec::sequential()).unwrap();
    let data = FrameDataset::read(&a).unwrap();
    assert_eq!(data.records() as u64, summary.records);
    assert_eq!(data.write(&b).unwrap(), summary);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn damaged_files_are_rejected() {
    let config = common::tiny_config(4);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.bfds");
    let scenes = dataset_scenes(&config).unwrap();
    capture_dataset(&config, &scenes, 4, &path, &Exec::sequential()).unwrap();
    let bytes = std::fs::read(&path).unwrap();

    let cut = dir.path().join("cut.bfds");
    std::fs::write(&cut, &bytes[..bytes.len() - 1]).unwrap();
    assert!(matches!(DatasetReader::open(&cut), Err(Error::Format { .. })));

    let mut bad = bytes.clone();
    bad[4] = 9;
    std::fs::write(&cut, &bad).unwrap();
    let err = DatasetReader::open(&cut).err().unwrap().to_string();
    assert!(err.contains("version 9"), "{err}");

    assert!(matches!(
        DatasetReader::open(&dir.path().join("none")),
        Err(Error::Io { .. })
    ));

    let mut reader = DatasetReader::open(&path).unwrap();
    assert!(matches!(reader.read_frame(0, 3), Err(Error::OutOfRange { .. })));
    assert!(matches!(reader.read_frame(1, 0), Err(Error::OutOfRange { .. })));
}
