//! Capture a small physics dataset, then train the periodic-corrected
//! network and the plain backpropagation baseline from the same seed.
use vascflow::config::Config;
use vascflow::driver::{capture_dataset, dataset_scenes};
use vascflow::exec::Exec;
use vascflow::trainer::{train_baseline_bp, train_pcnet, FrameDataset};

fn main() -> vascflow::Result<()> {
    let config = Config::load(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/small.toml").as_ref())?;
    let exec = Exec::with_threads(config.run.threads)?;
    let dir = tempfile::tempdir().map_err(|e| vascflow::Error::Invalid(e.to_string()))?;
    let path = dir.path().join("small.bfds");

    let scenes = dataset_scenes(&config)?;
    let (summary, _) = capture_dataset(&config, &scenes, config.dataset.frames, &path, &exec)?;
    println!(
        "{} sequences, {} records, sha256 {}",
        summary.sequences, summary.records, summary.digest
    );

    let dataset = FrameDataset::read(&path)?;
    let (pcnet, report) = train_pcnet(&dataset, &config.training, &exec)?;
    println!(
        "pcnet: {} corrections, epoch losses {:?}",
        report.corrections, report.epoch_losses
    );
    let (bp, report) = train_baseline_bp(&dataset, &config.training, &exec)?;
    println!("baseline: epoch losses {:?}", report.epoch_losses);

    let out = std::env::temp_dir();
    pcnet.save(&out.join("small_pcnet.pcn"))?;
    bp.save(&out.join("small_bp.pcn"))?;
    println!("models saved under {}", out.display());
    Ok(())
}
