use std::path::Path;
use std::sync::Arc;

use super::{build_scene, Scene};
use crate::config::Config;
use crate::exec::Exec;
use crate::grid::NeighborGrid;
use crate::trainer::{capture_sequence, CaptureSummary, DatasetMeta, DatasetSummary, DatasetWriter};
use crate::Result;

/// One scene per `dataset.column_heights` entry, sharing the sampled wall.
/// An empty list gives the configured column alone.
pub fn dataset_scenes(config: &Config) -> Result<Vec<Scene>> {
    let base = build_scene(config)?;
    if config.dataset.column_heights.is_empty() {
        return Ok(vec![base]);
    }
    config
        .dataset
        .column_heights
        .iter()
        .map(|&height| {
            let mut column = config.column.clone();
            column.height = height;
            base.with_column(column)
        })
        .collect()
}

/// Run physics for each scene and stream every sequence into a dataset.
pub fn capture_dataset(
    config: &Config,
    scenes: &[Scene],
    frames: usize,
    out: &Path,
    exec: &Exec,
) -> Result<(DatasetSummary, Vec<CaptureSummary>)> {
    let mut writer = DatasetWriter::create(out, &DatasetMeta::new(config, "sampled"), scenes.len())?;
    let spec = config.binning()?;
    let mut captures = Vec::with_capacity(scenes.len());
    for (k, scene) in scenes.iter().enumerate() {
        let physics = scene.physics_model()?;
        let grid = NeighborGrid::new(Vec::new(), Arc::new(scene.proxies.positions.clone()), scene.kernels.h())?;
        let summary = capture_sequence(&mut writer, &physics, &scene.initial, &grid, frames, spec, exec)?;
        log::info!(
            "sequence {k}: {} particles, {} sample frames{}",
            scene.fluid_len(),
            summary.sample_frames,
            if summary.truncated.is_some() {
                " (truncated)"
            } else {
                ""
            }
        );
        captures.push(summary);
    }
    Ok((writer.finish()?, captures))
}
