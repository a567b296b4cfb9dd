//! The 23 per-particle features for the initial frame of a scene.
use std::sync::Arc;

use vascflow::config::Config;
use vascflow::driver::build_scene;
use vascflow::exec::Exec;
use vascflow::features::{index, FEATURE_LEN};
use vascflow::grid::NeighborGrid;
use vascflow::trainer::state_features;

const NAMES: [&str; FEATURE_LEN] = [
    "a.x",
    "a.y",
    "a.z",
    "n_fluid",
    "dis.x",
    "dis.y",
    "dis.z",
    "rv.x",
    "rv.y",
    "rv.z",
    "var |dis|",
    "var |rv|",
    "skew |dis|",
    "skew |rv|",
    "kurt |dis|",
    "kurt |rv|",
    "n_proxy",
    "pdis.x",
    "pdis.y",
    "pdis.z",
    "var |pdis|",
    "skew |pdis|",
    "kurt |pdis|",
];

fn main() -> vascflow::Result<()> {
    let config = Config::load(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/small.toml").as_ref())?;
    let scene = build_scene(&config)?;
    let grid = NeighborGrid::new(Vec::new(), Arc::new(scene.proxies.positions.clone()), scene.kernels.h())?;
    let features = state_features(&scene.initial, &grid, config.binning()?, &Exec::sequential())?;

    // A particle touching the wall, if any, and one in the bulk.
    let wall = features.iter().position(|f| f.0[index::PROXY_COUNT] > 0.0);
    let bulk = features
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0[index::FLUID_COUNT].total_cmp(&b.1 .0[index::FLUID_COUNT]))
        .map(|(i, _)| i);
    for (label, i) in [("near wall", wall), ("bulk", bulk)] {
        let Some(i) = i else { continue };
        println!("particle {i} ({label})");
        for (name, v) in NAMES.iter().zip(features[i].as_slice()) {
            println!("  {name:>12} {v:12.5}");
        }
    }
    Ok(())
}
