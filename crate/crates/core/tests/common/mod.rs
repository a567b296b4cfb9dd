#![allow(dead_code)]

use std::path::{Path, PathBuf};

use vascflow::config::Config;

pub fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

/// The small scene with a single short column, cheap enough for unit-scale
/// integration tests.
pub fn tiny_config(frames: usize) -> Config {
    let mut c = Config::load(&config_path("small.toml")).unwrap();
    c.column.height = 0.1;
    c.dataset.column_heights = vec![0.1];
    c.dataset.frames = frames;
    c
}
