//! Per-frame time of the physics solver and the learned stepper.
//!
//! cargo run --release --example bench [config] [frames]
use std::path::PathBuf;

use vascflow::config::Config;
use vascflow::driver::{bench, build_scene, timing_model, BenchRow};
use vascflow::exec::Exec;

fn main() -> vascflow::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/desk.toml")));
    let frames: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);

    let config = Config::load(&path)?;
    let scene = build_scene(&config)?;
    let model = timing_model(&scene)?;
    let row = bench(&scene, frames, &model, &Exec::with_threads(config.run.threads)?)?;
    println!("{}", BenchRow::CSV_HEADER);
    println!("{}", row.to_csv_line());
    Ok(())
}
