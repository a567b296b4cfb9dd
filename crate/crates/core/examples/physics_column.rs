//! A blood column settling in a capped tube under the SPH solver.
//!
//! cargo run --release --example physics_column [config] [frames]
use std::path::PathBuf;

use vascflow::config::Config;
use vascflow::driver::{build_scene, run, RunMode, RunOptions};
use vascflow::exec::Exec;

fn main() -> vascflow::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/small.toml")));
    let frames: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(120);

    let config = Config::load(&path)?;
    let scene = build_scene(&config)?;
    println!(
        "{} blood particles, {} wall proxies",
        scene.fluid_len(),
        scene.proxy_len()
    );

    let exec = Exec::with_threads(config.run.threads)?;
    let result = run(&scene, RunMode::Physics, frames, None, &RunOptions::new(&exec))?;
    println!(
        "{:>6} {:>12} {:>12} {:>10} {:>12}",
        "frame", "rho/rho0-1", "|drho|/rho0", "max |v|", "KE"
    );
    for m in result.metrics.frames.iter().step_by(10) {
        println!(
            "{:6} {:12.4} {:12.4} {:10.4} {:12.4e}",
            m.frame, m.mean_density_error, m.mean_density_deviation, m.max_speed, m.kinetic_energy
        );
    }
    println!("{:.4} s/frame", result.metrics.mean_seconds());
    Ok(())
}
