//! Learned rollouts against a physics reference on a column height the
//! models never saw. Run `train_pcnet` first.
use vascflow::config::Config;
use vascflow::driver::{build_scene, compare_runs, run, DensityProbe, RunMode, RunOptions};
use vascflow::exec::Exec;
use vascflow::nn::Network;

fn main() -> vascflow::Result<()> {
    let frames = 50;
    let mut config = Config::load(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/small.toml").as_ref())?;
    config.column.height = 0.125;
    let scene = build_scene(&config)?;
    let exec = Exec::with_threads(config.run.threads)?;

    let mut opts = RunOptions::new(&exec);
    opts.keep_states = true;
    let reference = run(&scene, RunMode::Physics, frames, None, &opts)?;
    let probe = DensityProbe::new(&scene, &exec)?;

    let dir = std::env::temp_dir();
    for name in ["small_pcnet.pcn", "small_bp.pcn"] {
        let net = Network::load(&dir.join(name))?;
        let test = run(&scene, RunMode::Pcnet, frames, Some(&net), &opts)?;
        let cmp = compare_runs(&reference.states, &test.states, Some(&probe))?;
        let mean = cmp.frames.iter().skip(1).map(|f| f.mean_position_error).sum::<f64>() / frames as f64;
        println!(
            "{name}: mean position error over {frames} frames {mean:.5} m, final {:.5} m",
            cmp.final_mean_error().unwrap_or(0.0)
        );
        if let Some(t) = test.metrics.truncated {
            println!("  rollout diverged at frame {}", t.frame);
        }
    }
    Ok(())
}
