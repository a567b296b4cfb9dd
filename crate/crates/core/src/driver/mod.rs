//! Scene setup, the simulation loop for both acceleration sources, frame
//! export and run comparison.
mod capture;
mod compare;
mod frame_io;
mod run;
mod scene;

pub use capture::{capture_dataset, dataset_scenes};
pub use compare::{
    compare_runs, Comparison, DensityHistogram, DensityProbe, FrameComparison, HISTOGRAM_BINS, HISTOGRAM_RANGE,
};
pub use frame_io::{
    frame_path, read_frame, read_run_dir, write_frame, Manifest, FRAME_MAGIC, FRAME_VERSION, MANIFEST_NAME,
};
pub use run::{
    bench, check_model, run, scene_model_meta, timing_model, BenchRow, FrameMetrics, RunMetrics, RunMode, RunOptions,
    RunResult,
};
pub use scene::{build_scene, build_scene_with_proxies, column_lattice, column_volume_estimate, sample_vessel, Scene};
