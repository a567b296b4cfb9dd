//! Sample a capped tube and a triangle mesh into weighted proxy particles
//! and save the tube's proxies.
use std::path::Path;

use vascflow::boundary::{parse_obj, read_proxies, sample_mesh, sample_tube, write_proxies, ProxySet, TubeParams};
use vascflow::kernel::{KernelPair, SphKernels};
use vascflow::Vec3;

fn summarize(name: &str, proxies: &ProxySet) {
    let n = proxies.len() as f64;
    let mean = proxies.volumes.iter().sum::<f64>() / n;
    let min = proxies.volumes.iter().copied().fold(f64::INFINITY, f64::min);
    let max = proxies.volumes.iter().copied().fold(0.0, f64::max);
    println!(
        "{name}: {} proxies, volume mean {mean:.3e} (min {min:.3e}, max {max:.3e})",
        proxies.len()
    );
}

fn main() -> vascflow::Result<()> {
    let (h, spacing, rho0) = (0.05, 0.025, 1060.0);
    let kernels = SphKernels::new(h, KernelPair::default())?;

    let tube = TubeParams::straight(Vec3::new(-0.4, 0.0, 0.0), Vec3::new(0.4, 0.0, 0.0), 0.32).capped();
    let tube_proxies = ProxySet::from_positions(sample_tube(&tube, spacing)?, &kernels, rho0)?;
    summarize("tube", &tube_proxies);

    // A unit-ish box given inline as OBJ.
    let obj = "\
v 0 0 0\nv 0.3 0 0\nv 0.3 0.3 0\nv 0 0.3 0\nv 0 0 0.3\nv 0.3 0 0.3\nv 0.3 0.3 0.3\nv 0 0.3 0.3
f 1 3 2\nf 1 4 3\nf 5 6 7\nf 5 7 8\nf 1 2 6\nf 1 6 5\nf 2 3 7\nf 2 7 6\nf 3 4 8\nf 3 8 7\nf 4 1 5\nf 4 5 8\n";
    let mesh = parse_obj(obj, Path::new("box.obj"))?;
    let mesh_proxies = ProxySet::from_positions(sample_mesh(&mesh, spacing, 1)?, &kernels, rho0)?;
    println!("box area {:.3} m^2", mesh.area());
    summarize("box", &mesh_proxies);

    let path = std::env::temp_dir().join("vascflow_tube_proxies.bin");
    write_proxies(&path, &tube_proxies.positions, &tube_proxies.weights)?;
    let (positions, _) = read_proxies(&path)?;
    println!("wrote {} proxies to {}", positions.len(), path.display());
    Ok(())
}
