//! Kernel values and gradients, then a hash-grid neighbor query checked
//! against brute force.
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vascflow::grid::build_grid;
use vascflow::kernel::{kernel_grad, kernel_w, KernelFamily, KernelParams};
use vascflow::Vec3;

fn main() -> vascflow::Result<()> {
    let h = 0.05;
    for family in [KernelFamily::Poly6, KernelFamily::Spiky] {
        let params = KernelParams::new(h, family)?;
        println!("{family:?}");
        for q in [0.0, 0.25, 0.5, 0.75, 0.99] {
            let r = Vec3::new(q * h, 0.0, 0.0);
            println!(
                "  r/h = {q:4.2}  W = {:12.4}  dW/dx = {:14.2}",
                kernel_w(&r, &params),
                kernel_grad(&r, &params).x
            );
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let points: Vec<Vec3> = (0..2000)
        .map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen()) * 0.4)
        .collect();
    let grid = build_grid(&points, &[], h)?;
    let lists = grid.neighbor_lists();
    let mut mismatches = 0;
    for (i, p) in points.iter().enumerate() {
        let brute: Vec<u32> = (0..points.len())
            .filter(|&j| j != i && (points[j] - p).norm() < h)
            .map(|j| j as u32)
            .collect();
        if brute != lists.fluid(i) {
            mismatches += 1;
        }
    }
    println!(
        "{} particles, {} neighbor pairs, {} lists differ from brute force",
        points.len(),
        lists.total_fluid_pairs(),
        mismatches
    );
    Ok(())
}
