//! Casson effective viscosity across shear rates and the Tait pressure
//! around rest density.
use vascflow::physics::{casson_viscosity, compute_pressure, FluidConstants};

fn main() {
    let c = FluidConstants::default();
    println!(
        "plastic viscosity {:.3e} Pa s, yield stress {} Pa",
        c.plastic_viscosity(),
        c.yield_stress
    );
    println!("{:>12} {:>14} {:>14}", "D_II", "nu (Pa s)", "Newtonian");
    let newtonian = FluidConstants {
        yield_stress: 0.0,
        ..c.clone()
    };
    for k in -8..=6 {
        let d = 10f64.powi(k);
        println!(
            "{d:12.1e} {:14.6e} {:14.6e}",
            casson_viscosity(d, &c),
            casson_viscosity(d, &newtonian)
        );
    }

    println!("\n{:>10} {:>14} {:>14}", "rho/rho0", "p", "p clamped");
    for ratio in [0.95, 0.99, 1.0, 1.01, 1.05, 1.1] {
        let rho = ratio * c.rest_density;
        println!(
            "{ratio:10.2} {:14.3} {:14.3}",
            compute_pressure(rho, &c, false),
            compute_pressure(rho, &c, true)
        );
    }
}
