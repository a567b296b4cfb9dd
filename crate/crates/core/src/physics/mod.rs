//! Weakly compressible SPH solver for blood with a fixed proxy wall.
//!
//! One frame reads only the frame-n snapshot: density (fluid plus weighted
//! proxy sums), Tait pressure, SPH velocity gradient, Casson stress, then
//! per-particle acceleration from the fluid force, the proxy coupling force
//! and gravity. The new velocity and position follow from
//!
//! ```text
//! v' = v + a dt
//! x' = x + (v + v') dt / 2
//! ```

mod constants;
mod rheology;
mod solver;

pub use constants::{FidelitySwitches, FluidConstants, ViscosityDenominator};
pub use rheology::{casson_viscosity, compute_pressure, strain_rate, stress_tensor, Stress};
pub use solver::{
    advance, compute_density, coupling_force, fluid_force, integrate, physics_step, velocity_gradient, FieldSnapshot,
    PhysicsModel,
};
