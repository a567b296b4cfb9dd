use crate::{Mat3, Vec3};

/// Kinematic state of every blood particle at one frame.
///
/// `acceleration` holds the acceleration that produced this frame's
/// velocity (a^n); it is an input feature for the learned stepper.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FluidState {
    pub position: Vec<Vec3>,
    pub velocity: Vec<Vec3>,
    pub acceleration: Vec<Vec3>,
    pub mass: Vec<f64>,
}

impl FluidState {
    pub fn len(&self) -> usize {
        self.position.len()
    }

    pub fn is_empty(&self) -> bool {
        self.position.is_empty()
    }

    /// Round every kinematic quantity to the nearest `f32`.
    ///
    /// Frame files and datasets store `f32`; quantizing at frame boundaries
    /// makes a state read back from disk bitwise identical to the live one.
    pub fn quantize(&mut self) {
        let q = |v: &mut Vec3| v.iter_mut().for_each(|c| *c = *c as f32 as f64);
        self.position.iter_mut().for_each(q);
        self.velocity.iter_mut().for_each(q);
        self.acceleration.iter_mut().for_each(q);
    }

    /// First particle with a non-finite component, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        (0..self.len()).find(|&i| {
            !(self.position[i].iter().all(|c| c.is_finite())
                && self.velocity[i].iter().all(|c| c.is_finite())
                && self.acceleration[i].iter().all(|c| c.is_finite()))
        })
    }

    pub fn total_momentum(&self) -> Vec3 {
        self.velocity
            .iter()
            .zip(&self.mass)
            .fold(Vec3::zeros(), |acc, (v, m)| acc + v * *m)
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.velocity
            .iter()
            .zip(&self.mass)
            .map(|(v, m)| 0.5 * m * v.norm_squared())
            .sum()
    }
}

/// One blood particle with its derived quantities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluidParticle {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub mass: f64,
    pub density: f64,
    pub pressure: f64,
    pub stress: Mat3,
}
