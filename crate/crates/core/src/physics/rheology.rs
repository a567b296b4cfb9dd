//! Equation of state and Casson rheology.

use super::FluidConstants;
use crate::Mat3;

/// Below this shear rate the Casson viscosity is replaced by its limit.
const SHEAR_RATE_FLOOR: f64 = 1e-150;

/// Tait equation of state, optionally clamped at zero from below.
pub fn compute_pressure(density: f64, c: &FluidConstants, clamp_negative: bool) -> f64 {
    let ratio = density / c.rest_density;
    let powered = if c.tait_exponent.fract() == 0.0 && c.tait_exponent <= 16.0 {
        ratio.powi(c.tait_exponent as i32)
    } else {
        ratio.powf(c.tait_exponent)
    };
    let p = c.rest_density * c.sound_speed * c.sound_speed / c.tait_exponent * (powered - 1.0);
    if clamp_negative {
        p.max(0.0)
    } else {
        p
    }
}

/// Effective Casson viscosity as a function of the second invariant of the
/// strain rate.
///
/// With `x = sqrt(2 D)` and `eta` the plastic viscosity:
///
/// ```text
/// nu(D) = [ sqrt(eta) sqrt(x) + sqrt(tau_y) (1 - exp(-n x)) ]^2 / x
/// ```
///
/// The exponential factor keeps `nu` bounded as the shear rate vanishes;
/// the limit there is `eta`.
pub fn casson_viscosity(second_invariant: f64, c: &FluidConstants) -> f64 {
    let eta = c.plastic_viscosity();
    if c.yield_stress == 0.0 {
        return eta;
    }
    let x = (2.0 * second_invariant.max(0.0)).sqrt();
    if x <= SHEAR_RATE_FLOOR {
        return eta;
    }
    let yielded = c.yield_stress.sqrt() * -(-c.casson_regularizer * x).exp_m1();
    let root = eta.sqrt() * x.sqrt() + yielded;
    root * root / x
}

/// Strain rate, its second invariant and the viscous stress.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stress {
    pub strain_rate: Mat3,
    /// `0.5 * strain_rate : strain_rate`.
    pub second_invariant: f64,
    pub tensor: Mat3,
}

/// Symmetrized velocity gradient and its second invariant.
pub fn strain_rate(grad_v: &Mat3) -> (Mat3, f64) {
    let rate = (grad_v + grad_v.transpose()) * 0.5;
    let invariant = 0.5 * rate.iter().map(|c| c * c).sum::<f64>();
    (rate, invariant)
}

/// Viscous stress `nu * strain_rate`.
pub fn stress_tensor(grad_v: &Mat3, viscosity: f64) -> Stress {
    let (rate, invariant) = strain_rate(grad_v);
    Stress {
        strain_rate: rate,
        second_invariant: invariant,
        tensor: rate * viscosity,
    }
}
