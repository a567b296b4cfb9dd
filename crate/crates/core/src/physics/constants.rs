use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

/// Material and integration constants for the blood model.
///
/// Rheology defaults are literature values for whole blood. The sound speed
/// is a numerical parameter of the weakly compressible model and must be
/// chosen together with the smoothing radius and time step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FluidConstants {
    /// Rest density, kg/m^3.
    pub rest_density: f64,
    /// Numerical speed of sound, m/s.
    pub sound_speed: f64,
    /// Tait exponent.
    pub tait_exponent: f64,
    /// Kinematic viscosity, m^2/s. The Casson plastic viscosity is
    /// `rest_density * kinematic_viscosity`.
    pub kinematic_viscosity: f64,
    /// Casson yield stress, Pa.
    pub yield_stress: f64,
    /// Exponential regularizer of the Casson law.
    pub casson_regularizer: f64,
    /// Singularity guard of the boundary artificial viscosity, as a
    /// fraction of h^2.
    pub av_epsilon: f64,
    /// Gravity, m/s^2.
    pub gravity: [f64; 3],
    /// Frame time step, s.
    pub time_step: f64,
    /// Solver substeps per frame. With more than one, the frame
    /// acceleration is the mean over the substeps, `(v' - v) / dt`.
    pub substeps: usize,
}

impl Default for FluidConstants {
    fn default() -> Self {
        Self {
            rest_density: 1060.0,
            sound_speed: 25.0,
            tait_exponent: 7.0,
            kinematic_viscosity: 3.3e-6,
            yield_stress: 0.005,
            casson_regularizer: 7.0,
            av_epsilon: 0.01,
            gravity: [0.0, 0.0, -9.81],
            time_step: 0.005,
            substeps: 10,
        }
    }
}

impl FluidConstants {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rest_density", self.rest_density),
            ("sound_speed", self.sound_speed),
            ("time_step", self.time_step),
            ("casson_regularizer", self.casson_regularizer),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("fluid.{name} must be positive, got {v}")));
            }
        }
        if !(self.tait_exponent >= 1.0 && self.tait_exponent.is_finite()) {
            return Err(Error::Config(format!(
                "fluid.tait_exponent must be >= 1, got {}",
                self.tait_exponent
            )));
        }
        let non_negative = [
            ("kinematic_viscosity", self.kinematic_viscosity),
            ("yield_stress", self.yield_stress),
            ("av_epsilon", self.av_epsilon),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("fluid.{name} must be >= 0, got {v}")));
            }
        }
        if self.substeps == 0 {
            return Err(Error::Config("fluid.substeps must be >= 1".into()));
        }
        if !self.gravity.iter().all(|g| g.is_finite()) {
            return Err(Error::Config("fluid.gravity must be finite".into()));
        }
        Ok(())
    }

    pub fn gravity(&self) -> Vec3 {
        Vec3::from(self.gravity)
    }

    /// Casson plastic viscosity (dynamic), Pa*s.
    /// Solver time step.
    pub fn substep(&self) -> f64 {
        self.time_step / self.substeps as f64
    }

    pub fn plastic_viscosity(&self) -> f64 {
        self.rest_density * self.kinematic_viscosity
    }
}

/// Denominator used when scaling the Casson viscosity into the boundary
/// artificial-viscosity coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViscosityDenominator {
    Density,
    Pressure,
}

/// Switches for choices the underlying model leaves open.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FidelitySwitches {
    /// Clamp negative Tait pressure to zero.
    pub clamp_negative_pressure: bool,
    /// Apply the boundary artificial viscosity only to approaching pairs.
    pub approaching_pairs_only: bool,
    pub viscosity_denominator: ViscosityDenominator,
    /// Monaghan coefficient of an extra fluid-fluid artificial viscosity.
    /// Zero disables it.
    pub fluid_artificial_viscosity: f64,
}

impl Default for FidelitySwitches {
    fn default() -> Self {
        Self {
            clamp_negative_pressure: true,
            approaching_pairs_only: true,
            viscosity_denominator: ViscosityDenominator::Density,
            fluid_artificial_viscosity: 0.5,
        }
    }
}

impl FidelitySwitches {
    pub fn validate(&self) -> Result<()> {
        let a = self.fluid_artificial_viscosity;
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::Config(format!(
                "fidelity.fluid_artificial_viscosity must be >= 0, got {a}"
            )));
        }
        Ok(())
    }
}
