pub mod boundary;
pub mod cli;
pub mod config;
pub mod driver;
mod error;
pub mod exec;
pub mod features;
pub mod grid;
pub mod kernel;
pub mod nn;
pub mod physics;
pub mod state;
pub mod stepper;
pub mod trainer;

pub use error::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
