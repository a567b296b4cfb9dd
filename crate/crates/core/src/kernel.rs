//! SPH smoothing kernels.
//!
//! Two compactly supported families are provided:
//!
//! ```text
//! poly6:  W(r, h) = 315 / (64 pi h^9) * (h^2 - r^2)^3      r < h
//! spiky:  W(r, h) =  15 / (pi h^6)    * (h - r)^3          r < h
//! ```
//!
//! Value sums (density, boundary volumes) use poly6 and every gradient uses
//! spiky by default, since the poly6 gradient vanishes as two particles
//! approach each other. The pairing is selectable through [`KernelPair`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Poly6,
    Spiky,
}

impl KernelFamily {
    /// Kernel value at distance `r` (r >= 0).
    pub fn value(self, r: f64, h: f64) -> f64 {
        if r >= h {
            return 0.0;
        }
        match self {
            KernelFamily::Poly6 => {
                let d = h * h - r * r;
                315.0 / (64.0 * PI * h.powi(9)) * d * d * d
            }
            KernelFamily::Spiky => {
                let d = h - r;
                15.0 / (PI * h.powi(6)) * d * d * d
            }
        }
    }

    /// Radial derivative dW/dr at distance `r`.
    pub fn derivative(self, r: f64, h: f64) -> f64 {
        if r >= h {
            return 0.0;
        }
        match self {
            KernelFamily::Poly6 => {
                let d = h * h - r * r;
                -945.0 / (32.0 * PI * h.powi(9)) * d * d * r
            }
            KernelFamily::Spiky => {
                let d = h - r;
                -45.0 / (PI * h.powi(6)) * d * d
            }
        }
    }
}

/// Smoothing radius plus kernel family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelParams {
    h: f64,
    family: KernelFamily,
}

impl KernelParams {
    pub fn new(h: f64, family: KernelFamily) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid(format!("smoothing radius must be positive, got {h}")));
        }
        Ok(Self { h, family })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }
}

/// Kernel value for displacement `r`. Zero for `|r| >= h`.
pub fn kernel_w(r: &Vec3, params: &KernelParams) -> f64 {
    params.family.value(r.norm(), params.h)
}

/// Kernel gradient with respect to the first particle, for displacement
/// `r = r_i - r_j`. Zero at the origin and outside the support.
pub fn kernel_grad(r: &Vec3, params: &KernelParams) -> Vec3 {
    let dist = r.norm();
    if dist <= 0.0 || dist >= params.h {
        return Vec3::zeros();
    }
    r * (params.family.derivative(dist, params.h) / dist)
}

/// Which family serves value sums and which serves gradients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelPair {
    pub value: KernelFamily,
    pub gradient: KernelFamily,
}

impl Default for KernelPair {
    fn default() -> Self {
        Self {
            value: KernelFamily::Poly6,
            gradient: KernelFamily::Spiky,
        }
    }
}

/// Precomputed kernel pair for the per-pair hot loops.
#[derive(Clone, Copy, Debug)]
pub struct SphKernels {
    h: f64,
    h2: f64,
    pair: KernelPair,
    value_norm: f64,
    grad_norm: f64,
}

impl SphKernels {
    pub fn new(h: f64, pair: KernelPair) -> Result<Self> {
        KernelParams::new(h, pair.value)?;
        let value_norm = match pair.value {
            KernelFamily::Poly6 => 315.0 / (64.0 * PI * h.powi(9)),
            KernelFamily::Spiky => 15.0 / (PI * h.powi(6)),
        };
        let grad_norm = match pair.gradient {
            KernelFamily::Poly6 => -945.0 / (32.0 * PI * h.powi(9)),
            KernelFamily::Spiky => -45.0 / (PI * h.powi(6)),
        };
        Ok(Self {
            h,
            h2: h * h,
            pair,
            value_norm,
            grad_norm,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn pair(&self) -> KernelPair {
        self.pair
    }

    pub fn value_params(&self) -> KernelParams {
        KernelParams {
            h: self.h,
            family: self.pair.value,
        }
    }

    pub fn gradient_params(&self) -> KernelParams {
        KernelParams {
            h: self.h,
            family: self.pair.gradient,
        }
    }

    /// Value kernel from a squared distance.
    #[inline]
    pub fn w_r2(&self, r2: f64) -> f64 {
        if r2 >= self.h2 {
            return 0.0;
        }
        match self.pair.value {
            KernelFamily::Poly6 => {
                let d = self.h2 - r2;
                self.value_norm * d * d * d
            }
            KernelFamily::Spiky => {
                let d = self.h - r2.sqrt();
                self.value_norm * d * d * d
            }
        }
    }

    /// Value kernel at the origin (the self contribution).
    #[inline]
    pub fn w0(&self) -> f64 {
        self.w_r2(0.0)
    }

    /// Gradient kernel for displacement `r` with precomputed length `dist`.
    #[inline]
    pub fn grad(&self, r: &Vec3, dist: f64) -> Vec3 {
        if dist <= 0.0 || dist >= self.h {
            return Vec3::zeros();
        }
        let scale = match self.pair.gradient {
            KernelFamily::Poly6 => {
                let d = self.h2 - dist * dist;
                self.grad_norm * d * d
            }
            KernelFamily::Spiky => {
                let d = self.h - dist;
                self.grad_norm * d * d / dist
            }
        };
        r * scale
    }
}
