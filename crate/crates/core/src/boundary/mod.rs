//! Rigid vessel wall represented by fixed proxy particles.
//!
//! Each proxy carries a volume `V = 1 / sum_k W(r - r_k, h)` over its proxy
//! neighbors (itself included) and a density weight `rho0 * V`. The weight
//! makes a wall sampled at any spacing contribute the same density to a
//! nearby fluid particle.

mod io;
mod mesh;
mod tube;

pub use io::{read_proxies, write_proxies, PROXY_MAGIC, PROXY_VERSION};
pub use mesh::{parse_obj, read_obj, sample_mesh, TriMesh};
pub use tube::{sample_tube, TubeParams};

use std::sync::Arc;

use crate::grid::NeighborGrid;
use crate::kernel::SphKernels;
use crate::{Error, Result, Vec3};

/// Fixed wall samples with precomputed volumes and density weights.
/// Proxy velocity is identically zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProxySet {
    pub positions: Vec<Vec3>,
    pub volumes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ProxySet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Compute volumes and weights for sampled wall positions.
    pub fn from_positions(positions: Vec<Vec3>, kernels: &SphKernels, rest_density: f64) -> Result<Self> {
        let volumes = proxy_volumes(&positions, kernels)?;
        let weights = volumes.iter().map(|v| rest_density * v).collect();
        Ok(Self {
            positions,
            volumes,
            weights,
        })
    }

    /// Rebuild from stored weights (e.g. a `proxies.bin` file).
    pub fn from_weights(positions: Vec<Vec3>, weights: Vec<f64>, rest_density: f64) -> Result<Self> {
        if positions.len() != weights.len() {
            return Err(Error::invalid("proxy positions and weights differ in length"));
        }
        if let Some(k) = weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::invalid(format!("proxy {k} has a non-positive weight")));
        }
        let volumes = weights.iter().map(|w| w / rest_density).collect();
        Ok(Self {
            positions,
            volumes,
            weights,
        })
    }
}

/// Volume of each proxy: inverse kernel sum over its proxy neighborhood,
/// self included.
pub fn proxy_volumes(positions: &[Vec3], kernels: &SphKernels) -> Result<Vec<f64>> {
    let grid = NeighborGrid::new(Vec::new(), Arc::new(positions.to_vec()), kernels.h())?;
    let mut scratch = Vec::new();
    Ok((0..positions.len())
        .map(|k| {
            grid.proxy_neighbors_of_proxy(k, &mut scratch);
            let sum: f64 = scratch
                .iter()
                .map(|&j| kernels.w_r2((positions[j as usize] - positions[k]).norm_squared()))
                .sum();
            1.0 / sum
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelPair;

    #[test]
    fn isolated_proxy_volume() {
        let k = SphKernels::new(0.1, KernelPair::default()).unwrap();
        let v = proxy_volumes(&[Vec3::new(1.0, 2.0, 3.0)], &k).unwrap();
        assert_eq!(v, vec![1.0 / k.w0()]);
    }

    #[test]
    fn two_proxy_volumes() {
        let h = 0.1;
        let d = 0.04;
        let k = SphKernels::new(h, KernelPair::default()).unwrap();
        let v = proxy_volumes(&[Vec3::zeros(), Vec3::new(0.0, d, 0.0)], &k).unwrap();
        let w0 = 315.0 / (64.0 * std::f64::consts::PI * h.powi(9)) * h.powi(6);
        let wd = 315.0 / (64.0 * std::f64::consts::PI * h.powi(9)) * (h * h - d * d).powi(3);
        let expected = 1.0 / (w0 + wd);
        for vol in v {
            assert!((vol - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn weights_scale_with_rest_density() {
        let k = SphKernels::new(0.1, KernelPair::default()).unwrap();
        let pts = vec![Vec3::zeros(), Vec3::new(0.05, 0.0, 0.0), Vec3::new(0.0, 0.05, 0.0)];
        let a = ProxySet::from_positions(pts.clone(), &k, 1000.0).unwrap();
        let b = ProxySet::from_positions(pts, &k, 2000.0).unwrap();
        for (wa, wb) in a.weights.iter().zip(&b.weights) {
            assert!((wb - 2.0 * wa).abs() < 1e-12 * wb);
        }
    }

    #[test]
    fn from_weights_checks() {
        assert!(ProxySet::from_weights(vec![Vec3::zeros()], vec![], 1.0).is_err());
        assert!(ProxySet::from_weights(vec![Vec3::zeros()], vec![0.0], 1.0).is_err());
        let p = ProxySet::from_weights(vec![Vec3::zeros()], vec![2.0], 4.0).unwrap();
        assert_eq!(p.volumes, vec![0.5]);
    }
}
