use std::sync::Arc;

use super::Scene;
use crate::exec::Exec;
use crate::grid::NeighborGrid;
use crate::physics::PhysicsModel;
use crate::state::FluidState;
use crate::{Error, Result};

/// Relative density deviation range covered by the histogram; values
/// outside are counted in the end bins.
pub const HISTOGRAM_RANGE: (f64, f64) = (-0.5, 0.5);
pub const HISTOGRAM_BINS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityHistogram {
    pub counts: Vec<usize>,
}

impl DensityHistogram {
    /// Bin `(rho - rho0) / rho0` for every particle.
    pub fn from_densities(densities: &[f64], rest_density: f64) -> Self {
        let (lo, hi) = HISTOGRAM_RANGE;
        let width = (hi - lo) / HISTOGRAM_BINS as f64;
        let mut counts = vec![0; HISTOGRAM_BINS];
        for rho in densities {
            let x = (rho - rest_density) / rest_density;
            let k = ((x - lo) / width).floor().clamp(0.0, (HISTOGRAM_BINS - 1) as f64) as usize;
            counts[k] += 1;
        }
        Self { counts }
    }

    pub fn edges() -> Vec<f64> {
        let (lo, hi) = HISTOGRAM_RANGE;
        (0..=HISTOGRAM_BINS)
            .map(|k| lo + (hi - lo) * k as f64 / HISTOGRAM_BINS as f64)
            .collect()
    }
}

/// Densities of arbitrary states in a fixed scene.
pub struct DensityProbe<'a> {
    physics: PhysicsModel,
    grid: NeighborGrid,
    exec: &'a Exec,
}

impl<'a> DensityProbe<'a> {
    pub fn new(scene: &Scene, exec: &'a Exec) -> Result<Self> {
        Ok(Self {
            physics: scene.physics_model()?,
            grid: NeighborGrid::new(Vec::new(), Arc::new(scene.proxies.positions.clone()), scene.kernels.h())?,
            exec,
        })
    }

    pub fn densities(&self, state: &FluidState) -> Result<Vec<f64>> {
        let grid = self.grid.rebuild_fluid(state.position.clone())?;
        Ok(self.physics.densities(state, &grid.neighbor_lists(), self.exec))
    }

    pub fn histogram(&self, state: &FluidState) -> Result<DensityHistogram> {
        Ok(DensityHistogram::from_densities(
            &self.densities(state)?,
            self.physics.constants.rest_density,
        ))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameComparison {
    pub frame: usize,
    pub mean_position_error: f64,
    pub max_position_error: f64,
    pub reference_density: Option<DensityHistogram>,
    pub test_density: Option<DensityHistogram>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub frames: Vec<FrameComparison>,
}

impl Comparison {
    pub fn final_mean_error(&self) -> Option<f64> {
        self.frames.last().map(|f| f.mean_position_error)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("frame,mean_position_error,max_position_error");
        let with_density = self.frames.iter().any(|f| f.reference_density.is_some());
        if with_density {
            let edges = DensityHistogram::edges();
            for side in ["ref", "test"] {
                for w in edges.windows(2) {
                    out.push_str(&format!(",{side}[{:.2};{:.2})", w[0], w[1]));
                }
            }
        }
        out.push('\n');
        for f in &self.frames {
            out.push_str(&format!(
                "{},{:e},{:e}",
                f.frame, f.mean_position_error, f.max_position_error
            ));
            if with_density {
                for h in [&f.reference_density, &f.test_density] {
                    match h {
                        Some(h) => h.counts.iter().for_each(|c| out.push_str(&format!(",{c}"))),
                        None => out.push_str(&",".repeat(HISTOGRAM_BINS)),
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Index-matched comparison over the frames both runs have.
pub fn compare_runs(
    reference: &[FluidState],
    test: &[FluidState],
    density: Option<&DensityProbe<'_>>,
) -> Result<Comparison> {
    let mut frames = Vec::with_capacity(reference.len().min(test.len()));
    for (k, (r, t)) in reference.iter().zip(test).enumerate() {
        if r.len() != t.len() {
            return Err(Error::invalid(format!(
                "frame {k}: reference has {} particles, test has {}",
                r.len(),
                t.len()
            )));
        }
        let errors = r.position.iter().zip(&t.position).map(|(a, b)| (a - b).norm());
        let n = r.len().max(1) as f64;
        let (reference_density, test_density) = match density {
            Some(probe) => (Some(probe.histogram(r)?), Some(probe.histogram(t)?)),
            None => (None, None),
        };
        frames.push(FrameComparison {
            frame: k,
            mean_position_error: errors.clone().sum::<f64>() / n,
            max_position_error: errors.fold(0.0, f64::max),
            reference_density,
            test_density,
        });
    }
    Ok(Comparison { frames })
}
