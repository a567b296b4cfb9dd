use std::f64::consts::PI;
use std::sync::Arc;

use crate::boundary::{read_obj, sample_mesh, sample_tube, ProxySet, TubeParams};
use crate::config::{ColumnConfig, Config};
use crate::grid::NeighborGrid;
use crate::kernel::SphKernels;
use crate::physics::PhysicsModel;
use crate::state::FluidState;
use crate::{Error, Result, Vec3};

/// A vessel, the blood column inside it and everything needed to step it.
#[derive(Clone, Debug)]
pub struct Scene {
    pub config: Config,
    pub kernels: SphKernels,
    pub proxies: Arc<ProxySet>,
    pub initial: FluidState,
}

impl Scene {
    pub fn physics_model(&self) -> Result<PhysicsModel> {
        PhysicsModel::new(
            self.kernels,
            self.config.fluid.clone(),
            self.config.fidelity.clone(),
            self.proxies.clone(),
        )
    }

    pub fn fluid_len(&self) -> usize {
        self.initial.len()
    }

    pub fn proxy_len(&self) -> usize {
        self.proxies.len()
    }

    /// Same vessel with a different column, reusing the sampled wall.
    pub fn with_column(&self, column: ColumnConfig) -> Result<Scene> {
        let mut config = self.config.clone();
        config.column = column;
        config.validate()?;
        let initial = column_state(&config)?;
        check_inside(&config, &self.proxies.positions, &initial.position, self.kernels.h())?;
        Ok(Scene {
            config,
            kernels: self.kernels,
            proxies: self.proxies.clone(),
            initial,
        })
    }
}

/// Wall samples for the configured vessel.
pub fn sample_vessel(config: &Config) -> Result<Vec<Vec3>> {
    let v = &config.vessel;
    match (&v.tube, &v.mesh) {
        (Some(tube), None) => sample_tube(tube, v.spacing),
        (None, Some(mesh)) => sample_mesh(&read_obj(&mesh.path)?, v.spacing, mesh.seed),
        _ => Err(Error::Config(
            "vessel needs exactly one of [vessel.tube] or [vessel.mesh]".into(),
        )),
    }
}

/// Sample the vessel, weight its proxies and fill the blood column.
pub fn build_scene(config: &Config) -> Result<Scene> {
    config.validate()?;
    let proxies = sample_vessel(config)?;
    let kernels = SphKernels::new(config.sph.h, config.sph.kernels)?;
    let proxies = ProxySet::from_positions(proxies, &kernels, config.fluid.rest_density)?;
    build_scene_with_proxies(config, proxies)
}

/// Like [`build_scene`] with a wall that was sampled earlier.
pub fn build_scene_with_proxies(config: &Config, proxies: ProxySet) -> Result<Scene> {
    config.validate()?;
    let kernels = SphKernels::new(config.sph.h, config.sph.kernels)?;
    let initial = column_state(config)?;
    check_inside(config, &proxies.positions, &initial.position, kernels.h())?;
    Ok(Scene {
        config: config.clone(),
        kernels,
        proxies: Arc::new(proxies),
        initial,
    })
}

/// Lattice points of a vertical cylinder: layers at `base + (k + 1/2) d`,
/// each a square grid through the axis clipped to the disk.
pub fn column_lattice(column: &ColumnConfig, d: f64) -> Vec<Vec3> {
    let [cx, cy, cz] = column.base_center;
    let layers = (column.height / d + 1e-9).floor() as i64;
    let n = (column.radius / d + 1e-9).floor() as i64;
    let r2 = column.radius * column.radius * (1.0 + 1e-12);
    let mut disk = Vec::new();
    for j in -n..=n {
        for i in -n..=n {
            let (x, y) = (i as f64 * d, j as f64 * d);
            if x * x + y * y <= r2 {
                disk.push((cx + x, cy + y));
            }
        }
    }
    let mut out = Vec::with_capacity(disk.len() * layers.max(0) as usize);
    for k in 0..layers {
        let z = cz + (k as f64 + 0.5) * d;
        out.extend(disk.iter().map(|&(x, y)| Vec3::new(x, y, z)));
    }
    out
}

/// Expected lattice size before edge effects.
pub fn column_volume_estimate(column: &ColumnConfig, d: f64) -> f64 {
    PI * column.radius * column.radius * column.height / (d * d * d)
}

fn column_state(config: &Config) -> Result<FluidState> {
    let d = config.lattice_spacing();
    let mut position = column_lattice(&config.column, d);
    if let Some(count) = config.column.count {
        if count > position.len() {
            return Err(Error::Config(format!(
                "column.count = {count} exceeds the {} lattice sites of the column",
                position.len()
            )));
        }
        position.truncate(count);
    }
    let n = position.len();
    let mass = config.fluid.rest_density * d * d * d;
    Ok(FluidState {
        velocity: vec![Vec3::zeros(); n],
        acceleration: vec![config.fluid.gravity(); n],
        mass: vec![mass; n],
        position,
    })
}

fn check_inside(config: &Config, proxies: &[Vec3], fluid: &[Vec3], h: f64) -> Result<()> {
    let d = config.lattice_spacing();
    if let Some(tube) = &config.vessel.tube {
        check_in_tube(tube, fluid, 0.5 * d)?;
    }
    let grid = NeighborGrid::new(Vec::new(), Arc::new(proxies.to_vec()), h)?;
    let clearance2 = 0.25 * d * d;
    for (i, p) in fluid.iter().enumerate() {
        for k in grid.query_point(p).proxy {
            if (proxies[k] - p).norm_squared() <= clearance2 {
                return Err(Error::invalid(format!(
                    "column particle {i} at {:?} lies within {} of the wall",
                    p.as_slice(),
                    0.5 * d
                )));
            }
        }
    }
    Ok(())
}

fn check_in_tube(tube: &TubeParams, fluid: &[Vec3], margin: f64) -> Result<()> {
    let length = tube.axis_length();
    for (i, p) in fluid.iter().enumerate() {
        let (dist, arc) = tube.distance_to_axis(p);
        if dist >= tube.radius - margin || arc <= margin || arc >= length - margin {
            return Err(Error::invalid(format!(
                "column particle {i} at {:?} is outside the vessel",
                p.as_slice()
            )));
        }
    }
    Ok(())
}
