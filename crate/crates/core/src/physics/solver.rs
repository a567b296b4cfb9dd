use std::sync::Arc;

use super::rheology::{casson_viscosity, compute_pressure, stress_tensor, Stress};
use super::{FidelitySwitches, FluidConstants, ViscosityDenominator};
use crate::boundary::ProxySet;
use crate::exec::Exec;
use crate::grid::{NeighborGrid, NeighborLists};
use crate::kernel::SphKernels;
use crate::state::{FluidParticle, FluidState};
use crate::{Error, Mat3, Result, Vec3};

/// Density from the self term, fluid neighbors and weighted proxies.
pub fn compute_density(
    i: usize,
    fluid: &[u32],
    proxy: &[u32],
    state: &FluidState,
    proxies: &ProxySet,
    k: &SphKernels,
) -> f64 {
    let xi = state.position[i];
    let fluid_sum: f64 = fluid
        .iter()
        .map(|&j| k.w_r2((xi - state.position[j as usize]).norm_squared()))
        .sum();
    let wall_sum: f64 = proxy
        .iter()
        .map(|&s| proxies.weights[s as usize] * k.w_r2((xi - proxies.positions[s as usize]).norm_squared()))
        .sum();
    state.mass[i] * (k.w0() + fluid_sum) + wall_sum
}

/// SPH velocity gradient, entry `[a][b] ~ dv_a/dx_b`:
/// `sum_j (m_j / rho_j) (v_j - v_i) (grad W_ij)^T`.
pub fn velocity_gradient(i: usize, fluid: &[u32], state: &FluidState, density: &[f64], k: &SphKernels) -> Mat3 {
    let xi = state.position[i];
    let vi = state.velocity[i];
    let mut g = Mat3::zeros();
    for &j in fluid {
        let j = j as usize;
        let r = xi - state.position[j];
        let grad = k.grad(&r, r.norm());
        let vji = state.velocity[j] - vi;
        g += (vji * grad.transpose()) * (state.mass[j] / density[j]);
    }
    g
}

/// Fluid force per unit mass: viscous stress term plus pressure term, plus
/// the optional fluid-fluid artificial viscosity.
pub fn fluid_force(
    i: usize,
    fluid: &[u32],
    state: &FluidState,
    fields: &FieldSnapshot,
    constants: &FluidConstants,
    switches: &FidelitySwitches,
    k: &SphKernels,
) -> Vec3 {
    let xi = state.position[i];
    let rho_i = fields.density[i];
    let p_term_i = fields.pressure[i] / (rho_i * rho_i);
    let tau_i = fields.stress[i].tensor;
    let alpha = switches.fluid_artificial_viscosity;
    let h = k.h();
    let mut f = Vec3::zeros();
    for &j in fluid {
        let j = j as usize;
        let r = xi - state.position[j];
        let dist = r.norm();
        let grad = k.grad(&r, dist);
        let m_j = state.mass[j];
        let rho_j = fields.density[j];
        let viscous = (tau_i + fields.stress[j].tensor) * grad * (m_j / (rho_i * rho_j));
        let pressure = grad * (-m_j * (p_term_i + fields.pressure[j] / (rho_j * rho_j)));
        f += viscous + pressure;
        if alpha > 0.0 {
            let vr = (state.velocity[i] - state.velocity[j]).dot(&r);
            if vr < 0.0 {
                let mu = h * vr / (dist * dist + constants.av_epsilon * h * h);
                let pi = -alpha * constants.sound_speed * mu / (0.5 * (rho_i + rho_j));
                f -= grad * (m_j * pi);
            }
        }
    }
    f
}

/// Force exerted by the proxy neighbors on fluid particle `i` (a force, not
/// per unit mass). The proxy mirrors the fluid particle's pressure, density
/// and viscosity coefficient; its velocity is zero.
pub fn coupling_force(
    i: usize,
    proxy: &[u32],
    state: &FluidState,
    fields: &FieldSnapshot,
    proxies: &ProxySet,
    constants: &FluidConstants,
    switches: &FidelitySwitches,
    k: &SphKernels,
) -> Vec3 {
    let xi = state.position[i];
    let vi = state.velocity[i];
    let m_i = state.mass[i];
    let rho_i = fields.density[i];
    let p_i = fields.pressure[i];
    let (rho_k, p_k) = (rho_i, p_i);
    let mu_i = boundary_viscosity_coefficient(fields.viscosity[i], rho_i, p_i, constants, switches, k.h());
    let mu_k = mu_i;
    let av_scale = if mu_i > 0.0 {
        16.0 * mu_i * mu_k / (rho_i * rho_k * (mu_i + mu_k))
    } else {
        0.0
    };
    let pressure_term = p_i / (rho_i * rho_i) + p_k / (rho_k * rho_k);
    let eps_h2 = constants.av_epsilon * k.h() * k.h();
    let mut f = Vec3::zeros();
    for &s in proxy {
        let s = s as usize;
        let r = xi - proxies.positions[s];
        let dist = r.norm();
        let grad = k.grad(&r, dist);
        let vr = vi.dot(&r);
        let pi = if switches.approaching_pairs_only && vr >= 0.0 {
            0.0
        } else {
            -av_scale * vr / (dist * dist + eps_h2)
        };
        f -= grad * (m_i * proxies.weights[s] * (pressure_term + pi));
    }
    f
}

fn boundary_viscosity_coefficient(
    nu: f64,
    rho: f64,
    p: f64,
    c: &FluidConstants,
    switches: &FidelitySwitches,
    h: f64,
) -> f64 {
    match switches.viscosity_denominator {
        ViscosityDenominator::Density => nu * h * c.sound_speed / rho,
        ViscosityDenominator::Pressure if p > 0.0 => nu * h * c.sound_speed / p,
        ViscosityDenominator::Pressure => 0.0,
    }
}

/// Velocity and position update from the new acceleration.
#[inline]
pub fn integrate(v: &Vec3, x: &Vec3, a: &Vec3, dt: f64) -> (Vec3, Vec3) {
    let v_next = v + a * dt;
    let x_next = x + (v + v_next) * (0.5 * dt);
    (v_next, x_next)
}

/// Apply new accelerations to a whole state. Shared by the physics and the
/// learned stepper.
pub fn advance(state: &FluidState, acceleration: Vec<Vec3>, dt: f64) -> FluidState {
    let n = state.len();
    let mut position = Vec::with_capacity(n);
    let mut velocity = Vec::with_capacity(n);
    for i in 0..n {
        let (v, x) = integrate(&state.velocity[i], &state.position[i], &acceleration[i], dt);
        velocity.push(v);
        position.push(x);
    }
    FluidState {
        position,
        velocity,
        acceleration,
        mass: state.mass.clone(),
    }
}

/// Derived per-particle fields of one frame.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FieldSnapshot {
    pub density: Vec<f64>,
    pub pressure: Vec<f64>,
    pub velocity_gradient: Vec<Mat3>,
    pub stress: Vec<Stress>,
    /// Effective Casson viscosity.
    pub viscosity: Vec<f64>,
}

/// Everything the physics step needs besides the state.
#[derive(Clone, Debug)]
pub struct PhysicsModel {
    pub kernels: SphKernels,
    pub constants: FluidConstants,
    pub switches: FidelitySwitches,
    pub proxies: Arc<ProxySet>,
    /// Proxy-only grid reused for intra-frame neighbor searches.
    proxy_grid: NeighborGrid,
}

impl PhysicsModel {
    pub fn new(
        kernels: SphKernels,
        constants: FluidConstants,
        switches: FidelitySwitches,
        proxies: Arc<ProxySet>,
    ) -> Result<Self> {
        constants.validate()?;
        switches.validate()?;
        let proxy_grid = NeighborGrid::new(Vec::new(), Arc::new(proxies.positions.clone()), kernels.h())?;
        Ok(Self {
            kernels,
            constants,
            switches,
            proxies,
            proxy_grid,
        })
    }

    pub fn densities(&self, state: &FluidState, lists: &NeighborLists, exec: &Exec) -> Vec<f64> {
        exec.map(state.len(), |i| {
            compute_density(i, lists.fluid(i), lists.proxy(i), state, &self.proxies, &self.kernels)
        })
    }

    /// Density, pressure, velocity gradient and stress for every particle.
    pub fn fields(&self, state: &FluidState, lists: &NeighborLists, exec: &Exec) -> FieldSnapshot {
        let density = self.densities(state, lists, exec);
        let clamp = self.switches.clamp_negative_pressure;
        let pressure = density
            .iter()
            .map(|&rho| compute_pressure(rho, &self.constants, clamp))
            .collect();
        let velocity_gradient = exec.map(state.len(), |i| {
            velocity_gradient(i, lists.fluid(i), state, &density, &self.kernels)
        });
        let (stress, viscosity) = velocity_gradient
            .iter()
            .map(|g| {
                let (_, invariant) = super::strain_rate(g);
                let nu = casson_viscosity(invariant, &self.constants);
                (stress_tensor(g, nu), nu)
            })
            .unzip();
        FieldSnapshot {
            density,
            pressure,
            velocity_gradient,
            stress,
            viscosity,
        }
    }

    /// Next-frame acceleration of every particle.
    pub fn accelerations(
        &self,
        state: &FluidState,
        lists: &NeighborLists,
        fields: &FieldSnapshot,
        exec: &Exec,
    ) -> Vec<Vec3> {
        let g = self.constants.gravity();
        exec.map(state.len(), |i| {
            let fluid = fluid_force(
                i,
                lists.fluid(i),
                state,
                fields,
                &self.constants,
                &self.switches,
                &self.kernels,
            );
            let wall = coupling_force(
                i,
                lists.proxy(i),
                state,
                fields,
                &self.proxies,
                &self.constants,
                &self.switches,
                &self.kernels,
            );
            fluid + wall / state.mass[i] + g
        })
    }

    /// One frame. `lists` must match `state`; later substeps search their
    /// own neighbors. `frame` is the index of the input state and is only
    /// used in diagnostics.
    pub fn step(&self, state: &FluidState, lists: &NeighborLists, frame: usize, exec: &Exec) -> Result<FluidState> {
        let substeps = self.constants.substeps;
        let dt = self.constants.substep();
        let fields = self.fields(state, lists, exec);
        let acc = self.accelerations(state, lists, &fields, exec);
        let mut next = advance(state, acc, dt);
        for _ in 1..substeps {
            if next.first_non_finite().is_some() {
                break;
            }
            let grid = self.proxy_grid.rebuild_fluid(next.position.clone())?;
            let lists = grid.neighbor_lists();
            let fields = self.fields(&next, &lists, exec);
            let acc = self.accelerations(&next, &lists, &fields, exec);
            next = advance(&next, acc, dt);
        }
        if substeps > 1 {
            let inv = 1.0 / self.constants.time_step;
            next.acceleration = next
                .velocity
                .iter()
                .zip(&state.velocity)
                .map(|(v1, v0)| (v1 - v0) * inv)
                .collect();
        }
        match next.first_non_finite() {
            Some(particle) => Err(Error::Instability {
                frame: frame + 1,
                particle,
            }),
            None => Ok(next),
        }
    }

    pub fn particle(&self, state: &FluidState, fields: &FieldSnapshot, i: usize) -> FluidParticle {
        FluidParticle {
            position: state.position[i],
            velocity: state.velocity[i],
            acceleration: state.acceleration[i],
            mass: state.mass[i],
            density: fields.density[i],
            pressure: fields.pressure[i],
            stress: fields.stress[i].tensor,
        }
    }
}

/// Neighbor search plus one physics frame.
pub fn physics_step(state: &FluidState, model: &PhysicsModel, grid: &NeighborGrid, frame: usize) -> Result<FluidState> {
    if grid.fluid_len() != state.len() {
        return Err(Error::invalid("grid was built for a different particle count"));
    }
    model.step(state, &grid.neighbor_lists(), frame, &Exec::sequential())
}
