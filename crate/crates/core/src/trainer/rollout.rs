use crate::exec::Exec;
use crate::features::{BinningSpec, FeatureExtractor, FeatureScratch, FeatureVector};
use crate::grid::{NeighborGrid, NeighborLists};
use crate::nn::{Network, Scratch};
use crate::physics::advance;
use crate::state::FluidState;
use crate::stepper::{run_frames, FrameStepper, Truncation};
use crate::{Error, Result, Vec3};

/// Learned acceleration source: features, network, then the same
/// integration as the physics solver.
#[derive(Clone, Copy, Debug)]
pub struct LearnedStepper<'a> {
    pub net: &'a Network,
    pub proxy_positions: &'a [Vec3],
    pub spec: BinningSpec,
    pub time_step: f64,
}

impl LearnedStepper<'_> {
    pub fn features(&self, state: &FluidState, lists: &NeighborLists, exec: &Exec) -> Vec<FeatureVector> {
        let ex = FeatureExtractor {
            state,
            proxy_positions: self.proxy_positions,
            spec: self.spec,
        };
        exec.map_init(state.len(), FeatureScratch::default, |scratch, i| {
            ex.extract(i, lists.fluid(i), lists.proxy(i), scratch)
        })
    }

    /// Predicted next-frame acceleration of every particle.
    pub fn accelerations(&self, state: &FluidState, lists: &NeighborLists, exec: &Exec) -> Result<Vec<Vec3>> {
        let ex = FeatureExtractor {
            state,
            proxy_positions: self.proxy_positions,
            spec: self.spec,
        };
        exec.map_init(
            state.len(),
            || (FeatureScratch::default(), Scratch::default()),
            |(fs, ns), i| {
                let f = ex.extract(i, lists.fluid(i), lists.proxy(i), fs);
                let non_finite = Error::NonFinite {
                    kind: "predicted acceleration",
                    index: i,
                };
                match self.net.predict(f.as_slice(), ns) {
                    Ok(a) if a.iter().all(|c| c.is_finite()) => Ok(a),
                    Ok(_) | Err(Error::NonFinite { .. }) => Err(non_finite),
                    Err(e) => Err(e),
                }
            },
        )
        .into_iter()
        .collect()
    }
}

impl FrameStepper for LearnedStepper<'_> {
    fn step_frame(&self, state: &FluidState, lists: &NeighborLists, frame: usize, exec: &Exec) -> Result<FluidState> {
        let acc = self.accelerations(state, lists, exec).map_err(|e| match e {
            Error::NonFinite { index, .. } => Error::Instability {
                frame: frame + 1,
                particle: index,
            },
            other => other,
        })?;
        let next = advance(state, acc, self.time_step);
        match next.first_non_finite() {
            Some(particle) => Err(Error::Instability {
                frame: frame + 1,
                particle,
            }),
            None => Ok(next),
        }
    }
}

/// Predicted frames of a closed-loop rollout.
#[derive(Clone, Debug)]
pub struct Rollout {
    /// The (rounded) initial state followed by one state per completed step.
    pub states: Vec<FluidState>,
    pub truncated: Option<Truncation>,
}

/// Run the learned stepper for `horizon` frames from `initial`.
pub fn rollout(
    stepper: &LearnedStepper<'_>,
    initial: &FluidState,
    proxy_grid: &NeighborGrid,
    horizon: usize,
    exec: &Exec,
) -> Result<Rollout> {
    let mut states = Vec::with_capacity(horizon + 1);
    let mut first = initial.clone();
    first.quantize();
    states.push(first);
    let outcome = run_frames(stepper, initial, proxy_grid, horizon, exec, |t| {
        states.push(t.next.clone());
        Ok(())
    })?;
    Ok(Rollout {
        states,
        truncated: outcome.truncated,
    })
}

/// Like [`rollout`] but keeps only the last state.
pub fn rollout_last(
    stepper: &LearnedStepper<'_>,
    initial: &FluidState,
    proxy_grid: &NeighborGrid,
    horizon: usize,
    exec: &Exec,
) -> Result<(FluidState, Option<Truncation>)> {
    let outcome = run_frames(stepper, initial, proxy_grid, horizon, exec, |_| Ok(()))?;
    Ok((outcome.last, outcome.truncated))
}

/// Feature vectors of a whole state, with a fresh neighbor search.
pub fn state_features(
    state: &FluidState,
    proxy_grid: &NeighborGrid,
    spec: BinningSpec,
    exec: &Exec,
) -> Result<Vec<FeatureVector>> {
    let grid = proxy_grid.rebuild_fluid(state.position.clone())?;
    let lists = grid.neighbor_lists();
    let ex = FeatureExtractor {
        state,
        proxy_positions: proxy_grid.proxy_positions(),
        spec,
    };
    Ok(exec.map_init(state.len(), FeatureScratch::default, |scratch, i| {
        ex.extract(i, lists.fluid(i), lists.proxy(i), scratch)
    }))
}
