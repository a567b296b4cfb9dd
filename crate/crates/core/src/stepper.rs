//! The frame loop shared by every acceleration source.
//!
//! Each frame: fluid grid rebuild, neighbor lists, one step of the source,
//! rounding to `f32`. Physics runs, learned rollouts, dataset capture and
//! benchmarks all go through [`run_frames`].

use std::time::Instant;

use crate::exec::Exec;
use crate::grid::{NeighborGrid, NeighborLists};
use crate::state::FluidState;
use crate::{Error, Result};

/// Anything that advances a fluid state by one frame.
pub trait FrameStepper: Sync {
    /// `lists` are the neighbor lists of `state`; `frame` is its index.
    fn step_frame(&self, state: &FluidState, lists: &NeighborLists, frame: usize, exec: &Exec) -> Result<FluidState>;
}

/// One completed frame transition.
pub struct Transition<'a> {
    /// Index of `state`; `next` is frame `frame + 1`.
    pub frame: usize,
    pub state: &'a FluidState,
    pub lists: &'a NeighborLists,
    pub next: &'a FluidState,
    /// Wall-clock time of the neighbor search and the step.
    pub seconds: f64,
}

/// Where a run stopped early.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Truncation {
    /// First frame that could not be produced.
    pub frame: usize,
    pub particle: usize,
}

#[derive(Clone, Debug)]
pub struct LoopOutcome {
    /// Number of transitions completed.
    pub frames: usize,
    pub truncated: Option<Truncation>,
    pub last: FluidState,
}

/// Advance `initial` by up to `frames` frames, calling `on_step` after each
/// transition. An instability stops the loop and is reported in the
/// outcome; other errors abort.
pub fn run_frames<S, F>(
    stepper: &S,
    initial: &FluidState,
    proxy_grid: &NeighborGrid,
    frames: usize,
    exec: &Exec,
    mut on_step: F,
) -> Result<LoopOutcome>
where
    S: FrameStepper + ?Sized,
    F: FnMut(Transition<'_>) -> Result<()>,
{
    let mut state = initial.clone();
    state.quantize();
    for frame in 0..frames {
        let start = Instant::now();
        let grid = proxy_grid.rebuild_fluid(state.position.clone())?;
        let lists = grid.neighbor_lists();
        let mut next = match stepper.step_frame(&state, &lists, frame, exec) {
            Ok(next) => next,
            Err(Error::Instability { frame: bad, particle }) => {
                log::warn!("run stopped: frame {bad} is non-finite at particle {particle}");
                return Ok(LoopOutcome {
                    frames: frame,
                    truncated: Some(Truncation { frame: bad, particle }),
                    last: state,
                });
            }
            Err(e) => return Err(e),
        };
        next.quantize();
        let seconds = start.elapsed().as_secs_f64();
        on_step(Transition {
            frame,
            state: &state,
            lists: &lists,
            next: &next,
            seconds,
        })?;
        state = next;
    }
    Ok(LoopOutcome {
        frames,
        truncated: None,
        last: state,
    })
}

impl FrameStepper for crate::physics::PhysicsModel {
    fn step_frame(&self, state: &FluidState, lists: &NeighborLists, frame: usize, exec: &Exec) -> Result<FluidState> {
        self.step(state, lists, frame, exec)
    }
}
