//! Point-mass dynamics, task families, the expert and task outcomes.
//!
//! Positions are in centimetres, time in seconds. The controlled body is a
//! velocity-commanded point mass: each control step moves the position by
//! `u * dt`.

mod demo;
mod outcome;
mod task;

pub use demo::{expert_demo, read_demos, write_demos, DemoRecord, Demonstration, SpeedClass, PHASE_ONE_FRACTION};
pub use outcome::{achieved_speed, insertion_success, outcome, placement_outcome, Outcome};
pub use task::{sample_tasks, Geometry, Task, TaskKind, DEFAULT_FREQUENCY};

use serde::{Deserialize, Serialize};

use crate::diffcore::Scalar;
use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

pub(crate) fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn norm3(a: Vec3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

pub(crate) fn dist3(a: Vec3, b: Vec3) -> f64 {
    norm3(sub3(a, b))
}

pub(crate) fn horizontal_dist(a: Vec3, b: Vec3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub position: Vec3,
    /// Last commanded velocity; reporting only.
    pub velocity: Vec3,
}

impl State {
    pub fn at_rest(position: Vec3) -> Self {
        State {
            position,
            velocity: [0.0; 3],
        }
    }
}

/// Time-indexed states at a uniform control period.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    states: Vec<State>,
    dt: f64,
}

impl Trajectory {
    pub fn new(states: Vec<State>, dt: f64) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "trajectory needs at least 2 states, got {}",
                states.len()
            )));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("control period must be positive, got {dt}")));
        }
        if let Some(i) = states
            .iter()
            .position(|s| s.position.iter().chain(&s.velocity).any(|v| !v.is_finite()))
        {
            return Err(Error::non_finite("trajectory state", Some(i)));
        }
        Ok(Trajectory { states, dt })
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of control steps, one less than the number of states.
    pub fn horizon(&self) -> usize {
        self.states.len() - 1
    }

    pub fn duration(&self) -> f64 {
        self.horizon() as f64 * self.dt
    }

    pub fn timestamps(&self) -> Vec<f64> {
        (0..self.states.len()).map(|t| t as f64 * self.dt).collect()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.states.iter().map(|s| s.position).collect()
    }

    pub fn initial(&self) -> &State {
        &self.states[0]
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory is never empty")
    }
}

/// One control step: `position += u dt`, `velocity = u`.
pub fn dyn_step(s: &State, u: Vec3, dt: f64) -> State {
    State {
        position: [
            s.position[0] + u[0] * dt,
            s.position[1] + u[1] * dt,
            s.position[2] + u[2] * dt,
        ],
        velocity: u,
    }
}

pub fn rollout(s0: &State, actions: &[Vec3], dt: f64) -> Result<Trajectory> {
    if actions.is_empty() {
        return Err(Error::InvalidArgument("rollout needs at least one action".into()));
    }
    let mut states = Vec::with_capacity(actions.len() + 1);
    states.push(*s0);
    for u in actions {
        let next = dyn_step(states.last().unwrap(), *u, dt);
        states.push(next);
    }
    Trajectory::new(states, dt)
}

/// Rollout over positions only, generic so it can run on tape variables.
///
/// `actions` is flat, three entries per step. Uses the same arithmetic as
/// [`dyn_step`], so `f64` results are bit-identical to [`rollout`].
pub fn rollout_positions<T: Scalar>(start: Vec3, actions: &[T], dt: f64) -> Vec<[T; 3]> {
    assert!(
        !actions.is_empty() && actions.len() % 3 == 0,
        "actions must be a nonempty flat list of 3-vectors"
    );
    let anchor = actions[0];
    let mut out = Vec::with_capacity(actions.len() / 3 + 1);
    let mut p = [anchor.lift(start[0]), anchor.lift(start[1]), anchor.lift(start[2])];
    out.push(p);
    for u in actions.chunks_exact(3) {
        p = [p[0] + u[0] * dt, p[1] + u[1] * dt, p[2] + u[2] * dt];
        out.push(p);
    }
    out
}

pub fn flatten_actions(actions: &[Vec3]) -> Vec<f64> {
    actions.iter().flatten().copied().collect()
}

pub fn unflatten_actions(flat: &[f64]) -> Vec<Vec3> {
    flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()
}
