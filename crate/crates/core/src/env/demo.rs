use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{State, Task, Trajectory, Vec3};
use crate::error::{Error, Result};

/// Share of the horizon spent on the horizontal approach.
pub const PHASE_ONE_FRACTION: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedClass {
    /// Roughly 3 s.
    Fast,
    /// Roughly 5 s.
    Slow,
    /// Exactly the base duration.
    Aligned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Demonstration {
    pub trajectory: Trajectory,
    pub goal: Vec3,
    pub speed_class: SpeedClass,
    pub seed: u64,
}

impl Demonstration {
    pub fn new(trajectory: Trajectory, speed_class: SpeedClass, seed: u64) -> Self {
        let goal = trajectory.last().position;
        Demonstration {
            trajectory,
            goal,
            speed_class,
            seed,
        }
    }

    pub fn with_speed_class(mut self, class: SpeedClass) -> Self {
        self.speed_class = class;
        self
    }

    pub fn horizon(&self) -> usize {
        self.trajectory.horizon()
    }
}

fn lerp(a: Vec3, b: Vec3, s: f64) -> Vec3 {
    // (1 - s) a + s b hits both endpoints exactly.
    [
        (1.0 - s) * a[0] + s * b[0],
        (1.0 - s) * a[1] + s * b[1],
        (1.0 - s) * a[2] + s * b[2],
    ]
}

/// Hand-designed expert: straight to the point above the goal at constant
/// velocity, then straight down at constant velocity.
///
/// The horizon is `(duration + jitter) * frequency` rounded to the nearest
/// step; the first phase takes 60% of it (rounded, at least one step each).
pub fn expert_demo(task: &Task, duration_jitter: f64, rng_seed: u64) -> Result<Demonstration> {
    let start = task.geometry.start;
    let goal = task.goal;
    if goal[2] > start[2] {
        return Err(Error::TaskDefinition(format!(
            "goal height {} is above the start height {}",
            goal[2], start[2]
        )));
    }
    let total = task.duration + duration_jitter;
    let horizon = (total * task.frequency).round();
    if !(horizon >= 2.0) {
        return Err(Error::TaskDefinition(format!(
            "expert needs at least two steps, duration {total} s gives {horizon}"
        )));
    }
    let horizon = horizon as usize;
    let dt = task.dt();
    let first = ((PHASE_ONE_FRACTION * horizon as f64).round() as usize).clamp(1, horizon - 1);
    let second = horizon - first;
    let waypoint = [goal[0], goal[1], start[2]];

    let v1 = [
        (waypoint[0] - start[0]) / (first as f64 * dt),
        (waypoint[1] - start[1]) / (first as f64 * dt),
        0.0,
    ];
    let v2 = [0.0, 0.0, (goal[2] - waypoint[2]) / (second as f64 * dt)];

    let mut states = Vec::with_capacity(horizon + 1);
    states.push(State::at_rest(start));
    for t in 1..=horizon {
        let state = if t <= first {
            State {
                position: lerp(start, waypoint, t as f64 / first as f64),
                velocity: v1,
            }
        } else {
            State {
                position: lerp(waypoint, goal, (t - first) as f64 / second as f64),
                velocity: v2,
            }
        };
        states.push(state);
    }
    let trajectory = Trajectory::new(states, dt)?;
    debug_assert_eq!(trajectory.last().position, goal);
    Ok(Demonstration::new(trajectory, SpeedClass::Aligned, rng_seed))
}

/// One line of a demonstration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoRecord {
    pub seed: u64,
    pub dt: f64,
    pub goal: Vec3,
    pub speed_class: SpeedClass,
    /// `[x, y, z, vx, vy, vz]` per state.
    pub states: Vec<[f64; 6]>,
}

impl From<&Demonstration> for DemoRecord {
    fn from(d: &Demonstration) -> Self {
        DemoRecord {
            seed: d.seed,
            dt: d.trajectory.dt(),
            goal: d.goal,
            speed_class: d.speed_class,
            states: d
                .trajectory
                .states()
                .iter()
                .map(|s| {
                    let (p, v) = (s.position, s.velocity);
                    [p[0], p[1], p[2], v[0], v[1], v[2]]
                })
                .collect(),
        }
    }
}

impl TryFrom<DemoRecord> for Demonstration {
    type Error = Error;
    fn try_from(r: DemoRecord) -> Result<Self> {
        let states = r
            .states
            .iter()
            .map(|s| State {
                position: [s[0], s[1], s[2]],
                velocity: [s[3], s[4], s[5]],
            })
            .collect();
        let trajectory = Trajectory::new(states, r.dt)?;
        if trajectory.last().position != r.goal {
            return Err(Error::InvalidArgument(
                "demonstration goal differs from its final position".into(),
            ));
        }
        Ok(Demonstration {
            trajectory,
            goal: r.goal,
            speed_class: r.speed_class,
            seed: r.seed,
        })
    }
}

/// Writes one JSON record per line. Floats use shortest round-trip decimal
/// form, so reading back is bit-exact.
pub fn write_demos<W: Write>(mut w: W, demos: &[Demonstration]) -> Result<()> {
    for d in demos {
        serde_json::to_writer(&mut w, &DemoRecord::from(d))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_demos<R: BufRead>(r: R) -> Result<Vec<Demonstration>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DemoRecord = serde_json::from_str(&line)?;
        out.push(Demonstration::try_from(rec)?);
    }
    Ok(out)
}
