use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Vec3;
use crate::error::{Error, Result};

pub const DEFAULT_FREQUENCY: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Placement,
    #[serde(alias = "peg")]
    PegInHole,
}

impl TaskKind {
    pub const ALL: [TaskKind; 2] = [TaskKind::Placement, TaskKind::PegInHole];

    pub fn short_name(self) -> &'static str {
        match self {
            TaskKind::Placement => "placement",
            TaskKind::PegInHole => "peg",
        }
    }
}

impl std::str::FromStr for TaskKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "placement" => Ok(TaskKind::Placement),
            "peg" | "peg-in-hole" => Ok(TaskKind::PegInHole),
            other => Err(Error::Config(format!("unknown environment '{other}'"))),
        }
    }
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Desk-scale scene constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub start: Vec3,
    /// Table-edge plane `y = table_edge_y`; the object must cross it before
    /// descending into the corner zone.
    pub table_edge_y: f64,
    pub table_height: f64,
    /// Height above the table top that counts as the corner zone on the
    /// near side of the edge.
    pub corner_clearance: f64,
    pub hole_radius: f64,
    pub hole_top: f64,
}

impl Geometry {
    pub const START: Vec3 = [0.0, 0.0, 10.0];
    pub const GOAL_CENTER: Vec3 = [0.0, 10.0, 0.0];
    /// Distance from the table edge to the goal along +y.
    pub const EDGE_SETBACK: f64 = 2.0;

    /// Geometry for a task whose goal sits at `goal`. The table edge keeps a
    /// fixed setback from the goal, so for the nominal goal it lies at y = 8.
    pub fn for_goal(goal: Vec3) -> Self {
        Geometry {
            start: Self::START,
            table_edge_y: goal[1] - Self::EDGE_SETBACK,
            table_height: 0.0,
            corner_clearance: 3.0,
            hole_radius: 0.5,
            hole_top: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub goal: Vec3,
    pub duration: f64,
    pub frequency: f64,
    pub kind: TaskKind,
    pub geometry: Geometry,
}

impl Task {
    pub fn new(kind: TaskKind, goal: Vec3, duration: f64) -> Result<Self> {
        Self::with_frequency(kind, goal, duration, DEFAULT_FREQUENCY)
    }

    pub fn with_frequency(kind: TaskKind, goal: Vec3, duration: f64, frequency: f64) -> Result<Self> {
        let steps = duration * frequency;
        if !(frequency > 0.0) || !(steps >= 0.5) || (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::TaskDefinition(format!(
                "duration {duration} s at {frequency} Hz is not a positive whole number of steps"
            )));
        }
        if goal.iter().any(|v| !v.is_finite()) {
            return Err(Error::TaskDefinition("goal must be finite".into()));
        }
        Ok(Task {
            goal,
            duration,
            frequency,
            kind,
            geometry: Geometry::for_goal(goal),
        })
    }

    pub fn horizon(&self) -> usize {
        (self.duration * self.frequency).round() as usize
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.frequency
    }
}

/// `n` goals uniform in the horizontal disc of `radius_cm` around `center`,
/// crossed with every duration in `speeds` (goal-major order).
pub fn sample_tasks(
    kind: TaskKind,
    center: Vec3,
    radius_cm: f64,
    n: usize,
    speeds: &[f64],
    rng_seed: u64,
) -> Result<Vec<Task>> {
    if !(radius_cm > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius_cm}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one goal".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut tasks = Vec::with_capacity(n * speeds.len());
    for _ in 0..n {
        let r = radius_cm * rng.gen::<f64>().sqrt();
        let theta = std::f64::consts::TAU * rng.gen::<f64>();
        let goal = [center[0] + r * theta.cos(), center[1] + r * theta.sin(), center[2]];
        for &d in speeds {
            tasks.push(Task::new(kind, goal, d)?);
        }
    }
    Ok(tasks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::horizontal_dist;

    #[test]
    fn horizon_at_five_hz() {
        let t = Task::new(TaskKind::Placement, Geometry::GOAL_CENTER, 3.0).unwrap();
        assert_eq!(t.horizon(), 15);
        assert_eq!(t.geometry.table_edge_y, 8.0);
    }

    #[test]
    fn fractional_horizon_rejected() {
        assert!(Task::new(TaskKind::Placement, Geometry::GOAL_CENTER, 3.1).is_err());
        assert!(Task::new(TaskKind::Placement, Geometry::GOAL_CENTER, 0.0).is_err());
    }

    #[test]
    fn degenerate_radius() {
        let tasks = sample_tasks(TaskKind::PegInHole, Geometry::GOAL_CENTER, 1e-4, 3, &[3.0], 7).unwrap();
        assert_eq!(tasks.len(), 3);
        for t in &tasks {
            assert!(horizontal_dist(t.goal, Geometry::GOAL_CENTER) <= 1e-4);
            assert_eq!(t.goal[2], 0.0);
        }
    }

    #[test]
    fn bins_times_speeds() {
        let speeds = [2.0, 3.0, 4.0, 5.0, 6.0];
        let total: usize = [1.0, 3.0, 5.0]
            .iter()
            .map(|&r| {
                sample_tasks(TaskKind::Placement, Geometry::GOAL_CENTER, r, 10, &speeds, 0)
                    .unwrap()
                    .len()
            })
            .sum();
        assert_eq!(total, 150);
    }

    #[test]
    fn goals_stay_in_disc() {
        let tasks = sample_tasks(TaskKind::Placement, Geometry::GOAL_CENTER, 1.0, 10, &[3.0], 3).unwrap();
        assert!(tasks.iter().all(|t| horizontal_dist(t.goal, Geometry::GOAL_CENTER) <= 1.0));
    }

    #[test]
    fn invalid_sampling_arguments() {
        assert!(sample_tasks(TaskKind::Placement, Geometry::GOAL_CENTER, 0.0, 1, &[3.0], 0).is_err());
        assert!(sample_tasks(TaskKind::Placement, Geometry::GOAL_CENTER, 1.0, 0, &[3.0], 0).is_err());
    }
}
