use serde::{Deserialize, Serialize};

use super::{dist3, horizontal_dist, norm3, sub3, Task, TaskKind, Trajectory, Vec3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    /// Placement: Euclidean distance from the final position to the goal.
    /// Peg-in-hole: horizontal distance from the final position to the hole axis.
    pub final_distance: f64,
    pub strategy_violation: bool,
    pub inserted: bool,
    pub achieved_speed: f64,
}

/// Path length over duration, cm/s.
pub fn achieved_speed(traj: &Trajectory) -> f64 {
    let path: f64 = traj
        .states()
        .windows(2)
        .map(|w| norm3(sub3(w[1].position, w[0].position)))
        .sum();
    path / traj.duration()
}

/// Set of s in [0, 1] with `a + s b < thr`, as a (lo, hi) bound pair.
fn below_on_segment(a: f64, b: f64, thr: f64) -> (f64, f64) {
    if b == 0.0 {
        if a < thr {
            (0.0, 1.0)
        } else {
            (1.0, 0.0)
        }
    } else if b > 0.0 {
        (0.0, ((thr - a) / b).min(1.0))
    } else {
        (((thr - a) / b).max(0.0), 1.0)
    }
}

/// Whether the segment p -> q enters the open corner zone
/// `y < edge_y, z < zone_top`.
fn segment_enters_corner(p: Vec3, q: Vec3, edge_y: f64, zone_top: f64) -> bool {
    let (lo1, hi1) = below_on_segment(p[1], q[1] - p[1], edge_y);
    let (lo2, hi2) = below_on_segment(p[2], q[2] - p[2], zone_top);
    let lo = lo1.max(lo2);
    let hi = hi1.min(hi2);
    if lo < hi {
        return true;
    }
    if lo == hi && (0.0..=1.0).contains(&lo) {
        let y = p[1] + lo * (q[1] - p[1]);
        let z = p[2] + lo * (q[2] - p[2]);
        return y < edge_y && z < zone_top;
    }
    false
}

pub fn placement_outcome(traj: &Trajectory, task: &Task) -> Outcome {
    let g = &task.geometry;
    let zone_top = g.table_height + g.corner_clearance;
    let positions = traj.positions();
    let strategy_violation = positions
        .windows(2)
        .any(|w| segment_enters_corner(w[0], w[1], g.table_edge_y, zone_top));
    Outcome {
        final_distance: dist3(traj.last().position, task.goal),
        strategy_violation,
        inserted: false,
        achieved_speed: achieved_speed(traj),
    }
}

/// Inserted iff the path crosses the hole-top plane downward within the hole
/// radius of the axis, and every later state stays inside the hole (within
/// the radius horizontally and not above the hole top).
pub fn insertion_success(traj: &Trajectory, task: &Task) -> Outcome {
    let g = &task.geometry;
    let axis = task.goal;
    let positions = traj.positions();
    let inside = |p: Vec3| horizontal_dist(p, axis) <= g.hole_radius && p[2] <= g.hole_top;
    // `contained_from[t]`: states t.. all stay inside.
    let mut contained_from = vec![true; positions.len() + 1];
    for t in (0..positions.len()).rev() {
        contained_from[t] = contained_from[t + 1] && inside(positions[t]);
    }
    let inserted = (1..positions.len()).any(|t| {
        let (p, q) = (positions[t - 1], positions[t]);
        if !(p[2] > g.hole_top && q[2] <= g.hole_top) {
            return false;
        }
        let s = (p[2] - g.hole_top) / (p[2] - q[2]);
        let cross = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1]), g.hole_top];
        horizontal_dist(cross, axis) <= g.hole_radius && contained_from[t]
    });
    Outcome {
        final_distance: horizontal_dist(traj.last().position, axis),
        strategy_violation: false,
        inserted,
        achieved_speed: achieved_speed(traj),
    }
}

/// Dispatches on the task kind.
pub fn outcome(traj: &Trajectory, task: &Task) -> Result<Outcome> {
    if traj.positions().is_empty() {
        return Err(Error::Invariant("empty trajectory".into()));
    }
    Ok(match task.kind {
        TaskKind::Placement => placement_outcome(traj, task),
        TaskKind::PegInHole => insertion_success(traj, task),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{expert_demo, Geometry, State};

    fn traj(points: &[Vec3]) -> Trajectory {
        Trajectory::new(points.iter().map(|&p| State::at_rest(p)).collect(), 0.2).unwrap()
    }

    fn straight(a: Vec3, b: Vec3, steps: usize) -> Trajectory {
        let pts: Vec<Vec3> = (0..=steps)
            .map(|t| {
                let s = t as f64 / steps as f64;
                [
                    (1.0 - s) * a[0] + s * b[0],
                    (1.0 - s) * a[1] + s * b[1],
                    (1.0 - s) * a[2] + s * b[2],
                ]
            })
            .collect();
        traj(&pts)
    }

    fn task(kind: TaskKind) -> Task {
        Task::new(kind, Geometry::GOAL_CENTER, 3.0).unwrap()
    }

    #[test]
    fn expert_places_cleanly() {
        let t = task(TaskKind::Placement);
        let d = expert_demo(&t, 0.0, 0).unwrap();
        let o = placement_outcome(&d.trajectory, &t);
        assert!(!o.strategy_violation);
        assert_eq!(o.final_distance, 0.0);
    }

    #[test]
    fn straight_line_cuts_the_corner() {
        // The segment from the start to the goal crosses y = 8 at z = 2,
        // inside the 3 cm corner zone.
        let t = task(TaskKind::Placement);
        for steps in [10, 15, 25] {
            let o = placement_outcome(&straight(Geometry::START, t.goal, steps), &t);
            assert!(o.strategy_violation, "{steps} steps");
            assert!(o.final_distance < 1e-12);
        }
    }

    #[test]
    fn ending_one_cm_off() {
        let t = task(TaskKind::Placement);
        let end = [t.goal[0] + 1.0, t.goal[1], t.goal[2]];
        let o = placement_outcome(&traj(&[[0.0, 10.0, 10.0], end]), &t);
        assert_eq!(o.final_distance, 1.0);
        assert!(!o.strategy_violation);
    }

    #[test]
    fn expert_inserts() {
        let t = task(TaskKind::PegInHole);
        let d = expert_demo(&t, 0.0, 0).unwrap();
        let o = insertion_success(&d.trajectory, &t);
        assert!(o.inserted);
        assert!(o.final_distance <= t.geometry.hole_radius);
    }

    #[test]
    fn off_axis_descent_fails() {
        let t = task(TaskKind::PegInHole);
        let o = insertion_success(&straight([2.0, 10.0, 10.0], [2.0, 10.0, 0.0], 10), &t);
        assert!(!o.inserted);
    }

    #[test]
    fn drifting_after_entry_fails() {
        let t = task(TaskKind::PegInHole);
        let path = [
            [0.0, 10.0, 10.0],
            [0.0, 10.0, 5.0],
            [0.0, 10.0, 0.8],
            [0.5, 10.0, 0.5],
            [1.0, 10.0, 0.3],
        ];
        let o = insertion_success(&traj(&path), &t);
        assert!(!o.inserted);
        // without the drift the same entry succeeds
        let ok = insertion_success(&traj(&path[..3]), &t);
        assert!(ok.inserted);
    }

    #[test]
    fn never_reaching_hole_top_fails() {
        let t = task(TaskKind::PegInHole);
        let o = insertion_success(&straight([0.0, 10.0, 10.0], [0.0, 10.0, 1.5], 5), &t);
        assert!(!o.inserted);
    }

    #[test]
    fn speed_of_straight_line() {
        let tr = straight([0.0; 3], [3.0, 0.0, 0.0], 15);
        assert!((achieved_speed(&tr) - 1.0).abs() < 1e-12);
        assert_eq!(achieved_speed(&traj(&[[1.0; 3]; 4])), 0.0);
    }
}
