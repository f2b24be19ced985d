use serde::{Deserialize, Serialize};

use crate::diffcore::{sum, Scalar};
use crate::env::{Trajectory, Vec3};

pub const POLY_DEGREE: usize = 3;

/// Per-dimension weights on powers 0..=3 of the state/goal difference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyParams {
    /// `weights[k][d]`: dimension k, power d.
    pub weights: [[f64; POLY_DEGREE + 1]; 3],
}

impl PolyParams {
    pub const LEN: usize = 3 * (POLY_DEGREE + 1);

    pub fn filled(w: f64) -> Self {
        PolyParams {
            weights: [[w; POLY_DEGREE + 1]; 3],
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.weights.iter().flatten().copied().collect()
    }

    pub fn from_flat(flat: &[f64]) -> Self {
        assert_eq!(flat.len(), Self::LEN);
        let mut weights = [[0.0; POLY_DEGREE + 1]; 3];
        for (k, row) in weights.iter_mut().enumerate() {
            row.copy_from_slice(&flat[k * (POLY_DEGREE + 1)..(k + 1) * (POLY_DEGREE + 1)]);
        }
        PolyParams { weights }
    }
}

/// Mean over states of `sum_k sum_d w[k][d] (z_k^d - g_k^d)^2`, with weights
/// taken from `flat` in `[k][d]` order. The d = 0 term is identically zero.
pub fn poly_cost<T: Scalar>(flat: &[T], positions: &[[T; 3]], goal: Vec3) -> T {
    assert_eq!(flat.len(), PolyParams::LEN);
    let zero = flat[0].lift(0.0);
    let per_step: Vec<T> = positions
        .iter()
        .map(|z| {
            let mut terms = Vec::with_capacity(3 * POLY_DEGREE);
            for k in 0..3 {
                let mut power = z[k];
                let mut goal_power = goal[k];
                for d in 1..=POLY_DEGREE {
                    if d > 1 {
                        power = power * z[k];
                        goal_power *= goal[k];
                    }
                    terms.push(flat[k * (POLY_DEGREE + 1) + d] * (power - goal_power).square());
                }
            }
            sum(&terms, zero)
        })
        .collect();
    sum(&per_step, zero) / positions.len() as f64
}

pub fn eval_poly_cost(p: &PolyParams, traj: &Trajectory, goal: Vec3) -> f64 {
    poly_cost(&p.flat(), &traj.positions(), goal)
}
