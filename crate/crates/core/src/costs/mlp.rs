use serde::{Deserialize, Serialize};

use super::LambdaScalar;
use crate::diffcore::{sum, Scalar};
use crate::env::{Trajectory, Vec3};

pub const HIDDEN: usize = 16;

/// Squared goal errors enter the network in units of this many cm².
pub const ERROR_SCALE: f64 = 300.0;

/// One hidden sigmoid layer of width 16, linear output.
///
/// Input features per state: the three per-dimension squared goal errors,
/// plus the scaled timestamp `lam * x_t` when `uses_lambda_input`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    /// Row-major `HIDDEN x input_dim`.
    pub hidden_weights: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
    pub uses_lambda_input: bool,
}

impl MlpParams {
    pub fn zeros(uses_lambda_input: bool) -> Self {
        let input = Self::input_dim_for(uses_lambda_input);
        MlpParams {
            hidden_weights: vec![0.0; HIDDEN * input],
            hidden_bias: vec![0.0; HIDDEN],
            output_weights: vec![0.0; HIDDEN],
            output_bias: 0.0,
            uses_lambda_input,
        }
    }

    fn input_dim_for(uses_lambda_input: bool) -> usize {
        if uses_lambda_input {
            4
        } else {
            3
        }
    }

    pub fn input_dim(&self) -> usize {
        Self::input_dim_for(self.uses_lambda_input)
    }

    pub fn len(&self) -> usize {
        HIDDEN * self.input_dim() + 2 * HIDDEN + 1
    }

    /// Layout: hidden weights, hidden bias, output weights, output bias.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&self.hidden_weights);
        v.extend_from_slice(&self.hidden_bias);
        v.extend_from_slice(&self.output_weights);
        v.push(self.output_bias);
        v
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.len());
        let w = HIDDEN * self.input_dim();
        self.hidden_weights.copy_from_slice(&flat[..w]);
        self.hidden_bias.copy_from_slice(&flat[w..w + HIDDEN]);
        self.output_weights.copy_from_slice(&flat[w + HIDDEN..w + 2 * HIDDEN]);
        self.output_bias = flat[w + 2 * HIDDEN];
    }
}

fn forward<T: Scalar>(flat: &[T], input_dim: usize, errors: [T; 3], time_feature: Option<f64>, zero: T) -> T {
    let w = HIDDEN * input_dim;
    let (hw, rest) = flat.split_at(w);
    let (hb, rest) = rest.split_at(HIDDEN);
    let (ow, ob) = rest.split_at(HIDDEN);
    let outputs: Vec<T> = (0..HIDDEN)
        .map(|h| {
            let row = &hw[h * input_dim..(h + 1) * input_dim];
            let mut terms: Vec<T> = (0..3).map(|i| row[i] * errors[i]).collect();
            if let Some(x) = time_feature {
                terms.push(row[3] * x);
            }
            let pre = sum(&terms, zero) + hb[h];
            ow[h] * pre.sigmoid()
        })
        .collect();
    sum(&outputs, zero) + ob[0]
}

/// Mean over states of the network output.
pub fn mlp_cost<T: Scalar>(
    p: &MlpParams,
    flat: &[T],
    lam: LambdaScalar,
    positions: &[[T; 3]],
    dt: f64,
    goal: Vec3,
) -> T {
    assert_eq!(flat.len(), p.len());
    let zero = flat[0].lift(0.0);
    let per_step: Vec<T> = positions
        .iter()
        .enumerate()
        .map(|(t, z)| {
            let errors = [
                (z[0] - goal[0]).square() / ERROR_SCALE,
                (z[1] - goal[1]).square() / ERROR_SCALE,
                (z[2] - goal[2]).square() / ERROR_SCALE,
            ];
            let time = p.uses_lambda_input.then(|| lam.value() * (t as f64 * dt));
            forward(flat, p.input_dim(), errors, time, zero)
        })
        .collect();
    sum(&per_step, zero) / positions.len() as f64
}

pub fn eval_mlp_cost(p: &MlpParams, lam: LambdaScalar, traj: &Trajectory, goal: Vec3) -> f64 {
    mlp_cost(p, &p.flat(), lam, &traj.positions(), traj.dt(), goal)
}
