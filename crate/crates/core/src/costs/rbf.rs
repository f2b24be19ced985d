use serde::{Deserialize, Serialize};

use super::LambdaScalar;
use crate::diffcore::{sum, Scalar};
use crate::env::{Trajectory, Vec3};
use crate::error::{Error, Result};

pub const DEFAULT_CENTERS: usize = 10;

/// Weighted Gaussian kernels with centers spread over the base timeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfParams {
    /// `weights[j][k]`: center j, state dimension k.
    pub weights: Vec<[f64; 3]>,
    /// Seconds on the base timeline.
    pub centers: Vec<f64>,
    /// 1/s^2.
    pub bandwidth: f64,
    pub base_duration: f64,
}

/// `K` centers evenly spaced over `[0, base_duration]`, endpoints included.
pub fn rbf_centers(k: usize, base_duration: f64) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 RBF centers, got {k}")));
    }
    Ok((0..k).map(|j| j as f64 * base_duration / (k - 1) as f64).collect())
}

/// Bandwidth at which neighbouring kernels cross near 0.6.
pub fn default_bandwidth(k: usize, base_duration: f64) -> f64 {
    let k1 = (k - 1) as f64;
    2.0 * k1 * k1 / (base_duration * base_duration)
}

impl RbfParams {
    pub fn new(k: usize, base_duration: f64, weight: f64) -> Result<Self> {
        Ok(RbfParams {
            weights: vec![[weight; 3]; k],
            centers: rbf_centers(k, base_duration)?,
            bandwidth: default_bandwidth(k, base_duration),
            base_duration,
        })
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn flat(&self) -> Vec<f64> {
        self.weights.iter().flatten().copied().collect()
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), 3 * self.k());
        for (w, c) in self.weights.iter_mut().zip(flat.chunks_exact(3)) {
            w.copy_from_slice(c);
        }
    }

    /// `exp(-b (lam x - mu_j)^2)` for every timestamp x (rows) and center j.
    pub fn kernel_activations(&self, lam: LambdaScalar, timestamps: &[f64]) -> Vec<Vec<f64>> {
        timestamps
            .iter()
            .map(|&x| {
                let phase = lam.value() * x;
                self.centers
                    .iter()
                    .map(|&mu| (-self.bandwidth * (phase - mu) * (phase - mu)).exp())
                    .collect()
            })
            .collect()
    }
}

/// Mean over states t of `sum_k (sum_j w[j][k] kappa_j(lam x_t)) (z_tk - g_k)^2`
/// with `x_t = t dt`. Weights come from `flat` in `[j][k]` order.
pub fn rbf_cost<T: Scalar>(p: &RbfParams, flat: &[T], lam: LambdaScalar, positions: &[[T; 3]], dt: f64, goal: Vec3) -> T {
    assert_eq!(flat.len(), 3 * p.k());
    let timestamps: Vec<f64> = (0..positions.len()).map(|t| t as f64 * dt).collect();
    let kernels = p.kernel_activations(lam, &timestamps);
    let zero = flat[0].lift(0.0);
    let per_step: Vec<T> = positions
        .iter()
        .zip(&kernels)
        .map(|(z, kappa)| {
            let dims: Vec<T> = (0..3)
                .map(|k| {
                    let weighted: Vec<T> = kappa.iter().enumerate().map(|(j, &a)| flat[3 * j + k] * a).collect();
                    sum(&weighted, zero) * (z[k] - goal[k]).square()
                })
                .collect();
            sum(&dims, zero)
        })
        .collect();
    sum(&per_step, zero) / positions.len() as f64
}

pub fn eval_rbf_cost(p: &RbfParams, lam: LambdaScalar, traj: &Trajectory, goal: Vec3) -> f64 {
    rbf_cost(p, &p.flat(), lam, &traj.positions(), traj.dt(), goal)
}
