//! Randomized gradient checks for every cost kind: cost gradients w.r.t.
//! actions and parameters, and outer gradients through the inner loop, all
//! against central differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::costs::{init_params, temporal_scalar, CostKind, CostSettings};
use crate::diffcore::{check_gradient, grad_through_inner_loop, max_relative_error, InnerLoop, WrtParams};
use crate::env::{expert_demo, Geometry, Task, TaskKind};
use crate::error::{Error, Result};
use crate::trainer::{ActionCost, DemoLoss};

pub const FIRST_ORDER_TOL: f64 = 1e-5;
pub const BILEVEL_TOL: f64 = 1e-4;
const EPS: f64 = 1e-6;
const DT: f64 = 0.2;
const BASE_STEPS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// Cost w.r.t. actions.
    Actions,
    /// Cost w.r.t. parameters.
    Params,
    /// Imitation loss w.r.t. parameters through the inner loop.
    Bilevel,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Actions => "actions",
            CheckKind::Params => "params",
            CheckKind::Bilevel => "bilevel",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub kind: CostKind,
    pub check: CheckKind,
    pub instances: usize,
    pub max_rel_error: f64,
    pub tolerance: f64,
}

impl SuiteRow {
    pub fn passed(&self) -> bool {
        self.max_rel_error < self.tolerance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteSize {
    pub first_order: usize,
    pub bilevel: usize,
}

impl Default for SuiteSize {
    fn default() -> Self {
        SuiteSize {
            first_order: 20,
            bilevel: 10,
        }
    }
}

struct Instance {
    phi: Vec<f64>,
    horizon: usize,
    goal: [f64; 3],
}

fn instance(kind: CostKind, rng: &mut ChaCha8Rng) -> Result<(crate::costs::CostParams, Instance)> {
    let horizon = rng.gen_range(2..=10);
    let params = init_params(kind, rng.gen(), &CostSettings::default())?;
    let mut phi: Vec<f64> = params.flat().iter().map(|v| v + rng.gen_range(-0.5..0.5)).collect();
    if kind == CostKind::Poly {
        // Keep the squared and cubic terms on the scale of the linear one.
        for (i, w) in phi.iter_mut().enumerate() {
            *w *= 1e-2_f64.powi((i % 4).saturating_sub(1) as i32);
        }
    }
    let goal = [
        Geometry::GOAL_CENTER[0] + rng.gen_range(-1.0..1.0),
        Geometry::GOAL_CENTER[1] + rng.gen_range(-1.0..1.0),
        Geometry::GOAL_CENTER[2],
    ];
    Ok((params, Instance { phi, horizon, goal }))
}

/// Runs the suite for every cost kind; deterministic in `seed`.
pub fn gradient_suite(seed: u64, size: SuiteSize) -> Result<Vec<SuiteRow>> {
    let mut rows = Vec::new();
    for kind in CostKind::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (kind as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut worst_u = 0.0_f64;
        let mut worst_phi = 0.0_f64;
        for _ in 0..size.first_order {
            let (params, inst) = instance(kind, &mut rng)?;
            let u: Vec<f64> = (0..3 * inst.horizon).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let cost = ActionCost {
                params: &params,
                lam: temporal_scalar(BASE_STEPS, inst.horizon)?,
                start: Geometry::START,
                dt: DT,
                goal: inst.goal,
            };
            worst_u = worst_u.max(check_gradient(&cost, &inst.phi, &u, EPS).max_rel_error);
            worst_phi = worst_phi.max(check_gradient(&WrtParams(&cost), &u, &inst.phi, EPS).max_rel_error);
        }
        rows.push(SuiteRow {
            kind,
            check: CheckKind::Actions,
            instances: size.first_order,
            max_rel_error: worst_u,
            tolerance: FIRST_ORDER_TOL,
        });
        rows.push(SuiteRow {
            kind,
            check: CheckKind::Params,
            instances: size.first_order,
            max_rel_error: worst_phi,
            tolerance: FIRST_ORDER_TOL,
        });

        let mut worst = 0.0_f64;
        for _ in 0..size.bilevel {
            let (params, inst) = instance(kind, &mut rng)?;
            let steps = rng.gen_range(1..=5);
            let inner = InnerLoop {
                steps,
                step_size: rng.gen_range(0.02..0.2),
            };
            let task = Task::new(TaskKind::Placement, inst.goal, inst.horizon as f64 * DT)?;
            let demo = expert_demo(&task, 0.0, 0)?.trajectory.positions();
            let cost = ActionCost {
                params: &params,
                lam: temporal_scalar(BASE_STEPS, inst.horizon)?,
                start: Geometry::START,
                dt: DT,
                goal: inst.goal,
            };
            let loss = DemoLoss {
                start: Geometry::START,
                dt: DT,
                demo: &demo,
            };
            let zeros = vec![0.0; 3 * inst.horizon];
            let analytic = grad_through_inner_loop(&inst.phi, &zeros, inner, &cost, &loss)
                .map_err(|e| Error::Invariant(format!("{kind} bilevel instance: {e}")))?
                .grad;
            let objective = |phi: &[f64]| -> Result<f64> {
                let u = inner.run(&cost, phi, &zeros)?;
                Ok(crate::diffcore::ScalarFunction::eval(&loss, phi, &u))
            };
            let mut numeric = Vec::with_capacity(inst.phi.len());
            let mut phi = inst.phi.clone();
            for i in 0..phi.len() {
                let orig = phi[i];
                let mut at = |h: f64| -> Result<f64> {
                    phi[i] = orig + h;
                    objective(&phi)
                };
                let d = 8.0 * (at(EPS)? - at(-EPS)?) - (at(2.0 * EPS)? - at(-2.0 * EPS)?);
                phi[i] = orig;
                numeric.push(d / (12.0 * EPS));
            }
            worst = worst.max(max_relative_error(&analytic, &numeric));
        }
        rows.push(SuiteRow {
            kind,
            check: CheckKind::Bilevel,
            instances: size.bilevel,
            max_rel_error: worst,
            tolerance: BILEVEL_TOL,
        });
    }
    Ok(rows)
}
