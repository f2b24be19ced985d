//! Bi-level cost learning.
//!
//! For each demonstration: start from zero actions, take `inner_steps`
//! gradient steps on the current cost (lambda computed from the demo's
//! length), roll out, and move the cost parameters down the gradient of the
//! imitation loss taken through every inner step.

use std::fmt;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::costs::{init_params, temporal_scalar, CostKind, CostParams, CostSettings, LambdaScalar, DEFAULT_CENTERS};
use crate::diffcore::{grad_through_inner_loop, sum, InnerLoop, Scalar, ScalarFunction};
use crate::env::{
    achieved_speed, rollout, rollout_positions, unflatten_actions, Demonstration, Geometry, State,
    Trajectory, Vec3,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Outer (cost parameter) learning rate.
    pub outer_rate: f64,
    /// Inner (action) learning rate.
    pub inner_rate: f64,
    pub inner_steps: usize,
    pub epochs: usize,
    /// Horizon of the base timeline, steps.
    pub base_steps: usize,
    pub rng_seed: u64,
    pub kind: CostKind,
    pub centers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            outer_rate: 0.001,
            inner_rate: 0.01,
            inner_steps: 5,
            epochs: 100,
            base_steps: 15,
            rng_seed: 0,
            kind: CostKind::LambdaRbf,
            centers: DEFAULT_CENTERS,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.outer_rate > 0.0 && self.outer_rate.is_finite()) {
            return Err(Error::Config(format!("outer rate must be positive, got {}", self.outer_rate)));
        }
        if !(self.inner_rate > 0.0 && self.inner_rate.is_finite()) {
            return Err(Error::Config(format!("inner rate must be positive, got {}", self.inner_rate)));
        }
        if self.inner_steps == 0 {
            return Err(Error::Config("inner_steps must be at least 1".into()));
        }
        if self.base_steps < 2 {
            return Err(Error::Config("base_steps must be at least 2".into()));
        }
        if self.centers < 2 {
            return Err(Error::Config("need at least 2 RBF centers".into()));
        }
        Ok(())
    }

    pub fn inner_loop(&self) -> InnerLoop {
        InnerLoop {
            steps: self.inner_steps,
            step_size: self.inner_rate,
        }
    }

    pub fn cost_settings(&self, dt: f64) -> CostSettings {
        CostSettings {
            centers: self.centers,
            base_duration: self.base_steps as f64 / (1.0 / dt).round(),
        }
    }
}

/// The current cost as a function of (phi, flat actions): roll out from
/// `start`, then evaluate.
pub struct ActionCost<'a> {
    pub params: &'a CostParams,
    pub lam: LambdaScalar,
    pub start: Vec3,
    pub dt: f64,
    pub goal: Vec3,
}

impl ScalarFunction for ActionCost<'_> {
    fn eval<T: Scalar>(&self, phi: &[T], actions: &[T]) -> T {
        let positions = rollout_positions(self.start, actions, self.dt);
        self.params.evaluate(phi, self.lam, &positions, self.dt, self.goal)
    }
}

/// Imitation loss of the rollout of flat actions against a demonstration.
pub struct DemoLoss<'a> {
    pub start: Vec3,
    pub dt: f64,
    pub demo: &'a [Vec3],
}

impl ScalarFunction for DemoLoss<'_> {
    fn eval<T: Scalar>(&self, _phi: &[T], actions: &[T]) -> T {
        let positions = rollout_positions(self.start, actions, self.dt);
        position_mse(&positions, self.demo)
    }
}

fn position_mse<T: Scalar>(a: &[[T; 3]], b: &[Vec3]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let zero = a[0][0].lift(0.0);
    let per_step: Vec<T> = a
        .iter()
        .zip(b)
        .map(|(p, q)| (p[0] - q[0]).square() + (p[1] - q[1]).square() + (p[2] - q[2]).square())
        .collect();
    sum(&per_step, zero) / a.len() as f64
}

/// Mean over states of the squared Euclidean position distance, cm^2.
pub fn irl_loss(rollout: &Trajectory, demo: &Trajectory) -> Result<f64> {
    if rollout.states().len() != demo.states().len() {
        return Err(Error::Invariant(format!(
            "rollout has {} states but the demonstration has {}",
            rollout.states().len(),
            demo.states().len()
        )));
    }
    Ok(position_mse(&rollout.positions(), &demo.positions()))
}

/// Initial state shared by every task.
pub fn initial_state() -> State {
    State::at_rest(Geometry::START)
}

/// Gradient descent on the actions from zero, `cfg.inner_steps` times.
pub fn inner_optimize(
    params: &CostParams,
    demo: &Demonstration,
    lam: LambdaScalar,
    s0: &State,
    cfg: &TrainConfig,
) -> Result<Vec<Vec3>> {
    optimize_actions(params, demo.goal, demo.horizon(), demo.trajectory.dt(), lam, s0, cfg.inner_loop())
}

/// Policy extraction: `inner.steps` descent steps on the cost from zero actions.
pub fn optimize_actions(
    params: &CostParams,
    goal: Vec3,
    horizon: usize,
    dt: f64,
    lam: LambdaScalar,
    s0: &State,
    inner: InnerLoop,
) -> Result<Vec<Vec3>> {
    let cost = ActionCost {
        params,
        lam,
        start: s0.position,
        dt,
        goal,
    };
    let u = inner.run(&cost, &params.flat(), &vec![0.0; 3 * horizon])?;
    Ok(unflatten_actions(&u))
}

/// Result of one outer step.
#[derive(Debug, Clone)]
pub struct OuterStep {
    pub params: CostParams,
    /// Imitation loss of the pre-update rollout.
    pub loss: f64,
    /// Rollout of the inner loop's actions under the pre-update cost.
    pub rollout: Trajectory,
}

pub fn outer_update(params: &CostParams, demo: &Demonstration, cfg: &TrainConfig) -> Result<OuterStep> {
    let s0 = initial_state();
    let dt = demo.trajectory.dt();
    let lam = temporal_scalar(cfg.base_steps, demo.horizon())?;
    let demo_positions = demo.trajectory.positions();
    let cost = ActionCost {
        params,
        lam,
        start: s0.position,
        dt,
        goal: demo.goal,
    };
    let loss = DemoLoss {
        start: s0.position,
        dt,
        demo: &demo_positions,
    };
    let phi = params.flat();
    let unrolled = grad_through_inner_loop(&phi, &vec![0.0; 3 * demo.horizon()], cfg.inner_loop(), &cost, &loss)?;
    let updated: Vec<f64> = phi
        .iter()
        .zip(&unrolled.grad)
        .map(|(p, g)| p - cfg.outer_rate * g)
        .collect();
    if let Some(i) = updated.iter().position(|v| !v.is_finite()) {
        return Err(Error::NumericDomain {
            what: "cost parameter",
            index: Some(i),
        });
    }
    let rollout = rollout(&s0, &unflatten_actions(&unrolled.input), dt)?;
    Ok(OuterStep {
        params: params.with_flat(&updated)?,
        loss: unrolled.loss,
        rollout,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub epoch: usize,
    pub demo_index: usize,
    pub irl_loss: f64,
    /// |achieved - demonstrated| average speed, cm/s.
    pub speed_error: f64,
    pub seconds_elapsed: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub records: Vec<HistoryRecord>,
}

impl TrainHistory {
    /// Mean imitation loss per epoch.
    pub fn epoch_losses(&self) -> Vec<f64> {
        self.epoch_means(|r| r.irl_loss)
    }

    /// Mean squared speed error per epoch, (cm/s)^2.
    pub fn epoch_speed_mse(&self) -> Vec<f64> {
        self.epoch_means(|r| r.speed_error * r.speed_error)
    }

    fn epoch_means(&self, f: impl Fn(&HistoryRecord) -> f64) -> Vec<f64> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for r in &self.records {
            if out.len() <= r.epoch {
                out.resize(r.epoch + 1, (0.0, 0));
            }
            out[r.epoch].0 += f(r);
            out[r.epoch].1 += 1;
        }
        out.into_iter().map(|(s, n)| s / n.max(1) as f64).collect()
    }

    /// Same records ignoring wall-clock timing.
    pub fn same_trajectory_as(&self, other: &TrainHistory) -> bool {
        self.records.len() == other.records.len()
            && self.records.iter().zip(&other.records).all(|(a, b)| {
                a.epoch == b.epoch
                    && a.demo_index == b.demo_index
                    && a.irl_loss.to_bits() == b.irl_loss.to_bits()
                    && a.speed_error.to_bits() == b.speed_error.to_bits()
            })
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "epoch,demo_index,irl_loss,speed_error,seconds_elapsed")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.epoch, r.demo_index, r.irl_loss, r.speed_error, r.seconds_elapsed
            )?;
        }
        Ok(())
    }
}

/// A run that stopped early; `history` covers everything before the failure.
#[derive(Debug)]
pub struct TrainFailure {
    pub error: Error,
    pub history: TrainHistory,
    pub params: CostParams,
}

impl fmt::Display for TrainFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} history records kept)", self.error, self.history.records.len())
    }
}

impl std::error::Error for TrainFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<TrainFailure> for Error {
    fn from(f: TrainFailure) -> Self {
        f.error
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: CostParams,
    pub history: TrainHistory,
}

/// Runs `cfg.epochs` passes over `demos`, visiting them in a fresh
/// seed-shuffled order each epoch. Deterministic given the config.
pub fn train(cfg: &TrainConfig, demos: &[Demonstration]) -> std::result::Result<TrainOutcome, TrainFailure> {
    let fail = |error: Error, params: CostParams, history: TrainHistory| TrainFailure { error, history, params };
    let placeholder = || init_params(cfg.kind, cfg.rng_seed, &CostSettings::default());
    if let Err(e) = cfg.validate() {
        return Err(fail(e, placeholder().expect("default settings are valid"), TrainHistory::default()));
    }
    let Some(first) = demos.first() else {
        return Err(fail(
            Error::InvalidArgument("training needs at least one demonstration".into()),
            placeholder().expect("default settings are valid"),
            TrainHistory::default(),
        ));
    };
    let dt = first.trajectory.dt();
    let mut params = match init_params(cfg.kind, cfg.rng_seed, &cfg.cost_settings(dt)) {
        Ok(p) => p,
        Err(e) => return Err(fail(e, placeholder().expect("default settings are valid"), TrainHistory::default())),
    };
    let mut history = TrainHistory::default();
    if demos.iter().any(|d| d.trajectory.dt() != dt) {
        return Err(fail(
            Error::InvalidArgument("all demonstrations must share one control period".into()),
            params,
            history,
        ));
    }
    let target_speeds: Vec<f64> = demos.iter().map(|d| achieved_speed(&d.trajectory)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut order: Vec<usize> = (0..demos.len()).collect();
    let clock = Instant::now();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            match outer_update(&params, &demos[i], cfg) {
                Ok(step) => {
                    history.records.push(HistoryRecord {
                        epoch,
                        demo_index: i,
                        irl_loss: step.loss,
                        speed_error: (achieved_speed(&step.rollout) - target_speeds[i]).abs(),
                        seconds_elapsed: clock.elapsed().as_secs_f64(),
                    });
                    params = step.params;
                }
                Err(e) => {
                    let error = Error::Training {
                        epoch,
                        demo: i,
                        source: Box::new(e),
                    };
                    return Err(fail(error, params, history));
                }
            }
        }
    }
    Ok(TrainOutcome { params, history })
}
