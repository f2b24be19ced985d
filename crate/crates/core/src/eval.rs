//! Meta-test protocol: test-task grids, policy extraction, metrics and
//! seed-level aggregation, plus the inner-steps / data-size ablation.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::costs::{temporal_scalar, CostKind, CostParams};
use crate::diffcore::InnerLoop;
use crate::env::{expert_demo, outcome, rollout, sample_tasks, Demonstration, Geometry, Task, TaskKind, Trajectory, Vec3};
use crate::error::{Error, Result};
use crate::trainer::{initial_state, optimize_actions, train, TrainConfig};

pub use crate::env::achieved_speed;

/// Goal bins, cm from the training-goal center.
pub const GOAL_BINS: [f64; 3] = [1.0, 3.0, 5.0];

/// Test durations, seconds.
pub const TEST_DURATIONS: [f64; 5] = [2.0, 3.0, 4.0, 5.0, 6.0];

/// How actions are extracted from a learned cost at test time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub inner_steps: usize,
    pub inner_rate: f64,
    pub base_steps: usize,
}

impl Extraction {
    pub fn from_train(cfg: &TrainConfig) -> Self {
        Extraction {
            inner_steps: cfg.inner_steps,
            inner_rate: cfg.inner_rate,
            base_steps: cfg.base_steps,
        }
    }
}

/// Zero actions, `inner_steps` descent steps on the cost with
/// `lam = base_steps / horizon`, then a rollout.
pub fn extract_policy(params: &CostParams, task: &Task, ex: &Extraction) -> Result<Trajectory> {
    let horizon = task.horizon();
    let lam = temporal_scalar(ex.base_steps, horizon)?;
    let inner = InnerLoop {
        steps: ex.inner_steps,
        step_size: ex.inner_rate,
    };
    let s0 = initial_state();
    let actions = optimize_actions(params, task.goal, horizon, task.dt(), lam, &s0, inner)?;
    rollout(&s0, &actions, task.dt())
}

/// What produces the executed trajectory for a task.
#[derive(Debug, Clone, Copy)]
pub enum Policy<'a> {
    Learned { params: &'a CostParams, extraction: Extraction },
    /// The demonstrator itself; an upper bound on every metric.
    Expert,
}

impl Policy<'_> {
    pub fn execute(&self, task: &Task) -> Result<Trajectory> {
        match self {
            Policy::Learned { params, extraction } => extract_policy(params, task, extraction),
            Policy::Expert => Ok(expert_demo(task, 0.0, 0)?.trajectory),
        }
    }
}

/// One cell of the test grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TestTask {
    pub id: usize,
    pub bin_cm: f64,
    pub task: Task,
    /// Average speed of the expert on this task, cm/s.
    pub target_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetaTestGrid {
    pub bins_cm: Vec<f64>,
    pub goals_per_bin: usize,
    pub durations: Vec<f64>,
    pub center: Vec3,
    pub task_seed: u64,
}

impl Default for MetaTestGrid {
    fn default() -> Self {
        MetaTestGrid {
            bins_cm: GOAL_BINS.to_vec(),
            goals_per_bin: 10,
            durations: TEST_DURATIONS.to_vec(),
            center: Geometry::GOAL_CENTER,
            task_seed: 1000,
        }
    }
}

impl MetaTestGrid {
    /// Bin-major, then goal, then duration. Bin `i` samples its goals
    /// with seed `task_seed + i`.
    pub fn tasks(&self, env: TaskKind) -> Result<Vec<TestTask>> {
        let mut out = Vec::with_capacity(self.bins_cm.len() * self.goals_per_bin * self.durations.len());
        for (i, &bin) in self.bins_cm.iter().enumerate() {
            let tasks = sample_tasks(
                env,
                self.center,
                bin,
                self.goals_per_bin,
                &self.durations,
                self.task_seed.wrapping_add(i as u64),
            )?;
            for task in tasks {
                let target_speed = achieved_speed(&expert_demo(&task, 0.0, 0)?.trajectory);
                out.push(TestTask {
                    id: out.len(),
                    bin_cm: bin,
                    task,
                    target_speed,
                });
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalTaskResult {
    pub env: TaskKind,
    /// Cost kind name, or `expert`.
    pub policy: String,
    pub seed: u64,
    pub task_id: usize,
    pub bin_cm: f64,
    pub duration_s: f64,
    pub goal: Vec3,
    pub achieved_speed: f64,
    pub target_speed: f64,
    pub final_distance: f64,
    pub inserted: bool,
    pub strategy_violation: bool,
}

pub const RESULTS_HEADER: &str = "env,policy,seed,task_id,bin_cm,duration_s,goal_x,goal_y,goal_z,achieved_speed,target_speed,final_distance,inserted,strategy_violation";

impl EvalTaskResult {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.env.short_name(),
            self.policy,
            self.seed,
            self.task_id,
            self.bin_cm,
            self.duration_s,
            self.goal[0],
            self.goal[1],
            self.goal[2],
            self.achieved_speed,
            self.target_speed,
            self.final_distance,
            u8::from(self.inserted),
            u8::from(self.strategy_violation),
        )
    }
}

pub fn write_results_csv<W: Write>(mut w: W, results: &[EvalTaskResult]) -> Result<()> {
    writeln!(w, "{RESULTS_HEADER}")?;
    for r in results {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

pub fn evaluate_task(policy: &Policy<'_>, label: &str, seed: u64, t: &TestTask) -> Result<EvalTaskResult> {
    let traj = policy.execute(&t.task)?;
    let o = outcome(&traj, &t.task)?;
    Ok(EvalTaskResult {
        env: t.task.kind,
        policy: label.to_string(),
        seed,
        task_id: t.id,
        bin_cm: t.bin_cm,
        duration_s: t.task.duration,
        goal: t.task.goal,
        achieved_speed: o.achieved_speed,
        target_speed: t.target_speed,
        final_distance: o.final_distance,
        inserted: o.inserted,
        strategy_violation: o.strategy_violation,
    })
}

/// Mean of `(achieved - target)^2`, (cm/s)^2.
pub fn speed_mse(results: &[EvalTaskResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::InvalidArgument("speed MSE of an empty result set".into()));
    }
    let total: f64 = results.iter().map(|r| (r.achieved_speed - r.target_speed).powi(2)).sum();
    Ok(total / results.len() as f64)
}

/// Evaluates every grid task once per checkpoint. Checkpoints are
/// `(seed, params)` pairs and must share kind and base duration.
pub fn run_meta_test(
    checkpoints: &[(u64, CostParams)],
    env: TaskKind,
    grid: &MetaTestGrid,
    extraction: &Extraction,
) -> Result<Vec<EvalTaskResult>> {
    let Some((_, first)) = checkpoints.first() else {
        return Err(Error::Config("meta-test needs at least one checkpoint".into()));
    };
    let kind = first.kind();
    let base = first.rbf().map(|p| p.base_duration);
    for (seed, p) in checkpoints {
        if p.kind() != kind {
            return Err(Error::Config(format!(
                "checkpoint for seed {seed} is {}, expected {kind}",
                p.kind()
            )));
        }
        if p.rbf().map(|r| r.base_duration) != base {
            return Err(Error::Config(format!("checkpoint for seed {seed} has a different base duration")));
        }
    }
    let tasks = grid.tasks(env)?;
    let mut out = Vec::with_capacity(tasks.len() * checkpoints.len());
    for (seed, params) in checkpoints {
        let policy = Policy::Learned {
            params,
            extraction: *extraction,
        };
        for t in &tasks {
            out.push(evaluate_task(&policy, kind.name(), *seed, t)?);
        }
    }
    Ok(out)
}

/// The grid run with the expert in place of a learned cost.
pub fn run_expert_meta_test(env: TaskKind, grid: &MetaTestGrid, seeds: &[u64]) -> Result<Vec<EvalTaskResult>> {
    let tasks = grid.tasks(env)?;
    let mut out = Vec::with_capacity(tasks.len() * seeds.len());
    for &seed in seeds {
        for t in &tasks {
            out.push(evaluate_task(&Policy::Expert, "expert", seed, t)?);
        }
    }
    Ok(out)
}

/// Mean and population standard deviation across seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedStat {
    pub mean: f64,
    pub std: f64,
}

impl SeedStat {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        SeedStat { mean, std: var.sqrt() }
    }
}

/// Metrics for one (env, policy, bin, duration) group. `None` in `bin_cm` or
/// `duration_s` means the group spans all of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub env: TaskKind,
    pub policy: String,
    pub bin_cm: Option<f64>,
    pub duration_s: Option<f64>,
    pub tasks_per_seed: usize,
    pub seeds: usize,
    /// cm
    pub final_distance: SeedStat,
    /// percent
    pub insertion_rate: SeedStat,
    /// percent
    pub violation_rate: SeedStat,
    /// (cm/s)^2
    pub speed_mse: SeedStat,
    /// cm/s
    pub achieved_speed: SeedStat,
    /// cm/s, identical across seeds
    pub target_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub results: Vec<EvalTaskResult>,
    pub groups: Vec<GroupRow>,
}

type GroupKey = (TaskKind, String, Option<u64>, Option<u64>);

impl EvalReport {
    /// Each metric is computed per seed over the group's tasks, then
    /// summarised across seeds.
    pub fn from_results(results: Vec<EvalTaskResult>) -> Result<Self> {
        let mut buckets: BTreeMap<GroupKey, BTreeMap<u64, Vec<&EvalTaskResult>>> = BTreeMap::new();
        for r in &results {
            let bin = Some(r.bin_cm.to_bits());
            let dur = Some(r.duration_s.to_bits());
            for key in [(bin, dur), (bin, None), (None, dur), (None, None)] {
                buckets
                    .entry((r.env, r.policy.clone(), key.0, key.1))
                    .or_default()
                    .entry(r.seed)
                    .or_default()
                    .push(r);
            }
        }
        let mut groups = Vec::with_capacity(buckets.len());
        for ((env, policy, bin, dur), per_seed) in buckets {
            let sizes: Vec<usize> = per_seed.values().map(Vec::len).collect();
            if sizes.windows(2).any(|w| w[0] != w[1]) {
                return Err(Error::Invariant(format!(
                    "seeds of {policy} cover different task counts: {sizes:?}"
                )));
            }
            let per = |f: &dyn Fn(&[&EvalTaskResult]) -> f64| -> SeedStat {
                SeedStat::of(&per_seed.values().map(|rs| f(rs)).collect::<Vec<_>>())
            };
            let mean = |rs: &[&EvalTaskResult], g: &dyn Fn(&EvalTaskResult) -> f64| {
                rs.iter().map(|r| g(r)).sum::<f64>() / rs.len() as f64
            };
            let any = per_seed.values().next().expect("bucket has a seed");
            groups.push(GroupRow {
                env,
                policy,
                bin_cm: bin.map(f64::from_bits),
                duration_s: dur.map(f64::from_bits),
                tasks_per_seed: sizes[0],
                seeds: per_seed.len(),
                final_distance: per(&|rs| mean(rs, &|r| r.final_distance)),
                insertion_rate: per(&|rs| 100.0 * mean(rs, &|r| f64::from(u8::from(r.inserted)))),
                violation_rate: per(&|rs| 100.0 * mean(rs, &|r| f64::from(u8::from(r.strategy_violation)))),
                speed_mse: per(&|rs| mean(rs, &|r| (r.achieved_speed - r.target_speed).powi(2))),
                achieved_speed: per(&|rs| mean(rs, &|r| r.achieved_speed)),
                target_speed: mean(any, &|r| r.target_speed),
            });
        }
        Ok(EvalReport { results, groups })
    }

    pub fn group(&self, env: TaskKind, policy: &str, bin_cm: Option<f64>, duration_s: Option<f64>) -> Option<&GroupRow> {
        self.groups
            .iter()
            .find(|g| g.env == env && g.policy == policy && g.bin_cm == bin_cm && g.duration_s == duration_s)
    }

    /// Placement: mean final distance, cm. Peg-in-hole: insertion rate, %.
    pub fn headline(&self, env: TaskKind, policy: &str, bin_cm: Option<f64>) -> Option<SeedStat> {
        self.group(env, policy, bin_cm, None).map(|g| match env {
            TaskKind::Placement => g.final_distance,
            TaskKind::PegInHole => g.insertion_rate,
        })
    }

    fn policies(&self, env: TaskKind) -> Vec<String> {
        let mut seen: Vec<String> = Vec::new();
        for r in self.results.iter().filter(|r| r.env == env) {
            if !seen.contains(&r.policy) {
                seen.push(r.policy.clone());
            }
        }
        seen
    }

    fn envs(&self) -> Vec<TaskKind> {
        TaskKind::ALL
            .into_iter()
            .filter(|e| self.results.iter().any(|r| r.env == *e))
            .collect()
    }

    fn bins(&self, env: TaskKind) -> Vec<f64> {
        let mut bins: Vec<f64> = self.results.iter().filter(|r| r.env == env).map(|r| r.bin_cm).collect();
        bins.sort_by(f64::total_cmp);
        bins.dedup();
        bins
    }

    fn durations(&self, env: TaskKind) -> Vec<f64> {
        let mut d: Vec<f64> = self.results.iter().filter(|r| r.env == env).map(|r| r.duration_s).collect();
        d.sort_by(f64::total_cmp);
        d.dedup();
        d
    }

    /// Overall headline per environment and policy.
    pub fn table1(&self) -> HeadlineTable {
        let rows = self
            .envs()
            .into_iter()
            .map(|env| HeadlineRow {
                env,
                label: "all".into(),
                metric: metric_name(env).into(),
                cells: self.cells(env, None),
            })
            .collect();
        HeadlineTable {
            title: "meta-test headline metric, mean (std across seeds)".into(),
            rows,
        }
    }

    /// Headline per goal bin plus the average row, per environment.
    pub fn table2(&self) -> HeadlineTable {
        let mut rows = Vec::new();
        for env in self.envs() {
            for bin in self.bins(env) {
                rows.push(HeadlineRow {
                    env,
                    label: format!("{bin}cm"),
                    metric: metric_name(env).into(),
                    cells: self.cells(env, Some(bin)),
                });
            }
            rows.push(HeadlineRow {
                env,
                label: "avg".into(),
                metric: metric_name(env).into(),
                cells: self.cells(env, None),
            });
        }
        HeadlineTable {
            title: "meta-test headline metric by goal bin, mean (std across seeds)".into(),
            rows,
        }
    }

    fn cells(&self, env: TaskKind, bin: Option<f64>) -> BTreeMap<String, SeedStat> {
        self.policies(env)
            .into_iter()
            .filter_map(|p| self.headline(env, &p, bin).map(|s| (p, s)))
            .collect()
    }

    pub const FIG4_HEADER: &'static str = "env,policy,bin_cm,duration_s,speed_mse_mean,speed_mse_std";

    /// Speed MSE per bin and duration.
    pub fn write_fig4<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", Self::FIG4_HEADER)?;
        for env in self.envs() {
            for p in self.policies(env) {
                for bin in self.bins(env) {
                    for d in self.durations(env) {
                        if let Some(g) = self.group(env, &p, Some(bin), Some(d)) {
                            writeln!(
                                w,
                                "{},{},{},{},{},{}",
                                env.short_name(),
                                p,
                                bin,
                                d,
                                g.speed_mse.mean,
                                g.speed_mse.std
                            )?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub const FIG6_HEADER: &'static str =
        "env,policy,bin_cm,duration_s,achieved_speed_mean,achieved_speed_std,target_speed";

    /// Achieved against target speed per bin and duration.
    pub fn write_fig6<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", Self::FIG6_HEADER)?;
        for env in self.envs() {
            for p in self.policies(env) {
                for bin in self.bins(env) {
                    for d in self.durations(env) {
                        if let Some(g) = self.group(env, &p, Some(bin), Some(d)) {
                            writeln!(
                                w,
                                "{},{},{},{},{},{},{}",
                                env.short_name(),
                                p,
                                bin,
                                d,
                                g.achieved_speed.mean,
                                g.achieved_speed.std,
                                g.target_speed
                            )?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn metric_name(env: TaskKind) -> &'static str {
    match env {
        TaskKind::Placement => "final_distance_cm",
        TaskKind::PegInHole => "insertion_rate_pct",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadlineRow {
    pub env: TaskKind,
    pub label: String,
    pub metric: String,
    /// Policy name to seed-level mean and std.
    pub cells: BTreeMap<String, SeedStat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadlineTable {
    pub title: String,
    pub rows: Vec<HeadlineRow>,
}

/// Speed MSE of a learned cost on its own training demos: each demo's goal
/// and horizon define the task, the demo's speed is the target.
pub fn train_speed_mse(params: &CostParams, demos: &[Demonstration], extraction: &Extraction) -> Result<f64> {
    if demos.is_empty() {
        return Err(Error::InvalidArgument("no demonstrations".into()));
    }
    let mut total = 0.0;
    for d in demos {
        let traj = extract_on_demo(params, d, extraction)?;
        total += (achieved_speed(&traj) - achieved_speed(&d.trajectory)).powi(2);
    }
    Ok(total / demos.len() as f64)
}

/// The learned policy executed with a demonstration's goal and horizon.
pub fn extract_on_demo(params: &CostParams, demo: &Demonstration, extraction: &Extraction) -> Result<Trajectory> {
    let lam = temporal_scalar(extraction.base_steps, demo.horizon())?;
    let inner = InnerLoop {
        steps: extraction.inner_steps,
        step_size: extraction.inner_rate,
    };
    let s0 = initial_state();
    let dt = demo.trajectory.dt();
    let actions = optimize_actions(params, demo.goal, demo.horizon(), dt, lam, &s0, inner)?;
    rollout(&s0, &actions, dt)
}

/// A demonstration viewed as a task of kind `env`.
pub fn demo_task(demo: &Demonstration, env: TaskKind) -> Result<Task> {
    Task::with_frequency(env, demo.goal, demo.trajectory.duration(), 1.0 / demo.trajectory.dt())
}

/// One point of a training-loss curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub epoch: usize,
    pub loss: f64,
    pub inner_steps: usize,
    pub demos: usize,
    pub kind: CostKind,
    pub seed: u64,
}

pub const CURVE_HEADER: &str = "epoch,loss,inner_steps,demos,kind,seed";

pub fn write_curves_csv<W: Write>(mut w: W, points: &[CurvePoint]) -> Result<()> {
    writeln!(w, "{CURVE_HEADER}")?;
    for p in points {
        writeln!(w, "{},{},{},{},{},{}", p.epoch, p.loss, p.inner_steps, p.demos, p.kind, p.seed)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationSpec {
    pub inner_steps: Vec<usize>,
    pub demo_counts: Vec<usize>,
    /// One training config per cost kind; `inner_steps` and `rng_seed`
    /// are overridden per cell.
    pub configs: Vec<TrainConfig>,
    pub seeds: Vec<u64>,
}

impl AblationSpec {
    pub fn cells(&self) -> usize {
        self.inner_steps.len() * self.demo_counts.len() * self.configs.len() * self.seeds.len()
    }
}

/// Trains every (kind, inner steps, demo count, seed) cell on the first
/// `demo count` entries of `pool` and returns the mean loss per epoch.
pub fn ablation_grid(spec: &AblationSpec, pool: &[Demonstration]) -> Result<Vec<CurvePoint>> {
    let mut points = Vec::new();
    for base in &spec.configs {
        for &steps in &spec.inner_steps {
            for &n in &spec.demo_counts {
                if n == 0 || n > pool.len() {
                    return Err(Error::Config(format!(
                        "demo count {n} outside the pool of {} demonstrations",
                        pool.len()
                    )));
                }
                for &seed in &spec.seeds {
                    let cfg = TrainConfig {
                        inner_steps: steps,
                        rng_seed: seed,
                        ..base.clone()
                    };
                    let run = train(&cfg, &pool[..n])?;
                    for (epoch, loss) in run.history.epoch_losses().into_iter().enumerate() {
                        points.push(CurvePoint {
                            epoch,
                            loss,
                            inner_steps: steps,
                            demos: n,
                            kind: cfg.kind,
                            seed,
                        });
                    }
                }
            }
        }
    }
    Ok(points)
}

/// First epoch whose loss is within `fraction` of the final loss.
pub fn epochs_to_within(losses: &[f64], fraction: f64) -> Option<usize> {
    let last = *losses.last()?;
    losses.iter().position(|&l| (l - last).abs() <= fraction * last.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::{init_params, CostSettings};

    fn result(achieved: f64, target: f64) -> EvalTaskResult {
        EvalTaskResult {
            env: TaskKind::Placement,
            policy: "lrbf".into(),
            seed: 0,
            task_id: 0,
            bin_cm: 1.0,
            duration_s: 3.0,
            goal: Geometry::GOAL_CENTER,
            achieved_speed: achieved,
            target_speed: target,
            final_distance: 0.0,
            inserted: false,
            strategy_violation: false,
        }
    }

    #[test]
    fn zero_inner_steps_stay_at_start() {
        let p = init_params(CostKind::LambdaRbf, 0, &CostSettings::default()).unwrap();
        let task = Task::new(TaskKind::Placement, Geometry::GOAL_CENTER, 3.0).unwrap();
        let ex = Extraction {
            inner_steps: 0,
            inner_rate: 1.0,
            base_steps: 15,
        };
        let traj = extract_policy(&p, &task, &ex).unwrap();
        assert_eq!(traj.horizon(), 15);
        assert!(traj.states().iter().all(|s| s.position == Geometry::START));
    }

    #[test]
    fn six_second_task_has_horizon_thirty_and_half_lambda() {
        let task = Task::new(TaskKind::Placement, Geometry::GOAL_CENTER, 6.0).unwrap();
        assert_eq!(task.horizon(), 30);
        assert_eq!(temporal_scalar(15, task.horizon()).unwrap().value(), 0.5);
        let three = Task::new(TaskKind::Placement, Geometry::GOAL_CENTER, 3.0).unwrap();
        assert_eq!(temporal_scalar(15, three.horizon()).unwrap().value(), 1.0);
    }

    #[test]
    fn speed_mse_examples() {
        assert_eq!(speed_mse(&[result(2.0, 2.0), result(3.0, 3.0)]).unwrap(), 0.0);
        assert_eq!(speed_mse(&[result(2.5, 2.0)]).unwrap(), 0.25);
        assert!(speed_mse(&[]).is_err());
    }

    #[test]
    fn grid_has_150_tasks_in_bins() {
        let tasks = MetaTestGrid::default().tasks(TaskKind::PegInHole).unwrap();
        assert_eq!(tasks.len(), 150);
        for t in &tasks {
            let d = crate::env::horizontal_dist(t.task.goal, Geometry::GOAL_CENTER);
            assert!(d <= t.bin_cm);
            assert!(t.target_speed > 0.0);
        }
        assert_eq!(tasks.iter().filter(|t| t.bin_cm == 3.0).count(), 50);
    }

    #[test]
    fn seed_stat_is_population_std() {
        let s = SeedStat::of(&[1.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.std, 1.0);
    }

    #[test]
    fn mismatched_checkpoints_rejected() {
        let a = init_params(CostKind::Rbf, 0, &CostSettings::default()).unwrap();
        let b = init_params(CostKind::LambdaRbf, 1, &CostSettings::default()).unwrap();
        let ex = Extraction {
            inner_steps: 1,
            inner_rate: 1.0,
            base_steps: 15,
        };
        let grid = MetaTestGrid {
            goals_per_bin: 1,
            ..MetaTestGrid::default()
        };
        let err = run_meta_test(&[(0, a), (1, b)], TaskKind::Placement, &grid, &ex).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(matches!(
            run_meta_test(&[], TaskKind::Placement, &grid, &ex).unwrap_err(),
            Error::Config(_)
        ));
    }

    #[test]
    fn within_fraction_of_final() {
        assert_eq!(epochs_to_within(&[10.0, 5.0, 2.1, 2.0], 0.1), Some(2));
        assert_eq!(epochs_to_within(&[], 0.1), None);
    }
}
