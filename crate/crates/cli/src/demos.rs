use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tivc_core::env::{expert_demo, sample_tasks, Demonstration, Geometry, SpeedClass, Task, TaskKind, DEFAULT_FREQUENCY};
use tivc_core::Result;

use crate::config::{Context, DemoConfig};

/// Demonstrations for one meta-train context.
///
/// Duration-varied contexts put the first `ceil(count / 2)` demos in the
/// fast class and the rest in the slow class; durations are drawn
/// uniformly from the class range and snapped to whole control steps.
/// The output depends only on the context and `cfg`, not on `env`.
pub fn context_demos(ctx: Context, env: TaskKind, cfg: &DemoConfig) -> Result<Vec<Demonstration>> {
    let n = cfg.count;
    let goals: Vec<_> = if ctx.varies_goal() {
        sample_tasks(env, Geometry::GOAL_CENTER, cfg.goal_radius_cm, n, &[cfg.aligned_s], cfg.seed)?
            .into_iter()
            .map(|t| t.goal)
            .collect()
    } else {
        vec![Geometry::GOAL_CENTER; n]
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(ctx as u64);
    let fast = n.div_ceil(2);
    goals
        .into_iter()
        .enumerate()
        .map(|(i, goal)| {
            let (class, duration) = if !ctx.varies_duration() {
                (SpeedClass::Aligned, cfg.aligned_s)
            } else {
                let (class, [lo, hi]) = if i < fast {
                    (SpeedClass::Fast, cfg.fast_s)
                } else {
                    (SpeedClass::Slow, cfg.slow_s)
                };
                let d = if lo < hi { rng.gen_range(lo..=hi) } else { lo };
                (class, (d * DEFAULT_FREQUENCY).round() / DEFAULT_FREQUENCY)
            };
            let task = Task::new(env, goal, duration)?;
            Ok(expert_demo(&task, 0.0, cfg.seed.wrapping_add(i as u64))?.with_speed_class(class))
        })
        .collect()
}
