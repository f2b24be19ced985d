use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use tivc_core::costs::{Checkpoint, CostKind, CostParams};
use tivc_core::env::{read_demos, write_demos, Demonstration, TaskKind};
use tivc_core::eval::{
    achieved_speed, ablation_grid, demo_task, run_expert_meta_test, run_meta_test, write_curves_csv,
    train_speed_mse, write_results_csv, AblationSpec, CurvePoint, EvalReport, EvalTaskResult, GroupRow, Policy,
};
use tivc_core::trainer::{train as train_cost, TrainHistory};
use tivc_core::verify::{gradient_suite, SuiteRow, SuiteSize};

use crate::config::{Context, ExperimentConfig};
use crate::demos::context_demos;
use crate::error::{CliError, CliResult};
use crate::manifest::{Recorder, RunManifest};

pub const FIG2_HEADER: &str = "env,context,policy,seed,speed_mse";
pub const FIG3_HEADER: &str = "env,context,kind,seed,epoch,loss,speed_mse";

pub fn demo_path(out: &Path, env: TaskKind, ctx: Context) -> PathBuf {
    out.join("demos").join(env.short_name()).join(format!("context-{ctx}.jsonl"))
}

fn run_dir(out: &Path, what: &str, env: TaskKind, ctx: Context) -> PathBuf {
    out.join(what).join(env.short_name()).join(format!("context-{ctx}"))
}

pub fn checkpoint_path(out: &Path, env: TaskKind, ctx: Context, kind: CostKind, seed: u64) -> PathBuf {
    run_dir(out, "checkpoints", env, ctx).join(format!("{kind}-seed{seed}.json"))
}

pub fn history_path(out: &Path, env: TaskKind, ctx: Context, kind: CostKind, seed: u64) -> PathBuf {
    run_dir(out, "histories", env, ctx).join(format!("{kind}-seed{seed}.csv"))
}

/// `eval/`, or `eval-expert/` for the expert run.
pub fn eval_dir(out: &Path, expert: bool) -> PathBuf {
    out.join(if expert { "eval-expert" } else { "eval" })
}

pub fn ablation_path(out: &Path) -> PathBuf {
    out.join("ablation").join("fig5.csv")
}

/// Worker pool capped by `TIVC_THREADS` when set.
pub fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let threads = match std::env::var("TIVC_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("TIVC_THREADS must be a positive integer, got '{v}'")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn write_with<F>(path: &Path, f: F) -> CliResult<()>
where
    F: FnOnce(&mut BufWriter<File>) -> tivc_core::Result<()>,
{
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::MissingInput(path.to_path_buf()),
        _ => CliError::io(path, e),
    })
}

pub fn load_demos(path: &Path) -> CliResult<Vec<Demonstration>> {
    let demos = read_demos(BufReader::new(open(path)?))?;
    if demos.is_empty() {
        return Err(CliError::MissingInput(path.to_path_buf()));
    }
    Ok(demos)
}

fn prepare(cfg: &ExperimentConfig, command: &str) -> CliResult<Recorder> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    Recorder::start(&cfg.out, command)
}

/// Writes one demonstration file per (environment, context).
pub fn gen_demos(cfg: &ExperimentConfig) -> CliResult<RunManifest> {
    let mut rec = prepare(cfg, "gen-demos")?;
    for &env in &cfg.envs {
        for &ctx in &cfg.contexts {
            let demos = context_demos(ctx, env, &cfg.demos)?;
            let path = demo_path(&cfg.out, env, ctx);
            write_with(&path, |w| write_demos(w, &demos))?;
            rec.artifact(path);
        }
    }
    rec.finish(cfg)
}

struct TrainJob {
    env: TaskKind,
    ctx: Context,
    kind: CostKind,
    seed: u64,
}

/// Trains every (environment, context, cost kind, seed) combination.
///
/// Each run writes its checkpoint and history as soon as it ends; a failed
/// run keeps the history up to the failure. The first failure is returned
/// once all runs have finished, and no manifest is written in that case.
pub fn train(cfg: &ExperimentConfig) -> CliResult<RunManifest> {
    let mut rec = prepare(cfg, "train")?;
    let mut demos: BTreeMap<(TaskKind, Context), Vec<Demonstration>> = BTreeMap::new();
    for &env in &cfg.envs {
        for &ctx in &cfg.contexts {
            let path = demo_path(&cfg.out, env, ctx);
            demos.insert((env, ctx), load_demos(&path)?);
            rec.input(path);
        }
    }
    let mut jobs = Vec::new();
    for &env in &cfg.envs {
        for &ctx in &cfg.contexts {
            for &kind in &cfg.costs {
                for &seed in &cfg.seeds {
                    jobs.push(TrainJob { env, ctx, kind, seed });
                }
            }
        }
    }
    let out = &cfg.out;
    let runs: Vec<CliResult<TrainHistory>> = thread_pool()?.install(|| {
        jobs.par_iter()
            .map(|j| {
                let tc = cfg.train_config(j.kind, j.seed);
                let history_file = history_path(out, j.env, j.ctx, j.kind, j.seed);
                match train_cost(&tc, &demos[&(j.env, j.ctx)]) {
                    Ok(run) => {
                        let base = tc.cost_settings(demos[&(j.env, j.ctx)][0].trajectory.dt()).base_duration;
                        let ck = Checkpoint::new(&run.params, base, j.seed, tc.epochs);
                        write_with(&checkpoint_path(out, j.env, j.ctx, j.kind, j.seed), |w| ck.write(w))?;
                        write_with(&history_file, |w| run.history.write_csv(w))?;
                        Ok(run.history)
                    }
                    Err(failure) => {
                        write_with(&history_file, |w| failure.history.write_csv(w))?;
                        Err(CliError::Core(failure.error))
                    }
                }
            })
            .collect()
    });
    let mut histories = Vec::with_capacity(runs.len());
    for run in runs {
        histories.push(run?);
    }
    let mut fig3 = Vec::new();
    for (j, h) in jobs.iter().zip(&histories) {
        rec.artifact(checkpoint_path(out, j.env, j.ctx, j.kind, j.seed));
        rec.artifact(history_path(out, j.env, j.ctx, j.kind, j.seed));
        let speed = h.epoch_speed_mse();
        for (epoch, loss) in h.epoch_losses().into_iter().enumerate() {
            fig3.push(format!(
                "{},{},{},{},{},{},{}",
                j.env.short_name(),
                j.ctx,
                j.kind,
                j.seed,
                epoch,
                loss,
                speed[epoch]
            ));
        }
    }
    let fig3_path = out.join("fig3.csv");
    write_with(&fig3_path, |w| {
        writeln!(w, "{FIG3_HEADER}")?;
        for line in &fig3 {
            writeln!(w, "{line}")?;
        }
        Ok(())
    })?;
    rec.artifact(fig3_path);
    rec.finish(cfg)
}

pub fn load_checkpoint(path: &Path) -> CliResult<CostParams> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::Config(format!(
            "missing checkpoint {}; run `train` for this context, cost and seed first",
            path.display()
        )),
        _ => CliError::io(path, e),
    })?;
    Ok(Checkpoint::read(BufReader::new(file))?.params()?)
}

#[derive(Debug, Clone, Serialize)]
struct ReportFile<'a> {
    units: BTreeMap<&'static str, &'static str>,
    groups: &'a [GroupRow],
}

fn report_units() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("final_distance", "cm"),
        ("insertion_rate", "percent"),
        ("violation_rate", "percent"),
        ("speed_mse", "(cm/s)^2"),
        ("achieved_speed", "cm/s"),
        ("target_speed", "cm/s"),
    ])
}

/// Meta-tests the checkpoints of `cfg.eval.context`, or the expert when
/// `expert` is set, and writes reports and plot data under [`eval_dir`].
pub fn eval(cfg: &ExperimentConfig, expert: bool) -> CliResult<RunManifest> {
    let mut rec = prepare(cfg, if expert { "eval-expert" } else { "eval" })?;
    let out = &cfg.out;
    let mut contexts = cfg.contexts.clone();
    if !contexts.contains(&cfg.eval.context) {
        contexts.push(cfg.eval.context);
    }

    let mut demos: BTreeMap<(TaskKind, Context), Vec<Demonstration>> = BTreeMap::new();
    let mut checkpoints: BTreeMap<(TaskKind, Context, CostKind), Vec<(u64, CostParams)>> = BTreeMap::new();
    for &env in &cfg.envs {
        for &ctx in &cfg.contexts {
            let path = demo_path(out, env, ctx);
            demos.insert((env, ctx), load_demos(&path)?);
            rec.input(path);
        }
        if expert {
            continue;
        }
        for &ctx in &contexts {
            for &kind in &cfg.costs {
                let mut list = Vec::with_capacity(cfg.seeds.len());
                for &seed in &cfg.seeds {
                    let path = checkpoint_path(out, env, ctx, kind, seed);
                    list.push((seed, load_checkpoint(&path)?));
                    rec.input(path);
                }
                checkpoints.insert((env, ctx, kind), list);
            }
        }
    }

    let pool = thread_pool()?;
    let grid = &cfg.eval.grid;
    let results: Vec<EvalTaskResult> = if expert {
        let per_env: Vec<CliResult<Vec<EvalTaskResult>>> = pool.install(|| {
            cfg.envs
                .par_iter()
                .map(|&env| Ok(run_expert_meta_test(env, grid, &cfg.seeds)?))
                .collect()
        });
        flatten(per_env)?
    } else {
        let cells: Vec<(TaskKind, CostKind)> = cfg
            .envs
            .iter()
            .flat_map(|&env| cfg.costs.iter().map(move |&k| (env, k)))
            .collect();
        let per_cell: Vec<CliResult<Vec<EvalTaskResult>>> = pool.install(|| {
            cells
                .par_iter()
                .map(|&(env, kind)| {
                    let cps = &checkpoints[&(env, cfg.eval.context, kind)];
                    Ok(run_meta_test(cps, env, grid, &cfg.extraction(kind))?)
                })
                .collect()
        });
        flatten(per_cell)?
    };

    let mut fig2 = Vec::new();
    for &env in &cfg.envs {
        for &ctx in &cfg.contexts {
            let set = &demos[&(env, ctx)];
            if expert {
                for &seed in &cfg.seeds {
                    let mse = policy_speed_mse(&Policy::Expert, set, env)?;
                    fig2.push(format!("{},{},expert,{},{}", env.short_name(), ctx, seed, mse));
                }
                continue;
            }
            for &kind in &cfg.costs {
                for (seed, params) in &checkpoints[&(env, ctx, kind)] {
                    let ex = cfg.extraction(kind);
                    let mse = train_speed_mse(params, set, &ex)?;
                    fig2.push(format!("{},{},{},{},{}", env.short_name(), ctx, kind, seed, mse));
                }
            }
        }
    }

    let report = EvalReport::from_results(results)?;
    let dir = eval_dir(out, expert);
    let files = [
        "results.csv",
        "report.json",
        "table1.json",
        "table2.json",
        "fig2.csv",
        "fig4.csv",
        "fig6.csv",
    ];
    write_with(&dir.join(files[0]), |w| write_results_csv(w, &report.results))?;
    write_json(
        &dir.join(files[1]),
        &ReportFile {
            units: report_units(),
            groups: &report.groups,
        },
    )?;
    write_json(&dir.join(files[2]), &report.table1())?;
    write_json(&dir.join(files[3]), &report.table2())?;
    write_with(&dir.join(files[4]), |w| {
        writeln!(w, "{FIG2_HEADER}")?;
        for line in &fig2 {
            writeln!(w, "{line}")?;
        }
        Ok(())
    })?;
    write_with(&dir.join(files[5]), |w| report.write_fig4(w))?;
    write_with(&dir.join(files[6]), |w| report.write_fig6(w))?;
    for f in files {
        rec.artifact(dir.join(f));
    }
    rec.finish(cfg)
}

fn flatten<T>(parts: Vec<CliResult<Vec<T>>>) -> CliResult<Vec<T>> {
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn policy_speed_mse(policy: &Policy<'_>, demos: &[Demonstration], env: TaskKind) -> CliResult<f64> {
    let mut total = 0.0;
    for d in demos {
        let traj = policy.execute(&demo_task(d, env)?)?;
        total += (achieved_speed(&traj) - achieved_speed(&d.trajectory)).powi(2);
    }
    Ok(total / demos.len() as f64)
}

/// Runs the inner-steps by demo-count grid and writes the loss curves.
pub fn ablate(cfg: &ExperimentConfig) -> CliResult<RunManifest> {
    let mut rec = prepare(cfg, "ablate")?;
    let a = &cfg.ablation;
    let path = demo_path(&cfg.out, a.env, a.context);
    let pool_demos = load_demos(&path)?;
    rec.input(path);
    let spec = cfg.ablation_spec();
    let cells: Vec<AblationSpec> = spec
        .configs
        .iter()
        .flat_map(|c| {
            spec.inner_steps.iter().map(|&s| AblationSpec {
                inner_steps: vec![s],
                demo_counts: spec.demo_counts.clone(),
                configs: vec![c.clone()],
                seeds: spec.seeds.clone(),
            })
        })
        .collect();
    let parts: Vec<CliResult<Vec<CurvePoint>>> = thread_pool()?.install(|| {
        cells
            .par_iter()
            .map(|cell| Ok(ablation_grid(cell, &pool_demos)?))
            .collect()
    });
    let points = flatten(parts)?;
    let out = ablation_path(&cfg.out);
    write_with(&out, |w| write_curves_csv(w, &points))?;
    rec.artifact(out);
    rec.finish(cfg)
}

/// The randomized gradient suite.
pub fn grad_check(seed: u64) -> CliResult<Vec<SuiteRow>> {
    Ok(gradient_suite(seed, SuiteSize::default())?)
}

pub fn format_suite(rows: &[SuiteRow]) -> String {
    let mut s = format!(
        "{:<6} {:<8} {:>9} {:>14} {:>10}  status\n",
        "kind", "check", "instances", "max_rel_error", "tolerance"
    );
    for r in rows {
        s += &format!(
            "{:<6} {:<8} {:>9} {:>14.3e} {:>10.0e}  {}\n",
            r.kind.name(),
            r.check.name(),
            r.instances,
            r.max_rel_error,
            r.tolerance,
            if r.passed() { "ok" } else { "FAIL" }
        );
    }
    s
}
