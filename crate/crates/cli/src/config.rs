use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tivc_core::costs::CostKind;
use tivc_core::env::TaskKind;
use tivc_core::eval::{AblationSpec, Extraction, MetaTestGrid};
use tivc_core::trainer::TrainConfig;

use crate::error::{CliError, CliResult};

/// Meta-train demonstration context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Context {
    /// Fixed base duration, goals varied.
    A,
    /// Fixed goal, fast and slow durations.
    B,
    /// Varied goals and durations.
    C,
}

impl Context {
    pub const ALL: [Context; 3] = [Context::A, Context::B, Context::C];

    pub fn letter(self) -> &'static str {
        match self {
            Context::A => "a",
            Context::B => "b",
            Context::C => "c",
        }
    }

    pub fn varies_goal(self) -> bool {
        matches!(self, Context::A | Context::C)
    }

    pub fn varies_duration(self) -> bool {
        matches!(self, Context::B | Context::C)
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

/// Per-kind replacements for fields of the base training config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOverride {
    pub outer_rate: Option<f64>,
    pub inner_rate: Option<f64>,
    pub inner_steps: Option<usize>,
    pub epochs: Option<usize>,
}

impl TrainOverride {
    pub fn apply_to(&self, cfg: &mut TrainConfig) {
        cfg.outer_rate = self.outer_rate.unwrap_or(cfg.outer_rate);
        cfg.inner_rate = self.inner_rate.unwrap_or(cfg.inner_rate);
        cfg.inner_steps = self.inner_steps.unwrap_or(cfg.inner_steps);
        cfg.epochs = self.epochs.unwrap_or(cfg.epochs);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoConfig {
    /// Demonstrations per context file.
    pub count: usize,
    pub goal_radius_cm: f64,
    /// Duration of every context-a demo, seconds.
    pub aligned_s: f64,
    /// Duration ranges of the two speed classes, seconds.
    pub fast_s: [f64; 2],
    pub slow_s: [f64; 2],
    pub seed: u64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            count: 12,
            goal_radius_cm: 1.0,
            aligned_s: 3.0,
            fast_s: [2.8, 3.2],
            slow_s: [4.8, 5.2],
            seed: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Context whose checkpoints are meta-tested.
    pub context: Context,
    /// Inner steps at test time; the training value when absent.
    pub test_updates: Option<usize>,
    pub grid: MetaTestGrid,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            context: Context::C,
            test_updates: None,
            grid: MetaTestGrid::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationConfig {
    pub env: TaskKind,
    /// Source of the demonstration pool; must hold fixed-duration demos.
    pub context: Context,
    pub inner_steps: Vec<usize>,
    pub demo_counts: Vec<usize>,
    pub costs: Vec<CostKind>,
    pub epochs: usize,
    pub seeds: Vec<u64>,
    /// Applied after the experiment-wide overrides.
    pub overrides: BTreeMap<CostKind, TrainOverride>,
}

impl Default for AblationConfig {
    fn default() -> Self {
        AblationConfig {
            env: TaskKind::Placement,
            context: Context::A,
            inner_steps: vec![1, 3, 5, 10],
            demo_counts: vec![3, 6, 12],
            costs: vec![CostKind::LambdaRbf, CostKind::LambdaMlp],
            epochs: 100,
            seeds: vec![0, 1, 2],
            overrides: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub out: PathBuf,
    pub envs: Vec<TaskKind>,
    pub contexts: Vec<Context>,
    pub costs: Vec<CostKind>,
    pub seeds: Vec<u64>,
    /// Shared training settings; `kind` and `rng_seed` are set per run.
    pub train: TrainConfig,
    pub overrides: BTreeMap<CostKind, TrainOverride>,
    pub demos: DemoConfig,
    pub eval: EvalConfig,
    pub ablation: AblationConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            out: PathBuf::from("runs/default"),
            envs: TaskKind::ALL.to_vec(),
            contexts: Context::ALL.to_vec(),
            costs: CostKind::COMPARED.to_vec(),
            seeds: vec![0, 1, 2],
            train: TrainConfig::default(),
            overrides: BTreeMap::new(),
            demos: DemoConfig::default(),
            eval: EvalConfig::default(),
            ablation: AblationConfig::default(),
        }
    }
}

/// Command-line replacements applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seeds: Option<Vec<u64>>,
    pub costs: Option<Vec<CostKind>>,
    pub contexts: Option<Vec<Context>>,
    pub envs: Option<Vec<TaskKind>>,
    pub inner_steps: Option<usize>,
    pub test_updates: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::MissingInput(path.to_path_buf()),
            _ => CliError::io(path, e),
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(out) = o.out {
            self.out = out;
        }
        if let Some(seeds) = o.seeds {
            self.seeds = seeds;
        }
        if let Some(costs) = o.costs {
            self.costs = costs;
        }
        if let Some(contexts) = o.contexts {
            self.contexts = contexts;
        }
        if let Some(envs) = o.envs {
            self.envs = envs;
        }
        if let Some(n) = o.inner_steps {
            self.train.inner_steps = n;
            for ov in self.overrides.values_mut() {
                ov.inner_steps = None;
            }
        }
        if let Some(n) = o.test_updates {
            self.eval.test_updates = Some(n);
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.seeds.is_empty() {
            return bad("seed list is empty".into());
        }
        if self.envs.is_empty() || self.contexts.is_empty() || self.costs.is_empty() {
            return bad("envs, contexts and costs must be nonempty".into());
        }
        if self.demos.count == 0 {
            return bad("demos.count must be positive".into());
        }
        if !(self.demos.goal_radius_cm > 0.0) {
            return bad("demos.goal_radius_cm must be positive".into());
        }
        for (name, [lo, hi]) in [("fast_s", self.demos.fast_s), ("slow_s", self.demos.slow_s)] {
            if !(lo > 0.0 && lo <= hi) {
                return bad(format!("demos.{name} must be an increasing pair of positive durations"));
            }
        }
        if self.eval.test_updates == Some(0) {
            return bad("eval.test_updates must be at least 1".into());
        }
        for kind in &self.costs {
            self.train_config(*kind, 0).validate()?;
        }
        for cfg in self.ablation_spec().configs {
            cfg.validate()?;
        }
        Ok(())
    }

    /// Training config for one run.
    pub fn train_config(&self, kind: CostKind, seed: u64) -> TrainConfig {
        let mut cfg = TrainConfig {
            kind,
            rng_seed: seed,
            ..self.train.clone()
        };
        if let Some(o) = self.overrides.get(&kind) {
            o.apply_to(&mut cfg);
        }
        cfg
    }

    /// Test-time extraction for a kind.
    pub fn extraction(&self, kind: CostKind) -> Extraction {
        let mut ex = Extraction::from_train(&self.train_config(kind, 0));
        if let Some(n) = self.eval.test_updates {
            ex.inner_steps = n;
        }
        ex
    }

    pub fn ablation_spec(&self) -> AblationSpec {
        AblationSpec {
            inner_steps: self.ablation.inner_steps.clone(),
            demo_counts: self.ablation.demo_counts.clone(),
            configs: self
                .ablation
                .costs
                .iter()
                .map(|&k| {
                    let mut cfg = TrainConfig {
                        epochs: self.ablation.epochs,
                        ..self.train_config(k, 0)
                    };
                    if let Some(o) = self.ablation.overrides.get(&k) {
                        o.apply_to(&mut cfg);
                    }
                    cfg
                })
                .collect(),
            seeds: self.ablation.seeds.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"seeds": [7], "overrides": {"lmlp": {"outer_rate": 0.3}}}"#).unwrap();
        assert_eq!(cfg.seeds, vec![7]);
        assert_eq!(cfg.train_config(CostKind::LambdaMlp, 7).outer_rate, 0.3);
        assert_eq!(cfg.train_config(CostKind::LambdaRbf, 7).outer_rate, 0.001);
        assert_eq!(cfg.train_config(CostKind::LambdaRbf, 7).inner_rate, 0.01);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"sedes": [1]}"#).is_err());
    }

    #[test]
    fn inner_steps_flag_beats_overrides() {
        let mut cfg = ExperimentConfig::default();
        cfg.overrides.insert(
            CostKind::Mlp,
            TrainOverride {
                inner_steps: Some(10),
                ..Default::default()
            },
        );
        cfg.apply(Overrides {
            inner_steps: Some(3),
            ..Default::default()
        });
        assert_eq!(cfg.train_config(CostKind::Mlp, 0).inner_steps, 3);
    }

    #[test]
    fn ablation_overrides_stack_on_experiment_overrides() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"overrides": {"lrbf": {"outer_rate": 0.02, "inner_rate": 1.0}},
                "ablation": {"epochs": 7, "costs": ["lrbf"], "overrides": {"lrbf": {"outer_rate": 0.01}}}}"#,
        )
        .unwrap();
        let spec = cfg.ablation_spec();
        assert_eq!(spec.configs.len(), 1);
        assert_eq!(spec.configs[0].outer_rate, 0.01);
        assert_eq!(spec.configs[0].inner_rate, 1.0);
        assert_eq!(spec.configs[0].epochs, 7);
    }

    #[test]
    fn test_updates_only_touch_extraction() {
        let mut cfg = ExperimentConfig::default();
        cfg.eval.test_updates = Some(1);
        assert_eq!(cfg.extraction(CostKind::Rbf).inner_steps, 1);
        assert_eq!(cfg.train_config(CostKind::Rbf, 0).inner_steps, 5);
    }

    #[test]
    fn empty_seed_list_is_a_config_error() {
        let cfg = ExperimentConfig {
            seeds: vec![],
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }
}
