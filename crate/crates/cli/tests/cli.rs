use std::path::Path;
use std::process::{Command, Output};

use tivc::manifest::{manifest_path, verify, RunManifest};

const TINY: &str = r#"{
  "contexts": ["b", "c"],
  "seeds": [0, 1],
  "overrides": {
    "rbf": { "outer_rate": 0.02, "inner_rate": 1.0, "epochs": 4 },
    "lrbf": { "outer_rate": 0.02, "inner_rate": 1.0, "epochs": 4 },
    "mlp": { "outer_rate": 0.3, "inner_rate": 1.0, "epochs": 4 },
    "lmlp": { "outer_rate": 0.3, "inner_rate": 1.0, "epochs": 4 }
  },
  "demos": { "count": 4 },
  "eval": { "grid": { "goals_per_bin": 2, "durations": [2.0, 6.0] } },
  "ablation": { "context": "c", "demo_counts": [2, 4], "inner_steps": [1, 5], "epochs": 3, "seeds": [0] }
}"#;

fn tivc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tivc"))
        .args(args)
        .env("TIVC_THREADS", "2")
        .output()
        .unwrap()
}

fn run_ok(args: &[&str]) {
    let out = tivc(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn code(args: &[&str]) -> i32 {
    tivc(args).status.code().unwrap()
}

fn manifest(out: &Path, cmd: &str) -> RunManifest {
    serde_json::from_str(&std::fs::read_to_string(manifest_path(out, cmd)).unwrap()).unwrap()
}

fn pipeline(dir: &Path, out: &Path) {
    let cfg = dir.join("tiny.json");
    std::fs::write(&cfg, TINY).unwrap();
    let (cfg, out) = (cfg.to_str().unwrap(), out.to_str().unwrap());
    for cmd in [&["gen-demos"][..], &["train"], &["eval"], &["eval", "--expert"], &["ablate"]] {
        let mut args = vec!["--config", cfg, "--out", out];
        args.extend_from_slice(cmd);
        run_ok(&args);
    }
}

#[test]
fn pipeline_reruns_are_byte_identical_and_verifiable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    pipeline(dir.path(), &a);
    pipeline(dir.path(), &b);
    for cmd in ["gen-demos", "train", "eval", "eval-expert", "ablate"] {
        let (ma, mb) = (manifest(&a, cmd), manifest(&b, cmd));
        assert!(!ma.artifacts.is_empty(), "{cmd}");
        assert!(verify(&a, &ma).unwrap().is_empty(), "{cmd}");
        let strip = |m: &RunManifest| {
            m.artifacts
                .iter()
                .filter(|d| !d.path.starts_with("histories/"))
                .map(|d| (d.path.clone(), d.sha256.clone()))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&ma), strip(&mb), "{cmd}");
        assert_eq!(ma.inputs.len(), mb.inputs.len());
    }
    for f in ["eval/table1.json", "eval/table2.json", "eval/fig2.csv", "eval/fig4.csv", "eval/fig6.csv", "fig3.csv", "ablation/fig5.csv"] {
        assert!(a.join(f).is_file(), "{f}");
    }
    let table2: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("eval/table2.json")).unwrap()).unwrap();
    let labels: Vec<&str> = table2["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["env"] == "placement")
        .map(|r| r["label"].as_str().unwrap())
        .collect();
    assert_eq!(labels, ["1cm", "3cm", "5cm", "avg"]);
}

#[test]
fn default_manifest_records_default_rates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    run_ok(&["--out", out.to_str().unwrap(), "gen-demos"]);
    let m = manifest(&out, "gen-demos");
    assert_eq!(m.config.train.outer_rate, 0.001);
    assert_eq!(m.config.train.inner_rate, 0.01);
    assert_eq!(m.artifacts.len(), 6);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = d.join("out");
    let out = out.to_str().unwrap();

    assert_eq!(code(&["--config", d.join("nope.json").to_str().unwrap(), "gen-demos"]), 4);

    let bad = d.join("bad.json");
    std::fs::write(&bad, r#"{"seedz": [1]}"#).unwrap();
    assert_eq!(code(&["--config", bad.to_str().unwrap(), "gen-demos"]), 2);
    assert_eq!(code(&["--test-updates", "3", "eval"]), 2);
    assert_eq!(code(&["--out", out, "--seeds", "", "train"]), 2);

    assert_eq!(code(&["--out", out, "train"]), 4);

    let cfg = d.join("tiny.json");
    std::fs::write(&cfg, TINY).unwrap();
    let cfg = cfg.to_str().unwrap();
    run_ok(&["--config", cfg, "--out", out, "gen-demos"]);
    assert_eq!(code(&["--config", cfg, "--out", out, "eval"]), 2);

    let blow_up = d.join("diverge.json");
    std::fs::write(
        &blow_up,
        r#"{"contexts": ["b"], "costs": ["lrbf"], "seeds": [0], "envs": ["placement"],
            "overrides": {"lrbf": {"outer_rate": 1e6, "inner_rate": 1.0, "epochs": 20}}, "demos": {"count": 4}}"#,
    )
    .unwrap();
    assert_eq!(code(&["--config", blow_up.to_str().unwrap(), "--out", out, "train"]), 3);

    let file = d.join("plain-file");
    std::fs::write(&file, b"x").unwrap();
    assert_eq!(code(&["--out", file.join("sub").to_str().unwrap(), "gen-demos"]), 1);
}
