//! Helpers for running the bundled pipeline config in a scratch directory.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use ombudsman_cli::{load_config, run_pipeline, PipelineConfig, RunManifest, Stage};
use serde_json::{json, Value};

pub const TIME_LIMIT: Duration = Duration::from_secs(60);

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

/// The shipped config, rewritten so fixtures resolve to the repository and
/// outputs land in `dir/run`.
pub fn config_in(dir: &Path) -> PathBuf {
    let text = fs::read_to_string(root().join("ombudsman.toml")).unwrap();
    let fixtures = root().join("fixtures");
    let text = text
        .replace("\"fixtures/", &format!("\"{}/", fixtures.display()))
        .replace("output_dir = \"runs/default\"", "output_dir = \"run\"");
    let path = dir.join("ombudsman.toml");
    fs::write(&path, text).unwrap();
    path
}

pub fn load(dir: &Path) -> PipelineConfig {
    load_config(config_in(dir)).unwrap()
}

pub fn manifest_view(m: &RunManifest) -> Value {
    json!(m
        .stages
        .iter()
        .map(|s| json!({"stage": s.stage, "inputs_hash": s.inputs_hash, "outputs_hash": s.outputs_hash}))
        .collect::<Vec<_>>())
}

fn bless() -> bool {
    std::env::var_os("OMBUDSMAN_BLESS").is_some()
}

fn compare(name: &str, got: &Value) -> Result<(), String> {
    let path = root().join("fixtures/golden").join(name);
    if bless() {
        fs::write(&path, serde_json::to_string_pretty(got).unwrap() + "\n")
            .map_err(|e| e.to_string())?;
    }
    let want: Value = serde_json::from_str(&fs::read_to_string(&path).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    if &want == got {
        Ok(())
    } else {
        Err(format!("{name} differs from golden: {got}"))
    }
}

/// Full run of the shipped config against the committed funnel and
/// manifest goldens.
pub fn check_golden_pipeline() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = load(dir.path());
    let started = Instant::now();
    let manifest = run_pipeline(&cfg, &Stage::ALL).map_err(|e| format!("{e:#}"))?;
    let elapsed = started.elapsed();
    let funnel: Value = serde_json::from_str(
        &fs::read_to_string(cfg.output_dir.join("cascade/funnel.json"))
            .map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    compare("funnel.json", &funnel)?;
    compare("manifest.json", &manifest_view(&manifest))?;
    if elapsed > TIME_LIMIT {
        return Err(format!("took {elapsed:?}, limit {TIME_LIMIT:?}"));
    }
    let counts: Vec<String> = funnel["stages"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| {
            format!(
                "{} {}->{}",
                s["stage"].as_str().unwrap(),
                s["total"]["in"],
                s["total"]["retain"]
            )
        })
        .collect();
    Ok(format!(
        "{} posts, {}, 6 stage hashes match, {:.1}s",
        funnel["corpus_size"],
        counts.join(", "),
        elapsed.as_secs_f64()
    ))
}
