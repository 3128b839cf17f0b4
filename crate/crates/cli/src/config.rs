//! The pipeline configuration file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use ombudsman_core::annotation::HandoffPolicy;
use ombudsman_core::backends::ReplayMode;
use ombudsman_core::cascade::CascadeConfig;
use ombudsman_core::classifier::{train_backend, MaskingVariant, Protocol, TrainConfig};
use ombudsman_core::corpus::{SourceMode, SourceSpec};
use ombudsman_core::masking::MaskingConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("config {path} has {} violation(s)", violations.len())]
    Invalid {
        path: String,
        violations: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub output_dir: PathBuf,
    /// Every stage derives its randomness from this through a named sub-seed.
    pub seed: u64,
    /// Timestamp stamped on scan reports; pin it for reproducible hashes.
    #[serde(default)]
    pub run_timestamp: Option<DateTime<Utc>>,
    #[serde(default)]
    pub sources: Vec<SourceSpec>,
    #[serde(default)]
    pub ingest: IngestSection,
    #[serde(default)]
    pub backends: BackendsSection,
    #[serde(default)]
    pub cascade: CascadeConfig,
    #[serde(default)]
    pub annotation: AnnotationSection,
    #[serde(default)]
    pub masking: MaskingConfig,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub train: Vec<TrainConfig>,
    #[serde(default)]
    pub scan: ScanSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IngestSection {
    pub author_salt: String,
    /// Posts moved to the in-the-wild partition after deduplication.
    pub wild_reserve: usize,
    pub max_retries: u32,
}

impl Default for IngestSection {
    fn default() -> Self {
        Self {
            author_salt: String::new(),
            wild_reserve: 0,
            max_retries: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleStyle {
    Plain,
    #[default]
    Chatty,
}

/// One inference backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendConfig {
    /// Deterministic rule stand-in.
    Rule {
        #[serde(default)]
        style: RuleStyle,
        #[serde(default)]
        max_premise_chars: Option<usize>,
    },
    /// Served model, optionally behind a record/replay cache.
    Http {
        url: String,
        model: String,
        #[serde(default)]
        api_key_env: Option<String>,
        #[serde(default)]
        max_premise_chars: Option<usize>,
        #[serde(default)]
        cache: Option<PathBuf>,
        #[serde(default)]
        cache_mode: ReplayMode,
    },
    /// Recorded responses only; a cache miss is an error.
    Replay { model: String, cache: PathBuf },
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Rule {
            style: RuleStyle::default(),
            max_premise_chars: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackendsSection {
    pub nli: BackendConfig,
    pub generative: BackendConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnnotationSection {
    /// JSONL of human annotation records (crowd, expert and tiebreaker).
    pub records: Option<PathBuf>,
    pub handoff: HandoffPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitSection {
    pub ratio: f64,
    pub protocol: Protocol,
}

impl Default for SplitSection {
    fn default() -> Self {
        Self {
            ratio: ombudsman_core::classifier::DEFAULT_TRAIN_RATIO,
            protocol: Protocol::RepeatedRuns,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanTarget {
    pub model_identifier: String,
    #[serde(default)]
    pub masking: MaskingVariant,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub targets: Vec<ScanTarget>,
    pub audit_positive: usize,
    pub audit_negative: usize,
    /// Human audit labels; metrics are estimated when present.
    pub audit_labels: Option<PathBuf>,
}

/// Loads a config file, resolving relative paths against its directory.
pub fn load_config(path: impl AsRef<Path>) -> Result<PipelineConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base).map_err(|violations| ConfigError::Invalid {
        path: path.display().to_string(),
        violations,
    })
}

/// Parses and validates config text. Every problem is reported: unknown
/// keys and type errors are collected by removing each offending key and
/// parsing again, then the semantic checks run on what parsed.
pub fn parse_config(text: &str, base: &Path) -> Result<PipelineConfig, Vec<String>> {
    let mut value: toml::Value = match toml::from_str(text) {
        Ok(v) => v,
        Err(e) => return Err(vec![format!("syntax: {}", e.message())]),
    };
    let mut problems = Vec::new();
    let parsed = loop {
        match serde_path_to_error::deserialize::<_, PipelineConfig>(value.clone()) {
            Ok(cfg) => break Some(cfg),
            Err(err) => {
                let path = err.path().to_string();
                let message = err.inner().to_string();
                let unknown = message.starts_with("unknown field");
                if unknown {
                    problems.push(format!("{path}: unknown key"));
                } else {
                    problems.push(format!("{path}: {message}"));
                }
                if path == "." || path.is_empty() || !remove_path(&mut value, &path) {
                    break None;
                }
            }
        }
    };
    let Some(mut cfg) = parsed else {
        return Err(problems);
    };
    cfg.resolve_paths(base);
    problems.extend(cfg.validate());
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(problems)
    }
}

/// Removes the value at a serde_path_to_error path such as `train[1].epochs`.
fn remove_path(root: &mut toml::Value, path: &str) -> bool {
    let mut steps = Vec::new();
    for part in path.split('.') {
        let (key, rest) = part.split_once('[').map_or((part, ""), |(k, r)| (k, r));
        if !key.is_empty() {
            steps.push(Step::Key(key.to_string()));
        }
        for idx in rest.split('[').filter(|s| !s.is_empty()) {
            match idx.trim_end_matches(']').parse() {
                Ok(i) => steps.push(Step::Index(i)),
                Err(_) => return false,
            }
        }
    }
    let Some((last, parents)) = steps.split_last() else {
        return false;
    };
    let mut cur = root;
    for step in parents {
        cur = match (step, cur) {
            (Step::Key(k), toml::Value::Table(t)) => match t.get_mut(k) {
                Some(v) => v,
                None => return false,
            },
            (Step::Index(i), toml::Value::Array(a)) => match a.get_mut(*i) {
                Some(v) => v,
                None => return false,
            },
            _ => return false,
        };
    }
    match (last, cur) {
        (Step::Key(k), toml::Value::Table(t)) => t.remove(k).is_some(),
        (Step::Index(i), toml::Value::Array(a)) if *i < a.len() => {
            a.remove(*i);
            true
        }
        _ => false,
    }
}

enum Step {
    Key(String),
    Index(usize),
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.output_dir);
        for s in &mut self.sources {
            if let Some(p) = &mut s.archive_path {
                resolve(base, p);
            }
        }
        for b in [&mut self.backends.nli, &mut self.backends.generative] {
            match b {
                BackendConfig::Http { cache: Some(p), .. }
                | BackendConfig::Replay { cache: p, .. } => resolve(base, p),
                _ => {}
            }
        }
        if let Some(p) = &mut self.annotation.records {
            resolve(base, p);
        }
        if let Some(p) = &mut self.scan.audit_labels {
            resolve(base, p);
        }
        if let Some(s) = &self.masking.stoplist {
            let mut p = PathBuf::from(s);
            resolve(base, &mut p);
            self.masking.stoplist = Some(p.display().to_string());
        }
    }

    /// Semantic checks; every violation is returned.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut names = BTreeSet::new();
        for (i, s) in self.sources.iter().enumerate() {
            if !names.insert(s.name.as_str()) {
                out.push(format!(
                    "sources[{i}].name: duplicate source name {:?}",
                    s.name
                ));
            }
            out.extend(
                s.validate()
                    .into_iter()
                    .map(|v| format!("sources[{i}]: {v}")),
            );
            if s.mode == SourceMode::KeywordSearch {
                if let Some(var) = &s.credentials_ref {
                    if std::env::var(var).map_or(true, |v| v.is_empty()) {
                        out.push(format!(
                            "sources[{i}].credentials_ref: environment variable {var} is not set"
                        ));
                    }
                }
            }
            if let Some(p) = &s.archive_path {
                if !p.is_file() {
                    out.push(format!(
                        "sources[{i}].archive_path: {} does not exist",
                        p.display()
                    ));
                }
            }
        }
        for (name, b) in [
            ("nli", &self.backends.nli),
            ("generative", &self.backends.generative),
        ] {
            out.extend(validate_backend(&format!("backends.{name}"), b));
        }
        out.extend(self.cascade.validate());
        if let Some(p) = &self.annotation.records {
            if !p.is_file() {
                out.push(format!(
                    "annotation.records: {} does not exist",
                    p.display()
                ));
            }
        }
        out.extend(self.masking.validate());
        if let Some(p) = &self.masking.stoplist {
            if !Path::new(p).is_file() {
                out.push(format!("masking.stoplist: {p} does not exist"));
            }
        }
        if !(self.split.ratio > 0.0 && self.split.ratio < 1.0) {
            out.push(format!(
                "split.ratio: ratio in (0,1), got {}",
                self.split.ratio
            ));
        }
        if let Protocol::KFold { k } = self.split.protocol {
            if k < 2 {
                out.push(format!("split.protocol: k-fold needs k >= 2, got {k}"));
            }
        }
        let mut trained = BTreeSet::new();
        for (i, t) in self.train.iter().enumerate() {
            let prefix = format!("train[{i}]");
            out.extend(t.validate(&prefix));
            if train_backend(&t.model_identifier).is_none() {
                out.push(format!(
                    "{prefix}.model_identifier: no training backend for {:?}",
                    t.model_identifier
                ));
            }
            if t.protocol != self.split.protocol {
                out.push(format!("{prefix}.protocol: must match split.protocol"));
            }
            if !trained.insert((t.model_identifier.clone(), t.masking.to_string())) {
                out.push(format!(
                    "{prefix}: duplicate model {} with masking {}",
                    t.model_identifier, t.masking
                ));
            }
        }
        for (i, s) in self.scan.targets.iter().enumerate() {
            if !trained.contains(&(s.model_identifier.clone(), s.masking.to_string())) {
                out.push(format!(
                    "scan.targets[{i}]: no train entry for {} with masking {}",
                    s.model_identifier, s.masking
                ));
            }
        }
        if let Some(p) = &self.scan.audit_labels {
            if !p.is_file() {
                out.push(format!("scan.audit_labels: {} does not exist", p.display()));
            }
        }
        if let Some(problem) = unwritable(&self.output_dir) {
            out.push(format!("output_dir: {problem}"));
        }
        out
    }

    /// Train entry for a scan target.
    pub fn train_for(&self, target: &ScanTarget) -> Option<&TrainConfig> {
        self.train
            .iter()
            .find(|t| t.model_identifier == target.model_identifier && t.masking == target.masking)
    }
}

fn validate_backend(prefix: &str, b: &BackendConfig) -> Vec<String> {
    let mut out = Vec::new();
    match b {
        BackendConfig::Rule {
            max_premise_chars, ..
        } => {
            if *max_premise_chars == Some(0) {
                out.push(format!("{prefix}.max_premise_chars: must be >= 1"));
            }
        }
        BackendConfig::Http {
            url,
            model,
            api_key_env,
            cache,
            cache_mode,
            ..
        } => {
            if url.trim().is_empty() {
                out.push(format!("{prefix}.url: must not be empty"));
            }
            if model.trim().is_empty() {
                out.push(format!("{prefix}.model: pin the model identifier"));
            }
            if let Some(var) = api_key_env {
                if std::env::var(var).map_or(true, |v| v.is_empty()) {
                    out.push(format!(
                        "{prefix}.api_key_env: environment variable {var} is not set"
                    ));
                }
            }
            if *cache_mode == ReplayMode::Replay && cache.as_ref().is_none_or(|c| !c.is_file()) {
                out.push(format!(
                    "{prefix}.cache: replay mode needs an existing cache file"
                ));
            }
        }
        BackendConfig::Replay { model, cache } => {
            if model.trim().is_empty() {
                out.push(format!("{prefix}.model: pin the model identifier"));
            }
            if !cache.is_file() {
                out.push(format!(
                    "{prefix}.cache: {} does not exist",
                    cache.display()
                ));
            }
        }
    }
    out
}

/// Why `dir` cannot be written, if it cannot.
fn unwritable(dir: &Path) -> Option<String> {
    let mut probe = dir;
    loop {
        if probe.exists() {
            return match std::fs::metadata(probe) {
                Ok(m) if !m.is_dir() => Some(format!("{} is not a directory", probe.display())),
                Ok(m) if m.permissions().readonly() => {
                    Some(format!("{} is read-only", probe.display()))
                }
                Ok(_) => None,
                Err(e) => Some(format!("{}: {e}", probe.display())),
            };
        }
        match probe.parent() {
            Some(p) if !p.as_os_str().is_empty() => probe = p,
            _ => return None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
output_dir = "out"
seed = 1
"#;

    fn parse(text: &str) -> Result<PipelineConfig, Vec<String>> {
        parse_config(text, Path::new("/tmp"))
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.output_dir, PathBuf::from("/tmp/out"));
        assert_eq!(cfg.cascade, CascadeConfig::default());
        assert!(cfg.train.is_empty());
    }

    #[test]
    fn threshold_out_of_range() {
        let err = parse(&format!("{MINIMAL}[cascade]\nnli_threshold = 1.5\n")).unwrap_err();
        assert_eq!(err.len(), 1);
        assert!(err[0].contains("nli_threshold in (0,1)"), "{err:?}");
    }

    #[test]
    fn two_violations_both_reported() {
        let text = format!("{MINIMAL}[cascade]\nnli_threshold = 1.5\nbatch_size = 0\n");
        let err = parse(&text).unwrap_err();
        assert_eq!(err.len(), 2, "{err:?}");
    }

    #[test]
    fn every_unknown_key_is_named() {
        let text = format!(
            "{MINIMAL}colour = \"red\"\n[cascade]\nnli_treshold = 0.4\n[[train]]\nepochz = 3\n"
        );
        let err = parse(&text).unwrap_err();
        assert!(err.contains(&"colour: unknown key".to_string()), "{err:?}");
        assert!(
            err.contains(&"cascade.nli_treshold: unknown key".to_string()),
            "{err:?}"
        );
        assert!(
            err.contains(&"train[0].epochz: unknown key".to_string()),
            "{err:?}"
        );
    }

    #[test]
    fn unknown_keys_and_semantic_errors_together() {
        let text = format!("{MINIMAL}typo = 1\n[split]\nratio = 2.0\n");
        let err = parse(&text).unwrap_err();
        assert_eq!(err.len(), 2, "{err:?}");
        assert!(err.iter().any(|e| e.starts_with("split.ratio")));
    }

    #[test]
    fn type_errors_reported_per_key() {
        let text = format!("{MINIMAL}[cascade]\nnli_threshold = \"high\"\nbatch_size = \"big\"\n");
        let err = parse(&text).unwrap_err();
        assert_eq!(err.len(), 2, "{err:?}");
    }

    #[test]
    fn missing_required_key() {
        let err = parse("seed = 1\n").unwrap_err();
        assert!(err[0].contains("output_dir"), "{err:?}");
    }

    #[test]
    fn unset_credential_is_a_violation() {
        let text = format!(
            "{MINIMAL}[[sources]]\nname = \"yt\"\nplatform = \"youtube\"\nmode = \"keyword_search\"\n\
             keywords = [\"bridge\"]\ncredentials_ref = \"OMBUDSMAN_TEST_UNSET_KEY\"\n"
        );
        let err = parse(&text).unwrap_err();
        assert!(err[0].contains("OMBUDSMAN_TEST_UNSET_KEY"), "{err:?}");
    }

    #[test]
    fn scan_target_must_be_trained() {
        let text = format!(
            "{MINIMAL}[[train]]\nmodel_identifier = \"rule-concern\"\n\
             [scan]\ntargets = [{{ model_identifier = \"bow-logreg\" }}]\n"
        );
        let err = parse(&text).unwrap_err();
        assert_eq!(err.len(), 1);
        assert!(err[0].starts_with("scan.targets[0]"), "{err:?}");
    }

    #[test]
    fn unknown_model_rejected() {
        let text = format!("{MINIMAL}[[train]]\nmodel_identifier = \"roberta-large\"\n");
        let err = parse(&text).unwrap_err();
        assert!(err[0].contains("no training backend"), "{err:?}");
    }
}
