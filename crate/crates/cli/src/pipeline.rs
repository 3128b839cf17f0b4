//! Stage orchestration: ingest, cascade, annotate, mask, train, scan.
//!
//! Each stage writes into its own directory under the output directory and
//! is recorded in `manifest.json` with a hash of everything it read and a
//! hash of everything it wrote. A stage whose inputs hash matches the
//! previous run and whose outputs are still intact is skipped.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::Context;
use chrono::Utc;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use ombudsman_core::annotation::{
    adjudicate_all, agreement_report, crowd_screen_negatives, export_labeled, handoff_filter,
    read_dataset, read_records, write_dataset, AnnotationRecord, DatasetSummary, RaterGroup,
};
use ombudsman_core::cascade::{run_cascade, DECISIONS_FILE, FUNNEL_FILE, RETAINED_FILE};
use ombudsman_core::classifier::{
    evaluate, make_kfold, make_splits, train, train_backend, ModelArtifact, Protocol, SplitManifest,
};
use ombudsman_core::corpus::{
    dedupe, ingest, read_corpus, reserve_wild, write_corpus, IngestOptions,
};
use ombudsman_core::hashing::{json_hash, sha256_hex, sub_seed};
use ombudsman_core::masking::{location_frequency, mask_examples, write_frequency_csv, Stoplist};
use ombudsman_core::scanner::{
    audit_labels_from_records, estimate_wild_metrics, sample_audit, scan, write_queue_csv,
    ScanModel, ScanOptions, ScanStore,
};

use crate::backends::cascade_backends;
use crate::config::{BackendConfig, PipelineConfig, ScanTarget};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Cascade,
    Annotate,
    Mask,
    Train,
    Scan,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Ingest,
        Stage::Cascade,
        Stage::Annotate,
        Stage::Mask,
        Stage::Train,
        Stage::Scan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Cascade => "cascade",
            Stage::Annotate => "annotate",
            Stage::Mask => "mask",
            Stage::Train => "train",
            Stage::Scan => "scan",
        }
    }

    /// Stages whose outputs this stage reads.
    pub fn upstream(self) -> &'static [Stage] {
        match self {
            Stage::Ingest => &[],
            Stage::Cascade => &[Stage::Ingest],
            Stage::Annotate => &[Stage::Cascade],
            Stage::Mask => &[Stage::Annotate],
            Stage::Train => &[Stage::Mask],
            Stage::Scan => &[Stage::Ingest, Stage::Train],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s.trim())
            .ok_or_else(|| PipelineError::UnknownStage(s.trim().to_string()))
    }
}

/// Parses `a,b,c`; the result is in pipeline order.
pub fn parse_stages(list: &str) -> Result<Vec<Stage>, PipelineError> {
    let set: BTreeSet<Stage> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(Stage::from_str)
        .collect::<Result<_, _>>()?;
    Ok(set.into_iter().collect())
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("unknown stage {0:?}; stages are ingest, cascade, annotate, mask, train, scan")]
    UnknownStage(String),
    #[error(
        "stage {stage} needs the outputs of stage {upstream}, which are missing or modified; \
         run `--stages {upstream}` first"
    )]
    MissingUpstream { stage: Stage, upstream: Stage },
    #[error("stage {stage} failed")]
    Stage {
        stage: Stage,
        #[source]
        source: anyhow::Error,
    },
    #[error("run manifest {path}: {message}")]
    Manifest { path: String, message: String },
}

impl PipelineError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::UnknownStage(_) => "unknown_stage",
            PipelineError::MissingUpstream { .. } => "missing_upstream",
            PipelineError::Stage { .. } => "stage_failed",
            PipelineError::Manifest { .. } => "manifest",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub inputs_hash: String,
    pub outputs_hash: String,
    /// Output file (relative to the output directory) to content hash.
    pub outputs: BTreeMap<String, String>,
    pub duration_ms: u64,
    pub skipped: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub seed: u64,
    pub stages: Vec<StageRecord>,
}

impl RunManifest {
    pub fn stage(&self, stage: Stage) -> Option<&StageRecord> {
        self.stages.iter().find(|r| r.stage == stage)
    }

    /// `(stage, inputs hash, outputs hash)` rows; the reproducible part.
    pub fn hashes(&self) -> Vec<(Stage, String, String)> {
        self.stages
            .iter()
            .map(|r| (r.stage, r.inputs_hash.clone(), r.outputs_hash.clone()))
            .collect()
    }

    pub fn load(path: &Path) -> Result<Option<Self>, PipelineError> {
        if !path.exists() {
            return Ok(None);
        }
        let err = |message: String| PipelineError::Manifest {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| err(e.to_string()))
    }

    fn save(&self, path: &Path) -> Result<(), PipelineError> {
        write_json(path, self).map_err(|e| PipelineError::Manifest {
            path: path.display().to_string(),
            message: format!("{e:#}"),
        })
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn file_hash(path: &Path) -> anyhow::Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(bytes))
}

fn optional_file_hash(path: Option<&Path>) -> anyhow::Result<Option<String>> {
    path.map(file_hash).transpose()
}

/// Backend description for hashing: content, never local paths.
fn backend_identity(b: &BackendConfig) -> anyhow::Result<Value> {
    Ok(match b {
        BackendConfig::Rule {
            style,
            max_premise_chars,
        } => json!({"kind": "rule", "style": style, "max_premise_chars": max_premise_chars}),
        BackendConfig::Http {
            url,
            model,
            max_premise_chars,
            cache_mode,
            ..
        } => json!({"kind": "http", "url": url, "model": model,
                    "max_premise_chars": max_premise_chars, "cache_mode": cache_mode}),
        BackendConfig::Replay { model, cache } => {
            json!({"kind": "replay", "model": model, "cache": file_hash(cache)?})
        }
    })
}

struct Ctx<'a> {
    cfg: &'a PipelineConfig,
    out: &'a Path,
    /// Output hashes of stages available to downstream stages.
    done: BTreeMap<Stage, StageRecord>,
}

impl Ctx<'_> {
    fn dir(&self, stage: Stage) -> PathBuf {
        self.out.join(stage.as_str())
    }

    fn path(&self, stage: Stage, file: &str) -> PathBuf {
        self.dir(stage).join(file)
    }

    fn upstream_hash(&self, stage: Stage) -> String {
        self.done
            .get(&stage)
            .map(|r| r.outputs_hash.clone())
            .unwrap_or_default()
    }

    fn inputs_hash(&self, stage: Stage) -> anyhow::Result<String> {
        let cfg = self.cfg;
        let upstream: Vec<String> = stage
            .upstream()
            .iter()
            .map(|s| self.upstream_hash(*s))
            .collect();
        let own = match stage {
            Stage::Ingest => {
                let sources = cfg
                    .sources
                    .iter()
                    .map(|s| {
                        let mut v = serde_json::to_value(s)?;
                        v["archive_path"] = json!(optional_file_hash(s.archive_path.as_deref())?);
                        Ok(v)
                    })
                    .collect::<anyhow::Result<Vec<_>>>()?;
                json!({"sources": sources, "ingest": cfg.ingest,
                       "reserve_seed": sub_seed(cfg.seed, "reserve")})
            }
            Stage::Cascade => json!({"cascade": cfg.cascade,
                "nli": backend_identity(&cfg.backends.nli)?,
                "generative": backend_identity(&cfg.backends.generative)?}),
            Stage::Annotate => {
                json!({"records": optional_file_hash(cfg.annotation.records.as_deref())?,
                "handoff": cfg.annotation.handoff})
            }
            Stage::Mask => {
                let m = &cfg.masking;
                json!({"mask_token": m.mask_token, "ner": m.ner.identifier(),
                       "count_mode": m.count_mode,
                       "stoplist": optional_file_hash(m.stoplist.as_deref().map(Path::new))?})
            }
            Stage::Train => json!({"split": cfg.split, "train": cfg.train,
                "split_seed": sub_seed(cfg.seed, "split")}),
            Stage::Scan => json!({"targets": cfg.scan.targets,
                "audit_positive": cfg.scan.audit_positive,
                "audit_negative": cfg.scan.audit_negative,
                "audit_labels": optional_file_hash(cfg.scan.audit_labels.as_deref())?,
                "audit_seed": sub_seed(cfg.seed, "audit"),
                "mask_token": cfg.masking.mask_token, "ner": cfg.masking.ner.identifier(),
                "run_timestamp": cfg.run_timestamp}),
        };
        Ok(json_hash(
            &json!({"stage": stage, "own": own, "upstream": upstream}),
        ))
    }

    /// Hashes the given output files of a stage.
    fn record(&self, files: &[PathBuf]) -> anyhow::Result<BTreeMap<String, String>> {
        let mut out = BTreeMap::new();
        for f in files {
            let rel = f
                .strip_prefix(self.out)
                .unwrap_or(f)
                .to_string_lossy()
                .replace('\\', "/");
            out.insert(rel, file_hash(f)?);
        }
        Ok(out)
    }
}

/// True when every recorded output still exists with its recorded hash.
fn outputs_intact(out: &Path, rec: &StageRecord) -> bool {
    rec.outputs
        .iter()
        .all(|(rel, h)| file_hash(&out.join(rel)).is_ok_and(|found| &found == h))
}

/// Runs `stages` (all when empty) in pipeline order and writes the run
/// manifest.
pub fn run_pipeline(cfg: &PipelineConfig, stages: &[Stage]) -> Result<RunManifest, PipelineError> {
    let out = cfg.output_dir.as_path();
    let manifest_path = out.join(MANIFEST_FILE);
    let previous = RunManifest::load(&manifest_path)?.unwrap_or_default();
    let requested: BTreeSet<Stage> = if stages.is_empty() {
        Stage::ALL.into_iter().collect()
    } else {
        stages.iter().copied().collect()
    };

    let mut ctx = Ctx {
        cfg,
        out,
        done: BTreeMap::new(),
    };
    for rec in &previous.stages {
        if outputs_intact(out, rec) {
            ctx.done.insert(rec.stage, rec.clone());
        }
    }

    for stage in Stage::ALL.into_iter().filter(|s| requested.contains(s)) {
        for up in stage.upstream() {
            if !ctx.done.contains_key(up) {
                return Err(PipelineError::MissingUpstream {
                    stage,
                    upstream: *up,
                });
            }
        }
        let fail = |source: anyhow::Error| PipelineError::Stage { stage, source };
        let inputs_hash = ctx.inputs_hash(stage).map_err(fail)?;
        if let Some(prev) = ctx.done.get(&stage) {
            if prev.inputs_hash == inputs_hash {
                log::info!("{stage}: inputs unchanged, skipped");
                let mut rec = prev.clone();
                rec.skipped = true;
                rec.duration_ms = 0;
                ctx.done.insert(stage, rec);
                continue;
            }
        }
        let started = Instant::now();
        let dir = ctx.dir(stage);
        if dir.exists() {
            std::fs::remove_dir_all(&dir)
                .with_context(|| format!("clearing {}", dir.display()))
                .map_err(fail)?;
        }
        std::fs::create_dir_all(&dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(fail)?;
        log::info!("{stage}: running");
        let files = match stage {
            Stage::Ingest => ingest_stage(&ctx),
            Stage::Cascade => cascade_stage(&ctx),
            Stage::Annotate => annotate_stage(&ctx),
            Stage::Mask => mask_stage(&ctx),
            Stage::Train => train_stage(&ctx),
            Stage::Scan => scan_stage(&ctx),
        }
        .map_err(fail)?;
        let outputs = ctx.record(&files).map_err(fail)?;
        let rec = StageRecord {
            stage,
            inputs_hash,
            outputs_hash: json_hash(&outputs),
            outputs,
            duration_ms: started.elapsed().as_millis() as u64,
            skipped: false,
        };
        log::info!("{stage}: done in {} ms", rec.duration_ms);
        ctx.done.insert(stage, rec);
    }

    let manifest = RunManifest {
        seed: cfg.seed,
        stages: Stage::ALL
            .into_iter()
            .filter_map(|s| ctx.done.get(&s).cloned())
            .collect(),
    };
    manifest.save(&manifest_path)?;
    Ok(manifest)
}

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const WILD_FILE: &str = "wild.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const DATASET_FILE: &str = "dataset.jsonl";
pub const SPLITS_FILE: &str = "splits.json";
pub const SCANS_DIR: &str = "scans";

pub fn artifact_file(model: &str, masking: impl fmt::Display) -> String {
    format!("{model}-{masking}.artifact.json")
}

pub fn eval_file(model: &str, masking: impl fmt::Display) -> String {
    format!("{model}-{masking}.eval.json")
}

fn ingest_stage(ctx: &Ctx) -> anyhow::Result<Vec<PathBuf>> {
    let cfg = ctx.cfg;
    let raw = ctx.path(Stage::Ingest, "raw.jsonl");
    let opts = IngestOptions {
        author_salt: cfg.ingest.author_salt.clone(),
        max_retries: cfg.ingest.max_retries,
        ..Default::default()
    };
    let mut sources = BTreeMap::new();
    for spec in &cfg.sources {
        let summary = ingest(spec, &raw, &opts).with_context(|| format!("source {}", spec.name))?;
        log::info!("{}: {} new posts", spec.name, summary.new_posts);
        sources.insert(spec.name.clone(), summary);
    }
    let posts = if raw.exists() {
        read_corpus(&raw)?
    } else {
        Vec::new()
    };
    let ingested = posts.len();
    let (posts, dupes) = dedupe(posts);
    let (main, wild) = reserve_wild(
        posts,
        cfg.ingest.wild_reserve,
        sub_seed(cfg.seed, "reserve"),
    )?;
    let corpus = ctx.path(Stage::Ingest, CORPUS_FILE);
    let wild_path = ctx.path(Stage::Ingest, WILD_FILE);
    write_corpus(&corpus, &main)?;
    write_corpus(&wild_path, &wild)?;
    let summary = ctx.path(Stage::Ingest, SUMMARY_FILE);
    write_json(
        &summary,
        &json!({"sources": sources, "ingested": ingested, "duplicates": dupes.dropped,
                "main": main.len(), "wild": wild.len()}),
    )?;
    Ok(vec![corpus, wild_path, summary])
}

fn cascade_stage(ctx: &Ctx) -> anyhow::Result<Vec<PathBuf>> {
    let corpus = read_corpus(ctx.path(Stage::Ingest, CORPUS_FILE))?;
    let backends = cascade_backends(&ctx.cfg.backends)?;
    let outcome = run_cascade(&corpus, &ctx.cfg.cascade, &backends)?;
    let dir = ctx.dir(Stage::Cascade);
    outcome.write_to(&dir)?;
    for s in &outcome.report.stages {
        log::info!(
            "{}: {} in, {} retained",
            s.stage,
            s.total.input,
            s.total.retain
        );
    }
    Ok([DECISIONS_FILE, RETAINED_FILE, FUNNEL_FILE]
        .iter()
        .map(|f| dir.join(f))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotateSummary {
    pub retained: usize,
    pub records_used: usize,
    /// Records about posts the cascade did not retain.
    pub records_ignored: usize,
    /// Retained posts no crowd annotator has labeled yet.
    pub unlabeled: usize,
    pub handoff_passed: usize,
    pub crowd_screened: usize,
    pub awaiting_experts: Vec<String>,
    pub adjudicated: usize,
    pub pending_disputes: usize,
    pub adjudication_errors: usize,
    pub filter_warnings: usize,
    pub dataset: DatasetSummary,
}

fn annotate_stage(ctx: &Ctx) -> anyhow::Result<Vec<PathBuf>> {
    let cfg = ctx.cfg;
    let retained = read_corpus(ctx.path(Stage::Cascade, RETAINED_FILE))?;
    let ids: BTreeSet<&str> = retained.iter().map(|p| p.post_id.as_str()).collect();
    let all: Vec<AnnotationRecord> = match &cfg.annotation.records {
        Some(p) => read_records(p)?,
        None => Vec::new(),
    };
    let (records, ignored): (Vec<_>, Vec<_>) = all
        .into_iter()
        .partition(|r| ids.contains(r.post_id.as_str()));
    let crowd: Vec<AnnotationRecord> = records
        .iter()
        .filter(|r| r.affiliation.is_partisan())
        .cloned()
        .collect();
    let handoff = handoff_filter(&crowd, cfg.annotation.handoff);
    let screened = crowd_screen_negatives(&crowd, cfg.annotation.handoff);
    let passed: BTreeSet<&str> = handoff.post_ids.iter().map(String::as_str).collect();
    let expert_records: Vec<AnnotationRecord> = records
        .iter()
        .filter(|r| !r.affiliation.is_partisan() && passed.contains(r.post_id.as_str()))
        .cloned()
        .collect();
    let with_experts: BTreeSet<&str> = expert_records.iter().map(|r| r.post_id.as_str()).collect();
    let batch = adjudicate_all(&expert_records);
    let mut labels = batch.labels.clone();
    labels.extend(screened.iter().cloned());
    let dataset = export_labeled(&labels, &retained)?;
    let crowd_ids: BTreeSet<&str> = crowd.iter().map(|r| r.post_id.as_str()).collect();

    let dir = ctx.dir(Stage::Annotate);
    let dataset_path = dir.join(DATASET_FILE);
    write_dataset(&dataset_path, &dataset)?;
    labels.sort_by(|a, b| a.post_id.cmp(&b.post_id));
    let adjudications = dir.join("adjudications.json");
    write_json(&adjudications, &labels)?;
    let agreement = dir.join("agreement.json");
    write_json(
        &agreement,
        &json!({"partisan": agreement_report(&crowd, RaterGroup::Partisan),
                "expert": agreement_report(&expert_records, RaterGroup::Expert)}),
    )?;
    let pending = dir.join("pending.json");
    write_json(
        &pending,
        &json!({"disputes": batch.pending, "errors": batch.errors, "warnings": handoff.warnings}),
    )?;
    let summary = AnnotateSummary {
        retained: retained.len(),
        records_used: records.len(),
        records_ignored: ignored.len(),
        unlabeled: ids.iter().filter(|id| !crowd_ids.contains(*id)).count(),
        handoff_passed: handoff.post_ids.len(),
        crowd_screened: screened.len(),
        awaiting_experts: handoff
            .post_ids
            .iter()
            .filter(|id| !with_experts.contains(id.as_str()))
            .cloned()
            .collect(),
        adjudicated: batch.labels.len(),
        pending_disputes: batch.pending.len(),
        adjudication_errors: batch.errors.len(),
        filter_warnings: handoff.warnings.len(),
        dataset: DatasetSummary::of(&dataset),
    };
    let summary_path = dir.join(SUMMARY_FILE);
    write_json(&summary_path, &summary)?;
    Ok(vec![
        dataset_path,
        adjudications,
        agreement,
        pending,
        summary_path,
    ])
}

fn mask_stage(ctx: &Ctx) -> anyhow::Result<Vec<PathBuf>> {
    let m = &ctx.cfg.masking;
    let mut dataset = read_dataset(ctx.path(Stage::Annotate, DATASET_FILE))?;
    let ner = m.ner.build()?;
    let summary = mask_examples(&mut dataset, ner.as_ref(), &m.mask_token)?;
    let dir = ctx.dir(Stage::Mask);
    let dataset_path = dir.join(DATASET_FILE);
    write_dataset(&dataset_path, &dataset)?;
    let stoplist = match &m.stoplist {
        Some(p) => Stoplist::parse(&std::fs::read_to_string(p)?),
        None => Stoplist::default(),
    };
    let positives: Vec<&[String]> = dataset
        .iter()
        .filter(|e| e.label == 1)
        .map(|e| e.locations.as_slice())
        .collect();
    let table = location_frequency(&positives, &stoplist, m.count_mode);
    let csv_path = dir.join("locations.csv");
    write_frequency_csv(&csv_path, &table)?;
    let summary_path = dir.join(SUMMARY_FILE);
    write_json(
        &summary_path,
        &json!({"ner": ner.identifier(), "summary": summary}),
    )?;
    Ok(vec![dataset_path, csv_path, summary_path])
}

/// Split manifest for the configured protocol.
pub fn build_splits(
    cfg: &PipelineConfig,
    dataset: &[ombudsman_core::annotation::LabeledExample],
) -> anyhow::Result<SplitManifest> {
    let seed = sub_seed(cfg.seed, "split");
    Ok(match cfg.split.protocol {
        Protocol::RepeatedRuns => make_splits(dataset, cfg.split.ratio, seed)?,
        Protocol::KFold { k } => make_kfold(dataset, k, seed)?,
    })
}

fn train_stage(ctx: &Ctx) -> anyhow::Result<Vec<PathBuf>> {
    let cfg = ctx.cfg;
    let dataset = read_dataset(ctx.path(Stage::Mask, DATASET_FILE))?;
    let manifest = build_splits(cfg, &dataset)?;
    let dir = ctx.dir(Stage::Train);
    let splits = dir.join(SPLITS_FILE);
    manifest.save(&splits)?;
    let mut files = vec![splits];
    let mut evals = Vec::new();
    for t in &cfg.train {
        let backend = train_backend(&t.model_identifier)
            .with_context(|| format!("no training backend for {}", t.model_identifier))?;
        let artifact = train(&dataset, &manifest, t, backend.as_ref())?;
        let report = evaluate(&artifact, &dataset, &manifest)?;
        log::info!(
            "{} ({}): macro F1 {:.3}",
            t.model_identifier,
            t.masking,
            report.mean.f1
        );
        let a = dir.join(artifact_file(&t.model_identifier, t.masking));
        artifact.save(&a)?;
        let e = dir.join(eval_file(&t.model_identifier, t.masking));
        write_json(&e, &report)?;
        evals.push(json!({"model": report.model, "masking": report.masking,
                          "mean": report.mean, "dispersion": report.dispersion}));
        files.extend([a, e]);
    }
    let summary = dir.join(SUMMARY_FILE);
    write_json(&summary, &evals)?;
    files.push(summary);
    Ok(files)
}

/// Loads the trained artifact for a scan target from a train stage directory.
pub fn load_artifact(train_dir: &Path, target: &ScanTarget) -> anyhow::Result<ModelArtifact> {
    let path = train_dir.join(artifact_file(&target.model_identifier, target.masking));
    ModelArtifact::load(&path).with_context(|| format!("loading {}", path.display()))
}

fn scan_stage(ctx: &Ctx) -> anyhow::Result<Vec<PathBuf>> {
    let cfg = ctx.cfg;
    let wild = read_corpus(ctx.path(Stage::Ingest, WILD_FILE))?;
    let ner = cfg.masking.ner.build()?;
    let created_at = cfg.run_timestamp.unwrap_or_else(Utc::now);
    let labels = match &cfg.scan.audit_labels {
        Some(p) => Some(audit_labels_from_records(&read_records(p)?)),
        None => None,
    };
    let dir = ctx.dir(Stage::Scan);
    let store = ScanStore::new(dir.join(SCANS_DIR));
    let mut files = Vec::new();
    let mut summaries = Vec::new();
    for target in &cfg.scan.targets {
        let artifact = load_artifact(&ctx.dir(Stage::Train), target)?;
        let model = ScanModel::from_artifact(&artifact)?;
        let options = ScanOptions {
            masking: target.masking,
            mask_token: &cfg.masking.mask_token,
            ner: ner.as_ref(),
            created_at,
        };
        let mut report = scan(&wild, &model, &options)?;
        if cfg.scan.audit_positive + cfg.scan.audit_negative > 0 {
            sample_audit(
                &mut report,
                cfg.scan.audit_positive,
                cfg.scan.audit_negative,
                sub_seed(cfg.seed, "audit"),
            )?;
            if let Some(labels) = &labels {
                estimate_wild_metrics(&mut report, labels)?;
            }
        }
        log::info!(
            "scan {}: {} of {} flagged",
            report.scan_id,
            report.n_positive,
            report.n_scanned
        );
        files.push(store.save(&report)?);
        let queue = dir.join(format!("{}.queue.csv", report.scan_id));
        write_queue_csv(&report.flagged, std::fs::File::create(&queue)?)?;
        files.push(queue);
        summaries.push(report.summary());
    }
    let summary = dir.join(SUMMARY_FILE);
    write_json(&summary, &summaries)?;
    files.push(summary);
    Ok(files)
}
