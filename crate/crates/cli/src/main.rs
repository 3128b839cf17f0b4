use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use chrono::{DateTime, Utc};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use ombudsman_cli::backends::{cascade_backends, generative_backend};
use ombudsman_cli::config::{BackendConfig, RuleStyle};
use ombudsman_cli::{load_config, parse_stages, run_pipeline, ConfigError, PipelineError, Stage};
use ombudsman_core::annotation::{
    adjudicate_all, agreement_report, read_dataset, read_records, write_dataset, RaterGroup,
};
use ombudsman_core::cascade::run_cascade;
use ombudsman_core::classifier::{
    evaluate, zero_shot_evaluate, MaskingVariant, ModelArtifact, SplitManifest, ZERO_SHOT_PROMPT,
};
use ombudsman_core::corpus::{ingest, read_corpus, reserve_wild, write_corpus, IngestOptions};
use ombudsman_core::masking::{
    location_frequency, mask_examples, write_frequency_csv_to, CountMode, MaskingConfig, Stoplist,
};
use ombudsman_core::scanner::{
    audit_labels_from_records, estimate_wild_metrics, sample_audit, scan, write_queue_csv,
    ScanModel, ScanOptions, ScanStore,
};
use ombudsman_server::AppState;

#[derive(Parser)]
#[command(
    name = "ombudsman",
    version,
    about = "Mine social-web posts for anticipatory infrastructure concerns"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Group {
    Partisan,
    Expert,
}

#[derive(Clone, Copy, ValueEnum)]
enum Masking {
    Mask,
    Nomask,
}

impl From<Masking> for MaskingVariant {
    fn from(m: Masking) -> Self {
        match m {
            Masking::Mask => MaskingVariant::Mask,
            Masking::Nomask => MaskingVariant::Nomask,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ZeroShotBackend {
    /// Deterministic rule rater.
    Rule,
    /// `[backends.generative]` from the config.
    Config,
}

#[derive(Subcommand)]
enum Command {
    /// Run pipeline stages end to end.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated subset of ingest,cascade,annotate,mask,train,scan.
        #[arg(long)]
        stages: Option<String>,
    },
    /// Check a config and list every violation.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Append every configured source to a corpus file.
    Ingest {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Move a seeded random sample into the in-the-wild partition.
    ReserveWild {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Remaining corpus; defaults to overwriting --corpus.
        #[arg(long)]
        main_out: Option<PathBuf>,
        #[arg(long)]
        wild_out: PathBuf,
    },
    /// Keyword, NLI and LLM filters over a corpus.
    Cascade {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Agreement statistics for annotation records.
    Agree {
        #[arg(long)]
        records: PathBuf,
        #[arg(long, value_enum, default_value = "partisan")]
        group: Group,
    },
    /// Final labels from expert and tiebreaker records.
    Adjudicate {
        #[arg(long)]
        experts: PathBuf,
        #[arg(long)]
        tiebreakers: Option<PathBuf>,
    },
    /// Fill masked_text and locations for a labeled dataset.
    Mask {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Takes the mask token and NER backend from this config.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Location frequency table over the positives of a masked dataset.
    Locations {
        #[arg(long)]
        positives: PathBuf,
        #[arg(long)]
        stoplist: Option<PathBuf>,
        /// Count each location once per post.
        #[arg(long)]
        per_post: bool,
    },
    /// Train every configured model (the train stage of `run`).
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate a trained artifact on its split manifest.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Zero-shot rating of a labeled dataset by a generative model.
    Zeroshot {
        #[arg(long, value_enum)]
        backend: ZeroShotBackend,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Classify every post of a corpus with a trained artifact.
    Scan {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        store: PathBuf,
        #[arg(long, value_enum, default_value = "mask")]
        masking: Masking,
        /// Pins the report timestamp.
        #[arg(long)]
        created_at: Option<DateTime<Utc>>,
        /// Also write the flagged queue as CSV.
        #[arg(long)]
        queue_csv: Option<PathBuf>,
    },
    /// Draw the audit sample of a stored scan and optionally score it.
    Audit {
        #[arg(long)]
        scan: String,
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        npos: usize,
        #[arg(long)]
        nneg: usize,
        #[arg(long)]
        seed: u64,
        /// Human audit records; metrics are estimated when given.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Serve the scan and labeling API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        store: PathBuf,
        /// Annotation records file; created if missing, appended on label.
        #[arg(long)]
        annotations: PathBuf,
        /// Corpus of posts open for labeling besides scanned ones.
        #[arg(long)]
        posts: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", error_json(&err));
            let usage = err.downcast_ref::<ConfigError>().is_some()
                || matches!(
                    err.downcast_ref::<PipelineError>(),
                    Some(PipelineError::UnknownStage(_))
                );
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}

/// The error chain joined by ": ", skipping causes an outer message
/// already spells out.
fn chain_message(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if out.contains(&text) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&text);
    }
    out
}

fn error_json(err: &anyhow::Error) -> serde_json::Value {
    let mut body = json!({"code": "error", "message": chain_message(err)});
    if let Some(ConfigError::Invalid { violations, .. }) = err.downcast_ref::<ConfigError>() {
        body["code"] = json!("invalid_config");
        body["violations"] = json!(violations);
    } else if let Some(ConfigError::Read { .. }) = err.downcast_ref::<ConfigError>() {
        body["code"] = json!("config_unreadable");
    } else if let Some(p) = err.downcast_ref::<PipelineError>() {
        body["code"] = json!(p.code());
        match p {
            PipelineError::MissingUpstream { stage, upstream } => {
                body["stage"] = json!(stage);
                body["run_first"] = json!(upstream);
            }
            PipelineError::Stage { stage, .. } => body["stage"] = json!(stage),
            _ => {}
        }
    }
    json!({ "error": body })
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Run { config, stages } => {
            let cfg = load_config(&config)?;
            let stages = match stages {
                Some(s) => parse_stages(&s)?,
                None => Vec::new(),
            };
            let manifest = run_pipeline(&cfg, &stages)?;
            print_json(&manifest)
        }
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            print_json(&json!({"valid": true, "output_dir": cfg.output_dir}))
        }
        Command::Ingest { config, out } => {
            let cfg = load_config(&config)?;
            let opts = IngestOptions {
                author_salt: cfg.ingest.author_salt.clone(),
                max_retries: cfg.ingest.max_retries,
                ..Default::default()
            };
            let mut summaries = BTreeMap::new();
            for spec in &cfg.sources {
                let s =
                    ingest(spec, &out, &opts).with_context(|| format!("source {}", spec.name))?;
                summaries.insert(spec.name.clone(), s);
            }
            print_json(&summaries)
        }
        Command::ReserveWild {
            corpus,
            n,
            seed,
            main_out,
            wild_out,
        } => {
            let posts = read_corpus(&corpus)?;
            let (main, wild) = reserve_wild(posts, n, seed)?;
            write_corpus(main_out.as_ref().unwrap_or(&corpus), &main)?;
            write_corpus(&wild_out, &wild)?;
            print_json(&json!({"main": main.len(), "wild": wild.len(), "seed": seed}))
        }
        Command::Cascade {
            config,
            corpus,
            out,
        } => {
            let cfg = load_config(&config)?;
            let posts = read_corpus(&corpus)?;
            let outcome = run_cascade(&posts, &cfg.cascade, &cascade_backends(&cfg.backends)?)?;
            outcome.write_to(&out)?;
            print_json(&outcome.report)
        }
        Command::Agree { records, group } => {
            let records = read_records(&records)?;
            let group = match group {
                Group::Partisan => RaterGroup::Partisan,
                Group::Expert => RaterGroup::Expert,
            };
            print_json(&agreement_report(&records, group))
        }
        Command::Adjudicate {
            experts,
            tiebreakers,
        } => {
            let mut records = read_records(&experts)?;
            if let Some(t) = tiebreakers {
                records.extend(read_records(&t)?);
            }
            print_json(&adjudicate_all(&records))
        }
        Command::Mask { input, out, config } => {
            let masking = match config {
                Some(c) => load_config(&c)?.masking,
                None => MaskingConfig::default(),
            };
            let mut dataset = read_dataset(&input)?;
            let ner = masking.ner.build()?;
            let summary = mask_examples(&mut dataset, ner.as_ref(), &masking.mask_token)?;
            write_dataset(&out, &dataset)?;
            print_json(&summary)
        }
        Command::Locations {
            positives,
            stoplist,
            per_post,
        } => {
            let dataset = read_dataset(&positives)?;
            if dataset.iter().any(|e| e.masked_text.is_none()) {
                bail!(
                    "{} has unmasked examples; run `ombudsman mask` first",
                    positives.display()
                );
            }
            let stoplist = match stoplist {
                Some(p) => Stoplist::parse(&std::fs::read_to_string(&p)?),
                None => Stoplist::default(),
            };
            let surfaces: Vec<&[String]> = dataset
                .iter()
                .filter(|e| e.label == 1)
                .map(|e| e.locations.as_slice())
                .collect();
            let mode = if per_post {
                CountMode::Posts
            } else {
                CountMode::Occurrences
            };
            let table = location_frequency(&surfaces, &stoplist, mode);
            write_frequency_csv_to(std::io::stdout().lock(), &table)?;
            Ok(())
        }
        Command::Train { config } => {
            let cfg = load_config(&config)?;
            let manifest = run_pipeline(&cfg, &[Stage::Train])?;
            print_json(&manifest)
        }
        Command::Eval {
            model,
            manifest,
            dataset,
        } => {
            let artifact = ModelArtifact::load(&model)?;
            let manifest = SplitManifest::load(&manifest)?;
            let dataset = read_dataset(&dataset)?;
            print_json(&evaluate(&artifact, &dataset, &manifest)?)
        }
        Command::Zeroshot {
            backend,
            dataset,
            config,
        } => {
            let cfg = config.as_deref().map(load_config).transpose()?;
            let backend_cfg = match (backend, &cfg) {
                (ZeroShotBackend::Rule, _) => BackendConfig::Rule {
                    style: RuleStyle::Chatty,
                    max_premise_chars: None,
                },
                (ZeroShotBackend::Config, Some(c)) => c.backends.generative.clone(),
                (ZeroShotBackend::Config, None) => bail!("--backend config needs --config"),
            };
            let params = cfg.map(|c| c.cascade.generation).unwrap_or_default();
            let backend = generative_backend(&backend_cfg)?;
            let dataset = read_dataset(&dataset)?;
            let refs: Vec<_> = dataset.iter().collect();
            print_json(&zero_shot_evaluate(
                &refs,
                ZERO_SHOT_PROMPT,
                backend.as_ref(),
                &params,
            )?)
        }
        Command::Scan {
            model,
            corpus,
            store,
            masking,
            created_at,
            queue_csv,
        } => {
            let artifact = ModelArtifact::load(&model)?;
            let scan_model = ScanModel::from_artifact(&artifact)?;
            let posts = read_corpus(&corpus)?;
            let masking_cfg = MaskingConfig::default();
            let ner = masking_cfg.ner.build()?;
            let report = scan(
                &posts,
                &scan_model,
                &ScanOptions {
                    masking: masking.into(),
                    mask_token: &masking_cfg.mask_token,
                    ner: ner.as_ref(),
                    created_at: created_at.unwrap_or_else(Utc::now),
                },
            )?;
            ScanStore::new(&store).save(&report)?;
            if let Some(path) = queue_csv {
                write_queue_csv(&report.flagged, std::fs::File::create(&path)?)?;
            }
            print_json(&report.summary())
        }
        Command::Audit {
            scan: id,
            store,
            npos,
            nneg,
            seed,
            labels,
        } => {
            let store = ScanStore::new(&store);
            let mut report = store.get(&id)?;
            sample_audit(&mut report, npos, nneg, seed)?;
            if let Some(path) = labels {
                let labels = audit_labels_from_records(&read_records(&path)?);
                estimate_wild_metrics(&mut report, &labels)?;
            }
            store.save(&report)?;
            print_json(&json!({
                "scan_id": report.scan_id,
                "audit_pos_sample": report.audit_pos_sample,
                "audit_neg_sample": report.audit_neg_sample,
                "estimated_metrics": report.estimated_metrics,
            }))
        }
        Command::Serve {
            port,
            store,
            annotations,
            posts,
        } => serve(port, &store, &annotations, posts.as_deref()),
    }
}

fn serve(port: u16, store: &Path, annotations: &Path, posts: Option<&Path>) -> anyhow::Result<()> {
    let annotations = ombudsman_core::annotation::AnnotationStore::open(annotations)?;
    let posts = posts.map(read_corpus).transpose()?.unwrap_or_default();
    let state = Arc::new(AppState::new(ScanStore::new(store), annotations, posts));
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
        log::info!("listening on http://{}", listener.local_addr()?);
        ombudsman_server::serve(listener, state).await
    })?;
    Ok(())
}
