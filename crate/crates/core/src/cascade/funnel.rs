use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::CascadeConfig;
use super::decision::{Stage, StageDecision, Verdict};
use super::keyword::keyword_filter_hashed;
use super::llm::llm_annotate_hashed;
use super::nli::nli_stage_hashed;
use crate::backends::{GenerativeBackend, NliBackend};
use crate::corpus::{Partition, Post};
use crate::jsonl::{self, JsonlError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    #[serde(rename = "in")]
    pub input: usize,
    pub retain: usize,
    pub drop: usize,
    pub error: usize,
}

impl StageCounts {
    fn record(&mut self, verdict: Verdict) {
        self.input += 1;
        match verdict {
            Verdict::Retain => self.retain += 1,
            Verdict::Drop => self.drop += 1,
            Verdict::Error => self.error += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: Stage,
    pub stage_config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_identifier: Option<String>,
    pub total: StageCounts,
    /// Every partition is listed, zeros included.
    pub by_partition: BTreeMap<Partition, StageCounts>,
}

impl StageReport {
    fn new(stage: Stage, hash: String, model: Option<&str>) -> Self {
        Self {
            stage,
            stage_config_hash: hash,
            model_identifier: model.map(str::to_string),
            total: StageCounts::default(),
            by_partition: Partition::ALL
                .iter()
                .map(|p| (*p, StageCounts::default()))
                .collect(),
        }
    }

    fn record(&mut self, partition: Partition, verdict: Verdict) {
        self.total.record(verdict);
        self.by_partition
            .get_mut(&partition)
            .expect("all partitions present")
            .record(verdict);
    }
}

/// Stage-by-stage counts of a cascade run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunnelReport {
    pub corpus_size: usize,
    pub stages: Vec<StageReport>,
}

impl FunnelReport {
    pub fn stage(&self, stage: Stage) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.stage == stage)
    }
}

#[derive(Clone)]
pub struct CascadeBackends {
    pub nli: Arc<dyn NliBackend>,
    pub generative: Arc<dyn GenerativeBackend>,
}

#[derive(Debug, thiserror::Error)]
pub enum CascadeError {
    #[error("invalid cascade config: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error(transparent)]
    Store(#[from] JsonlError),
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Everything a cascade run produces.
#[derive(Debug, Clone)]
pub struct CascadeOutcome {
    pub report: FunnelReport,
    /// Keyword, then nli, then llm decisions, each in corpus order.
    pub decisions: Vec<StageDecision>,
    /// Posts retained by every stage, with `matched_keywords` filled in.
    pub retained: Vec<Post>,
}

pub const DECISIONS_FILE: &str = "decisions.jsonl";
pub const FUNNEL_FILE: &str = "funnel.json";
pub const RETAINED_FILE: &str = "retained.jsonl";

impl CascadeOutcome {
    /// Writes the decision log, funnel report and retained posts into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<(), CascadeError> {
        let dir = dir.as_ref();
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| CascadeError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        jsonl::write_jsonl(dir.join(DECISIONS_FILE), &self.decisions)?;
        jsonl::write_jsonl(dir.join(RETAINED_FILE), &self.retained)?;
        let funnel = dir.join(FUNNEL_FILE);
        let body = serde_json::to_string_pretty(&self.report).expect("report serializes") + "\n";
        fs::write(&funnel, body).map_err(io(&funnel))?;
        Ok(())
    }
}

/// Runs keyword, nli and llm stages in order, each over the previous
/// stage's retained posts.
pub fn run_cascade(
    corpus: &[Post],
    config: &CascadeConfig,
    backends: &CascadeBackends,
) -> Result<CascadeOutcome, CascadeError> {
    let problems = config.validate();
    if !problems.is_empty() {
        return Err(CascadeError::Config(problems));
    }
    let nli_model = backends.nli.model_identifier();
    let llm_model = backends.generative.model_identifier();
    let hashes = [
        config.keyword_hash(),
        config.nli_hash(nli_model),
        config.llm_hash(llm_model),
    ];
    let mut reports = vec![
        StageReport::new(Stage::Keyword, hashes[0].clone(), None),
        StageReport::new(Stage::Nli, hashes[1].clone(), Some(nli_model)),
        StageReport::new(Stage::Llm, hashes[2].clone(), Some(llm_model)),
    ];
    let mut decisions = Vec::new();

    let mut matched: HashMap<String, Vec<String>> = HashMap::new();
    let mut alive: Vec<&Post> = Vec::new();
    for post in corpus {
        let d = keyword_filter_hashed(post, config, &hashes[0]);
        reports[0].record(post.partition, d.verdict);
        if d.verdict == Verdict::Retain {
            let kws = d.payload.as_ref().map(|p| p.matched_keywords.clone());
            matched.insert(post.post_id.clone(), kws.unwrap_or_default());
            alive.push(post);
        }
        decisions.push(d);
    }

    let mut next = Vec::new();
    for post in alive {
        let d = nli_stage_hashed(post, config, backends.nli.as_ref(), &hashes[1]);
        reports[1].record(post.partition, d.verdict);
        if d.verdict == Verdict::Retain {
            next.push(post);
        }
        decisions.push(d);
    }
    let alive = next;

    let mut kept: HashSet<String> = HashSet::new();
    let owned: Vec<Post> = alive.iter().map(|p| (*p).clone()).collect();
    for chunk in owned.chunks(config.batch_size) {
        let batch = llm_annotate_hashed(chunk, config, backends.generative.as_ref(), &hashes[2])
            .expect("chunks never exceed batch size");
        for (post, d) in chunk.iter().zip(batch) {
            reports[2].record(post.partition, d.verdict);
            if d.verdict == Verdict::Retain {
                kept.insert(post.post_id.clone());
            }
            decisions.push(d);
        }
    }

    let retained = owned
        .into_iter()
        .filter(|p| kept.contains(&p.post_id))
        .map(|mut p| {
            p.matched_keywords = matched.remove(&p.post_id).unwrap_or_default();
            p
        })
        .collect();

    Ok(CascadeOutcome {
        report: FunnelReport {
            corpus_size: corpus.len(),
            stages: reports,
        },
        decisions,
        retained,
    })
}

pub fn read_decisions(path: impl AsRef<Path>) -> Result<Vec<StageDecision>, JsonlError> {
    jsonl::read_jsonl(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{RuleAnnotator, RuleNli};
    use crate::corpus::{test_support::post, Platform};

    fn backends() -> CascadeBackends {
        CascadeBackends {
            nli: Arc::new(RuleNli::default()),
            generative: Arc::new(RuleAnnotator::default()),
        }
    }

    #[test]
    fn empty_corpus_all_zero() {
        let out = run_cascade(&[], &CascadeConfig::default(), &backends()).unwrap();
        assert_eq!(out.report.stages.len(), 3);
        for s in &out.report.stages {
            assert_eq!(s.total, StageCounts::default());
            assert_eq!(s.by_partition.len(), Partition::ALL.len());
        }
        assert!(out.decisions.is_empty());
    }

    #[test]
    fn funnel_feeds_forward() {
        let corpus = vec![
            post("r:1", Platform::Reddit, "lovely weather", 0),
            post("r:2", Platform::Reddit, "infrastructure is fine here", 0),
            post(
                "r:3",
                Platform::Reddit,
                "infrastructure in Maryland: that bridge has a crack and rust, it is next",
                0,
            ),
            post(
                "y:4",
                Platform::Youtube,
                "infrastructure: a bridge with a crack and rust near me is next",
                0,
            ),
        ];
        let out = run_cascade(&corpus, &CascadeConfig::default(), &backends()).unwrap();
        let counts: Vec<(usize, usize)> = out
            .report
            .stages
            .iter()
            .map(|s| (s.total.input, s.total.retain))
            .collect();
        assert_eq!(counts, vec![(4, 3), (3, 2), (2, 1)]);
        assert_eq!(out.retained.len(), 1);
        assert_eq!(out.retained[0].post_id, "r:3");
        assert_eq!(out.retained[0].matched_keywords, vec!["infrastructure"]);
        assert_eq!(out.decisions.len(), 9);
        let llm = out.report.stage(Stage::Llm).unwrap();
        assert_eq!(llm.by_partition[&Partition::YtTargeted].drop, 1);
    }

    #[test]
    fn invalid_config_rejected() {
        let c = CascadeConfig {
            nli_threshold: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            run_cascade(&[], &c, &backends()),
            Err(CascadeError::Config(_))
        ));
    }

    #[test]
    fn outputs_round_trip() {
        let corpus = vec![post(
            "r:1",
            Platform::Reddit,
            "infrastructure crack bridge rust",
            0,
        )];
        let out = run_cascade(&corpus, &CascadeConfig::default(), &backends()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        out.write_to(dir.path()).unwrap();
        assert_eq!(
            read_decisions(dir.path().join(DECISIONS_FILE)).unwrap(),
            out.decisions
        );
        let report: FunnelReport =
            serde_json::from_str(&fs::read_to_string(dir.path().join(FUNNEL_FILE)).unwrap())
                .unwrap();
        assert_eq!(report, out.report);
    }
}
