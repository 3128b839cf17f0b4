//! One function per acceptance property. Each returns a short detail line
//! on success and the first violations on failure, so the same checks back
//! both the regular tests and the acceptance report.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use chrono::{TimeZone, Utc};
use ombudsman_core::annotation::{cohen_kappa_pairs, krippendorff_alpha_nominal, read_records};
use ombudsman_core::backends::{ResponseStyle, RuleAnnotator};
use ombudsman_core::cascade::{
    keyword_filter, nli_stage, parse_llm_response, run_cascade, CascadeBackends, CascadeConfig,
    CascadeOutcome, Stage, Verdict, DEFAULT_KEYWORDS,
};
use ombudsman_core::classifier::{compute_macro_metrics, MaskingVariant, RuleConcern};
use ombudsman_core::corpus::{read_corpus, Partition, Post};
use ombudsman_core::masking::{
    extract_locations, mask_locations, mask_text, GazetteerNer, DEFAULT_MASK_TOKEN,
};
use ombudsman_core::scanner::{
    audit_labels_from_records, estimate_wild_metrics, sample_audit, scan, ModelRef, ScanModel,
    ScanOptions, ScanPrediction, ScanReport,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::*;

pub type Check = Result<String, String>;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Set to regenerate committed golden files instead of comparing.
pub fn blessing() -> bool {
    std::env::var_os("OMBUDSMAN_BLESS").is_some()
}

fn fail(mut problems: Vec<String>) -> Check {
    let n = problems.len();
    problems.truncate(5);
    Err(format!("{n} violation(s): {}", problems.join(" | ")))
}

// ---- cascade ----

/// Funnel invariants for one cascade run over `corpus`.
pub fn funnel_violations(corpus: &[Post], out: &CascadeOutcome) -> Vec<String> {
    let mut v = Vec::new();
    let report = &out.report;
    if report.corpus_size != corpus.len() || report.stages[0].total.input != corpus.len() {
        v.push("keyword stage input differs from corpus size".into());
    }
    for (k, stage) in report.stages.iter().enumerate() {
        let t = stage.total;
        let name = stage.stage.as_str();
        if t.input != t.retain + t.drop + t.error {
            v.push(format!("{name}: in {} != retain+drop+error", t.input));
        }
        let mut sum = [0; 4];
        for (part, c) in &stage.by_partition {
            if c.input != c.retain + c.drop + c.error {
                v.push(format!("{name}/{}: counts not conserved", part.as_str()));
            }
            for (s, x) in sum.iter_mut().zip([c.input, c.retain, c.drop, c.error]) {
                *s += x;
            }
        }
        if sum != [t.input, t.retain, t.drop, t.error] {
            v.push(format!("{name}: partitions do not sum to total"));
        }
        let logged = out
            .decisions
            .iter()
            .filter(|d| d.stage == stage.stage)
            .count();
        if logged != t.input {
            v.push(format!("{name}: {logged} decisions for {} inputs", t.input));
        }
        if k > 0 {
            let prev = &report.stages[k - 1];
            if t.input != prev.total.retain {
                v.push(format!(
                    "{name}: input {} != previous retain {}",
                    t.input, prev.total.retain
                ));
            }
            for (part, c) in &stage.by_partition {
                if c.input != prev.by_partition[part].retain {
                    v.push(format!(
                        "{name}/{}: input != previous retain",
                        part.as_str()
                    ));
                }
            }
        }
    }
    let kept = |s: Stage| -> HashSet<&str> {
        out.decisions
            .iter()
            .filter(|d| d.stage == s && d.verdict == Verdict::Retain)
            .map(|d| d.post_id.as_str())
            .collect()
    };
    let (kw, nli, llm) = (kept(Stage::Keyword), kept(Stage::Nli), kept(Stage::Llm));
    if !nli.is_subset(&kw) || !llm.is_subset(&nli) {
        v.push("a later stage retained a post an earlier stage did not".into());
    }
    let retained: HashSet<&str> = out.retained.iter().map(|p| p.post_id.as_str()).collect();
    if retained != llm {
        v.push("retained set differs from llm retains".into());
    }
    for d in out.decisions.iter().filter(|d| d.stage == Stage::Nli) {
        let ok = match d.score {
            Some(s) => (d.verdict == Verdict::Retain) == (s > 0.5),
            None => d.verdict == Verdict::Error,
        };
        if !ok {
            v.push(format!(
                "{}: nli verdict {:?} for score {:?}",
                d.post_id, d.verdict, d.score
            ));
        }
    }
    v
}

fn recase_random(s: &str, rng: &mut ChaCha8Rng) -> String {
    s.chars()
        .map(|c| {
            if rng.random_bool(0.5) {
                c.to_ascii_uppercase()
            } else {
                c.to_ascii_lowercase()
            }
        })
        .collect()
}

pub fn random_cascade_text(rng: &mut ChaCha8Rng) -> String {
    let mut parts = Vec::new();
    if rng.random_bool(0.8) {
        let kw = DEFAULT_KEYWORDS[rng.random_range(0..DEFAULT_KEYWORDS.len())];
        parts.push(recase_random(kw, rng));
    }
    let tag = if rng.random_bool(0.1) {
        "err".to_string()
    } else {
        PROBE_SCORES[rng.random_range(0..PROBE_SCORES.len())].to_string()
    };
    parts.push(format!("nli={tag} "));
    if rng.random_bool(0.5) {
        parts.push("the bridge in Ohio".into());
    }
    if rng.random_bool(0.5) {
        parts.push("is gonna go".into());
    }
    if rng.random_bool(0.05) {
        parts.push("[refuse]".into());
    }
    parts.join(" ")
}

/// Keyword verdict against a lowercase substring oracle, and its
/// invariance under recasing the text or the keyword set.
pub fn keyword_violations(text: &str, rng: &mut ChaCha8Rng) -> Vec<String> {
    let config = CascadeConfig::default();
    let base = post("x", Partition::RedditMain, text);
    let verdict = keyword_filter(&base, &config).verdict;
    let folded = text.to_lowercase();
    let oracle = DEFAULT_KEYWORDS
        .iter()
        .any(|k| folded.contains(&k.to_lowercase()));
    let mut v = Vec::new();
    if (verdict == Verdict::Retain) != oracle {
        v.push(format!("keyword verdict {verdict:?} for {text:?}"));
    }
    for variant in [
        text.to_uppercase(),
        text.to_lowercase(),
        recase_random(text, rng),
    ] {
        let other = post("x", Partition::RedditMain, &variant);
        if keyword_filter(&other, &config).verdict != verdict {
            v.push(format!("recased text {variant:?} changed the verdict"));
        }
    }
    let recased = CascadeConfig {
        keyword_set: DEFAULT_KEYWORDS
            .iter()
            .map(|k| recase_random(k, rng))
            .collect(),
        ..CascadeConfig::default()
    };
    if keyword_filter(&base, &recased).verdict != verdict {
        v.push(format!(
            "recased keyword set changed the verdict for {text:?}"
        ));
    }
    v
}

/// Random corpora totalling at least `min_posts`, checked for funnel
/// invariants, plus per-post threshold and keyword checks.
pub fn check_cascade(seed: u64, min_posts: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut problems = Vec::new();
    let (mut posts, mut at_half, mut runs) = (0, 0, 0);
    while posts < min_posts {
        let size = rng.random_range(25..=50);
        let corpus: Vec<Post> = (0..size)
            .map(|i| {
                let part = [
                    Partition::RedditMain,
                    Partition::YtPolitics,
                    Partition::YtTargeted,
                ][rng.random_range(0..3)];
                post(&format!("{runs}-{i}"), part, &random_cascade_text(&mut rng))
            })
            .collect();
        let style = if rng.random_bool(0.5) {
            ResponseStyle::Chatty
        } else {
            ResponseStyle::Plain
        };
        let backends = CascadeBackends {
            nli: Arc::new(TaggedNli),
            generative: Arc::new(RuleAnnotator::new(style)),
        };
        match run_cascade(&corpus, &CascadeConfig::default(), &backends) {
            Ok(out) => {
                problems.extend(funnel_violations(&corpus, &out));
                at_half += out
                    .decisions
                    .iter()
                    .filter(|d| d.stage == Stage::Nli && d.score == Some(0.5))
                    .count();
            }
            Err(e) => problems.push(format!("cascade failed: {e}")),
        }
        for p in &corpus {
            problems.extend(keyword_violations(&p.text, &mut rng));
        }
        posts += size;
        runs += 1;
    }
    let config = CascadeConfig::default();
    for score in PROBE_SCORES {
        let d = nli_stage(
            &post("t", Partition::RedditMain, &format!("nli={score}")),
            &config,
            &TaggedNli,
        );
        if (d.verdict == Verdict::Retain) != (score > 0.5) {
            problems.push(format!("score {score} gave {:?}", d.verdict));
        }
    }
    if at_half == 0 {
        problems.push("no post scored exactly 0.5".into());
    }
    if problems.is_empty() {
        Ok(format!(
            "{posts} posts in {runs} corpora, {at_half} nli scores exactly 0.5, zero violations"
        ))
    } else {
        fail(problems)
    }
}

// ---- agreement ----

fn close(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => (x - y).abs() < tol,
        (None, None) => true,
        _ => false,
    }
}

pub fn check_agreement(seed: u64, tables: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut problems = Vec::new();
    let (mut worst_a, mut worst_k, mut defined) = (0.0f64, 0.0f64, 0);
    for t in 0..tables {
        let table = RatingTable::random(&mut rng);
        let units = table.units();
        let alpha = krippendorff_alpha_nominal(&units).value();
        let oracle = alpha_oracle(&units);
        if !close(alpha, oracle, ALPHA_TOL) {
            problems.push(format!("table {t}: alpha {alpha:?} vs oracle {oracle:?}"));
        }
        if let (Some(a), Some(o)) = (alpha, oracle) {
            worst_a = worst_a.max((a - o).abs());
            defined += 1;
        }
        let pairs = table.pairs();
        let kappa = cohen_kappa_pairs(&pairs).value();
        let k_oracle = kappa_oracle(&pairs);
        if !close(kappa, k_oracle, KAPPA_TOL) {
            problems.push(format!("table {t}: kappa {kappa:?} vs oracle {k_oracle:?}"));
        }
        if let (Some(a), Some(o)) = (kappa, k_oracle) {
            worst_k = worst_k.max((a - o).abs());
        }

        // Category relabeling: a random permutation of 0..4.
        let mut map: Vec<u32> = (0..4).collect();
        map.shuffle(&mut rng);
        let relabeled = table.relabel(&map);
        if !close(
            krippendorff_alpha_nominal(&relabeled.units()).value(),
            alpha,
            ALPHA_TOL,
        ) {
            problems.push(format!("table {t}: alpha changed under relabeling"));
        }
        if !close(
            cohen_kappa_pairs(&relabeled.pairs()).value(),
            kappa,
            KAPPA_TOL,
        ) {
            problems.push(format!("table {t}: kappa changed under relabeling"));
        }
        // Rater permutation: alpha over any order, kappa with raters swapped.
        let mut order: Vec<usize> = (0..table.rows.len()).collect();
        order.shuffle(&mut rng);
        if !close(
            krippendorff_alpha_nominal(&table.permute_raters(&order).units()).value(),
            alpha,
            ALPHA_TOL,
        ) {
            problems.push(format!("table {t}: alpha changed under rater permutation"));
        }
        let swapped: Vec<(u32, u32)> = pairs.iter().map(|(a, b)| (*b, *a)).collect();
        if !close(cohen_kappa_pairs(&swapped).value(), kappa, KAPPA_TOL) {
            problems.push(format!("table {t}: kappa changed when raters swapped"));
        }

        // Perfect agreement: every rater copies the first rater's labels.
        let first: Vec<Option<u32>> = (0..table.rows[0].len())
            .map(|u| Some((u % 3) as u32))
            .collect();
        let perfect = RatingTable {
            rows: vec![first; table.rows.len()],
        };
        for (name, v) in [
            (
                "alpha",
                krippendorff_alpha_nominal(&perfect.units()).value(),
            ),
            ("kappa", cohen_kappa_pairs(&perfect.pairs()).value()),
        ] {
            if v != Some(1.0) {
                problems.push(format!("table {t}: perfect agreement gave {name} {v:?}"));
            }
        }
    }
    if problems.is_empty() {
        Ok(format!(
            "{tables} tables ({defined} with defined alpha), max |d alpha| {worst_a:.1e}, max |d kappa| {worst_k:.1e}, tol {ALPHA_TOL:.0e}"
        ))
    } else {
        fail(problems)
    }
}

// ---- metrics ----

pub fn check_metrics(seed: u64, cases: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut problems = Vec::new();
    let mut worst = 0.0f64;
    for c in 0..cases {
        let (preds, golds) = random_labels(&mut rng);
        let got = match compute_macro_metrics(&preds, &golds) {
            Ok(o) => o.metrics.as_array(),
            Err(e) => {
                problems.push(format!("case {c}: {e}"));
                continue;
            }
        };
        let want = macro_oracle(&preds, &golds);
        for (g, w) in got.iter().zip(want) {
            worst = worst.max((g - w).abs());
            if (g - w).abs() >= METRIC_TOL {
                problems.push(format!("case {c}: {got:?} vs oracle {want:?}"));
                break;
            }
        }
        let flip = |xs: &[u8]| xs.iter().map(|x| 1 - x).collect::<Vec<u8>>();
        let swapped = compute_macro_metrics(&flip(&preds), &flip(&golds))
            .unwrap()
            .metrics
            .as_array();
        if got
            .iter()
            .zip(swapped)
            .any(|(a, b)| (a - b).abs() >= METRIC_TOL)
        {
            problems.push(format!(
                "case {c}: label swap changed {got:?} to {swapped:?}"
            ));
        }
    }
    if problems.is_empty() {
        Ok(format!(
            "{cases} pairs, max |d| {worst:.1e}, tol {METRIC_TOL:.0e}, swap invariant"
        ))
    } else {
        fail(problems)
    }
}

// ---- masking ----

pub fn check_masking(seed: u64, texts: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ner = GazetteerNer::default();
    let tok = DEFAULT_MASK_TOKEN;
    let tok_len = tok.chars().count();
    let mut problems = Vec::new();
    let mut masked_regions = 0;
    for i in 0..texts {
        let text = random_text(&mut rng);
        let spans = extract_locations(&text, &ner).unwrap();
        let once = mask_locations(&text, &spans, tok).unwrap();
        let again_spans = extract_locations(&once.text, &ner).unwrap();
        let twice = mask_locations(&once.text, &again_spans, tok).unwrap();
        if twice.text != once.text {
            problems.push(format!(
                "text {i}: not idempotent: {text:?} -> {:?} -> {:?}",
                once.text, twice.text
            ));
        }
        let ranges: Vec<(usize, usize)> = spans.iter().map(|s| (s.start, s.end)).collect();
        let regions = merged_regions(&text, &ranges);
        let removed: usize = regions.iter().map(|(s, e)| e - s).sum();
        let expected = text.chars().count() - removed + regions.len() * tok_len;
        if once.text.chars().count() != expected || once.span_count != regions.len() {
            problems.push(format!(
                "text {i}: length {} (expected {expected}), span_count {} (expected {})",
                once.text.chars().count(),
                once.span_count,
                regions.len()
            ));
        }
        for w in spans.windows(2) {
            if w[0].end > w[1].start {
                problems.push(format!("text {i}: overlapping spans"));
            }
        }
        masked_regions += regions.len();
    }
    if problems.is_empty() {
        Ok(format!(
            "{texts} texts, {masked_regions} masked regions, idempotent, lengths exact"
        ))
    } else {
        fail(problems)
    }
}

pub fn check_lowell() -> Check {
    let dir = fixtures().join("masking");
    let input = fs::read_to_string(dir.join("lowell.txt")).map_err(|e| e.to_string())?;
    let (masked, spans) = mask_text(&input, &GazetteerNer::default(), DEFAULT_MASK_TOKEN)
        .map_err(|e| e.to_string())?;
    let golden = dir.join("lowell.masked.txt");
    if blessing() {
        fs::write(&golden, &masked.text).map_err(|e| e.to_string())?;
    }
    let want = fs::read(&golden).map_err(|e| e.to_string())?;
    if want == masked.text.as_bytes() {
        let surfaces: Vec<&str> = spans.iter().map(|s| s.surface.as_str()).collect();
        Ok(format!(
            "byte-exact, {} regions from {surfaces:?}",
            masked.span_count
        ))
    } else {
        Err(format!("masked output differs: {:?}", masked.text))
    }
}

// ---- llm responses ----

pub fn check_parser() -> Check {
    let mut problems = Vec::new();
    let good = adversarial_responses();
    let bad = malformed_responses();
    let ids = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<String>>();
    for (i, (raw, expected, concern)) in good.iter().enumerate() {
        match parse_llm_response(raw, &ids(expected)) {
            Ok(p) => {
                for (id, want) in concern {
                    if p.items.get(*id).and_then(|v| v["concern"].as_bool()) != Some(*want) {
                        problems.push(format!("wrapper {i}: wrong payload for id {id}"));
                    }
                }
            }
            Err(e) => problems.push(format!("wrapper {i}: {e}")),
        }
    }
    for (i, (raw, expected)) in bad.iter().enumerate() {
        let outcome = std::panic::catch_unwind(|| parse_llm_response(raw, &ids(expected)));
        match outcome {
            Ok(Err(_)) => {}
            Ok(Ok(_)) => problems.push(format!("malformed {i} parsed")),
            Err(_) => problems.push(format!("malformed {i} panicked")),
        }
    }
    if problems.is_empty() {
        Ok(format!(
            "{}/{} wrappers recovered, {}/{} malformed rejected",
            good.len(),
            good.len(),
            bad.len(),
            bad.len()
        ))
    } else {
        fail(problems)
    }
}

// ---- scan and audit ----

pub fn rule_model() -> ScanModel {
    ScanModel {
        reference: ModelRef {
            model_identifier: "rule-concern".into(),
            artifact_id: None,
            masking: MaskingVariant::Mask,
            run: 0,
        },
        classifier: Box::new(RuleConcern::default()),
    }
}

pub fn wild_scan() -> Result<ScanReport, String> {
    let corpus = read_corpus(fixtures().join("wild/wild.jsonl")).map_err(|e| e.to_string())?;
    let ner = GazetteerNer::default();
    let options = ScanOptions {
        masking: MaskingVariant::Mask,
        mask_token: DEFAULT_MASK_TOKEN,
        ner: &ner,
        created_at: Utc.timestamp_opt(1_718_064_000, 0).unwrap(),
    };
    scan(&corpus, &rule_model(), &options).map_err(|e| e.to_string())
}

pub const AUDIT_SEED: u64 = 20240611;

pub fn scan_golden_view(report: &ScanReport) -> Value {
    json!({
        "n_scanned": report.n_scanned,
        "n_positive": report.n_positive,
        "n_negative": report.n_negative,
        "n_errors": report.scan_errors.len(),
        "top_flagged": report.flagged.iter().take(5).map(|f| &f.post_id).collect::<Vec<_>>(),
        "audit_pos_sample": report.audit_pos_sample,
        "audit_neg_sample": report.audit_neg_sample,
        "estimate_confusion": report.estimated_metrics.as_ref().map(|e| e.confusion),
    })
}

/// Rule model over the wild fixture, a 20/20 audit and the fixture audit
/// labels, compared with the committed golden counts.
pub fn check_scan_golden() -> Check {
    let mut report = wild_scan()?;
    sample_audit(&mut report, 20, 20, AUDIT_SEED).map_err(|e| e.to_string())?;
    let records = read_records(fixtures().join("labels/audit.jsonl")).map_err(|e| e.to_string())?;
    estimate_wild_metrics(&mut report, &audit_labels_from_records(&records))
        .map_err(|e| e.to_string())?;
    let got = scan_golden_view(&report);
    let path = fixtures().join("golden/wild_scan.json");
    if blessing() {
        fs::write(&path, serde_json::to_string_pretty(&got).unwrap() + "\n")
            .map_err(|e| e.to_string())?;
    }
    let want: Value = serde_json::from_str(&fs::read_to_string(&path).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    if got == want {
        Ok(format!(
            "scanned {} -> {} positive / {} negative, audit confusion {}",
            report.n_scanned, report.n_positive, report.n_negative, got["estimate_confusion"]
        ))
    } else {
        Err(format!("golden mismatch: got {got}"))
    }
}

pub fn check_audit_reproducible() -> Check {
    let base = wild_scan()?;
    let draw = |seed: u64| {
        let mut r = base.clone();
        sample_audit(&mut r, 20, 20, seed).map(|_| (r.audit_pos_sample, r.audit_neg_sample))
    };
    let a = draw(AUDIT_SEED).map_err(|e| e.to_string())?;
    let b = draw(AUDIT_SEED).map_err(|e| e.to_string())?;
    let c = draw(AUDIT_SEED + 1).map_err(|e| e.to_string())?;
    let mut problems = Vec::new();
    if a != b {
        problems.push("same seed drew different samples".to_string());
    }
    if a == c {
        problems.push("different seeds drew identical samples".to_string());
    }
    let label = |id: &String| base.prediction(id).map(|p| p.label);
    if !a.0.iter().all(|id| label(id) == Some(1)) || !a.1.iter().all(|id| label(id) == Some(0)) {
        problems.push("sample drew from the wrong class".into());
    }
    let distinct: HashSet<&String> = a.0.iter().chain(&a.1).collect();
    if distinct.len() != 40 {
        problems.push("sample repeats posts".into());
    }
    if problems.is_empty() {
        Ok("same seed gives identical 20/20 samples; another seed differs".into())
    } else {
        fail(problems)
    }
}

/// Builds an audit with chosen confusion counts and compares the estimate
/// with metrics computed from those counts by hand.
pub fn check_estimate_oracle() -> Check {
    let mut problems = Vec::new();
    for (tp, fp, fn_, tn) in [
        (12, 8, 1, 19),
        (5, 0, 0, 5),
        (3, 7, 6, 4),
        (0, 4, 2, 3),
        (9, 1, 9, 1),
    ] {
        let mut preds = Vec::new();
        let mut labels = BTreeMap::new();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (k, (pred, gold, n)) in [(1u8, 1u8, tp), (1, 0, fp), (0, 1, fn_), (0, 0, tn)]
            .into_iter()
            .enumerate()
        {
            for i in 0..n {
                let id = format!("p{k}-{i:02}");
                preds.push(ScanPrediction {
                    post_id: id.clone(),
                    label: pred,
                    score: 0.5,
                });
                labels.insert(id.clone(), gold);
                if pred == 1 {
                    pos.push(id)
                } else {
                    neg.push(id)
                }
            }
        }
        preds.sort_by(|a, b| a.post_id.cmp(&b.post_id));
        let mut report = ScanReport {
            scan_id: "synthetic".into(),
            corpus_hash: String::new(),
            model: rule_model().reference,
            created_at: Utc.timestamp_opt(0, 0).unwrap(),
            n_scanned: preds.len(),
            n_positive: tp + fp,
            n_negative: fn_ + tn,
            scan_errors: Vec::new(),
            flagged: Vec::new(),
            predictions: preds,
            audit_pos_sample: pos,
            audit_neg_sample: neg,
            audit_seed: None,
            estimated_metrics: None,
        };
        if let Err(e) = estimate_wild_metrics(&mut report, &labels) {
            problems.push(format!("{:?}: {e}", (tp, fp, fn_, tn)));
            continue;
        }
        let est = report.estimated_metrics.unwrap();
        let c = est.confusion;
        if (c.tp, c.fp, c.fn_, c.tn) != (tp, fp, fn_, tn) {
            problems.push(format!("confusion {c:?} for {:?}", (tp, fp, fn_, tn)));
        }
        let want = confusion_oracle(tp, fp, fn_, tn);
        if est.metrics.as_array() != want {
            problems.push(format!(
                "{:?}: {:?} vs oracle {want:?}",
                (tp, fp, fn_, tn),
                est.metrics
            ));
        }
    }
    if problems.is_empty() {
        Ok("5 synthetic audits, confusion and metrics identical to the hand computation".into())
    } else {
        fail(problems)
    }
}

/// Textbook macro metrics from confusion counts.
pub fn confusion_oracle(tp: usize, fp: usize, fn_: usize, tn: usize) -> [f64; 4] {
    let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let f1 = |p: f64, r: f64| {
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    };
    let (p1, r1) = (div(tp, tp + fp), div(tp, tp + fn_));
    let (p0, r0) = (div(tn, tn + fn_), div(tn, tn + fp));
    [
        (p0 + p1) / 2.0,
        (r0 + r1) / 2.0,
        (f1(p0, r0) + f1(p1, r1)) / 2.0,
        div(tp + tn, tp + fp + fn_ + tn),
    ]
}
