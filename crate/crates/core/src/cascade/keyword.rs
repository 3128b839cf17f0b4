use super::config::CascadeConfig;
use super::decision::{DecisionPayload, Stage, StageDecision, Verdict};
use crate::corpus::{Partition, Platform, Post};

/// Keywords occurring case-insensitively as substrings of any of `fields`,
/// in keyword-set order.
pub fn matching_keywords<'a>(keywords: &'a [String], fields: &[&str]) -> Vec<&'a str> {
    let folded: Vec<String> = fields.iter().map(|f| f.to_lowercase()).collect();
    keywords
        .iter()
        .filter(|k| !k.trim().is_empty())
        .filter(|k| {
            let k = k.to_lowercase();
            folded.iter().any(|f| f.contains(&k))
        })
        .map(String::as_str)
        .collect()
}

/// Searchable fields of a post. Politics-channel comments also match on
/// their video's title and description, since those comments rarely repeat
/// the topic themselves.
fn fields(post: &Post) -> Vec<&str> {
    let mut out = vec![post.text.as_str()];
    if post.platform == Platform::Youtube && post.partition == Partition::YtPolitics {
        out.extend(post.container_title.as_deref());
        out.extend(post.container_description.as_deref());
    }
    out
}

pub fn keyword_filter(post: &Post, config: &CascadeConfig) -> StageDecision {
    keyword_filter_hashed(post, config, &config.keyword_hash())
}

pub(crate) fn keyword_filter_hashed(
    post: &Post,
    config: &CascadeConfig,
    hash: &str,
) -> StageDecision {
    let matched: Vec<String> = matching_keywords(&config.keyword_set, &fields(post))
        .into_iter()
        .map(str::to_string)
        .collect();
    let verdict = if matched.is_empty() {
        Verdict::Drop
    } else {
        Verdict::Retain
    };
    StageDecision {
        post_id: post.post_id.clone(),
        stage: Stage::Keyword,
        verdict,
        score: None,
        payload: (!matched.is_empty()).then(|| DecisionPayload {
            matched_keywords: matched,
            ..Default::default()
        }),
        stage_config_hash: hash.to_string(),
        error: None,
    }
}
