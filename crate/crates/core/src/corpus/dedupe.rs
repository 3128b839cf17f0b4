use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::post::{Platform, Post};
use crate::hashing::sha256_hex;

/// A post removed as a duplicate, with the post that was kept instead.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedDuplicate {
    pub post_id: String,
    pub kept: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupeReport {
    pub dropped: Vec<DroppedDuplicate>,
}

/// SHA-256 of the casefolded, whitespace-collapsed text.
pub fn text_fingerprint(text: &str) -> String {
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ");
    sha256_hex(collapsed.to_lowercase())
}

/// Keeps one post per `(platform, text fingerprint)`.
///
/// The earliest `created_at` survives; ties go to the smaller `post_id`.
/// Survivors keep their original relative order.
pub fn dedupe(corpus: Vec<Post>) -> (Vec<Post>, DedupeReport) {
    let mut winner: HashMap<(Platform, String), usize> = HashMap::new();
    for (idx, post) in corpus.iter().enumerate() {
        let key = (post.platform, text_fingerprint(&post.text));
        match winner.get(&key) {
            Some(&current) => {
                let cur = &corpus[current];
                if (post.created_at, &post.post_id) < (cur.created_at, &cur.post_id) {
                    winner.insert(key, idx);
                }
            }
            None => {
                winner.insert(key, idx);
            }
        }
    }

    let mut keep = vec![false; corpus.len()];
    for &idx in winner.values() {
        keep[idx] = true;
    }
    let mut report = DedupeReport::default();
    for (idx, post) in corpus.iter().enumerate() {
        if !keep[idx] {
            let key = (post.platform, text_fingerprint(&post.text));
            report.dropped.push(DroppedDuplicate {
                post_id: post.post_id.clone(),
                kept: corpus[winner[&key]].post_id.clone(),
            });
        }
    }
    let survivors = corpus
        .into_iter()
        .zip(keep)
        .filter_map(|(post, k)| k.then_some(post))
        .collect();
    (survivors, report)
}
