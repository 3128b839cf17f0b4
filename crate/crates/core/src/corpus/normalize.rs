//! Raw platform records to [`Post`]s.

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::post::{Partition, Platform, Post};
use crate::hashing::sha256_hex;

/// Creation time as delivered by a platform: RFC 3339 text or Unix seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawTimestamp {
    Unix(i64),
    Text(String),
}

/// A record as fetched from a platform API or read from an archive dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub body: Option<String>,
    #[serde(default)]
    pub author: Option<String>,
    #[serde(default)]
    pub created: Option<RawTimestamp>,
    #[serde(default)]
    pub container_id: Option<String>,
    #[serde(default)]
    pub container_title: Option<String>,
    #[serde(default)]
    pub container_description: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    MissingId,
    MissingBody,
    EmptyBody,
    BadTimestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("record {record_id:?} rejected: {reason:?}")]
pub struct Rejected {
    pub record_id: Option<String>,
    pub reason: RejectReason,
}

/// Settings shared by every record normalized for one source.
#[derive(Debug, Clone)]
pub struct NormalizeContext<'a> {
    pub platform: Platform,
    pub partition: Partition,
    pub author_salt: &'a str,
}

/// Canonical text form: NFC, `\n` line endings, control characters other
/// than newline and tab removed, outer whitespace trimmed.
pub fn normalize_text(raw: &str) -> String {
    let unified = raw.replace("\r\n", "\n").replace('\r', "\n");
    let cleaned: String = unified
        .nfc()
        .filter(|c| !c.is_control() || *c == '\n' || *c == '\t')
        .collect();
    cleaned.trim().to_string()
}

pub fn hash_author(salt: &str, author: &str) -> String {
    sha256_hex(format!("{salt}\u{1f}{author}"))
}

fn parse_timestamp(raw: &RawTimestamp) -> Option<DateTime<Utc>> {
    match raw {
        RawTimestamp::Unix(secs) => Utc.timestamp_opt(*secs, 0).single(),
        RawTimestamp::Text(s) => DateTime::parse_from_rfc3339(s.trim())
            .ok()
            .map(|dt| dt.with_timezone(&Utc)),
    }
}

/// Builds a [`Post`] from a raw record.
///
/// Post ids are namespaced by platform so ids from different platforms can
/// share a corpus. Records without a timestamp get the Unix epoch.
pub fn normalize(raw: &RawRecord, ctx: &NormalizeContext<'_>) -> Result<Post, Rejected> {
    let id = raw
        .id
        .as_deref()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .ok_or(Rejected {
            record_id: None,
            reason: RejectReason::MissingId,
        })?;
    let reject = |reason| Rejected {
        record_id: Some(id.to_string()),
        reason,
    };
    let body = raw
        .body
        .as_deref()
        .ok_or_else(|| reject(RejectReason::MissingBody))?;
    let text = normalize_text(body);
    if text.is_empty() {
        return Err(reject(RejectReason::EmptyBody));
    }
    let created_at = match &raw.created {
        Some(ts) => parse_timestamp(ts).ok_or_else(|| reject(RejectReason::BadTimestamp))?,
        None => DateTime::<Utc>::UNIX_EPOCH,
    };
    let optional = |s: &Option<String>| s.as_deref().map(normalize_text).filter(|t| !t.is_empty());
    Ok(Post {
        post_id: format!("{}:{}", ctx.platform, id),
        platform: ctx.platform,
        container_id: raw.container_id.clone().unwrap_or_default(),
        container_title: optional(&raw.container_title),
        container_description: optional(&raw.container_description),
        author_hash: hash_author(ctx.author_salt, raw.author.as_deref().unwrap_or("")),
        created_at,
        text,
        partition: ctx.partition,
        matched_keywords: Vec::new(),
    })
}
