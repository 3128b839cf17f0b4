//! Fetching, normalizing, deduplicating and partitioning social-web posts.

mod dedupe;
mod ingest;
mod normalize;
mod post;
mod reserve;
pub mod sources;

use std::path::Path;

pub use dedupe::{dedupe, text_fingerprint, DedupeReport, DroppedDuplicate};
pub use ingest::{
    cursor_path, ingest, ingest_from, CursorState, IngestError, IngestOptions, IngestSummary,
    Sleeper, ThreadSleeper,
};
pub use normalize::{
    hash_author, normalize, normalize_text, NormalizeContext, RawRecord, RawTimestamp,
    RejectReason, Rejected,
};
pub use post::{Partition, Platform, Post};
pub use reserve::{reserve_wild, ReserveError};
pub use sources::{SourceMode, SourceSpec};

use crate::jsonl::{self, JsonlError};

pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<Post>, JsonlError> {
    jsonl::read_jsonl(path)
}

pub fn write_corpus(path: impl AsRef<Path>, posts: &[Post]) -> Result<(), JsonlError> {
    jsonl::write_jsonl(path, posts)
}
