use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Platform {
    Reddit,
    Youtube,
}

impl Platform {
    pub fn as_str(self) -> &'static str {
        match self {
            Platform::Reddit => "reddit",
            Platform::Youtube => "youtube",
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Corpus partition a post belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    RedditMain,
    YtPolitics,
    YtTargeted,
    InTheWild,
    Unassigned,
}

impl Partition {
    pub const ALL: [Partition; 5] = [
        Partition::RedditMain,
        Partition::YtPolitics,
        Partition::YtTargeted,
        Partition::InTheWild,
        Partition::Unassigned,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Partition::RedditMain => "reddit_main",
            Partition::YtPolitics => "yt_politics",
            Partition::YtTargeted => "yt_targeted",
            Partition::InTheWild => "in_the_wild",
            Partition::Unassigned => "unassigned",
        }
    }

    /// Partitions that feed the held-out in-the-wild reserve.
    pub fn is_wild_eligible(self) -> bool {
        matches!(self, Partition::RedditMain | Partition::YtTargeted)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One normalized social-web comment or submission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub post_id: String,
    pub platform: Platform,
    /// Subreddit name or video id.
    pub container_id: String,
    #[serde(default)]
    pub container_title: Option<String>,
    #[serde(default)]
    pub container_description: Option<String>,
    pub author_hash: String,
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub partition: Partition,
    #[serde(default)]
    pub matched_keywords: Vec<String>,
}
