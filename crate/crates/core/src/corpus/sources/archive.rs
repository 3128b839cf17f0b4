use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::PathBuf;

use super::{FetchError, Page, SourceFetcher};

/// Pages through a local JSONL dump. The cursor is the number of lines
/// already consumed. Unparseable lines are passed through as JSON strings
/// so the ingest loop skips and logs them like any malformed item.
pub struct ArchiveFetcher {
    path: PathBuf,
    page_size: usize,
}

impl ArchiveFetcher {
    pub fn new(path: PathBuf, page_size: usize) -> Self {
        Self {
            path,
            page_size: page_size.max(1),
        }
    }
}

impl SourceFetcher for ArchiveFetcher {
    fn fetch_page(&mut self, cursor: Option<&str>) -> Result<Page, FetchError> {
        let offset: usize = match cursor {
            Some(c) => c
                .parse()
                .map_err(|_| FetchError::Fatal(format!("bad archive cursor {c:?}")))?,
            None => 0,
        };
        let file = File::open(&self.path)
            .map_err(|e| FetchError::Fatal(format!("{}: {e}", self.path.display())))?;
        let mut lines = BufReader::new(file).lines().skip(offset);
        let mut items = Vec::with_capacity(self.page_size);
        let mut consumed = 0;
        for line in lines.by_ref().take(self.page_size) {
            let line = line.map_err(|e| FetchError::Fatal(e.to_string()))?;
            consumed += 1;
            if line.trim().is_empty() {
                continue;
            }
            items.push(serde_json::from_str(&line).unwrap_or(serde_json::Value::String(line)));
        }
        let more = lines.next().is_some();
        Ok(Page {
            items,
            next_cursor: more.then(|| (offset + consumed).to_string()),
        })
    }
}
