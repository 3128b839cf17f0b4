use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::report::{FlaggedPost, ScanReport, ScanSummary};

#[derive(Debug, thiserror::Error)]
pub enum ScanStoreError {
    #[error("no scan with id {0}")]
    NotFound(String),
    #[error("scan id {0:?} is not a valid id")]
    BadId(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> ScanStoreError {
    ScanStoreError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Scan reports stored as `<scan_id>.json` files in one directory.
#[derive(Debug, Clone)]
pub struct ScanStore {
    dir: PathBuf,
}

impl ScanStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> Result<PathBuf, ScanStoreError> {
        if id.is_empty()
            || !id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(ScanStoreError::BadId(id.to_string()));
        }
        Ok(self.dir.join(format!("{id}.json")))
    }

    pub fn save(&self, report: &ScanReport) -> Result<PathBuf, ScanStoreError> {
        fs::create_dir_all(&self.dir).map_err(|e| io_err(&self.dir, e))?;
        let path = self.path(&report.scan_id)?;
        let body = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, body).map_err(|e| io_err(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| io_err(&path, e))?;
        Ok(path)
    }

    pub fn get(&self, id: &str) -> Result<ScanReport, ScanStoreError> {
        let path = self.path(id)?;
        if !path.exists() {
            return Err(ScanStoreError::NotFound(id.to_string()));
        }
        let body = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        serde_json::from_str(&body).map_err(|e| io_err(&path, e))
    }

    /// Summaries of every stored scan, newest first (ties by id).
    pub fn list(&self) -> Result<Vec<ScanSummary>, ScanStoreError> {
        if !self.dir.exists() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(|e| io_err(&self.dir, e))? {
            let path = entry.map_err(|e| io_err(&self.dir, e))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default();
            out.push(self.get(id)?.summary());
        }
        out.sort_by(|a, b| {
            b.created_at
                .cmp(&a.created_at)
                .then(a.scan_id.cmp(&b.scan_id))
        });
        Ok(out)
    }
}

/// Writes the flagged queue as CSV: post_id, score, locations, text.
/// Locations are the surfaces joined with "; ".
pub fn write_queue_csv<W: Write>(flagged: &[FlaggedPost], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["post_id", "score", "locations", "text"])?;
    for f in flagged {
        let locations: Vec<&str> = f.locations.iter().map(|s| s.surface.as_str()).collect();
        w.write_record([
            f.post_id.as_str(),
            &f.score.to_string(),
            &locations.join("; "),
            f.text.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
