use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::gazetteer::US_STATES;

/// Casefolded location names excluded from frequency tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stoplist {
    entries: BTreeSet<String>,
}

impl Default for Stoplist {
    /// The 50 US states, "United States" and "USA".
    fn default() -> Self {
        Self::new(US_STATES.iter().copied().chain(["United States", "USA"]))
    }
}

impl Stoplist {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            entries: entries
                .into_iter()
                .map(|e| e.as_ref().trim().to_lowercase())
                .filter(|e| !e.is_empty())
                .collect(),
        }
    }

    pub fn empty() -> Self {
        Self::new(std::iter::empty::<&str>())
    }

    /// One entry per line; blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Self {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn contains(&self, casefolded: &str) -> bool {
        self.entries.contains(casefolded)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// Every mention counts.
    #[default]
    Occurrences,
    /// A location counts at most once per post.
    Posts,
}

/// Ranked `(location, count)` table over the location surfaces of positive
/// examples: casefolded, stoplisted, sorted by count descending then name.
pub fn location_frequency<P, S>(
    positives: &[P],
    stoplist: &Stoplist,
    mode: CountMode,
) -> Vec<(String, usize)>
where
    P: AsRef<[S]>,
    S: AsRef<str>,
{
    let mut counts: HashMap<String, usize> = HashMap::new();
    for surfaces in positives {
        let mut seen = BTreeSet::new();
        for s in surfaces.as_ref() {
            let key = s
                .as_ref()
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ")
                .to_lowercase();
            if key.is_empty() || stoplist.contains(&key) {
                continue;
            }
            if mode == CountMode::Posts && !seen.insert(key.clone()) {
                continue;
            }
            *counts.entry(key).or_default() += 1;
        }
    }
    let mut table: Vec<_> = counts.into_iter().collect();
    table.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    table
}

pub fn write_frequency_csv(path: &Path, table: &[(String, usize)]) -> Result<(), csv::Error> {
    write_frequency_csv_to(std::fs::File::create(path)?, table)
}

pub fn write_frequency_csv_to<W: Write>(
    out: W,
    table: &[(String, usize)],
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["location", "count"])?;
    for (loc, n) in table {
        w.write_record([loc.as_str(), &n.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_stoplist_removes_states() {
        let posts = vec![vec!["Ohio", "Cincinnati", "Cincinnati"]];
        let table = location_frequency(&posts, &Stoplist::default(), CountMode::Occurrences);
        assert_eq!(table, vec![("cincinnati".to_string(), 2)]);
    }

    #[test]
    fn empty_stoplist_keeps_states() {
        let posts = vec![vec!["Ohio", "Cincinnati", "Cincinnati"]];
        let table = location_frequency(&posts, &Stoplist::empty(), CountMode::Occurrences);
        assert_eq!(
            table,
            vec![("cincinnati".to_string(), 2), ("ohio".to_string(), 1)]
        );
    }

    #[test]
    fn ties_alphabetical_and_per_post_mode() {
        let posts = vec![vec!["Chicago", "chicago"], vec!["Boston"], vec!["Chicago"]];
        let occ = location_frequency(&posts, &Stoplist::empty(), CountMode::Occurrences);
        assert_eq!(occ[0], ("chicago".to_string(), 3));
        let per_post = location_frequency(&posts, &Stoplist::empty(), CountMode::Posts);
        assert_eq!(
            per_post,
            vec![("chicago".to_string(), 2), ("boston".to_string(), 1)]
        );
        let tie = location_frequency(
            &[vec!["b"], vec!["a"]],
            &Stoplist::empty(),
            CountMode::Posts,
        );
        assert_eq!(tie[0].0, "a");
    }

    #[test]
    fn empty_input() {
        let none: Vec<Vec<String>> = Vec::new();
        assert!(location_frequency(&none, &Stoplist::default(), CountMode::Occurrences).is_empty());
    }

    #[test]
    fn stoplist_file_format() {
        let s = Stoplist::parse("# states\nOhio\n\n  Texas  \n");
        assert!(s.contains("ohio") && s.contains("texas"));
        assert!(Stoplist::default().contains("usa"));
        assert!(Stoplist::default().contains("west virginia"));
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        write_frequency_csv_to(&mut buf, &[("cincinnati".into(), 2)]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "location,count\ncincinnati,2\n"
        );
    }
}
