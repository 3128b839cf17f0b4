//! Dictionary-backed location recognizer.
//!
//! Matches are case-sensitive (an all-caps rendering of an entry also
//! matches), anchored at word boundaries and resolved leftmost-longest, so
//! "Ohio River" wins over "Ohio".

use super::ner::{DetectedEntity, NerBackend, NerError};

pub const GAZETTEER_NER_ID: &str = "gazetteer-ner/1.0.0";

/// The 50 US state names.
pub const US_STATES: [&str; 50] = [
    "Alabama",
    "Alaska",
    "Arizona",
    "Arkansas",
    "California",
    "Colorado",
    "Connecticut",
    "Delaware",
    "Florida",
    "Georgia",
    "Hawaii",
    "Idaho",
    "Illinois",
    "Indiana",
    "Iowa",
    "Kansas",
    "Kentucky",
    "Louisiana",
    "Maine",
    "Maryland",
    "Massachusetts",
    "Michigan",
    "Minnesota",
    "Mississippi",
    "Missouri",
    "Montana",
    "Nebraska",
    "Nevada",
    "New Hampshire",
    "New Jersey",
    "New Mexico",
    "New York",
    "North Carolina",
    "North Dakota",
    "Ohio",
    "Oklahoma",
    "Oregon",
    "Pennsylvania",
    "Rhode Island",
    "South Carolina",
    "South Dakota",
    "Tennessee",
    "Texas",
    "Utah",
    "Vermont",
    "Virginia",
    "Washington",
    "West Virginia",
    "Wisconsin",
    "Wyoming",
];

// Two-letter codes that collide with common all-caps words (IN, OR, ME, OK,
// HI, DE, LA, ID) are left out.
const STATE_CODES: &[&str] = &[
    "AL", "AK", "AZ", "AR", "CA", "CT", "DC", "FL", "GA", "IA", "IL", "KS", "KY", "MA", "MD", "MI",
    "MN", "MO", "MS", "MT", "NC", "ND", "NE", "NH", "NJ", "NM", "NV", "NY", "OH", "PA", "RI", "SC",
    "SD", "TN", "TX", "UT", "VA", "VT", "WA", "WI", "WV", "WY",
];

const COUNTRIES: &[&str] = &[
    "United States",
    "United States of America",
    "USA",
    "America",
    "Canada",
    "Mexico",
    "Korea",
    "South Korea",
    "China",
    "Japan",
    "India",
    "Germany",
    "France",
    "Italy",
    "England",
    "United Kingdom",
    "UK",
    "Ireland",
    "Brazil",
    "Russia",
    "Ukraine",
    "Australia",
    "Israel",
];

const CITIES: &[&str] = &[
    "Albany",
    "Albuquerque",
    "Allentown",
    "Anchorage",
    "Annapolis",
    "Atlanta",
    "Austin",
    "Baltimore",
    "Baton Rouge",
    "Birmingham",
    "Boise",
    "Boston",
    "Buffalo",
    "Burlington",
    "Charleston",
    "Charlotte",
    "Chattanooga",
    "Chicago",
    "Cincinnati",
    "Cleveland",
    "Columbus",
    "Dallas",
    "Dayton",
    "Denver",
    "Des Moines",
    "Detroit",
    "Duluth",
    "El Paso",
    "Erie",
    "Fort Lauderdale",
    "Fort Worth",
    "Fresno",
    "Gary",
    "Grand Rapids",
    "Harrisburg",
    "Hartford",
    "Honolulu",
    "Houston",
    "Indianapolis",
    "Jacksonville",
    "Jersey City",
    "Kansas City",
    "Knoxville",
    "Las Vegas",
    "Lexington",
    "Lincoln",
    "Little Rock",
    "Los Angeles",
    "Louisville",
    "Lowell",
    "Madison",
    "Memphis",
    "Miami",
    "Miami Beach",
    "Milwaukee",
    "Minneapolis",
    "Mobile",
    "Montgomery",
    "Nashville",
    "New Haven",
    "New Kensington",
    "New Orleans",
    "Newark",
    "Norfolk",
    "Oakland",
    "Oklahoma City",
    "Omaha",
    "Orlando",
    "Philadelphia",
    "Philly",
    "Phoenix",
    "Pittsburgh",
    "Portland",
    "Providence",
    "Raleigh",
    "Reno",
    "Richmond",
    "Rochester",
    "Sacramento",
    "Saint Louis",
    "St. Louis",
    "Salt Lake City",
    "San Antonio",
    "San Diego",
    "San Francisco",
    "San Jose",
    "Savannah",
    "Scranton",
    "Seattle",
    "Spokane",
    "Springfield",
    "Surfside",
    "Syracuse",
    "Tacoma",
    "Tallahassee",
    "Tampa",
    "Toledo",
    "Toronto",
    "Tucson",
    "Tulsa",
    "Vancouver",
    "Wheeling",
    "Wichita",
    "Wilmington",
    "Worcester",
    "Youngstown",
    "NYC",
    "East Palestine",
    "Brooklyn",
    "Manhattan",
    "Queens",
    "Bronx",
    "Staten Island",
];

const WATERS_AND_REGIONS: &[&str] = &[
    "Merrimack",
    "Merrimack River",
    "Ohio River",
    "Mississippi River",
    "Missouri River",
    "Hudson River",
    "Potomac",
    "Potomac River",
    "Delaware River",
    "Allegheny River",
    "Monongahela River",
    "Susquehanna River",
    "Columbia River",
    "Colorado River",
    "Chesapeake Bay",
    "Lake Michigan",
    "Lake Erie",
    "Lake Pontchartrain",
    "Pacific Ocean",
    "Atlantic Ocean",
    "Gulf of Mexico",
    "East River",
    "Charles River",
    "Midwest",
    "Northeast",
    "New England",
    "Appalachia",
    "Bay Area",
    "Rust Belt",
    "Tri-State",
    "FDR",
    "PCH",
    "Bay Bridge",
    "Golden Gate Bridge",
    "Brooklyn Bridge",
    "Fern Hollow Bridge",
];

#[derive(Debug, Clone)]
struct Entry {
    chars: Vec<char>,
    upper: Vec<char>,
    label: &'static str,
}

/// Pinned dictionary NER; see the module docs for matching rules.
#[derive(Debug, Clone)]
pub struct GazetteerNer {
    entries: Vec<Entry>,
}

impl Default for GazetteerNer {
    fn default() -> Self {
        let mut ner = Self {
            entries: Vec::new(),
        };
        for s in US_STATES
            .iter()
            .chain(STATE_CODES)
            .chain(COUNTRIES)
            .chain(CITIES)
        {
            ner.push(s, "GPE");
        }
        for s in WATERS_AND_REGIONS {
            ner.push(s, "LOC");
        }
        ner
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

impl GazetteerNer {
    fn push(&mut self, surface: &str, label: &'static str) {
        let chars: Vec<char> = surface.chars().collect();
        let upper = surface.to_uppercase().chars().collect();
        self.entries.push(Entry {
            chars,
            upper,
            label,
        });
    }

    /// Adds a custom entry; `label` follows spaCy conventions (`GPE`, `LOC`).
    pub fn with_entry(mut self, surface: &str, label: &'static str) -> Self {
        self.push(surface, label);
        self
    }

    fn matches_at(text: &[char], at: usize, pattern: &[char]) -> bool {
        let end = at + pattern.len();
        end <= text.len()
            && text[at..end] == *pattern
            && text.get(end).is_none_or(|c| !is_word_char(*c))
    }
}

impl NerBackend for GazetteerNer {
    fn identifier(&self) -> &str {
        GAZETTEER_NER_ID
    }

    fn detect(&self, text: &str) -> Result<Vec<DetectedEntity>, NerError> {
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let at_word_start = i == 0 || !is_word_char(chars[i - 1]);
            if at_word_start && is_word_char(chars[i]) {
                let best = self
                    .entries
                    .iter()
                    .filter(|e| {
                        Self::matches_at(&chars, i, &e.chars)
                            || Self::matches_at(&chars, i, &e.upper)
                    })
                    .max_by_key(|e| e.chars.len());
                if let Some(entry) = best {
                    let end = i + entry.chars.len();
                    out.push(DetectedEntity {
                        start: i,
                        end,
                        label: entry.label.to_string(),
                    });
                    i = end;
                    continue;
                }
            }
            i += 1;
        }
        Ok(out)
    }
}
