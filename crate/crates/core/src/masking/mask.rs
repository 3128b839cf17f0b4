use super::ner::{NerBackend, NerError};
use super::spans::{boundaries, char_len, EntityCategory, EntitySpan, MaskedText};

pub const DEFAULT_MASK_TOKEN: &str = "<LOCATION>";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MaskError {
    #[error("span {start}..{end} is invalid for text of length {len}")]
    OutOfRange {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("mask token must not be empty")]
    EmptyToken,
}

/// Codepoint ranges of every occurrence of `token` in `text`.
fn token_ranges(text: &str, token: &str) -> Vec<(usize, usize)> {
    if token.is_empty() {
        return Vec::new();
    }
    let token_len = char_len(token);
    text.match_indices(token)
        .map(|(byte, _)| {
            let start = char_len(&text[..byte]);
            (start, start + token_len)
        })
        .collect()
}

/// Detects location and geopolitical mentions using `DEFAULT_MASK_TOKEN`.
pub fn extract_locations(text: &str, ner: &dyn NerBackend) -> Result<Vec<EntitySpan>, NerError> {
    extract_locations_with(text, ner, DEFAULT_MASK_TOKEN)
}

/// Detects location and geopolitical mentions.
///
/// Other entity labels are discarded, detections overlapping an existing
/// mask token are ignored, and overlapping or touching detections are
/// merged. The result is sorted and non-overlapping.
pub fn extract_locations_with(
    text: &str,
    ner: &dyn NerBackend,
    mask_token: &str,
) -> Result<Vec<EntitySpan>, NerError> {
    let len = char_len(text);
    let masks = token_ranges(text, mask_token);
    let mut found: Vec<(usize, usize, EntityCategory)> = Vec::new();
    for ent in ner.detect(text)? {
        if ent.start >= ent.end || ent.end > len {
            return Err(NerError::InvalidSpan {
                start: ent.start,
                end: ent.end,
                len,
            });
        }
        let Some(category) = EntityCategory::from_label(&ent.label) else {
            continue;
        };
        if masks.iter().any(|&(s, e)| ent.start < e && s < ent.end) {
            continue;
        }
        found.push((ent.start, ent.end, category));
    }
    found.sort_by_key(|&(s, e, _)| (s, e));

    let mut merged: Vec<(usize, usize, EntityCategory)> = Vec::new();
    for (s, e, c) in found {
        match merged.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e, c)),
        }
    }
    let bounds = boundaries(text);
    Ok(merged
        .into_iter()
        .map(|(start, end, category)| EntitySpan {
            start,
            end,
            surface: text[bounds[start]..bounds[end]].to_string(),
            category,
        })
        .collect())
}

/// Replaces each merged span region with `mask_token`.
///
/// Spans that overlap, or are separated only by whitespace, collapse into a
/// single region so "Lowell Massachusetts" becomes one token. Text outside
/// the regions is copied unchanged.
pub fn mask_locations(
    text: &str,
    spans: &[EntitySpan],
    mask_token: &str,
) -> Result<MaskedText, MaskError> {
    if mask_token.is_empty() {
        return Err(MaskError::EmptyToken);
    }
    let len = char_len(text);
    let mut ranges: Vec<(usize, usize)> = Vec::with_capacity(spans.len());
    for s in spans {
        if s.start >= s.end || s.end > len {
            return Err(MaskError::OutOfRange {
                start: s.start,
                end: s.end,
                len,
            });
        }
        ranges.push((s.start, s.end));
    }
    ranges.sort_unstable();

    let bounds = boundaries(text);
    let mut regions: Vec<(usize, usize)> = Vec::new();
    for (s, e) in ranges {
        match regions.last_mut() {
            Some(last)
                if s <= last.1
                    || text[bounds[last.1]..bounds[s]]
                        .chars()
                        .all(char::is_whitespace) =>
            {
                last.1 = last.1.max(e);
            }
            _ => regions.push((s, e)),
        }
    }

    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for &(s, e) in &regions {
        out.push_str(&text[bounds[cursor]..bounds[s]]);
        out.push_str(mask_token);
        cursor = e;
    }
    out.push_str(&text[bounds[cursor]..]);
    Ok(MaskedText {
        text: out,
        mask_token: mask_token.to_string(),
        span_count: regions.len(),
    })
}

/// Rewrites literal occurrences of `mask_token` already present in user
/// text (`<LOCATION>` becomes `[LOCATION]`) so they are not confused with
/// inserted masks.
pub fn escape_literal_mask_tokens(text: &str, mask_token: &str) -> String {
    if mask_token.is_empty() || !text.contains(mask_token) {
        return text.to_string();
    }
    let inner = mask_token.trim_start_matches('<').trim_end_matches('>');
    text.replace(mask_token, &format!("[{inner}]"))
}

/// Escape, extract and mask in one step; returns the masked text and the
/// spans found in the escaped text.
pub fn mask_text(
    text: &str,
    ner: &dyn NerBackend,
    mask_token: &str,
) -> Result<(MaskedText, Vec<EntitySpan>), NerError> {
    let escaped = escape_literal_mask_tokens(text, mask_token);
    let spans = extract_locations_with(&escaped, ner, mask_token)?;
    let masked = mask_locations(&escaped, &spans, mask_token)
        .expect("extracted spans are valid for their text");
    Ok((masked, spans))
}
