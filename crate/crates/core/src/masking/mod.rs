//! Location detection, masking and location-frequency reporting.

mod config;
mod dataset;
mod frequency;
mod gazetteer;
mod mask;
mod ner;
mod spans;

pub use config::{MaskingConfig, NerConfig};
pub use dataset::{mask_examples, DatasetMaskError, MaskSummary};
pub use frequency::{
    location_frequency, write_frequency_csv, write_frequency_csv_to, CountMode, Stoplist,
};
pub use gazetteer::{GazetteerNer, GAZETTEER_NER_ID, US_STATES};
pub use mask::{
    escape_literal_mask_tokens, extract_locations, extract_locations_with, mask_locations,
    mask_text, MaskError, DEFAULT_MASK_TOKEN,
};
pub use ner::{DetectedEntity, HttpNer, NerBackend, NerError};
pub use spans::{EntityCategory, EntitySpan, MaskedText};
