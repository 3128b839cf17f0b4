pub mod annotation;
pub mod backends;
pub mod cascade;
pub mod classifier;
pub mod corpus;
pub mod hashing;
pub mod jsonl;
pub mod masking;
pub mod scanner;

#[cfg(test)]
pub(crate) mod test_http;
