use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::records::Affiliation;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotator {
    pub annotator_id: String,
    pub affiliation: Affiliation,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentPolicy {
    /// One democrat, one republican and one independent per post.
    #[default]
    OnePerAffiliation,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("annotator pool has no {}", .missing.iter().map(|a| a.as_str()).collect::<Vec<_>>().join(", "))]
pub struct AssignError {
    pub missing: Vec<Affiliation>,
}

/// Post id → assigned annotator ids (democrat, republican, independent).
pub type Assignment = BTreeMap<String, Vec<String>>;

/// Assigns each post one annotator per partisan affiliation, rotating
/// through each affiliation's annotators (sorted by id) so loads within an
/// affiliation differ by at most one.
pub fn assign_tasks(
    post_ids: &[String],
    pool: &[Annotator],
    policy: AssignmentPolicy,
) -> Result<Assignment, AssignError> {
    let AssignmentPolicy::OnePerAffiliation = policy;
    let mut groups: Vec<Vec<&str>> = Affiliation::PARTISAN
        .iter()
        .map(|aff| {
            pool.iter()
                .filter(|a| a.affiliation == *aff)
                .map(|a| a.annotator_id.as_str())
                .collect()
        })
        .collect();
    let missing: Vec<Affiliation> = Affiliation::PARTISAN
        .iter()
        .zip(&groups)
        .filter(|(_, g)| g.is_empty())
        .map(|(a, _)| *a)
        .collect();
    if !missing.is_empty() {
        return Err(AssignError { missing });
    }
    for g in &mut groups {
        g.sort_unstable();
        g.dedup();
    }
    Ok(post_ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let who = groups.iter().map(|g| g[i % g.len()].to_string()).collect();
            (id.clone(), who)
        })
        .collect())
}

/// Number of posts per annotator.
pub fn loads(assignment: &Assignment) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for who in assignment.values() {
        for a in who {
            *out.entry(a.clone()).or_insert(0) += 1;
        }
    }
    out
}
