use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::records::{sort_records, Affiliation, AnnotationRecord, Label};

/// An agreement coefficient, or the reason it has no value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Agreement {
    Defined { value: f64 },
    Undefined { reason: String },
}

impl Agreement {
    pub fn value(&self) -> Option<f64> {
        match self {
            Agreement::Defined { value } => Some(*value),
            Agreement::Undefined { .. } => None,
        }
    }

    fn undefined(reason: &str) -> Self {
        Agreement::Undefined {
            reason: reason.to_string(),
        }
    }
}

/// Nominal Krippendorff's alpha over units of ratings, via the
/// coincidence matrix. Units with fewer than two ratings are not pairable
/// and are skipped.
pub fn krippendorff_alpha_nominal<C: Ord + Clone>(units: &[Vec<C>]) -> Agreement {
    let pairable: Vec<&Vec<C>> = units.iter().filter(|u| u.len() >= 2).collect();
    if pairable.len() < 2 {
        return Agreement::undefined("fewer than two units with two or more ratings");
    }
    let mut coincidence: BTreeMap<(C, C), f64> = BTreeMap::new();
    for unit in &pairable {
        let weight = 1.0 / (unit.len() as f64 - 1.0);
        for (i, a) in unit.iter().enumerate() {
            for (j, b) in unit.iter().enumerate() {
                if i != j {
                    *coincidence.entry((a.clone(), b.clone())).or_insert(0.0) += weight;
                }
            }
        }
    }
    let mut marginals: BTreeMap<C, f64> = BTreeMap::new();
    for ((c, _), v) in &coincidence {
        *marginals.entry(c.clone()).or_insert(0.0) += v;
    }
    let n: f64 = marginals.values().sum();
    let observed: f64 = coincidence
        .iter()
        .filter(|((c, k), _)| c != k)
        .map(|(_, v)| v)
        .sum();
    let sum_sq: f64 = marginals.values().map(|m| m * m).sum();
    let expected = n * n - sum_sq;
    if expected == 0.0 {
        return Agreement::undefined("only one category observed; expected disagreement is zero");
    }
    Agreement::Defined {
        value: 1.0 - (n - 1.0) * observed / expected,
    }
}

/// Cohen's kappa over paired ratings of the same items.
pub fn cohen_kappa_pairs<C: Ord + Clone>(pairs: &[(C, C)]) -> Agreement {
    if pairs.is_empty() {
        return Agreement::undefined("no jointly rated items");
    }
    let n = pairs.len() as f64;
    let agree = pairs.iter().filter(|(a, b)| a == b).count() as f64;
    let mut left: BTreeMap<&C, f64> = BTreeMap::new();
    let mut right: BTreeMap<&C, f64> = BTreeMap::new();
    for (a, b) in pairs {
        *left.entry(a).or_insert(0.0) += 1.0;
        *right.entry(b).or_insert(0.0) += 1.0;
    }
    let p_o = agree / n;
    let p_e: f64 = left
        .iter()
        .map(|(c, l)| l / n * right.get(c).copied().unwrap_or(0.0) / n)
        .sum();
    if (1.0 - p_e).abs() < f64::EPSILON {
        return Agreement::undefined("chance agreement is 1; both raters used one category");
    }
    Agreement::Defined {
        value: (p_o - p_e) / (1.0 - p_e),
    }
}

/// Alpha over records grouped by post.
pub fn krippendorff_alpha(records: &[AnnotationRecord]) -> Agreement {
    let mut units: BTreeMap<&str, Vec<Label>> = BTreeMap::new();
    for r in records {
        units.entry(&r.post_id).or_default().push(r.label);
    }
    let units: Vec<Vec<Label>> = units.into_values().collect();
    krippendorff_alpha_nominal(&units)
}

/// Kappa between two raters' records, over posts both rated.
pub fn cohen_kappa(a: &[AnnotationRecord], b: &[AnnotationRecord]) -> Agreement {
    let first = |rs: &[AnnotationRecord]| {
        let mut sorted: Vec<&AnnotationRecord> = rs.iter().collect();
        sort_records(&mut sorted);
        let mut out: BTreeMap<String, Label> = BTreeMap::new();
        for r in sorted {
            out.entry(r.post_id.clone()).or_insert(r.label);
        }
        out
    };
    let (a, b) = (first(a), first(b));
    let pairs: Vec<(Label, Label)> = a
        .iter()
        .filter_map(|(post, la)| b.get(post).map(|lb| (*la, *lb)))
        .collect();
    cohen_kappa_pairs(&pairs)
}

/// Which records an agreement report covers and how raters are identified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RaterGroup {
    /// Crowd records; raters are the three affiliations.
    Partisan,
    /// Expert records; raters are individual annotators.
    Expert,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub group: RaterGroup,
    pub krippendorff_alpha: Agreement,
    /// Keyed `a|b` with the two rater keys in sorted order.
    pub pairwise_kappa: BTreeMap<String, Agreement>,
    pub n_items: usize,
    pub n_raters: usize,
}

pub fn pair_key(a: &str, b: &str) -> String {
    if a <= b {
        format!("{a}|{b}")
    } else {
        format!("{b}|{a}")
    }
}

/// Agreement statistics for one rater group. Tiebreaker records never
/// count toward either group.
pub fn agreement_report(records: &[AnnotationRecord], group: RaterGroup) -> AgreementReport {
    let selected: Vec<AnnotationRecord> = records
        .iter()
        .filter(|r| match group {
            RaterGroup::Partisan => r.affiliation.is_partisan(),
            RaterGroup::Expert => r.affiliation == Affiliation::Expert,
        })
        .cloned()
        .collect();
    let key = |r: &AnnotationRecord| match group {
        RaterGroup::Partisan => r.affiliation.as_str().to_string(),
        RaterGroup::Expert => r.annotator_id.clone(),
    };
    let mut by_rater: BTreeMap<String, Vec<AnnotationRecord>> = BTreeMap::new();
    for r in &selected {
        by_rater.entry(key(r)).or_default().push(r.clone());
    }
    let raters: Vec<&String> = by_rater.keys().collect();
    let mut pairwise_kappa = BTreeMap::new();
    for (i, a) in raters.iter().enumerate() {
        for b in &raters[i + 1..] {
            pairwise_kappa.insert(pair_key(a, b), cohen_kappa(&by_rater[*a], &by_rater[*b]));
        }
    }
    let items: BTreeSet<&str> = selected.iter().map(|r| r.post_id.as_str()).collect();
    let annotators: BTreeSet<&str> = selected.iter().map(|r| r.annotator_id.as_str()).collect();
    AgreementReport {
        group,
        krippendorff_alpha: krippendorff_alpha(&selected),
        pairwise_kappa,
        n_items: items.len(),
        n_raters: annotators.len(),
    }
}
