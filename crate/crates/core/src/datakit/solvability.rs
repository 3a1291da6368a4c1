use serde::{Deserialize, Serialize};

use super::dedup::{find_near_duplicates, DedupConfig, DedupError};
use super::ProblemRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolvabilityLabel {
    NoWords,
    NonNumericOptions,
    Duplicate,
    Solvable,
    /// Empty problem text.
    Unknown,
}

impl SolvabilityLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SolvabilityLabel::NoWords => "no_words",
            SolvabilityLabel::NonNumericOptions => "non_numeric_options",
            SolvabilityLabel::Duplicate => "duplicate",
            SolvabilityLabel::Solvable => "solvable",
            SolvabilityLabel::Unknown => "unknown",
        }
    }
}

/// Rules apply in order: no alphabetic word, no numeric option, member of
/// a duplicate cluster, otherwise solvable.
pub fn classify_solvability(r: &ProblemRecord, in_duplicate_cluster: bool) -> SolvabilityLabel {
    if r.problem.trim().is_empty() {
        return SolvabilityLabel::Unknown;
    }
    if !r.problem.split_whitespace().any(|t| t.chars().any(char::is_alphabetic)) {
        return SolvabilityLabel::NoWords;
    }
    if r.option_values().iter().all(|o| o.value.is_none()) {
        return SolvabilityLabel::NonNumericOptions;
    }
    if in_duplicate_cluster {
        SolvabilityLabel::Duplicate
    } else {
        SolvabilityLabel::Solvable
    }
}

pub fn screen_solvability(records: &[ProblemRecord], cfg: &DedupConfig) -> Result<Vec<SolvabilityLabel>, DedupError> {
    let texts: Vec<&str> = records.iter().map(|r| r.problem.as_str()).collect();
    let clusters = find_near_duplicates(&texts, cfg)?;
    Ok(records
        .iter()
        .enumerate()
        .map(|(i, r)| classify_solvability(r, clusters.is_duplicate(i)))
        .collect())
}
