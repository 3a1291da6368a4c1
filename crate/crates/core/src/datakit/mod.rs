//! Dataset records, file I/O, validation, corpus statistics, near-duplicate
//! screening and annotation expansion.

mod dedup;
mod expand;
mod io;
mod solvability;
mod stats;
mod validate;

pub use dedup::{find_near_duplicates, masked_tokens, word_edit_distance, DedupConfig, DedupError, DuplicateClusters};
pub use expand::{expand_annotations, ExpansionOutput, ExpansionReport, RejectReason, Rejection};
pub use io::{load_dataset, parse_dataset, save_dataset, write_dataset, LoadReport, RecordError};
pub use solvability::{classify_solvability, screen_solvability, SolvabilityLabel};
pub use stats::{compute_stats, CategoryStats, DatasetStats};
pub use validate::{validate_record, InvalidReason, Verdict};

use serde::{Deserialize, Serialize};

use crate::categorize::Category;
use crate::opcore::Program;
use crate::textnum::{extract_option_values, label_index, number_values, OptionValue};

/// One dataset row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemRecord {
    pub id: String,
    pub problem: String,
    pub rationale: String,
    /// Exactly five option strings, labelled a–e in order.
    pub options: Vec<String>,
    pub correct: char,
    pub category: Option<Category>,
    pub program: Option<Program>,
}

impl ProblemRecord {
    pub fn numbers(&self) -> Vec<f64> {
        number_values(&self.problem)
    }

    pub fn option_values(&self) -> Vec<OptionValue> {
        extract_option_values(&self.options)
    }

    pub fn correct_value(&self) -> Option<f64> {
        let i = label_index(self.correct)?;
        self.option_values().get(i).and_then(|o| o.value)
    }
}
