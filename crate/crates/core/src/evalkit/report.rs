use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::beam::{select_from_beam, PredictionBeam, Provenance};
use super::MatchConfig;
use crate::datakit::ProblemRecord;
use crate::opcore::{ConstTable, OpRegistry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryAccuracy {
    pub category: String,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub per_category: Vec<CategoryAccuracy>,
    /// Answers drawn at random (no executable program, no beam, or no category).
    pub fallback_random: usize,
    pub missing_beams: Vec<String>,
}

fn ratio(correct: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    }
}

impl EvalReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<14} {:>8} {:>8} {:>9}",
            "Category", "#Prob", "Correct", "Accuracy"
        );
        for c in &self.per_category {
            let _ = writeln!(
                out,
                "{:<14} {:>8} {:>8} {:>9.1}",
                c.category,
                c.total,
                c.correct,
                100.0 * c.accuracy
            );
        }
        let _ = writeln!(
            out,
            "{:<14} {:>8} {:>8} {:>9.1}",
            "All",
            self.total,
            self.correct,
            100.0 * self.accuracy
        );
        let _ = writeln!(out, "random fallbacks: {}", self.fallback_random);
        out
    }
}

/// Scores beams against the records' correct labels. Problems with no beam
/// are answered at random and listed in `missing_beams`.
pub fn evaluate_predictions(
    records: &[ProblemRecord],
    beams: &[PredictionBeam],
    registry: &OpRegistry,
    consts: &ConstTable,
    cfg: &MatchConfig,
) -> EvalReport {
    let by_id: HashMap<&str, &PredictionBeam> = beams.iter().map(|b| (b.problem_id.as_str(), b)).collect();
    let mut per_cat: Vec<(String, usize, usize)> = Vec::new();
    let mut correct = 0;
    let mut fallback_random = 0;
    let mut missing_beams = Vec::new();

    for rec in records {
        let empty;
        let beam = match by_id.get(rec.id.as_str()) {
            Some(b) => *b,
            None => {
                missing_beams.push(rec.id.clone());
                empty = PredictionBeam {
                    problem_id: rec.id.clone(),
                    programs: Vec::new(),
                };
                &empty
            }
        };
        let sel = select_from_beam(
            beam,
            &rec.numbers(),
            &rec.option_values(),
            registry,
            consts,
            cfg,
            rec.category.is_none(),
        );
        if matches!(sel.provenance, Provenance::FallbackRandom { .. }) {
            fallback_random += 1;
        }
        let hit = sel.label == rec.correct;
        correct += hit as usize;
        let name = rec.category.map_or("uncategorized".to_string(), |c| c.to_string());
        match per_cat.iter_mut().find(|(n, ..)| *n == name) {
            Some(entry) => {
                entry.1 += 1;
                entry.2 += hit as usize;
            }
            None => per_cat.push((name, 1, hit as usize)),
        }
    }
    per_cat.sort_by(|a, b| a.0.cmp(&b.0));
    EvalReport {
        total: records.len(),
        correct,
        accuracy: ratio(correct, records.len()),
        per_category: per_cat
            .into_iter()
            .map(|(category, total, correct)| CategoryAccuracy {
                category,
                total,
                correct,
                accuracy: ratio(correct, total),
            })
            .collect(),
        fallback_random,
        missing_beams,
    }
}
