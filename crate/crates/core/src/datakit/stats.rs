use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ProblemRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub category: String,
    pub problems: usize,
    pub avg_words: f64,
    pub vocab: usize,
    /// Records carrying a program; `avg_ops` averages over these.
    pub programs: usize,
    pub avg_ops: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub per_category: Vec<CategoryStats>,
    pub total: CategoryStats,
}

#[derive(Default)]
struct Acc {
    problems: usize,
    words: usize,
    vocab: HashSet<String>,
    programs: usize,
    ops: usize,
}

impl Acc {
    fn add(&mut self, r: &ProblemRecord) {
        self.problems += 1;
        for tok in r.problem.split_whitespace() {
            self.words += 1;
            self.vocab.insert(tok.to_lowercase());
        }
        if let Some(p) = &r.program {
            self.programs += 1;
            self.ops += p.len();
        }
    }

    fn finish(&self, category: String) -> CategoryStats {
        let mean = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        CategoryStats {
            category,
            problems: self.problems,
            avg_words: mean(self.words, self.problems),
            vocab: self.vocab.len(),
            programs: self.programs,
            avg_ops: mean(self.ops, self.programs),
        }
    }
}

/// Words are whitespace tokens of the problem text; vocabulary counts
/// distinct lowercased words.
pub fn compute_stats(records: &[ProblemRecord]) -> DatasetStats {
    let mut per: BTreeMap<String, Acc> = BTreeMap::new();
    let mut total = Acc::default();
    for r in records {
        let key = r
            .category
            .map_or_else(|| "uncategorized".to_string(), |c| c.to_string());
        per.entry(key).or_default().add(r);
        total.add(r);
    }
    DatasetStats {
        per_category: per.iter().map(|(k, a)| a.finish(k.clone())).collect(),
        total: total.finish("All".into()),
    }
}

impl DatasetStats {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<14} {:>8} {:>11} {:>8} {:>9}",
            "Category", "#Prob.", "Avg #words", "#Vocab", "Avg #ops"
        );
        for c in self.per_category.iter().chain(std::iter::once(&self.total)) {
            let _ = writeln!(
                out,
                "{:<14} {:>8} {:>11.1} {:>8} {:>9.1}",
                c.category, c.problems, c.avg_words, c.vocab, c.avg_ops
            );
        }
        out
    }
}
