//! Lexicon-based domain categorization.
//!
//! A problem's score for category `c` is the number of occurrences of `c`'s
//! n-grams in its text. The label is the argmax over positive scores, ties
//! going to the category listed first in the lexicon, and `general` when
//! nothing matches.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_LEXICON: &str = include_str!("../data/lexicon.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "geometry")]
    Geometry,
    #[serde(rename = "physics")]
    Physics,
    #[serde(rename = "probability")]
    Probability,
    #[serde(rename = "gain-loss", alias = "gain")]
    GainLoss,
    #[serde(rename = "general")]
    General,
    #[serde(rename = "other")]
    Other,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Geometry,
        Category::Physics,
        Category::Probability,
        Category::GainLoss,
        Category::General,
        Category::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Geometry => "geometry",
            Category::Physics => "physics",
            Category::Probability => "probability",
            Category::GainLoss => "gain-loss",
            Category::General => "general",
            Category::Other => "other",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown category `{0}`")]
pub struct UnknownCategory(pub String);

impl FromStr for Category {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "geometry" => Ok(Category::Geometry),
            "physics" => Ok(Category::Physics),
            "probability" => Ok(Category::Probability),
            "gain-loss" | "gain_loss" | "gain" => Ok(Category::GainLoss),
            "general" => Ok(Category::General),
            "other" => Ok(Category::Other),
            _ => Err(UnknownCategory(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Ordered category → n-gram lists. Order decides ties.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryLexicon {
    entries: Vec<(Category, Vec<Vec<String>>)>,
}

impl CategoryLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an n-gram. Categories are ordered by first insertion.
    pub fn insert(&mut self, category: Category, ngram: &str) -> Result<(), String> {
        let tokens = tokenize(ngram);
        if tokens.is_empty() || tokens.len() > 3 {
            return Err(format!("n-gram `{ngram}` must have 1 to 3 tokens"));
        }
        if let Some(owner) = self.owner_of(&tokens) {
            return Err(format!("n-gram `{ngram}` already listed under {owner}"));
        }
        match self.entries.iter_mut().find(|(c, _)| *c == category) {
            Some((_, grams)) => grams.push(tokens),
            None => self.entries.push((category, vec![tokens])),
        }
        Ok(())
    }

    fn owner_of(&self, tokens: &[String]) -> Option<Category> {
        self.entries
            .iter()
            .find(|(_, grams)| grams.iter().any(|g| g == tokens))
            .map(|(c, _)| *c)
    }

    pub fn categories(&self) -> impl Iterator<Item = Category> + '_ {
        self.entries.iter().map(|(c, _)| *c)
    }

    pub fn ngrams(&self, category: Category) -> impl Iterator<Item = String> + '_ {
        self.entries
            .iter()
            .filter(move |(c, _)| *c == category)
            .flat_map(|(_, grams)| grams.iter().map(|g| g.join(" ")))
    }

    /// Parses `category<TAB>ngram` lines; blank lines and `#` comments skipped.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lexicon = CategoryLexicon::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| LexiconError::Format { line: i + 1, message };
            let (cat, gram) = line
                .split_once('\t')
                .ok_or_else(|| err("expected `category<TAB>ngram`".into()))?;
            let category: Category = cat.parse().map_err(|e: UnknownCategory| err(e.to_string()))?;
            lexicon.insert(category, gram).map_err(err)?;
        }
        Ok(lexicon)
    }

    pub fn shipped() -> Self {
        Self::parse(DEFAULT_LEXICON).expect("shipped lexicon is well-formed")
    }
}

/// Lowercased word tokens: alphanumeric runs, with `%` as its own token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if c == '%' {
                out.push("%".to_string());
            }
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Per-category n-gram frequencies, in lexicon order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryScore {
    pub scores: IndexMap<Category, u32>,
}

impl CategoryScore {
    pub fn get(&self, c: Category) -> u32 {
        self.scores.get(&c).copied().unwrap_or(0)
    }

    /// Highest positive score; earliest wins ties.
    pub fn argmax(&self) -> Option<Category> {
        let mut best: Option<(Category, u32)> = None;
        for (&c, &s) in &self.scores {
            if s > 0 && best.is_none_or(|(_, b)| s > b) {
                best = Some((c, s));
            }
        }
        best.map(|(c, _)| c)
    }
}

pub fn score_categories(text: &str, lexicon: &CategoryLexicon) -> CategoryScore {
    let tokens = tokenize(text);
    let scores = lexicon
        .entries
        .iter()
        .map(|(cat, grams)| {
            let count: usize = grams
                .iter()
                .map(|g| tokens.windows(g.len()).filter(|w| *w == g.as_slice()).count())
                .sum();
            (*cat, count as u32)
        })
        .collect();
    CategoryScore { scores }
}

pub fn classify(text: &str, lexicon: &CategoryLexicon) -> Category {
    score_categories(text, lexicon).argmax().unwrap_or(Category::General)
}
