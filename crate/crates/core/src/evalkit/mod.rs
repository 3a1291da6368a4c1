//! Matching executed program values against multiple-choice options,
//! choosing an answer from a beam of candidate programs, the decoder token
//! vocabulary, and accuracy reports.

mod beam;
mod report;
mod vocab;

pub use beam::{load_beams, select_from_beam, BeamFileError, PredictionBeam, Provenance, Selection};
pub use report::{evaluate_predictions, CategoryAccuracy, EvalReport};
pub use vocab::build_program_vocabulary;

use serde::{Deserialize, Serialize};

use crate::textnum::OptionValue;
use crate::Tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub beam_size: usize,
    pub rng_seed: u64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            abs_tol: 0.01,
            rel_tol: 0.01,
            beam_size: 100,
            rng_seed: 0,
        }
    }
}

impl MatchConfig {
    pub fn tolerance(&self) -> Tolerance {
        Tolerance::new(self.abs_tol, self.rel_tol)
    }

    pub fn check(&self) -> Result<(), String> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err("tolerances must be positive".into());
        }
        if self.beam_size == 0 {
            return Err("beam size must be at least 1".into());
        }
        Ok(())
    }
}

/// Labels of the numeric options within tolerance of `value`.
pub fn match_options(value: f64, options: &[OptionValue], cfg: &MatchConfig) -> Vec<char> {
    let tol = cfg.tolerance();
    options
        .iter()
        .filter(|o| o.value.is_some_and(|v| tol.is_close(value, v)))
        .map(|o| o.label)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textnum::extract_option_values;

    fn opts(vals: &[&str]) -> Vec<OptionValue> {
        extract_option_values(vals)
    }

    #[test]
    fn close_value_matches_single_option() {
        let o = opts(&["a ) 21", "b ) 22", "c ) 23", "d ) 24", "e ) 25"]);
        let cfg = MatchConfig {
            rel_tol: 1e-6,
            ..MatchConfig::default()
        };
        assert_eq!(match_options(21.0005, &o, &cfg), vec!['a']);
    }

    #[test]
    fn halfway_value_matches_nothing() {
        let o = opts(&["a ) 21", "b ) 22", "c ) 23", "d ) 24", "e ) 25"]);
        assert!(match_options(21.5, &o, &MatchConfig::default()).is_empty());
    }

    #[test]
    fn average_matches_its_option() {
        let o = opts(&["a ) 80", "b ) 84", "c ) 87.25", "d ) 91", "e ) 95"]);
        assert_eq!(match_options(87.25, &o, &MatchConfig::default()), vec!['c']);
    }

    #[test]
    fn non_numeric_never_matches() {
        let o = opts(&["a ) none", "b ) 3"]);
        assert_eq!(match_options(3.0, &o, &MatchConfig::default()), vec!['b']);
    }
}
