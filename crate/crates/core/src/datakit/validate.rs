use serde::{Deserialize, Serialize};

use super::ProblemRecord;
use crate::evalkit::{match_options, MatchConfig};
use crate::opcore::{evaluate, validate_refs, ConstTable, EvalError, OpRegistry, Violation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum InvalidReason {
    NoProgram,
    References {
        violations: Vec<Violation>,
    },
    Domain {
        step: usize,
        message: String,
    },
    NonNumericCorrectOption,
    ValueMismatch {
        final_value: f64,
        expected: f64,
        distance: f64,
        allowed: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Valid { final_value: f64 },
    Invalid(InvalidReason),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid { .. })
    }
}

/// Valid iff the program executes on the problem's numbers and its final
/// value is within tolerance of the correct option's value.
pub fn validate_record(r: &ProblemRecord, registry: &OpRegistry, consts: &ConstTable, cfg: &MatchConfig) -> Verdict {
    let Some(program) = &r.program else {
        return Verdict::Invalid(InvalidReason::NoProgram);
    };
    let numbers = r.numbers();
    let report = validate_refs(program, numbers.len(), registry, consts);
    if !report.is_empty() {
        return Verdict::Invalid(InvalidReason::References {
            violations: report.violations,
        });
    }
    let trace = match evaluate(program, &numbers, registry, consts) {
        Ok(t) => t,
        Err(EvalError::Domain { step, message }) => return Verdict::Invalid(InvalidReason::Domain { step, message }),
        Err(EvalError::Reference(v)) => return Verdict::Invalid(InvalidReason::References { violations: vec![v] }),
    };
    let options = r.option_values();
    let Some(expected) = r.correct_value() else {
        return Verdict::Invalid(InvalidReason::NonNumericCorrectOption);
    };
    let value = trace.final_value;
    if match_options(value, &options, cfg).contains(&r.correct) {
        Verdict::Valid { final_value: value }
    } else {
        Verdict::Invalid(InvalidReason::ValueMismatch {
            final_value: value,
            expected,
            distance: (value - expected).abs(),
            allowed: cfg.tolerance().bound(expected),
        })
    }
}
