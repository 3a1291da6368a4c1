use serde::{Deserialize, Serialize};

use crate::textnum::extract_numbers;
use crate::Tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArithOp {
    #[serde(rename = "+")]
    Add,
    #[serde(rename = "-")]
    Sub,
    #[serde(rename = "*")]
    Mul,
    #[serde(rename = "/")]
    Div,
}

impl ArithOp {
    fn from_symbol(s: &str) -> Option<Self> {
        match s {
            "+" => Some(ArithOp::Add),
            "-" | "−" => Some(ArithOp::Sub),
            "*" | "x" | "×" => Some(ArithOp::Mul),
            "/" | "÷" => Some(ArithOp::Div),
            _ => None,
        }
    }

    /// Registry operation computing the same thing.
    pub fn op_name(self) -> &'static str {
        match self {
            ArithOp::Add => "add",
            ArithOp::Sub => "subtract",
            ArithOp::Mul => "multiply",
            ArithOp::Div => "divide",
        }
    }

    pub fn is_commutative(self) -> bool {
        matches!(self, ArithOp::Add | ArithOp::Mul)
    }

    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            ArithOp::Add => a + b,
            ArithOp::Sub => a - b,
            ArithOp::Mul => a * b,
            ArithOp::Div => a / b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Expression {
    pub lhs: f64,
    pub op: ArithOp,
    pub rhs: f64,
    pub result: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RationaleTrace {
    pub numbers: Vec<f64>,
    pub expressions: Vec<Expression>,
}

/// Numbers in order of mention, plus every `a op b = c` written with
/// adjacent numbers whose arithmetic checks out under `tol`.
pub fn extract_rationale_trace(rationale: &str, tol: &Tolerance) -> RationaleTrace {
    let mentions = extract_numbers(rationale);
    let chars: Vec<char> = rationale.chars().collect();
    let between = |a: usize, b: usize| -> String {
        chars[mentions[a].span.1..mentions[b].span.0]
            .iter()
            .collect::<String>()
            .trim()
            .to_string()
    };
    let mut expressions = Vec::new();
    for i in 0..mentions.len().saturating_sub(2) {
        let Some(op) = ArithOp::from_symbol(&between(i, i + 1)) else {
            continue;
        };
        if between(i + 1, i + 2) != "=" {
            continue;
        }
        let (lhs, rhs, result) = (mentions[i].value, mentions[i + 1].value, mentions[i + 2].value);
        let computed = op.apply(lhs, rhs);
        if computed.is_finite() && tol.is_close(computed, result) {
            expressions.push(Expression { lhs, op, rhs, result });
        }
    }
    RationaleTrace {
        numbers: mentions.iter().map(|m| m.value).collect(),
        expressions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: Tolerance = Tolerance::new(1e-6, 1e-4);

    #[test]
    fn average_rationale() {
        let t = extract_rationale_trace("85 + 89 = 174. 174 + 80 = 254.", &TOL);
        assert_eq!(t.numbers, vec![85.0, 89.0, 174.0, 174.0, 80.0, 254.0]);
        assert_eq!(
            t.expressions,
            vec![
                Expression {
                    lhs: 85.0,
                    op: ArithOp::Add,
                    rhs: 89.0,
                    result: 174.0
                },
                Expression {
                    lhs: 174.0,
                    op: ArithOp::Add,
                    rhs: 80.0,
                    result: 254.0
                },
            ]
        );
    }

    #[test]
    fn prose_only() {
        assert_eq!(
            extract_rationale_trace("the answer is b", &TOL),
            RationaleTrace::default()
        );
    }

    #[test]
    fn inconsistent_dropped() {
        let t = extract_rationale_trace("2 + 2 = 5", &TOL);
        assert_eq!(t.numbers, vec![2.0, 2.0, 5.0]);
        assert!(t.expressions.is_empty());
    }

    #[test]
    fn other_symbols() {
        let t = extract_rationale_trace("speed = 72 x 5 / 18 . 360 ÷ 18 = 20 and 30 - 12 = 18", &TOL);
        let ops: Vec<ArithOp> = t.expressions.iter().map(|e| e.op).collect();
        assert_eq!(ops, vec![ArithOp::Div, ArithOp::Sub]);
    }
}
