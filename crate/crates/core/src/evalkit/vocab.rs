use crate::opcore::{ConstTable, OpRegistry};
use crate::textnum::extract_numbers;

/// Decoder tokens grouped by source: operation names, constant names,
/// problem numbers `n0..` in text order, then step outputs `#0..`.
pub fn build_program_vocabulary(
    problem_text: &str,
    registry: &OpRegistry,
    consts: &ConstTable,
    max_steps: usize,
) -> Vec<String> {
    let n_numbers = extract_numbers(problem_text).len();
    let mut tokens: Vec<String> = registry.names().map(str::to_string).collect();
    tokens.extend(consts.names().map(str::to_string));
    tokens.extend((0..n_numbers).map(|i| format!("n{i}")));
    tokens.extend((0..max_steps).map(|k| format!("#{k}")));
    tokens
}
