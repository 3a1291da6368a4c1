//! Deriving programs from worked solutions, and brute-force enumeration.

mod enumerate;
mod rationale;
mod search;

pub use enumerate::{enumerate_programs, EnumerateConfig};
pub use rationale::{extract_rationale_trace, ArithOp, Expression, RationaleTrace};
pub use search::{dp_annotate, CandidateProgramSet, CandidateStatus, SearchConfig, SearchError};

use crate::opcore::{ArgRef, ConstTable, OpCall, OpRegistry, Program};

/// Problem numbers followed by the named constants, each with its reference.
/// Unknown constant names are skipped.
pub(crate) fn base_values(numbers: &[f64], consts: &ConstTable, constants: Option<&[String]>) -> Vec<(f64, ArgRef)> {
    let mut out: Vec<(f64, ArgRef)> = numbers
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, ArgRef::ProblemNumber(i)))
        .collect();
    let names: Vec<String> = match constants {
        Some(names) => names.to_vec(),
        None => consts.names().map(str::to_string).collect(),
    };
    for name in names {
        if let Some(v) = consts.resolve(&name) {
            out.push((v, ArgRef::Constant(name)));
        }
    }
    out
}

/// Sorts the arguments of commutative calls (problem numbers, then
/// constants, then step outputs) so argument-order variants compare equal.
pub fn canonicalize(p: &Program, registry: &OpRegistry) -> Program {
    fn key(a: &ArgRef) -> (u8, usize, String, u64) {
        match a {
            ArgRef::ProblemNumber(i) => (0, *i, String::new(), 0),
            ArgRef::Constant(name) => (1, 0, name.clone(), 0),
            ArgRef::Intermediate(k) => (2, *k, String::new(), 0),
            ArgRef::Literal(v) => (3, 0, String::new(), v.to_bits()),
        }
    }
    let calls = p
        .calls
        .iter()
        .map(|c| {
            let mut args = c.args.clone();
            if registry.get(&c.op).is_some_and(|s| s.commutative) {
                args.sort_by_key(key);
            }
            OpCall::new(c.op.clone(), args)
        })
        .collect();
    Program::new(calls)
}
