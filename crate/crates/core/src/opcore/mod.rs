//! The operation-program language: types, grammar, operation registry,
//! constant table and evaluator.

mod constants;
mod eval;
mod program;
mod registry;
pub mod rules;

pub use constants::{load_constants, ConstEntry, ConstTable, DEFAULT_CONSTANTS};
pub use eval::{
    bind_literals, eval_call, evaluate, looks_one_based, resolve_arg, shift_to_zero_based, validate_refs, BoundProgram,
    EvalError, EvalTrace, ValidationReport, Violation, BIND_EPS,
};
pub use program::{parse_program, serialize_program, ArgRef, OpCall, ParseError, Program};
pub use registry::{load_registry, FormatError, OpHint, OpRegistry, OpSpec, DEFAULT_OPERATIONS};
