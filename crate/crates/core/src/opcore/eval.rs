use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::constants::ConstTable;
use super::program::{ArgRef, OpCall, Program};
use super::registry::OpRegistry;

/// Literals within this distance of a candidate bind to it.
pub const BIND_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    #[error("program has no operations")]
    EmptyProgram,
    #[error("call {step} references #{target}, which is not an earlier call")]
    ForwardReference { step: usize, target: usize },
    #[error("call {step} references n{index} but only {count} numbers are available")]
    IndexOutOfRange { step: usize, index: usize, count: usize },
    #[error("call {step} uses unknown operation `{op}`")]
    UnknownOperation { step: usize, op: String },
    #[error("call {step}: `{op}` takes {expected} arguments, got {found}")]
    ArityMismatch {
        step: usize,
        op: String,
        expected: usize,
        found: usize,
    },
    #[error("call {step} uses unknown constant `{name}`")]
    UnknownConstant { step: usize, name: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvalError {
    #[error("domain error at call {step}: {message}")]
    Domain { step: usize, message: String },
    #[error(transparent)]
    Reference(#[from] Violation),
}

impl EvalError {
    pub fn step(&self) -> Option<usize> {
        match self {
            EvalError::Domain { step, .. } => Some(*step),
            EvalError::Reference(v) => match v {
                Violation::EmptyProgram => None,
                Violation::ForwardReference { step, .. }
                | Violation::IndexOutOfRange { step, .. }
                | Violation::UnknownOperation { step, .. }
                | Violation::ArityMismatch { step, .. }
                | Violation::UnknownConstant { step, .. } => Some(*step),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalTrace {
    pub step_values: Vec<f64>,
    pub final_value: f64,
}

pub fn validate_refs(p: &Program, n_count: usize, registry: &OpRegistry, consts: &ConstTable) -> ValidationReport {
    let mut violations = Vec::new();
    if p.is_empty() {
        violations.push(Violation::EmptyProgram);
    }
    for (step, call) in p.calls.iter().enumerate() {
        match registry.get(&call.op) {
            None => violations.push(Violation::UnknownOperation {
                step,
                op: call.op.clone(),
            }),
            Some(spec) if spec.arity != call.args.len() => violations.push(Violation::ArityMismatch {
                step,
                op: call.op.clone(),
                expected: spec.arity,
                found: call.args.len(),
            }),
            Some(_) => {}
        }
        for arg in &call.args {
            match arg {
                ArgRef::Intermediate(k) if *k >= step => {
                    violations.push(Violation::ForwardReference { step, target: *k })
                }
                ArgRef::ProblemNumber(i) if *i >= n_count => violations.push(Violation::IndexOutOfRange {
                    step,
                    index: *i,
                    count: n_count,
                }),
                ArgRef::Constant(name) if consts.resolve(name).is_none() => {
                    violations.push(Violation::UnknownConstant {
                        step,
                        name: name.clone(),
                    })
                }
                _ => {}
            }
        }
    }
    ValidationReport { violations }
}

/// Value of one argument for call `step`, given the outputs of earlier calls.
pub fn resolve_arg(
    arg: &ArgRef,
    step: usize,
    numbers: &[f64],
    prior: &[f64],
    consts: &ConstTable,
) -> Result<f64, Violation> {
    match arg {
        ArgRef::ProblemNumber(i) => numbers.get(*i).copied().ok_or(Violation::IndexOutOfRange {
            step,
            index: *i,
            count: numbers.len(),
        }),
        ArgRef::Intermediate(k) => prior
            .get(*k)
            .filter(|_| *k < step)
            .copied()
            .ok_or(Violation::ForwardReference { step, target: *k }),
        ArgRef::Constant(name) => consts.resolve(name).ok_or_else(|| Violation::UnknownConstant {
            step,
            name: name.clone(),
        }),
        ArgRef::Literal(v) => Ok(*v),
    }
}

/// Evaluates call number `step` given the outputs of the calls before it.
pub fn eval_call(
    call: &OpCall,
    step: usize,
    numbers: &[f64],
    prior: &[f64],
    registry: &OpRegistry,
    consts: &ConstTable,
) -> Result<f64, EvalError> {
    let spec = registry.get(&call.op).ok_or_else(|| Violation::UnknownOperation {
        step,
        op: call.op.clone(),
    })?;
    if spec.arity != call.args.len() {
        return Err(Violation::ArityMismatch {
            step,
            op: call.op.clone(),
            expected: spec.arity,
            found: call.args.len(),
        }
        .into());
    }
    let args = call
        .args
        .iter()
        .map(|a| resolve_arg(a, step, numbers, prior, consts))
        .collect::<Result<Vec<_>, _>>()?;
    spec.apply(&args).map_err(|message| EvalError::Domain { step, message })
}

pub fn evaluate(
    p: &Program,
    numbers: &[f64],
    registry: &OpRegistry,
    consts: &ConstTable,
) -> Result<EvalTrace, EvalError> {
    if p.is_empty() {
        return Err(Violation::EmptyProgram.into());
    }
    let mut step_values = Vec::with_capacity(p.len());
    for (step, call) in p.calls.iter().enumerate() {
        let v = eval_call(call, step, numbers, &step_values, registry, consts)?;
        step_values.push(v);
    }
    let final_value = *step_values.last().expect("non-empty");
    Ok(EvalTrace {
        step_values,
        final_value,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundProgram {
    pub program: Program,
    /// (call, argument position) of literals that matched nothing.
    pub unresolved: Vec<(usize, usize)>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= BIND_EPS
}

/// Rewrites literal arguments into references: problem numbers first
/// (first unused match, then any match), then earlier call outputs, then
/// table constants. Unmatched literals stay and are listed in `unresolved`.
pub fn bind_literals(
    p: &Program,
    numbers: &[f64],
    consts: &ConstTable,
    registry: &OpRegistry,
) -> Result<BoundProgram, EvalError> {
    let mut used = vec![false; numbers.len()];
    let mut calls = Vec::with_capacity(p.len());
    let mut values: Vec<Result<f64, EvalError>> = Vec::with_capacity(p.len());
    let mut unresolved = Vec::new();

    for (step, call) in p.calls.iter().enumerate() {
        let mut args = Vec::with_capacity(call.args.len());
        for (pos, arg) in call.args.iter().enumerate() {
            let ArgRef::Literal(v) = *arg else {
                if let ArgRef::ProblemNumber(i) = arg {
                    if let Some(u) = used.get_mut(*i) {
                        *u = true;
                    }
                }
                args.push(arg.clone());
                continue;
            };
            let number = (0..numbers.len())
                .find(|&i| !used[i] && close(numbers[i], v))
                .or_else(|| (0..numbers.len()).find(|&i| close(numbers[i], v)));
            if let Some(i) = number {
                used[i] = true;
                args.push(ArgRef::ProblemNumber(i));
                continue;
            }
            let mut inter = None;
            for (k, val) in values.iter().enumerate() {
                match val {
                    Ok(x) if close(*x, v) => {
                        inter = Some(k);
                        break;
                    }
                    Ok(_) => {}
                    Err(e) => return Err(e.clone()),
                }
            }
            if let Some(k) = inter {
                args.push(ArgRef::Intermediate(k));
                continue;
            }
            if let Some((name, _)) = consts.iter().find(|(_, c)| close(*c, v)) {
                args.push(ArgRef::Constant(name.to_string()));
                continue;
            }
            unresolved.push((step, pos));
            args.push(ArgRef::Literal(v));
        }
        let bound = OpCall::new(call.op.clone(), args);
        let prior: Vec<f64> = values.iter().map(|r| r.as_ref().copied().unwrap_or(f64::NAN)).collect();
        let value = match values.iter().find_map(|r| r.as_ref().err()) {
            Some(e) => Err(e.clone()),
            None => eval_call(&bound, step, numbers, &prior, registry, consts),
        };
        values.push(value);
        calls.push(bound);
    }
    Ok(BoundProgram {
        program: Program::new(calls),
        unresolved,
    })
}

/// True when the program's intermediate references look 1-based: the
/// smallest is `#1` and the refs are only sound after subtracting one.
pub fn looks_one_based(p: &Program) -> bool {
    let refs: Vec<(usize, usize)> = p
        .args()
        .filter_map(|(step, a)| match a {
            ArgRef::Intermediate(k) => Some((step, *k)),
            _ => None,
        })
        .collect();
    let Some(min) = refs.iter().map(|(_, k)| *k).min() else {
        return false;
    };
    let zero_ok = refs.iter().all(|(s, k)| k < s);
    let one_ok = refs.iter().all(|(s, k)| *k >= 1 && k - 1 < *s);
    min == 1 && !zero_ok && one_ok
}

/// Converts 1-based intermediate references to 0-based.
pub fn shift_to_zero_based(p: &Program) -> Program {
    let calls = p
        .calls
        .iter()
        .map(|c| {
            let args = c
                .args
                .iter()
                .map(|a| match a {
                    ArgRef::Intermediate(k) => ArgRef::Intermediate(k.saturating_sub(1)),
                    other => other.clone(),
                })
                .collect();
            OpCall::new(c.op.clone(), args)
        })
        .collect();
    Program::new(calls)
}
