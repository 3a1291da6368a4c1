use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::base_values;
use super::rationale::{Expression, RationaleTrace};
use crate::opcore::{ArgRef, ConstTable, OpCall, OpRegistry, OpSpec, Program};
use crate::Tolerance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub max_len: usize,
    /// Extra steps allowed after the last rationale number to reach the
    /// answer. Without rationale numbers the search runs free up to `max_len`.
    pub completion_steps: usize,
    pub max_states: usize,
    pub max_candidates: usize,
    pub rationale_tol: Tolerance,
    pub answer_tol: Tolerance,
    /// Constant names offered as arguments; `None` offers the whole table.
    pub constants: Option<Vec<String>>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_len: 8,
            completion_steps: 0,
            max_states: 200_000,
            max_candidates: 5,
            rationale_tol: Tolerance::new(1e-6, 1e-4),
            answer_tol: Tolerance::new(0.01, 0.01),
            constants: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("search budget exceeded: {states} live states (cap {cap})")]
    SearchBudgetExceeded { states: usize, cap: usize },
    #[error("invalid search input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateStatus {
    Accepted,
    RejectedTooMany,
    RejectedUnreachable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateProgramSet {
    /// Distinct programs reaching the answer, in discovery order.
    pub programs: Vec<Program>,
    pub status: CandidateStatus,
}

#[derive(Clone)]
struct State {
    calls: Vec<OpCall>,
    values: Vec<f64>,
}

impl State {
    fn key(&self) -> String {
        Program::new(self.calls.clone()).to_string()
    }
}

struct Searcher<'a> {
    base: Vec<(f64, ArgRef)>,
    ops: Vec<&'a OpSpec>,
    expressions: &'a [Expression],
    cfg: &'a SearchConfig,
}

/// Calls `f` with every argument tuple of length `arity` over `0..n`;
/// non-decreasing tuples only when `ordered_once`.
fn for_each_tuple(n: usize, arity: usize, ordered_once: bool, mut f: impl FnMut(&[usize])) {
    if n == 0 && arity > 0 {
        return;
    }
    let mut idx = vec![0usize; arity];
    loop {
        f(&idx);
        let mut k = arity;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if idx[k] + 1 < n {
                idx[k] += 1;
                let floor = if ordered_once { idx[k] } else { 0 };
                for slot in &mut idx[k + 1..] {
                    *slot = floor;
                }
                break;
            }
        }
    }
}

impl Searcher<'_> {
    fn available(&self, s: &State) -> Vec<(f64, ArgRef)> {
        let mut out = self.base.clone();
        out.extend(s.values.iter().enumerate().map(|(k, &v)| (v, ArgRef::Intermediate(k))));
        out
    }

    /// A step producing an expression's result must be that expression.
    /// `Some(true)` asks for the two arguments in the written order when
    /// the operation takes them the other way round.
    fn check_expressions(&self, op: &str, args: &[f64], value: f64) -> Option<bool> {
        let tol = &self.cfg.rationale_tol;
        let mut swap = None;
        for e in self.expressions {
            if !tol.is_close(value, e.result) {
                continue;
            }
            if op != e.op.op_name() || args.len() != 2 {
                return None;
            }
            let same = tol.is_close(args[0], e.lhs) && tol.is_close(args[1], e.rhs);
            let swapped = tol.is_close(args[0], e.rhs) && tol.is_close(args[1], e.lhs);
            if !same && !(e.op.is_commutative() && swapped) {
                return None;
            }
            swap.get_or_insert(!same);
        }
        Some(swap.unwrap_or(false))
    }

    /// One-step extensions of `s`, passed to `f` with their value.
    fn extend(&self, s: &State, mut f: impl FnMut(State, f64)) {
        let avail = self.available(s);
        for spec in &self.ops {
            let mut vals = vec![0.0; spec.arity];
            for_each_tuple(avail.len(), spec.arity, spec.commutative, |idx| {
                for (slot, &i) in vals.iter_mut().zip(idx) {
                    *slot = avail[i].0;
                }
                let Ok(v) = spec.apply(&vals) else {
                    return;
                };
                let Some(swap) = self.check_expressions(&spec.name, &vals, v) else {
                    return;
                };
                let mut args: Vec<ArgRef> = idx.iter().map(|&i| avail[i].1.clone()).collect();
                if swap {
                    args.swap(0, 1);
                }
                let mut next = s.clone();
                next.calls.push(OpCall::new(spec.name.clone(), args));
                next.values.push(v);
                f(next, v);
            });
        }
    }
}

fn push_unique(states: &mut Vec<State>, seen: &mut HashSet<String>, s: State) {
    if seen.insert(s.key()) {
        states.push(s);
    }
}

/// Builds programs step by step along the numbers of a worked solution.
///
/// Each rationale number is either already available (problem number,
/// constant or earlier step) or has to be produced by a new step. States
/// that leave a number unexplained are kept as well. Finally, states whose
/// last step hits `answer`, possibly after some free steps, are the
/// candidates. `registry` is the operation set searched.
pub fn dp_annotate(
    problem_numbers: &[f64],
    trace: &RationaleTrace,
    answer: f64,
    registry: &OpRegistry,
    consts: &ConstTable,
    cfg: &SearchConfig,
) -> Result<CandidateProgramSet, SearchError> {
    if !answer.is_finite() {
        return Err(SearchError::InvalidInput("answer is not finite".into()));
    }
    let searcher = Searcher {
        base: base_values(problem_numbers, consts, cfg.constants.as_deref()),
        ops: registry.iter().collect(),
        expressions: &trace.expressions,
        cfg,
    };
    let rtol = &cfg.rationale_tol;
    let mut states = vec![State {
        calls: Vec::new(),
        values: Vec::new(),
    }];
    for &r in &trace.numbers {
        let mut next = Vec::new();
        let mut seen = HashSet::new();
        for s in &states {
            let explained = searcher.available(s).iter().any(|(v, _)| rtol.is_close(*v, r));
            push_unique(&mut next, &mut seen, s.clone());
            if explained || s.calls.len() >= cfg.max_len {
                continue;
            }
            searcher.extend(s, |n, v| {
                if rtol.is_close(v, r) {
                    push_unique(&mut next, &mut seen, n);
                }
            });
            if next.len() > cfg.max_states {
                return Err(SearchError::SearchBudgetExceeded {
                    states: next.len(),
                    cap: cfg.max_states,
                });
            }
        }
        states = next;
    }

    let atol = &cfg.answer_tol;
    let mut found: Vec<Program> = Vec::new();
    let mut found_keys = HashSet::new();
    let mut collect = |s: &State| {
        if s.values.last().is_some_and(|&v| atol.is_close(v, answer)) && found_keys.insert(s.key()) {
            found.push(Program::new(s.calls.clone()));
        }
    };
    states.iter().for_each(&mut collect);
    let free_steps = if trace.numbers.is_empty() {
        cfg.max_len
    } else {
        cfg.completion_steps
    };
    let mut frontier = states;
    for layer in 0..free_steps {
        let last_layer = layer + 1 == free_steps;
        let mut next = Vec::new();
        let mut seen = HashSet::new();
        for s in &frontier {
            if s.calls.len() >= cfg.max_len {
                continue;
            }
            searcher.extend(s, |n, _| {
                collect(&n);
                if !last_layer {
                    push_unique(&mut next, &mut seen, n);
                }
            });
            if next.len() > cfg.max_states {
                return Err(SearchError::SearchBudgetExceeded {
                    states: next.len(),
                    cap: cfg.max_states,
                });
            }
        }
        frontier = next;
    }

    let status = match found.len() {
        0 => CandidateStatus::RejectedUnreachable,
        n if n > cfg.max_candidates => CandidateStatus::RejectedTooMany,
        _ => CandidateStatus::Accepted,
    };
    Ok(CandidateProgramSet {
        programs: found,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::extract_rationale_trace;
    use crate::opcore::{evaluate, parse_program};

    fn arith() -> OpRegistry {
        OpRegistry::shipped()
            .subset(&["add", "subtract", "multiply", "divide"])
            .unwrap()
    }

    fn no_consts() -> SearchConfig {
        SearchConfig {
            constants: Some(vec![]),
            ..SearchConfig::default()
        }
    }

    #[test]
    fn tuples() {
        let mut all = Vec::new();
        for_each_tuple(3, 2, true, |t| all.push(t.to_vec()));
        assert_eq!(all.len(), 6);
        all.clear();
        for_each_tuple(3, 2, false, |t| all.push(t.to_vec()));
        assert_eq!(all.len(), 9);
        all.clear();
        for_each_tuple(0, 1, false, |t| all.push(t.to_vec()));
        assert!(all.is_empty());
    }

    #[test]
    fn average_program_found() {
        let numbers = [85.0, 89.0, 80.0, 95.0, 4.0];
        let trace = extract_rationale_trace(
            "85 + 89 = 174 . 174 + 80 = 254 . 254 + 95 = 349 . 349 / 4 = 87.25",
            &SearchConfig::default().rationale_tol,
        );
        let consts = ConstTable::shipped();
        let reg = OpRegistry::shipped();
        let set = dp_annotate(&numbers, &trace, 87.25, &reg, &consts, &SearchConfig::default()).unwrap();
        let shown: Vec<String> = set.programs.iter().map(|p| p.to_string()).collect();
        assert_eq!(set.status, CandidateStatus::Accepted, "{shown:?}");
        let gold = parse_program("add(n0,n1)|add(#0,n2)|add(#1,n3)|divide(#2,n4)").unwrap();
        assert!(set.programs.contains(&gold), "{shown:?}");
        for p in &set.programs {
            let v = evaluate(p, &numbers, &reg, &consts).unwrap().final_value;
            assert!((v - 87.25).abs() <= 0.8725);
        }
    }

    #[test]
    fn unreachable() {
        let cfg = SearchConfig {
            max_len: 3,
            ..no_consts()
        };
        let set = dp_annotate(
            &[2.0, 3.0],
            &RationaleTrace::default(),
            1e9,
            &arith(),
            &ConstTable::shipped(),
            &cfg,
        )
        .unwrap();
        assert_eq!(set.status, CandidateStatus::RejectedUnreachable);
    }

    #[test]
    fn too_many() {
        let cfg = SearchConfig {
            max_len: 1,
            ..no_consts()
        };
        let set = dp_annotate(
            &[2.0, 2.0, 4.0],
            &RationaleTrace::default(),
            4.0,
            &arith(),
            &ConstTable::shipped(),
            &cfg,
        )
        .unwrap();
        assert_eq!(set.status, CandidateStatus::RejectedTooMany);
        assert_eq!(set.programs.len(), 6);
    }

    #[test]
    fn expression_prunes_other_routes() {
        // 6 reachable as add(n0,n1), multiply(n0,n2), ...; the rationale pins add(2,4)
        let numbers = [2.0, 4.0, 3.0];
        let trace = extract_rationale_trace("2 + 4 = 6", &SearchConfig::default().rationale_tol);
        let set = dp_annotate(&numbers, &trace, 6.0, &arith(), &ConstTable::shipped(), &no_consts()).unwrap();
        assert_eq!(set.programs, vec![parse_program("add(n0,n1)").unwrap()]);
    }

    #[test]
    fn budget() {
        let cfg = SearchConfig {
            max_states: 2,
            ..no_consts()
        };
        let trace = RationaleTrace {
            numbers: vec![5.0],
            expressions: vec![],
        };
        let r = dp_annotate(
            &[1.0, 2.0, 3.0, 4.0],
            &trace,
            5.0,
            &arith(),
            &ConstTable::shipped(),
            &cfg,
        );
        assert!(matches!(r, Err(SearchError::SearchBudgetExceeded { .. })));
    }
}
