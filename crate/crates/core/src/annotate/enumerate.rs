use serde::{Deserialize, Serialize};

use super::base_values;
use super::search::SearchError;
use crate::opcore::{ArgRef, ConstTable, OpCall, OpRegistry, OpSpec, Program};
use crate::Tolerance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnumerateConfig {
    pub max_len: usize,
    pub tolerance: Tolerance,
    /// Constant names offered as arguments; `None` offers the whole table.
    pub constants: Option<Vec<String>>,
    /// Also emit every argument order for commutative operations.
    pub order_variants: bool,
    /// Cap on visited partial programs.
    pub max_nodes: usize,
}

impl Default for EnumerateConfig {
    fn default() -> Self {
        EnumerateConfig {
            max_len: 3,
            tolerance: Tolerance::new(0.01, 0.01),
            constants: None,
            order_variants: false,
            max_nodes: 20_000_000,
        }
    }
}

struct Walk<'a> {
    ops: Vec<&'a OpSpec>,
    values: Vec<(f64, ArgRef)>,
    /// Operation index and start of its arguments in `args`, per call.
    calls: Vec<(usize, usize)>,
    args: Vec<usize>,
    scratch: Vec<f64>,
    target: f64,
    cfg: &'a EnumerateConfig,
    nodes: usize,
    out: Vec<Program>,
}

impl Walk<'_> {
    fn grow(&mut self) -> Result<(), SearchError> {
        if self.calls.len() == self.cfg.max_len {
            return Ok(());
        }
        for k in 0..self.ops.len() {
            let start = self.args.len();
            self.pick(k, start)?;
        }
        Ok(())
    }

    fn pick(&mut self, op: usize, start: usize) -> Result<(), SearchError> {
        let spec = self.ops[op];
        if self.args.len() - start < spec.arity {
            let from = match self.args.last() {
                Some(&last) if self.args.len() > start && spec.commutative && !self.cfg.order_variants => last,
                _ => 0,
            };
            for i in from..self.values.len() {
                self.args.push(i);
                self.pick(op, start)?;
                self.args.pop();
            }
            return Ok(());
        }
        self.nodes += 1;
        if self.nodes > self.cfg.max_nodes {
            return Err(SearchError::SearchBudgetExceeded {
                states: self.nodes,
                cap: self.cfg.max_nodes,
            });
        }
        self.scratch.clear();
        for &i in &self.args[start..] {
            self.scratch.push(self.values[i].0);
        }
        let Ok(v) = spec.apply(&self.scratch) else {
            return Ok(());
        };
        let step = self.calls.len();
        self.calls.push((op, start));
        if self.cfg.tolerance.is_close(v, self.target) {
            let program = self.program();
            self.out.push(program);
        }
        self.values.push((v, ArgRef::Intermediate(step)));
        let r = self.grow();
        self.values.pop();
        self.calls.pop();
        r
    }

    fn program(&self) -> Program {
        let calls = self
            .calls
            .iter()
            .map(|&(op, start)| {
                let spec = self.ops[op];
                let args = self.args[start..start + spec.arity]
                    .iter()
                    .map(|&i| self.values[i].1.clone())
                    .collect();
                OpCall::new(spec.name.clone(), args)
            })
            .collect();
        Program::new(calls)
    }
}

/// Every program of 1 to `max_len` calls over `registry` whose final value
/// is within tolerance of `target`. Depth-first, operations in registry
/// order, arguments in the order problem numbers, constants, earlier steps.
pub fn enumerate_programs(
    numbers: &[f64],
    registry: &OpRegistry,
    consts: &ConstTable,
    target: f64,
    cfg: &EnumerateConfig,
) -> Result<Vec<Program>, SearchError> {
    let mut walk = Walk {
        ops: registry.iter().collect(),
        values: base_values(numbers, consts, cfg.constants.as_deref()),
        calls: Vec::new(),
        args: Vec::new(),
        scratch: Vec::new(),
        target,
        cfg,
        nodes: 0,
        out: Vec::new(),
    };
    walk.grow()?;
    Ok(walk.out)
}
