use std::collections::HashMap;

use serde::{Serialize, Serializer};
use thiserror::Error;

use opprog_core::categorize::{classify, CategoryLexicon};
use opprog_core::datakit::ProblemRecord;
use opprog_core::evalkit::MatchConfig;
use opprog_core::opcore::{evaluate, ArgRef, ConstTable, OpCall, OpRegistry, Program};
use opprog_core::Category;

use crate::events::{Event, EventLog};

fn arg_text<S: Serializer>(a: &ArgRef, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(a)
}

fn args_text<S: Serializer>(args: &[ArgRef], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(args.iter().map(ToString::to_string))
}

fn program_text<S: Serializer>(p: &Program, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(p)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ServiceError {
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("unknown validation task `{0}`")]
    UnknownTask(String),
    #[error("`{0}` is not a valid argument in this session")]
    InvalidArgument(String),
    #[error("operation `{0}` is not available for this problem")]
    UnknownOperation(String),
    #[error("`{op}` takes {expected} arguments, got {found}")]
    ArityMismatch { op: String, expected: usize, found: usize },
    #[error("{0}")]
    DomainError(String),
    #[error("nothing to undo or submit")]
    EmptyHistory,
    #[error("session is no longer open")]
    SessionClosed,
    #[error("annotator already voted on this task")]
    DuplicateVote,
    #[error("annotator `{0}` is not trusted")]
    UntrustedAnnotator(String),
    #[error("annotators cannot validate their own submissions")]
    OwnSubmission,
    #[error("task is already resolved")]
    TaskClosed,
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("event log: {0}")]
    Storage(String),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownProblem(_) => "unknown_problem",
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::UnknownTask(_) => "unknown_task",
            ServiceError::InvalidArgument(_) => "invalid_argument",
            ServiceError::UnknownOperation(_) => "unknown_operation",
            ServiceError::ArityMismatch { .. } => "arity_mismatch",
            ServiceError::DomainError(_) => "domain_error",
            ServiceError::EmptyHistory => "empty_history",
            ServiceError::SessionClosed => "session_closed",
            ServiceError::DuplicateVote => "duplicate_vote",
            ServiceError::UntrustedAnnotator(_) => "untrusted_annotator",
            ServiceError::OwnSubmission => "own_submission",
            ServiceError::TaskClosed => "task_closed",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::Storage(_) => "storage",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Open,
    Submitted,
    Abandoned,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidArg {
    #[serde(serialize_with = "arg_text")]
    pub arg: ArgRef,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryItem {
    pub op: String,
    #[serde(serialize_with = "args_text")]
    pub args: Vec<ArgRef>,
    pub value: f64,
}

impl HistoryItem {
    pub fn call(&self) -> OpCall {
        OpCall::new(self.op.clone(), self.args.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Session {
    pub session_id: String,
    pub problem_id: String,
    pub annotator: String,
    pub category: Category,
    pub op_palette: Vec<String>,
    /// Problem numbers, then category constants, then one entry per step.
    pub valid_args: Vec<ValidArg>,
    pub history: Vec<HistoryItem>,
    pub status: SessionStatus,
    #[serde(skip)]
    seed_len: usize,
}

impl Session {
    pub fn program(&self) -> Program {
        Program::new(self.history.iter().map(HistoryItem::call).collect())
    }

    /// Entries present before any operation was applied.
    pub fn seed_args(&self) -> &[ValidArg] {
        &self.valid_args[..self.seed_len]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum GateRejection {
    NoProblemNumber,
    NonNumericAnswer,
    NotClose {
        final_value: f64,
        expected: f64,
        allowed: f64,
    },
}

impl GateRejection {
    pub fn message(&self) -> String {
        match self {
            GateRejection::NoProblemNumber => "the program must use at least one number from the problem".into(),
            GateRejection::NonNumericAnswer => "the correct option has no numeric value".into(),
            GateRejection::NotClose {
                final_value, expected, ..
            } => format!("final value {final_value} is not close to the correct answer {expected}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubmitVerdict {
    pub accepted: bool,
    pub final_value: f64,
    pub rejection: Option<GateRejection>,
    pub message: Option<String>,
    pub task_id: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Pending,
    Accepted,
    Rejected,
    /// Submitter lost trust before validation finished; the problem is
    /// open for annotation again.
    Requeued,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Vote {
    pub annotator: String,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationTask {
    pub task_id: String,
    pub problem_id: String,
    pub session_id: String,
    pub submitter: String,
    #[serde(serialize_with = "program_text")]
    pub program: Program,
    pub votes: Vec<Vote>,
    pub resolution: Resolution,
    pub trust_threshold: f64,
}

/// 2 of the first 3 votes decide.
fn resolve(votes: &[Vote]) -> Resolution {
    let first = &votes[..votes.len().min(3)];
    let yes = first.iter().filter(|v| v.valid).count();
    if yes >= 2 {
        Resolution::Accepted
    } else if first.len() - yes >= 2 {
        Resolution::Rejected
    } else {
        Resolution::Pending
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepView {
    pub call: String,
    pub value: f64,
}

/// A task as shown to a validator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskView {
    pub task: ValidationTask,
    pub problem: String,
    pub options: Vec<String>,
    pub steps: Vec<StepView>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnotatorRecord {
    pub annotator_id: String,
    pub test_correct: u32,
    pub test_total: u32,
    pub trusted: bool,
}

pub struct Platform {
    problems: Vec<ProblemRecord>,
    problem_index: HashMap<String, usize>,
    registry: OpRegistry,
    consts: ConstTable,
    lexicon: CategoryLexicon,
    gate: MatchConfig,
    trust_threshold: f64,
    sessions: HashMap<String, Session>,
    session_count: usize,
    tasks: Vec<ValidationTask>,
    annotators: HashMap<String, AnnotatorRecord>,
    log: EventLog,
    replaying: bool,
}

impl Platform {
    pub fn new(
        problems: Vec<ProblemRecord>,
        registry: OpRegistry,
        consts: ConstTable,
        lexicon: CategoryLexicon,
        gate: MatchConfig,
        trust_threshold: f64,
    ) -> Self {
        let mut problem_index = HashMap::new();
        for (i, p) in problems.iter().enumerate() {
            problem_index.entry(p.id.clone()).or_insert(i);
        }
        Platform {
            problems,
            problem_index,
            registry,
            consts,
            lexicon,
            gate,
            trust_threshold,
            sessions: HashMap::new(),
            session_count: 0,
            tasks: Vec::new(),
            annotators: HashMap::new(),
            log: EventLog::memory(),
            replaying: false,
        }
    }

    pub fn with_log(mut self, log: EventLog) -> Self {
        self.log = log;
        self
    }

    /// Re-applies recorded events in order.
    pub fn replay(&mut self, events: &[Event]) -> Result<(), ServiceError> {
        self.replaying = true;
        let result = events.iter().try_for_each(|e| self.apply_event(e));
        self.replaying = false;
        result
    }

    fn apply_event(&mut self, e: &Event) -> Result<(), ServiceError> {
        match e {
            Event::SessionCreated { problem_id, annotator } => self.create_session(problem_id, annotator).map(drop),
            Event::OpApplied { session_id, op, args } => {
                let args = args
                    .iter()
                    .map(|a| a.parse::<ArgRef>().map_err(|e| ServiceError::BadRequest(e.to_string())))
                    .collect::<Result<Vec<_>, _>>()?;
                self.apply_operation(session_id, op, &args).map(drop)
            }
            Event::Undone { session_id } => self.undo(session_id).map(drop),
            Event::Submitted { session_id } => match self.submit(session_id)? {
                v if v.accepted => Ok(()),
                v => Err(ServiceError::Storage(format!(
                    "replayed submission of {session_id} was rejected: {}",
                    v.message.unwrap_or_default()
                ))),
            },
            Event::VoteCast {
                task_id,
                annotator,
                valid,
            } => self.cast_vote(task_id, annotator, *valid).map(drop),
            Event::TestAnswer { annotator, correct } => {
                self.record_test_answer(annotator, *correct)?;
                Ok(())
            }
        }
    }

    fn record(&mut self, event: Event) -> Result<(), ServiceError> {
        if self.replaying {
            self.log.remember(event);
            Ok(())
        } else {
            self.log.append(event).map_err(|e| ServiceError::Storage(e.to_string()))
        }
    }

    pub fn events(&self) -> &[Event] {
        self.log.events()
    }

    pub fn registry(&self) -> &OpRegistry {
        &self.registry
    }

    pub fn consts(&self) -> &ConstTable {
        &self.consts
    }

    pub fn gate(&self) -> &MatchConfig {
        &self.gate
    }

    pub fn problems(&self) -> &[ProblemRecord] {
        &self.problems
    }

    pub fn problem(&self, id: &str) -> Result<&ProblemRecord, ServiceError> {
        self.problem_index
            .get(id)
            .map(|&i| &self.problems[i])
            .ok_or_else(|| ServiceError::UnknownProblem(id.to_string()))
    }

    pub fn category_of(&self, problem: &ProblemRecord) -> Category {
        problem
            .category
            .unwrap_or_else(|| classify(&problem.problem, &self.lexicon))
    }

    pub fn session(&self, id: &str) -> Result<&Session, ServiceError> {
        self.sessions
            .get(id)
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    fn session_mut(&mut self, id: &str) -> Result<&mut Session, ServiceError> {
        self.sessions
            .get_mut(id)
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn sessions(&self) -> impl Iterator<Item = &Session> {
        self.sessions.values()
    }

    pub fn tasks(&self) -> &[ValidationTask] {
        &self.tasks
    }

    pub fn task(&self, id: &str) -> Result<&ValidationTask, ServiceError> {
        self.task_index(id).map(|i| &self.tasks[i])
    }

    fn task_index(&self, id: &str) -> Result<usize, ServiceError> {
        self.tasks
            .iter()
            .position(|t| t.task_id == id)
            .ok_or_else(|| ServiceError::UnknownTask(id.to_string()))
    }

    /// Problems with their gate-accepted program, for every submission not
    /// sent back to the pool.
    pub fn persisted_records(&self) -> Vec<ProblemRecord> {
        self.tasks
            .iter()
            .filter(|t| t.resolution != Resolution::Requeued)
            .filter_map(|t| {
                let mut r = self.problem(&t.problem_id).ok()?.clone();
                r.program = Some(t.program.clone());
                Some(r)
            })
            .collect()
    }

    /// Problem ids with no pending or accepted submission.
    pub fn open_pool(&self) -> Vec<&str> {
        self.problems
            .iter()
            .map(|p| p.id.as_str())
            .filter(|id| {
                !self
                    .tasks
                    .iter()
                    .any(|t| t.problem_id == *id && matches!(t.resolution, Resolution::Pending | Resolution::Accepted))
            })
            .collect()
    }

    pub fn create_session(&mut self, problem_id: &str, annotator: &str) -> Result<&Session, ServiceError> {
        let problem = self.problem(problem_id)?;
        let category = self.category_of(problem);
        let mut valid_args: Vec<ValidArg> = problem
            .numbers()
            .into_iter()
            .enumerate()
            .map(|(i, value)| ValidArg {
                arg: ArgRef::ProblemNumber(i),
                value,
            })
            .collect();
        for name in self.consts.in_scope(category) {
            if let Some(value) = self.consts.resolve(&name) {
                valid_args.push(ValidArg {
                    arg: ArgRef::Constant(name),
                    value,
                });
            }
        }
        let session_id = format!("s{}", self.session_count + 1);
        let session = Session {
            session_id: session_id.clone(),
            problem_id: problem_id.to_string(),
            annotator: annotator.to_string(),
            category,
            op_palette: self.registry.palette(category),
            seed_len: valid_args.len(),
            valid_args,
            history: Vec::new(),
            status: SessionStatus::Open,
        };
        self.record(Event::SessionCreated {
            problem_id: problem_id.to_string(),
            annotator: annotator.to_string(),
        })?;
        self.session_count += 1;
        Ok(self.sessions.entry(session_id).or_insert(session))
    }

    fn open_session(&self, id: &str) -> Result<&Session, ServiceError> {
        let s = self.session(id)?;
        if s.status != SessionStatus::Open {
            return Err(ServiceError::SessionClosed);
        }
        Ok(s)
    }

    pub fn apply_operation(&mut self, session_id: &str, op: &str, args: &[ArgRef]) -> Result<&Session, ServiceError> {
        let s = self.open_session(session_id)?;
        let spec = self
            .registry
            .get(op)
            .filter(|_| s.op_palette.iter().any(|p| p == op))
            .ok_or_else(|| ServiceError::UnknownOperation(op.to_string()))?;
        if spec.arity != args.len() {
            return Err(ServiceError::ArityMismatch {
                op: op.to_string(),
                expected: spec.arity,
                found: args.len(),
            });
        }
        let values = args
            .iter()
            .map(|a| {
                s.valid_args
                    .iter()
                    .find(|v| &v.arg == a)
                    .map(|v| v.value)
                    .ok_or_else(|| ServiceError::InvalidArgument(a.to_string()))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let value = spec.apply(&values).map_err(ServiceError::DomainError)?;
        self.record(Event::OpApplied {
            session_id: session_id.to_string(),
            op: op.to_string(),
            args: args.iter().map(ToString::to_string).collect(),
        })?;
        let s = self.session_mut(session_id)?;
        let step = s.history.len();
        s.history.push(HistoryItem {
            op: op.to_string(),
            args: args.to_vec(),
            value,
        });
        s.valid_args.push(ValidArg {
            arg: ArgRef::Intermediate(step),
            value,
        });
        Ok(s)
    }

    pub fn undo(&mut self, session_id: &str) -> Result<&Session, ServiceError> {
        if self.open_session(session_id)?.history.is_empty() {
            return Err(ServiceError::EmptyHistory);
        }
        self.record(Event::Undone {
            session_id: session_id.to_string(),
        })?;
        let s = self.session_mut(session_id)?;
        s.history.pop();
        s.valid_args.pop();
        Ok(s)
    }

    /// Checks the gate; accepted programs become validation tasks.
    pub fn submit(&mut self, session_id: &str) -> Result<SubmitVerdict, ServiceError> {
        let s = self.open_session(session_id)?;
        let Some(last) = s.history.last() else {
            return Err(ServiceError::EmptyHistory);
        };
        let final_value = last.value;
        let uses_number = s
            .history
            .iter()
            .flat_map(|h| &h.args)
            .any(|a| matches!(a, ArgRef::ProblemNumber(_)));
        let problem = self.problem(&s.problem_id)?;
        let tol = self.gate.tolerance();
        let rejection = if !uses_number {
            Some(GateRejection::NoProblemNumber)
        } else {
            match problem.correct_value() {
                None => Some(GateRejection::NonNumericAnswer),
                Some(expected) if !tol.is_close(final_value, expected) => Some(GateRejection::NotClose {
                    final_value,
                    expected,
                    allowed: tol.bound(expected),
                }),
                Some(_) => None,
            }
        };
        if let Some(r) = rejection {
            return Ok(SubmitVerdict {
                accepted: false,
                final_value,
                message: Some(r.message()),
                rejection: Some(r),
                task_id: None,
            });
        }
        let task = ValidationTask {
            task_id: format!("t{}", self.tasks.len() + 1),
            problem_id: s.problem_id.clone(),
            session_id: session_id.to_string(),
            submitter: s.annotator.clone(),
            program: s.program(),
            votes: Vec::new(),
            resolution: if self.annotator(&s.annotator).trusted {
                Resolution::Pending
            } else {
                Resolution::Requeued
            },
            trust_threshold: self.trust_threshold,
        };
        self.record(Event::Submitted {
            session_id: session_id.to_string(),
        })?;
        self.session_mut(session_id)?.status = SessionStatus::Submitted;
        let task_id = task.task_id.clone();
        self.tasks.push(task);
        Ok(SubmitVerdict {
            accepted: true,
            final_value,
            rejection: None,
            message: None,
            task_id: Some(task_id),
        })
    }

    pub fn annotator(&self, id: &str) -> AnnotatorRecord {
        self.annotators.get(id).cloned().unwrap_or_else(|| AnnotatorRecord {
            annotator_id: id.to_string(),
            test_correct: 0,
            test_total: 0,
            trusted: true,
        })
    }

    fn require_trusted(&self, annotator: &str) -> Result<(), ServiceError> {
        if self.annotator(annotator).trusted {
            Ok(())
        } else {
            Err(ServiceError::UntrustedAnnotator(annotator.to_string()))
        }
    }

    /// Oldest pending task the annotator neither submitted nor voted on.
    pub fn next_validation_task(&self, annotator: &str) -> Result<Option<TaskView>, ServiceError> {
        self.require_trusted(annotator)?;
        let Some(task) = self.tasks.iter().find(|t| {
            t.resolution == Resolution::Pending
                && t.submitter != annotator
                && t.votes.iter().all(|v| v.annotator != annotator)
        }) else {
            return Ok(None);
        };
        let problem = self.problem(&task.problem_id)?;
        let trace = evaluate(&task.program, &problem.numbers(), &self.registry, &self.consts)
            .map_err(|e| ServiceError::DomainError(e.to_string()))?;
        let steps = task
            .program
            .calls
            .iter()
            .zip(trace.step_values)
            .map(|(c, value)| StepView {
                call: c.to_string(),
                value,
            })
            .collect();
        Ok(Some(TaskView {
            task: task.clone(),
            problem: problem.problem.clone(),
            options: problem.options.clone(),
            steps,
        }))
    }

    pub fn cast_vote(&mut self, task_id: &str, annotator: &str, valid: bool) -> Result<&ValidationTask, ServiceError> {
        let i = self.task_index(task_id)?;
        self.require_trusted(annotator)?;
        let task = &self.tasks[i];
        if task.submitter == annotator {
            return Err(ServiceError::OwnSubmission);
        }
        if task.votes.iter().any(|v| v.annotator == annotator) {
            return Err(ServiceError::DuplicateVote);
        }
        if task.resolution != Resolution::Pending {
            return Err(ServiceError::TaskClosed);
        }
        self.record(Event::VoteCast {
            task_id: task_id.to_string(),
            annotator: annotator.to_string(),
            valid,
        })?;
        let task = &mut self.tasks[i];
        task.votes.push(Vote {
            annotator: annotator.to_string(),
            valid,
        });
        task.resolution = resolve(&task.votes);
        Ok(task)
    }

    /// Updates the annotator's test accuracy. Falling below the threshold
    /// sends their unvalidated submissions back to the pool.
    pub fn record_test_answer(&mut self, annotator: &str, correct: bool) -> Result<AnnotatorRecord, ServiceError> {
        self.record(Event::TestAnswer {
            annotator: annotator.to_string(),
            correct,
        })?;
        let mut rec = self.annotator(annotator);
        rec.test_total += 1;
        rec.test_correct += u32::from(correct);
        rec.trusted = f64::from(rec.test_correct) / f64::from(rec.test_total) >= self.trust_threshold;
        if !rec.trusted {
            for t in self.tasks.iter_mut().filter(|t| t.submitter == annotator) {
                if t.resolution == Resolution::Pending {
                    t.resolution = Resolution::Requeued;
                }
            }
        }
        self.annotators.insert(annotator.to_string(), rec.clone());
        Ok(rec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn average_problem() -> ProblemRecord {
        ProblemRecord {
            id: "avg".into(),
            problem: "a student scored 85 , 89 , 80 and 95 out of 100 in 4 tests . what is the average score ?".into(),
            rationale: String::new(),
            options: ["a ) 85", "b ) 86.5", "c ) 87.25", "d ) 88", "e ) 89.75"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            correct: 'c',
            category: Some(Category::General),
            program: None,
        }
    }

    fn platform() -> Platform {
        Platform::new(
            vec![average_problem()],
            OpRegistry::shipped(),
            ConstTable::shipped(),
            CategoryLexicon::shipped(),
            MatchConfig::default(),
            0.8,
        )
    }

    fn args(list: &[&str]) -> Vec<ArgRef> {
        list.iter().map(|a| a.parse().unwrap()).collect()
    }

    fn annotate(p: &mut Platform, who: &str) -> String {
        let sid = p.create_session("avg", who).unwrap().session_id.clone();
        p.apply_operation(&sid, "add", &args(&["n0", "n1"])).unwrap();
        p.apply_operation(&sid, "add", &args(&["#0", "n2"])).unwrap();
        p.apply_operation(&sid, "add", &args(&["#1", "n3"])).unwrap();
        p.apply_operation(&sid, "divide", &args(&["#2", "n5"])).unwrap();
        sid
    }

    #[test]
    fn average_session() {
        let mut p = platform();
        let s = p.create_session("avg", "ann").unwrap();
        let seeds: Vec<f64> = s.valid_args.iter().map(|v| v.value).collect();
        for v in [85.0, 89.0, 80.0, 95.0, 100.0, 4.0] {
            assert!(seeds.contains(&v));
        }
        let sid = annotate(&mut p, "ann");
        let values: Vec<f64> = p.session(&sid).unwrap().history.iter().map(|h| h.value).collect();
        assert_eq!(values, vec![174.0, 254.0, 349.0, 87.25]);
        let v = p.submit(&sid).unwrap();
        assert!(v.accepted);
        assert_eq!(p.session(&sid).unwrap().status, SessionStatus::Submitted);
        assert_eq!(
            p.persisted_records()[0].program.as_ref().unwrap().to_string(),
            "add(n0,n1)|add(#0,n2)|add(#1,n3)|divide(#2,n5)"
        );
    }

    #[test]
    fn apply_errors_leave_session_unchanged() {
        let mut p = platform();
        let sid = p.create_session("avg", "ann").unwrap().session_id.clone();
        let before = p.session(&sid).unwrap().clone();
        assert_eq!(
            p.apply_operation(&sid, "add", &args(&["n0", "87"])).unwrap_err().code(),
            "invalid_argument"
        );
        assert_eq!(
            p.apply_operation(&sid, "add", &args(&["n0", "#0"])).unwrap_err().code(),
            "invalid_argument"
        );
        assert_eq!(
            p.apply_operation(&sid, "circle_area", &args(&["n0"]))
                .unwrap_err()
                .code(),
            "unknown_operation"
        );
        assert_eq!(
            p.apply_operation(&sid, "add", &args(&["n0"])).unwrap_err().code(),
            "arity_mismatch"
        );
        p.apply_operation(&sid, "subtract", &args(&["n0", "n0"])).unwrap();
        let mid = p.session(&sid).unwrap().clone();
        assert_eq!(
            p.apply_operation(&sid, "divide", &args(&["n0", "#0"]))
                .unwrap_err()
                .code(),
            "domain_error"
        );
        assert_eq!(p.session(&sid).unwrap(), &mid);
        p.undo(&sid).unwrap();
        assert_eq!(p.session(&sid).unwrap(), &before);
        assert_eq!(p.undo(&sid).unwrap_err(), ServiceError::EmptyHistory);
        assert_eq!(p.create_session("nope", "ann").unwrap_err().code(), "unknown_problem");
    }

    #[test]
    fn gate_rejections() {
        let mut p = platform();
        let sid = p.create_session("avg", "ann").unwrap().session_id.clone();
        p.apply_operation(&sid, "multiply", &args(&["const_100", "const_1"]))
            .unwrap();
        let v = p.submit(&sid).unwrap();
        assert_eq!(v.rejection, Some(GateRejection::NoProblemNumber));
        p.undo(&sid).unwrap();
        p.apply_operation(&sid, "max", &args(&["n2", "n2"])).unwrap();
        assert!(matches!(
            p.submit(&sid).unwrap().rejection,
            Some(GateRejection::NotClose { .. })
        ));
        assert_eq!(p.session(&sid).unwrap().status, SessionStatus::Open);
        assert!(p.tasks().is_empty());
    }

    #[test]
    fn voting() {
        let mut p = platform();
        let sid = annotate(&mut p, "ann");
        let tid = p.submit(&sid).unwrap().task_id.unwrap();
        assert_eq!(p.cast_vote(&tid, "ann", true).unwrap_err(), ServiceError::OwnSubmission);
        assert!(p.next_validation_task("ann").unwrap().is_none());
        let view = p.next_validation_task("v1").unwrap().unwrap();
        assert_eq!(view.steps.last().unwrap().value, 87.25);
        p.cast_vote(&tid, "v1", true).unwrap();
        assert_eq!(p.cast_vote(&tid, "v1", false).unwrap_err(), ServiceError::DuplicateVote);
        assert_eq!(p.cast_vote(&tid, "v2", true).unwrap().resolution, Resolution::Accepted);
        assert_eq!(p.cast_vote(&tid, "v3", false).unwrap_err(), ServiceError::TaskClosed);
    }

    #[test]
    fn vote_orders() {
        for mask in 0..8u8 {
            let votes: Vec<Vote> = (0..3)
                .map(|k| Vote {
                    annotator: format!("v{k}"),
                    valid: mask & (1 << k) != 0,
                })
                .collect();
            let expected = if mask.count_ones() >= 2 {
                Resolution::Accepted
            } else {
                Resolution::Rejected
            };
            assert_eq!(resolve(&votes), expected);
        }
        let split = [
            Vote {
                annotator: "a".into(),
                valid: true,
            },
            Vote {
                annotator: "b".into(),
                valid: false,
            },
        ];
        assert_eq!(resolve(&split), Resolution::Pending);
    }

    #[test]
    fn trust() {
        let mut p = platform();
        assert!(p.annotator("x").trusted);
        for k in 0..10 {
            p.record_test_answer("good", k != 0).unwrap();
        }
        assert!(p.annotator("good").trusted);
        let sid = annotate(&mut p, "bad");
        let tid = p.submit(&sid).unwrap().task_id.unwrap();
        for k in 0..10 {
            p.record_test_answer("bad", k < 7).unwrap();
        }
        assert!(!p.annotator("bad").trusted);
        assert_eq!(p.task(&tid).unwrap().resolution, Resolution::Requeued);
        assert_eq!(p.open_pool(), vec!["avg"]);
        assert!(matches!(
            p.next_validation_task("bad"),
            Err(ServiceError::UntrustedAnnotator(_))
        ));
    }

    #[test]
    fn replay_rebuilds_state() {
        let mut p = platform();
        let sid = annotate(&mut p, "ann");
        p.undo(&sid).unwrap();
        p.apply_operation(&sid, "divide", &args(&["#2", "n5"])).unwrap();
        let tid = p.submit(&sid).unwrap().task_id.unwrap();
        p.cast_vote(&tid, "v1", false).unwrap();
        p.record_test_answer("v1", true).unwrap();
        let mut q = platform();
        q.replay(p.events()).unwrap();
        assert_eq!(q.session(&sid).unwrap(), p.session(&sid).unwrap());
        assert_eq!(q.tasks(), p.tasks());
        assert_eq!(q.annotator("v1"), p.annotator("v1"));
        assert_eq!(q.events(), p.events());
    }
}
