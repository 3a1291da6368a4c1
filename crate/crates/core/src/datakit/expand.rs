use serde::{Deserialize, Serialize};

use super::dedup::{masked_tokens, DedupConfig, DedupError, NearIndex};
use super::validate::{validate_record, InvalidReason, Verdict};
use super::ProblemRecord;
use crate::evalkit::MatchConfig;
use crate::opcore::{ConstTable, OpRegistry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RejectReason {
    /// The donor cites `n{index}` but the target has only `count` numbers.
    IndexOutOfRange {
        index: usize,
        count: usize,
    },
    CountMismatch {
        donor: usize,
        target: usize,
    },
    Invalid {
        reason: InvalidReason,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub target: String,
    pub donor: String,
    pub distance: usize,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    /// Targets with at least one donor in range.
    pub attempted: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub rejections: Vec<Rejection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionOutput {
    pub records: Vec<ProblemRecord>,
    pub report: ExpansionReport,
}

/// Copies programs from annotated records onto unannotated near-duplicates.
/// `n{i}` keeps its position, so it now names the target's i-th number.
/// Donors are tried nearest first (ties by input order); the first one whose
/// program validates against the target is kept.
pub fn expand_annotations(
    annotated: &[ProblemRecord],
    unannotated: &[ProblemRecord],
    registry: &OpRegistry,
    consts: &ConstTable,
    match_cfg: &MatchConfig,
    dedup_cfg: &DedupConfig,
) -> Result<ExpansionOutput, DedupError> {
    let donors: Vec<&ProblemRecord> = annotated.iter().filter(|r| r.program.is_some()).collect();
    let mut index = NearIndex::new(dedup_cfg);
    for d in &donors {
        index.add(&masked_tokens(&d.problem));
    }
    let donor_counts: Vec<usize> = donors.iter().map(|d| d.numbers().len()).collect();
    let mut records = Vec::new();
    let mut report = ExpansionReport::default();
    for target in unannotated {
        let mut near = index.query(&masked_tokens(&target.problem))?;
        if near.is_empty() {
            continue;
        }
        near.sort_by_key(|&(i, d)| (d, i));
        report.attempted += 1;
        let count = target.numbers().len();
        let mut accepted = None;
        for (i, distance) in near {
            let donor = donors[i];
            let program = donor.program.as_ref().expect("donors carry programs");
            let reason = match program.max_problem_ref() {
                Some(index) if index >= count => RejectReason::IndexOutOfRange { index, count },
                _ if donor_counts[i] != count => RejectReason::CountMismatch {
                    donor: donor_counts[i],
                    target: count,
                },
                _ => {
                    let candidate = ProblemRecord {
                        program: Some(program.clone()),
                        ..target.clone()
                    };
                    match validate_record(&candidate, registry, consts, match_cfg) {
                        Verdict::Valid { .. } => {
                            accepted = Some(candidate);
                            break;
                        }
                        Verdict::Invalid(reason) => RejectReason::Invalid { reason },
                    }
                }
            };
            report.rejections.push(Rejection {
                target: target.id.clone(),
                donor: donor.id.clone(),
                distance,
                reason,
            });
        }
        match accepted {
            Some(r) => {
                report.accepted += 1;
                records.push(r);
            }
            None => report.rejected += 1,
        }
    }
    Ok(ExpansionOutput { records, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::parse_program;

    fn rec(id: &str, side: u32, area: u32, options: [&str; 5], correct: char, program: Option<&str>) -> ProblemRecord {
        ProblemRecord {
            id: id.into(),
            problem: format!("a rectangular field is to be fenced on three sides leaving a side of {side} feet uncovered . if the area of the field is {area} sq . feet , how many feet of fencing will be required ?"),
            rationale: String::new(),
            options: options.iter().map(|s| s.to_string()).collect(),
            correct,
            category: None,
            program: program.map(|p| parse_program(p).unwrap()),
        }
    }

    const FENCING: &str = "divide(n1,n0)|multiply(#0,const_2)|add(n0,#1)";

    fn run(donors: &[ProblemRecord], targets: &[ProblemRecord]) -> ExpansionOutput {
        expand_annotations(
            donors,
            targets,
            &OpRegistry::shipped(),
            &ConstTable::shipped(),
            &MatchConfig::default(),
            &DedupConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn rebinds_positionally() {
        let donor = rec(
            "d",
            20,
            10,
            ["a ) 21", "b ) 22", "c ) 23", "d ) 24", "e ) 25"],
            'a',
            Some(FENCING),
        );
        // 12 / 30 * 2 + 30
        let target = rec(
            "t",
            30,
            12,
            ["a ) 28", "b ) 29", "c ) 30.8", "d ) 32", "e ) 34"],
            'c',
            None,
        );
        let out = run(&[donor], &[target]);
        assert_eq!(out.report.accepted, 1);
        assert_eq!(out.records[0].program.as_ref().unwrap().to_string(), FENCING);
        assert_eq!(out.records[0].id, "t");
    }

    #[test]
    fn wrong_answer_rejected() {
        let donor = rec(
            "d",
            20,
            10,
            ["a ) 21", "b ) 22", "c ) 23", "d ) 24", "e ) 25"],
            'a',
            Some(FENCING),
        );
        let target = rec(
            "t",
            30,
            12,
            ["a ) 28", "b ) 29", "c ) 30.8", "d ) 32", "e ) 34"],
            'a',
            None,
        );
        let out = run(&[donor], &[target]);
        assert_eq!(
            (out.report.attempted, out.report.accepted, out.report.rejected),
            (1, 0, 1)
        );
        assert!(matches!(out.report.rejections[0].reason, RejectReason::Invalid { .. }));
    }

    #[test]
    fn too_few_numbers() {
        let donor = rec(
            "d",
            20,
            10,
            ["a ) 21", "b ) 22", "c ) 23", "d ) 24", "e ) 25"],
            'a',
            Some(FENCING),
        );
        let mut target = rec(
            "t",
            30,
            12,
            ["a ) 28", "b ) 29", "c ) 30.8", "d ) 32", "e ) 34"],
            'c',
            None,
        );
        target.problem = target.problem.replace("12 sq", "twelve sq");
        let out = run(&[donor], &[target]);
        assert_eq!(out.report.rejected, 1);
        assert_eq!(
            out.report.rejections[0].reason,
            RejectReason::IndexOutOfRange { index: 1, count: 1 }
        );
    }

    #[test]
    fn identical_donor() {
        let donor = rec(
            "d",
            20,
            10,
            ["a ) 21", "b ) 22", "c ) 23", "d ) 24", "e ) 25"],
            'a',
            Some(FENCING),
        );
        let target = ProblemRecord {
            program: None,
            id: "t".into(),
            ..donor.clone()
        };
        let out = run(std::slice::from_ref(&donor), &[target]);
        assert_eq!(out.records[0].program, donor.program);
    }

    #[test]
    fn far_targets_not_attempted() {
        let donor = rec(
            "d",
            20,
            10,
            ["a ) 21", "b ) 22", "c ) 23", "d ) 24", "e ) 25"],
            'a',
            Some(FENCING),
        );
        let mut other = donor.clone();
        other.problem = "what is the probability of drawing two red balls from the bag".into();
        other.program = None;
        let out = run(&[donor], &[other]);
        assert_eq!(out.report, ExpansionReport::default());
    }
}
