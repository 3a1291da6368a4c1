use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{match_options, MatchConfig};
use crate::opcore::{evaluate, parse_program, ConstTable, OpRegistry, Program};
use crate::textnum::OptionValue;

/// Candidate programs for one problem, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionBeam {
    pub problem_id: String,
    pub programs: Vec<Program>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Provenance {
    /// First program (best first) matching exactly one option.
    UniqueMatch {
        program: usize,
        value: f64,
    },
    /// No unique match anywhere: closest executable program/option pair.
    MinDistance {
        program: usize,
        value: f64,
        distance: f64,
    },
    FallbackRandom {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub label: char,
    pub provenance: Provenance,
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Uniform label from a stream keyed by (seed, problem id), so the draw does
/// not depend on evaluation order.
pub(crate) fn random_label(seed: u64, problem_id: &str, n_options: usize) -> char {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(problem_id));
    let k = n_options.clamp(1, 5);
    crate::textnum::OPTION_LABELS[rng.random_range(0..k)]
}

fn fallback(beam_id: &str, options: &[OptionValue], cfg: &MatchConfig, reason: &str) -> Selection {
    Selection {
        label: random_label(cfg.rng_seed, beam_id, options.len()),
        provenance: Provenance::FallbackRandom {
            reason: reason.to_string(),
        },
    }
}

/// Picks an answer: the first program with exactly one matching option
/// decides; otherwise the executable program/option pair at minimal
/// distance (earlier program, then lower label on ties); otherwise a
/// seeded random label. Uncategorized problems always get the random label.
pub fn select_from_beam(
    beam: &PredictionBeam,
    numbers: &[f64],
    options: &[OptionValue],
    registry: &OpRegistry,
    consts: &ConstTable,
    cfg: &MatchConfig,
    uncategorized: bool,
) -> Selection {
    if uncategorized {
        return fallback(&beam.problem_id, options, cfg, "uncategorized problem");
    }
    let mut best: Option<(f64, usize, char, f64)> = None;
    for (i, program) in beam.programs.iter().take(cfg.beam_size).enumerate() {
        let Ok(trace) = evaluate(program, numbers, registry, consts) else {
            continue;
        };
        let value = trace.final_value;
        if let [label] = match_options(value, options, cfg)[..] {
            return Selection {
                label,
                provenance: Provenance::UniqueMatch { program: i, value },
            };
        }
        for o in options {
            if let Some(ov) = o.value {
                let d = (value - ov).abs();
                if best.is_none_or(|(bd, ..)| d < bd) {
                    best = Some((d, i, o.label, value));
                }
            }
        }
    }
    match best {
        Some((distance, program, label, value)) => Selection {
            label,
            provenance: Provenance::MinDistance {
                program,
                value,
                distance,
            },
        },
        None => fallback(&beam.problem_id, options, cfg, "no executable program"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BeamFileError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Deserialize)]
struct BeamLine {
    id: String,
    programs: Vec<String>,
}

/// Reads `{"id": ..., "programs": [...]}` lines. Unparseable program strings
/// are dropped from their beam; the count of dropped strings is returned.
pub fn load_beams(text: &str) -> Result<(Vec<PredictionBeam>, usize), BeamFileError> {
    let mut beams = Vec::new();
    let mut dropped = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: BeamLine = serde_json::from_str(line).map_err(|e| BeamFileError::Format {
            line: i + 1,
            message: e.to_string(),
        })?;
        let programs = rec
            .programs
            .iter()
            .filter_map(|p| {
                parse_program(p).ok().or_else(|| {
                    dropped += 1;
                    None
                })
            })
            .collect();
        beams.push(PredictionBeam {
            problem_id: rec.id,
            programs,
        });
    }
    Ok((beams, dropped))
}
