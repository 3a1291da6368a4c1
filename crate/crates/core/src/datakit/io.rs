use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::ProblemRecord;
use crate::categorize::Category;
use crate::opcore::{looks_one_based, parse_program, shift_to_zero_based};
use crate::textnum::OPTION_LABELS;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordError {
    /// 0-based position of the record in the file.
    pub index: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub read: usize,
    pub loaded: usize,
    /// Malformed records, not loaded.
    pub skipped: Vec<RecordError>,
    /// Records loaded without a program because the program text did not parse.
    pub program_errors: Vec<RecordError>,
    /// Programs whose `#k` references were 1-based and were renumbered.
    pub one_based_fixed: usize,
}

/// Reads a dataset file: a JSON array of records, or one JSON record per
/// line. See [`parse_dataset`].
pub fn load_dataset(path: impl AsRef<Path>) -> std::io::Result<(Vec<ProblemRecord>, LoadReport)> {
    let text = fs::read_to_string(path)?;
    parse_dataset(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

/// Records use the fields `Problem`, `Rationale`, `options` (list of five
/// strings, or one `a ) .. , b ) ..` string), `correct`, `category` and
/// `linear_formula`; `id` is optional and defaults to the record position.
pub fn parse_dataset(text: &str) -> Result<(Vec<ProblemRecord>, LoadReport), String> {
    let trimmed = text.trim_start();
    let items: Vec<Value> = if trimmed.starts_with('[') {
        serde_json::from_str(trimmed).map_err(|e| format!("not a JSON array: {e}"))?
    } else {
        trimmed
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).unwrap_or(Value::Null))
            .collect()
    };
    let mut report = LoadReport {
        read: items.len(),
        ..LoadReport::default()
    };
    let mut records = Vec::with_capacity(items.len());
    for (index, item) in items.iter().enumerate() {
        match record_from_json(index, item, &mut report) {
            Ok(r) => records.push(r),
            Err(message) => report.skipped.push(RecordError { index, message }),
        }
    }
    report.loaded = records.len();
    Ok((records, report))
}

fn text_field(obj: &serde_json::Map<String, Value>, name: &str) -> Result<String, String> {
    match obj.get(name) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(format!("field `{name}` must be a string")),
        None => Err(format!("missing field `{name}`")),
    }
}

fn record_from_json(index: usize, item: &Value, report: &mut LoadReport) -> Result<ProblemRecord, String> {
    let Value::Object(obj) = item else {
        return Err("record is not a JSON object".into());
    };
    let id = match obj.get("id") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        _ => index.to_string(),
    };
    let problem = text_field(obj, "Problem")?;
    let rationale = obj
        .get("Rationale")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();
    let options = match obj.get("options") {
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| v.as_str().map(str::to_string).ok_or("options must be strings"))
            .collect::<Result<Vec<_>, _>>()?,
        Some(Value::String(s)) => split_options(s),
        _ => return Err("missing field `options`".into()),
    };
    if options.len() != 5 {
        return Err(format!("expected 5 options, found {}", options.len()));
    }
    let correct = text_field(obj, "correct")?;
    let correct = match correct.trim().to_ascii_lowercase().as_str() {
        c if c.len() == 1 && OPTION_LABELS.contains(&c.chars().next().unwrap()) => c.chars().next().unwrap(),
        other => return Err(format!("correct label `{other}` not in a-e")),
    };
    let category = match obj.get("category") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) if s.trim().is_empty() => None,
        Some(Value::String(s)) => Some(s.parse::<Category>().map_err(|e| e.to_string())?),
        Some(_) => return Err("field `category` must be a string".into()),
    };
    let formula = obj
        .get("linear_formula")
        .or_else(|| obj.get("program"))
        .and_then(Value::as_str)
        .filter(|s| !s.trim().is_empty());
    let program = match formula.map(parse_program) {
        None => None,
        Some(Ok(p)) if looks_one_based(&p) => {
            report.one_based_fixed += 1;
            Some(shift_to_zero_based(&p))
        }
        Some(Ok(p)) => Some(p),
        Some(Err(e)) => {
            report.program_errors.push(RecordError {
                index,
                message: e.to_string(),
            });
            None
        }
    };
    Ok(ProblemRecord {
        id,
        problem,
        rationale,
        options,
        correct,
        category,
        program,
    })
}

/// Splits `a ) 21 , b ) 22 , ...` at each `, <label> )` boundary.
fn split_options(s: &str) -> Vec<String> {
    let mut cuts = vec![0];
    let mut from = 0;
    for label in &OPTION_LABELS[1..] {
        let found = s[from..].char_indices().find_map(|(i, c)| {
            if c != ',' {
                return None;
            }
            let after = s[from + i + 1..].trim_start();
            let rest = after.strip_prefix(*label)?.trim_start();
            rest.starts_with(')').then_some(from + i)
        });
        match found {
            Some(at) => {
                cuts.push(at);
                from = at + 1;
            }
            None => break,
        }
    }
    let mut out = Vec::new();
    for (k, &start) in cuts.iter().enumerate() {
        let end = cuts.get(k + 1).copied().unwrap_or(s.len());
        let piece = s[start..end].trim_start_matches(',').trim();
        out.push(piece.to_string());
    }
    out
}

fn record_to_json(r: &ProblemRecord) -> Value {
    json!({
        "id": r.id,
        "Problem": r.problem,
        "Rationale": r.rationale,
        "options": r.options,
        "correct": r.correct.to_string(),
        "category": r.category.map(|c| c.to_string()),
        "linear_formula": r.program.as_ref().map(|p| p.to_string()),
    })
}

pub fn write_dataset(records: &[ProblemRecord]) -> String {
    let items: Vec<Value> = records.iter().map(record_to_json).collect();
    serde_json::to_string_pretty(&items).expect("records serialize")
}

pub fn save_dataset(records: &[ProblemRecord], path: impl AsRef<Path>) -> std::io::Result<()> {
    fs::write(path, write_dataset(records))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> &'static str {
        r#"[
          {"Problem": "a train 110m long running at 72 km/hr crosses a bridge 132m long in?",
           "Rationale": "speed = 72 * 5 / 18 = 20 m / s", "options": "a ) 12 , b ) 11 , c ) 10 , d ) 9 , e ) none of these",
           "correct": "a", "category": "physics",
           "linear_formula": "add(n0,n2)|multiply(n1,const_0_2778)|divide(#0,#1)|floor(#2)|"},
          {"Problem": "four options only", "Rationale": "", "options": ["a ) 1", "b ) 2", "c ) 3", "d ) 4"], "correct": "a"},
          {"Problem": "one based", "Rationale": "", "options": ["a ) 1", "b ) 2", "c ) 3", "d ) 4", "e ) 5"],
           "correct": "b", "category": "gain", "linear_formula": "add(n0,n1)|multiply(#1,n2)|"},
          {"Problem": "bad program", "Rationale": "", "options": ["a ) 1", "b ) 2", "c ) 3", "d ) 4", "e ) 5"],
           "correct": "c", "linear_formula": "add(n0,"}
        ]"#
    }

    #[test]
    fn loads_and_reports() {
        let (recs, rep) = parse_dataset(sample()).unwrap();
        assert_eq!(rep.read, 4);
        assert_eq!(recs.len(), 3);
        assert_eq!(rep.skipped.len(), 1);
        assert_eq!(rep.skipped[0].index, 1);
        assert_eq!(rep.one_based_fixed, 1);
        assert_eq!(rep.program_errors.len(), 1);
        assert_eq!(recs[0].options[4], "e ) none of these");
        assert_eq!(recs[0].program.as_ref().unwrap().len(), 4);
        assert_eq!(recs[1].category, Some(Category::GainLoss));
        assert_eq!(
            recs[1].program.as_ref().unwrap().to_string(),
            "add(n0,n1)|multiply(#0,n2)"
        );
        assert_eq!(recs[2].program, None);
        assert_eq!(recs[0].id, "0");
    }

    #[test]
    fn round_trip() {
        let (recs, _) = parse_dataset(sample()).unwrap();
        let (again, rep) = parse_dataset(&write_dataset(&recs)).unwrap();
        assert_eq!(recs, again);
        assert!(rep.skipped.is_empty());
    }

    #[test]
    fn jsonl_input() {
        let line = r#"{"id": "q7", "Problem": "p 1", "Rationale": "", "options": ["a ) 1","b ) 2","c ) 3","d ) 4","e ) 5"], "correct": "E"}"#;
        let (recs, _) = parse_dataset(&format!("{line}\n{line}\n")).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].id, "q7");
        assert_eq!(recs[0].correct, 'e');
    }

    #[test]
    fn option_string_with_commas() {
        let o = split_options("a ) 8,000 , b ) 9,000 , c ) rs . 5 , d ) 1 , e ) 2");
        assert_eq!(o, vec!["a ) 8,000", "b ) 9,000", "c ) rs . 5", "d ) 1", "e ) 2"]);
    }
}
