use indexmap::IndexMap;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use super::rules::{lookup_rule, RuleFn};
use crate::categorize::Category;

pub const DEFAULT_OPERATIONS: &str = include_str!("../../data/operations.jsonl");

/// Problem in a registry or constants document.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, field `{field}`: {message}")]
pub struct FormatError {
    pub line: usize,
    pub field: String,
    pub message: String,
}

impl FormatError {
    pub(crate) fn new(line: usize, field: &str, message: impl Into<String>) -> Self {
        FormatError {
            line,
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OpHint {
    pub formula: String,
    pub arguments: String,
    pub explanation: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OpSpec {
    pub name: String,
    pub arity: usize,
    pub category: Category,
    pub rule: String,
    pub commutative: bool,
    pub hint: OpHint,
    #[serde(skip)]
    pub(crate) apply: RuleFn,
}

impl OpSpec {
    /// Applies the evaluation rule; `args.len()` must equal the arity.
    pub fn apply(&self, args: &[f64]) -> Result<f64, String> {
        debug_assert_eq!(args.len(), self.arity);
        let v = (self.apply)(args)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("{} produced a non-finite value", self.name))
        }
    }
}

#[derive(Debug, Clone)]
pub struct OpRegistry {
    specs: IndexMap<String, OpSpec>,
    category_index: IndexMap<Category, Vec<String>>,
}

impl OpRegistry {
    pub fn from_specs(specs: Vec<OpSpec>) -> Result<Self, String> {
        let mut map = IndexMap::new();
        let mut category_index: IndexMap<Category, Vec<String>> = IndexMap::new();
        for spec in specs {
            if map.contains_key(&spec.name) {
                return Err(format!("duplicate operation `{}`", spec.name));
            }
            category_index.entry(spec.category).or_default().push(spec.name.clone());
            map.insert(spec.name.clone(), spec);
        }
        Ok(OpRegistry {
            specs: map,
            category_index,
        })
    }

    pub fn shipped() -> Self {
        load_registry(DEFAULT_OPERATIONS).expect("shipped registry is well-formed")
    }

    pub fn get(&self, name: &str) -> Option<&OpSpec> {
        self.specs.get(name)
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    /// Specs in document order.
    pub fn iter(&self) -> impl Iterator<Item = &OpSpec> {
        self.specs.values()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.specs.keys().map(String::as_str)
    }

    pub fn category_index(&self) -> &IndexMap<Category, Vec<String>> {
        &self.category_index
    }

    pub fn ops_in(&self, category: Category) -> &[String] {
        self.category_index.get(&category).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Operations offered for a problem of `category`: that category's ops
    /// plus the general ones, in registry order.
    pub fn palette(&self, category: Category) -> Vec<String> {
        self.specs
            .values()
            .filter(|s| s.category == category || s.category == Category::General)
            .map(|s| s.name.clone())
            .collect()
    }

    /// Restricts the registry to `names`, keeping registry order.
    pub fn subset<S: AsRef<str>>(&self, names: &[S]) -> Result<OpRegistry, String> {
        let mut specs = Vec::new();
        for spec in self.specs.values() {
            if names.iter().any(|n| n.as_ref() == spec.name) {
                specs.push(spec.clone());
            }
        }
        if let Some(missing) = names.iter().find(|n| !self.specs.contains_key(n.as_ref())) {
            return Err(format!("unknown operation `{}`", missing.as_ref()));
        }
        OpRegistry::from_specs(specs)
    }
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, line: usize, name: &str) -> Result<&'a Value, FormatError> {
    obj.get(name).ok_or_else(|| FormatError::new(line, name, "missing"))
}

fn string_field(obj: &serde_json::Map<String, Value>, line: usize, name: &str) -> Result<String, FormatError> {
    match field(obj, line, name)? {
        Value::String(s) if !s.trim().is_empty() => Ok(s.clone()),
        Value::String(_) => Err(FormatError::new(line, name, "must not be empty")),
        _ => Err(FormatError::new(line, name, "expected a string")),
    }
}

pub(crate) fn records(
    document: &str,
) -> impl Iterator<Item = (usize, Result<serde_json::Map<String, Value>, FormatError>)> + '_ {
    document
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with("//"))
        .map(|(line, l)| {
            let parsed = match serde_json::from_str::<Value>(l) {
                Ok(Value::Object(map)) => Ok(map),
                Ok(_) => Err(FormatError::new(line, "<record>", "expected a JSON object")),
                Err(e) => Err(FormatError::new(line, "<record>", e.to_string())),
            };
            (line, parsed)
        })
}

/// Reads one JSON object per line:
/// `{"name","arity","category","rule","commutative"?,"hint":{"formula","arguments","explanation"}}`.
pub fn load_registry(document: &str) -> Result<OpRegistry, FormatError> {
    let mut specs: Vec<OpSpec> = Vec::new();
    for (line, rec) in records(document) {
        let obj = rec?;
        let name = string_field(&obj, line, "name")?;
        if specs.iter().any(|s| s.name == name) {
            return Err(FormatError::new(line, "name", format!("duplicate operation `{name}`")));
        }
        let arity = field(&obj, line, "arity")?
            .as_u64()
            .filter(|&a| a >= 1)
            .ok_or_else(|| FormatError::new(line, "arity", "expected a positive integer"))?
            as usize;
        let category: Category = string_field(&obj, line, "category")?
            .parse()
            .map_err(|e: crate::categorize::UnknownCategory| FormatError::new(line, "category", e.to_string()))?;
        let rule_id = string_field(&obj, line, "rule")?;
        let rule = lookup_rule(&rule_id)
            .ok_or_else(|| FormatError::new(line, "rule", format!("no built-in rule `{rule_id}`")))?;
        if rule.arity != arity {
            return Err(FormatError::new(
                line,
                "arity",
                format!("rule `{rule_id}` takes {} arguments, not {arity}", rule.arity),
            ));
        }
        let commutative = match obj.get("commutative") {
            None => false,
            Some(Value::Bool(b)) => *b,
            Some(_) => return Err(FormatError::new(line, "commutative", "expected a boolean")),
        };
        let hint = match field(&obj, line, "hint")? {
            Value::Object(h) => OpHint {
                formula: string_field(h, line, "formula")?,
                arguments: string_field(h, line, "arguments")?,
                explanation: string_field(h, line, "explanation")?,
            },
            _ => return Err(FormatError::new(line, "hint", "expected an object")),
        };
        specs.push(OpSpec {
            name,
            arity,
            category,
            rule: rule_id,
            commutative,
            hint,
            apply: rule.apply,
        });
    }
    OpRegistry::from_specs(specs).map_err(|m| FormatError::new(0, "name", m))
}
