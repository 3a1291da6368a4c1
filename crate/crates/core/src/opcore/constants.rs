use indexmap::IndexMap;
use serde::Serialize;
use serde_json::Value;

use super::program::parse_decimal;
use super::registry::{records, FormatError};
use crate::categorize::Category;

pub const DEFAULT_CONSTANTS: &str = include_str!("../../data/constants.jsonl");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstEntry {
    pub value: f64,
    /// Categories whose annotators see this constant. Empty means all.
    pub categories: Vec<Category>,
}

/// Named constants, in document order.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConstTable {
    entries: IndexMap<String, ConstEntry>,
}

impl ConstTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn shipped() -> Self {
        load_constants(DEFAULT_CONSTANTS).expect("shipped constants are well-formed")
    }

    pub fn insert(&mut self, name: impl Into<String>, value: f64, categories: Vec<Category>) {
        self.entries.insert(name.into(), ConstEntry { value, categories });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, e)| (k.as_str(), e.value))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Table entry, else the decimal spelled by the name: `const_0.2778`
    /// and the dataset's `const_0_2778` both resolve to 0.2778.
    pub fn resolve(&self, name: &str) -> Option<f64> {
        if let Some(e) = self.entries.get(name) {
            return Some(e.value);
        }
        let rest = name.strip_prefix("const_")?;
        parse_decimal(rest).or_else(|| {
            let (int, frac) = rest.split_once('_')?;
            if int.is_empty() || frac.is_empty() || frac.contains('_') {
                return None;
            }
            parse_decimal(&format!("{int}.{frac}"))
        })
    }

    /// Constants visible to a `category` problem: its own plus general and
    /// uncategorized ones.
    pub fn in_scope(&self, category: Category) -> Vec<String> {
        self.entries
            .iter()
            .filter(|(_, e)| {
                e.categories.is_empty() || e.categories.contains(&category) || e.categories.contains(&Category::General)
            })
            .map(|(k, _)| k.clone())
            .collect()
    }
}

/// Reads one JSON object per line: `{"name","value","categories"?}`.
pub fn load_constants(document: &str) -> Result<ConstTable, FormatError> {
    let mut table = ConstTable::new();
    for (line, rec) in records(document) {
        let obj = rec?;
        let name = match obj.get("name") {
            Some(Value::String(s)) if s.starts_with("const_") && s.len() > 6 => s.clone(),
            Some(_) => return Err(FormatError::new(line, "name", "expected `const_<name>`")),
            None => return Err(FormatError::new(line, "name", "missing")),
        };
        if table.entries.contains_key(&name) {
            return Err(FormatError::new(line, "name", format!("duplicate constant `{name}`")));
        }
        let value = obj
            .get("value")
            .and_then(Value::as_f64)
            .filter(|v| v.is_finite())
            .ok_or_else(|| FormatError::new(line, "value", "expected a finite number"))?;
        let categories = match obj.get("categories") {
            None => Vec::new(),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_str()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| FormatError::new(line, "categories", format!("bad category {v}")))
                })
                .collect::<Result<_, _>>()?,
            Some(_) => return Err(FormatError::new(line, "categories", "expected an array")),
        };
        table.insert(name, value, categories);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn required_constants_shipped() {
        let t = ConstTable::shipped();
        for name in [
            "const_pi",
            "const_1",
            "const_2",
            "const_3",
            "const_4",
            "const_100",
            "const_0.2778",
            "const_3600",
        ] {
            assert!(t.resolve(name).is_some(), "{name}");
        }
        assert_eq!(t.resolve("const_pi"), Some(std::f64::consts::PI));
    }

    #[test]
    fn decimal_names_resolve_without_entry() {
        let t = ConstTable::new();
        assert_eq!(t.resolve("const_0.2778"), Some(0.2778));
        assert_eq!(t.resolve("const_0_2778"), Some(0.2778));
        assert_eq!(t.resolve("const_1_6"), Some(1.6));
        assert_eq!(t.resolve("const_42"), Some(42.0));
        assert_eq!(t.resolve("const_pi"), None);
        assert_eq!(t.resolve("const_1_2_3"), None);
        assert_eq!(t.resolve("pi"), None);
    }

    #[test]
    fn geometry_scope_has_pi() {
        let t = ConstTable::shipped();
        let scope = t.in_scope(Category::Geometry);
        assert!(scope.iter().any(|n| n == "const_pi"));
        assert!(scope.iter().any(|n| n == "const_2"));
        assert!(!t.in_scope(Category::Physics).iter().any(|n| n == "const_pi"));
    }

    #[test]
    fn bad_value_reports_field() {
        let err = load_constants(r#"{"name":"const_x","value":"abc"}"#).unwrap_err();
        assert_eq!((err.line, err.field.as_str()), (1, "value"));
    }
}
