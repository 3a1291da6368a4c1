//! Numbers mentioned in problem text and option strings.
//!
//! The scanner recognizes integers, decimals, comma-grouped integers
//! (`8,000`), simple fractions (`3/5`) and percents (`25%`, `25 %`, value
//! kept as 25). Digits glued to letters still count (`110m`); ordinals
//! (`4th`) and spelled-out numbers do not. A mixed number like `2 1/2`
//! yields two mentions.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumberMention {
    pub value: f64,
    /// Character offsets `[start, end)` in the source text.
    pub span: (usize, usize),
    pub surface: String,
    pub percent: bool,
    pub fraction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionValue {
    pub label: char,
    pub value: Option<f64>,
    pub surface: String,
}

pub const OPTION_LABELS: [char; 5] = ['a', 'b', 'c', 'd', 'e'];

pub fn extract_numbers(text: &str) -> Vec<NumberMention> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let starts_number = chars[i].is_ascii_digit()
            || (chars[i] == '.'
                && chars.get(i + 1).is_some_and(char::is_ascii_digit)
                && (i == 0 || !chars[i - 1].is_ascii_digit()));
        if !starts_number {
            i += 1;
            continue;
        }
        match scan_number(&chars, i) {
            (end, Some(m)) => {
                out.push(m);
                i = end;
            }
            (end, None) => i = end.max(i + 1),
        }
    }
    out
}

fn digits_end(chars: &[char], mut i: usize) -> usize {
    while chars.get(i).is_some_and(char::is_ascii_digit) {
        i += 1;
    }
    i
}

fn is_digit_at(chars: &[char], i: usize) -> bool {
    chars.get(i).is_some_and(char::is_ascii_digit)
}

/// Scans a mention starting at `start`. Returns the index just past it and
/// the mention, or `None` for runs that are not numbers (ordinals, `a/0`).
fn scan_number(chars: &[char], start: usize) -> (usize, Option<NumberMention>) {
    let mut i = digits_end(chars, start);
    let int_len = i - start;
    let mut grouped = false;
    // comma groups: exactly three digits, not followed by another digit
    if (1..=3).contains(&int_len) {
        while chars.get(i) == Some(&',') && (1..=3).all(|k| is_digit_at(chars, i + k)) && !is_digit_at(chars, i + 4) {
            grouped = true;
            i += 4;
        }
    }
    let mut decimal = chars[start] == '.';
    if !decimal && chars.get(i) == Some(&'.') && is_digit_at(chars, i + 1) {
        decimal = true;
        i = digits_end(chars, i + 1);
    } else if decimal {
        i = digits_end(chars, start + 1);
    }
    let whole: String = chars[start..i].iter().filter(|&&c| c != ',').collect();

    if !grouped && !decimal && chars.get(i) == Some(&'/') && is_digit_at(chars, i + 1) {
        let den_end = digits_end(chars, i + 1);
        let den_text: String = chars[i + 1..den_end].iter().collect();
        let num: f64 = whole.parse().unwrap_or(f64::NAN);
        let den: f64 = den_text.parse().unwrap_or(f64::NAN);
        if den == 0.0 || !num.is_finite() || !den.is_finite() {
            return (den_end, None);
        }
        let (end, percent) = percent_suffix(chars, den_end);
        return (
            end,
            Some(NumberMention {
                value: num / den,
                span: (start, end),
                surface: chars[start..end].iter().collect(),
                percent,
                fraction: true,
            }),
        );
    }

    if is_ordinal_suffix(chars, i) {
        return (i, None);
    }
    let Some(value) = whole.parse::<f64>().ok().filter(|v| v.is_finite()) else {
        return (i, None);
    };
    let (end, percent) = percent_suffix(chars, i);
    (
        end,
        Some(NumberMention {
            value,
            span: (start, end),
            surface: chars[start..end].iter().collect(),
            percent,
            fraction: false,
        }),
    )
}

fn percent_suffix(chars: &[char], i: usize) -> (usize, bool) {
    match (chars.get(i), chars.get(i + 1)) {
        (Some('%'), _) => (i + 1, true),
        (Some(' '), Some('%')) => (i + 2, true),
        _ => (i, false),
    }
}

fn is_ordinal_suffix(chars: &[char], i: usize) -> bool {
    let Some(pair) = chars.get(i..i + 2) else {
        return false;
    };
    let suffix: String = pair.iter().map(|c| c.to_ascii_lowercase()).collect();
    matches!(suffix.as_str(), "st" | "nd" | "rd" | "th") && !chars.get(i + 2).is_some_and(|c| c.is_alphabetic())
}

/// Drops a leading `a )`, `b)` or `c.` option label.
fn strip_label(s: &str) -> &str {
    let t = s.trim_start();
    let mut it = t.char_indices();
    if let Some((_, c)) = it.next() {
        if OPTION_LABELS.contains(&c.to_ascii_lowercase()) {
            let rest = t[c.len_utf8()..].trim_start();
            if let Some(r) = rest.strip_prefix(')').or_else(|| rest.strip_prefix('.')) {
                return r;
            }
        }
    }
    t
}

/// First number in each option, label `a`–`e` by position. A minus sign
/// directly before the number makes it negative.
pub fn extract_option_values<S: AsRef<str>>(options: &[S]) -> Vec<OptionValue> {
    options
        .iter()
        .zip(OPTION_LABELS)
        .map(|(opt, label)| {
            let body = strip_label(opt.as_ref());
            let mentions = extract_numbers(body);
            let value = mentions.first().map(|m| {
                let chars: Vec<char> = body.chars().collect();
                let before = &chars[..m.span.0];
                // options are often tokenized as `3 / 5`
                let magnitude = match mentions.get(1) {
                    Some(d) if !m.fraction && !m.percent && !d.fraction && d.value != 0.0 => {
                        let between: String = chars[m.span.1..d.span.0].iter().collect();
                        if between.trim() == "/" {
                            m.value / d.value
                        } else {
                            m.value
                        }
                    }
                    _ => m.value,
                };
                let negative = match before {
                    [.., p, '-'] => !p.is_alphanumeric(),
                    ['-'] => true,
                    _ => false,
                };
                if negative {
                    -magnitude
                } else {
                    magnitude
                }
            });
            OptionValue {
                label,
                value,
                surface: opt.as_ref().to_string(),
            }
        })
        .collect()
}

pub fn values(mentions: &[NumberMention]) -> Vec<f64> {
    mentions.iter().map(|m| m.value).collect()
}

/// Values of the numbers in `text`, in order.
pub fn number_values(text: &str) -> Vec<f64> {
    values(&extract_numbers(text))
}

pub fn label_index(label: char) -> Option<usize> {
    OPTION_LABELS.iter().position(|&l| l == label.to_ascii_lowercase())
}
