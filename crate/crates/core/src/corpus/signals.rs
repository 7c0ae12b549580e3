use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::DocRecord;
use crate::error::{Error, Result};
use crate::script::{classify_char, ScriptClass};

/// Signals produced by [`heuristic_signals`].
pub const SIGNAL_NAMES: [&str; 6] = [
    "boilerplate_line_frac",
    "char_count",
    "digit_ratio",
    "max_line_len",
    "mean_sentence_len",
    "symbol_ratio",
];

const QUALITY: &str = "quality_score";

/// Inclusive bounds; a missing side is unbounded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

impl Range {
    pub fn at_least(min: f64) -> Self {
        Range {
            min: Some(min),
            max: None,
        }
    }

    pub fn at_most(max: f64) -> Self {
        Range {
            min: None,
            max: Some(max),
        }
    }
}

pub type Thresholds = BTreeMap<String, Range>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reason {
    pub rule: String,
    pub observed: f64,
    pub threshold: f64,
    pub bound: Bound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterVerdict {
    pub keep: bool,
    pub reasons: Vec<Reason>,
}

pub(super) fn check_names(t: &Thresholds) -> Result<()> {
    for name in t.keys() {
        if name != QUALITY && !SIGNAL_NAMES.contains(&name.as_str()) {
            return Err(Error::Config(format!("unknown signal `{name}`")));
        }
    }
    Ok(())
}

/// Built-in threshold sets: `none`, `default` (heuristics only) and
/// `low-quality-removal` (heuristics plus quality score at least 3).
pub fn preset(name: &str) -> Result<Thresholds> {
    let heuristics = || -> Thresholds {
        [
            ("symbol_ratio", Range::at_most(0.3)),
            ("digit_ratio", Range::at_most(0.3)),
            ("boilerplate_line_frac", Range::at_most(0.3)),
            ("char_count", Range::at_least(20.0)),
            ("max_line_len", Range::at_most(2000.0)),
            (
                "mean_sentence_len",
                Range {
                    min: Some(3.0),
                    max: Some(1500.0),
                },
            ),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    };
    match name {
        "none" => Ok(Thresholds::new()),
        "default" => Ok(heuristics()),
        "low-quality-removal" => {
            let mut t = heuristics();
            t.insert(QUALITY.into(), Range::at_least(3.0));
            Ok(t)
        }
        other => Err(Error::Config(format!("unknown filter preset `{other}`"))),
    }
}

fn ends_korean_sentence(prev: char, next: Option<char>) -> bool {
    matches!(prev, '다' | '요') && next.is_none_or(char::is_whitespace)
}

/// Sentences split on `.!?…。`, on 다/요 before whitespace, and on blank lines.
fn sentence_lengths(text: &str) -> Vec<usize> {
    let chars: Vec<char> = text.chars().collect();
    let mut lengths = Vec::new();
    let mut start = 0;
    let mut i = 0;
    let close = |from: usize, to: usize, lengths: &mut Vec<usize>| {
        let n = chars[from..to]
            .iter()
            .filter(|c| !c.is_whitespace())
            .count();
        let trimmed = chars[from..to]
            .iter()
            .skip_while(|c| c.is_whitespace())
            .count();
        let trailing = chars[from..to]
            .iter()
            .rev()
            .take_while(|c| c.is_whitespace())
            .count();
        if n > 0 {
            lengths.push(trimmed - trailing);
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        let boundary = if matches!(c, '.' | '!' | '?' | '…' | '。') {
            while i + 1 < chars.len() && matches!(chars[i + 1], '.' | '!' | '?' | '…' | '。') {
                i += 1;
            }
            true
        } else {
            ends_korean_sentence(c, next) || (c == '\n' && next == Some('\n'))
        };
        i += 1;
        if boundary {
            close(start, i, &mut lengths);
            start = i;
        }
    }
    close(start, chars.len(), &mut lengths);
    lengths
}

/// Per-document statistics used by [`filter`].
pub fn heuristic_signals(doc: &DocRecord) -> BTreeMap<String, f64> {
    let text = &doc.text;
    let mut total = 0usize;
    let mut symbols = 0usize;
    let mut digits = 0usize;
    for ch in text.chars() {
        total += 1;
        match classify_char(ch) {
            ScriptClass::Digit => digits += 1,
            ScriptClass::Whitespace => {}
            c if c.is_letter() => {}
            _ => symbols += 1,
        }
    }
    let ratio = |n: usize| {
        if total == 0 {
            0.0
        } else {
            n as f64 / total as f64
        }
    };

    let sentences = sentence_lengths(text);
    let mean_sentence_len = if sentences.is_empty() {
        0.0
    } else {
        sentences.iter().sum::<usize>() as f64 / sentences.len() as f64
    };

    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for l in &lines {
        *seen.entry(l).or_default() += 1;
    }
    let repeated = lines.iter().filter(|l| seen[*l] >= 3).count();
    let boilerplate = if lines.is_empty() {
        0.0
    } else {
        repeated as f64 / lines.len() as f64
    };
    let max_line_len = text.lines().map(|l| l.chars().count()).max().unwrap_or(0);

    [
        ("boilerplate_line_frac", boilerplate),
        ("char_count", total as f64),
        ("digit_ratio", ratio(digits)),
        ("max_line_len", max_line_len as f64),
        ("mean_sentence_len", mean_sentence_len),
        ("symbol_ratio", ratio(symbols)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Keeps a document iff every configured signal lies within its range.
///
/// A `quality_score` rule only applies to documents that carry a score.
pub fn filter(doc: &DocRecord, thresholds: &Thresholds) -> Result<FilterVerdict> {
    check_names(thresholds)?;
    let signals: Cow<BTreeMap<String, f64>> = if doc.signals.is_empty() {
        Cow::Owned(heuristic_signals(doc))
    } else {
        Cow::Borrowed(&doc.signals)
    };
    let mut reasons = Vec::new();
    for (name, range) in thresholds {
        let observed = if name == QUALITY {
            match doc.quality_score {
                Some(q) => q,
                None => continue,
            }
        } else {
            match signals.get(name) {
                Some(&v) => v,
                None => heuristic_signals(doc)[name],
            }
        };
        if let Some(min) = range.min.filter(|&m| observed < m) {
            reasons.push(Reason {
                rule: name.clone(),
                observed,
                threshold: min,
                bound: Bound::Min,
            });
        }
        if let Some(max) = range.max.filter(|&m| observed > m) {
            reasons.push(Reason {
                rule: name.clone(),
                observed,
                threshold: max,
                bound: Bound::Max,
            });
        }
    }
    Ok(FilterVerdict {
        keep: reasons.is_empty(),
        reasons,
    })
}

/// Assigns a quality score in `[0, 5]`.
pub trait QualityScorer: Sync {
    fn score(&self, doc: &DocRecord) -> f64;
}

/// Linear penalty model over the heuristic signals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LexicalScorer {
    pub symbol_weight: f64,
    pub digit_weight: f64,
    pub boilerplate_weight: f64,
    pub short_doc_chars: f64,
    pub short_doc_penalty: f64,
}

impl Default for LexicalScorer {
    fn default() -> Self {
        LexicalScorer {
            symbol_weight: 10.0,
            digit_weight: 8.0,
            boilerplate_weight: 3.0,
            short_doc_chars: 50.0,
            short_doc_penalty: 2.0,
        }
    }
}

impl QualityScorer for LexicalScorer {
    fn score(&self, doc: &DocRecord) -> f64 {
        let computed;
        let s = if doc.signals.is_empty() {
            computed = heuristic_signals(doc);
            &computed
        } else {
            &doc.signals
        };
        let get = |k: &str| s.get(k).copied().unwrap_or(0.0);
        let mut score = 5.0
            - self.symbol_weight * get("symbol_ratio")
            - self.digit_weight * get("digit_ratio")
            - self.boilerplate_weight * get("boilerplate_line_frac");
        if get("char_count") < self.short_doc_chars {
            score -= self.short_doc_penalty;
        }
        score.clamp(0.0, 5.0)
    }
}
