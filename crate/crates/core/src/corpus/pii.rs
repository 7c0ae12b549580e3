use regex::Regex;

use super::DocRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct NamedPattern {
    pub name: String,
    pub regex: Regex,
}

impl NamedPattern {
    pub fn new(name: &str, pattern: &str) -> Result<Self> {
        let regex =
            Regex::new(pattern).map_err(|e| Error::Config(format!("PII pattern `{name}`: {e}")))?;
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::Config(format!(
                "PII pattern name `{name}` must be [A-Za-z0-9_]+"
            )));
        }
        Ok(NamedPattern {
            name: name.to_string(),
            regex,
        })
    }
}

// ASCII word boundaries so that Hangul right next to a number still counts
// as a boundary.
const RRN: &str = r"(?-u:\b)\d{6}-[1-4]\d{6}(?-u:\b)";
const EMAIL: &str = r"[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}";
const IPV4: &str = r"(?-u:\b)(?:(?:25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)\.){3}(?:25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)(?-u:\b)";
const PHONE: &str = r"(?:\+\d{1,3}[ .-]?(?:\(\d{1,4}\)|\d{1,4})(?:[ .-]?\d{2,4}){2,3}|(?-u:\b)0\d{1,2}[ .-]\d{3,4}[ .-]\d{4})(?-u:\b)";

/// Email, phone, resident registration number and IPv4 patterns. Earlier
/// patterns win when matches overlap.
pub fn default_patterns() -> Vec<NamedPattern> {
    [
        ("RRN", RRN),
        ("EMAIL", EMAIL),
        ("IPV4", IPV4),
        ("PHONE", PHONE),
    ]
    .into_iter()
    .map(|(n, p)| NamedPattern::new(n, p).expect("built-in pattern compiles"))
    .collect()
}

/// Replaces every match with `[NAME]`; returns the new text and the number of
/// replacements.
pub fn mask_text(text: &str, patterns: &[NamedPattern]) -> (String, usize) {
    let mut spans: Vec<(usize, usize, usize)> = Vec::new();
    for (pi, p) in patterns.iter().enumerate() {
        for m in p.regex.find_iter(text) {
            if m.is_empty() {
                continue;
            }
            let overlaps = spans.iter().any(|&(s, e, _)| m.start() < e && s < m.end());
            if !overlaps {
                spans.push((m.start(), m.end(), pi));
            }
        }
    }
    if spans.is_empty() {
        return (text.to_string(), 0);
    }
    spans.sort_unstable();
    let mut out = String::with_capacity(text.len());
    let mut at = 0;
    for &(s, e, pi) in &spans {
        out.push_str(&text[at..s]);
        out.push('[');
        out.push_str(&patterns[pi].name);
        out.push(']');
        at = e;
    }
    out.push_str(&text[at..]);
    (out, spans.len())
}

pub fn mask_pii(doc: &DocRecord, patterns: &[NamedPattern]) -> DocRecord {
    let (text, n) = mask_text(&doc.text, patterns);
    DocRecord {
        text,
        pii_masked: doc.pii_masked || n > 0,
        ..doc.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(text: &str) -> String {
        mask_text(text, &default_patterns()).0
    }

    #[test]
    fn masks_each_kind() {
        assert_eq!(mask("mail me: a@b.com"), "mail me: [EMAIL]");
        assert_eq!(
            mask("주민번호는 900101-1234567입니다"),
            "주민번호는 [RRN]입니다"
        );
        assert_eq!(mask("host 192.168.0.12 up"), "host [IPV4] up");
        assert_eq!(mask("call +82 10-1234-5678 now"), "call [PHONE] now");
        assert_eq!(mask("call +1 (415) 555-0132."), "call [PHONE].");
        assert_eq!(mask("전화 010-9876-5432로"), "전화 [PHONE]로");
    }

    #[test]
    fn leaves_clean_text_alone() {
        let doc = DocRecord::new("version 3.11 shipped in 2023, pages 10-12", "t");
        let out = mask_pii(&doc, &default_patterns());
        assert_eq!(out.text, doc.text);
        assert!(!out.pii_masked);
        assert_eq!(out.id, doc.id);
    }

    #[test]
    fn rejects_bad_patterns() {
        assert!(matches!(NamedPattern::new("X", "("), Err(Error::Config(_))));
        assert!(NamedPattern::new("a b", "x").is_err());
    }

    #[test]
    fn priority_resolves_overlaps() {
        let pats = vec![
            NamedPattern::new("A", "abc").unwrap(),
            NamedPattern::new("B", "bcd").unwrap(),
        ];
        assert_eq!(mask_text("xabcdx", &pats).0, "x[A]dx");
    }
}
