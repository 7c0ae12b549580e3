//! Unicode script classification and the script-aware pre-tokenizer.
//!
//! Every scalar value maps to one of twelve [`ScriptClass`]es. Whitespace wins
//! over everything, decimal digits come next, then punctuation, and letters or
//! combining marks are assigned by the Unicode block they live in. The
//! pre-tokenizer cuts text wherever the class changes, isolates every digit,
//! and glues a single leading space onto the following letter run.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};

/// Reduced ISO 15924 alphabet used for segmentation and rule detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScriptClass {
    Hangul,
    Latin,
    Han,
    Kana,
    Cyrillic,
    Greek,
    Arabic,
    Digit,
    Punctuation,
    Whitespace,
    OtherLetter,
    OtherSymbol,
}

impl ScriptClass {
    pub const ALL: [ScriptClass; 12] = [
        ScriptClass::Hangul,
        ScriptClass::Latin,
        ScriptClass::Han,
        ScriptClass::Kana,
        ScriptClass::Cyrillic,
        ScriptClass::Greek,
        ScriptClass::Arabic,
        ScriptClass::Digit,
        ScriptClass::Punctuation,
        ScriptClass::Whitespace,
        ScriptClass::OtherLetter,
        ScriptClass::OtherSymbol,
    ];

    /// True for the classes that carry letters (the ones a leading space may attach to).
    pub fn is_letter(self) -> bool {
        matches!(
            self,
            ScriptClass::Hangul
                | ScriptClass::Latin
                | ScriptClass::Han
                | ScriptClass::Kana
                | ScriptClass::Cyrillic
                | ScriptClass::Greek
                | ScriptClass::Arabic
                | ScriptClass::OtherLetter
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ScriptClass::Hangul => "Hangul",
            ScriptClass::Latin => "Latin",
            ScriptClass::Han => "Han",
            ScriptClass::Kana => "Kana",
            ScriptClass::Cyrillic => "Cyrillic",
            ScriptClass::Greek => "Greek",
            ScriptClass::Arabic => "Arabic",
            ScriptClass::Digit => "Digit",
            ScriptClass::Punctuation => "Punctuation",
            ScriptClass::Whitespace => "Whitespace",
            ScriptClass::OtherLetter => "OtherLetter",
            ScriptClass::OtherSymbol => "OtherSymbol",
        }
    }
}

impl fmt::Display for ScriptClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown script class `{0}`")]
pub struct UnknownScript(pub String);

impl FromStr for ScriptClass {
    type Err = UnknownScript;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScriptClass::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownScript(s.to_string()))
    }
}

use ScriptClass::*;

// Blocks (or block fragments) whose letters and marks belong to a named script.
// Sorted by start; consulted only for letters, letter numbers and combining marks.
static SCRIPT_BLOCKS: &[(u32, u32, ScriptClass)] = &[
    (0x0000, 0x024F, Latin),
    (0x0250, 0x02AF, Latin),
    (0x02B0, 0x02FF, Latin),
    (0x0300, 0x036F, Latin),
    (0x0370, 0x03FF, Greek),
    (0x0400, 0x052F, Cyrillic),
    (0x0600, 0x06FF, Arabic),
    (0x0750, 0x077F, Arabic),
    (0x0870, 0x08FF, Arabic),
    (0x1100, 0x11FF, Hangul),
    (0x1C80, 0x1C8F, Cyrillic),
    (0x1D00, 0x1DBF, Latin),
    (0x1DC0, 0x1DFF, Latin),
    (0x1E00, 0x1EFF, Latin),
    (0x1F00, 0x1FFF, Greek),
    (0x2070, 0x209F, Latin),
    (0x2100, 0x214F, Latin),
    (0x2160, 0x218F, Latin),
    (0x2C60, 0x2C7F, Latin),
    (0x2DE0, 0x2DFF, Cyrillic),
    (0x3005, 0x3007, Han),
    (0x3021, 0x3029, Han),
    (0x302E, 0x302F, Hangul),
    (0x3038, 0x303B, Han),
    (0x3040, 0x30FF, Kana),
    (0x3130, 0x318F, Hangul),
    (0x31F0, 0x31FF, Kana),
    (0x3400, 0x4DBF, Han),
    (0x4E00, 0x9FFF, Han),
    (0xA640, 0xA69F, Cyrillic),
    (0xA720, 0xA7FF, Latin),
    (0xA960, 0xA97F, Hangul),
    (0xAB30, 0xAB6F, Latin),
    (0xAC00, 0xD7AF, Hangul),
    (0xD7B0, 0xD7FF, Hangul),
    (0xF900, 0xFAFF, Han),
    (0xFB00, 0xFB06, Latin),
    (0xFB50, 0xFDFF, Arabic),
    (0xFE20, 0xFE2F, Latin),
    (0xFE70, 0xFEFF, Arabic),
    (0xFF21, 0xFF3A, Latin),
    (0xFF41, 0xFF5A, Latin),
    (0xFF66, 0xFF9F, Kana),
    (0xFFA0, 0xFFDC, Hangul),
    (0x10780, 0x107BF, Latin),
    (0x10EC0, 0x10EFF, Arabic),
    (0x1AFF0, 0x1B16F, Kana),
    (0x1DF00, 0x1DFFF, Latin),
    (0x1E030, 0x1E08F, Cyrillic),
    (0x1EE00, 0x1EEFF, Arabic),
    (0x20000, 0x2FA1F, Han),
    (0x30000, 0x323AF, Han),
];

fn block_script(ch: char) -> Option<ScriptClass> {
    let cp = ch as u32;
    let idx = SCRIPT_BLOCKS.partition_point(|&(lo, _, _)| lo <= cp);
    if idx == 0 {
        return None;
    }
    let (lo, hi, class) = SCRIPT_BLOCKS[idx - 1];
    (lo <= cp && cp <= hi).then_some(class)
}

/// Classifies a single scalar value. Total and deterministic.
pub fn classify_char(ch: char) -> ScriptClass {
    if ch.is_whitespace() {
        return Whitespace;
    }
    use GeneralCategory as G;
    match get_general_category(ch) {
        G::DecimalNumber => Digit,
        G::ConnectorPunctuation
        | G::DashPunctuation
        | G::OpenPunctuation
        | G::ClosePunctuation
        | G::InitialPunctuation
        | G::FinalPunctuation
        | G::OtherPunctuation => Punctuation,
        G::UppercaseLetter
        | G::LowercaseLetter
        | G::TitlecaseLetter
        | G::ModifierLetter
        | G::OtherLetter
        | G::LetterNumber
        | G::NonspacingMark
        | G::SpacingMark
        | G::EnclosingMark => block_script(ch).unwrap_or(OtherLetter),
        _ => OtherSymbol,
    }
}

/// A maximal run of one script class (digits are always single characters).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment<'a> {
    pub text: &'a str,
    pub script: ScriptClass,
    /// Offset of `text` in the UTF-8 encoding of the source string.
    pub byte_offset: usize,
}

/// Splits `text` into maximal same-class runs, with every digit on its own.
pub fn segment(text: &str) -> Vec<Segment<'_>> {
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut current: Option<ScriptClass> = None;
    for (i, ch) in text.char_indices() {
        let class = classify_char(ch);
        if let Some(prev) = current {
            if prev != class || class == Digit {
                out.push(Segment {
                    text: &text[start..i],
                    script: prev,
                    byte_offset: start,
                });
                start = i;
            }
        }
        current = Some(class);
    }
    if let Some(prev) = current {
        out.push(Segment {
            text: &text[start..],
            script: prev,
            byte_offset: start,
        });
    }
    out
}

/// Pre-tokenizes `text` into spans that BPE merges never cross.
///
/// Whitespace characters are emitted one per pretoken, except that a single
/// U+0020 immediately before a letter run is glued onto that run.
pub fn pretokenize(text: &str) -> Vec<&str> {
    let segments = segment(text);
    let mut out = Vec::with_capacity(segments.len());
    // Start of a pending " " that belongs to the next segment.
    let mut glued_start: Option<usize> = None;
    for (idx, seg) in segments.iter().enumerate() {
        if seg.script == Whitespace {
            let next_is_letter = segments
                .get(idx + 1)
                .map(|s| s.script.is_letter())
                .unwrap_or(false);
            let glue_last = next_is_letter && seg.text.ends_with(' ');
            let body_end = if glue_last {
                seg.text.len() - 1
            } else {
                seg.text.len()
            };
            let body = &seg.text[..body_end];
            let mut pos = 0;
            for ch in body.chars() {
                let len = ch.len_utf8();
                out.push(&body[pos..pos + len]);
                pos += len;
            }
            if glue_last {
                glued_start = Some(seg.byte_offset + body_end);
            }
        } else {
            let start = glued_start.take().unwrap_or(seg.byte_offset);
            out.push(&text[start..seg.byte_offset + seg.text.len()]);
        }
    }
    out
}
