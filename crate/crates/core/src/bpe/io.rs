//! Canonical JSON vocabulary file: sorted keys, no insignificant whitespace.
//!
//! ```text
//! {"base":256,"merges":[[rank,left,right,result],...],"tokens":{"id":"<base64>",...},"version":1}
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{MergeRule, TokenId, Vocab, BASE_TOKENS};
use crate::error::{Error, Result};

pub const VOCAB_FORMAT_VERSION: u32 = 1;

// Field order is alphabetical so serde emits sorted keys.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VocabFile {
    base: u32,
    merges: Vec<[u32; 4]>,
    tokens: BTreeMap<String, String>,
    version: u32,
}

impl Vocab {
    pub fn to_json(&self) -> String {
        let file = VocabFile {
            base: BASE_TOKENS,
            merges: self
                .merges()
                .map(|m| [m.rank, m.left.0, m.right.0, m.result.0])
                .collect(),
            tokens: self
                .raw_tokens()
                .iter()
                .enumerate()
                .filter_map(|(id, t)| t.as_ref().map(|b| (id.to_string(), B64.encode(b))))
                .collect(),
            version: VOCAB_FORMAT_VERSION,
        };
        serde_json::to_string(&file).expect("vocabulary serializes")
    }

    pub fn from_json(text: &str) -> Result<Vocab> {
        let file: VocabFile = serde_json::from_str(text)?;
        if file.version != VOCAB_FORMAT_VERSION {
            return Err(Error::InvalidVocab(format!(
                "unsupported version {}",
                file.version
            )));
        }
        if file.base != BASE_TOKENS {
            return Err(Error::InvalidVocab(format!(
                "base must be 256, got {}",
                file.base
            )));
        }
        let mut tokens: Vec<Option<Vec<u8>>> = Vec::new();
        for (key, value) in &file.tokens {
            let id: usize = key
                .parse()
                .map_err(|_| Error::InvalidVocab(format!("token key `{key}` is not an id")))?;
            let bytes = B64
                .decode(value)
                .map_err(|e| Error::InvalidVocab(format!("token {id}: {e}")))?;
            if id >= tokens.len() {
                tokens.resize(id + 1, None);
            }
            tokens[id] = Some(bytes);
        }
        let mut last_rank = None;
        let mut merges = Vec::with_capacity(file.merges.len());
        for [rank, left, right, result] in file.merges {
            if last_rank.is_some_and(|r| r >= rank) {
                return Err(Error::InvalidVocab("merges are not sorted by rank".into()));
            }
            last_rank = Some(rank);
            merges.push(MergeRule {
                left: TokenId(left),
                right: TokenId(right),
                result: TokenId(result),
                rank,
            });
        }
        // Ids past the last active token may have been retired; keep the id space.
        let max_ref = merges
            .iter()
            .map(|m| m.result.0 as usize + 1)
            .max()
            .unwrap_or(0);
        if tokens.len() < max_ref {
            tokens.resize(max_ref, None);
        }
        Vocab::from_parts(tokens, merges)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Vocab> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Vocab::from_json(&text)
    }

    /// Writes the canonical JSON atomically (temp file + rename).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::fsutil::write_atomic(path.as_ref(), self.to_json().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_layout() {
        let v = Vocab::from_byte_merges(&[("a", "b")]).unwrap();
        let json = v.to_json();
        assert!(json.starts_with(
            r#"{"base":256,"merges":[[0,97,98,256]],"tokens":{"0":"AA==","1":"AQ==","10":"Cg==","#
        ));
        assert!(json.contains(r#""255":"/w==","256":"YWI=","26":"Gg==""#));
        assert!(json.ends_with(r#"},"version":1}"#));
        assert!(!json.contains(' '));
        assert_eq!(Vocab::from_json(&json).unwrap(), v);
    }

    #[test]
    fn rejects_bad_files() {
        let v = Vocab::from_byte_merges(&[("a", "b")]).unwrap();
        let json = v.to_json();
        assert!(Vocab::from_json(&json.replace(r#""version":1"#, r#""version":9"#)).is_err());
        assert!(Vocab::from_json(&json.replace(r#""base":256"#, r#""base":255"#)).is_err());
        assert!(Vocab::from_json(&json.replace("[0,97,98,256]", "[0,97,99,256]")).is_err());
        assert!(Vocab::from_json("{}").is_err());
    }
}
