//! Corpus curation: normalization, heuristic filtering, PII masking, MinHash
//! near-duplicate removal, classifier metrics and sharded output.

mod eval;
mod minhash;
mod pii;
mod shard;
mod signals;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

pub use eval::{classifier_eval, EvalCounts, EvalReport};
pub use minhash::{
    dedup, estimate_jaccard, minhash, minhash_text, DedupParams, MinHashParams, MinHashSignature,
};
pub use pii::{default_patterns, mask_pii, mask_text, NamedPattern};
pub use shard::{read_shards, shard, Manifest, ShardEntry, MANIFEST};
pub use signals::{
    filter, heuristic_signals, preset, FilterVerdict, LexicalScorer, QualityScorer, Range, Reason,
    Thresholds, SIGNAL_NAMES,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocRecord {
    pub id: String,
    pub text: String,
    pub source: String,
    #[serde(default)]
    pub signals: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality_score: Option<f64>,
    #[serde(default)]
    pub pii_masked: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<MinHashSignature>,
}

impl DocRecord {
    /// A record for already-clean text; the id is the text's digest.
    pub fn new(text: impl Into<String>, source: impl Into<String>) -> Self {
        let text = text.into();
        DocRecord {
            id: content_id(&text),
            text,
            source: source.into(),
            signals: BTreeMap::new(),
            quality_score: None,
            pii_masked: false,
            signature: None,
        }
    }
}

fn content_id(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Decodes and cleans raw bytes. Invalid UTF-8 is an error.
pub fn normalize(raw: &[u8], source: &str) -> Result<DocRecord> {
    let text = std::str::from_utf8(raw)
        .map_err(|e| Error::InvalidArgument(format!("{source}: not UTF-8: {e}")))?;
    normalize_str(text, source)
}

/// Like [`normalize`] but replaces invalid UTF-8 with U+FFFD.
pub fn normalize_lossy(raw: &[u8], source: &str) -> Result<DocRecord> {
    normalize_str(&String::from_utf8_lossy(raw), source)
}

/// NFC, LF line endings, no trailing whitespace, at most two consecutive blank
/// lines, and no blank lines at either end.
pub fn normalize_str(text: &str, source: &str) -> Result<DocRecord> {
    let text = text.replace("\r\n", "\n");
    let text: String = text.nfc().collect();
    let mut out = String::with_capacity(text.len());
    let mut blanks = 0;
    for line in text.split('\n') {
        let line = line.trim_end();
        if line.is_empty() {
            blanks += 1;
            continue;
        }
        if !out.is_empty() {
            out.push('\n');
            for _ in 0..blanks.min(2) {
                out.push('\n');
            }
        }
        blanks = 0;
        out.push_str(line);
    }
    if out.is_empty() {
        return Err(Error::EmptyDocument);
    }
    Ok(DocRecord::new(out, source))
}

/// One raw input document and where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDoc {
    pub source: String,
    pub bytes: Vec<u8>,
    pub quality_score: Option<f64>,
}

#[derive(Deserialize)]
struct JsonLine {
    text: String,
    #[serde(default)]
    source: Option<String>,
    #[serde(default)]
    quality_score: Option<f64>,
}

/// Reads every `.txt` file (one document each) and `.jsonl` file (one
/// document per line with a `text` field) below `dir`, in path order.
pub fn read_input_dir(dir: &Path) -> Result<Vec<RawDoc>> {
    let mut files = Vec::new();
    collect_files(dir, &mut files)?;
    files.sort();
    let mut docs = Vec::new();
    for path in files {
        if matches!(
            path.extension().and_then(|e| e.to_str()),
            Some("txt" | "jsonl")
        ) {
            let rel = path
                .strip_prefix(dir)
                .unwrap_or(&path)
                .to_string_lossy()
                .into_owned();
            docs.extend(read_input_file(&path, &rel)?);
        }
    }
    Ok(docs)
}

/// Reads one input file: `.jsonl` gives a document per line, anything else
/// is a single document.
pub fn read_input_file(path: &Path, source: &str) -> Result<Vec<RawDoc>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if path.extension().and_then(|e| e.to_str()) != Some("jsonl") {
        return Ok(vec![RawDoc {
            source: source.to_string(),
            bytes,
            quality_score: None,
        }]);
    }
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| Error::InvalidArgument(format!("{source}: not UTF-8: {e}")))?;
    let mut docs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonLine = serde_json::from_str(line)
            .map_err(|e| Error::InvalidArgument(format!("{source}:{}: {e}", n + 1)))?;
        docs.push(RawDoc {
            source: rec.source.unwrap_or_else(|| format!("{source}:{}", n + 1)),
            bytes: rec.text.into_bytes(),
            quality_score: rec.quality_score,
        });
    }
    Ok(docs)
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let kind = entry.file_type().map_err(|e| Error::io(&path, e))?;
        if kind.is_dir() {
            collect_files(&path, out)?;
        } else if kind.is_file() {
            out.push(path);
        }
    }
    Ok(())
}

/// Settings for [`curate`]. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurateConfig {
    /// Named threshold preset applied before `thresholds` overrides.
    pub preset: String,
    pub thresholds: BTreeMap<String, Range>,
    /// Score documents that carry no quality score with the lexical scorer.
    pub score_missing: bool,
    pub mask_pii: bool,
    /// Extra `NAME = regex` patterns, applied after the defaults.
    pub pii_patterns: BTreeMap<String, String>,
    pub dedup: bool,
    pub minhash_k: usize,
    pub shingle_n: usize,
    pub bands: usize,
    pub dedup_threshold: f64,
    pub seed: u64,
    pub max_docs_per_shard: usize,
    pub lossy_utf8: bool,
}

impl Default for CurateConfig {
    fn default() -> Self {
        CurateConfig {
            preset: "default".into(),
            thresholds: BTreeMap::new(),
            score_missing: false,
            mask_pii: true,
            pii_patterns: BTreeMap::new(),
            dedup: true,
            minhash_k: 128,
            shingle_n: 5,
            bands: 16,
            dedup_threshold: 0.8,
            seed: 0,
            max_docs_per_shard: 1000,
            lossy_utf8: false,
        }
    }
}

impl CurateConfig {
    pub fn thresholds(&self) -> Result<Thresholds> {
        let mut t = preset(&self.preset)?;
        for (k, v) in &self.thresholds {
            t.insert(k.clone(), *v);
        }
        signals::check_names(&t)?;
        Ok(t)
    }

    pub fn dedup_params(&self) -> Result<DedupParams> {
        DedupParams::new(
            MinHashParams::new(self.minhash_k, self.shingle_n, self.seed)?,
            self.bands,
            self.dedup_threshold,
        )
    }

    pub fn patterns(&self) -> Result<Vec<NamedPattern>> {
        let mut p = default_patterns();
        for (name, re) in &self.pii_patterns {
            p.push(NamedPattern::new(name, re)?);
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurateStats {
    pub input: usize,
    pub empty: usize,
    pub filtered: usize,
    pub masked: usize,
    pub duplicates: usize,
    pub kept: usize,
    /// How many dropped documents each rule was responsible for.
    pub filter_reasons: BTreeMap<String, usize>,
}

/// Normalize, score, filter, mask and deduplicate, preserving input order.
pub fn curate(raw: &[RawDoc], cfg: &CurateConfig) -> Result<(Vec<DocRecord>, CurateStats)> {
    let thresholds = cfg.thresholds()?;
    let patterns = if cfg.mask_pii {
        cfg.patterns()?
    } else {
        Vec::new()
    };
    let dedup_params = cfg.dedup_params()?;
    if cfg.max_docs_per_shard == 0 {
        return Err(Error::Config(
            "max_docs_per_shard must be at least 1".into(),
        ));
    }
    let scorer = LexicalScorer::default();

    let staged: Vec<Result<Option<(DocRecord, FilterVerdict)>>> = raw
        .par_iter()
        .map(|r| {
            let doc = if cfg.lossy_utf8 {
                normalize_lossy(&r.bytes, &r.source)
            } else {
                normalize(&r.bytes, &r.source)
            };
            let mut doc = match doc {
                Ok(d) => d,
                Err(Error::EmptyDocument) => return Ok(None),
                Err(e) => return Err(e),
            };
            doc.signals = heuristic_signals(&doc);
            doc.quality_score = match r.quality_score {
                Some(q) if !(0.0..=5.0).contains(&q) => {
                    return Err(Error::InvalidArgument(format!(
                        "{}: quality score {q} outside [0, 5]",
                        r.source
                    )))
                }
                Some(q) => Some(q),
                None if cfg.score_missing => Some(scorer.score(&doc)),
                None => None,
            };
            let verdict = filter(&doc, &thresholds)?;
            if verdict.keep && !patterns.is_empty() {
                doc = mask_pii(&doc, &patterns);
            }
            Ok(Some((doc, verdict)))
        })
        .collect();

    let mut stats = CurateStats {
        input: raw.len(),
        ..CurateStats::default()
    };
    let mut kept = Vec::new();
    for item in staged {
        match item? {
            None => stats.empty += 1,
            Some((doc, verdict)) if verdict.keep => {
                if doc.pii_masked {
                    stats.masked += 1;
                }
                kept.push(doc);
            }
            Some((_, verdict)) => {
                stats.filtered += 1;
                for r in verdict.reasons {
                    *stats.filter_reasons.entry(r.rule).or_default() += 1;
                }
            }
        }
    }
    let before = kept.len();
    let kept = if cfg.dedup {
        dedup(kept, &dedup_params)?
    } else {
        kept
    };
    stats.duplicates = before - kept.len();
    stats.kept = kept.len();
    Ok((kept, stats))
}
