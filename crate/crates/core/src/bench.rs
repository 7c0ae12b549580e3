//! Characters-per-token compression measurement and multi-domain reports.
//!
//! Rates are pooled over a corpus: total Unicode scalar values divided by
//! total tokens. Reports lay domains out English first, then Korean, then any
//! other language, with general, code and STEM columns inside each language.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bpe::Vocab;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    General,
    Code,
    Stem,
}

impl Category {
    pub fn label(self) -> &'static str {
        match self {
            Category::General => "General",
            Category::Code => "Code",
            Category::Stem => "STEM",
        }
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "general" => Ok(Category::General),
            "code" => Ok(Category::Code),
            "stem" => Ok(Category::Stem),
            other => Err(Error::Config(format!("unknown domain category `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainCorpus {
    pub name: String,
    pub language: String,
    pub category: Category,
    pub docs: Vec<String>,
}

impl DomainCorpus {
    pub fn new(
        name: impl Into<String>,
        language: impl Into<String>,
        category: Category,
        docs: Vec<String>,
    ) -> Self {
        DomainCorpus {
            name: name.into(),
            language: language.into(),
            category,
            docs,
        }
    }

    /// Builds a corpus whose name follows the `{language}-{category}` convention,
    /// e.g. `en-code` or `ko-stem`.
    pub fn from_name(name: &str, docs: Vec<String>) -> Result<Self> {
        let (lang, cat) = name
            .split_once('-')
            .ok_or_else(|| Error::Config(format!("domain name `{name}` is not `lang-category`")))?;
        Ok(DomainCorpus::new(name, lang, cat.parse()?, docs))
    }

    fn sort_key(&self) -> (u8, &str, Category, &str) {
        let lang_rank = match self.language.as_str() {
            "en" => 0,
            "ko" => 1,
            _ => 2,
        };
        (
            lang_rank,
            self.language.as_str(),
            self.category,
            self.name.as_str(),
        )
    }
}

/// Pooled character and token counts for one corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rate {
    pub chars: u64,
    pub tokens: u64,
}

impl Rate {
    pub fn value(&self) -> f64 {
        self.chars as f64 / self.tokens as f64
    }

    /// The exact ratio rounded half-to-even at `places` decimals, as text.
    pub fn rounded(&self, places: u32) -> String {
        let scale = 10u128.pow(places);
        let num = self.chars as u128 * scale;
        let den = self.tokens as u128;
        let mut q = num / den;
        let r = num % den;
        if 2 * r > den || (2 * r == den && q % 2 == 1) {
            q += 1;
        }
        if places == 0 {
            return q.to_string();
        }
        format!(
            "{}.{:0width$}",
            q / scale,
            q % scale,
            width = places as usize
        )
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rounded(4))
    }
}

/// Characters per token over the whole corpus.
pub fn compression_rate(vocab: &Vocab, corpus: &DomainCorpus) -> Result<Rate> {
    if corpus.docs.is_empty() {
        return Err(Error::DomainEmpty(corpus.name.clone()));
    }
    let (chars, tokens) = corpus
        .docs
        .par_iter()
        .map(|d| (d.chars().count() as u64, vocab.count_tokens(d) as u64))
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    if tokens == 0 {
        return Err(Error::Internal(format!(
            "domain `{}` encoded to zero tokens",
            corpus.name
        )));
    }
    Ok(Rate { chars, tokens })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainColumn {
    pub name: String,
    pub language: String,
    pub category: Category,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    /// Columns in display order.
    pub domains: Vec<DomainColumn>,
    /// Tokenizer rows in the order they were supplied.
    pub rows: Vec<(String, BTreeMap<String, Rate>)>,
}

/// Measures every tokenizer on every domain.
pub fn report(
    tokenizers: &[(String, &Vocab)],
    domains: &[DomainCorpus],
) -> Result<CompressionReport> {
    if tokenizers.is_empty() || domains.is_empty() {
        return Err(Error::InvalidArgument(
            "a report needs at least one tokenizer and one domain".into(),
        ));
    }
    let mut ordered: Vec<&DomainCorpus> = domains.iter().collect();
    ordered.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    for w in ordered.windows(2) {
        if w[0].name == w[1].name {
            return Err(Error::Config(format!("duplicate domain `{}`", w[0].name)));
        }
    }

    let mut rows = Vec::with_capacity(tokenizers.len());
    for (name, vocab) in tokenizers {
        let mut cells = BTreeMap::new();
        for d in &ordered {
            let rate = compression_rate(vocab, d).map_err(|e| match e {
                Error::Internal(msg) => Error::Internal(format!("{name} / {}: {msg}", d.name)),
                other => other,
            })?;
            cells.insert(d.name.clone(), rate);
        }
        rows.push((name.clone(), cells));
    }
    Ok(CompressionReport {
        domains: ordered
            .iter()
            .map(|d| DomainColumn {
                name: d.name.clone(),
                language: d.language.clone(),
                category: d.category,
            })
            .collect(),
        rows,
    })
}

fn language_label(tag: &str) -> &str {
    match tag {
        "en" => "English",
        "ko" => "Korean",
        other => other,
    }
}

impl CompressionReport {
    pub fn rate(&self, tokenizer: &str, domain: &str) -> Option<Rate> {
        self.rows
            .iter()
            .find(|(n, _)| n == tokenizer)
            .and_then(|(_, cells)| cells.get(domain).copied())
    }

    fn column_labels(&self) -> Vec<String> {
        self.domains
            .iter()
            .map(|d| {
                let clash = self
                    .domains
                    .iter()
                    .filter(|o| o.language == d.language && o.category == d.category)
                    .count()
                    > 1;
                if clash {
                    d.name.clone()
                } else {
                    d.category.label().to_string()
                }
            })
            .collect()
    }

    /// Aligned plain-text table: a language header row, a category header row,
    /// a rule, then one row per tokenizer with rates at two decimals.
    pub fn render_table(&self) -> String {
        let labels = self.column_labels();
        let first = self
            .rows
            .iter()
            .map(|(n, _)| n.chars().count())
            .chain(std::iter::once("Tokenizer".len()))
            .max()
            .unwrap_or(0)
            + 2;
        let widths: Vec<usize> = labels
            .iter()
            .map(|l| l.chars().count().max(4) + 2)
            .collect();

        let mut lang_row = format!("{:<first$}", "Tokenizer");
        let mut i = 0;
        while i < self.domains.len() {
            let lang = &self.domains[i].language;
            let mut span = 0;
            let mut j = i;
            while j < self.domains.len() && &self.domains[j].language == lang {
                span += widths[j];
                j += 1;
            }
            let _ = write!(lang_row, "{:<span$}", language_label(lang));
            i = j;
        }
        let mut cat_row = " ".repeat(first);
        for (label, w) in labels.iter().zip(&widths) {
            let _ = write!(cat_row, "{label:<w$}");
        }
        let total = first + widths.iter().sum::<usize>();

        let mut out = String::new();
        out.push_str(lang_row.trim_end());
        out.push('\n');
        out.push_str(cat_row.trim_end());
        out.push('\n');
        out.push_str(&"-".repeat(total - 2));
        out.push('\n');
        for (name, cells) in &self.rows {
            let mut line = format!("{name:<first$}");
            for (d, w) in self.domains.iter().zip(&widths) {
                let _ = write!(line, "{:<w$}", cells[&d.name].rounded(2));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }

    /// `{tokenizer: {domain: rate}}` with rates at four decimals, half-to-even.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{");
        for (ri, (name, cells)) in self.rows.iter().enumerate() {
            if ri > 0 {
                out.push(',');
            }
            out.push_str(&serde_json::to_string(name).expect("string serializes"));
            out.push_str(":{");
            for (di, d) in self.domains.iter().enumerate() {
                if di > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(&d.name).expect("string serializes"));
                out.push(':');
                out.push_str(&cells[&d.name].rounded(4));
            }
            out.push('}');
        }
        out.push('}');
        out
    }
}
