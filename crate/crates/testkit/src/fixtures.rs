use std::path::{Path, PathBuf};

use vocadapt::bench::DomainCorpus;
use vocadapt::Vocab;

/// The repository-level `fixtures/` directory.
pub fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn path(rel: &str) -> PathBuf {
    root().join(rel)
}

pub fn read(rel: &str) -> String {
    let p = path(rel);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

/// The `text` field of every line of a JSON-lines file.
pub fn jsonl_texts(rel: &str) -> Vec<String> {
    read(rel)
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).expect("json line");
            v["text"].as_str().expect("text field").to_string()
        })
        .collect()
}

pub fn bilingual_vocab(name: &str) -> Vocab {
    Vocab::load(path(&format!("bilingual/vocab/{name}.json"))).expect("fixture vocab")
}

pub fn bilingual_domain(name: &str) -> DomainCorpus {
    let docs = jsonl_texts(&format!("bilingual/domains/{name}/docs.jsonl"));
    DomainCorpus::from_name(name, docs).expect("domain name")
}

pub const BILINGUAL_DOMAINS: [&str; 5] =
    ["en-general", "en-code", "en-stem", "ko-general", "ko-stem"];

/// One of the four chat template listings with wrapped lines joined back.
/// Lines ending in a space were wrapped for the page.
pub fn chat_template(name: &str) -> String {
    let raw = read(&format!("chatml/{name}.txt"));
    let mut out = String::new();
    for line in raw.split_inclusive('\n') {
        match line.strip_suffix(" \n") {
            Some(head) => {
                out.push_str(head);
                out.push(' ');
            }
            None => out.push_str(line),
        }
    }
    out
}
