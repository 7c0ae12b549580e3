use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use vocadapt::bench::DomainCorpus;
use vocadapt::corpus::{read_input_dir, read_input_file};
use vocadapt::fsutil::write_atomic;

/// Documents from a directory (`.txt` and `.jsonl` files), a `.jsonl` file,
/// or any other file taken whole.
pub fn load_docs(path: &Path) -> Result<Vec<String>> {
    let raw = if path.is_dir() {
        read_input_dir(path)?
    } else {
        read_input_file(path, &path.display().to_string())?
    };
    let mut docs = Vec::with_capacity(raw.len());
    for d in raw {
        let text = String::from_utf8(d.bytes)
            .map_err(|_| anyhow::anyhow!("{}: not valid UTF-8", d.source))?;
        docs.push(text);
    }
    Ok(docs)
}

pub fn load_many(paths: &[PathBuf]) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(load_docs(p)?);
    }
    Ok(out)
}

/// A domain corpus named after its file or directory, e.g. `en-code/`.
pub fn load_domain(path: &Path) -> Result<DomainCorpus> {
    let name = path
        .file_stem()
        .and_then(|n| n.to_str())
        .with_context(|| format!("cannot name domain from {}", path.display()))?;
    let docs = load_docs(path)?;
    Ok(DomainCorpus::from_name(name, docs)?)
}

pub fn read_text(input: Option<&Path>) -> Result<String> {
    match input {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .context("reading stdin")?;
            Ok(s)
        }
    }
}

pub fn write_output(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(p) => Ok(write_atomic(p, bytes)?),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}
