use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::DocRecord;
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardEntry {
    pub path: String,
    pub docs: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub shards: Vec<ShardEntry>,
    pub total_docs: usize,
}

fn shard_name(index: usize) -> String {
    format!("shard-{index:05}.jsonl")
}

/// Writes `docs` as JSON-lines shards plus `manifest.json`.
///
/// Each file is written atomically and the manifest goes last. On failure the
/// shards written by this call are removed and no manifest is left behind.
pub fn shard(
    docs: &[DocRecord],
    max_docs_per_shard: usize,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    if max_docs_per_shard == 0 {
        return Err(Error::InvalidArgument(
            "max_docs_per_shard must be at least 1".into(),
        ));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let manifest_path = out_dir.join(MANIFEST);
    let mut written: Vec<PathBuf> = Vec::new();
    let cleanup = |written: &[PathBuf]| {
        for p in written {
            let _ = std::fs::remove_file(p);
        }
    };

    let mut manifest = Manifest {
        shards: Vec::new(),
        total_docs: docs.len(),
    };
    for (i, chunk) in docs.chunks(max_docs_per_shard).enumerate() {
        let mut body = Vec::new();
        for d in chunk {
            serde_json::to_writer(&mut body, d)?;
            body.push(b'\n');
        }
        let name = shard_name(i);
        let path = out_dir.join(&name);
        if let Err(e) = write_atomic(&path, &body) {
            cleanup(&written);
            return Err(e);
        }
        written.push(path);
        manifest.shards.push(ShardEntry {
            path: name,
            docs: chunk.len(),
            sha256: hex::encode(Sha256::digest(&body)),
        });
    }
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    if let Err(e) = write_atomic(&manifest_path, text.as_bytes()) {
        cleanup(&written);
        return Err(e);
    }
    Ok(written)
}

/// Reads the shards listed in `dir/manifest.json`, checking digests and counts.
pub fn read_shards(dir: &Path) -> Result<Vec<DocRecord>> {
    let manifest_path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    let mut docs = Vec::with_capacity(manifest.total_docs);
    for entry in &manifest.shards {
        let path = dir.join(&entry.path);
        let body = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if hex::encode(Sha256::digest(&body)) != entry.sha256 {
            return Err(Error::InvalidArgument(format!(
                "{}: digest mismatch",
                entry.path
            )));
        }
        let before = docs.len();
        for line in body.split(|&b| b == b'\n').filter(|l| !l.is_empty()) {
            docs.push(serde_json::from_slice(line)?);
        }
        if docs.len() - before != entry.docs {
            return Err(Error::InvalidArgument(format!(
                "{}: document count mismatch",
                entry.path
            )));
        }
    }
    if docs.len() != manifest.total_docs {
        return Err(Error::InvalidArgument(
            "manifest total does not match shards".into(),
        ));
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(n: usize) -> Vec<DocRecord> {
        (0..n)
            .map(|i| DocRecord::new(format!("document number {i}"), "t"))
            .collect()
    }

    #[test]
    fn splits_by_size() {
        let dir = tempfile::tempdir().unwrap();
        let paths = shard(&docs(10), 4, dir.path()).unwrap();
        assert_eq!(paths.len(), 3);
        let m: Manifest =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(MANIFEST)).unwrap())
                .unwrap();
        assert_eq!(
            m.shards.iter().map(|s| s.docs).collect::<Vec<_>>(),
            vec![4, 4, 2]
        );
        assert_eq!(m.shards[2].path, "shard-00002.jsonl");
        assert_eq!(read_shards(dir.path()).unwrap(), docs(10));
    }

    #[test]
    fn no_docs_gives_empty_manifest() {
        let dir = tempfile::tempdir().unwrap();
        assert!(shard(&[], 4, dir.path()).unwrap().is_empty());
        let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(entries.len(), 1);
        assert!(read_shards(dir.path()).unwrap().is_empty());
    }

    #[test]
    fn failure_leaves_nothing_behind() {
        let dir = tempfile::tempdir().unwrap();
        // A directory where the second shard should go makes its rename fail.
        std::fs::create_dir(dir.path().join(shard_name(1))).unwrap();
        assert!(shard(&docs(10), 4, dir.path()).is_err());
        let mut left: Vec<String> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        left.sort();
        assert_eq!(left, vec![shard_name(1)]);
    }

    #[test]
    fn tampering_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        shard(&docs(3), 2, dir.path()).unwrap();
        let p = dir.path().join(shard_name(0));
        let mut body = std::fs::read_to_string(&p).unwrap();
        body = body.replace("number 0", "number 9");
        std::fs::write(&p, body).unwrap();
        assert!(read_shards(dir.path()).is_err());
    }
}
