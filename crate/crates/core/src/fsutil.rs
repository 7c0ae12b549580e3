//! Atomic file output.
//!
//! Everything is staged under a `.tmp-` name next to its destination and
//! renamed into place. Staged paths are tracked so that a signal handler can
//! remove them with [`discard_staged_and_exit`].

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, MutexGuard};

use tempfile::{NamedTempFile, TempDir};

use crate::error::{Error, Result};

static STAGED: Mutex<BTreeSet<PathBuf>> = Mutex::new(BTreeSet::new());

fn registry() -> MutexGuard<'static, BTreeSet<PathBuf>> {
    STAGED.lock().unwrap_or_else(|e| e.into_inner())
}

fn parent_of(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

fn staged(path: &Path, bytes: &[u8]) -> Result<NamedTempFile> {
    let dir = parent_of(path);
    let mut tmp = {
        let mut reg = registry();
        let tmp = tempfile::Builder::new()
            .prefix(".tmp-")
            .tempfile_in(dir)
            .map_err(|e| Error::io(dir, e))?;
        reg.insert(tmp.path().to_path_buf());
        tmp
    };
    let written = tmp
        .write_all(bytes)
        .and_then(|()| tmp.as_file().sync_all())
        .map_err(|e| Error::io(tmp.path(), e));
    if written.is_err() {
        registry().remove(tmp.path());
    }
    written.map(|()| tmp)
}

fn persist(reg: &mut BTreeSet<PathBuf>, tmp: NamedTempFile, path: &Path) -> Result<()> {
    let staged_at = tmp.path().to_path_buf();
    let result = tmp
        .persist(path)
        .map(drop)
        .map_err(|e| Error::io(path, e.error));
    reg.remove(&staged_at);
    result
}

/// Writes `bytes` to a temp file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = staged(path, bytes)?;
    persist(&mut registry(), tmp, path)
}

/// Writes several files so that either all of them land or none do.
///
/// Every file is staged before any is renamed; if a rename fails, the files
/// already renamed by this call are removed again.
pub fn write_atomic_all(files: &[(&Path, &[u8])]) -> Result<()> {
    let temps = files
        .iter()
        .map(|(p, b)| staged(p, b))
        .collect::<Result<Vec<_>>>()?;
    let mut reg = registry();
    let mut done: Vec<&Path> = Vec::new();
    for (tmp, (path, _)) in temps.into_iter().zip(files) {
        if let Err(e) = persist(&mut reg, tmp, path) {
            for p in done {
                let _ = std::fs::remove_file(p);
            }
            return Err(e);
        }
        done.push(path);
    }
    Ok(())
}

/// A directory built up next to its destination and renamed into place whole.
/// Dropping it without [`StagingDir::commit`] removes it.
pub struct StagingDir {
    dir: Option<TempDir>,
}

impl StagingDir {
    pub fn new_for(dest: &Path) -> Result<Self> {
        let parent = parent_of(dest);
        let mut reg = registry();
        let dir = tempfile::Builder::new()
            .prefix(".tmp-")
            .tempdir_in(parent)
            .map_err(|e| Error::io(parent, e))?;
        reg.insert(dir.path().to_path_buf());
        Ok(Self { dir: Some(dir) })
    }

    pub fn path(&self) -> &Path {
        self.dir.as_ref().expect("live staging dir").path()
    }

    /// Renames the directory to `dest`, which must not exist.
    pub fn commit(mut self, dest: &Path) -> Result<()> {
        let dir = self.dir.take().expect("live staging dir");
        let mut reg = registry();
        let staged_at = dir.path().to_path_buf();
        std::fs::rename(&staged_at, dest).map_err(|e| Error::io(dest, e))?;
        let _ = dir.keep();
        reg.remove(&staged_at);
        Ok(())
    }
}

impl Drop for StagingDir {
    fn drop(&mut self) {
        if let Some(dir) = self.dir.take() {
            let mut reg = registry();
            reg.remove(dir.path());
            drop(dir);
        }
    }
}

/// Removes every staged file and directory not yet moved into place, then
/// exits. The registry stays locked, so no rename can start in between.
pub fn discard_staged_and_exit(code: i32) -> ! {
    let reg = registry();
    for p in reg.iter() {
        let _ = if p.is_dir() {
            std::fs::remove_dir_all(p)
        } else {
            std::fs::remove_file(p)
        };
    }
    std::process::exit(code)
}
