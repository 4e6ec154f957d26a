//! Output files are staged in memory and written together, so a failed run
//! leaves nothing behind.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;

pub struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    pub fn new() -> Self {
        Self { files: Vec::new() }
    }

    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<String>) {
        self.files.push((name.into(), contents.into()));
    }

    /// Writes every staged file under `dir`. On error, files written so far
    /// are removed, as is `dir` if this call created it.
    pub fn commit(self, dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
        let created = !dir.exists();
        let mut written = Vec::with_capacity(self.files.len());
        let result = (|| -> anyhow::Result<()> {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for (name, contents) in &self.files {
                let path = dir.join(name);
                fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
                written.push(path);
            }
            Ok(())
        })();
        if let Err(e) = result {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            if created {
                let _ = fs::remove_dir(dir);
            }
            return Err(e);
        }
        Ok(written)
    }
}

/// Pretty JSON with a trailing newline.
pub fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}
