//! Run records appended to a JSON-lines cache, and artifact files with content hashes.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const CACHE_ENV: &str = "CETRADEOFF_CACHE";

#[derive(Clone, Debug, Serialize)]
pub struct Artifact {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub spec_hash: Option<String>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub outputs: serde_json::Value,
    pub wall_time_s: f64,
    pub artifacts: Vec<Artifact>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Replaces `path` with `bytes` through a sibling temporary file and a rename, so readers never
/// observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// Files written by one run, with their hashes.
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<Artifact>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), written: Vec::new() }
    }

    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, contents.as_bytes())?;
        self.written.push(Artifact { path: path.clone(), sha256: sha256_hex(contents.as_bytes()) });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn into_vec(self) -> Vec<Artifact> {
        self.written
    }
}

/// `$CETRADEOFF_CACHE`, else `runs.jsonl` in the output directory.
pub fn cache_path(out: &Path) -> PathBuf {
    match std::env::var_os(CACHE_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => out.join("runs.jsonl"),
    }
}

/// Appends one record by rewriting the cache through [`write_atomic`].
pub fn append(path: &Path, record: &RunRecord) -> io::Result<()> {
    let mut contents = match fs::read(path) {
        Ok(bytes) => bytes,
        Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(e),
    };
    if contents.last().is_some_and(|&b| b != b'\n') {
        contents.push(b'\n');
    }
    contents.extend(serde_json::to_vec(record).map_err(io::Error::other)?);
    contents.push(b'\n');
    write_atomic(path, &contents)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(command: &str) -> RunRecord {
        RunRecord {
            command: command.into(),
            spec_hash: None,
            config: serde_json::json!({}),
            seed: 1,
            outputs: serde_json::json!({"value": 1.0}),
            wall_time_s: 0.0,
            artifacts: Vec::new(),
        }
    }

    #[test]
    fn append_keeps_one_record_per_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/runs.jsonl");
        append(&path, &record("a")).unwrap();
        append(&path, &record("b")).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        for line in lines {
            serde_json::from_str::<serde_json::Value>(line).unwrap();
        }
        // No temporary files are left behind.
        assert_eq!(fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn artifacts_record_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::new(dir.path());
        let p = a.write("x.txt", "hello").unwrap();
        let rec = a.into_vec();
        assert_eq!(rec[0].path, p);
        assert_eq!(rec[0].sha256, "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824");
    }
}
