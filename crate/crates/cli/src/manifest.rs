//! Run manifests: what was produced, with checksums, and how it went.

use crate::report::CheckResult;
use anyhow::{Context, Result};
use rflab_core::hash::fnv1a64;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub bytes: u64,
    pub fnv1a64: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub scenario: String,
    pub config_fingerprint: String,
    pub code_version: String,
    pub passed: bool,
    pub checks_passed: usize,
    pub checks_total: usize,
    pub files: Vec<FileRecord>,
    /// Wall-clock timings; the only nondeterministic manifest field.
    pub timings: Timings,
}

/// Collects artifacts for one run directory and registers checksums as
/// files are written.
pub struct OutputDir {
    dir: PathBuf,
    files: Vec<FileRecord>,
    started: Instant,
}

impl OutputDir {
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)
            .with_context(|| format!("creating output dir {}", dir.display()))?;
        Ok(Self { dir, files: Vec::new(), started: Instant::now() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)
            .with_context(|| format!("writing {}", path.display()))?;
        self.files.push(FileRecord {
            name: name.to_string(),
            bytes: contents.len() as u64,
            fnv1a64: format!("{:016x}", fnv1a64(contents.as_bytes())),
        });
        Ok(())
    }

    /// Writes summary.json and manifest.json, returning the manifest.
    /// Every emitted file, including the summary, is listed with its
    /// checksum; the manifest itself is the only unlisted file.
    pub fn finalize(
        mut self,
        scenario: &str,
        config_fingerprint: u64,
        checks: &[CheckResult],
    ) -> Result<RunManifest> {
        #[derive(Serialize)]
        struct Summary<'a> {
            scenario: &'a str,
            passed: bool,
            checks: &'a [CheckResult],
        }
        let passed = checks.iter().all(|c| c.passed);
        let summary = serde_json::to_string_pretty(&Summary { scenario, passed, checks })?;
        self.write("summary.json", &summary)?;

        let manifest = RunManifest {
            scenario: scenario.to_string(),
            config_fingerprint: format!("{config_fingerprint:016x}"),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            passed,
            checks_passed: checks.iter().filter(|c| c.passed).count(),
            checks_total: checks.len(),
            files: self.files.clone(),
            timings: Timings { total_seconds: self.started.elapsed().as_secs_f64() },
        };
        let text = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(self.dir.join("manifest.json"), text)
            .with_context(|| "writing manifest.json")?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_every_file_with_checksums() {
        let tmp = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(tmp.path().join("run")).unwrap();
        out.write("a.csv", "x,y\n1,2\n").unwrap();
        out.write("b.json", "{}").unwrap();
        let checks = vec![CheckResult::within_tol("t", 0.0, 1.0, 0.0)];
        let manifest = out.finalize("weyl", 0xabcd, &checks).unwrap();
        assert!(manifest.passed);
        let names: Vec<&str> = manifest.files.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, vec!["a.csv", "b.json", "summary.json"]);
        // checksum matches the exact bytes
        assert_eq!(
            manifest.files[0].fnv1a64,
            format!("{:016x}", fnv1a64(b"x,y\n1,2\n"))
        );
        assert!(tmp.path().join("run/manifest.json").exists());
    }
}
