//! Output directory bookkeeping: atomic writes and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    command: &'a str,
    version: &'a str,
    config: &'a RunConfig,
    files: Vec<String>,
    stages: &'a [StageTime],
}

pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
    stages: Vec<StageTime>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|source| CliError::Io {
            path: root.to_path_buf(),
            source,
        })?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            files: Vec::new(),
            stages: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Writes via a temporary file and a rename so readers never see a
    /// partial file.
    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let target = self.path(name);
        let tmp = self.path(&format!(".{name}.tmp"));
        let io = |source| CliError::Io {
            path: target.clone(),
            source,
        };
        fs::write(&tmp, contents).map_err(io)?;
        fs::rename(&tmp, &target).map_err(io)?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(())
    }

    /// Pretty JSON with a leading `schema_version` field.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let wrapped = Versioned {
            schema_version: SCHEMA_VERSION,
            body: value,
        };
        let mut text = serde_json::to_string_pretty(&wrapped)?;
        text.push('\n');
        self.write(name, &text)
    }

    /// Single-line JSON with a leading `schema_version`, for model files.
    pub fn write_json_compact<T: Serialize>(
        &mut self,
        name: &str,
        value: &T,
    ) -> Result<(), CliError> {
        let wrapped = Versioned {
            schema_version: SCHEMA_VERSION,
            body: value,
        };
        let mut text = serde_json::to_string(&wrapped)?;
        text.push('\n');
        self.write(name, &text)
    }

    /// Runs `f` and records its wall time under `stage`.
    pub fn timed<T>(
        &mut self,
        stage: &str,
        f: impl FnOnce(&mut Self) -> Result<T, CliError>,
    ) -> Result<T, CliError> {
        let start = Instant::now();
        let out = f(self);
        self.stages.push(StageTime {
            stage: stage.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    /// Writes `manifest.json`. It holds wall times, so unlike the other
    /// outputs it differs between runs.
    pub fn finish(mut self, command: &str, config: &RunConfig) -> Result<Vec<String>, CliError> {
        let mut files = self.files.clone();
        files.sort();
        let manifest = Manifest {
            schema_version: SCHEMA_VERSION,
            command,
            version: infodemic::VERSION,
            config,
            files: files.clone(),
            stages: &self.stages,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        self.write("manifest.json", &text)?;
        Ok(files)
    }
}
