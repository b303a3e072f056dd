use std::path::{Path, PathBuf};

use gfk_core::chain::ChainConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// What a run did, enough to replay it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ManifestCommand {
    GenerateChain,
    RunExperiment,
    Report { input: PathBuf, svg: PathBuf },
}

impl ManifestCommand {
    pub fn name(&self) -> &'static str {
        match self {
            ManifestCommand::GenerateChain => "generate-chain",
            ManifestCommand::RunExperiment => "run-experiment",
            ManifestCommand::Report { .. } => "report",
        }
    }

    /// Each command has its own manifest so commands can share a directory.
    pub fn manifest_file(&self) -> String {
        format!("{}.manifest.json", self.name())
    }
}

/// Written to the output directory before any result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: ManifestCommand,
    pub base_seed: u64,
    /// RFC 3339, UTC. Informational only.
    pub timestamp: String,
    /// Fully resolved configuration, every default spelled out.
    pub config: ChainConfig,
    pub out_dir: PathBuf,
    /// Files the run writes, relative to `out_dir`.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(
        command: ManifestCommand,
        config: ChainConfig,
        out_dir: &Path,
        outputs: Vec<String>,
    ) -> Self {
        Self {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            base_seed: config.base_seed,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config,
            out_dir: out_dir.to_path_buf(),
            outputs,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(self.command.manifest_file());
        std::fs::write(&path, self.to_json()).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

pub fn parse_manifest(text: &str) -> CliResult<RunManifest> {
    let manifest: RunManifest = serde_json::from_str(text)
        .map_err(|e| CliError::usage(format!("invalid manifest: {e}")))?;
    if manifest.base_seed != manifest.config.base_seed {
        return Err(CliError::usage(format!(
            "invalid manifest: base_seed {} disagrees with config.base_seed {}",
            manifest.base_seed, manifest.config.base_seed
        )));
    }
    manifest.config.validate()?;
    if manifest.artifact_version != env!("CARGO_PKG_VERSION") {
        log::warn!(
            "manifest was written by version {}, replaying with {}",
            manifest.artifact_version,
            env!("CARGO_PKG_VERSION")
        );
    }
    Ok(manifest)
}

pub fn load_manifest(path: &Path) -> CliResult<RunManifest> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read manifest {}: {e}", path.display())))?;
    parse_manifest(&text)
}
