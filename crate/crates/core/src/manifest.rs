//! Run manifests and atomic output writing.
//!
//! Every command records what it ran (the resolved invocation and the full
//! generator configuration) and which files it produced. Manifests contain
//! no timestamps or absolute output paths, so replaying one into another
//! directory reproduces every file, the manifest included, byte for byte.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::engine::GeneratorConfig;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BitFormat {
    #[default]
    Packed,
    Ascii,
}

impl BitFormat {
    pub fn extension(self) -> &'static str {
        match self {
            BitFormat::Packed => "bin",
            BitFormat::Ascii => "txt",
        }
    }
}

/// A fully resolved subcommand invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Invocation {
    CheckPoly {
        polynomial: String,
    },
    Generate {
        format: BitFormat,
    },
    Sweep {
        thresholds: Vec<u32>,
    },
    Dynamic {
        stream: usize,
    },
    Correlate {
        files: Vec<PathBuf>,
        max_lag: Option<usize>,
        packed_len: Option<usize>,
    },
    Capacity {
        n: u32,
        k: u32,
        m: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Invocation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<GeneratorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Output file names relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory followed by a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}
