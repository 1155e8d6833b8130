//! Loading question assets from disk or from the copies built into the binary.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use arrowvqa_core::question::{AssetBundle, AssetError, Metadata, TemplateRecord, METADATA_FILE, SYNONYMS_FILE, TEMPLATES_FILE};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::sha256_hex;

const DEFAULT_TEMPLATES: &str = include_str!("../assets/templates.json");
const DEFAULT_SYNONYMS: &str = include_str!("../assets/synonyms.json");
const DEFAULT_METADATA: &str = include_str!("../assets/metadata.json");

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("missing asset file {0}")]
    Missing(PathBuf),
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Schema(#[from] AssetError),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateFile {
    templates: Vec<TemplateRecord>,
}

/// SHA-256 of each asset file as read, for the run manifest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssetDigests {
    pub templates: String,
    pub synonyms: String,
    pub metadata: String,
}

#[derive(Clone, Debug)]
pub struct LoadedAssets {
    pub bundle: AssetBundle,
    pub digests: AssetDigests,
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, LoadError> {
    serde_json::from_str(text).map_err(|e| LoadError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn from_texts(dir: &Path, templates: &str, synonyms: &str, metadata: &str) -> Result<LoadedAssets, LoadError> {
    let t: TemplateFile = parse(&dir.join(TEMPLATES_FILE), templates)?;
    let s: BTreeMap<String, Vec<String>> = parse(&dir.join(SYNONYMS_FILE), synonyms)?;
    let m: Metadata = parse(&dir.join(METADATA_FILE), metadata)?;
    Ok(LoadedAssets {
        bundle: AssetBundle::new(t.templates, s, m)?,
        digests: AssetDigests {
            templates: sha256_hex(templates.as_bytes()),
            synonyms: sha256_hex(synonyms.as_bytes()),
            metadata: sha256_hex(metadata.as_bytes()),
        },
    })
}

/// Reads and validates `templates.json`, `synonyms.json` and `metadata.json`
/// from `dir`.
pub fn load_assets(dir: &Path) -> Result<LoadedAssets, LoadError> {
    let read = |name: &str| {
        let path = dir.join(name);
        match fs::read_to_string(&path) {
            Ok(s) => Ok(s),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Err(LoadError::Missing(path)),
            Err(source) => Err(LoadError::Io { path, source }),
        }
    };
    let t = read(TEMPLATES_FILE)?;
    let s = read(SYNONYMS_FILE)?;
    let m = read(METADATA_FILE)?;
    from_texts(dir, &t, &s, &m)
}

/// The asset set shipped with the tool.
pub fn default_assets() -> LoadedAssets {
    from_texts(Path::new("<builtin>"), DEFAULT_TEMPLATES, DEFAULT_SYNONYMS, DEFAULT_METADATA)
        .expect("built-in assets are valid")
}

/// Writes the built-in asset files into `dir`, as a starting point for edits.
pub fn write_default_assets(dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(TEMPLATES_FILE), DEFAULT_TEMPLATES)?;
    fs::write(dir.join(SYNONYMS_FILE), DEFAULT_SYNONYMS)?;
    fs::write(dir.join(METADATA_FILE), DEFAULT_METADATA)
}
