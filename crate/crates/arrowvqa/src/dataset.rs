//! Reading a built dataset back.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use arrowvqa_core::question::QAItem;
use arrowvqa_core::scene::SceneGraph;
use arrowvqa_core::split::Split;
use serde::de::DeserializeOwned;
use thiserror::Error;

use crate::build::{DatasetManifest, MANIFEST_FILE, QUESTIONS_FILE, SCENES_FILE, SENTINEL_FILE};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{0} holds an incomplete build")]
    Incomplete(PathBuf),
    #[error("{0} holds no build (manifest missing)")]
    NoManifest(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Json {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, DatasetError> {
    let bytes = fs::read(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_slice(&bytes).map_err(|e| DatasetError::Json {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// The manifest of a finished build.
pub fn read_manifest(dir: &Path) -> Result<DatasetManifest, DatasetError> {
    if dir.join(SENTINEL_FILE).exists() {
        return Err(DatasetError::Incomplete(dir.to_path_buf()));
    }
    let path = dir.join(MANIFEST_FILE);
    if !path.exists() {
        return Err(DatasetError::NoManifest(dir.to_path_buf()));
    }
    read_json(&path)
}

pub fn scenes_path(dir: &Path, split: Split) -> PathBuf {
    dir.join(split.name()).join(SCENES_FILE)
}

pub fn questions_path(dir: &Path, split: Split) -> PathBuf {
    dir.join(split.name()).join(QUESTIONS_FILE)
}

pub fn read_scenes(dir: &Path, split: Split) -> Result<Vec<SceneGraph>, DatasetError> {
    read_json(&scenes_path(dir, split))
}

pub fn read_questions(dir: &Path, split: Split) -> Result<Vec<QAItem>, DatasetError> {
    read_json(&questions_path(dir, split))
}
