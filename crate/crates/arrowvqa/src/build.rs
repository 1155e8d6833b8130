//! End-to-end corpus construction.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use arrowvqa_core::question::{
    answer_vocabulary, scene_candidates, select_and_realize, AssetBundle, QAItem, RealizeError, TaskKind,
};
use arrowvqa_core::render::{render_scene, RenderError};
use arrowvqa_core::scene::{sample_scene, SceneError, SceneGraph};
use arrowvqa_core::split::{image_name, Split};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assets::{AssetDigests, LoadedAssets};
use crate::config::{BuildConfig, ConfigError, ConfigEcho};
use crate::io::{encode_png, json_bytes, sha256_hex, write_atomic};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SENTINEL_FILE: &str = "INCOMPLETE";
pub const SCENES_FILE: &str = "scenes.json";
pub const QUESTIONS_FILE: &str = "questions.json";
pub const IMAGES_DIR: &str = "images";

/// Scenes rendered and encoded per parallel batch; bounds peak memory.
const RENDER_BATCH: usize = 256;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("scene {scene_id}: sampling failed: {source}")]
    Scene { scene_id: u64, source: SceneError },
    #[error("scene {scene_id}: question realization failed: {source}")]
    Questions { scene_id: u64, source: RealizeError },
    #[error("scene {scene_id}: rendering failed: {source}")]
    Render { scene_id: u64, source: RenderError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0} exists, is not empty and does not hold a previous build")]
    ForeignDirectory(PathBuf),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> BuildError + '_ {
    move |source| BuildError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// A scene with its split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub split: Split,
    pub graph: SceneGraph,
}

/// Scenes and questions of a build, before anything touches the disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub scenes: Vec<SceneRecord>,
    pub questions: Vec<QAItem>,
}

impl Corpus {
    pub fn scenes_in(&self, split: Split) -> impl Iterator<Item = &SceneRecord> {
        self.scenes.iter().filter(move |s| s.split == split)
    }

    pub fn questions_in(&self, split: Split) -> impl Iterator<Item = &QAItem> {
        self.questions.iter().filter(move |q| q.split == split)
    }

    /// Answer counts per task over the full vocabulary.
    pub fn histograms(&self) -> Vec<TaskHistogram> {
        histograms(self.questions.iter().map(|q| (q.task, q.answer.to_string())))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskHistogram {
    pub task: TaskKind,
    pub counts: Vec<(String, u64)>,
}

pub(crate) fn histograms(items: impl Iterator<Item = (TaskKind, String)>) -> Vec<TaskHistogram> {
    let mut out: Vec<TaskHistogram> = TaskKind::ALL
        .iter()
        .map(|&task| TaskHistogram {
            task,
            counts: answer_vocabulary(task).iter().map(|a| (a.to_string(), 0)).collect(),
        })
        .collect();
    for (task, answer) in items {
        let h = &mut out[task.index()].counts;
        match h.iter_mut().find(|(a, _)| *a == answer) {
            Some(slot) => slot.1 += 1,
            None => h.push((answer, 1)),
        }
    }
    out
}

/// Samples every scene and generates its questions. Sampling and candidate
/// enumeration run in parallel; balancing runs in scene-id order.
pub fn generate_corpus(config: &BuildConfig, assets: &AssetBundle) -> Result<Corpus, BuildError> {
    config.validate()?;
    let n = config.total_scenes;
    let fractions = config.split_fractions;
    let staged: Vec<_> = (0..n)
        .into_par_iter()
        .map(|id| {
            let graph = sample_scene(id, config.master_seed, &config.sampler)
                .map_err(|source| BuildError::Scene { scene_id: id, source })?;
            let candidates = scene_candidates(&graph, assets, &config.questions);
            Ok((graph, candidates))
        })
        .collect::<Result<_, BuildError>>()?;

    let mut state = config.questions.balance_state(assets, &config.sampler);
    let mut scenes = Vec::with_capacity(staged.len());
    let mut questions = Vec::new();
    for (graph, candidates) in staged {
        let id = graph.scene_id;
        let split = fractions.assign(id, n).expect("id below total");
        let generated = select_and_realize(id, config.master_seed, &candidates, assets, &config.questions, &mut state)
            .map_err(|source| BuildError::Questions { scene_id: id, source })?;
        let image = image_name(split, id);
        for g in generated {
            questions.push(QAItem {
                question_id: questions.len() as u64,
                image: image.clone(),
                scene_id: id,
                split,
                task: g.program.task(),
                text: g.text,
                program: g.program,
                answer: g.answer,
            });
        }
        scenes.push(SceneRecord { split, graph });
    }
    Ok(Corpus { scenes, questions })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub split: Split,
    pub scenes: u64,
    pub questions: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the dataset root, with `/` separators.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub tool: String,
    pub version: String,
    pub config: ConfigEcho,
    pub assets: AssetDigests,
    pub splits: Vec<SplitSummary>,
    pub answer_histograms: Vec<TaskHistogram>,
    pub files: Vec<FileEntry>,
}

impl DatasetManifest {
    pub fn split(&self, split: Split) -> Option<&SplitSummary> {
        self.splits.iter().find(|s| s.split == split)
    }

    pub fn total_questions(&self) -> u64 {
        self.splits.iter().map(|s| s.questions).sum()
    }
}

/// Clears what a previous build left behind, refusing to touch directories
/// that do not look like one.
fn prepare_dir(out: &Path) -> Result<(), BuildError> {
    if out.exists() {
        let mut entries = fs::read_dir(out).map_err(io_err(out))?;
        let non_empty = entries.next().is_some();
        let ours = out.join(MANIFEST_FILE).exists() || out.join(SENTINEL_FILE).exists();
        if non_empty && !ours {
            return Err(BuildError::ForeignDirectory(out.to_path_buf()));
        }
    }
    fs::create_dir_all(out).map_err(io_err(out))?;
    let sentinel = out.join(SENTINEL_FILE);
    fs::write(&sentinel, b"build in progress\n").map_err(io_err(&sentinel))?;
    let manifest = out.join(MANIFEST_FILE);
    if manifest.exists() {
        fs::remove_file(&manifest).map_err(io_err(&manifest))?;
    }
    for split in Split::ALL {
        let d = out.join(split.name());
        if d.exists() {
            fs::remove_dir_all(&d).map_err(io_err(&d))?;
        }
    }
    Ok(())
}

struct Writer<'a> {
    root: &'a Path,
    files: Vec<FileEntry>,
}

impl Writer<'_> {
    fn put(&mut self, rel: &str, bytes: &[u8], digest: Option<String>) -> Result<(), BuildError> {
        let path = self.root.join(rel);
        fs::write(&path, bytes).map_err(io_err(&path))?;
        self.files.push(FileEntry {
            path: rel.to_string(),
            bytes: bytes.len() as u64,
            sha256: digest.unwrap_or_else(|| sha256_hex(bytes)),
        });
        Ok(())
    }
}

/// Builds the dataset into `out`. The sentinel file stays in place until the
/// manifest has been written, so an interrupted build is always detectable.
pub fn build_dataset(config: &BuildConfig, assets: &LoadedAssets, out: &Path) -> Result<DatasetManifest, BuildError> {
    config.validate()?;
    prepare_dir(out)?;
    let corpus = generate_corpus(config, &assets.bundle)?;

    let mut w = Writer {
        root: out,
        files: Vec::new(),
    };
    let mut splits = Vec::new();
    for split in Split::ALL {
        let dir = out.join(split.name());
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let graphs: Vec<&SceneGraph> = corpus.scenes_in(split).map(|s| &s.graph).collect();
        let questions: Vec<&QAItem> = corpus.questions_in(split).collect();
        w.put(&format!("{split}/{SCENES_FILE}"), &json_bytes(&graphs), None)?;
        w.put(&format!("{split}/{QUESTIONS_FILE}"), &json_bytes(&questions), None)?;
        splits.push(SplitSummary {
            split,
            scenes: graphs.len() as u64,
            questions: questions.len() as u64,
        });

        if config.render {
            let img_dir = dir.join(IMAGES_DIR);
            fs::create_dir_all(&img_dir).map_err(io_err(&img_dir))?;
            for batch in graphs.chunks(RENDER_BATCH) {
                let encoded: Vec<(u64, Vec<u8>, String)> = batch
                    .par_iter()
                    .map(|g| {
                        let img = render_scene(g, &config.camera, &config.style).map_err(|source| BuildError::Render {
                            scene_id: g.scene_id,
                            source,
                        })?;
                        let png = encode_png(&img);
                        let digest = sha256_hex(&png);
                        Ok((g.scene_id, png, digest))
                    })
                    .collect::<Result<_, BuildError>>()?;
                for (id, png, digest) in encoded {
                    w.put(&format!("{split}/{IMAGES_DIR}/{}", image_name(split, id)), &png, Some(digest))?;
                }
            }
        }
    }
    let mut files = w.files;
    files.sort();

    let manifest = DatasetManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.echo(),
        assets: assets.digests.clone(),
        splits,
        answer_histograms: corpus.histograms(),
        files,
    };
    let path = out.join(MANIFEST_FILE);
    write_atomic(&path, &json_bytes(&manifest)).map_err(io_err(&path))?;
    let sentinel = out.join(SENTINEL_FILE);
    fs::remove_file(&sentinel).map_err(io_err(&sentinel))?;
    Ok(manifest)
}
