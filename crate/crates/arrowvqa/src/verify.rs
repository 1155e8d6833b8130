//! Re-checking a build against its own manifest and scene graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use arrowvqa_core::question::{execute_program, QuestionProgram};
use arrowvqa_core::scene::{sample_scene, validate_scene, SceneGraph, SceneViolation};
use arrowvqa_core::split::{image_name, Split};
use serde::{Deserialize, Serialize};

use crate::build::{DatasetManifest, MANIFEST_FILE};
use crate::dataset::{questions_path, read_json, read_manifest, read_scenes};
use crate::io::sha256_hex;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Unreadable { detail: String },
    MissingFile { path: String },
    DigestMismatch { path: String },
    UnlistedFile { path: String },
    InvalidScene { scene_id: u64, problems: Vec<SceneViolation> },
    /// Stored scene differs from the one the recorded seed produces.
    SceneDrift { scene_id: u64 },
    WrongSplit { scene_id: u64, stored: Split, expected: Option<Split> },
    DuplicateScene { scene_id: u64 },
    MissingScene { scene_id: u64 },
    DuplicateQuestion { question_id: u64 },
    /// The question's scene is not part of the question's split.
    OrphanQuestion { question_id: u64, scene_id: u64 },
    WrongImage { question_id: u64, image: String },
    WrongTask { question_id: u64 },
    WrongAnswer { question_id: u64, stored: String, expected: Option<String> },
    CountMismatch { what: String, manifest: u64, found: u64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub scenes: u64,
    pub questions: u64,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A question read without trusting its answer or split labels.
#[derive(Deserialize)]
struct LooseQuestion {
    question_id: u64,
    image: String,
    scene_id: u64,
    split: String,
    task: String,
    program: QuestionProgram,
    answer: String,
}

fn walk(root: &Path, dir: &Path, out: &mut Vec<String>) -> std::io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            walk(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).expect("under root");
            let parts: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
            out.push(parts.join("/"));
        }
    }
    Ok(())
}

fn check_files(dir: &Path, manifest: &DatasetManifest, out: &mut Vec<Violation>) {
    let listed: BTreeSet<&str> = manifest.files.iter().map(|f| f.path.as_str()).collect();
    for f in &manifest.files {
        match fs::read(dir.join(&f.path)) {
            Ok(bytes) => {
                if bytes.len() as u64 != f.bytes || sha256_hex(&bytes) != f.sha256 {
                    out.push(Violation::DigestMismatch { path: f.path.clone() });
                }
            }
            Err(_) => out.push(Violation::MissingFile { path: f.path.clone() }),
        }
    }
    let mut present = Vec::new();
    if let Err(e) = walk(dir, dir, &mut present) {
        out.push(Violation::Unreadable { detail: e.to_string() });
    }
    for p in present {
        if p != MANIFEST_FILE && !listed.contains(p.as_str()) {
            out.push(Violation::UnlistedFile { path: p });
        }
    }
}

/// Checks every file digest, every scene graph and every stored answer.
/// Never fails; problems are returned as violations.
pub fn verify_dataset(dir: &Path) -> VerifyReport {
    let mut report = VerifyReport::default();
    let manifest = match read_manifest(dir) {
        Ok(m) => m,
        Err(e) => {
            report.violations.push(Violation::Unreadable { detail: e.to_string() });
            return report;
        }
    };
    let v = &mut report.violations;
    check_files(dir, &manifest, v);

    let cfg = &manifest.config;
    let n = cfg.total_scenes;
    let mut seen: BTreeMap<u64, Split> = BTreeMap::new();
    let mut by_split: BTreeMap<Split, BTreeMap<u64, SceneGraph>> = BTreeMap::new();
    for split in Split::ALL {
        let scenes = match read_scenes(dir, split) {
            Ok(s) => s,
            Err(e) => {
                v.push(Violation::Unreadable { detail: e.to_string() });
                continue;
            }
        };
        if let Some(s) = manifest.split(split) {
            if s.scenes != scenes.len() as u64 {
                v.push(Violation::CountMismatch {
                    what: format!("{split} scenes"),
                    manifest: s.scenes,
                    found: scenes.len() as u64,
                });
            }
        }
        for g in scenes {
            let id = g.scene_id;
            if seen.insert(id, split).is_some() {
                v.push(Violation::DuplicateScene { scene_id: id });
                continue;
            }
            let expected = cfg.split_fractions.assign(id, n).ok();
            if expected != Some(split) {
                v.push(Violation::WrongSplit {
                    scene_id: id,
                    stored: split,
                    expected,
                });
            }
            let problems = validate_scene(&g, &cfg.sampler);
            if !problems.is_empty() {
                v.push(Violation::InvalidScene { scene_id: id, problems });
            } else if sample_scene(id, cfg.master_seed, &cfg.sampler).ok().as_ref() != Some(&g) {
                v.push(Violation::SceneDrift { scene_id: id });
            }
            by_split.entry(split).or_default().insert(id, g);
        }
    }
    for id in 0..n {
        if !seen.contains_key(&id) {
            v.push(Violation::MissingScene { scene_id: id });
        }
    }
    report.scenes = seen.len() as u64;

    let mut qids = BTreeSet::new();
    for split in Split::ALL {
        let path = questions_path(dir, split);
        let questions: Vec<LooseQuestion> = match read_json(&path) {
            Ok(q) => q,
            Err(e) => {
                v.push(Violation::Unreadable { detail: e.to_string() });
                continue;
            }
        };
        if let Some(s) = manifest.split(split) {
            if s.questions != questions.len() as u64 {
                v.push(Violation::CountMismatch {
                    what: format!("{split} questions"),
                    manifest: s.questions,
                    found: questions.len() as u64,
                });
            }
        }
        let scenes = by_split.get(&split);
        for q in questions {
            report.questions += 1;
            if !qids.insert(q.question_id) {
                v.push(Violation::DuplicateQuestion {
                    question_id: q.question_id,
                });
            }
            let Some(g) = scenes.and_then(|s| s.get(&q.scene_id)).filter(|_| q.split == split.name()) else {
                v.push(Violation::OrphanQuestion {
                    question_id: q.question_id,
                    scene_id: q.scene_id,
                });
                continue;
            };
            if q.image != image_name(split, q.scene_id) {
                v.push(Violation::WrongImage {
                    question_id: q.question_id,
                    image: q.image.clone(),
                });
            }
            if q.task != q.program.task().name() {
                v.push(Violation::WrongTask {
                    question_id: q.question_id,
                });
            }
            let expected = execute_program(&q.program, g).map(|a| a.to_string());
            if expected.as_deref() != Some(q.answer.as_str()) {
                v.push(Violation::WrongAnswer {
                    question_id: q.question_id,
                    stored: q.answer,
                    expected,
                });
            }
        }
    }
    report
}
