//! Prediction files and scoring against a built split.

use std::fs;
use std::path::{Path, PathBuf};

use arrowvqa_core::eval::{GoldAnswer, PredictionRecord, ScoreReport};
use arrowvqa_core::split::Split;
use std::fmt::Write;
use thiserror::Error;

use crate::dataset::{read_manifest, read_questions, DatasetError};

#[derive(Debug, Error)]
pub enum PredictionError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
}

/// Newline-delimited JSON records; blank lines are skipped.
pub fn parse_predictions(text: &str, path: &Path) -> Result<Vec<PredictionRecord>, PredictionError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| PredictionError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>, PredictionError> {
    let text = fs::read_to_string(path).map_err(|source| PredictionError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_predictions(&text, path)
}

/// Gold answers of one split of a finished build.
pub fn gold_answers(dir: &Path, split: Split) -> Result<Vec<GoldAnswer>, DatasetError> {
    read_manifest(dir)?;
    Ok(read_questions(dir, split)?
        .into_iter()
        .map(|q| GoldAnswer {
            question_id: q.question_id,
            task: q.task,
            answer: q.answer,
        })
        .collect())
}

pub fn format_score(r: &ScoreReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<22} {:>9} {:>9} {:>9} {:>9}", "task", "accuracy", "correct", "total", "missing");
    for t in &r.tasks {
        let _ = writeln!(
            s,
            "{:<22} {:>9.4} {:>9} {:>9} {:>9}",
            t.task.name(),
            t.accuracy,
            t.tally.correct,
            t.tally.total,
            t.tally.missing
        );
    }
    let _ = writeln!(
        s,
        "{:<22} {:>9.4} {:>9} {:>9} {:>9}",
        "overall", r.overall_accuracy, r.overall.correct, r.overall.total, r.overall.missing
    );
    let _ = writeln!(s, "missing predictions: {:.2}%", 100.0 * r.missing_rate);
    s
}
