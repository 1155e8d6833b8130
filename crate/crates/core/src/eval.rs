//! Scoring predictions against gold answers.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::question::{Answer, TaskKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub question_id: u64,
    pub answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch: Option<u64>,
}

/// What scoring needs to know about one gold question.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GoldAnswer {
    pub question_id: u64,
    pub task: TaskKind,
    pub answer: Answer,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unknown question ids: {0:?}")]
    UnknownIds(Vec<u64>),
    #[error("empty answers for question ids: {0:?}")]
    EmptyAnswers(Vec<u64>),
    #[error("more than one prediction for question ids: {0:?}")]
    Duplicates(Vec<u64>),
    #[error("some records carry an epoch and some do not")]
    MixedEpochs,
    #[error("curves need epoch-tagged records")]
    NoEpochs,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub correct: u64,
    pub total: u64,
    pub missing: u64,
}

impl Tally {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    pub fn missing_rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.missing as f64 / self.total as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskScore {
    pub task: TaskKind,
    #[serde(flatten)]
    pub tally: Tally,
    pub accuracy: f64,
}

/// Per-task and overall micro accuracy. Missing predictions count as wrong.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub tasks: Vec<TaskScore>,
    pub overall: Tally,
    pub overall_accuracy: f64,
    pub missing_rate: f64,
}

impl ScoreReport {
    pub fn task(&self, task: TaskKind) -> &TaskScore {
        &self.tasks[task.index()]
    }
}

/// Lowercased and trimmed.
pub fn canonical_answer(s: &str) -> String {
    s.trim().to_lowercase()
}

fn sorted(mut ids: Vec<u64>) -> Vec<u64> {
    ids.sort_unstable();
    ids.dedup();
    ids
}

pub fn score(predictions: &[PredictionRecord], gold: &[GoldAnswer]) -> Result<ScoreReport, EvalError> {
    let by_id: BTreeMap<u64, &GoldAnswer> = gold.iter().map(|g| (g.question_id, g)).collect();
    let unknown: Vec<u64> = predictions
        .iter()
        .filter(|p| !by_id.contains_key(&p.question_id))
        .map(|p| p.question_id)
        .collect();
    if !unknown.is_empty() {
        return Err(EvalError::UnknownIds(sorted(unknown)));
    }
    let empty: Vec<u64> = predictions
        .iter()
        .filter(|p| p.answer.trim().is_empty())
        .map(|p| p.question_id)
        .collect();
    if !empty.is_empty() {
        return Err(EvalError::EmptyAnswers(sorted(empty)));
    }
    let mut answered: BTreeMap<u64, String> = BTreeMap::new();
    let mut dups = Vec::new();
    for p in predictions {
        if answered.insert(p.question_id, canonical_answer(&p.answer)).is_some() {
            dups.push(p.question_id);
        }
    }
    if !dups.is_empty() {
        return Err(EvalError::Duplicates(sorted(dups)));
    }

    let mut tallies = [Tally::default(); 6];
    for g in gold {
        let t = &mut tallies[g.task.index()];
        t.total += 1;
        match answered.get(&g.question_id) {
            Some(a) => {
                if *a == format!("{}", g.answer) {
                    t.correct += 1;
                }
            }
            None => t.missing += 1,
        }
    }
    let mut overall = Tally::default();
    for t in &tallies {
        overall.correct += t.correct;
        overall.total += t.total;
        overall.missing += t.missing;
    }
    Ok(ScoreReport {
        tasks: TaskKind::ALL
            .iter()
            .map(|&task| {
                let tally = tallies[task.index()];
                TaskScore {
                    task,
                    tally,
                    accuracy: tally.accuracy(),
                }
            })
            .collect(),
        overall,
        overall_accuracy: overall.accuracy(),
        missing_rate: overall.missing_rate(),
    })
}

/// One report per epoch, in ascending epoch order.
pub fn epoch_curves(predictions: &[PredictionRecord], gold: &[GoldAnswer]) -> Result<Vec<(u64, ScoreReport)>, EvalError> {
    let tagged = predictions.iter().filter(|p| p.epoch.is_some()).count();
    if tagged != predictions.len() {
        return Err(if tagged == 0 {
            EvalError::NoEpochs
        } else {
            EvalError::MixedEpochs
        });
    }
    let mut by_epoch: BTreeMap<u64, Vec<PredictionRecord>> = BTreeMap::new();
    for p in predictions {
        by_epoch.entry(p.epoch.unwrap_or(0)).or_default().push(p.clone());
    }
    by_epoch
        .into_iter()
        .map(|(e, preds)| Ok((e, score(&preds, gold)?)))
        .collect()
}

/// Tab-separated accuracy table: epoch, one column per task, overall.
pub fn curves_tsv(curves: &[(u64, ScoreReport)]) -> String {
    let mut out = String::from("epoch");
    for t in TaskKind::ALL {
        out.push('\t');
        out.push_str(t.name());
    }
    out.push_str("\toverall\n");
    for (epoch, report) in curves {
        let _ = write!(out, "{epoch}");
        for t in &report.tasks {
            let _ = write!(out, "\t{:.6}", t.accuracy);
        }
        let _ = writeln!(out, "\t{:.6}", report.overall_accuracy);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineEntry {
    pub task: TaskKind,
    /// Most frequent gold answer; `None` when the task has no questions.
    pub answer: Option<String>,
    pub accuracy: f64,
    pub questions: u64,
}

/// Accuracy of the best constant answer per task, ignoring the image.
/// Ties go to the earliest answer in vocabulary order.
pub fn blind_baseline(gold: &[GoldAnswer]) -> Vec<BaselineEntry> {
    TaskKind::ALL
        .iter()
        .map(|&task| {
            let mut hist: BTreeMap<Answer, u64> = BTreeMap::new();
            for g in gold.iter().filter(|g| g.task == task) {
                *hist.entry(g.answer).or_default() += 1;
            }
            let questions: u64 = hist.values().sum();
            let best = crate::question::answer_vocabulary(task)
                .into_iter()
                .filter_map(|a| hist.get(&a).map(|&c| (a, c)))
                .fold(None::<(Answer, u64)>, |acc, (a, c)| match acc {
                    Some((_, bc)) if bc >= c => acc,
                    _ => Some((a, c)),
                });
            BaselineEntry {
                task,
                answer: best.map(|(a, _)| format!("{a}")),
                accuracy: best.map_or(0.0, |(_, c)| c as f64 / questions as f64),
                questions,
            }
        })
        .collect()
}

/// Question ids in `gold` that have no prediction.
pub fn missing_ids(predictions: &[PredictionRecord], gold: &[GoldAnswer]) -> Vec<u64> {
    let seen: BTreeSet<u64> = predictions.iter().map(|p| p.question_id).collect();
    gold.iter().map(|g| g.question_id).filter(|id| !seen.contains(id)).collect()
}
