//! Corpus statistics.

use std::fmt::Write;
use std::path::Path;

use arrowvqa_core::question::{achievable_support, Answer, ProgramFamily, QAItem, QuestionConfig, TaskKind};
use arrowvqa_core::scene::SamplerConfig;
use arrowvqa_core::split::Split;
use arrowvqa_core::stats::TaskStats;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::build::SplitSummary;
use crate::dataset::{read_manifest, read_questions, DatasetError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    #[serde(flatten)]
    pub stats: TaskStats,
    /// Probability of a statistic at least this large under a uniform answer
    /// distribution.
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub splits: Vec<SplitSummary>,
    pub total_scenes: u64,
    pub total_questions: u64,
    pub questions_per_image: f64,
    pub tasks: Vec<TaskReport>,
}

pub fn chi_square_p_value(statistic: f64, dof: u32) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    ChiSquared::new(f64::from(dof)).map_or(f64::NAN, |d| d.sf(statistic))
}

/// Per-task statistics over each task's achievable answers.
pub fn task_reports<'a>(
    questions: impl IntoIterator<Item = &'a QAItem>,
    sampler: &SamplerConfig,
    qcfg: &QuestionConfig,
) -> Vec<TaskReport> {
    let families: Vec<ProgramFamily> = ProgramFamily::ALL.iter().copied().filter(|&f| qcfg.enables(f)).collect();
    let mut counts: Vec<Vec<(Answer, u64)>> = TaskKind::ALL
        .iter()
        .map(|&t| {
            achievable_support(t, sampler.min_objects, sampler.max_objects, &families)
                .into_iter()
                .map(|a| (a, 0))
                .collect()
        })
        .collect();
    for q in questions {
        let cells = &mut counts[q.task.index()];
        match cells.iter_mut().find(|(a, _)| *a == q.answer) {
            Some(c) => c.1 += 1,
            None => cells.push((q.answer, 1)),
        }
    }
    TaskKind::ALL
        .iter()
        .map(|&t| {
            let stats = TaskStats::new(t, &counts[t.index()]);
            let p_value = chi_square_p_value(stats.chi_square, stats.degrees_of_freedom);
            TaskReport { stats, p_value }
        })
        .collect()
}

/// Statistics for a finished build in `dir`.
pub fn stats_report(dir: &Path) -> Result<StatsReport, DatasetError> {
    let manifest = read_manifest(dir)?;
    let mut questions = Vec::new();
    for split in Split::ALL {
        questions.extend(read_questions(dir, split)?);
    }
    let total_scenes: u64 = manifest.splits.iter().map(|s| s.scenes).sum();
    let mut splits = Vec::new();
    for split in Split::ALL {
        splits.push(SplitSummary {
            split,
            scenes: manifest.split(split).map_or(0, |s| s.scenes),
            questions: questions.iter().filter(|q| q.split == split).count() as u64,
        });
    }
    Ok(StatsReport {
        splits,
        total_scenes,
        total_questions: questions.len() as u64,
        questions_per_image: if total_scenes == 0 {
            0.0
        } else {
            questions.len() as f64 / total_scenes as f64
        },
        tasks: task_reports(&questions, &manifest.config.sampler, &manifest.config.questions),
    })
}

pub fn format_report(r: &StatsReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<8} {:>8} {:>10}", "split", "scenes", "questions");
    for sp in &r.splits {
        let _ = writeln!(s, "{:<8} {:>8} {:>10}", sp.split.name(), sp.scenes, sp.questions);
    }
    let _ = writeln!(
        s,
        "total    {:>8} {:>10}   ({:.2} questions per image)\n",
        r.total_scenes, r.total_questions, r.questions_per_image
    );
    for t in &r.tasks {
        let st = &t.stats;
        let _ = writeln!(
            s,
            "{}: {} questions, max/min {:.3}, chi2 {:.3} (dof {}, p {:.4})",
            st.task, st.questions, st.max_min_ratio, st.chi_square, st.degrees_of_freedom, t.p_value
        );
        let cells: Vec<String> = st.histogram.iter().map(|(a, c)| format!("{a}={c}")).collect();
        let _ = writeln!(s, "    {}", cells.join("  "));
    }
    s
}
