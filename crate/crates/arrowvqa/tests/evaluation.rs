use std::path::Path;

use arrowvqa::core::eval::{blind_baseline, epoch_curves, score, GoldAnswer, PredictionRecord};
use arrowvqa::core::question::{Answer, TaskKind};
use arrowvqa::core::split::Split;
use arrowvqa::evaluate::{gold_answers, parse_predictions};
use arrowvqa::{build_dataset, default_assets, BuildConfig};

fn desk_build() -> (tempfile::TempDir, Vec<GoldAnswer>) {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = BuildConfig {
        total_scenes: 200,
        master_seed: 9,
        render: false,
        ..BuildConfig::default()
    };
    build_dataset(&cfg, &default_assets(), tmp.path()).unwrap();
    let mut gold = Vec::new();
    for split in Split::ALL {
        gold.extend(gold_answers(tmp.path(), split).unwrap());
    }
    (tmp, gold)
}

fn echo(gold: &[GoldAnswer]) -> Vec<PredictionRecord> {
    gold.iter()
        .map(|g| PredictionRecord {
            question_id: g.question_id,
            answer: g.answer.to_string(),
            epoch: None,
        })
        .collect()
}

#[test]
fn scoring_a_built_split() {
    let (_tmp, gold) = desk_build();
    let perfect = score(&echo(&gold), &gold).unwrap();
    for task in TaskKind::ALL {
        assert_eq!(perfect.task(task).accuracy, 1.0, "{task}");
    }

    let mut guessed = echo(&gold);
    for (p, g) in guessed.iter_mut().zip(&gold) {
        if g.task == TaskKind::Orientation {
            p.answer = "north".into();
        }
    }
    let r = score(&guessed, &gold).unwrap();
    assert!((r.task(TaskKind::Orientation).accuracy - 0.25).abs() < 0.02, "{}", r.task(TaskKind::Orientation).accuracy);
    for task in TaskKind::ALL.into_iter().filter(|&t| t != TaskKind::Orientation) {
        assert_eq!(r.task(task).accuracy, 1.0);
    }

    let empty = score(&[], &gold).unwrap();
    assert_eq!(empty.overall_accuracy, 0.0);
    assert_eq!(empty.missing_rate, 1.0);
}

#[test]
fn blind_baseline_on_a_balanced_build() {
    let (_tmp, gold) = desk_build();
    let b = blind_baseline(&gold);
    let acc = |t: TaskKind| b.iter().find(|e| e.task == t).unwrap().accuracy;
    assert!((acc(TaskKind::Existence) - 0.5).abs() <= 0.02);
    assert!((acc(TaskKind::Relation) - 0.125).abs() <= 0.02);

    let toy: Vec<GoldAnswer> = (0..10)
        .map(|i| GoldAnswer {
            question_id: i,
            task: TaskKind::Existence,
            answer: Answer::Yes,
        })
        .collect();
    assert_eq!(blind_baseline(&toy)[0].accuracy, 1.0);
}

#[test]
fn curves_agree_with_separate_scoring() {
    let (_tmp, gold) = desk_build();
    let gold: Vec<GoldAnswer> = gold.into_iter().take(600).collect();
    let mut lines = String::new();
    let mut per_epoch = Vec::new();
    for epoch in 1..=3u64 {
        // Later epochs get more questions right.
        let preds: Vec<PredictionRecord> = gold
            .iter()
            .map(|g| {
                let right = (g.question_id % 4) < epoch;
                PredictionRecord {
                    question_id: g.question_id,
                    answer: if right { g.answer.to_string() } else { "nonsense".into() },
                    epoch: Some(epoch),
                }
            })
            .collect();
        for p in &preds {
            lines.push_str(&serde_json::to_string(p).unwrap());
            lines.push('\n');
        }
        per_epoch.push(score(&preds, &gold).unwrap());
    }
    let preds = parse_predictions(&lines, Path::new("run.jsonl")).unwrap();
    let curves = epoch_curves(&preds, &gold).unwrap();
    assert_eq!(curves.len(), 3);
    for ((epoch, report), expected) in curves.iter().zip(&per_epoch) {
        assert_eq!(report, expected, "epoch {epoch}");
    }
    assert!(curves[0].1.overall_accuracy < curves[2].1.overall_accuracy);
}
