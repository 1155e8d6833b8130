//! Per-task answer balancing across a whole dataset.
//!
//! Counters are global: they persist from scene to scene, so scenes must be
//! fed in a fixed order for the output to be reproducible.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::assets::{AssetBundle, VariantRef};
use super::enumerate::Candidate;
use super::program::QuestionProgram;
use super::{answer_vocabulary, vocabulary_index, Answer, TaskKind};
use crate::geometry::RelativeDirection;
use crate::rng::StreamRng;

/// How far an answer's count may run ahead of the rarest achievable answer
/// of the same task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Slack(pub u32);

impl Slack {
    pub const DEFAULT: Slack = Slack(8);
    /// Disables balancing.
    pub const UNBOUNDED: Slack = Slack(u32::MAX);

    pub fn is_unbounded(self) -> bool {
        self == Self::UNBOUNDED
    }
}

impl Default for Slack {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Questions requested per image for each task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskQuotas(pub [u32; 6]);

impl TaskQuotas {
    pub const fn uniform(q: u32) -> Self {
        Self([q; 6])
    }

    pub fn get(&self, task: TaskKind) -> u32 {
        self.0[task.index()]
    }

    pub fn set(&mut self, task: TaskKind, q: u32) {
        self.0[task.index()] = q;
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Default for TaskQuotas {
    fn default() -> Self {
        Self::uniform(9)
    }
}

/// Running answer counts per task, over each task's achievable support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BalanceState {
    counts: [Vec<u64>; 6],
    supported: [Vec<bool>; 6],
}

impl BalanceState {
    /// `support(task)` lists the answers the dataset can produce at all;
    /// only those take part in the minimum.
    pub fn new(mut support: impl FnMut(TaskKind) -> Vec<Answer>) -> Self {
        let counts = TaskKind::ALL.map(|t| alloc::vec![0u64; answer_vocabulary(t).len()]);
        let supported = TaskKind::ALL.map(|t| {
            let mut flags = alloc::vec![false; answer_vocabulary(t).len()];
            for a in support(t) {
                if let Some(i) = vocabulary_index(t, a) {
                    flags[i] = true;
                }
            }
            flags
        });
        Self { counts, supported }
    }

    pub fn counts(&self, task: TaskKind) -> &[u64] {
        &self.counts[task.index()]
    }

    pub fn count(&self, task: TaskKind, answer: Answer) -> u64 {
        vocabulary_index(task, answer).map_or(0, |i| self.counts[task.index()][i])
    }

    pub fn record(&mut self, task: TaskKind, answer: Answer) {
        if let Some(i) = vocabulary_index(task, answer) {
            self.counts[task.index()][i] += 1;
        }
    }

    fn floor(&self, task: TaskKind) -> u64 {
        let t = task.index();
        self.counts[t]
            .iter()
            .zip(&self.supported[t])
            .filter(|(_, s)| **s)
            .map(|(c, _)| *c)
            .min()
            .unwrap_or(0)
    }

    /// Whether one more `answer` keeps the task within `slack`.
    pub fn admits(&self, task: TaskKind, answer: Answer, slack: Slack) -> bool {
        slack.is_unbounded() || self.count(task, answer) <= self.floor(task) + u64::from(slack.0)
    }
}

/// A chosen question: program, gold answer and the text variant to realize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Selection {
    pub program: QuestionProgram,
    pub answer: Answer,
    pub variant: VariantRef,
}

#[derive(Clone, Copy)]
struct Entry {
    candidate: usize,
    variant: VariantRef,
}

/// Picks up to `quotas` questions per task from one scene's candidates,
/// updating `state`. Each (program, variant) pair is used at most once.
///
/// Each draw requests the least-counted admitted answer the scene still
/// offers (ties broken at random), then a random pair with that answer.
/// Triple classification requests the rarer of yes/no the same way, and a "no" is built from a random object pair,
/// then a random wrong relation, then a random unused variant, so negatives
/// do not lean toward whatever relations happen to be rare in the scene.
pub fn balance_select(
    candidates: &[Candidate],
    assets: &AssetBundle,
    quotas: &TaskQuotas,
    slack: Slack,
    state: &mut BalanceState,
    rng: &mut StreamRng,
) -> Vec<Selection> {
    let mut out = Vec::new();
    for task in TaskKind::ALL {
        let quota = quotas.get(task) as usize;
        if quota == 0 {
            continue;
        }
        let mut pool: Vec<Entry> = Vec::new();
        for (ci, c) in candidates.iter().enumerate() {
            if c.program.task() == task {
                pool.extend(
                    assets
                        .variants(c.program.family())
                        .into_iter()
                        .map(|variant| Entry { candidate: ci, variant }),
                );
            }
        }
        let before = out.len();
        if task == TaskKind::TripleClassification && !slack.is_unbounded() {
            select_triples(candidates, pool, quota, slack, state, rng, &mut out);
        } else {
            while out.len() - before < quota {
                let Some(i) = pick_pair(task, candidates, &pool, slack, state, rng) else {
                    break;
                };
                let e = pool.swap_remove(i);
                let c = candidates[e.candidate];
                state.record(task, c.answer);
                out.push(Selection {
                    program: c.program,
                    answer: c.answer,
                    variant: e.variant,
                });
            }
        }
    }
    out
}

/// Index into `pool` of the next pair. Drawing pairs uniformly would rarely
/// pick an answer such as a count of 5 from the few scenes that offer it, and
/// throughput would collapse to the supply of the rarest answer.
fn pick_pair(
    task: TaskKind,
    candidates: &[Candidate],
    pool: &[Entry],
    slack: Slack,
    state: &BalanceState,
    rng: &mut StreamRng,
) -> Option<usize> {
    if pool.is_empty() {
        return None;
    }
    if slack.is_unbounded() {
        return Some(rng.below_usize(pool.len()));
    }
    let mut answers: Vec<Answer> = Vec::new();
    for e in pool {
        let a = candidates[e.candidate].answer;
        if !answers.contains(&a) && state.admits(task, a, slack) {
            answers.push(a);
        }
    }
    if answers.is_empty() {
        return None;
    }
    answers.sort_by_key(|&a| vocabulary_index(task, a));
    let low = answers.iter().map(|&a| state.count(task, a)).min()?;
    answers.retain(|&a| state.count(task, a) == low);
    let want = answers[rng.below_usize(answers.len())];
    let with: Vec<usize> = (0..pool.len()).filter(|&i| candidates[pool[i].candidate].answer == want).collect();
    Some(with[rng.below_usize(with.len())])
}

fn select_triples(
    candidates: &[Candidate],
    mut pool: Vec<Entry>,
    quota: usize,
    slack: Slack,
    state: &mut BalanceState,
    rng: &mut StreamRng,
    out: &mut Vec<Selection>,
) {
    let task = TaskKind::TripleClassification;
    let mut taken = 0;
    while taken < quota {
        let yes_first = state.count(task, Answer::Yes) <= state.count(task, Answer::No);
        let order = if yes_first {
            [Answer::Yes, Answer::No]
        } else {
            [Answer::No, Answer::Yes]
        };
        let mut picked = None;
        for want in order {
            if want != order[0] && !state.admits(task, want, slack) {
                break;
            }
            picked = match want {
                Answer::Yes => pick_uniform(&pool, candidates, Answer::Yes, rng),
                _ => pick_negative(&pool, candidates, rng),
            };
            if picked.is_some() {
                break;
            }
        }
        let Some(i) = picked else { break };
        let e = pool.swap_remove(i);
        let c = candidates[e.candidate];
        state.record(task, c.answer);
        out.push(Selection {
            program: c.program,
            answer: c.answer,
            variant: e.variant,
        });
        taken += 1;
    }
}

fn pick_uniform(pool: &[Entry], candidates: &[Candidate], answer: Answer, rng: &mut StreamRng) -> Option<usize> {
    let hits: Vec<usize> = (0..pool.len()).filter(|&i| candidates[pool[i].candidate].answer == answer).collect();
    (!hits.is_empty()).then(|| hits[rng.below_usize(hits.len())])
}

fn pick_negative(pool: &[Entry], candidates: &[Candidate], rng: &mut StreamRng) -> Option<usize> {
    let triple = |e: &Entry| match candidates[e.candidate].program {
        QuestionProgram::TripleClassification {
            target,
            relation,
            reference,
        } => Some((target, reference, relation)),
        _ => None,
    };
    let negatives: Vec<usize> = (0..pool.len())
        .filter(|&i| candidates[pool[i].candidate].answer == Answer::No)
        .collect();
    let mut pairs: Vec<_> = negatives.iter().filter_map(|&i| triple(&pool[i]).map(|(t, r, _)| (t, r))).collect();
    pairs.sort();
    pairs.dedup();
    if pairs.is_empty() {
        return None;
    }
    let pair = pairs[rng.below_usize(pairs.len())];
    let mut relations: Vec<RelativeDirection> = negatives
        .iter()
        .filter_map(|&i| triple(&pool[i]))
        .filter(|(t, r, _)| (*t, *r) == pair)
        .map(|(_, _, rel)| rel)
        .collect();
    relations.sort();
    relations.dedup();
    let relation = relations[rng.below_usize(relations.len())];
    let variants: Vec<usize> = negatives
        .into_iter()
        .filter(|&i| triple(&pool[i]) == Some((pair.0, pair.1, relation)))
        .collect();
    Some(variants[rng.below_usize(variants.len())])
}
