//! Question synthesis: typed programs over scene graphs, their depth-first
//! enumeration, surface realization from templates, and answer balancing.

mod assets;
mod balance;
mod enumerate;
mod generate;
mod program;
mod realize;

pub use assets::{
    AssetBundle, AssetError, Metadata, SlotDecl, TemplateRecord, VariantRef, METADATA_FILE, PLACEHOLDERS, SYNONYMS_FILE,
    TEMPLATES_FILE,
};
pub use balance::{balance_select, BalanceState, Selection, Slack, TaskQuotas};
pub use enumerate::{enumerate_candidates, enumerate_families, Candidate};
pub use generate::{scene_candidates, select_and_realize, GeneratedQuestion, QuestionConfig};
pub use program::{execute_program, CountFilter, Placeholder, ProgramFamily, QuestionProgram, SlotKind, SlotSpec, SlotValue};
pub use realize::{extract_mentions, realize_template, realize_text, realize_variant, Mentions, RealizeConfig, RealizeError};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::geometry::{CardinalDirection, RelativeDirection, UnknownLabel};
use crate::scene::ObjectColor;
use crate::split::Split;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Existence,
    Orientation,
    Link,
    Relation,
    Counting,
    TripleClassification,
}

impl TaskKind {
    pub const ALL: [TaskKind; 6] = [
        TaskKind::Existence,
        TaskKind::Orientation,
        TaskKind::Link,
        TaskKind::Relation,
        TaskKind::Counting,
        TaskKind::TripleClassification,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            TaskKind::Existence => "existence",
            TaskKind::Orientation => "orientation",
            TaskKind::Link => "link",
            TaskKind::Relation => "relation",
            TaskKind::Counting => "counting",
            TaskKind::TripleClassification => "triple_classification",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.iter().copied().find(|t| t.name() == s).ok_or(UnknownLabel)
    }
}

/// Largest value a Counting answer can take.
pub const MAX_COUNT: u8 = 5;

/// A gold answer. Serialized as its single-word (or two-word) label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Answer {
    Yes,
    No,
    Cardinal(CardinalDirection),
    Relation(RelativeDirection),
    Color(ObjectColor),
    Count(u8),
}

impl Answer {
    pub fn yes_no(b: bool) -> Self {
        if b {
            Answer::Yes
        } else {
            Answer::No
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Yes => f.write_str("yes"),
            Answer::No => f.write_str("no"),
            Answer::Cardinal(d) => f.write_str(d.label()),
            Answer::Relation(r) => f.write_str(r.label()),
            Answer::Color(c) => f.write_str(c.label()),
            Answer::Count(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for Answer {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "yes" => return Ok(Answer::Yes),
            "no" => return Ok(Answer::No),
            _ => {}
        }
        if let Ok(d) = s.parse() {
            return Ok(Answer::Cardinal(d));
        }
        if let Ok(r) = s.parse() {
            return Ok(Answer::Relation(r));
        }
        if let Ok(c) = s.parse() {
            return Ok(Answer::Color(c));
        }
        match s.parse::<u8>() {
            Ok(n) if n <= MAX_COUNT && !s.starts_with('+') && (s == "0" || !s.starts_with('0')) => Ok(Answer::Count(n)),
            _ => Err(UnknownLabel),
        }
    }
}

impl Serialize for Answer {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Answer {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse()
            .map_err(|_| serde::de::Error::custom(format!("unknown answer label {s:?}")))
    }
}

/// The closed answer set of a task, in a fixed order.
pub fn answer_vocabulary(task: TaskKind) -> Vec<Answer> {
    match task {
        TaskKind::Existence | TaskKind::TripleClassification => alloc::vec![Answer::Yes, Answer::No],
        TaskKind::Orientation => CardinalDirection::ALL.iter().map(|&d| Answer::Cardinal(d)).collect(),
        TaskKind::Relation => RelativeDirection::ALL.iter().map(|&r| Answer::Relation(r)).collect(),
        TaskKind::Link => ObjectColor::ALL.iter().map(|&c| Answer::Color(c)).collect(),
        TaskKind::Counting => (0..=MAX_COUNT).map(Answer::Count).collect(),
    }
}

/// Position of `answer` in `answer_vocabulary(task)`.
pub fn vocabulary_index(task: TaskKind, answer: Answer) -> Option<usize> {
    match (task, answer) {
        (TaskKind::Existence | TaskKind::TripleClassification, Answer::Yes) => Some(0),
        (TaskKind::Existence | TaskKind::TripleClassification, Answer::No) => Some(1),
        (TaskKind::Orientation, Answer::Cardinal(d)) => CardinalDirection::ALL.iter().position(|&x| x == d),
        (TaskKind::Relation, Answer::Relation(r)) => Some(r.sector()),
        (TaskKind::Link, Answer::Color(c)) => Some(c.index()),
        (TaskKind::Counting, Answer::Count(n)) if n <= MAX_COUNT => Some(n as usize),
        _ => None,
    }
}

/// Answers a task can produce given the object-count range and which
/// counting families are enabled. Balancing and uniformity checks use this.
pub fn achievable_support(task: TaskKind, min_objects: usize, max_objects: usize, families: &[ProgramFamily]) -> Vec<Answer> {
    if task != TaskKind::Counting {
        return answer_vocabulary(task);
    }
    let mut support = Vec::new();
    for n in 0..=MAX_COUNT {
        let n_us = n as usize;
        let total = families.contains(&ProgramFamily::CountAll) && (min_objects..=max_objects).contains(&n_us);
        let related = families.contains(&ProgramFamily::CountRelated) && n_us < max_objects;
        if total || related {
            support.push(Answer::Count(n));
        }
    }
    support
}

/// One generated question with its gold answer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QAItem {
    pub question_id: u64,
    pub image: String,
    pub scene_id: u64,
    pub split: Split,
    pub task: TaskKind,
    pub text: String,
    pub program: QuestionProgram,
    pub answer: Answer,
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn vocabularies() {
        assert_eq!(answer_vocabulary(TaskKind::Existence), alloc::vec![Answer::Yes, Answer::No]);
        let rel = answer_vocabulary(TaskKind::Relation);
        assert_eq!(rel.len(), 8);
        assert_eq!(rel[1].to_string(), "left front");
        let counts: Vec<String> = answer_vocabulary(TaskKind::Counting).iter().map(|a| a.to_string()).collect();
        assert_eq!(counts, ["0", "1", "2", "3", "4", "5"]);
        assert_eq!(answer_vocabulary(TaskKind::Link).len(), 6);
        assert_eq!(answer_vocabulary(TaskKind::Orientation).len(), 4);
        for task in TaskKind::ALL {
            for (i, a) in answer_vocabulary(task).into_iter().enumerate() {
                assert_eq!(vocabulary_index(task, a), Some(i));
                assert_eq!(a.to_string().parse::<Answer>().unwrap(), a);
            }
        }
    }

    #[test]
    fn answer_parsing_rejects_junk() {
        for s in ["", "6", "01", "+1", "Yes", "left-front", "purple"] {
            assert!(s.parse::<Answer>().is_err(), "{s}");
        }
    }

    #[test]
    fn counting_support_follows_enabled_families() {
        use ProgramFamily::*;
        let both = achievable_support(TaskKind::Counting, 3, 5, &[CountAll, CountRelated]);
        assert_eq!(both.len(), 6);
        let total = achievable_support(TaskKind::Counting, 3, 5, &[CountAll]);
        assert_eq!(total, alloc::vec![Answer::Count(3), Answer::Count(4), Answer::Count(5)]);
        let related = achievable_support(TaskKind::Counting, 3, 5, &[CountRelated]);
        assert_eq!(related.len(), 5);
    }
}
