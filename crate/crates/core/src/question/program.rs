use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::{Answer, TaskKind};
use crate::geometry::{CardinalDirection, RelativeDirection};
use crate::scene::{ObjectColor, SceneGraph};

/// Template placeholder names. `O1` is the target (or the only object),
/// `O2` the reference, `R` a relation, `D` a cardinal direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Placeholder {
    O1,
    O2,
    R,
    D,
}

impl Placeholder {
    pub const ALL: [Placeholder; 4] = [Placeholder::O1, Placeholder::O2, Placeholder::R, Placeholder::D];

    pub const fn name(self) -> &'static str {
        match self {
            Placeholder::O1 => "O1",
            Placeholder::O2 => "O2",
            Placeholder::R => "R",
            Placeholder::D => "D",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|p| p.name() == s)
    }
}

impl fmt::Display for Placeholder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    Object,
    Relation,
    Direction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SlotValue {
    Object(ObjectColor),
    Relation(RelativeDirection),
    Direction(CardinalDirection),
}

/// One parameter of a program family, in declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlotSpec {
    pub placeholder: Placeholder,
    pub kind: SlotKind,
    /// Object slots only: the object must be in the scene for the program to
    /// be answerable.
    pub must_exist: bool,
}

const fn object(p: Placeholder, must_exist: bool) -> SlotSpec {
    SlotSpec {
        placeholder: p,
        kind: SlotKind::Object,
        must_exist,
    }
}

const RELATION_SLOT: SlotSpec = SlotSpec {
    placeholder: Placeholder::R,
    kind: SlotKind::Relation,
    must_exist: false,
};

/// Program families; Counting has an unfiltered and a relation-filtered form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgramFamily {
    Existence,
    Orientation,
    Relation,
    Link,
    CountAll,
    CountRelated,
    TripleClassification,
}

impl ProgramFamily {
    pub const ALL: [ProgramFamily; 7] = [
        ProgramFamily::Existence,
        ProgramFamily::Orientation,
        ProgramFamily::Relation,
        ProgramFamily::Link,
        ProgramFamily::CountAll,
        ProgramFamily::CountRelated,
        ProgramFamily::TripleClassification,
    ];

    pub fn task(self) -> TaskKind {
        match self {
            ProgramFamily::Existence => TaskKind::Existence,
            ProgramFamily::Orientation => TaskKind::Orientation,
            ProgramFamily::Relation => TaskKind::Relation,
            ProgramFamily::Link => TaskKind::Link,
            ProgramFamily::CountAll | ProgramFamily::CountRelated => TaskKind::Counting,
            ProgramFamily::TripleClassification => TaskKind::TripleClassification,
        }
    }

    pub fn slots(self) -> &'static [SlotSpec] {
        use Placeholder::*;
        const ANY_O1: SlotSpec = object(O1, false);
        const O1_: SlotSpec = object(O1, true);
        const O2_: SlotSpec = object(O2, true);
        match self {
            ProgramFamily::Existence => &[ANY_O1],
            ProgramFamily::Orientation => &[O1_],
            ProgramFamily::Relation => &[O1_, O2_],
            ProgramFamily::Link => &[O2_, RELATION_SLOT],
            ProgramFamily::CountAll => &[],
            ProgramFamily::CountRelated => &[O2_, RELATION_SLOT],
            ProgramFamily::TripleClassification => &[O1_, RELATION_SLOT, O2_],
        }
    }

    pub fn slot(self, placeholder: Placeholder) -> Option<&'static SlotSpec> {
        self.slots().iter().find(|s| s.placeholder == placeholder)
    }

    /// Builds a program from values bound in declaration order.
    pub fn instantiate(self, values: &[SlotValue]) -> Option<QuestionProgram> {
        use SlotValue::{Object as O, Relation as R};
        Some(match (self, values) {
            (ProgramFamily::Existence, [O(c)]) => QuestionProgram::Existence { object: *c },
            (ProgramFamily::Orientation, [O(c)]) => QuestionProgram::Orientation { object: *c },
            (ProgramFamily::Relation, [O(t), O(r)]) => QuestionProgram::Relation {
                target: *t,
                reference: *r,
            },
            (ProgramFamily::Link, [O(r), R(rel)]) => QuestionProgram::Link {
                reference: *r,
                relation: *rel,
            },
            (ProgramFamily::CountAll, []) => QuestionProgram::Counting { filter: None },
            (ProgramFamily::CountRelated, [O(r), R(rel)]) => QuestionProgram::Counting {
                filter: Some(CountFilter {
                    relation: *rel,
                    reference: *r,
                }),
            },
            (ProgramFamily::TripleClassification, [O(t), R(rel), O(r)]) => QuestionProgram::TripleClassification {
                target: *t,
                relation: *rel,
                reference: *r,
            },
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CountFilter {
    pub relation: RelativeDirection,
    pub reference: ObjectColor,
}

/// A typed question program. Objects are named by color, which is unique
/// within a scene.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum QuestionProgram {
    Existence {
        object: ObjectColor,
    },
    Orientation {
        object: ObjectColor,
    },
    Link {
        reference: ObjectColor,
        relation: RelativeDirection,
    },
    Relation {
        target: ObjectColor,
        reference: ObjectColor,
    },
    Counting {
        filter: Option<CountFilter>,
    },
    TripleClassification {
        target: ObjectColor,
        relation: RelativeDirection,
        reference: ObjectColor,
    },
}

impl QuestionProgram {
    pub fn task(&self) -> TaskKind {
        self.family().task()
    }

    pub fn family(&self) -> ProgramFamily {
        match self {
            QuestionProgram::Existence { .. } => ProgramFamily::Existence,
            QuestionProgram::Orientation { .. } => ProgramFamily::Orientation,
            QuestionProgram::Link { .. } => ProgramFamily::Link,
            QuestionProgram::Relation { .. } => ProgramFamily::Relation,
            QuestionProgram::Counting { filter: None } => ProgramFamily::CountAll,
            QuestionProgram::Counting { filter: Some(_) } => ProgramFamily::CountRelated,
            QuestionProgram::TripleClassification { .. } => ProgramFamily::TripleClassification,
        }
    }

    /// Bound values keyed by placeholder, in the family's declaration order.
    pub fn bindings(&self) -> Vec<(Placeholder, SlotValue)> {
        use Placeholder::*;
        use SlotValue::{Object as Obj, Relation as Rel};
        match *self {
            QuestionProgram::Existence { object } | QuestionProgram::Orientation { object } => {
                alloc::vec![(O1, Obj(object))]
            }
            QuestionProgram::Relation { target, reference } => alloc::vec![(O1, Obj(target)), (O2, Obj(reference))],
            QuestionProgram::Link { reference, relation } => alloc::vec![(O2, Obj(reference)), (R, Rel(relation))],
            QuestionProgram::Counting { filter: None } => Vec::new(),
            QuestionProgram::Counting {
                filter: Some(CountFilter { relation, reference }),
            } => alloc::vec![(O2, Obj(reference)), (R, Rel(relation))],
            QuestionProgram::TripleClassification {
                target,
                relation,
                reference,
            } => alloc::vec![(O1, Obj(target)), (R, Rel(relation)), (O2, Obj(reference))],
        }
    }

    pub fn binding(&self, placeholder: Placeholder) -> Option<SlotValue> {
        self.bindings().into_iter().find(|(p, _)| *p == placeholder).map(|(_, v)| v)
    }
}

/// Runs `program` on `graph`. `None` marks a program with no valid answer on
/// this scene (missing object, ambiguous link, self-relation).
pub fn execute_program(program: &QuestionProgram, graph: &SceneGraph) -> Option<Answer> {
    let find = |c: ObjectColor| graph.by_color(c);
    match *program {
        QuestionProgram::Existence { object } => Some(Answer::yes_no(graph.has_color(object))),
        QuestionProgram::Orientation { object } => graph.cardinal(find(object)?.id).map(Answer::Cardinal),
        QuestionProgram::Relation { target, reference } => {
            let (t, r) = (find(target)?, find(reference)?);
            if t.id == r.id {
                return None;
            }
            graph.relation(t.id, r.id).map(Answer::Relation)
        }
        QuestionProgram::Link { reference, relation } => {
            let r = find(reference)?;
            let mut hits = graph
                .objects
                .iter()
                .filter(|o| o.id != r.id && graph.relation(o.id, r.id) == Some(relation));
            let only = hits.next()?;
            if hits.next().is_some() {
                return None;
            }
            Some(Answer::Color(only.color))
        }
        QuestionProgram::Counting { filter: None } => Some(Answer::Count(graph.objects.len() as u8)),
        QuestionProgram::Counting {
            filter: Some(CountFilter { relation, reference }),
        } => {
            let r = find(reference)?;
            let n = graph
                .objects
                .iter()
                .filter(|o| o.id != r.id && graph.relation(o.id, r.id) == Some(relation))
                .count();
            Some(Answer::Count(n as u8))
        }
        QuestionProgram::TripleClassification {
            target,
            relation,
            reference,
        } => {
            let (t, r) = (find(target)?, find(reference)?);
            if t.id == r.id {
                return None;
            }
            Some(Answer::yes_no(graph.relation(t.id, r.id)? == relation))
        }
    }
}
