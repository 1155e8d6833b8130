use alloc::vec::Vec;

use super::program::{execute_program, ProgramFamily, QuestionProgram, SlotKind, SlotSpec, SlotValue};
use super::Answer;
use crate::geometry::{CardinalDirection, RelativeDirection};
use crate::scene::{ObjectColor, SceneGraph};

/// A valid program instantiation and its gold answer on one scene.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Candidate {
    pub program: QuestionProgram,
    pub answer: Answer,
}

fn domain(kind: SlotKind) -> Vec<SlotValue> {
    match kind {
        SlotKind::Object => ObjectColor::ALL.iter().map(|&c| SlotValue::Object(c)).collect(),
        SlotKind::Relation => RelativeDirection::ALL.iter().map(|&r| SlotValue::Relation(r)).collect(),
        SlotKind::Direction => CardinalDirection::ALL.iter().map(|&d| SlotValue::Direction(d)).collect(),
    }
}

/// Whether a partial binding can still lead to a valid program. Only the last
/// bound value is new; earlier ones already passed.
fn viable(family: ProgramFamily, slots: &[SlotSpec], bound: &[SlotValue], graph: &SceneGraph) -> bool {
    let depth = bound.len() - 1;
    let spec = &slots[depth];
    let value = bound[depth];
    if let SlotValue::Object(color) = value {
        if spec.must_exist && !graph.has_color(color) {
            return false;
        }
        // Two object slots never name the same object.
        if bound[..depth].contains(&value) {
            return false;
        }
    }
    if family == ProgramFamily::Link {
        if let [SlotValue::Object(reference), SlotValue::Relation(relation)] = bound {
            let Some(r) = graph.by_color(*reference) else {
                return false;
            };
            let hits = graph
                .objects
                .iter()
                .filter(|o| o.id != r.id && graph.relation(o.id, r.id) == Some(*relation))
                .count();
            return hits == 1;
        }
    }
    true
}

fn dfs(
    family: ProgramFamily,
    slots: &[SlotSpec],
    graph: &SceneGraph,
    bound: &mut Vec<SlotValue>,
    out: &mut Vec<Candidate>,
) {
    if bound.len() == slots.len() {
        if let Some(program) = family.instantiate(bound) {
            if let Some(answer) = execute_program(&program, graph) {
                out.push(Candidate { program, answer });
            }
        }
        return;
    }
    for value in domain(slots[bound.len()].kind) {
        bound.push(value);
        if viable(family, slots, bound, graph) {
            dfs(family, slots, graph, bound, out);
        }
        bound.pop();
    }
}

/// Every valid instantiation of `family` on `graph`, depth-first over the
/// family's slots in declaration order.
pub fn enumerate_families(graph: &SceneGraph, families: &[ProgramFamily]) -> Vec<Candidate> {
    let mut out = Vec::new();
    let mut bound = Vec::with_capacity(3);
    for &family in families {
        dfs(family, family.slots(), graph, &mut bound, &mut out);
    }
    out
}

/// Candidates for every family the asset bundle has templates for.
pub fn enumerate_candidates(graph: &SceneGraph, assets: &super::AssetBundle) -> Vec<Candidate> {
    enumerate_families(graph, &assets.families())
}
