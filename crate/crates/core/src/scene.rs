//! Scene sampling and the ground-truth scene graph.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    intrinsic_bearing, is_near_boundary, relative_direction_from_bearing, CardinalDirection,
    CardinalFrame, GeometryError, ObjectId, Pose, RelativeDirection, Triple, UnknownLabel,
    CARDINAL_SECTOR, DEFAULT_BOUNDARY_EPSILON, RELATION_SECTOR,
};
use crate::rng::{Stream, StreamRng};

/// Arrow color of an object; colors are unique within a scene, so a color
/// names an object.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectColor {
    Red,
    Green,
    Blue,
    Yellow,
    Cyan,
    Magenta,
}

impl ObjectColor {
    pub const ALL: [ObjectColor; 6] = [
        ObjectColor::Red,
        ObjectColor::Green,
        ObjectColor::Blue,
        ObjectColor::Yellow,
        ObjectColor::Cyan,
        ObjectColor::Magenta,
    ];

    pub const fn label(self) -> &'static str {
        match self {
            ObjectColor::Red => "red",
            ObjectColor::Green => "green",
            ObjectColor::Blue => "blue",
            ObjectColor::Yellow => "yellow",
            ObjectColor::Cyan => "cyan",
            ObjectColor::Magenta => "magenta",
        }
    }

    pub const fn rgb(self) -> [u8; 3] {
        match self {
            ObjectColor::Red => [255, 0, 0],
            ObjectColor::Green => [0, 255, 0],
            ObjectColor::Blue => [0, 0, 255],
            ObjectColor::Yellow => [255, 255, 0],
            ObjectColor::Cyan => [0, 255, 255],
            ObjectColor::Magenta => [255, 0, 255],
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ObjectColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ObjectColor {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.iter().copied().find(|c| c.label() == s).ok_or(UnknownLabel)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: ObjectId,
    pub color: ObjectColor,
    #[serde(flatten)]
    pub pose: Pose,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFlag {
    pub target: ObjectId,
    pub reference: ObjectId,
    pub near_boundary: bool,
}

/// Objects whose heading, or pairs whose bearing, sit within the configured
/// tolerance of a bin boundary. Annotation only.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryFlags {
    pub headings: BTreeMap<ObjectId, bool>,
    pub bearings: Vec<PairFlag>,
}

/// Every relation, heading label and boundary flag derived from a set of objects.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RelationTable {
    pub relations: Vec<Triple>,
    pub cardinals: BTreeMap<ObjectId, CardinalDirection>,
    pub boundary_flags: BoundaryFlags,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneGraph {
    pub scene_id: u64,
    pub seed: u64,
    pub objects: Vec<SceneObject>,
    pub relations: Vec<Triple>,
    pub cardinals: BTreeMap<ObjectId, CardinalDirection>,
    pub boundary_flags: BoundaryFlags,
}

impl SceneGraph {
    pub fn from_objects(
        scene_id: u64,
        seed: u64,
        objects: Vec<SceneObject>,
        epsilon: f64,
        frame: &CardinalFrame,
    ) -> Result<Self, GeometryError> {
        let table = build_relation_table(&objects, epsilon, frame)?;
        Ok(Self {
            scene_id,
            seed,
            objects,
            relations: table.relations,
            cardinals: table.cardinals,
            boundary_flags: table.boundary_flags,
        })
    }

    pub fn object(&self, id: ObjectId) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn by_color(&self, color: ObjectColor) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.color == color)
    }

    pub fn has_color(&self, color: ObjectColor) -> bool {
        self.by_color(color).is_some()
    }

    /// Stored relation of `target` as seen from `reference`.
    pub fn relation(&self, target: ObjectId, reference: ObjectId) -> Option<RelativeDirection> {
        self.relations
            .iter()
            .find(|t| t.target == target && t.reference == reference)
            .map(|t| t.relation)
    }

    pub fn cardinal(&self, id: ObjectId) -> Option<CardinalDirection> {
        self.cardinals.get(&id).copied()
    }
}

/// Materializes relations for every ordered pair (target, reference), heading
/// labels for every object, and boundary annotations.
pub fn build_relation_table(
    objects: &[SceneObject],
    epsilon: f64,
    frame: &CardinalFrame,
) -> Result<RelationTable, GeometryError> {
    let mut table = RelationTable::default();
    for obj in objects {
        table.cardinals.insert(obj.id, frame.classify(obj.pose.heading()));
        let rotated = obj.pose.heading() - frame.north_heading;
        table
            .boundary_flags
            .headings
            .insert(obj.id, is_near_boundary(rotated, CARDINAL_SECTOR, epsilon)?);
    }
    for target in objects {
        for reference in objects {
            if target.id == reference.id {
                continue;
            }
            let bearing = intrinsic_bearing(&reference.pose, &target.pose)?;
            table.relations.push(Triple::new(
                target.id,
                relative_direction_from_bearing(bearing),
                reference.id,
            )?);
            table.boundary_flags.bearings.push(PairFlag {
                target: target.id,
                reference: reference.id,
                near_boundary: is_near_boundary(bearing, RELATION_SECTOR, epsilon)?,
            });
        }
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    /// The plane is `[-half_extent, half_extent]²`.
    pub half_extent: f64,
    pub radius: f64,
    pub min_separation: f64,
    pub min_objects: usize,
    pub max_objects: usize,
    /// Placement attempts allowed per scene before giving up.
    pub max_attempts: u32,
    pub boundary_epsilon: f64,
    pub cardinal_frame: CardinalFrame,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            half_extent: 3.0,
            radius: 0.35,
            min_separation: 1.0,
            min_objects: 3,
            max_objects: 5,
            max_attempts: 10_000,
            boundary_epsilon: DEFAULT_BOUNDARY_EPSILON,
            cardinal_frame: CardinalFrame::WORLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("scene {scene_id}: placement budget exhausted after {attempts} attempts")]
    SamplerExhausted { scene_id: u64, attempts: u32 },
    #[error("invalid sampler config: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl SamplerConfig {
    /// Half-width of the region object centers are drawn from.
    pub fn placement_extent(&self) -> f64 {
        self.half_extent - self.radius
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let finite = [self.half_extent, self.radius, self.min_separation, self.boundary_epsilon]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(SceneError::InvalidConfig("non-finite parameter"));
        }
        if self.radius <= 0.0 {
            return Err(SceneError::InvalidConfig("radius must be positive"));
        }
        if self.placement_extent() <= 0.0 {
            return Err(SceneError::InvalidConfig("plane smaller than one object"));
        }
        if self.min_separation < 0.0 {
            return Err(SceneError::InvalidConfig("negative separation"));
        }
        if !(2..=5).contains(&self.min_objects) || self.min_objects > self.max_objects || self.max_objects > 5 {
            return Err(SceneError::InvalidConfig("object counts must satisfy 2 <= min <= max <= 5"));
        }
        if self.max_attempts == 0 {
            return Err(SceneError::InvalidConfig("max_attempts must be positive"));
        }
        if !(self.boundary_epsilon >= 0.0 && self.boundary_epsilon < RELATION_SECTOR / 2.0) {
            return Err(SceneError::InvalidConfig("boundary epsilon out of range"));
        }
        // A square lattice at the separation distance is a sufficient packing.
        let side = 2.0 * self.placement_extent();
        let per_row = if self.min_separation == 0.0 {
            usize::MAX
        } else {
            libm::floor(side / self.min_separation) as usize + 1
        };
        if per_row.saturating_mul(per_row) < self.max_objects {
            return Err(SceneError::InvalidConfig("separation unsatisfiable for max_objects"));
        }
        Ok(())
    }
}

/// Samples scene `scene_id`. Deterministic in `(scene_id, master_seed, config)`.
pub fn sample_scene(scene_id: u64, master_seed: u64, config: &SamplerConfig) -> Result<SceneGraph, SceneError> {
    config.validate()?;
    let mut rng = StreamRng::new(master_seed, scene_id, Stream::Scene);

    let span = (config.max_objects - config.min_objects + 1) as u64;
    let count = config.min_objects + rng.below(span) as usize;

    let mut palette = ObjectColor::ALL;
    for i in 0..count {
        let j = i + rng.below_usize(palette.len() - i);
        palette.swap(i, j);
    }

    let extent = config.placement_extent();
    let mut objects: Vec<SceneObject> = Vec::with_capacity(count);
    let mut attempts = 0u32;
    while objects.len() < count {
        if attempts >= config.max_attempts {
            return Err(SceneError::SamplerExhausted { scene_id, attempts });
        }
        attempts += 1;
        let x = rng.uniform(-extent, extent);
        let y = rng.uniform(-extent, extent);
        let clear = objects
            .iter()
            .all(|o| libm::hypot(o.pose.x() - x, o.pose.y() - y) >= config.min_separation);
        if !clear {
            continue;
        }
        let heading = rng.uniform(0.0, TAU);
        let idx = objects.len();
        objects.push(SceneObject {
            id: ObjectId(idx as u32),
            color: palette[idx],
            pose: Pose::new(x, y, heading)?,
            radius: config.radius,
        });
    }

    Ok(SceneGraph::from_objects(
        scene_id,
        master_seed,
        objects,
        config.boundary_epsilon,
        &config.cardinal_frame,
    )?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SceneViolation {
    ObjectCount { count: usize },
    DuplicateId { id: ObjectId },
    DuplicateColor { color: ObjectColor },
    NonPositiveRadius { id: ObjectId },
    OutOfBounds { id: ObjectId },
    SeparationBreach { a: ObjectId, b: ObjectId, distance: f64 },
    CoincidentObjects { a: ObjectId, b: ObjectId },
    RelationCount { expected: usize, found: usize },
    MissingRelation { target: ObjectId, reference: ObjectId },
    StaleRelation {
        target: ObjectId,
        reference: ObjectId,
        stored: RelativeDirection,
        expected: RelativeDirection,
    },
    UnknownRelationObject { target: ObjectId, reference: ObjectId },
    StaleCardinal { id: ObjectId },
    StaleBoundaryFlags,
}

/// Lists every way `graph` breaks the scene-graph invariants or `config`.
pub fn validate_scene(graph: &SceneGraph, config: &SamplerConfig) -> Vec<SceneViolation> {
    let mut out = Vec::new();
    let objs = &graph.objects;
    let n = objs.len();
    if n < config.min_objects || n > config.max_objects {
        out.push(SceneViolation::ObjectCount { count: n });
    }
    for (i, a) in objs.iter().enumerate() {
        if objs[..i].iter().any(|b| b.id == a.id) {
            out.push(SceneViolation::DuplicateId { id: a.id });
        }
        if objs[..i].iter().any(|b| b.color == a.color) {
            out.push(SceneViolation::DuplicateColor { color: a.color });
        }
        if !(a.radius > 0.0) {
            out.push(SceneViolation::NonPositiveRadius { id: a.id });
        }
        let limit = config.half_extent - a.radius;
        if a.pose.x().abs() > limit || a.pose.y().abs() > limit {
            out.push(SceneViolation::OutOfBounds { id: a.id });
        }
        for b in &objs[..i] {
            let d = a.pose.distance_to(&b.pose);
            if d == 0.0 {
                out.push(SceneViolation::CoincidentObjects { a: b.id, b: a.id });
            } else if d < config.min_separation {
                out.push(SceneViolation::SeparationBreach { a: b.id, b: a.id, distance: d });
            }
        }
    }

    let expected = n * n.saturating_sub(1);
    if graph.relations.len() != expected {
        out.push(SceneViolation::RelationCount {
            expected,
            found: graph.relations.len(),
        });
    }
    for t in &graph.relations {
        if graph.object(t.target).is_none() || graph.object(t.reference).is_none() || t.target == t.reference {
            out.push(SceneViolation::UnknownRelationObject {
                target: t.target,
                reference: t.reference,
            });
        }
    }

    // Coincident objects make the recomputation below undefined.
    if out.iter().any(|v| matches!(v, SceneViolation::CoincidentObjects { .. })) {
        return out;
    }
    let Ok(fresh) = build_relation_table(objs, config.boundary_epsilon, &config.cardinal_frame) else {
        out.push(SceneViolation::StaleBoundaryFlags);
        return out;
    };
    for t in &fresh.relations {
        match graph.relation(t.target, t.reference) {
            None => out.push(SceneViolation::MissingRelation {
                target: t.target,
                reference: t.reference,
            }),
            Some(stored) if stored != t.relation => out.push(SceneViolation::StaleRelation {
                target: t.target,
                reference: t.reference,
                stored,
                expected: t.relation,
            }),
            Some(_) => {}
        }
    }
    for (id, dir) in &fresh.cardinals {
        if graph.cardinals.get(id) != Some(dir) {
            out.push(SceneViolation::StaleCardinal { id: *id });
        }
    }
    if graph.cardinals.len() != fresh.cardinals.len() {
        out.push(SceneViolation::StaleCardinal {
            id: ObjectId(u32::MAX),
        });
    }
    if graph.boundary_flags != fresh.boundary_flags {
        out.push(SceneViolation::StaleBoundaryFlags);
    }
    out
}
