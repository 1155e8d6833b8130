//! Planar poses and direction labels in an object's intrinsic frame.
//!
//! Angles are radians, counterclockwise from the world `+x` axis. A pose's
//! heading points at the object's front side; "left" is the counterclockwise
//! side of that heading.

use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate geometry: reference and target positions coincide")]
    Degenerate,
    #[error("non-finite pose component")]
    NonFinite,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Wraps an angle into `[0, period)`.
pub fn wrap(angle: f64, period: f64) -> f64 {
    let r = angle - period * libm::floor(angle / period);
    // floor can round the quotient up for tiny negative inputs.
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(angle: f64) -> f64 {
    wrap(angle, TAU)
}

/// Identifier of an object, stable within one scene.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPose")]
pub struct Pose {
    x: f64,
    y: f64,
    heading: f64,
}

#[derive(Deserialize)]
struct RawPose {
    x: f64,
    y: f64,
    heading: f64,
}

impl TryFrom<RawPose> for Pose {
    type Error = GeometryError;

    fn try_from(raw: RawPose) -> Result<Self, Self::Error> {
        Pose::new(raw.x, raw.y, raw.heading)
    }
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Result<Self, GeometryError> {
        if !(x.is_finite() && y.is_finite() && heading.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        Ok(Self {
            x,
            y,
            heading: normalize_angle(heading),
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// Heading in `[0, 2π)`.
    pub fn heading(&self) -> f64 {
        self.heading
    }

    pub fn distance_to(&self, other: &Pose) -> f64 {
        libm::hypot(other.x - self.x, other.y - self.y)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Result<Self, GeometryError> {
        Self::new(self.x + dx, self.y + dy, self.heading)
    }

    /// Rotates position about the origin and turns the heading by the same angle.
    pub fn rotated(&self, alpha: f64) -> Result<Self, GeometryError> {
        let (s, c) = (libm::sin(alpha), libm::cos(alpha));
        Self::new(
            c * self.x - s * self.y,
            s * self.x + c * self.y,
            self.heading + alpha,
        )
    }
}

/// Heading label of a single object in the world frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CardinalDirection {
    North,
    East,
    South,
    West,
}

impl CardinalDirection {
    pub const ALL: [CardinalDirection; 4] = [
        CardinalDirection::North,
        CardinalDirection::East,
        CardinalDirection::South,
        CardinalDirection::West,
    ];

    pub const fn label(self) -> &'static str {
        match self {
            CardinalDirection::North => "north",
            CardinalDirection::East => "east",
            CardinalDirection::South => "south",
            CardinalDirection::West => "west",
        }
    }
}

/// Direction of a target as seen from a reference object's own front side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelativeDirection {
    #[serde(rename = "front")]
    Front,
    #[serde(rename = "left front")]
    LeftFront,
    #[serde(rename = "left")]
    Left,
    #[serde(rename = "left behind")]
    LeftBehind,
    #[serde(rename = "behind")]
    Behind,
    #[serde(rename = "right behind")]
    RightBehind,
    #[serde(rename = "right")]
    Right,
    #[serde(rename = "right front")]
    RightFront,
}

impl RelativeDirection {
    /// Sector order: sector `k` is centered on bearing `k·π/4`.
    pub const ALL: [RelativeDirection; 8] = [
        RelativeDirection::Front,
        RelativeDirection::LeftFront,
        RelativeDirection::Left,
        RelativeDirection::LeftBehind,
        RelativeDirection::Behind,
        RelativeDirection::RightBehind,
        RelativeDirection::Right,
        RelativeDirection::RightFront,
    ];

    pub const fn label(self) -> &'static str {
        match self {
            RelativeDirection::Front => "front",
            RelativeDirection::LeftFront => "left front",
            RelativeDirection::Left => "left",
            RelativeDirection::LeftBehind => "left behind",
            RelativeDirection::Behind => "behind",
            RelativeDirection::RightBehind => "right behind",
            RelativeDirection::Right => "right",
            RelativeDirection::RightFront => "right front",
        }
    }

    pub fn sector(self) -> usize {
        self as usize
    }
}

macro_rules! label_traits {
    ($ty:ty) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }

        impl FromStr for $ty {
            type Err = UnknownLabel;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::ALL
                    .iter()
                    .copied()
                    .find(|v| v.label() == s)
                    .ok_or(UnknownLabel)
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("unknown label")]
pub struct UnknownLabel;

label_traits!(CardinalDirection);
label_traits!(RelativeDirection);

/// An assertion that `target` stands in `relation` to `reference`, judged in
/// the reference's intrinsic frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub target: ObjectId,
    pub relation: RelativeDirection,
    pub reference: ObjectId,
}

impl Triple {
    pub fn new(
        target: ObjectId,
        relation: RelativeDirection,
        reference: ObjectId,
    ) -> Result<Self, GeometryError> {
        if target == reference {
            return Err(GeometryError::InvalidParameter("triple target equals reference"));
        }
        Ok(Self {
            target,
            relation,
            reference,
        })
    }
}

/// Bearing of `target` in the intrinsic frame of `reference`, in `[0, 2π)`.
/// Zero is straight ahead; bearings grow toward the reference's left.
pub fn intrinsic_bearing(reference: &Pose, target: &Pose) -> Result<f64, GeometryError> {
    let dx = target.x - reference.x;
    let dy = target.y - reference.y;
    if dx == 0.0 && dy == 0.0 {
        return Err(GeometryError::Degenerate);
    }
    let (s, c) = (libm::sin(reference.heading), libm::cos(reference.heading));
    let ahead = c * dx + s * dy;
    let leftward = -s * dx + c * dy;
    Ok(normalize_angle(libm::atan2(leftward, ahead)))
}

/// Index of the half-open bin `[k·w − w/2, k·w + w/2)` containing `angle`.
fn centered_bin(angle: f64, width: f64, bins: usize) -> usize {
    let shifted = wrap(angle + width / 2.0, TAU);
    let k = libm::floor(shifted / width) as usize;
    k.min(bins - 1)
}

pub fn relative_direction_from_bearing(bearing: f64) -> RelativeDirection {
    RelativeDirection::ALL[centered_bin(bearing, FRAC_PI_4, 8)]
}

pub fn relative_direction(reference: &Pose, target: &Pose) -> Result<RelativeDirection, GeometryError> {
    intrinsic_bearing(reference, target).map(relative_direction_from_bearing)
}

/// Which world heading counts as north.
///
/// The default is the world `+y` axis. [`CardinalFrame::facing`] anchors
/// north to an arbitrary horizontal direction, e.g. a camera's forward axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CardinalFrame {
    pub north_heading: f64,
}

impl Default for CardinalFrame {
    fn default() -> Self {
        Self::WORLD
    }
}

impl CardinalFrame {
    pub const WORLD: CardinalFrame = CardinalFrame {
        north_heading: FRAC_PI_2,
    };

    /// North points along the horizontal direction `(dx, dy)`.
    pub fn facing(dx: f64, dy: f64) -> Result<Self, GeometryError> {
        if dx == 0.0 && dy == 0.0 {
            return Err(GeometryError::Degenerate);
        }
        Ok(Self {
            north_heading: normalize_angle(libm::atan2(dy, dx)),
        })
    }

    pub fn classify(&self, heading: f64) -> CardinalDirection {
        // Rotate so that this frame's north lands on π/2.
        let h = heading - self.north_heading + FRAC_PI_2;
        match centered_bin(h, FRAC_PI_2, 4) {
            0 => CardinalDirection::East,
            1 => CardinalDirection::North,
            2 => CardinalDirection::West,
            _ => CardinalDirection::South,
        }
    }
}

/// Heading label in the world frame (north = `+y`).
pub fn cardinal_direction(pose: &Pose) -> CardinalDirection {
    CardinalFrame::WORLD.classify(pose.heading)
}

/// True iff `angle` lies within `epsilon` of a boundary between bins of
/// width `bin_width` centered on multiples of `bin_width`.
pub fn is_near_boundary(angle: f64, bin_width: f64, epsilon: f64) -> Result<bool, GeometryError> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(GeometryError::InvalidParameter("bin width must be positive"));
    }
    if !(epsilon >= 0.0 && epsilon < bin_width / 2.0) {
        return Err(GeometryError::InvalidParameter(
            "epsilon must lie in [0, bin_width / 2)",
        ));
    }
    if !angle.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    let offset = wrap(angle - bin_width / 2.0, bin_width);
    Ok(offset.min(bin_width - offset) < epsilon)
}

/// Default boundary annotation tolerance, 5°.
pub const DEFAULT_BOUNDARY_EPSILON: f64 = 5.0 * PI / 180.0;

/// Sector width of relative directions.
pub const RELATION_SECTOR: f64 = FRAC_PI_4;
/// Sector width of cardinal directions.
pub const CARDINAL_SECTOR: f64 = FRAC_PI_2;
