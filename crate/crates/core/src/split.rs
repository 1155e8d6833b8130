//! Train/val/test assignment by contiguous scene-id blocks.

use alloc::format;
use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::UnknownLabel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub const fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.iter().copied().find(|x| x.name() == s).ok_or(UnknownLabel)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.8,
            val: 0.1,
            test: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SplitError {
    #[error("split fractions {0}")]
    Fractions(String),
    #[error("scene id {id} out of range for {total} scenes")]
    OutOfRange { id: u64, total: u64 },
}

impl SplitFractions {
    pub fn validate(&self) -> Result<(), SplitError> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(SplitError::Fractions(format!("must be finite and non-negative: {parts:?}")));
        }
        if libm::fabs(parts.iter().sum::<f64>() - 1.0) > 1e-9 {
            return Err(SplitError::Fractions(format!("must sum to 1: {parts:?}")));
        }
        Ok(())
    }

    /// Scene counts per split for `n` scenes. Train and val are rounded down
    /// (with a small tolerance for decimal fractions like 0.8 · 200), and test
    /// takes the remainder.
    pub fn counts(&self, n: u64) -> [u64; 3] {
        let take = |f: f64| libm::floor(f * n as f64 + 1e-9) as u64;
        let train = take(self.train).min(n);
        let val = take(self.val).min(n - train);
        [train, val, n - train - val]
    }

    /// Split of scene `id` among `n` scenes.
    pub fn assign(&self, id: u64, n: u64) -> Result<Split, SplitError> {
        if id >= n {
            return Err(SplitError::OutOfRange { id, total: n });
        }
        let [train, val, _] = self.counts(n);
        Ok(if id < train {
            Split::Train
        } else if id < train + val {
            Split::Val
        } else {
            Split::Test
        })
    }
}

/// Image file name for a scene.
pub fn image_name(split: Split, scene_id: u64) -> String {
    format!("GRIDA3D_{}_{:06}.png", split.name(), scene_id)
}
