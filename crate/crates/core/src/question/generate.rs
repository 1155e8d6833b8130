use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::assets::AssetBundle;
use super::balance::{balance_select, BalanceState, Slack, TaskQuotas};
use super::enumerate::{enumerate_families, Candidate};
use super::program::{ProgramFamily, QuestionProgram};
use super::realize::{realize_variant, RealizeConfig, RealizeError};
use super::{achievable_support, Answer};
use crate::rng::{Stream, StreamRng};
use crate::scene::{SamplerConfig, SceneGraph};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuestionConfig {
    pub quotas: TaskQuotas,
    pub slack: Slack,
    pub realize: RealizeConfig,
    /// Ask "how many objects are there" questions.
    pub count_total: bool,
    /// Ask "how many objects are <R> <O2>" questions.
    pub count_related: bool,
}

impl Default for QuestionConfig {
    fn default() -> Self {
        Self {
            quotas: TaskQuotas::default(),
            slack: Slack::DEFAULT,
            realize: RealizeConfig::default(),
            count_total: true,
            count_related: true,
        }
    }
}

impl QuestionConfig {
    pub fn enables(&self, family: ProgramFamily) -> bool {
        match family {
            ProgramFamily::CountAll => self.count_total,
            ProgramFamily::CountRelated => self.count_related,
            _ => true,
        }
    }

    /// Families that have templates and are enabled.
    pub fn families(&self, assets: &AssetBundle) -> Vec<ProgramFamily> {
        assets.families().into_iter().filter(|&f| self.enables(f)).collect()
    }

    /// Fresh counters for a dataset drawn with `sampler`.
    pub fn balance_state(&self, assets: &AssetBundle, sampler: &SamplerConfig) -> BalanceState {
        let families = self.families(assets);
        BalanceState::new(|t| achievable_support(t, sampler.min_objects, sampler.max_objects, &families))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedQuestion {
    pub program: QuestionProgram,
    pub answer: Answer,
    pub text: String,
}

/// All enabled candidates for one scene. Pure; safe to run in parallel.
pub fn scene_candidates(graph: &SceneGraph, assets: &AssetBundle, config: &QuestionConfig) -> Vec<Candidate> {
    enumerate_families(graph, &config.families(assets))
}

/// Balances and realizes one scene's questions. Must be called in scene-id
/// order with a shared `state`.
pub fn select_and_realize(
    scene_id: u64,
    master_seed: u64,
    candidates: &[Candidate],
    assets: &AssetBundle,
    config: &QuestionConfig,
    state: &mut BalanceState,
) -> Result<Vec<GeneratedQuestion>, RealizeError> {
    let root = StreamRng::new(master_seed, scene_id, Stream::Questions);
    let mut select_rng = root.fork(0);
    let mut text_rng = root.fork(1);
    let picks = balance_select(candidates, assets, &config.quotas, config.slack, state, &mut select_rng);
    picks
        .into_iter()
        .map(|s| {
            let text = realize_variant(s.variant, &s.program, assets, &mut text_rng, &config.realize)?;
            Ok(GeneratedQuestion {
                program: s.program,
                answer: s.answer,
                text,
            })
        })
        .collect()
}
