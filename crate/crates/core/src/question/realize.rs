use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::assets::{tokenize, words, AssetBundle, Token, VariantRef};
use super::program::{Placeholder, ProgramFamily, QuestionProgram, SlotValue};
use crate::geometry::{CardinalDirection, RelativeDirection};
use crate::rng::StreamRng;
use crate::scene::ObjectColor;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RealizeConfig {
    /// Probability that a bracketed span is dropped.
    pub p_omit: f64,
    /// Probability that a template word with synonyms is replaced.
    pub p_syn: f64,
}

impl Default for RealizeConfig {
    fn default() -> Self {
        Self { p_omit: 0.3, p_syn: 0.3 }
    }
}

impl RealizeConfig {
    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.p_omit) && (0.0..=1.0).contains(&self.p_syn)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizeError {
    #[error("no such template variant {0:?}")]
    UnknownVariant(VariantRef),
    #[error("program has no value for placeholder {0}")]
    MissingBinding(Placeholder),
    #[error("no template for program family {0:?}")]
    NoVariant(ProgramFamily),
    #[error("malformed template text {0:?}")]
    Malformed(String),
}

fn slot_text(assets: &AssetBundle, value: SlotValue) -> String {
    match value {
        SlotValue::Object(c) => assets.object_phrase(c),
        SlotValue::Relation(r) => assets.relation_phrase(r).to_string(),
        SlotValue::Direction(d) => d.label().to_string(),
    }
}

fn match_case(original: &str, replacement: &str) -> String {
    let upper = original.chars().next().is_some_and(char::is_uppercase);
    if !upper {
        return replacement.to_string();
    }
    let mut chars = replacement.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Literal run with synonym substitution on whole words.
fn push_literal(out: &mut String, text: &str, assets: &AssetBundle, rng: &mut StreamRng, p_syn: f64) {
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String, rng: &mut StreamRng| {
        if word.is_empty() {
            return;
        }
        match assets.synonyms().get(&word.to_lowercase()) {
            Some(alts) if rng.chance(p_syn) => {
                let alt = &alts[rng.below_usize(alts.len())];
                out.push_str(&match_case(word, alt));
            }
            _ => out.push_str(word),
        }
        word.clear();
    };
    for c in text.chars() {
        if c.is_alphabetic() {
            word.push(c);
        } else {
            flush(&mut word, out, rng);
            out.push(c);
        }
    }
    flush(&mut word, out, rng);
}

/// Collapses runs of spaces, drops spaces before punctuation and
/// capitalizes the first letter.
fn tidy(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        if c.is_whitespace() {
            if !out.is_empty() && !out.ends_with(' ') {
                out.push(' ');
            }
        } else {
            if matches!(c, '?' | '.' | ',' | '!' | ';' | ':' | '\'') && out.ends_with(' ') {
                out.pop();
            }
            out.push(c);
        }
    }
    while out.ends_with(' ') {
        out.pop();
    }
    match out.chars().next() {
        Some(first) if first.is_lowercase() => {
            let rest = &out[first.len_utf8()..];
            first.to_uppercase().chain(rest.chars()).collect()
        }
        _ => out,
    }
}

/// Fills `text` with the values of `program`, dropping optional spans and
/// substituting synonyms with the given probabilities.
pub fn realize_template(
    text: &str,
    program: &QuestionProgram,
    assets: &AssetBundle,
    rng: &mut StreamRng,
    config: &RealizeConfig,
) -> Result<String, RealizeError> {
    let tokens = tokenize(text).map_err(|_| RealizeError::Malformed(text.to_string()))?;
    let mut raw = String::new();
    let mut skipping = false;
    for tok in tokens {
        match tok {
            Token::Open => skipping = rng.chance(config.p_omit),
            Token::Close => skipping = false,
            _ if skipping => {}
            Token::Text(s) => push_literal(&mut raw, &s, assets, rng, config.p_syn),
            Token::Slot(p) => {
                let value = program.binding(p).ok_or(RealizeError::MissingBinding(p))?;
                raw.push_str(&slot_text(assets, value));
            }
        }
    }
    Ok(tidy(&raw))
}

pub fn realize_variant(
    variant: VariantRef,
    program: &QuestionProgram,
    assets: &AssetBundle,
    rng: &mut StreamRng,
    config: &RealizeConfig,
) -> Result<String, RealizeError> {
    let text = assets.variant_text(variant).ok_or(RealizeError::UnknownVariant(variant))?;
    realize_template(text, program, assets, rng, config)
}

/// Realizes `program` with a text variant drawn uniformly from its family.
pub fn realize_text(
    program: &QuestionProgram,
    assets: &AssetBundle,
    rng: &mut StreamRng,
    config: &RealizeConfig,
) -> Result<String, RealizeError> {
    let variants = assets.variants(program.family());
    if variants.is_empty() {
        return Err(RealizeError::NoVariant(program.family()));
    }
    let v = variants[rng.below_usize(variants.len())];
    realize_variant(v, program, assets, rng, config)
}

/// Parameters read back out of a realized question.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Mentions {
    pub colors: Vec<ObjectColor>,
    pub relations: Vec<RelativeDirection>,
    pub cardinals: Vec<CardinalDirection>,
}

impl Mentions {
    /// What a faithful realization of `program` must mention.
    pub fn of_program(program: &QuestionProgram) -> Self {
        let mut m = Mentions::default();
        for (_, v) in program.bindings() {
            match v {
                SlotValue::Object(c) => m.colors.push(c),
                SlotValue::Relation(r) => m.relations.push(r),
                SlotValue::Direction(d) => m.cardinals.push(d),
            }
        }
        m.normalize();
        m
    }

    /// Sorts and deduplicates, so texts that repeat an object compare equal.
    pub fn normalize(&mut self) {
        self.colors.sort();
        self.colors.dedup();
        self.relations.sort();
        self.relations.dedup();
        self.cardinals.sort();
        self.cardinals.dedup();
    }
}

/// Scans `text` for object descriptions, relation phrases (longest match
/// first) and cardinal words.
pub fn extract_mentions(text: &str, assets: &AssetBundle) -> Mentions {
    let lower = text.to_lowercase();
    let ws: Vec<&str> = words(&lower).collect();
    let noun = assets.metadata().object_noun.to_lowercase();
    let mut phrases: Vec<(Vec<&str>, RelativeDirection)> = RelativeDirection::ALL
        .iter()
        .map(|&r| (words(assets.relation_phrase(r)).collect(), r))
        .collect();
    phrases.sort_by_key(|(p, _)| core::cmp::Reverse(p.len()));

    let mut m = Mentions::default();
    let mut i = 0;
    while i < ws.len() {
        if let Ok(c) = ws[i].parse::<ObjectColor>() {
            if ws.get(i + 1) == Some(&noun.as_str()) {
                m.colors.push(c);
                i += 2;
                continue;
            }
        }
        if let Some((p, r)) = phrases.iter().find(|(p, _)| ws[i..].starts_with(p)) {
            m.relations.push(*r);
            i += p.len();
            continue;
        }
        if let Ok(d) = ws[i].parse::<CardinalDirection>() {
            m.cardinals.push(d);
        }
        i += 1;
    }
    m
}
