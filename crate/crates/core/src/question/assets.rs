//! Template, synonym and metadata assets, and their validation.
//!
//! Template text uses `<O1>`, `<O2>`, `<R>` and `<D>` for parameter slots and
//! square brackets for spans that may be omitted during realization, e.g.
//! `"Is <O1> [visible] in the image?"`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::program::{Placeholder, ProgramFamily, SlotKind};
use super::{answer_vocabulary, TaskKind};
use crate::geometry::{CardinalDirection, RelativeDirection};
use crate::scene::ObjectColor;

/// Placeholder spellings recognized in template text.
pub const PLACEHOLDERS: [&str; 4] = ["<O1>", "<O2>", "<R>", "<D>"];

pub const TEMPLATES_FILE: &str = "templates.json";
pub const SYNONYMS_FILE: &str = "synonyms.json";
pub const METADATA_FILE: &str = "metadata.json";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssetError {
    #[error("{file}: {detail}")]
    Schema { file: &'static str, detail: String },
    #[error("{file}: undeclared placeholder <{name}> in {variant:?}")]
    UndeclaredPlaceholder {
        file: &'static str,
        name: String,
        variant: String,
    },
}

fn schema(file: &'static str, detail: String) -> AssetError {
    AssetError::Schema { file, detail }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotDecl {
    pub placeholder: Placeholder,
    pub kind: SlotKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateRecord {
    pub task: TaskKind,
    pub family: ProgramFamily,
    pub slots: Vec<SlotDecl>,
    pub variants: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    /// Noun used in object descriptions, as in "the red arrow".
    pub object_noun: String,
    /// Surface phrase per relation label, as in "left in front of".
    pub relation_phrases: BTreeMap<RelativeDirection, String>,
    pub slot_kinds: BTreeMap<Placeholder, SlotKind>,
    pub vocabularies: BTreeMap<TaskKind, Vec<String>>,
}

/// Position of one text variant inside an [`AssetBundle`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VariantRef {
    pub template: usize,
    pub variant: usize,
}

/// Validated question assets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AssetBundle {
    templates: Vec<TemplateRecord>,
    synonyms: BTreeMap<String, Vec<String>>,
    metadata: Metadata,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Token {
    Text(String),
    Slot(Placeholder),
    Open,
    Close,
}

/// Splits template text into literal runs, placeholders and bracket markers.
pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, TokenError> {
    let mut out = Vec::new();
    let mut lit = String::new();
    let mut chars = text.char_indices().peekable();
    let mut depth = 0usize;
    while let Some((i, c)) = chars.next() {
        match c {
            '<' => {
                let rest = &text[i + 1..];
                let end = rest.find('>').ok_or(TokenError::Unterminated)?;
                let name = &rest[..end];
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric()) {
                    return Err(TokenError::Malformed(name.to_string()));
                }
                if !lit.is_empty() {
                    out.push(Token::Text(core::mem::take(&mut lit)));
                }
                let slot = Placeholder::from_name(name).ok_or_else(|| TokenError::Unknown(name.to_string()))?;
                out.push(Token::Slot(slot));
                for _ in 0..=end {
                    chars.next();
                }
            }
            '[' | ']' => {
                if !lit.is_empty() {
                    out.push(Token::Text(core::mem::take(&mut lit)));
                }
                if c == '[' {
                    if depth > 0 {
                        return Err(TokenError::NestedOptional);
                    }
                    depth += 1;
                    out.push(Token::Open);
                } else {
                    if depth == 0 {
                        return Err(TokenError::UnbalancedOptional);
                    }
                    depth -= 1;
                    out.push(Token::Close);
                }
            }
            '>' => return Err(TokenError::Malformed(">".to_string())),
            _ => lit.push(c),
        }
    }
    if depth != 0 {
        return Err(TokenError::UnbalancedOptional);
    }
    if !lit.is_empty() {
        out.push(Token::Text(lit));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum TokenError {
    Unterminated,
    Malformed(String),
    Unknown(String),
    NestedOptional,
    UnbalancedOptional,
}

/// Lowercase alphabetic words of a literal run.
pub(crate) fn words(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_alphabetic()).filter(|w| !w.is_empty())
}

impl AssetBundle {
    pub fn new(
        templates: Vec<TemplateRecord>,
        synonyms: BTreeMap<String, Vec<String>>,
        metadata: Metadata,
    ) -> Result<Self, AssetError> {
        let bundle = Self {
            templates,
            synonyms,
            metadata,
        };
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn templates(&self) -> &[TemplateRecord] {
        &self.templates
    }

    pub fn synonyms(&self) -> &BTreeMap<String, Vec<String>> {
        &self.synonyms
    }

    pub fn metadata(&self) -> &Metadata {
        &self.metadata
    }

    /// Families with at least one template, in canonical order.
    pub fn families(&self) -> Vec<ProgramFamily> {
        ProgramFamily::ALL
            .iter()
            .copied()
            .filter(|f| self.templates.iter().any(|t| t.family == *f))
            .collect()
    }

    /// Every text variant available to `family`, in file order.
    pub fn variants(&self, family: ProgramFamily) -> Vec<VariantRef> {
        let mut out = Vec::new();
        for (ti, t) in self.templates.iter().enumerate() {
            if t.family == family {
                out.extend((0..t.variants.len()).map(|vi| VariantRef {
                    template: ti,
                    variant: vi,
                }));
            }
        }
        out
    }

    pub fn variant_text(&self, v: VariantRef) -> Option<&str> {
        self.templates.get(v.template)?.variants.get(v.variant).map(String::as_str)
    }

    pub fn object_phrase(&self, color: ObjectColor) -> String {
        format!("the {} {}", color.label(), self.metadata.object_noun)
    }

    pub fn relation_phrase(&self, relation: RelativeDirection) -> &str {
        self.metadata
            .relation_phrases
            .get(&relation)
            .map(String::as_str)
            .unwrap_or(relation.label())
    }

    /// Words that carry program parameters; templates and synonyms may not
    /// introduce them, so a realized question can always be read back.
    pub fn reserved_words(&self) -> BTreeSet<String> {
        let mut set = BTreeSet::new();
        set.insert(self.metadata.object_noun.to_lowercase());
        for c in ObjectColor::ALL {
            set.insert(c.label().to_string());
        }
        for d in CardinalDirection::ALL {
            set.insert(d.label().to_string());
        }
        for r in RelativeDirection::ALL {
            set.extend(words(r.label()).map(str::to_string));
        }
        set
    }

    fn validate(&self) -> Result<(), AssetError> {
        self.validate_metadata()?;
        let reserved = self.reserved_words();
        let mut literal_words: BTreeSet<String> = BTreeSet::new();

        if self.templates.is_empty() {
            return Err(schema(TEMPLATES_FILE, "no templates".into()));
        }
        for (ti, t) in self.templates.iter().enumerate() {
            let ctx = |msg: &str| schema(TEMPLATES_FILE, format!("template {ti} ({:?}): {msg}", t.family));
            if t.family.task() != t.task {
                return Err(ctx("task does not match program family"));
            }
            if t.variants.is_empty() {
                return Err(ctx("no text variants"));
            }
            let declared: BTreeSet<Placeholder> = t.slots.iter().map(|s| s.placeholder).collect();
            if declared.len() != t.slots.len() {
                return Err(ctx("slot declared twice"));
            }
            for s in &t.slots {
                match t.family.slot(s.placeholder) {
                    Some(spec) if spec.kind == s.kind => {}
                    Some(_) => return Err(ctx("slot kind does not match program family")),
                    None => return Err(ctx("slot not a parameter of the program family")),
                }
                if self.metadata.slot_kinds.get(&s.placeholder) != Some(&s.kind) {
                    return Err(ctx("slot kind disagrees with metadata"));
                }
            }
            if t.family.slots().iter().any(|s| !declared.contains(&s.placeholder)) {
                return Err(ctx("program family parameter without a slot"));
            }

            for v in &t.variants {
                let tokens = tokenize(v).map_err(|e| match e {
                    TokenError::Unknown(name) => AssetError::UndeclaredPlaceholder {
                        file: TEMPLATES_FILE,
                        name,
                        variant: v.clone(),
                    },
                    other => ctx(&format!("malformed variant {v:?}: {other:?}")),
                })?;
                let mut required: BTreeSet<Placeholder> = BTreeSet::new();
                let mut optional = false;
                for tok in &tokens {
                    match tok {
                        Token::Open => optional = true,
                        Token::Close => optional = false,
                        Token::Slot(p) => {
                            if !declared.contains(p) {
                                return Err(AssetError::UndeclaredPlaceholder {
                                    file: TEMPLATES_FILE,
                                    name: p.name().to_string(),
                                    variant: v.clone(),
                                });
                            }
                            if optional {
                                return Err(ctx(&format!("placeholder inside optional span in {v:?}")));
                            }
                            required.insert(*p);
                        }
                        Token::Text(s) => {
                            for w in words(s) {
                                let w = w.to_lowercase();
                                if reserved.contains(&w) {
                                    return Err(ctx(&format!("reserved word {w:?} in literal text of {v:?}")));
                                }
                                literal_words.insert(w);
                            }
                        }
                    }
                }
                if required != declared {
                    return Err(ctx(&format!("variant {v:?} does not use every declared slot")));
                }
            }
        }
        for family in ProgramFamily::ALL {
            if !self.templates.iter().any(|t| t.family == family) {
                return Err(schema(TEMPLATES_FILE, format!("no template for family {family:?}")));
            }
        }

        for (key, alts) in &self.synonyms {
            let err = |msg: &str| schema(SYNONYMS_FILE, format!("{key:?}: {msg}"));
            if key.is_empty() || !key.chars().all(char::is_lowercase) {
                return Err(err("keys must be single lowercase words"));
            }
            if reserved.contains(key) {
                return Err(err("reserved word cannot be replaced"));
            }
            if !literal_words.contains(key) {
                return Err(err("word does not occur in any template"));
            }
            if alts.is_empty() {
                return Err(err("no alternatives"));
            }
            for a in alts {
                if a.trim().is_empty() || a.contains(['<', '>', '[', ']']) {
                    return Err(err("empty or markup alternative"));
                }
                if words(a).any(|w| reserved.contains(&w.to_lowercase())) {
                    return Err(err("alternative contains a reserved word"));
                }
            }
        }
        Ok(())
    }

    fn validate_metadata(&self) -> Result<(), AssetError> {
        let m = &self.metadata;
        let err = |msg: String| schema(METADATA_FILE, msg);
        let noun = m.object_noun.trim();
        if noun.is_empty() || noun.contains(char::is_whitespace) || !noun.chars().all(char::is_alphabetic) {
            return Err(err("object_noun must be one word".into()));
        }
        for task in TaskKind::ALL {
            let expected: Vec<String> = answer_vocabulary(task).iter().map(|a| a.to_string()).collect();
            match m.vocabularies.get(&task) {
                Some(v) if *v == expected => {}
                Some(v) => return Err(err(format!("vocabulary for {task} is {v:?}, expected {expected:?}"))),
                None => return Err(err(format!("missing vocabulary for {task}"))),
            }
        }
        for r in RelativeDirection::ALL {
            let Some(p) = m.relation_phrases.get(&r) else {
                return Err(err(format!("missing phrase for relation {r}")));
            };
            // The phrase must carry the label's words so it can be read back.
            let pw: Vec<&str> = words(p).collect();
            if !words(r.label()).all(|w| pw.contains(&w)) {
                return Err(err(format!("phrase {p:?} does not mention {r}")));
            }
        }
        let phrases: BTreeSet<&String> = m.relation_phrases.values().collect();
        if phrases.len() != m.relation_phrases.len() {
            return Err(err("relation phrases must be distinct".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::question::program::SlotKind;

    pub(crate) fn tiny_bundle_parts() -> (Vec<TemplateRecord>, BTreeMap<String, Vec<String>>, Metadata) {
        use Placeholder::*;
        let obj = |p| SlotDecl {
            placeholder: p,
            kind: SlotKind::Object,
        };
        let rel = SlotDecl {
            placeholder: R,
            kind: SlotKind::Relation,
        };
        let t = |family: ProgramFamily, slots: Vec<SlotDecl>, variants: &[&str]| TemplateRecord {
            task: family.task(),
            family,
            slots,
            variants: variants.iter().map(|s| s.to_string()).collect(),
        };
        let templates = alloc::vec![
            t(ProgramFamily::Existence, alloc::vec![obj(O1)], &["Is there <O1> [in the image]?", "Does the image contain <O1>?"]),
            t(ProgramFamily::Orientation, alloc::vec![obj(O1)], &["Which cardinal direction does <O1> point to?"]),
            t(ProgramFamily::Relation, alloc::vec![obj(O1), obj(O2)], &["Where is <O1> relative to <O2>?"]),
            t(ProgramFamily::Link, alloc::vec![obj(O2), rel], &["Which object is <R> <O2>?"]),
            t(ProgramFamily::CountAll, alloc::vec![], &["How many objects are there?"]),
            t(ProgramFamily::CountRelated, alloc::vec![obj(O2), rel], &["How many objects are <R> <O2>?"]),
            t(
                ProgramFamily::TripleClassification,
                alloc::vec![obj(O1), rel, obj(O2)],
                &["From <O2>'s perspective, is <O1> <R> it?"]
            ),
        ];
        let mut synonyms = BTreeMap::new();
        synonyms.insert("image".to_string(), alloc::vec!["picture".to_string(), "scene".to_string()]);
        let mut relation_phrases = BTreeMap::new();
        for r in RelativeDirection::ALL {
            let p = match r {
                RelativeDirection::Front => "in front of",
                RelativeDirection::LeftFront => "left in front of",
                RelativeDirection::Left => "left of",
                RelativeDirection::LeftBehind => "left behind",
                RelativeDirection::Behind => "behind",
                RelativeDirection::RightBehind => "right behind",
                RelativeDirection::Right => "right of",
                RelativeDirection::RightFront => "right in front of",
            };
            relation_phrases.insert(r, p.to_string());
        }
        let mut slot_kinds = BTreeMap::new();
        slot_kinds.insert(O1, SlotKind::Object);
        slot_kinds.insert(O2, SlotKind::Object);
        slot_kinds.insert(R, SlotKind::Relation);
        slot_kinds.insert(D, SlotKind::Direction);
        let vocabularies = TaskKind::ALL
            .iter()
            .map(|&t| (t, answer_vocabulary(t).iter().map(|a| a.to_string()).collect()))
            .collect();
        let metadata = Metadata {
            object_noun: "arrow".into(),
            relation_phrases,
            slot_kinds,
            vocabularies,
        };
        (templates, synonyms, metadata)
    }

    pub(crate) fn tiny_bundle() -> AssetBundle {
        let (t, s, m) = tiny_bundle_parts();
        AssetBundle::new(t, s, m).unwrap()
    }

    #[test]
    fn tiny_bundle_validates() {
        let b = tiny_bundle();
        assert_eq!(b.families().len(), 7);
        assert_eq!(b.variants(ProgramFamily::Existence).len(), 2);
        assert_eq!(b.object_phrase(ObjectColor::Red), "the red arrow");
    }

    #[test]
    fn undeclared_placeholder_is_rejected() {
        let (mut t, s, m) = tiny_bundle_parts();
        t[2].variants.push("Where is <O1> relative to <O2> and <O3>?".into());
        assert!(matches!(
            AssetBundle::new(t, s, m),
            Err(AssetError::UndeclaredPlaceholder { name, .. }) if name == "O3"
        ));
        let (mut t, s, m) = tiny_bundle_parts();
        t[0].variants.push("Is <O1> <R>?".into());
        assert!(matches!(
            AssetBundle::new(t, s, m),
            Err(AssetError::UndeclaredPlaceholder { name, .. }) if name == "R"
        ));
    }

    #[test]
    fn schema_violations() {
        let (mut t, s, m) = tiny_bundle_parts();
        t[0].variants.push("Is it there?".into());
        assert!(AssetBundle::new(t, s, m).is_err(), "unused slot");

        let (mut t, s, m) = tiny_bundle_parts();
        t[0].variants.push("Is <O1> on the left?".into());
        assert!(AssetBundle::new(t, s, m).is_err(), "reserved literal");

        let (mut t, s, m) = tiny_bundle_parts();
        t[0].variants.push("Is [<O1>] here?".into());
        assert!(AssetBundle::new(t, s, m).is_err(), "optional placeholder");

        let (mut t, s, m) = tiny_bundle_parts();
        t.remove(4);
        assert!(AssetBundle::new(t, s, m).is_err(), "missing family");

        let (t, mut s, m) = tiny_bundle_parts();
        s.insert("banana".into(), alloc::vec!["fruit".into()]);
        assert!(AssetBundle::new(t, s, m).is_err(), "dangling synonym");

        let (t, mut s, m) = tiny_bundle_parts();
        s.insert("image".into(), alloc::vec!["red picture".into()]);
        assert!(AssetBundle::new(t, s, m).is_err(), "reserved alternative");

        let (t, s, mut m) = tiny_bundle_parts();
        m.vocabularies.get_mut(&TaskKind::Counting).unwrap().pop();
        assert!(AssetBundle::new(t, s, m).is_err(), "vocabulary drift");

        let (t, s, mut m) = tiny_bundle_parts();
        m.relation_phrases.insert(RelativeDirection::Left, "beside".into());
        assert!(AssetBundle::new(t, s, m).is_err(), "unreadable relation phrase");
    }

    #[test]
    fn tokenizer() {
        assert_eq!(
            tokenize("Is <O1> [here]?").unwrap(),
            alloc::vec![
                Token::Text("Is ".into()),
                Token::Slot(Placeholder::O1),
                Token::Text(" ".into()),
                Token::Open,
                Token::Text("here".into()),
                Token::Close,
                Token::Text("?".into()),
            ]
        );
        assert_eq!(tokenize("a <O1"), Err(TokenError::Unterminated));
        assert_eq!(tokenize("[a [b]]"), Err(TokenError::NestedOptional));
        assert_eq!(tokenize("a]"), Err(TokenError::UnbalancedOptional));
        assert_eq!(tokenize("<X9>"), Err(TokenError::Unknown("X9".into())));
    }
}
