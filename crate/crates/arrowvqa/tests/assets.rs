use std::fs;

use arrowvqa::assets::write_default_assets;
use arrowvqa::core::geometry::RelativeDirection;
use arrowvqa::core::question::{
    enumerate_candidates, realize_variant, AssetError, ProgramFamily, QuestionProgram, RealizeConfig, SlotValue,
    TaskKind, TEMPLATES_FILE,
};
use arrowvqa::core::rng::{Stream, StreamRng};
use arrowvqa::core::scene::{sample_scene, ObjectColor, SamplerConfig};
use arrowvqa::{default_assets, load_assets, LoadError};

const NO_NOISE: RealizeConfig = RealizeConfig { p_omit: 0.0, p_syn: 0.0 };

#[test]
fn shipped_assets_cover_every_task() {
    let b = default_assets().bundle;
    for task in TaskKind::ALL {
        let families: Vec<_> = b.families().into_iter().filter(|f| f.task() == task).collect();
        assert!(!families.is_empty(), "{task}");
        for f in families {
            assert!(b.variants(f).len() >= 3, "{f:?}");
        }
    }
}

#[test]
fn written_defaults_load_back_identically() {
    let dir = tempfile::tempdir().unwrap();
    write_default_assets(dir.path()).unwrap();
    let loaded = load_assets(dir.path()).unwrap();
    let builtin = default_assets();
    assert_eq!(loaded.bundle, builtin.bundle);
    assert_eq!(loaded.digests, builtin.digests);
}

#[test]
fn undeclared_placeholder_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    write_default_assets(dir.path()).unwrap();
    let path = dir.path().join(TEMPLATES_FILE);
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("Is there <O1> [in the image]?"));
    fs::write(&path, text.replace("Is there <O1> [in the image]?", "Is there <O3> [in the image]?")).unwrap();
    let err = load_assets(dir.path()).unwrap_err();
    assert!(matches!(err, LoadError::Schema(_)), "{err}");
    assert!(err.to_string().contains("O3"), "{err}");

    // A known placeholder the family does not declare is named as such.
    fs::write(&path, text.replace("Is there <O1> [in the image]?", "Is there <O1> near <O2>?")).unwrap();
    let err = load_assets(dir.path()).unwrap_err();
    assert!(
        matches!(err, LoadError::Schema(AssetError::UndeclaredPlaceholder { .. })),
        "{err}"
    );
}

#[test]
fn empty_directory_reports_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_assets(dir.path()).unwrap_err();
    assert!(matches!(err, LoadError::Missing(ref p) if p.ends_with(TEMPLATES_FILE)), "{err}");
}

#[test]
fn parse_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    write_default_assets(dir.path()).unwrap();
    fs::write(dir.path().join(TEMPLATES_FILE), "{\n  \"templates\": [\n    {,\n  ]\n}\n").unwrap();
    match load_assets(dir.path()).unwrap_err() {
        LoadError::Parse { line, path, .. } => {
            assert_eq!(line, 3);
            assert!(path.ends_with(TEMPLATES_FILE));
        }
        other => panic!("{other}"),
    }
}

#[test]
fn figure_triple_reads_naturally() {
    let b = default_assets().bundle;
    let program = QuestionProgram::TripleClassification {
        target: ObjectColor::Yellow,
        relation: RelativeDirection::LeftFront,
        reference: ObjectColor::Green,
    };
    let v = b.variants(ProgramFamily::TripleClassification)[0];
    let mut rng = StreamRng::new(0, 0, Stream::Questions);
    let text = realize_variant(v, &program, &b, &mut rng, &NO_NOISE).unwrap();
    assert_eq!(text, "From the green arrow's perspective, is the yellow arrow left in front of it?");
}

/// Plain substitution, written independently of the realizer.
fn substitute(template: &str, program: &QuestionProgram, b: &arrowvqa::core::question::AssetBundle) -> String {
    let mut s = template.replace(['[', ']'], "");
    for (p, v) in program.bindings() {
        let value = match v {
            SlotValue::Object(c) => format!("the {c} arrow"),
            SlotValue::Relation(r) => b.relation_phrase(r).to_string(),
            SlotValue::Direction(d) => d.to_string(),
        };
        s = s.replace(&p.to_string(), &value);
    }
    let s = s.split_whitespace().collect::<Vec<_>>().join(" ");
    let mut chars = s.chars();
    let first = chars.next().unwrap().to_uppercase().to_string();
    first + chars.as_str()
}

#[test]
fn zero_noise_realization_is_plain_substitution() {
    let b = default_assets().bundle;
    let cfg = SamplerConfig::default();
    for id in 0..5 {
        let g = sample_scene(id, 11, &cfg).unwrap();
        for c in enumerate_candidates(&g, &b) {
            for v in b.variants(c.program.family()) {
                let mut rng = StreamRng::new(11, id, Stream::Questions);
                let got = realize_variant(v, &c.program, &b, &mut rng, &NO_NOISE).unwrap();
                assert_eq!(got, substitute(b.variant_text(v).unwrap(), &c.program, &b));
            }
        }
    }
}
