use std::f64::consts::{FRAC_PI_2, TAU};

use arrowvqa_core::eval::{score, GoldAnswer, PredictionRecord};
use arrowvqa_core::geometry::{
    cardinal_direction, intrinsic_bearing, is_near_boundary, relative_direction, relative_direction_from_bearing,
    Pose, CARDINAL_SECTOR, RELATION_SECTOR,
};
use arrowvqa_core::question::{answer_vocabulary, Answer, TaskKind};
use arrowvqa_core::rng::{Stream, StreamRng};
use arrowvqa_core::scene::{build_relation_table, sample_scene, validate_scene, SamplerConfig};
use arrowvqa_core::split::{Split, SplitFractions};
use arrowvqa_core::stats::{chi_square_uniform, max_min_ratio};
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -50.0..50.0f64
}

fn pose() -> impl Strategy<Value = Pose> {
    (coord(), coord(), 0.0..TAU).prop_map(|(x, y, h)| Pose::new(x, y, h).unwrap())
}

fn distinct_pair() -> impl Strategy<Value = (Pose, Pose)> {
    (pose(), pose()).prop_filter("coincident", |(a, b)| a.distance_to(b) > 1e-6)
}

/// Floating-point noise may legitimately flip labels this close to a boundary.
fn fragile(angle: f64, width: f64) -> bool {
    is_near_boundary(angle, width, 1e-9).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn bearing_lies_in_its_sector((r, t) in distinct_pair()) {
        let b = intrinsic_bearing(&r, &t).unwrap();
        prop_assert!((0.0..TAU).contains(&b));
        let k = relative_direction_from_bearing(b).sector() as f64;
        let centre = k * RELATION_SECTOR;
        let off = (b - centre + TAU / 2.0).rem_euclid(TAU) - TAU / 2.0;
        let half = RELATION_SECTOR / 2.0 + 1e-12;
        prop_assert!((-half..half).contains(&off));
    }

    #[test]
    fn rigid_motion_keeps_relations((r, t) in distinct_pair(), alpha in 0.0..TAU, dx in coord(), dy in coord()) {
        prop_assume!(!fragile(intrinsic_bearing(&r, &t).unwrap(), RELATION_SECTOR));
        let before = relative_direction(&r, &t).unwrap();
        let moved = |p: &Pose| p.rotated(alpha).unwrap().translated(dx, dy).unwrap();
        prop_assert_eq!(relative_direction(&moved(&r), &moved(&t)).unwrap(), before);
    }

    #[test]
    fn scaling_keeps_relations((r, t) in distinct_pair(), log_s in -3.0..3.0f64) {
        prop_assume!(!fragile(intrinsic_bearing(&r, &t).unwrap(), RELATION_SECTOR));
        let s = 10f64.powf(log_s);
        let scale = |p: &Pose| Pose::new(p.x() * s, p.y() * s, p.heading()).unwrap();
        prop_assert_eq!(relative_direction(&scale(&r), &scale(&t)).unwrap(), relative_direction(&r, &t).unwrap());
    }

    #[test]
    fn swapping_roles_turns_bearing_by_heading_difference((r, t) in distinct_pair()) {
        // Seen from t, r lies along the reversed offset, measured from t's heading.
        let a = intrinsic_bearing(&r, &t).unwrap();
        let b = intrinsic_bearing(&t, &r).unwrap();
        let expected = (a + r.heading() - t.heading() + TAU / 2.0).rem_euclid(TAU);
        let diff = (b - expected + TAU / 2.0).rem_euclid(TAU) - TAU / 2.0;
        prop_assert!(diff.abs() < 1e-9, "{} vs {}", b, expected);
    }

    #[test]
    fn quarter_turns_rotate_cardinals(p in pose(), k in 0u32..4) {
        prop_assume!(!fragile(p.heading(), CARDINAL_SECTOR));
        let turned = p.rotated(f64::from(k) * FRAC_PI_2).unwrap();
        let order = ["east", "north", "west", "south"];
        let i = order.iter().position(|l| *l == cardinal_direction(&p).label()).unwrap();
        prop_assert_eq!(cardinal_direction(&turned).label(), order[(i + k as usize) % 4]);
    }

    #[test]
    fn split_assignment_matches_counts(n in 0u64..5000, train in 0.0..1.0f64, share in 0.0..1.0f64) {
        let val = (1.0 - train) * share;
        let f = SplitFractions { train, val, test: 1.0 - train - val };
        let counts = f.counts(n);
        prop_assert_eq!(counts.iter().sum::<u64>(), n);
        let mut seen = [0u64; 3];
        let mut last = 0;
        for id in 0..n {
            let s = f.assign(id, n).unwrap();
            let i = Split::ALL.iter().position(|x| *x == s).unwrap();
            prop_assert!(i >= last, "splits are contiguous blocks");
            last = i;
            seen[i] += 1;
        }
        prop_assert_eq!(seen, counts);
        prop_assert!(f.assign(n, n).is_err());
    }

    #[test]
    fn chi_square_and_ratio_basics(counts in prop::collection::vec(1u64..500, 2..9), c in 1u64..100) {
        prop_assert!(chi_square_uniform(&counts) >= 0.0);
        prop_assert!(max_min_ratio(&counts) >= 1.0);
        let flat = vec![c; counts.len()];
        prop_assert_eq!(chi_square_uniform(&flat), 0.0);
        prop_assert_eq!(max_min_ratio(&flat), 1.0);
    }

    #[test]
    fn below_stays_in_range(seed: u64, id: u64, n in 1u64..1000) {
        let mut rng = StreamRng::new(seed, id, Stream::Custom(3));
        for _ in 0..50 {
            prop_assert!(rng.below(n) < n);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn sampled_scenes_satisfy_invariants(id: u64, seed: u64) {
        let cfg = SamplerConfig::default();
        let g = sample_scene(id, seed, &cfg).unwrap();
        prop_assert!(validate_scene(&g, &cfg).is_empty());
        let n = g.objects.len();
        prop_assert!((3..=5).contains(&n));
        prop_assert_eq!(g.relations.len(), n * (n - 1));
        for (i, a) in g.objects.iter().enumerate() {
            for b in &g.objects[i + 1..] {
                prop_assert!(a.pose.distance_to(&b.pose) >= cfg.min_separation);
                prop_assert_ne!(a.color, b.color);
            }
        }
        let table = build_relation_table(&g.objects, cfg.boundary_epsilon, &cfg.cardinal_frame).unwrap();
        prop_assert_eq!(&table.relations, &g.relations);
        prop_assert_eq!(sample_scene(id, seed, &cfg).unwrap(), g);
    }

    #[test]
    fn self_match_scores_perfectly(answers in prop::collection::vec((0usize..6, 0usize..8), 1..200)) {
        let gold: Vec<GoldAnswer> = answers
            .iter()
            .enumerate()
            .map(|(i, &(t, a))| {
                let task = TaskKind::ALL[t];
                let vocab: Vec<Answer> = answer_vocabulary(task);
                GoldAnswer { question_id: i as u64 * 3, task, answer: vocab[a % vocab.len()] }
            })
            .collect();
        let preds: Vec<PredictionRecord> = gold
            .iter()
            .map(|g| PredictionRecord { question_id: g.question_id, answer: g.answer.to_string(), epoch: None })
            .collect();
        let r = score(&preds, &gold).unwrap();
        prop_assert_eq!(r.overall_accuracy, 1.0);
        prop_assert_eq!(r.missing_rate, 0.0);
        let total: u64 = r.tasks.iter().map(|t| t.tally.total).sum();
        prop_assert_eq!(total, gold.len() as u64);
    }

    #[test]
    fn prediction_order_is_irrelevant(
        answers in prop::collection::vec((0usize..6, 0usize..8, any::<bool>()), 1..200),
        rotate in 0usize..200,
    ) {
        let gold: Vec<GoldAnswer> = answers
            .iter()
            .enumerate()
            .map(|(i, &(t, a, _))| {
                let task = TaskKind::ALL[t];
                let vocab = answer_vocabulary(task);
                GoldAnswer { question_id: i as u64, task, answer: vocab[a % vocab.len()] }
            })
            .collect();
        let mut preds: Vec<PredictionRecord> = gold
            .iter()
            .zip(&answers)
            .filter(|(g, _)| g.question_id % 7 != 3)
            .map(|(g, &(_, _, right))| PredictionRecord {
                question_id: g.question_id,
                answer: if right { g.answer.to_string() } else { "wrong".into() },
                epoch: None,
            })
            .collect();
        let before = score(&preds, &gold).unwrap();
        let k = rotate % preds.len().max(1);
        preds.rotate_left(k);
        preds.reverse();
        prop_assert_eq!(score(&preds, &gold).unwrap(), before);
    }
}
