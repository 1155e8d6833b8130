//! End-to-end acceptance checks. Runs without the libtest harness so that the
//! verdict table is always printed; exits nonzero if any check fails.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use arrowvqa::core::eval::{blind_baseline, GoldAnswer};
use arrowvqa::core::geometry::{
    cardinal_direction, is_near_boundary, relative_direction, CardinalDirection, Pose, RelativeDirection,
    CARDINAL_SECTOR, RELATION_SECTOR,
};
use arrowvqa::core::question::{answer_vocabulary, achievable_support, ProgramFamily, TaskKind};
use arrowvqa::core::render::{render_layers, Surface};
use arrowvqa::core::rng::{Stream, StreamRng};
use arrowvqa::core::scene::ObjectColor;
use arrowvqa::core::split::{image_name, Split};
use arrowvqa::dataset::{read_manifest, read_questions, read_scenes};
use arrowvqa::io::decode_png;
use arrowvqa::{build_dataset, default_assets, stats_report, verify_dataset, BuildConfig};
use rayon::prelude::*;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn build(dir: &Path, scenes: u64, seed: u64, render: bool) -> PathBuf {
    let cfg = BuildConfig {
        total_scenes: scenes,
        master_seed: seed,
        render,
        ..BuildConfig::default()
    };
    build_dataset(&cfg, &default_assets(), dir).expect("build");
    dir.to_path_buf()
}

fn splits_of(dir: &Path) -> [u64; 3] {
    let m = read_manifest(dir).expect("manifest");
    Split::ALL.map(|s| m.split(s).map_or(0, |x| x.scenes))
}

fn total_questions(dir: &Path) -> u64 {
    read_manifest(dir).expect("manifest").total_questions()
}

fn splits(full: &Path, small: &Path) -> Outcome {
    let a = splits_of(full);
    let b = splits_of(small);
    Outcome {
        id: 1,
        name: "scene splits",
        pass: a == [6400, 800, 800] && b == [160, 20, 20],
        detail: format!("8000 -> {a:?}, 200 -> {b:?}"),
    }
}

fn volume(full: &Path, small: &Path) -> Outcome {
    let total = total_questions(full);
    let per_image = total as f64 / 8000.0;
    let small_total = total_questions(small);
    let target = 432_948.0;
    let pass = (total as f64 - target).abs() <= 0.10 * target
        && (per_image - 54.0).abs() <= 6.0
        && small_total.abs_diff(10_820) <= 1_100;
    Outcome {
        id: 2,
        name: "question volume",
        pass,
        detail: format!(
            "8000 scenes -> {total} questions ({per_image:.2} per image); 200 scenes -> {small_total}"
        ),
    }
}

fn balance(dir: &Path) -> Outcome {
    let r = stats_report(dir).expect("stats");
    let mut pass = true;
    let mut cells = Vec::new();
    for t in &r.tasks {
        let ok = t.stats.max_min_ratio <= 1.25 && t.p_value >= 0.01;
        pass &= ok;
        cells.push(format!("{} ratio {:.3} p {:.3}", t.stats.task, t.stats.max_min_ratio, t.p_value));
    }
    Outcome {
        id: 3,
        name: "answer balance (500 scenes)",
        pass,
        detail: cells.join("; "),
    }
}

/// Half-degree cells; every relation and cardinal boundary falls on a cell edge.
const CELLS: usize = 720;

fn relation_table() -> Vec<RelativeDirection> {
    // Sector k spans [k·45° − 22.5°, k·45° + 22.5°), labels counterclockwise
    // from straight ahead.
    let labels = [
        RelativeDirection::Front,
        RelativeDirection::LeftFront,
        RelativeDirection::Left,
        RelativeDirection::LeftBehind,
        RelativeDirection::Behind,
        RelativeDirection::RightBehind,
        RelativeDirection::Right,
        RelativeDirection::RightFront,
    ];
    (0..CELLS)
        .map(|c| {
            let mid = (c as f64 + 0.5) / 2.0;
            let mut found = RelativeDirection::Front;
            for (k, l) in labels.iter().enumerate() {
                let lo = k as f64 * 45.0 - 22.5;
                let hi = lo + 45.0;
                if (lo..hi).contains(&mid) || (lo..hi).contains(&(mid - 360.0)) {
                    found = *l;
                }
            }
            found
        })
        .collect()
}

fn cardinal_table() -> Vec<CardinalDirection> {
    (0..CELLS)
        .map(|c| {
            let mid = (c as f64 + 0.5) / 2.0;
            if !(45.0..315.0).contains(&mid) {
                CardinalDirection::East
            } else if mid < 135.0 {
                CardinalDirection::North
            } else if mid < 225.0 {
                CardinalDirection::West
            } else {
                CardinalDirection::South
            }
        })
        .collect()
}

fn cell(radians: f64) -> usize {
    ((radians.to_degrees() * 2.0).floor() as usize).min(CELLS - 1)
}

/// Bearing from the angle between the heading and the offset (acos) plus the
/// sign of their cross product, instead of rotating and taking atan2.
fn oracle_bearing(r: &Pose, t: &Pose) -> f64 {
    let (dx, dy) = (t.x() - r.x(), t.y() - r.y());
    let len = (dx * dx + dy * dy).sqrt();
    let (fx, fy) = (r.heading().cos(), r.heading().sin());
    let cos = ((fx * dx + fy * dy) / len).clamp(-1.0, 1.0);
    let angle = cos.acos();
    if fx * dy - fy * dx >= 0.0 {
        angle
    } else {
        TAU - angle
    }
}

fn random_pose(rng: &mut StreamRng, extent: f64) -> Pose {
    Pose::new(rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(0.0, TAU)).unwrap()
}

fn random_pair(rng: &mut StreamRng) -> (Pose, Pose) {
    loop {
        let r = random_pose(rng, 3.0);
        let t = random_pose(rng, 3.0);
        if r.distance_to(&t) > 1e-6 {
            return (r, t);
        }
    }
}

/// True when floating-point noise could legitimately flip a label.
fn fragile(angle: f64, width: f64) -> bool {
    is_near_boundary(angle, width, 1e-9).unwrap()
}

fn turn_left(c: CardinalDirection) -> CardinalDirection {
    match c {
        CardinalDirection::East => CardinalDirection::North,
        CardinalDirection::North => CardinalDirection::West,
        CardinalDirection::West => CardinalDirection::South,
        CardinalDirection::South => CardinalDirection::East,
    }
}

fn geometry() -> Outcome {
    const TRIALS: usize = 10_000;
    let rel = relation_table();
    let card = cardinal_table();
    let mut rng = StreamRng::new(0x00ac_ce97, 0, Stream::Custom(1));
    let mut mismatches = 0;
    for _ in 0..TRIALS {
        let (r, t) = random_pair(&mut rng);
        if relative_direction(&r, &t).unwrap() != rel[cell(oracle_bearing(&r, &t))] {
            mismatches += 1;
        }
        if cardinal_direction(&r) != card[cell(r.heading())] {
            mismatches += 1;
        }
    }

    let mut failures = [0usize; 3];
    let mut skipped = 0;
    for _ in 0..TRIALS {
        let (r, t) = random_pair(&mut rng);
        let before = relative_direction(&r, &t).unwrap();
        if fragile(oracle_bearing(&r, &t), RELATION_SECTOR) || fragile(r.heading(), CARDINAL_SECTOR) {
            skipped += 1;
            continue;
        }
        let c0 = cardinal_direction(&r);

        let alpha = rng.uniform(0.0, TAU);
        let (r2, t2) = (r.rotated(alpha).unwrap(), t.rotated(alpha).unwrap());
        let quarter = rng.below(4);
        let rq = r.rotated(quarter as f64 * FRAC_PI_2).unwrap();
        let mut expected = c0;
        for _ in 0..quarter {
            expected = turn_left(expected);
        }
        if relative_direction(&r2, &t2).unwrap() != before || cardinal_direction(&rq) != expected {
            failures[0] += 1;
        }

        let (dx, dy) = (rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0));
        let (r3, t3) = (r.translated(dx, dy).unwrap(), t.translated(dx, dy).unwrap());
        if relative_direction(&r3, &t3).unwrap() != before || cardinal_direction(&r3) != c0 {
            failures[1] += 1;
        }

        let s = 10f64.powf(rng.uniform(-2.0, 2.0));
        let r4 = Pose::new(r.x() * s, r.y() * s, r.heading()).unwrap();
        let t4 = Pose::new(t.x() * s, t.y() * s, t.heading()).unwrap();
        if relative_direction(&r4, &t4).unwrap() != before || cardinal_direction(&r4) != c0 {
            failures[2] += 1;
        }
    }
    Outcome {
        id: 4,
        name: "geometry oracle",
        pass: mismatches == 0 && failures == [0, 0, 0],
        detail: format!(
            "{mismatches} oracle mismatches in {TRIALS} configurations; rotation/translation/scale failures {failures:?} \
             ({skipped} trials within 1e-9 rad of a boundary skipped)"
        ),
    }
}

fn oracle_consistency(dirs: &[&Path]) -> Outcome {
    let mut pass = true;
    let mut cells = Vec::new();
    for d in dirs {
        let r = verify_dataset(d);
        pass &= r.passed() && r.questions > 0;
        cells.push(format!("{} questions, {} violations", r.questions, r.violations.len()));
    }
    Outcome {
        id: 5,
        name: "stored answers re-execute",
        pass,
        detail: cells.join("; "),
    }
}

fn files_under(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn determinism(a: &Path, b: &Path) -> Outcome {
    let fa = files_under(a);
    let fb = files_under(b);
    let pngs = fa.keys().filter(|k| k.ends_with(".png")).count();
    let differing: Vec<&String> = fa.keys().filter(|k| fa.get(*k) != fb.get(*k)).collect();
    let pass = !fa.is_empty() && fa.len() == fb.len() && differing.is_empty() && pngs == 200;
    Outcome {
        id: 6,
        name: "byte determinism",
        pass,
        detail: format!("{} files ({pngs} PNG) compared, {} differ", fa.len(), differing.len()),
    }
}

fn within(p: [u8; 3], rgb: [u8; 3], tol: u8) -> bool {
    p.iter().zip(rgb).all(|(a, b)| a.abs_diff(b) <= tol)
}

fn identifiability(dir: &Path) -> Outcome {
    let cfg = BuildConfig::default();
    let mut scenes = Vec::new();
    for split in Split::ALL {
        scenes.extend(read_scenes(dir, split).unwrap().into_iter().map(|g| (split, g)));
    }
    let ground = cfg.style.ground_rgb;
    let results: Vec<(u32, u32, u32, u32)> = scenes
        .par_iter()
        .map(|(split, g)| {
            let path = dir.join(split.name()).join("images").join(image_name(*split, g.scene_id));
            let img = decode_png(&fs::read(path).unwrap()).unwrap();
            let (_, surfaces) = render_layers(g, &cfg.camera, &cfg.style).unwrap();
            let (mut weak_color, mut leaked, mut weak_shadow, mut min_arrow) = (0, 0, 0, u32::MAX);
            for c in ObjectColor::ALL {
                let n = img.pixels.chunks_exact(3).filter(|p| within([p[0], p[1], p[2]], c.rgb(), 60)).count() as u32;
                if g.has_color(c) {
                    min_arrow = min_arrow.min(n);
                    if n < 30 {
                        weak_color += 1;
                    }
                } else if n > 0 {
                    leaked += 1;
                }
            }
            for i in 0..g.objects.len() {
                let mut n = 0;
                for y in 0..img.height {
                    for x in 0..img.width {
                        // Counted only where the decoded pixel is visibly darker than lit ground.
                        if let Surface::Shadow(bits) = surfaces.at(x, y) {
                            let p = img.pixel(x, y);
                            if bits & (1 << i) != 0 && p.iter().zip(ground).all(|(a, b)| *a < b) {
                                n += 1;
                            }
                        }
                    }
                }
                if n < 10 {
                    weak_shadow += 1;
                }
            }
            (weak_color, leaked, weak_shadow, min_arrow)
        })
        .collect();
    let weak_color: u32 = results.iter().map(|r| r.0).sum();
    let leaked: u32 = results.iter().map(|r| r.1).sum();
    let weak_shadow: u32 = results.iter().map(|r| r.2).sum();
    let min_arrow = results.iter().map(|r| r.3).min().unwrap_or(0);
    let objects: usize = scenes.iter().map(|(_, g)| g.objects.len()).sum();
    Outcome {
        id: 7,
        name: "renderer identifiability (200 scenes)",
        pass: scenes.len() == 200 && weak_color == 0 && leaked == 0 && weak_shadow == 0,
        detail: format!(
            "{objects} objects: {weak_color} under 30 arrow pixels (fewest {min_arrow}), \
             {leaked} absent colors with matching pixels, {weak_shadow} under 10 shadow pixels"
        ),
    }
}

fn bias_audit(dir: &Path) -> Outcome {
    let mut gold = Vec::new();
    for split in Split::ALL {
        gold.extend(read_questions(dir, split).unwrap().into_iter().map(|q| GoldAnswer {
            question_id: q.question_id,
            task: q.task,
            answer: q.answer,
        }));
    }
    let cfg = BuildConfig::default();
    let mut pass = true;
    let mut cells = Vec::new();
    for e in blind_baseline(&gold) {
        let support = if e.task == TaskKind::Counting {
            achievable_support(e.task, cfg.sampler.min_objects, cfg.sampler.max_objects, &ProgramFamily::ALL).len()
        } else {
            answer_vocabulary(e.task).len()
        };
        let bound = 1.0 / support as f64 + 0.05;
        pass &= e.questions > 0 && e.accuracy <= bound;
        cells.push(format!("{} {:.4} <= {:.4}", e.task, e.accuracy, bound));
    }
    Outcome {
        id: 8,
        name: "blind baseline (500 scenes)",
        pass,
        detail: cells.join("; "),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let full = build(&root.join("full"), 8000, 0, false);
    let small = build(&root.join("small"), 200, 0, false);
    let mid = build(&root.join("mid"), 500, 1, false);
    let rendered_a = build(&root.join("a").join("ds"), 200, 7, true);
    let rendered_b = build(&root.join("b").join("other"), 200, 7, true);

    let outcomes = [
        splits(&full, &small),
        volume(&full, &small),
        balance(&mid),
        geometry(),
        oracle_consistency(&[&full, &small, &mid, &rendered_a]),
        determinism(&rendered_a, &rendered_b),
        identifiability(&rendered_a),
        bias_audit(&mid),
    ];
    let mut all = true;
    for o in &outcomes {
        all &= o.pass;
        println!("{} {}. {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.name, o.detail);
    }
    println!(
        "NOT RUN 9. model learning curves: needs training external models; scoring is covered by 8 and the evaluation tests"
    );
    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
