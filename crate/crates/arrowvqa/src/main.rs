use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use arrowvqa::core::eval::{blind_baseline, curves_tsv, epoch_curves, score};
use arrowvqa::core::question::TaskQuotas;
use arrowvqa::core::render::render_scene;
use arrowvqa::core::scene::SceneGraph;
use arrowvqa::core::split::{Split, SplitFractions};
use arrowvqa::dataset::read_json;
use arrowvqa::evaluate::{format_score, gold_answers, read_predictions};
use arrowvqa::io::{encode_png, json_bytes};
use arrowvqa::report::format_report;
use arrowvqa::{assets, build_dataset, default_assets, load_assets, stats_report, verify_dataset, BuildConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "arrowvqa", version, about = "Build, check and score oriented-arrow spatial VQA corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a dataset.
    Generate {
        /// TOML file with any BuildConfig fields; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        scenes: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Train, val and test fractions, e.g. 0.8,0.1,0.1.
        #[arg(long)]
        splits: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write scene graphs and questions only.
        #[arg(long)]
        no_render: bool,
        /// Questions per image for every task.
        #[arg(long)]
        quota: Option<u32>,
        /// Directory with templates.json, synonyms.json and metadata.json.
        #[arg(long)]
        templates: Option<PathBuf>,
    },
    /// Print corpus statistics.
    Stats {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Re-check digests, scene graphs and answers.
    Verify {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Render one scene from a scenes.json file.
    Render {
        #[arg(long)]
        scene_file: PathBuf,
        #[arg(long)]
        id: u64,
        #[arg(long)]
        out: PathBuf,
        /// TOML file whose camera and style sections are used.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score a predictions file (one JSON record per line).
    Evaluate {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value = "test")]
        split: String,
        #[arg(long)]
        predictions: PathBuf,
        /// Write a per-epoch accuracy table here (tab-separated).
        #[arg(long)]
        curves: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Best constant-answer accuracy per task.
    Baseline {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value = "test")]
        split: String,
        #[arg(long)]
        json: bool,
    },
    /// Write the built-in asset files to a directory for editing.
    InitAssets {
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_fractions(s: &str) -> Result<SplitFractions> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad --splits {s:?}"))?;
    let [train, val, test] = parts[..] else {
        bail!("--splits needs three comma-separated fractions");
    };
    Ok(SplitFractions { train, val, test })
}

fn parse_split(s: &str) -> Result<Split> {
    s.parse().map_err(|_| anyhow::anyhow!("unknown split {s:?}; expected train, val or test"))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Generate {
            config,
            scenes,
            seed,
            splits,
            out,
            no_render,
            quota,
            templates,
        } => {
            let mut cfg = match &config {
                Some(p) => BuildConfig::from_toml_file(p)?,
                None => BuildConfig::default(),
            };
            if let Some(n) = scenes {
                cfg.total_scenes = n;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(s) = splits {
                cfg.split_fractions = parse_fractions(&s)?;
            }
            if out.is_some() {
                cfg.out = out;
            }
            if no_render {
                cfg.render = false;
            }
            if let Some(q) = quota {
                cfg.questions.quotas = TaskQuotas::uniform(q);
            }
            if templates.is_some() {
                cfg.templates = templates;
            }
            let Some(out) = cfg.out.clone() else {
                bail!("no output directory; pass --out or set `out` in the config file");
            };
            let loaded = match &cfg.templates {
                Some(dir) => load_assets(dir)?,
                None => default_assets(),
            };
            let manifest = build_dataset(&cfg, &loaded, &out)?;
            for s in &manifest.splits {
                println!("{:<5} {:>6} scenes {:>8} questions", s.split.name(), s.scenes, s.questions);
            }
            println!("wrote {} files to {}", manifest.files.len() + 1, out.display());
            Ok(true)
        }
        Command::Stats { dir, json } => {
            let r = stats_report(&dir)?;
            if json {
                print!("{}", String::from_utf8(json_bytes(&r))?);
            } else {
                print!("{}", format_report(&r));
            }
            Ok(true)
        }
        Command::Verify { dir, json } => {
            let r = verify_dataset(&dir);
            if json {
                print!("{}", String::from_utf8(json_bytes(&r))?);
            } else {
                for v in &r.violations {
                    println!("{}", serde_json::to_string(v)?);
                }
                let verdict = if r.passed() { "PASS" } else { "FAIL" };
                println!(
                    "{verdict}: {} scenes, {} questions, {} violations",
                    r.scenes,
                    r.questions,
                    r.violations.len()
                );
            }
            Ok(r.passed())
        }
        Command::Render {
            scene_file,
            id,
            out,
            config,
        } => {
            let cfg = match &config {
                Some(p) => BuildConfig::from_toml_file(p)?,
                None => BuildConfig::default(),
            };
            let scenes: Vec<SceneGraph> = read_json(&scene_file)?;
            let Some(g) = scenes.iter().find(|g| g.scene_id == id) else {
                bail!("scene {id} not in {}", scene_file.display());
            };
            let img = render_scene(g, &cfg.camera, &cfg.style)?;
            std::fs::write(&out, encode_png(&img)).with_context(|| format!("writing {}", out.display()))?;
            Ok(true)
        }
        Command::Evaluate {
            dir,
            split,
            predictions,
            curves,
            json,
        } => {
            let gold = gold_answers(&dir, parse_split(&split)?)?;
            let preds = read_predictions(&predictions)?;
            if let Some(path) = curves {
                let table = epoch_curves(&preds, &gold)?;
                std::fs::write(&path, curves_tsv(&table)).with_context(|| format!("writing {}", path.display()))?;
                if let Some((_, last)) = table.last() {
                    print!("{}", format_score(last));
                }
                return Ok(true);
            }
            let report = score(&preds, &gold)?;
            if json {
                print!("{}", String::from_utf8(json_bytes(&report))?);
            } else {
                print!("{}", format_score(&report));
            }
            Ok(true)
        }
        Command::Baseline { dir, split, json } => {
            let gold = gold_answers(&dir, parse_split(&split)?)?;
            let b = blind_baseline(&gold);
            if json {
                print!("{}", String::from_utf8(json_bytes(&b))?);
            } else {
                for e in &b {
                    println!(
                        "{:<22} {:>7.4}  ({} of {} questions, answer {})",
                        e.task.name(),
                        e.accuracy,
                        (e.accuracy * e.questions as f64).round() as u64,
                        e.questions,
                        e.answer.as_deref().unwrap_or("-")
                    );
                }
            }
            Ok(true)
        }
        Command::InitAssets { out } => {
            assets::write_default_assets(&out).with_context(|| format!("writing {}", out.display()))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
